use lm05::experiments::{
    emit_csv, load_config, read_csv, report_max_secure_loss, report_optimal_mu, scan_loss,
    scan_loss_at, scan_mu, scan_mu_at, spot_check, ExperimentConfig, RateCurvePoint, ScanRange,
    XUnit, PAPER_DEFAULTS_CONF,
};
use lm05::link::{ChannelSpec, Preset, SystemParams};
use lm05::rate::{r_pns, OperatingPoint};
use proptest::prelude::*;

fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}

#[test]
fn qber_plateau_over_mu() {
    let cfg = ExperimentConfig::default();
    let grid = ScanRange::new(0.1, 1.7, 0.01).unwrap().points();
    for p in scan_mu_at(&cfg, &grid).unwrap() {
        assert!(p.e_all >= 0.033 && p.e_all <= 0.038, "mu {}: {}", p.x, p.e_all);
        assert!(p.e_all < 0.04);
    }
}

#[test]
fn qber_rises_at_low_mu() {
    let cfg = ExperimentConfig::default();
    let pts = scan_mu_at(&cfg, &[0.01, 0.15]).unwrap();
    assert!(pts[0].e_all > pts[1].e_all);
    assert!(pts[0].e_all > 0.038, "{}", pts[0].e_all);
}

#[test]
fn default_mu_scan_is_ordered() {
    let pts = scan_mu(&ExperimentConfig::default()).unwrap();
    assert_eq!(pts.len(), 170);
    assert!(pts.windows(2).all(|w| w[0].x < w[1].x));
    assert!(pts.iter().all(|p| p.x_unit == XUnit::Mu));
}

#[test]
fn loss_scan_reaches_zero_between_5_and_8_db() {
    let cfg = ExperimentConfig::default();
    let grid = ScanRange::new(0.0, 8.0, 0.25).unwrap().points();
    let pts = scan_loss_at(&cfg, &grid).unwrap();
    assert_eq!(pts[0].x, 0.0);
    let max = pts.iter().map(|p| p.r_pns_per_s).fold(0.0, f64::max);
    assert_eq!(pts[0].r_pns_per_s, max);
    assert!(pts.windows(2).all(|w| w[1].r_raw_per_s < w[0].r_raw_per_s));
    let first_zero = pts.iter().find(|p| p.r_pns_per_s == 0.0).unwrap();
    assert!((5.0..=8.0).contains(&first_zero.x), "{}", first_zero.x);
    assert!(pts.iter().filter(|p| p.x < 5.0).all(|p| p.secure));

    let plateau: Vec<f64> = pts.iter().filter(|p| p.x <= 5.68).map(|p| p.e_all).collect();
    let spread = plateau.iter().cloned().fold(f64::MIN, f64::max)
        - plateau.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 0.01, "{spread}");
}

#[test]
fn max_loss_for_both_presets() {
    for preset in Preset::ALL {
        let cfg = ExperimentConfig {
            params: preset.params(),
            ..ExperimentConfig::default()
        };
        let r = report_max_secure_loss(&cfg).unwrap();
        assert!((5.0..=8.0).contains(&r.max_secure_loss_db), "{preset}: {r:?}");
        assert!(r.r_pns_per_s > 0.0);
    }
}

#[test]
fn lossless_device_tolerates_more_channel_loss() {
    let cfg = ExperimentConfig {
        params: SystemParams::ideal(),
        ..ExperimentConfig::default()
    };
    let r = report_max_secure_loss(&cfg).unwrap();
    // Noiseless: secure exactly while P_S exceeds P'(mu).
    let pp = lm05::rate::p_prime(cfg.mu);
    let oracle = -5.0 * (-(1.0 - pp).ln() / cfg.mu).log10();
    assert!((r.max_secure_loss_db - oracle).abs() <= 0.01, "{r:?} vs {oracle}");
    assert!(r.max_secure_loss_db > 10.0);
    let op = OperatingPoint::new(0.15, cfg.params, ChannelSpec::new(oracle - 0.05).unwrap()).unwrap();
    assert!(r_pns(&op).unwrap().secure);
}

#[test]
fn optimal_mu_report_at_operating_loss() {
    let r = report_optimal_mu(&ExperimentConfig::default(), 1.14).unwrap();
    let mu = r.mu.unwrap();
    assert!(mu > 0.05 && mu < 0.5);
    assert!((r.r_pns_per_s - r.r_pns_per_pulse * 725_000.0).abs() < 1e-9);
}

#[test]
fn csv_round_trip_and_reproducibility() {
    let cfg = ExperimentConfig {
        trials: 20_000,
        loss_range: ScanRange::new(0.0, 6.0, 0.5).unwrap(),
        ..ExperimentConfig::default()
    };
    let pts = scan_loss(&cfg).unwrap();
    assert!(pts.iter().all(|p| p.empirical_qber.is_some()));
    let checked = spot_check(&cfg, &pts, 10).unwrap();
    assert_eq!(checked.len(), 10);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("loss.csv");
    emit_csv(&pts, &path).unwrap();
    let back = read_csv(&path).unwrap();
    assert_eq!(back.len(), pts.len());
    for (a, b) in pts.iter().zip(&back) {
        assert_eq!(a.x_unit, b.x_unit);
        assert_eq!(a.secure, b.secure);
        for (u, v) in [
            (a.x, b.x),
            (a.p_all, b.p_all),
            (a.e_all, b.e_all),
            (a.beta, b.beta),
            (a.r_raw_per_s, b.r_raw_per_s),
            (a.r_pns_per_s, b.r_pns_per_s),
            (a.empirical_qber.unwrap(), b.empirical_qber.unwrap()),
            (a.qber_stderr.unwrap(), b.qber_stderr.unwrap()),
        ] {
            assert!(rel_close(u, v, 5e-9), "{u} vs {v}");
        }
    }
}

#[test]
fn empty_csv_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    emit_csv(&[], &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(
        text,
        "x,x_unit,p_all,e_all,empirical_qber,qber_stderr,beta,r_raw_per_s,r_pns_per_s,secure\n"
    );
    assert!(read_csv(&path).unwrap().is_empty());
}

#[test]
fn csv_errors_name_the_path() {
    let err = emit_csv(&[], std::path::Path::new("/nonexistent-dir/x.csv")).unwrap_err();
    assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
}

#[test]
fn config_file_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("paper.conf");
    std::fs::write(&path, format!("{PAPER_DEFAULTS_CONF}\nmu = 0.2\nl_b = 3.781\n")).unwrap();
    let cfg = load_config(&path).unwrap();
    assert_eq!(cfg.mu, 0.2);
    assert_eq!(cfg.params, SystemParams::paper_defaults_quoted_lb());
    assert!(load_config(&dir.path().join("missing.conf")).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_preserves_nine_digits(
        x in 0.0f64..20.0, p in 1e-9f64..1.0, e in 0.0f64..0.5, beta in -50.0f64..1.0,
        r in 0.0f64..1e6, q in proptest::option::of(0.0f64..1.0), secure: bool,
    ) {
        let pt = RateCurvePoint {
            x, x_unit: XUnit::Db, p_all: p, e_all: e, empirical_qber: q,
            qber_stderr: q.map(|v| v / 10.0), beta, r_raw_per_s: r, r_pns_per_s: r / 2.0, secure,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        emit_csv(&[pt], &path).unwrap();
        let back = read_csv(&path).unwrap()[0];
        prop_assert!(rel_close(pt.x, back.x, 5e-9));
        prop_assert!(rel_close(pt.p_all, back.p_all, 5e-9));
        prop_assert!(rel_close(pt.e_all, back.e_all, 5e-9));
        prop_assert!(rel_close(pt.beta, back.beta, 5e-9));
        prop_assert!(rel_close(pt.r_raw_per_s, back.r_raw_per_s, 5e-9));
        prop_assert_eq!(pt.empirical_qber.is_some(), back.empirical_qber.is_some());
        prop_assert_eq!(pt.secure, back.secure);
    }
}
