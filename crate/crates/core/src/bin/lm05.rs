use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use lm05::experiments::{
    emit_csv, load_config, report_max_secure_loss, report_optimal_mu, scan_loss, scan_mu,
    scan_optimal_mu, spot_check, ExperimentConfig, RateCurvePoint,
};
use lm05::link::{ChannelSpec, Preset};
use lm05::rate::{r_pns, OperatingPoint};
use lm05::sim::{write_records, SimConfig, Simulator, MAX_DUMP_TRIALS};

/// Trials used by `simulate` when neither the config nor `--trials` set any.
const DEFAULT_SIM_TRIALS: u64 = 1_000_000;

#[derive(Parser)]
#[command(name = "lm05", version, about = "LM05 two-way QKD rate model and Monte Carlo")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Flat key = value config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in parameter preset (applied before --config overrides are read).
    #[arg(long, global = true)]
    preset: Option<Preset>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo trials per point (0 = analytic only).
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// CSV output path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the summary as a single JSON object.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// QBER against mean photon number at fixed channel loss.
    ScanMu {
        #[arg(long)]
        mu_min: Option<f64>,
        #[arg(long)]
        mu_max: Option<f64>,
        #[arg(long)]
        mu_step: Option<f64>,
        #[arg(long)]
        l_c: Option<f64>,
    },
    /// Raw and secure key rate against one-way channel loss at fixed mu.
    ScanLoss {
        #[arg(long)]
        loss_min: Option<f64>,
        #[arg(long)]
        loss_max: Option<f64>,
        #[arg(long)]
        loss_step: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
    },
    /// Largest channel loss with a positive secure key rate.
    MaxLoss {
        #[arg(long)]
        mu: Option<f64>,
        /// Also report every built-in preset.
        #[arg(long)]
        all_presets: bool,
    },
    /// Mean photon number maximizing the secure rate.
    OptimalMu {
        #[arg(long)]
        l_c: Option<f64>,
        /// Evaluate at every loss of the loss grid instead of a single l_c.
        #[arg(long)]
        scan: bool,
    },
    /// Monte Carlo run at a single operating point.
    Simulate {
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        l_c: Option<f64>,
        /// Write every trial as JSON lines.
        #[arg(long)]
        dump: Option<PathBuf>,
        /// Allow --dump above 100000 trials.
        #[arg(long)]
        force_dump: bool,
    },
}

type AnyResult<T> = Result<T, Box<dyn std::error::Error>>;

fn base_config(c: &Common) -> AnyResult<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(p) = c.preset {
        cfg.params = p.params();
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(t) = c.trials {
        cfg.trials = t;
    }
    if let Some(o) = &c.out {
        cfg.output = Some(o.clone());
    }
    Ok(cfg)
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn print_points(json: bool, dark: &str, points: &[RateCurvePoint], out: Option<&Path>) -> AnyResult<()> {
    if json {
        let doc = json!({ "dark_counts": dark, "output": out, "points": points });
        println!("{}", serde_json::to_string_pretty(&doc)?);
        return Ok(());
    }
    println!("{dark}");
    println!(
        "{:>10} {:>5} {:>12} {:>10} {:>16} {:>9} {:>12} {:>12} {:>6}",
        "x", "unit", "p_all", "e_all", "empirical_qber", "beta", "r_raw/s", "r_pns/s", "secure"
    );
    for p in points {
        let emp = match (p.empirical_qber, p.qber_stderr) {
            (Some(q), Some(s)) => format!("{q:.5}±{s:.5}"),
            _ => "-".into(),
        };
        println!(
            "{:>10.4} {:>5} {:>12.5e} {:>10.5} {:>16} {:>9.4} {:>12.3} {:>12.3} {:>6}",
            p.x, p.x_unit, p.p_all, p.e_all, emp, p.beta, p.r_raw_per_s, p.r_pns_per_s, p.secure
        );
    }
    if let Some(path) = out {
        println!("wrote {} rows to {}", points.len(), path.display());
    }
    Ok(())
}

fn finish_scan(cfg: &ExperimentConfig, json: bool, points: Vec<RateCurvePoint>) -> AnyResult<()> {
    spot_check(cfg, &points, 10)?;
    if let Some(path) = &cfg.output {
        emit_csv(&points, path)?;
    }
    print_points(json, &cfg.dark_count_summary(), &points, cfg.output.as_deref())
}

fn run(cli: Cli) -> AnyResult<()> {
    let mut cfg = base_config(&cli.common)?;
    let json = cli.common.json;
    match cli.cmd {
        Cmd::ScanMu {
            mu_min,
            mu_max,
            mu_step,
            l_c,
        } => {
            set(&mut cfg.mu_range.min, mu_min);
            set(&mut cfg.mu_range.max, mu_max);
            set(&mut cfg.mu_range.step, mu_step);
            set(&mut cfg.l_c, l_c);
            let points = scan_mu(&cfg)?;
            finish_scan(&cfg, json, points)?;
        }
        Cmd::ScanLoss {
            loss_min,
            loss_max,
            loss_step,
            mu,
        } => {
            set(&mut cfg.loss_range.min, loss_min);
            set(&mut cfg.loss_range.max, loss_max);
            set(&mut cfg.loss_range.step, loss_step);
            set(&mut cfg.mu, mu);
            let points = scan_loss(&cfg)?;
            finish_scan(&cfg, json, points)?;
        }
        Cmd::MaxLoss { mu, all_presets } => {
            set(&mut cfg.mu, mu);
            let mut reports = vec![("configured".to_owned(), report_max_secure_loss(&cfg)?)];
            if all_presets {
                for p in Preset::ALL {
                    let c = ExperimentConfig {
                        params: p.params(),
                        ..cfg.clone()
                    };
                    reports.push((p.name().to_owned(), report_max_secure_loss(&c)?));
                }
            }
            if json {
                let list: Vec<_> = reports
                    .iter()
                    .map(|(name, r)| json!({ "params": name, "report": r }))
                    .collect();
                let doc = json!({ "dark_counts": cfg.dark_count_summary(), "max_loss": list });
                println!("{}", serde_json::to_string_pretty(&doc)?);
            } else {
                println!("{}", cfg.dark_count_summary());
                for (name, r) in &reports {
                    println!(
                        "{name}: mu = {}, l_B = {} dB -> max secure one-way loss {:.3} dB \
                         (R_PNS {:.3} bit/s, R_raw {:.1} bit/s, beta {:.4}, QBER {:.4})",
                        r.mu, r.l_b, r.max_secure_loss_db, r.r_pns_per_s, r.r_raw_per_s, r.beta, r.e_all
                    );
                }
            }
        }
        Cmd::OptimalMu { l_c, scan } => {
            set(&mut cfg.l_c, l_c);
            let reports = if scan {
                scan_optimal_mu(&cfg)?
            } else {
                vec![report_optimal_mu(&cfg, cfg.l_c)?]
            };
            if let Some(path) = &cfg.output {
                let file = File::create(path)?;
                let mut w = csv::Writer::from_writer(BufWriter::new(file));
                w.write_record(["l_c", "mu", "r_pns_per_pulse", "r_pns_per_s"])?;
                for r in &reports {
                    w.write_record([
                        r.l_c.to_string(),
                        r.mu.map(|m| m.to_string()).unwrap_or_default(),
                        r.r_pns_per_pulse.to_string(),
                        r.r_pns_per_s.to_string(),
                    ])?;
                }
                w.flush()?;
            }
            if json {
                let doc = json!({ "dark_counts": cfg.dark_count_summary(), "optimal_mu": reports });
                println!("{}", serde_json::to_string_pretty(&doc)?);
            } else {
                println!("{}", cfg.dark_count_summary());
                for r in &reports {
                    match r.mu {
                        Some(mu) => println!(
                            "l_C = {:.3} dB: optimal mu = {mu:.4}, R_PNS = {:.4e} bit/pulse = {:.3} bit/s",
                            r.l_c, r.r_pns_per_pulse, r.r_pns_per_s
                        ),
                        None => println!("l_C = {:.3} dB: no secure mu", r.l_c),
                    }
                }
            }
        }
        Cmd::Simulate {
            mu,
            l_c,
            dump,
            force_dump,
        } => {
            set(&mut cfg.mu, mu);
            set(&mut cfg.l_c, l_c);
            if cfg.trials == 0 {
                cfg.trials = DEFAULT_SIM_TRIALS;
            }
            let sim_cfg = SimConfig {
                double_click_policy: cfg.double_click_policy,
                ..SimConfig::new(cfg.mu, cfg.trials, cfg.seed, cfg.params, ChannelSpec::new(cfg.l_c)?)
            };
            let sim = Simulator::new(sim_cfg)?;
            if let Some(path) = &dump {
                if cfg.trials > MAX_DUMP_TRIALS && !force_dump {
                    return Err(format!(
                        "refusing to dump {} trials (limit {MAX_DUMP_TRIALS}); pass --force-dump",
                        cfg.trials
                    )
                    .into());
                }
                let file = File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
                write_records(&sim.records(), BufWriter::new(file))?;
            }
            let res = sim.run()?;
            let pred = r_pns(&OperatingPoint::new(cfg.mu, cfg.params, sim_cfg.channel)?)?;
            if json {
                let doc = json!({
                    "dark_counts": cfg.dark_count_summary(),
                    "mu": cfg.mu,
                    "l_c": cfg.l_c,
                    "seed": cfg.seed,
                    "result": res,
                    "p_all": pred.p_all,
                    "e_all": pred.e_all,
                    "empirical_qber": res.empirical_qber.value,
                    "qber_stderr": res.empirical_qber.stderr,
                    "r_raw_per_s": res.raw_rate_per_second,
                });
                println!("{}", serde_json::to_string_pretty(&doc)?);
            } else {
                println!("{}", cfg.dark_count_summary());
                println!(
                    "mu = {}, l_C = {} dB, seed = {}, eta = {:.6e}",
                    cfg.mu,
                    cfg.l_c,
                    cfg.seed,
                    sim.eta()
                );
                println!(
                    "sent {}  detected {}  errors {}  double clicks {}  no clicks {}",
                    res.sent, res.detected, res.errors, res.double_clicks, res.no_clicks
                );
                println!(
                    "QBER   {:.6} ± {:.6}   (model E_All {:.6})",
                    res.empirical_qber.value, res.empirical_qber.stderr, pred.e_all
                );
                println!(
                    "P_All  {:.6e} ± {:.2e} (model {:.6e})",
                    res.empirical_p_all.value, res.empirical_p_all.stderr, pred.p_all
                );
                println!("raw key rate {:.3} bit/s", res.raw_rate_per_second);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
