//! Parameter scans behind the `lm05` binary: QBER against μ, key rates
//! against channel loss, the largest secure loss and the optimal μ.

mod config;
mod csv_io;

use std::fmt;
use std::path::PathBuf;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::{ChannelSpec, SystemParams};
use crate::rate::{find_zero_crossing, optimal_mu, r_pns, OperatingPoint};
use crate::sim::{run_simulation, DoubleClickPolicy, SimConfig};

pub use config::{load_config, parse_config, DarkCountConvention, PAPER_DEFAULTS_CONF, PAPER_DEFAULTS_LB3781_CONF};
pub use csv_io::{emit_csv, read_csv, write_csv, CSV_COLUMNS};

/// Inclusive grid `min, min + step, ..., ≤ max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRange {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl ScanRange {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self> {
        let r = Self { min, max, step };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min < self.max) || !self.max.is_finite() || !self.min.is_finite() {
            return Err(Error::InvalidParams(format!(
                "scan range needs min < max (got {} .. {})",
                self.min, self.max
            )));
        }
        if !(self.step > 0.0) {
            return Err(Error::domain("step", self.step, "> 0"));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.min + k as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub params: SystemParams,
    /// How `db` was specified; echoed on every run.
    pub dark_convention: DarkCountConvention,
    /// Mean photon number held fixed in loss scans and single-point runs.
    pub mu: f64,
    /// One-way channel loss (dB) held fixed in μ scans and single-point runs.
    pub l_c: f64,
    pub mu_range: ScanRange,
    pub loss_range: ScanRange,
    /// Upper end of the bracket searched for the secure-loss crossing.
    pub crossing_max_db: f64,
    /// Monte Carlo trials per point; 0 disables the overlay.
    pub trials: u64,
    pub seed: u64,
    pub double_click_policy: DoubleClickPolicy,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            params: SystemParams::paper_defaults(),
            dark_convention: DarkCountConvention::PerDetector,
            mu: 0.15,
            l_c: 1.14,
            mu_range: ScanRange {
                min: 0.01,
                max: 1.7,
                step: 0.01,
            },
            loss_range: ScanRange {
                min: 0.0,
                max: 8.0,
                step: 0.1,
            },
            crossing_max_db: 40.0,
            trials: 0,
            seed: 1,
            double_click_policy: DoubleClickPolicy::Discard,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.mu > 0.0) {
            return Err(Error::domain("mu", self.mu, "> 0"));
        }
        ChannelSpec::new(self.l_c)?;
        self.mu_range.validate()?;
        if !(self.mu_range.min > 0.0) {
            return Err(Error::domain("mu_min", self.mu_range.min, "> 0"));
        }
        self.loss_range.validate()?;
        if !(self.loss_range.min >= 0.0) {
            return Err(Error::domain("loss_min", self.loss_range.min, ">= 0 dB"));
        }
        Ok(())
    }

    /// One line stating which dark-count convention is in force.
    pub fn dark_count_summary(&self) -> String {
        let total = 2.0 * self.params.db;
        match self.dark_convention {
            DarkCountConvention::PerDetector => format!(
                "dark counts: db = {:e} per detector per window (P_Dark = 2*db = {:e})",
                self.params.db, total
            ),
            DarkCountConvention::Total => format!(
                "dark counts: P_Dark = {:e} total, i.e. db = P_Dark/2 = {:e} per detector",
                total, self.params.db
            ),
        }
    }

    fn sim_config(&self, mu: f64, l_c: f64) -> Result<SimConfig> {
        Ok(SimConfig {
            double_click_policy: self.double_click_policy,
            ..SimConfig::new(mu, self.trials, self.seed, self.params, ChannelSpec::new(l_c)?)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum XUnit {
    #[serde(rename = "mu")]
    Mu,
    #[serde(rename = "dB")]
    Db,
}

impl XUnit {
    pub fn as_str(self) -> &'static str {
        match self {
            XUnit::Mu => "mu",
            XUnit::Db => "dB",
        }
    }
}

impl fmt::Display for XUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One row of a scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateCurvePoint {
    pub x: f64,
    pub x_unit: XUnit,
    pub p_all: f64,
    pub e_all: f64,
    pub empirical_qber: Option<f64>,
    pub qber_stderr: Option<f64>,
    pub beta: f64,
    pub r_raw_per_s: f64,
    pub r_pns_per_s: f64,
    pub secure: bool,
}

/// Analytic row at `(mu, l_c)`, plus the Monte Carlo QBER when
/// `cfg.trials > 0`. A point with no detections keeps empty empirical fields.
pub fn evaluate_point(cfg: &ExperimentConfig, mu: f64, l_c: f64, unit: XUnit) -> Result<RateCurvePoint> {
    let op = OperatingPoint::new(mu, cfg.params, ChannelSpec::new(l_c)?)?;
    let pred = r_pns(&op)?;
    let (empirical_qber, qber_stderr) = if cfg.trials > 0 {
        match run_simulation(&cfg.sim_config(mu, l_c)?) {
            Ok(res) => (Some(res.empirical_qber.value), Some(res.empirical_qber.stderr)),
            Err(Error::ZeroDetection { .. }) => (None, None),
            Err(e) => return Err(e),
        }
    } else {
        (None, None)
    };
    Ok(RateCurvePoint {
        x: if unit == XUnit::Mu { mu } else { l_c },
        x_unit: unit,
        p_all: pred.p_all,
        e_all: pred.e_all,
        empirical_qber,
        qber_stderr,
        beta: pred.beta,
        r_raw_per_s: pred.p_all * cfg.params.rep_rate,
        r_pns_per_s: pred.r_per_second,
        secure: pred.secure,
    })
}

/// Evaluates the given μ values at `cfg.l_c`. Output order follows `grid`.
pub fn scan_mu_at(cfg: &ExperimentConfig, grid: &[f64]) -> Result<Vec<RateCurvePoint>> {
    grid.par_iter()
        .map(|&mu| evaluate_point(cfg, mu, cfg.l_c, XUnit::Mu))
        .collect()
}

/// QBER against μ over `cfg.mu_range` at fixed channel loss.
pub fn scan_mu(cfg: &ExperimentConfig) -> Result<Vec<RateCurvePoint>> {
    cfg.validate()?;
    scan_mu_at(cfg, &cfg.mu_range.points())
}

pub fn scan_loss_at(cfg: &ExperimentConfig, grid: &[f64]) -> Result<Vec<RateCurvePoint>> {
    grid.par_iter()
        .map(|&l_c| evaluate_point(cfg, cfg.mu, l_c, XUnit::Db))
        .collect()
}

/// Raw and secure rates against channel loss over `cfg.loss_range` at fixed μ.
pub fn scan_loss(cfg: &ExperimentConfig) -> Result<Vec<RateCurvePoint>> {
    cfg.validate()?;
    scan_loss_at(cfg, &cfg.loss_range.points())
}

/// Re-evaluates `n` randomly chosen rows and checks they are reproduced
/// exactly. Returns the indices that were checked.
pub fn spot_check(cfg: &ExperimentConfig, points: &[RateCurvePoint], n: usize) -> Result<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut idx = sample(&mut rng, points.len(), n.min(points.len())).into_vec();
    idx.sort_unstable();
    for &i in &idx {
        let p = &points[i];
        let (mu, l_c) = match p.x_unit {
            XUnit::Mu => (p.x, cfg.l_c),
            XUnit::Db => (cfg.mu, p.x),
        };
        let again = evaluate_point(cfg, mu, l_c, p.x_unit)?;
        if again != *p {
            return Err(Error::InvalidParams(format!(
                "row {i} (x = {}) is not reproducible: {p:?} vs {again:?}",
                p.x
            )));
        }
    }
    Ok(idx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxLossReport {
    pub mu: f64,
    pub l_b: f64,
    /// Last secure one-way channel loss, dB.
    pub max_secure_loss_db: f64,
    pub r_pns_per_s: f64,
    pub r_raw_per_s: f64,
    pub beta: f64,
    pub e_all: f64,
}

/// Largest secure channel loss at `cfg.mu`, searched over
/// `[cfg.loss_range.min, cfg.crossing_max_db]`, with the rates at that point.
pub fn report_max_secure_loss(cfg: &ExperimentConfig) -> Result<MaxLossReport> {
    cfg.params.validate()?;
    let crossing = find_zero_crossing(&cfg.params, cfg.mu, cfg.loss_range.min, cfg.crossing_max_db)?;
    let op = OperatingPoint::new(cfg.mu, cfg.params, ChannelSpec::new(crossing)?)?;
    let pred = r_pns(&op)?;
    Ok(MaxLossReport {
        mu: cfg.mu,
        l_b: cfg.params.l_b,
        max_secure_loss_db: crossing,
        r_pns_per_s: pred.r_per_second,
        r_raw_per_s: pred.p_all * cfg.params.rep_rate,
        beta: pred.beta,
        e_all: pred.e_all,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalMuReport {
    pub l_c: f64,
    pub mu: Option<f64>,
    pub r_pns_per_pulse: f64,
    pub r_pns_per_s: f64,
}

pub fn report_optimal_mu(cfg: &ExperimentConfig, l_c: f64) -> Result<OptimalMuReport> {
    cfg.params.validate()?;
    let best = optimal_mu(&cfg.params, &ChannelSpec::new(l_c)?)?;
    Ok(OptimalMuReport {
        l_c,
        mu: best.mu,
        r_pns_per_pulse: best.r_pns_per_pulse,
        r_pns_per_s: best.r_pns_per_pulse * cfg.params.rep_rate,
    })
}

/// Optimal μ at every loss of `cfg.loss_range`.
pub fn scan_optimal_mu(cfg: &ExperimentConfig) -> Result<Vec<OptimalMuReport>> {
    cfg.validate()?;
    cfg.loss_range
        .points()
        .par_iter()
        .map(|&l_c| report_optimal_mu(cfg, l_c))
        .collect()
}
