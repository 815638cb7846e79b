//! Analytic detection and secure-key-rate model.
//!
//! Detection probabilities follow a weak coherent source through the lumped
//! transmission `η`; the secure rate is the photon-number-splitting bound
//!
//! ```text
//! R = P_All · [β(1 − τ(e/β)) − f_casc·H(e)],   β = (P_All − P′)/P_All
//! ```
//!
//! where `P′` is the probability of a multi-photon pulse that an eavesdropper
//! can split and `τ` the fraction removed by privacy amplification.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::{eta_overall, ChannelSpec, SystemParams};

/// QBER contribution of a click with no signal photon.
pub const DARK_COUNT_ERROR: f64 = 0.5;

/// Above this photon number the Poisson weight is evaluated in log space.
const POISSON_DIRECT_MAX: u32 = 20;

/// Bisection resolution of [`find_zero_crossing`], dB.
pub const CROSSING_RESOLUTION_DB: f64 = 0.01;

/// μ search interval and grid step for [`optimal_mu`].
pub const MU_SEARCH_MIN: f64 = 0.001;
pub const MU_SEARCH_MAX: f64 = 1.7;
pub const MU_SEARCH_STEP: f64 = 0.001;

/// Form of the multi-photon probability `P′` entering `β`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PPrimeVariant {
    /// `1 − (1 + μ + μ²/2 + ½·μ³/6)e^{−μ}`, with the halved cubic term.
    #[default]
    AsPrinted,
    /// `1 − (1 + μ + μ²/2 + μ³/6)e^{−μ}`, the Poisson tail `P(n ≥ 4)`.
    FourTermPoisson,
}

impl PPrimeVariant {
    pub fn name(self) -> &'static str {
        match self {
            PPrimeVariant::AsPrinted => "as_printed",
            PPrimeVariant::FourTermPoisson => "four_term_poisson",
        }
    }
}

impl fmt::Display for PPrimeVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PPrimeVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "as_printed" => Ok(PPrimeVariant::AsPrinted),
            "four_term_poisson" => Ok(PPrimeVariant::FourTermPoisson),
            _ => Err(Error::InvalidParams(format!(
                "unknown pprime_variant `{s}` (expected as_printed or four_term_poisson)"
            ))),
        }
    }
}

/// Mean photon number together with the device and channel it is launched into.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub mu: f64,
    pub params: SystemParams,
    pub channel: ChannelSpec,
}

impl OperatingPoint {
    pub fn new(mu: f64, params: SystemParams, channel: ChannelSpec) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::domain("mu", mu, "> 0"));
        }
        params.validate()?;
        ChannelSpec::new(channel.l_c)?;
        Ok(Self {
            mu,
            params,
            channel,
        })
    }

    pub fn eta(&self) -> f64 {
        eta_overall(&self.params, &self.channel)
    }
}

/// Every intermediate of the rate model at one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePrediction {
    pub p_signal: f64,
    pub p_dark: f64,
    pub p_all: f64,
    pub e_all: f64,
    pub p_prime: f64,
    pub beta: f64,
    /// `τ(e/β)`; 1 when `β ≤ 0`.
    pub tau_prime: f64,
    /// `β(1 − τ′) − f_casc·H(e)` before clamping. `None` when `β ≤ 0`.
    pub raw_bracket: Option<f64>,
    pub r_pns_per_pulse: f64,
    pub r_per_second: f64,
    pub secure: bool,
}

/// `μ^i e^{−μ} / i!`
pub fn poisson_p(i: u32, mu: f64) -> Result<f64> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::domain("mu", mu, ">= 0"));
    }
    if mu == 0.0 {
        return Ok(if i == 0 { 1.0 } else { 0.0 });
    }
    if i <= POISSON_DIRECT_MAX {
        let factorial: f64 = (1..=i).map(f64::from).product();
        Ok(mu.powi(i as i32) * (-mu).exp() / factorial)
    } else {
        let ln_factorial: f64 = (2..=i).map(|k| f64::from(k).ln()).sum();
        Ok((f64::from(i) * mu.ln() - mu - ln_factorial).exp())
    }
}

/// `1 − e^{−ημ}`
pub fn p_signal(op: &OperatingPoint) -> f64 {
    -(-op.eta() * op.mu).exp_m1()
}

/// Two detectors, each firing in the window with probability `db`.
pub fn p_dark(params: &SystemParams) -> f64 {
    2.0 * params.db
}

fn combine(p_signal: f64, p_dark: f64) -> f64 {
    p_signal + p_dark - p_signal * p_dark
}

/// Probability of at least one click from signal or dark count.
pub fn p_all(op: &OperatingPoint) -> f64 {
    combine(p_signal(op), p_dark(&op.params))
}

fn qber_from(p_signal: f64, p_dark: f64, p_all: f64, e_detector: f64) -> Result<f64> {
    if !(p_all > 0.0) {
        return Err(Error::UndefinedQber);
    }
    Ok((DARK_COUNT_ERROR * p_dark + e_detector * p_signal) / p_all)
}

/// Overall QBER `E_All`.
pub fn qber_all(op: &OperatingPoint) -> Result<f64> {
    let ps = p_signal(op);
    let pd = p_dark(&op.params);
    qber_from(ps, pd, combine(ps, pd), op.params.e_detector)
}

/// Multi-photon probability `P′` in its printed form.
pub fn p_prime(mu: f64) -> f64 {
    p_prime_with(mu, PPrimeVariant::AsPrinted)
}

pub fn p_prime_with(mu: f64, variant: PPrimeVariant) -> f64 {
    let cubic = match variant {
        PPrimeVariant::AsPrinted => 0.5 * mu.powi(3) / 6.0,
        PPrimeVariant::FourTermPoisson => mu.powi(3) / 6.0,
    };
    let p = 1.0 - (1.0 + mu + mu * mu / 2.0 + cubic) * (-mu).exp();
    p.clamp(0.0, 1.0)
}

fn beta_from(p_all: f64, p_prime: f64) -> Result<f64> {
    if !(p_all > 0.0) {
        return Err(Error::UndefinedQber);
    }
    Ok((p_all - p_prime) / p_all)
}

/// Security parameter `β`; negative once multi-photon pulses could account
/// for every detection.
pub fn beta(op: &OperatingPoint) -> Result<f64> {
    beta_from(p_all(op), p_prime_with(op.mu, op.params.pprime_variant))
}

/// Privacy-amplification fraction.
pub fn tau(e: f64) -> f64 {
    if e >= 0.5 {
        1.0
    } else {
        (1.0 + 4.0 * e - 4.0 * e * e).log2()
    }
}

/// Binary Shannon entropy in bits, with `H(0) = H(1) = 0`.
pub fn shannon_h(e: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&e) {
        return Err(Error::domain("e", e, "[0, 1]"));
    }
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    Ok(term(e) + term(1.0 - e))
}

/// Full rate prediction at `op`.
pub fn r_pns(op: &OperatingPoint) -> Result<RatePrediction> {
    let ps = p_signal(op);
    let pd = p_dark(&op.params);
    let pa = combine(ps, pd);
    let e = qber_from(ps, pd, pa, op.params.e_detector)?;
    let pp = p_prime_with(op.mu, op.params.pprime_variant);
    let b = beta_from(pa, pp)?;

    let (tau_prime, raw_bracket) = if b > 0.0 {
        let t = tau(e / b);
        (t, Some(b * (1.0 - t) - op.params.f_casc * shannon_h(e)?))
    } else {
        (1.0, None)
    };
    let r = match raw_bracket {
        Some(bracket) if bracket > 0.0 => pa * bracket,
        _ => 0.0,
    };
    Ok(RatePrediction {
        p_signal: ps,
        p_dark: pd,
        p_all: pa,
        e_all: e,
        p_prime: pp,
        beta: b,
        tau_prime,
        raw_bracket,
        r_pns_per_pulse: r,
        r_per_second: r * op.params.rep_rate,
        secure: r > 0.0,
    })
}

fn rate_at(params: &SystemParams, mu: f64, l_c: f64) -> Result<f64> {
    let op = OperatingPoint::new(mu, *params, ChannelSpec::new(l_c)?)?;
    Ok(r_pns(&op)?.r_pns_per_pulse)
}

/// Largest one-way channel loss in `[lo_db, hi_db]` with a positive secure
/// rate, located by bisection to [`CROSSING_RESOLUTION_DB`].
///
/// The returned value is the secure side of the final bracket.
pub fn find_zero_crossing(params: &SystemParams, mu: f64, lo_db: f64, hi_db: f64) -> Result<f64> {
    let rate_lo = rate_at(params, mu, lo_db)?;
    let rate_hi = rate_at(params, mu, hi_db)?;
    if !(lo_db < hi_db) || !(rate_lo > 0.0) || rate_hi > 0.0 {
        return Err(Error::Bracket {
            lo_db,
            hi_db,
            rate_lo,
            rate_hi,
        });
    }
    let (mut lo, mut hi) = (lo_db, hi_db);
    while hi - lo > CROSSING_RESOLUTION_DB {
        let mid = 0.5 * (lo + hi);
        if rate_at(params, mu, mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalMu {
    /// `None` when no μ in the search range is secure.
    pub mu: Option<f64>,
    pub r_pns_per_pulse: f64,
}

/// Maximizes the secure rate over μ ∈ (0.001, 1.7]: grid search, then a
/// golden-section refinement inside the best grid cell's neighbours.
pub fn optimal_mu(params: &SystemParams, channel: &ChannelSpec) -> Result<OptimalMu> {
    let rate = |mu: f64| -> Result<f64> {
        let op = OperatingPoint::new(mu, *params, *channel)?;
        Ok(r_pns(&op)?.r_pns_per_pulse)
    };

    let steps = ((MU_SEARCH_MAX - MU_SEARCH_MIN) / MU_SEARCH_STEP).round() as usize;
    let mut best = (MU_SEARCH_MIN, rate(MU_SEARCH_MIN)?);
    for k in 1..=steps {
        let mu = MU_SEARCH_MIN + k as f64 * MU_SEARCH_STEP;
        let r = rate(mu)?;
        if r > best.1 {
            best = (mu, r);
        }
    }
    if !(best.1 > 0.0) {
        return Ok(OptimalMu {
            mu: None,
            r_pns_per_pulse: 0.0,
        });
    }

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = (best.0 - MU_SEARCH_STEP).max(MU_SEARCH_MIN);
    let mut b = (best.0 + MU_SEARCH_STEP).min(MU_SEARCH_MAX);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut rc, mut rd) = (rate(c)?, rate(d)?);
    for _ in 0..60 {
        if rc > rd {
            b = d;
            d = c;
            rd = rc;
            c = b - inv_phi * (b - a);
            rc = rate(c)?;
        } else {
            a = c;
            c = d;
            rc = rd;
            d = a + inv_phi * (b - a);
            rd = rate(d)?;
        }
    }
    let (mu, r) = if rc > rd { (c, rc) } else { (d, rd) };
    let (mu, r) = if r >= best.1 { (mu, r) } else { best };
    Ok(OptimalMu {
        mu: Some(mu),
        r_pns_per_pulse: r,
    })
}
