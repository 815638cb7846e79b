//! Pulse-by-pulse Monte Carlo of the LM05 encoding mode.
//!
//! Each trial follows one weak coherent pulse: Bob picks a basis and bit
//! (source and PC1 setting), the photon number is Poisson, every photon
//! survives the whole round trip with the lumped transmission `η`, Alice
//! flips or not, and the surviving photons are split at the Wollaston prism
//! by Born probability before alignment errors and dark counts are added.
//!
//! Randomness for trial `i` comes from ChaCha8 stream `i` keyed by the seed,
//! so a run is bit-identical no matter how blocks are spread over threads.

use std::io::Write;

use rand::distr::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Poisson;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::{eta_overall, ChannelSpec, SystemParams};
use crate::optics::{Chain, Detector, NamedState, Source};

/// Trials per work unit handed to a worker.
pub const BLOCK_TRIALS: u64 = 1 << 16;

/// Per-trial record dumps are refused above this many trials unless forced.
pub const MAX_DUMP_TRIALS: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DoubleClickPolicy {
    /// Drop the slot; it is counted only in `double_clicks`.
    #[default]
    Discard,
    /// Keep the slot with a uniformly random bit.
    RandomBit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Mean photon number at the channel input.
    pub mu: f64,
    pub trials: u64,
    pub seed: u64,
    pub params: SystemParams,
    pub channel: ChannelSpec,
    pub double_click_policy: DoubleClickPolicy,
}

impl SimConfig {
    pub fn new(mu: f64, trials: u64, seed: u64, params: SystemParams, channel: ChannelSpec) -> Self {
        Self {
            mu,
            trials,
            seed,
            params,
            channel,
            double_click_policy: DoubleClickPolicy::Discard,
        }
    }

    /// `μ = 0` is accepted as the no-light limit.
    pub fn validate(&self) -> Result<()> {
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::domain("mu", self.mu, ">= 0"));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParams("trials must be positive".into()));
        }
        self.params.validate()?;
        ChannelSpec::new(self.channel.l_c)?;
        Ok(())
    }
}

/// Bob's preparation basis: Z is PC1 idle, X is PC1 triggered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    NoDetection,
    Decoded(u8),
    DoubleClick,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub bob_basis: Basis,
    pub bob_bit: u8,
    pub prepared: NamedState,
    pub alice_bit: u8,
    pub n_photons: u32,
    pub n_surviving: u32,
    pub click_spcm1: bool,
    pub click_spcm2: bool,
    pub dark1: bool,
    pub dark2: bool,
    pub outcome: Outcome,
}

impl TrialRecord {
    pub fn is_error(&self) -> bool {
        matches!(self.outcome, Outcome::Decoded(b) if b != self.alice_bit)
    }
}

/// Binomial proportion with its standard error `sqrt(p(1−p)/n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn proportion(successes: u64, n: u64) -> Estimate {
        let p = successes as f64 / n as f64;
        Estimate {
            value: p,
            stderr: (p * (1.0 - p) / n as f64).sqrt(),
        }
    }

    /// Distance to `target` in units of the standard error. Zero spread only
    /// matches an exact hit.
    pub fn sigmas_from(&self, target: f64) -> f64 {
        let d = (self.value - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.stderr
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Counts {
    sent: u64,
    detected: u64,
    errors: u64,
    double_clicks: u64,
    no_clicks: u64,
    prepared: [u64; 4],
}

impl Counts {
    fn add(&mut self, r: &TrialRecord, policy: DoubleClickPolicy) {
        self.sent += 1;
        self.prepared[r.prepared as usize] += 1;
        if r.click_spcm1 && r.click_spcm2 {
            self.double_clicks += 1;
        }
        match r.outcome {
            Outcome::NoDetection => self.no_clicks += 1,
            Outcome::DoubleClick => debug_assert_eq!(policy, DoubleClickPolicy::Discard),
            Outcome::Decoded(_) => {
                self.detected += 1;
                if r.is_error() {
                    self.errors += 1;
                }
            }
        }
    }

    fn merge(mut self, o: Counts) -> Counts {
        self.sent += o.sent;
        self.detected += o.detected;
        self.errors += o.errors;
        self.double_clicks += o.double_clicks;
        self.no_clicks += o.no_clicks;
        for (a, b) in self.prepared.iter_mut().zip(o.prepared) {
            *a += b;
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub sent: u64,
    /// Slots that yielded a key bit.
    pub detected: u64,
    pub errors: u64,
    /// Slots where both detectors fired, whatever the policy.
    pub double_clicks: u64,
    pub no_clicks: u64,
    pub empirical_qber: Estimate,
    /// Fraction of slots with at least one click.
    pub empirical_p_all: Estimate,
    pub raw_rate_per_second: f64,
    /// Histogram of prepared states in `NamedState::ALL` order.
    pub prepared_counts: [u64; 4],
}

#[derive(Debug, Clone, Copy)]
struct Path {
    prepared: NamedState,
    /// Detector that fires for an unflipped photon; decodes bit 0.
    zero_detector: Detector,
    /// Probability of SPCM1 with the flipper idle / triggered.
    p_spcm1: [f64; 2],
}

/// Precomputed chain for one configuration. Cheap to share across threads.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: SimConfig,
    eta: f64,
    poisson: Option<Poisson<f64>>,
    survive: Bernoulli,
    misroute: Bernoulli,
    dark: Bernoulli,
    /// Indexed by `[basis][bob_bit]`.
    paths: [[Path; 2]; 2],
    base_rng: ChaCha8Rng,
}

impl Simulator {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        Self::with_chain(cfg, Chain::default())
    }

    pub fn with_chain(cfg: SimConfig, chain: Chain) -> Result<Self> {
        cfg.validate()?;
        let eta = eta_overall(&cfg.params, &cfg.channel);
        let bernoulli = |p: f64| {
            Bernoulli::new(p).map_err(|_| Error::domain("probability", p, "[0, 1]"))
        };
        let poisson = if cfg.mu > 0.0 {
            Some(Poisson::new(cfg.mu).map_err(|_| Error::domain("mu", cfg.mu, "> 0"))?)
        } else {
            None
        };
        let path = |basis: Basis, bit: u8| -> Result<Path> {
            let source = if bit == 0 { Source::Src1 } else { Source::Src2 };
            let pc1 = basis == Basis::X;
            let idle = chain.trace(source, pc1, false)?;
            let flipped = chain.trace(source, pc1, true)?;
            Ok(Path {
                prepared: idle.prepared,
                zero_detector: idle.detector,
                p_spcm1: [idle.p_spcm1, flipped.p_spcm1],
            })
        };
        Ok(Self {
            eta,
            poisson,
            survive: bernoulli(eta)?,
            misroute: bernoulli(cfg.params.e_detector)?,
            dark: bernoulli(cfg.params.db)?,
            paths: [
                [path(Basis::Z, 0)?, path(Basis::Z, 1)?],
                [path(Basis::X, 0)?, path(Basis::X, 1)?],
            ],
            base_rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            cfg,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Generator for trial `index`: stream `index` of the seeded ChaCha8 key.
    pub fn trial_rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = self.base_rng.clone();
        rng.set_stream(index);
        rng
    }

    /// Runs one pulse slot.
    pub fn run_trial<R: Rng + ?Sized>(&self, rng: &mut R) -> TrialRecord {
        let basis = if rng.random::<bool>() { Basis::X } else { Basis::Z };
        let bob_bit = u8::from(rng.random::<bool>());
        let path = &self.paths[basis as usize][bob_bit as usize];

        let n_photons = match &self.poisson {
            Some(p) => p.sample(rng) as u32,
            None => 0,
        };
        let n_surviving = (0..n_photons).filter(|_| self.survive.sample(rng)).count() as u32;

        let alice_bit = u8::from(rng.random::<bool>());
        let p1 = path.p_spcm1[alice_bit as usize];

        let (mut sig1, mut sig2) = (false, false);
        for _ in 0..n_surviving {
            let mut to_spcm1 = rng.random::<f64>() < p1;
            if self.misroute.sample(rng) {
                to_spcm1 = !to_spcm1;
            }
            if to_spcm1 {
                sig1 = true;
            } else {
                sig2 = true;
            }
        }
        let dark1 = self.dark.sample(rng);
        let dark2 = self.dark.sample(rng);
        let click_spcm1 = sig1 || dark1;
        let click_spcm2 = sig2 || dark2;

        let decode = |d: Detector| u8::from(d != path.zero_detector);
        let outcome = match (click_spcm1, click_spcm2) {
            (false, false) => Outcome::NoDetection,
            (true, false) => Outcome::Decoded(decode(Detector::Spcm1)),
            (false, true) => Outcome::Decoded(decode(Detector::Spcm2)),
            (true, true) => match self.cfg.double_click_policy {
                DoubleClickPolicy::Discard => Outcome::DoubleClick,
                DoubleClickPolicy::RandomBit => Outcome::Decoded(u8::from(rng.random::<bool>())),
            },
        };

        TrialRecord {
            bob_basis: basis,
            bob_bit,
            prepared: path.prepared,
            alice_bit,
            n_photons,
            n_surviving,
            click_spcm1,
            click_spcm2,
            dark1,
            dark2,
            outcome,
        }
    }

    /// Trial `index` replayed from its own stream.
    pub fn trial(&self, index: u64) -> TrialRecord {
        self.run_trial(&mut self.trial_rng(index))
    }

    fn count_block(&self, block: u64) -> Counts {
        let start = block * BLOCK_TRIALS;
        let end = (start + BLOCK_TRIALS).min(self.cfg.trials);
        let mut counts = Counts::default();
        for i in start..end {
            counts.add(&self.trial(i), self.cfg.double_click_policy);
        }
        counts
    }

    pub fn run(&self) -> Result<SimResult> {
        let blocks = self.cfg.trials.div_ceil(BLOCK_TRIALS);
        let c = (0..blocks)
            .into_par_iter()
            .map(|b| self.count_block(b))
            .reduce(Counts::default, Counts::merge);
        if c.detected == 0 {
            return Err(Error::ZeroDetection { sent: c.sent });
        }
        Ok(SimResult {
            sent: c.sent,
            detected: c.detected,
            errors: c.errors,
            double_clicks: c.double_clicks,
            no_clicks: c.no_clicks,
            empirical_qber: Estimate::proportion(c.errors, c.detected),
            empirical_p_all: Estimate::proportion(c.sent - c.no_clicks, c.sent),
            raw_rate_per_second: c.detected as f64 / c.sent as f64 * self.cfg.params.rep_rate,
            prepared_counts: c.prepared,
        })
    }

    /// Every trial record, in trial order.
    pub fn records(&self) -> Vec<TrialRecord> {
        (0..self.cfg.trials)
            .into_par_iter()
            .map(|i| self.trial(i))
            .collect()
    }
}

/// One pulse slot drawn from `rng`.
pub fn run_trial<R: Rng + ?Sized>(cfg: &SimConfig, rng: &mut R) -> Result<TrialRecord> {
    Ok(Simulator::new(*cfg)?.run_trial(rng))
}

/// Aggregates `cfg.trials` slots. Fails if nothing was decoded.
pub fn run_simulation(cfg: &SimConfig) -> Result<SimResult> {
    Simulator::new(*cfg)?.run()
}

/// Deterministic sifting: every decoded slot contributes one bit to each key.
pub fn extract_raw_key(records: &[TrialRecord]) -> (Vec<u8>, Vec<u8>) {
    records
        .iter()
        .filter_map(|r| match r.outcome {
            Outcome::Decoded(bit) => Some((bit, r.alice_bit)),
            _ => None,
        })
        .unzip()
}

pub fn hamming_distance(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Writes records as one JSON object per line.
pub fn write_records<W: Write>(records: &[TrialRecord], mut out: W) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}
