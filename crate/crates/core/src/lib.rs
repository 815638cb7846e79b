//! Modeling toolkit for the LM05 two-way quantum key distribution protocol in
//! its free-space, polarization-encoded realization.
//!
//! The crate is layered bottom-up:
//!
//! * [`optics`] - Jones calculus for the four linear polarization states and
//!   every Pockels-cell transformation in the optical chain.
//! * [`link`] - device constants and the dB transmission arithmetic that
//!   produces the overall transmission `η`.
//! * [`rate`] - the analytic detection model (`P_All`, `E_All`) and the
//!   photon-number-splitting secure key rate.
//! * [`sim`] - a seeded, parallel, pulse-by-pulse Monte Carlo of the encoding
//!   mode used to cross-check the analytic model.
//! * [`experiments`] - parameter scans, config files and CSV output used by
//!   the `lm05` binary.

pub mod error;
pub mod experiments;
pub mod link;
pub mod optics;
pub mod rate;
pub mod sim;

pub use error::{Error, Result};
pub use link::{ChannelSpec, SystemParams};
pub use optics::{JonesMatrix, JonesVector, NamedState};
pub use rate::{OperatingPoint, RatePrediction};
pub use sim::{SimConfig, SimResult, TrialRecord};
