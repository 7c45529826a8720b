//! Frame-accurate simulator of uplink NOMA scheduling under strict packet
//! deadlines, together with a branching-policy PPO scheduler and classical
//! baselines.
//!
//! Module map:
//! - [`phy`]: fading, path loss, SIC decoding and finite-blocklength errors.
//! - [`traffic`]: packet arrivals and deadline-indexed buffers.
//! - [`env`]: the partially observable scheduling environment and agent state.
//! - [`sched`]: EDF / random / slotted-ALOHA baselines and the Bayesian prior.
//! - [`drl`]: networks, gradients, GAE, clipped PPO, Adam and the training loop.
//! - [`harness`]: scenario files, experiment orchestration and metric output.

pub mod drl;
pub mod env;
pub mod harness;
pub mod phy;
pub mod scalar;
pub mod sched;
pub mod traffic;

pub use scalar::Real;

/// Double-precision instantiations used by the simulator and the CLI.
pub type FadingMatrix64 = phy::FadingMatrix<f64>;
pub type DecodeOutcome64 = phy::DecodeOutcome<f64>;
pub type Network64 = drl::Network<f64>;
pub type Agent64 = drl::Agent<f64>;
pub type Adam64 = drl::AdamState<f64>;

/// Single-precision instantiations.
pub type FadingMatrix32 = phy::FadingMatrix<f32>;
pub type Network32 = drl::Network<f32>;
pub type Agent32 = drl::Agent<f32>;
