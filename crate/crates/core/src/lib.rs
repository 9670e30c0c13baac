//! Dual-connectivity LTE/NR handover simulation and learning controllers.
//!
//! The crate is layered bottom-up:
//!
//! * [`scenario`]: urban geometry, random-waypoint mobility, LOS tests, RNG streams.
//! * [`channel`]: pathloss, shadowing, SINR, beam sweeps and the report table.
//! * [`dc`]: the coordinator's secondary-cell handover state machine and latency accounting.
//! * [`sim`]: the per-episode simulator that ties the above together on a fixed time step.
//! * [`rl`]: MLP with manual backprop, replay buffer, clipped double Q-learning.
//! * [`hidql`]: the two-level meta-controller/controller learner.
//! * [`baselines`], [`harness`]: non-learning controllers, experiment runner and CSV output.

pub mod baselines;
pub mod channel;
pub mod dc;
pub mod error;
pub mod harness;
pub mod hidql;
pub mod rl;
pub mod scenario;
pub mod sim;

pub use error::{Error, Result};
