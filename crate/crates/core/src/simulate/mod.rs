//! Monte Carlo oracle for the closed forms.
//!
//! Every trial draws from its own ChaCha8 stream, keyed by the run seed and
//! selected by the trial index, so results do not depend on thread count or
//! scheduling.

mod ecdf;
pub mod gf;
mod rank;
mod sampler;

pub use ecdf::{ks_distance, EmpiricalCdf};
pub use rank::{rlnc_innovation_rate, RankExperimentConfig, RankMode, RankReport};
pub use sampler::{empirical_cdf, sample_decode_time, sample_trial, SimModel};
