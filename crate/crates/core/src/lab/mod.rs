//! Estimate lab: numerical probes of the inequalities behind the analysis.

pub mod cancellation;
pub mod sampling;
pub mod lemmas;
pub mod example1d;
pub mod path_norm;
pub mod energy;
pub mod convergence;
