//! Time integration of the truncated stochastic system.

mod cutoff;
mod path;
mod stepper;
mod twin;

pub use cutoff::{cutoff, lipschitz_constant};
pub use path::{
    energy_bound_constant, integrate, path_seed, run_ensemble, BlowupMarker, PathDiagnostics, Sample, BLOWUP_NORM,
};
pub use stepper::{EnergyTerms, Evaluation, Scheme, SimParams, Stepper};
pub use twin::{twin_run, TwinPath, TwinReport, TwinStep};
