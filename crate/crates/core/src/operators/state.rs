//! Admissible momentum states: two-component, even in `z`, zero mean,
//! invariant under the hydrostatic Leray projector.

use crate::error::{Error, Result};
use crate::spectral::norms::leray_hydrostatic;
use crate::spectral::{Lattice, Parity, SpectralField};

pub const STATE_PARITY: [Parity; 2] = [Parity::EvenInZ, Parity::EvenInZ];

/// Horizontal momentum `V` satisfying every structural constraint.
#[derive(Clone, Debug, PartialEq)]
pub struct StateV(SpectralField);

impl StateV {
    pub fn zeros(lattice: Lattice) -> Self {
        StateV(SpectralField::zeros(lattice, &STATE_PARITY))
    }

    /// Validates a field against the constraints to relative tolerance `1e-12`.
    pub fn new(field: SpectralField) -> Result<Self> {
        if field.components() != 2 || field.parity() != STATE_PARITY {
            return Err(Error::invalid("a state needs two even-in-z components"));
        }
        let defect = state_defect(&field);
        if defect > 1e-12 {
            return Err(Error::precondition(format!(
                "field violates the state constraints (defect {defect:.3e})"
            )));
        }
        Ok(StateV(field))
    }

    /// Nearest admissible state: symmetrize, drop the mean, apply the projector.
    pub fn project(field: &SpectralField) -> Result<Self> {
        if field.components() != 2 {
            return Err(Error::invalid("a state needs two components"));
        }
        let mut f = field.clone();
        f.set_parity(0, Parity::EvenInZ);
        f.set_parity(1, Parity::EvenInZ);
        f.symmetrize();
        f.remove_mean();
        Ok(StateV(leray_hydrostatic(&f)?))
    }

    pub fn field(&self) -> &SpectralField {
        &self.0
    }

    pub fn into_field(self) -> SpectralField {
        self.0
    }

    pub fn lattice(&self) -> Lattice {
        self.0.lattice()
    }
}

/// Largest relative violation of reality, parity, truncation, zero mean or
/// projector invariance.
pub fn state_defect(f: &SpectralField) -> f64 {
    let scale = f.max_abs();
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = f.symmetry_defect();
    for c in 0..f.components() {
        worst = worst.max(f.component(c)[f.lattice().index([0, 0, 0])].norm() / scale);
    }
    if f.components() == 2 {
        if let Ok(p) = leray_hydrostatic(f) {
            worst = worst.max(p.max_diff(f) / scale);
        }
    }
    worst
}
