//! Discrete energy budget of `|Lambda^sigma V|^p` along a recorded path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{PathDiagnostics, SimParams};
use crate::spectral::norms::{inner, lambda};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyIdentityReport {
    pub steps: usize,
    /// Largest one-step mismatch between the change of `|Lambda^sigma V|^p`
    /// and the recorded terms, relative to the largest level.
    pub residual: f64,
    /// Mismatch of the summed budget over the whole path, same scale.
    pub cumulative_residual: f64,
    /// `(sup |V|_sigma^p + int |V|_sigma^(p-2) |V|^2_(sigma+s/2)) / (1 + |V0|_sigma^p)`.
    pub c_fit: f64,
    pub dissipation_total: f64,
    /// Time integral of the positive part of the noise rates.
    pub noise_total: f64,
    /// `1 - noise_total / dissipation_total`; nonnegative when dissipation dominates.
    pub margin: f64,
}

fn level(f: &crate::spectral::SpectralField, sigma: f64, p: f64) -> Result<f64> {
    let l2 = inner(f, &lambda(f, 2.0 * sigma)?).max(0.0);
    Ok(if l2 == 0.0 { 0.0 } else { l2.powf(0.5 * p) })
}

pub fn verify_energy_identity(diag: &PathDiagnostics, params: &SimParams) -> Result<EnergyIdentityReport> {
    if diag.terms.is_empty() {
        return Err(Error::invalid("energy identity needs term-level records"));
    }
    let dt = params.dt;
    let mut levels: Vec<f64> = diag.terms.iter().map(|t| t.level).collect();
    levels.push(level(diag.final_state.field(), params.sigma, params.p)?);
    let scale = levels.iter().cloned().fold(0.0, f64::max);
    let mut residual: f64 = 0.0;
    let mut cumulative = 0.0;
    let mut dissipation_total = 0.0;
    let mut noise_total = 0.0;
    for (k, t) in diag.terms.iter().enumerate() {
        let predicted = (t.i0 + t.i1 + t.i2) * dt + t.i3;
        let mismatch = levels[k + 1] - levels[k] - predicted;
        residual = residual.max(mismatch.abs());
        cumulative += mismatch;
        dissipation_total += t.dissipation * dt;
        noise_total += (t.i1 + t.i2).max(0.0) * dt;
    }
    let norm = if scale > 0.0 { scale } else { 1.0 };
    let initial = diag.samples.first().map(|s| s.norm_sigma.powf(params.p)).unwrap_or(0.0);
    let margin = if dissipation_total > 0.0 { 1.0 - noise_total / dissipation_total } else { 0.0 };
    Ok(EnergyIdentityReport {
        steps: diag.terms.len(),
        residual: residual / norm,
        cumulative_residual: cumulative.abs() / norm,
        c_fit: (diag.sup_level + diag.energy_integral) / (1.0 + initial),
        dissipation_total,
        noise_total,
        margin,
    })
}
