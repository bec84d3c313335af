//! Twin runs: two paths from nearby initial data driven by the same noise.
//!
//! With `X = |V1 - V2|^2_(sigma-1/2)`, `w = 1 + |V1|^2_(sigma+1/2) + |V2|^2_(sigma+1/2)`
//! and `Y_t = exp(-C int w)`, each step splits as
//! `X' - X = P + M + D`: `P` is the Ito drift over the step (exact
//! integrating-factor decay plus drift and quadratic variation), `M` the
//! martingale increment and `D` the scheme defect. The fitted `C` is the
//! smallest value making `P <= (1 - exp(-C w dt)) X'` at every step, so the
//! martingale-compensated `Y X` increases only through `D`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::path::path_seed;
use super::stepper::{SimParams, Stepper};
use crate::error::{Error, Result};
use crate::noise::{NoiseModel, WienerPath};
use crate::operators::StateV;
use crate::spectral::lattice::{norm2, wavenumber};
use crate::spectral::{Lattice, SpectralField};

/// Per-step data of one twin pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwinStep {
    pub step: u64,
    pub t: f64,
    /// `|V1 - V2|_(sigma-1/2)`.
    pub diff_norm: f64,
    pub weight: f64,
    pub predicted: f64,
    pub martingale: f64,
    /// `Y_t |V1 - V2|^2_(sigma-1/2)` for the fitted `C`.
    pub weighted: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwinPath {
    pub steps: Vec<TwinStep>,
    /// Both trajectories agree bit for bit at every step.
    pub identical: bool,
    /// Largest `Y |D| / (Y X)(0)` along the path.
    pub residual: f64,
    /// Largest positive part of the compensated increment minus `Y |D|`.
    pub monotonicity_excess: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwinReport {
    pub paths: Vec<TwinPath>,
    pub c_fit: f64,
    pub max_final_diff: f64,
    pub mean_residual: f64,
}

struct Weights {
    w: Vec<f64>,
}

impl Weights {
    fn new(lat: Lattice, sigma: f64) -> Self {
        let w = (0..lat.box_len())
            .map(|i| {
                let m = lat.mode(i);
                if norm2(m) == 0 {
                    1.0
                } else {
                    1.0 + wavenumber(m).powf(2.0 * sigma)
                }
            })
            .collect();
        Self { w }
    }

    fn inner(&self, a: &SpectralField, b: &SpectralField) -> f64 {
        let len = self.w.len();
        a.data()
            .iter()
            .zip(b.data())
            .enumerate()
            .map(|(i, (x, y))| self.w[i % len] * (x * y.conj()).re)
            .sum()
    }
}

/// Runs `paths` twin pairs from `v0` and `v0 + delta * u`.
pub fn twin_run(
    params: &SimParams,
    noise: &NoiseModel,
    v0: &StateV,
    perturbation: &StateV,
    delta: f64,
    seed: u64,
    paths: usize,
    leaf_level: u32,
) -> Result<TwinReport> {
    let stepper = Stepper::new(params, noise)?;
    let lat = stepper.lattice();
    let v2_0 = if delta == 0.0 {
        v0.clone()
    } else {
        let mut f = v0.field().clone();
        f.axpy(delta, perturbation.field())?;
        StateV::project(&f)?
    };
    let leaf_dt = params.dt / (1u64 << leaf_level) as f64;
    let raw: Vec<(Vec<TwinStep>, bool)> = (0..paths)
        .into_par_iter()
        .map(|i| {
            let wiener = WienerPath::nested(path_seed(seed, i), leaf_dt, leaf_level);
            twin_path(&stepper, lat, v0, &v2_0, &wiener)
        })
        .collect::<Result<_>>()?;

    let dt = params.dt;
    let mut c_fit: f64 = 0.0;
    for (steps, _) in &raw {
        for pair in steps.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let next = b.diff_norm * b.diff_norm;
            if a.predicted > 0.0 && next > 0.0 {
                let frac = (a.predicted / next).min(1.0 - 1e-15);
                c_fit = c_fit.max(-(1.0 - frac).ln() / (a.weight * dt));
            }
        }
    }

    let mut out = Vec::with_capacity(paths);
    let mut max_final: f64 = 0.0;
    for (mut steps, identical) in raw {
        let mut y = 1.0;
        for s in steps.iter_mut() {
            s.weighted = y * s.diff_norm * s.diff_norm;
            y *= (-c_fit * s.weight * dt).exp();
        }
        let z0 = steps[0].weighted;
        let mut residual: f64 = 0.0;
        let mut excess: f64 = 0.0;
        let mut y = 1.0;
        for pair in steps.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let x = a.diff_norm * a.diff_norm;
            let defect = b.diff_norm * b.diff_norm - x - a.martingale - a.predicted;
            let compensated = b.weighted - a.weighted - y * a.martingale;
            if z0 > 0.0 {
                residual = residual.max(y * defect.abs() / z0);
                excess = excess.max((compensated - y * defect.abs()) / z0);
            }
            y *= (-c_fit * a.weight * dt).exp();
        }
        max_final = max_final.max(steps.last().map_or(0.0, |s| s.diff_norm));
        out.push(TwinPath {
            steps,
            identical,
            residual,
            monotonicity_excess: excess,
        });
    }
    let mean_residual = out.iter().map(|p| p.residual).sum::<f64>() / out.len().max(1) as f64;
    Ok(TwinReport {
        paths: out,
        c_fit,
        max_final_diff: max_final,
        mean_residual,
    })
}

fn twin_path(
    stepper: &Stepper<'_>,
    lat: Lattice,
    v1_0: &StateV,
    v2_0: &StateV,
    wiener: &WienerPath,
) -> Result<(Vec<TwinStep>, bool)> {
    let params = stepper.params();
    let total = params.total_steps()?;
    let lower = Weights::new(lat, params.sigma - 0.5);
    let upper = Weights::new(lat, params.sigma + 0.5);
    let decay: Vec<f64> = (0..lat.box_len())
        .map(|i| {
            let m = lat.mode(i);
            if !params.dissipation || norm2(m) == 0 {
                1.0
            } else {
                (-wavenumber(m).powf(params.s) * params.dt).exp()
            }
        })
        .collect();
    let k = stepper.noise().len();
    let (mut v1, mut v2) = (v1_0.clone(), v2_0.clone());
    let mut identical = v1.field().bit_eq(v2.field());
    let mut steps = Vec::with_capacity(total as usize + 1);
    for step in 0..=total {
        let diff = v1.field().sub(v2.field())?;
        let x = lower.inner(&diff, &diff);
        let weight = 1.0 + upper.inner(v1.field(), v1.field()) + upper.inner(v2.field(), v2.field());
        let mut rec = TwinStep {
            step,
            t: step as f64 * params.dt,
            diff_norm: x.max(0.0).sqrt(),
            weight,
            predicted: 0.0,
            martingale: 0.0,
            weighted: 0.0,
        };
        if step == total {
            steps.push(rec);
            break;
        }
        let e1 = stepper.evaluate(v1.field(), None, true)?;
        let e2 = stepper.evaluate(v2.field(), None, true)?;
        let dw = wiener.increments(k, step);
        let drift = e1.drift(true).sub(&e2.drift(true))?;
        let mut decayed = diff.clone();
        let len = lat.box_len();
        for (i, z) in decayed.data_mut().iter_mut().enumerate() {
            *z *= decay[i % len];
        }
        let mut qv = 0.0;
        let mut mart = 0.0;
        for ((g1, g2), w) in e1.noise.iter().zip(&e2.noise).zip(&dw) {
            let g = g1.sub(g2)?;
            qv += lower.inner(&g, &g);
            mart += 2.0 * lower.inner(&diff, &g) * w;
        }
        rec.predicted = lower.inner(&decayed, &decayed) - x + (2.0 * lower.inner(&diff, &drift) + qv) * params.dt;
        rec.martingale = mart;
        steps.push(rec);
        let n1 = stepper.advance(&v1, &e1, step, &dw)?;
        let n2 = stepper.advance(&v2, &e2, step, &dw)?;
        v1 = n1;
        v2 = n2;
        if !v1.field().bit_eq(v2.field()) {
            identical = false;
        }
        if !(rec.diff_norm.is_finite()) {
            return Err(Error::Blowup {
                step,
                reason: "twin difference is non-finite".into(),
            });
        }
    }
    Ok((steps, identical))
}
