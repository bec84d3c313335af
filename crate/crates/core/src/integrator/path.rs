//! Path integration with diagnostics, ensembles of independent paths.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stepper::{EnergyTerms, SimParams, Stepper};
use crate::error::{Error, Result};
use crate::noise::{derive_seed, NoiseModel, WienerPath};
use crate::operators::StateV;
use crate::spectral::norms::sobolev_norm;

/// `|V|_sigma` above which a path counts as blown up.
pub const BLOWUP_NORM: f64 = 1e6;

/// Recorded state summary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub step: u64,
    pub t: f64,
    pub norm_sigma: f64,
    pub norm_sigma_s2: f64,
    pub w1inf: f64,
    pub theta: f64,
    /// `int_0^t |V|_sigma^(p-2) |V|^2_(sigma+s/2) dr` (left-point rule).
    pub energy_integral: f64,
    /// `|V|^2` in L2.
    pub energy: f64,
}

/// Where and why a path stopped early.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupMarker {
    pub step: u64,
    pub reason: String,
}

/// Everything recorded along one path.
#[derive(Clone, Debug)]
pub struct PathDiagnostics {
    pub samples: Vec<Sample>,
    /// First time `|V|_sigma > rho`.
    pub stopping_time: Option<f64>,
    /// First time the `W^{1,inf}` norm reaches `rho / 2`.
    pub cutoff_time: Option<f64>,
    pub terms: Vec<EnergyTerms>,
    pub blowup: Option<BlowupMarker>,
    pub final_state: StateV,
    pub final_step: u64,
    /// `sup_t |V|_sigma^p`.
    pub sup_level: f64,
    pub energy_integral: f64,
}

/// Integrates from `start_step` (at time `start_step * dt`) to `t_end`.
pub fn integrate(
    params: &SimParams,
    noise: &NoiseModel,
    v0: &StateV,
    wiener: &WienerPath,
    start_step: u64,
    record_terms: bool,
) -> Result<PathDiagnostics> {
    let stepper = Stepper::new(params, noise)?;
    if v0.lattice() != stepper.lattice() {
        return Err(Error::invalid("initial state lives on another lattice"));
    }
    if (wiener.dt() - params.dt).abs() > 1e-12 * params.dt {
        return Err(Error::invalid("Wiener step differs from dt"));
    }
    let total = params.total_steps()?;
    let (sigma, s, p, dt) = (params.sigma, params.s, params.p, params.dt);
    let k = noise.len();

    let mut v = v0.clone();
    let mut diag = PathDiagnostics {
        samples: Vec::new(),
        stopping_time: None,
        cutoff_time: None,
        terms: Vec::new(),
        blowup: None,
        final_state: v0.clone(),
        final_step: start_step,
        sup_level: 0.0,
        energy_integral: 0.0,
    };
    let mut step = start_step;
    loop {
        let t = step as f64 * dt;
        let ns = sobolev_norm(v.field(), sigma);
        let nss = sobolev_norm(v.field(), sigma + 0.5 * s);
        let done = step >= total;
        let eval = if done {
            None
        } else {
            Some(stepper.evaluate(v.field(), None, record_terms || stepper.params().scheme == super::Scheme::EulerMaruyamaIto)?)
        };
        let (w1inf, theta) = match &eval {
            Some(e) => (e.w1inf, e.theta),
            None => {
                let w = crate::spectral::norms::w1inf_norm(v.field());
                (w, super::cutoff(w, params.rho))
            }
        };
        diag.sup_level = diag.sup_level.max(ns.powf(p));
        if diag.stopping_time.is_none() && ns > params.rho {
            diag.stopping_time = Some(t);
        }
        if diag.cutoff_time.is_none() && w1inf >= 0.5 * params.rho {
            diag.cutoff_time = Some(t);
        }
        if step % params.record_every as u64 == 0 || done {
            diag.samples.push(Sample {
                step,
                t,
                norm_sigma: ns,
                norm_sigma_s2: nss,
                w1inf,
                theta,
                energy_integral: diag.energy_integral,
                energy: crate::spectral::norms::inner(v.field(), v.field()),
            });
        }
        if !ns.is_finite() || ns > BLOWUP_NORM {
            diag.blowup = Some(BlowupMarker {
                step,
                reason: format!("|V|_sigma = {ns:.3e}"),
            });
            break;
        }
        let Some(eval) = eval else { break };
        let dw = wiener.increments(k, step);
        if record_terms {
            diag.terms.push(stepper.energy_terms(&v, &eval, step, &dw)?);
        }
        diag.energy_integral += ns.powf(p - 2.0) * nss * nss * dt;
        match stepper.advance(&v, &eval, step, &dw) {
            Ok(next) => v = next,
            Err(Error::Blowup { step, reason }) => {
                diag.blowup = Some(BlowupMarker { step, reason });
                break;
            }
            Err(e) => return Err(e),
        }
        step += 1;
    }
    diag.final_state = v;
    diag.final_step = step;
    Ok(diag)
}

/// Seed of path `index` in an ensemble rooted at `seed`.
pub fn path_seed(seed: u64, index: usize) -> u64 {
    derive_seed(seed, 0x5EED_0000 + index as u64)
}

/// Independent paths `0..paths`, each with its own Wiener seed; results in path order.
///
/// `leaf_level` nests each step over `2^leaf_level` Wiener leaves so that
/// ensembles at `dt` and `dt / 2` see the same Brownian paths.
pub fn run_ensemble<F>(
    params: &SimParams,
    noise: &NoiseModel,
    initial: F,
    seed: u64,
    paths: usize,
    leaf_level: u32,
) -> Result<Vec<PathDiagnostics>>
where
    F: Fn(usize) -> Result<StateV> + Sync,
{
    let leaf_dt = params.dt / (1u64 << leaf_level) as f64;
    (0..paths)
        .into_par_iter()
        .map(|i| {
            let wiener = WienerPath::nested(path_seed(seed, i), leaf_dt, leaf_level);
            integrate(params, noise, &initial(i)?, &wiener, 0, false)
        })
        .collect()
}

/// Fitted constant of the energy bound
/// `E[sup |V|_sigma^p + int |V|_sigma^(p-2) |V|^2_(sigma+s/2)] <= C (1 + E|V0|_sigma^p)`.
pub fn energy_bound_constant(paths: &[PathDiagnostics], initial_level: f64) -> f64 {
    let m = paths.len().max(1) as f64;
    let lhs: f64 = paths.iter().map(|d| d.sup_level + d.energy_integral).sum::<f64>() / m;
    lhs / (1.0 + initial_level)
}
