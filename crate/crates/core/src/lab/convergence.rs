//! Strong and weak discrepancies between time steps or schemes on shared
//! Wiener paths.

use serde::{Deserialize, Serialize};

use super::lemmas::log_slope;
use crate::error::{Error, Result};
use crate::integrator::{integrate, path_seed, PathDiagnostics, Scheme, SimParams};
use crate::noise::{NoiseModel, WienerPath};
use crate::operators::StateV;
use crate::spectral::norms::{inner, l2_norm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceKind {
    /// Euler-Maruyama against Heun at the same step.
    Schemes,
    /// The configured scheme at `dt` against itself at `dt / 2`.
    SelfRefinement,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub dt: f64,
    /// Path mean of the final L2 distance.
    pub strong: f64,
    /// Distance between the path means of the final energy.
    pub weak: f64,
    pub blowups: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub kind: ConvergenceKind,
    pub paths: usize,
    pub points: Vec<ConvergencePoint>,
    /// Least-squares slope of `log strong` against `log dt`.
    pub strong_order: f64,
    pub weak_order: f64,
}

fn levels(dts: &[f64], leaf: f64) -> Result<Vec<u32>> {
    dts.iter()
        .map(|&dt| {
            let l = (dt / leaf).log2().round();
            if l < 0.0 || (leaf * l.exp2() - dt).abs() > 1e-9 * dt {
                Err(Error::invalid(format!("dt = {dt} is not a power-of-two multiple of {leaf}")))
            } else {
                Ok(l as u32)
            }
        })
        .collect()
}

fn run(params: &SimParams, noise: &NoiseModel, v0: &StateV, dt: f64, scheme: Scheme, wiener: &WienerPath) -> Result<PathDiagnostics> {
    let p = SimParams {
        dt,
        scheme,
        ..params.clone()
    };
    integrate(&p, noise, v0, wiener, 0, false)
}

pub fn convergence_study(
    kind: ConvergenceKind,
    params: &SimParams,
    noise: &NoiseModel,
    v0: &StateV,
    dts: &[f64],
    paths: usize,
    seed: u64,
) -> Result<ConvergenceReport> {
    if dts.len() < 2 || paths == 0 {
        return Err(Error::invalid("convergence needs at least two steps and one path"));
    }
    let finest = dts.iter().cloned().fold(f64::INFINITY, f64::min);
    let leaf = match kind {
        ConvergenceKind::Schemes => finest,
        ConvergenceKind::SelfRefinement => finest / 2.0,
    };
    let lv = levels(dts, leaf)?;
    let mut points = Vec::with_capacity(dts.len());
    for (&dt, &level) in dts.iter().zip(&lv) {
        let mut strong = 0.0;
        let (mut ea, mut eb) = (0.0, 0.0);
        let mut blowups = 0;
        for i in 0..paths {
            let coarse = WienerPath::nested(path_seed(seed, i), leaf, level);
            let (a, b) = match kind {
                ConvergenceKind::Schemes => (
                    run(params, noise, v0, dt, Scheme::EulerMaruyamaIto, &coarse)?,
                    run(params, noise, v0, dt, Scheme::HeunStratonovich, &coarse)?,
                ),
                ConvergenceKind::SelfRefinement => {
                    let fine = WienerPath::nested(path_seed(seed, i), leaf, level - 1);
                    (
                        run(params, noise, v0, dt, params.scheme, &coarse)?,
                        run(params, noise, v0, 0.5 * dt, params.scheme, &fine)?,
                    )
                }
            };
            if a.blowup.is_some() || b.blowup.is_some() {
                blowups += 1;
                continue;
            }
            let (fa, fb) = (a.final_state.field(), b.final_state.field());
            strong += l2_norm(&fa.sub(fb)?);
            ea += inner(fa, fa);
            eb += inner(fb, fb);
        }
        let m = (paths - blowups).max(1) as f64;
        points.push(ConvergencePoint {
            dt,
            strong: strong / m,
            weak: (ea - eb).abs() / m,
            blowups,
        });
    }
    let x: Vec<f64> = points.iter().map(|p| p.dt).collect();
    let order = |y: Vec<f64>| if y.iter().all(|v| *v > 0.0) { log_slope(&x, &y) } else { f64::NAN };
    Ok(ConvergenceReport {
        kind,
        paths,
        strong_order: order(points.iter().map(|p| p.strong).collect()),
        weak_order: order(points.iter().map(|p| p.weak).collect()),
        points,
    })
}
