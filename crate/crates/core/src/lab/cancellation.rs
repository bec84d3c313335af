//! The Ito-Stratonovich pairing of transport noise in `H^sigma`.
//!
//! For each mode the two terms `<Lambda^sigma (P B)^2 V, Lambda^sigma V>` and
//! `|Lambda^sigma P B V|^2` are individually of order `|V|^2_(sigma+1)`; their
//! sum is of order `|V|^2_(sigma+1/2)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::sampling::{sample_field, sample_state};
use crate::error::{Error, Result};
use crate::noise::{derive_seed, NoiseModel};
use crate::operators::{noise_operator, StateV, STATE_PARITY};
use crate::spectral::norms::{derivative, inner, lambda, sobolev_norm};
use crate::spectral::{Lattice, SpectralField};

/// Value of the pairing at one state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cancellation {
    /// `corrector + transport`.
    pub combined: f64,
    /// `sum_k <Lambda^sigma (P_n P B_k)^2 V, Lambda^sigma V>`.
    pub corrector: f64,
    /// `sum_k |Lambda^sigma P_n P B_k V|^2`.
    pub transport: f64,
    /// Same pairing with the projector removed.
    pub unprojected: f64,
    pub norm_sigma: f64,
    pub norm_upper: f64,
}

impl Cancellation {
    /// `|combined| / |V|^2_(sigma+1/2)`.
    pub fn combined_ratio(&self) -> f64 {
        self.combined.abs() / (self.norm_upper * self.norm_upper)
    }

    /// `|corrector| / |V|^2_(sigma+1/2)`.
    pub fn naive_ratio(&self) -> f64 {
        self.corrector.abs() / (self.norm_upper * self.norm_upper)
    }
}

/// `sum_k <Lambda^sigma A_k^2 V, Lambda^sigma V> + |Lambda^sigma A_k V|^2`.
fn pairing(v: &SpectralField, sigma: f64, ops: impl Fn(&SpectralField) -> Result<SpectralField>) -> Result<(f64, f64)> {
    let ls_v = lambda(v, 2.0 * sigma)?;
    let a = ops(v)?;
    let aa = ops(&a)?;
    let la = lambda(&a, sigma)?;
    Ok((inner(&aa, &ls_v), inner(&la, &la)))
}

pub fn cancellation_functional(v: &StateV, noise: &NoiseModel, sigma: f64) -> Result<Cancellation> {
    let mut corrector = 0.0;
    let mut transport = 0.0;
    let mut unprojected = 0.0;
    for b in noise.advectors() {
        let (c, t) = pairing(v.field(), sigma, |f| noise_operator(b, f))?;
        corrector += c;
        transport += t;
        let (cu, tu) = pairing(v.field(), sigma, |f| b.apply(f))?;
        unprojected += cu + tu;
    }
    Ok(Cancellation {
        combined: corrector + transport,
        corrector,
        transport,
        unprojected,
        norm_sigma: sobolev_norm(v.field(), sigma),
        norm_upper: sobolev_norm(v.field(), sigma + 0.5),
    })
}

/// One rung of a frequency ladder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderRung {
    pub level: u32,
    /// Shell radius `2^level`.
    pub shell: usize,
    pub combined_ratio: f64,
    pub naive_ratio: f64,
}

/// States supported on the shells `2^j <= |m| < 2^j + 1` for `j` in `levels`,
/// all on one lattice so the noise is shared.
pub fn frequency_ladder(noise: &NoiseModel, sigma: f64, levels: &[u32], seed: u64) -> Result<Vec<LadderRung>> {
    let lat = noise.lattice().ok_or_else(|| Error::invalid("ladder needs a nonempty noise model"))?;
    let mut out = Vec::with_capacity(levels.len());
    for &j in levels {
        let shell = 1usize << j;
        if shell + 1 > lat.n() {
            return Err(Error::invalid(format!("ladder shell {shell} exceeds truncation {}", lat.n())));
        }
        let (lo, hi) = ((shell * shell) as i64, ((shell + 1) * (shell + 1)) as i64);
        let f = sample_field(lat, &STATE_PARITY, 0.0, derive_seed(seed, j as u64)).map_modes(|m| {
            let r2 = m[0] * m[0] + m[1] * m[1] + m[2] * m[2];
            if r2 >= lo && r2 < hi {
                1.0
            } else {
                0.0
            }
        });
        let c = cancellation_functional(&StateV::project(&f)?, noise, sigma)?;
        out.push(LadderRung {
            level: j,
            shell,
            combined_ratio: c.combined_ratio(),
            naive_ratio: c.naive_ratio(),
        });
    }
    Ok(out)
}

/// Growth of a ratio series from its first to its last entry, and whether it is
/// strictly increasing.
pub fn ladder_growth(values: &[f64]) -> (f64, f64, bool) {
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let min = values.iter().cloned().fold(f64::MAX, f64::min);
    let increasing = values.windows(2).all(|w| w[1] > w[0]);
    (max / min, values[values.len() - 1] / values[0], increasing)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CancellationReport {
    pub sigma: f64,
    pub samples: Vec<Cancellation>,
    /// Regressors per sample in the order of [`CancellationReport::coefficients`].
    pub features: Vec<[f64; 3]>,
    /// Minimum-norm least-squares coefficients of `|combined|` against
    /// `|b|_(sigma+3) |dz b^h|_(sigma-3/2) |V|^2_(sigma+1/2)`,
    /// `|b|^2_(sigma+3) |V|_sigma |V|_(sigma+1/2)` and `|b|^2_(sigma+3) |V|^2_sigma`.
    pub coefficients: [f64; 3],
    pub max_combined_ratio: f64,
    pub ladder: Vec<LadderRung>,
    /// Largest over smallest combined ratio along the ladder.
    pub combined_variation: f64,
    /// Last over first naive ratio along the ladder.
    pub naive_growth: f64,
    pub naive_increasing: bool,
}

fn features(v: &StateV, noise: &NoiseModel, sigma: f64) -> [f64; 3] {
    let (vs, vu) = (sobolev_norm(v.field(), sigma), sobolev_norm(v.field(), sigma + 0.5));
    let mut out = [0.0; 3];
    for b in noise.fields() {
        let bn = sobolev_norm(b, sigma + 3.0);
        let shear = derivative(&SpectralField::stack(&[&b.extract(0), &b.extract(1)]).expect("same lattice"), 2);
        out[0] += bn * sobolev_norm(&shear, sigma - 1.5) * vu * vu;
        out[1] += bn * bn * vs * vu;
        out[2] += bn * bn * vs * vs;
    }
    out
}

/// Minimum-norm least-squares fit of `y` against the columns of `x`.
pub fn min_norm_fit(x: &[[f64; 3]], y: &[f64]) -> [f64; 3] {
    let a = DMatrix::from_fn(x.len(), 3, |i, j| x[i][j]);
    let rhs = DVector::from_column_slice(y);
    let scale = a.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let sol = a
        .svd(true, true)
        .solve(&rhs, 1e-12 * scale)
        .unwrap_or_else(|_| DVector::zeros(3));
    [sol[0], sol[1], sol[2]]
}

/// Evaluates the pairing on `samples` random states and on a frequency ladder.
pub fn verify_cancellation(
    noise: &NoiseModel,
    sigma: f64,
    samples: usize,
    state_slope: f64,
    levels: &[u32],
    seed: u64,
) -> Result<CancellationReport> {
    let lat: Lattice = noise.lattice().ok_or_else(|| Error::invalid("cancellation needs a nonempty noise model"))?;
    let mut rows = Vec::with_capacity(samples);
    let mut feats = Vec::with_capacity(samples);
    for i in 0..samples {
        let v = sample_state(lat, state_slope, sigma, 1.0, derive_seed(seed, i as u64))?;
        rows.push(cancellation_functional(&v, noise, sigma)?);
        feats.push(features(&v, noise, sigma));
    }
    let y: Vec<f64> = rows.iter().map(|c| c.combined.abs()).collect();
    let coefficients = if samples > 0 { min_norm_fit(&feats, &y) } else { [0.0; 3] };
    let ladder = frequency_ladder(noise, sigma, levels, seed)?;
    let comb: Vec<f64> = ladder.iter().map(|r| r.combined_ratio).collect();
    let naive: Vec<f64> = ladder.iter().map(|r| r.naive_ratio).collect();
    let (combined_variation, _, _) = if comb.is_empty() { (1.0, 1.0, true) } else { ladder_growth(&comb) };
    let (_, naive_growth, naive_increasing) = if naive.is_empty() { (1.0, 1.0, true) } else { ladder_growth(&naive) };
    Ok(CancellationReport {
        sigma,
        max_combined_ratio: rows.iter().map(|c| c.combined_ratio()).fold(0.0, f64::max),
        samples: rows,
        features: feats,
        coefficients,
        ladder,
        combined_variation,
        naive_growth,
        naive_increasing,
    })
}
