//! Resolution sweeps of the commutator and product inequalities.
//!
//! Each inequality `LHS <= C RHS` is probed by the largest observed ratio
//! over random band-limited inputs at several truncation levels; the constant
//! is deemed resolution-independent when the least-squares slope of
//! `log(max ratio)` against `log n` stays below [`TREND_TOLERANCE`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::sampling::sample_field;
use crate::error::Result;
use crate::noise::{derive_seed, solenoidal_projection, NOISE_PARITY};
use crate::operators::{lambda_commutator, leray_commutator, Advector, StateV, STATE_PARITY};
use crate::spectral::norms::{derivative, lambda, sobolev_norm, l2_norm, sup_norm};
use crate::spectral::{transform, Lattice, Parity, SpectralField};

/// Largest admissible slope of `log(max ratio)` versus `log n`.
pub const TREND_TOLERANCE: f64 = 0.1;

/// Ratios below this are treated as exact zeros by the trend fit.
pub const ROUNDOFF_RATIO: f64 = 1e-9;

/// Transport fields used by the commutator sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportKind {
    Random,
    /// `b = e1`, for which every commutator vanishes.
    Constant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub resolutions: Vec<usize>,
    pub samples: usize,
    pub s: f64,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    /// Spectral slope of the sampled functions.
    pub field_slope: f64,
    /// Spectral slope of the sampled transport fields.
    pub noise_slope: f64,
    pub transport: TransportKind,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            resolutions: vec![4, 8, 16],
            samples: 200,
            s: 3.0,
            alpha: 0.0,
            beta: 2.0,
            seed: 1,
            field_slope: 5.5,
            noise_slope: 8.0,
            transport: TransportKind::Random,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaSample {
    pub n: usize,
    pub index: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma_id: String,
    pub lhs: String,
    pub rhs: String,
    pub s: f64,
    pub alpha: f64,
    pub resolutions: Vec<usize>,
    pub samples: Vec<LemmaSample>,
    /// Largest ratio at each resolution.
    pub max_ratio: Vec<f64>,
    pub trend_slope: f64,
    pub flat: bool,
    /// Parameters lie outside the hypotheses of the inequality.
    pub outside_hypotheses: bool,
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn build_report(
    id: &str,
    lhs: &str,
    rhs: &str,
    cfg: &SweepConfig,
    outside: bool,
    mut eval: impl FnMut(Lattice, u64) -> Result<(f64, f64)>,
) -> Result<LemmaReport> {
    let mut samples = Vec::new();
    let mut max_ratio = Vec::new();
    for &n in &cfg.resolutions {
        let lat = Lattice::new(n)?;
        let mut best: f64 = 0.0;
        for i in 0..cfg.samples {
            let (l, r) = eval(lat, derive_seed(cfg.seed, i as u64))?;
            let ratio = if r > 0.0 { l / r } else { 0.0 };
            best = best.max(ratio);
            samples.push(LemmaSample {
                n,
                index: i,
                lhs: l,
                rhs: r,
                ratio,
            });
        }
        max_ratio.push(best);
    }
    let ns: Vec<f64> = cfg.resolutions.iter().map(|&n| n as f64).collect();
    // Ratios at roundoff level carry no trend.
    let resolved = max_ratio.iter().all(|r| *r > ROUNDOFF_RATIO);
    let trend_slope = if resolved && ns.len() > 1 {
        log_slope(&ns, &max_ratio)
    } else {
        0.0
    };
    Ok(LemmaReport {
        lemma_id: id.into(),
        lhs: lhs.into(),
        rhs: rhs.into(),
        s: cfg.s,
        alpha: cfg.alpha,
        resolutions: cfg.resolutions.clone(),
        samples,
        max_ratio,
        trend_slope,
        flat: trend_slope <= TREND_TOLERANCE,
        outside_hypotheses: outside,
    })
}

/// Random zero-mean divergence-free transport field with admissible parities.
pub fn sample_transport(lat: Lattice, slope: f64, seed: u64) -> SpectralField {
    let mut b = sample_field(lat, &NOISE_PARITY, slope, derive_seed(seed, 0xB));
    solenoidal_projection(&mut b);
    b.symmetrize();
    b
}

fn transport_for(cfg: &SweepConfig, lat: Lattice, seed: u64) -> SpectralField {
    match cfg.transport {
        TransportKind::Random => sample_transport(lat, cfg.noise_slope, seed),
        TransportKind::Constant => {
            let mut b = SpectralField::zeros(lat, &NOISE_PARITY);
            b.set(0, [0, 0, 0], Complex64::new(1.0, 0.0));
            b
        }
    }
}

fn sample_scalar(lat: Lattice, slope: f64, seed: u64) -> SpectralField {
    sample_field(lat, &[Parity::NoConstraint], slope, seed)
}

fn sample_momentum(lat: Lattice, slope: f64, seed: u64) -> Result<SpectralField> {
    Ok(StateV::project(&sample_field(lat, &STATE_PARITY, slope, seed))?.into_field())
}

/// Dealiased pointwise product of two scalar fields.
pub fn product(f: &SpectralField, g: &SpectralField) -> SpectralField {
    let grids = transform::to_grid(f.lattice(), &[f.component(0), g.component(0)]);
    let prod: Vec<f64> = grids[0].iter().zip(&grids[1]).map(|(a, b)| a * b).collect();
    let coeffs = transform::from_grid(f.lattice(), &[&prod]).remove(0);
    let mut out = SpectralField::from_raw(f.lattice(), &[f.parity()[0].times(g.parity()[0])], coeffs)
        .expect("one component");
    out.symmetrize();
    out
}

/// Commutators with divergence-free `b` have zero mean; only roundoff is removed.
fn drop_mean(c: &SpectralField) -> SpectralField {
    c.map_modes(|m| if m == [0, 0, 0] { 0.0 } else { 1.0 })
}

fn grad_sup(f: &SpectralField) -> f64 {
    let d: Vec<SpectralField> = (0..3).map(|a| derivative(f, a)).collect();
    let grids = transform::to_grid(f.lattice(), &[d[0].component(0), d[1].component(0), d[2].component(0)]);
    (0..grids[0].len())
        .map(|p| (grids[0][p].powi(2) + grids[1][p].powi(2) + grids[2][p].powi(2)).sqrt())
        .fold(0.0, f64::max)
}

fn horizontal_shear(b: &SpectralField) -> SpectralField {
    derivative(&SpectralField::stack(&[&b.extract(0), &b.extract(1)]).expect("same lattice"), 2)
}

/// Kato-Ponce product and commutator estimates for scalar `f, g`.
pub fn verify_kato_ponce(cfg: &SweepConfig) -> Result<[LemmaReport; 2]> {
    let s = cfg.s;
    let outside = s <= 0.0;
    let slope = cfg.field_slope;
    let product_report = build_report(
        "kato-ponce-product",
        "|Lambda^s(fg)|",
        "|Lambda^s f| |g|_inf + |f|_inf |Lambda^s g|",
        cfg,
        outside,
        |lat, seed| {
            let f = sample_scalar(lat, slope, seed);
            let g = sample_scalar(lat, slope, derive_seed(seed, 1));
            let lhs = l2_norm(&lambda(&product(&f, &g), s)?);
            let rhs = l2_norm(&lambda(&f, s)?) * sup_norm(&g) + sup_norm(&f) * l2_norm(&lambda(&g, s)?);
            Ok((lhs, rhs))
        },
    )?;
    let commutator_report = build_report(
        "kato-ponce-commutator",
        "|Lambda^s(fg) - f Lambda^s g|",
        "|grad f|_inf |Lambda^(s-1) g| + |Lambda^s f| |g|_inf",
        cfg,
        outside || s < 1.0,
        |lat, seed| {
            let f = sample_scalar(lat, slope, seed);
            let g = sample_scalar(lat, slope, derive_seed(seed, 1));
            let c = lambda(&product(&f, &g), s)?.sub(&product(&f, &lambda(&g, s)?))?;
            let rhs = grad_sup(&f) * l2_norm(&lambda(&g, s - 1.0)?) + l2_norm(&lambda(&f, s)?) * sup_norm(&g);
            Ok((l2_norm(&c), rhs))
        },
    )?;
    Ok([product_report, commutator_report])
}

/// Negative-order commutator bound `|Lambda^(-alpha) [Lambda^s, B] V| <= C |b|_(s+alpha+beta) |V|_(s-alpha)`.
pub fn verify_commutator_negative(cfg: &SweepConfig) -> Result<LemmaReport> {
    let (s, a, beta) = (cfg.s, cfg.alpha, cfg.beta);
    build_report(
        "commutator-negative",
        "|Lambda^(-alpha) [Lambda^s, b.grad] V|",
        "|b|_(s+alpha+beta) |V|_(s-alpha)",
        cfg,
        s < 1.0 || a < 0.0 || a > s || beta <= 1.5,
        |lat, seed| {
            let b = transport_for(cfg, lat, seed);
            let v = sample_momentum(lat, cfg.field_slope, seed)?;
            let c = drop_mean(&lambda_commutator(s, &b, &v)?);
            let lhs = l2_norm(&lambda(&c, -a)?);
            Ok((lhs, sobolev_norm(&b, s + a + beta) * sobolev_norm(&v, s - a)))
        },
    )
}

/// Positive-order commutator bound
/// `|Lambda^alpha [Lambda^s, B] V| <= C (|b|_s |V|_(s+alpha) + |b|_(alpha+s) |V|_s)`.
pub fn verify_commutator_positive(cfg: &SweepConfig) -> Result<LemmaReport> {
    let (s, a) = (cfg.s, cfg.alpha);
    build_report(
        "commutator-positive",
        "|Lambda^alpha [Lambda^s, b.grad] V|",
        "|b|_s |V|_(s+alpha) + |b|_(alpha+s) |V|_s",
        cfg,
        s <= 2.5 || a < -0.5,
        |lat, seed| {
            let b = transport_for(cfg, lat, seed);
            let v = sample_momentum(lat, cfg.field_slope, seed)?;
            let c = drop_mean(&lambda_commutator(s, &b, &v)?);
            let lhs = l2_norm(&lambda(&c, a)?);
            let rhs = sobolev_norm(&b, s) * sobolev_norm(&v, s + a) + sobolev_norm(&b, a + s) * sobolev_norm(&v, s);
            Ok((lhs, rhs))
        },
    )
}

/// Double commutator bound `|[[Lambda^s, B], B] f| <= C |b|^2_(s+1) |f|_s`.
pub fn verify_double_commutator(cfg: &SweepConfig) -> Result<LemmaReport> {
    let s = cfg.s;
    build_report(
        "double-commutator",
        "|[[Lambda^s, b.grad], b.grad] f|",
        "|b|^2_(s+1) |f|_s",
        cfg,
        s < 1.0,
        |lat, seed| {
            let b = transport_for(cfg, lat, seed);
            let f = sample_scalar(lat, cfg.field_slope, seed);
            let lhs = l2_norm(&crate::operators::double_commutator(s, &b, &f)?);
            Ok((lhs, sobolev_norm(&b, s + 1.0).powi(2) * sobolev_norm(&f, s)))
        },
    )
}

/// Projector commutator bounds, first in `H^s` and then composed with `[Lambda^s, B]`.
pub fn verify_leray_commutator(cfg: &SweepConfig) -> Result<[LemmaReport; 2]> {
    let s = cfg.s;
    let first = build_report(
        "projector-commutator-first",
        "|[P, b.grad] phi|_s",
        "|b|_(s+1) |phi|_s + |dz b^h|_(s-1) |phi|_(s+1)",
        cfg,
        s <= 2.0,
        |lat, seed| {
            let b = transport_for(cfg, lat, seed);
            let phi = sample_momentum(lat, cfg.field_slope, seed)?;
            let lhs = sobolev_norm(&leray_commutator(&b, &phi)?, s);
            let dz = horizontal_shear(&b);
            let rhs = sobolev_norm(&b, s + 1.0) * sobolev_norm(&phi, s)
                + sobolev_norm(&dz, s - 1.0) * sobolev_norm(&phi, s + 1.0);
            Ok((lhs, rhs))
        },
    )?;
    let second = build_report(
        "projector-commutator-second",
        "|Lambda^(-1/2) [Lambda^s, b.grad] [P, b.grad] phi|",
        "|b|^2_(s+3) |phi|_(s-1/2) + |b|_(s+3) |dz b^h|_(s-3/2) |phi|_(s+1/2)",
        cfg,
        s <= 2.5,
        |lat, seed| {
            let b = transport_for(cfg, lat, seed);
            let phi = sample_momentum(lat, cfg.field_slope, seed)?;
            let adv = Advector::from_transport(&b)?;
            let inner = leray_commutator(&b, &phi)?;
            let c = drop_mean(&crate::operators::lambda_commutator_with(s, &adv, &inner)?);
            let lhs = l2_norm(&lambda(&c, -0.5)?);
            let bs = sobolev_norm(&b, s + 3.0);
            let dz = horizontal_shear(&b);
            let rhs = bs * bs * sobolev_norm(&phi, s - 0.5) + bs * sobolev_norm(&dz, s - 1.5) * sobolev_norm(&phi, s + 0.5);
            Ok((lhs, rhs))
        },
    )?;
    Ok([first, second])
}

/// Ratio of the double-commutator bound along single modes `m = (M, 0, 0)`
/// normalized to `|f|_s = 1`, for `M` in `modes`.
pub fn double_commutator_ladder(n: usize, s: f64, modes: &[i64], seed: u64, noise_slope: f64, noise_max: usize) -> Result<Vec<f64>> {
    let lat = Lattice::new(n)?;
    let cap = (noise_max * noise_max) as i64;
    let b = sample_transport(lat, noise_slope, seed).map_modes(|m| {
        if m[0] * m[0] + m[1] * m[1] + m[2] * m[2] <= cap {
            1.0
        } else {
            0.0
        }
    });
    let mut out = Vec::with_capacity(modes.len());
    for &m in modes {
        let mut f = SpectralField::zeros(lat, &[Parity::NoConstraint]);
        f.set(0, [m, 0, 0], Complex64::new(0.5, 0.0));
        f.set(0, [-m, 0, 0], Complex64::new(0.5, 0.0));
        let f = f.scaled(1.0 / sobolev_norm(&f, s));
        let lhs = l2_norm(&crate::operators::double_commutator(s, &b, &f)?);
        out.push(lhs / (sobolev_norm(&b, s + 1.0).powi(2)));
    }
    Ok(out)
}

/// Every sweep at the configured `s`, with `alpha` taken from `alphas` for the
/// commutator bounds.
pub fn run_all(cfg: &SweepConfig, alphas: &[f64]) -> Result<Vec<LemmaReport>> {
    let mut out = Vec::new();
    out.extend(verify_kato_ponce(cfg)?);
    for &a in alphas {
        let c = SweepConfig { alpha: a, ..cfg.clone() };
        if a >= 0.0 {
            out.push(verify_commutator_negative(&c)?);
        }
        out.push(verify_commutator_positive(&c)?);
    }
    out.push(verify_double_commutator(cfg)?);
    out.extend(verify_leray_commutator(cfg)?);
    Ok(out)
}
