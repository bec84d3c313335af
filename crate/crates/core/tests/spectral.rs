mod common;

use fracpe::lab::sampling::sample_field;
use fracpe::operators::STATE_PARITY;
use fracpe::spectral::norms::{
    derivative, hdot_norm, inner, l2_norm, lambda, leray_complement, leray_hydrostatic, project_galerkin, sobolev_norm,
};
use fracpe::spectral::{transform, Lattice, Parity, SpectralField};
use num_complex::Complex64;
use proptest::prelude::*;

fn lat(n: usize) -> Lattice {
    Lattice::new(n).unwrap()
}

#[test]
fn grid_is_seven_smooth_and_dealiasing() {
    assert_eq!(lat(8).grid(), 25);
    assert_eq!(lat(16).grid(), 49);
    for n in 1..20 {
        let g = lat(n).grid();
        assert!(g >= 3 * n + 1);
        let mut r = g;
        for p in [2, 3, 5, 7] {
            while r % p == 0 {
                r /= p;
            }
        }
        assert_eq!(r, 1, "grid {g} for n = {n}");
    }
    assert!(Lattice::with_grid(8, 24).is_err());
}

#[test]
fn synthesis_matches_direct_sum() {
    let l = lat(3);
    let f = sample_field(l, &[Parity::NoConstraint], 1.0, 5);
    let grid = transform::field_to_grid(&f).remove(0);
    let g = l.grid();
    for idx in [0usize, 17, 301, g * g * g - 1] {
        let j = transform::grid_point(g, idx);
        let x = [j[0] as f64 / g as f64, j[1] as f64 / g as f64, j[2] as f64 / g as f64];
        assert!((grid[idx] - common::evaluate(&f, 0, x)).abs() < 1e-12);
    }
}

#[test]
fn cosine_norms() {
    let l = lat(4);
    let mut f = SpectralField::zeros(l, &[Parity::EvenInZ]);
    f.set(0, [0, 0, 1], Complex64::new(0.5, 0.0));
    f.set(0, [0, 0, -1], Complex64::new(0.5, 0.0));
    assert!((inner(&f, &f) - 0.5).abs() < 1e-15);
    let k = 2.0 * std::f64::consts::PI;
    assert!((sobolev_norm(&f, 1.0).powi(2) - 0.5 * (1.0 + k * k)).abs() < 1e-12);
    assert!((hdot_norm(&f, 1.0).powi(2) - 0.5 * k * k).abs() < 1e-12);
    assert_eq!(sobolev_norm(&f, 0.0), l2_norm(&f));
}

#[test]
fn negative_lambda_needs_zero_mean() {
    let l = lat(2);
    let mut f = SpectralField::zeros(l, &[Parity::NoConstraint]);
    f.set(0, [0, 0, 0], Complex64::new(1.0, 0.0));
    assert!(lambda(&f, -0.5).is_err());
    assert!(lambda(&f, 0.5).is_ok());
}

#[test]
fn galerkin_projection_beyond_lattice_is_an_error() {
    let f = sample_field(lat(4), &[Parity::NoConstraint], 1.0, 1);
    assert!(project_galerkin(&f, 5).is_err());
    let p = project_galerkin(&f, 2).unwrap();
    assert!(p.lattice().ball().all(|(_, m)| m.iter().map(|x| x * x).sum::<i64>() <= 4 || p.get(0, m).norm() == 0.0));
}

#[test]
fn leray_kills_horizontal_gradients() {
    let l = lat(4);
    let p = sample_field(l, &[Parity::EvenInZ], 2.0, 9).map_modes(|m| if m[2] == 0 { 1.0 } else { 0.0 });
    let grad = SpectralField::stack(&[&derivative(&p, 0), &derivative(&p, 1)]).unwrap();
    let out = leray_hydrostatic(&grad).unwrap();
    assert!(common::max_abs(&out) < 1e-12 * common::max_abs(&grad));
}

#[test]
fn parity_algebra() {
    use Parity::*;
    assert_eq!(EvenInZ.dz(), OddInZ);
    assert_eq!(OddInZ.times(OddInZ), EvenInZ);
    assert_eq!(EvenInZ.times(OddInZ), OddInZ);
    assert_eq!(EvenInZ.join(OddInZ), NoConstraint);
    assert_eq!(OddInZ.join(OddInZ), OddInZ);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn projector_is_idempotent_self_adjoint_and_commutes(seed in any::<u64>(), s in 0.0f64..3.0) {
        let l = lat(5);
        let f = sample_field(l, &STATE_PARITY, 1.5, seed);
        let g = sample_field(l, &STATE_PARITY, 1.5, seed ^ 0xABCD);
        let pf = leray_hydrostatic(&f).unwrap();
        prop_assert!(common::max_diff(&leray_hydrostatic(&pf).unwrap(), &pf) <= 1e-12 * common::max_abs(&pf));
        let lhs = inner(&pf, &g);
        let rhs = inner(&f, &leray_hydrostatic(&g).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-12 * l2_norm(&f) * l2_norm(&g));
        let a = leray_hydrostatic(&lambda(&f, s).unwrap()).unwrap();
        let b = lambda(&pf, s).unwrap();
        prop_assert!(common::max_diff(&a, &b) <= 1e-12 * common::max_abs(&b).max(1e-300));
        let q = leray_complement(&f).unwrap();
        prop_assert!(common::max_diff(&pf.add(&q).unwrap(), &f) <= 1e-14 * common::max_abs(&f));
    }

    #[test]
    fn symmetrize_is_idempotent_and_structured(seed in any::<u64>()) {
        let l = lat(4);
        let mut f = SpectralField::from_fn(l, &[Parity::EvenInZ, Parity::OddInZ], |c, m| {
            let h = fracpe::noise::derive_seed(seed, (m[0] * 97 + m[1] * 13 + m[2] + c as i64 * 1000) as u64);
            Complex64::new((h % 1000) as f64 / 1000.0, ((h >> 20) % 1000) as f64 / 1000.0)
        });
        prop_assert!(f.symmetry_defect() <= 1e-15);
        let before = f.clone();
        f.symmetrize();
        prop_assert!(f.bit_eq(&before));
    }

    #[test]
    fn grid_roundtrip(seed in any::<u64>()) {
        let l = lat(4);
        let f = sample_field(l, &[Parity::EvenInZ, Parity::NoConstraint, Parity::OddInZ], 1.0, seed);
        let grids = transform::field_to_grid(&f);
        let refs: Vec<&[f64]> = grids.iter().map(|g| g.as_slice()).collect();
        let back = transform::from_grid(l, &refs);
        let g = SpectralField::from_raw(l, f.parity(), back.concat()).unwrap();
        prop_assert!(common::max_diff(&g, &f) <= 1e-13 * common::max_abs(&f));
    }

    #[test]
    fn sobolev_norms_are_monotone(seed in any::<u64>(), a in 0.0f64..3.0, b in 0.0f64..3.0) {
        let f = sample_field(lat(4), &[Parity::NoConstraint], 1.0, seed);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(sobolev_norm(&f, lo) <= sobolev_norm(&f, hi) * (1.0 + 1e-14));
    }
}
