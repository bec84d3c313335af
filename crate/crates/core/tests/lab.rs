use fracpe::integrator::{integrate, Scheme, SimParams};
use fracpe::lab::cancellation::{cancellation_functional, ladder_growth, min_norm_fit, verify_cancellation};
use fracpe::lab::convergence::{convergence_study, ConvergenceKind};
use fracpe::lab::energy::verify_energy_identity;
use fracpe::lab::example1d::{a_closed, b_closed, example_1d};
use fracpe::lab::lemmas::{
    log_slope, product, verify_commutator_negative, verify_commutator_positive, verify_double_commutator, verify_kato_ponce,
    verify_leray_commutator, SweepConfig, TransportKind,
};
use fracpe::lab::path_norm::wap_path_norm;
use fracpe::lab::sampling::{sample_field, sample_noise, sample_state};
use fracpe::noise::{build_noise_model, NoiseFamily, NoiseSpec, WienerPath};
use fracpe::spectral::{Lattice, Parity, SpectralField};
use num_complex::Complex64;
use proptest::prelude::*;

fn small_sweep(transport: TransportKind) -> SweepConfig {
    SweepConfig {
        resolutions: vec![4, 6],
        samples: 3,
        transport,
        ..Default::default()
    }
}

#[test]
fn path_norm_of_identity_approaches_closed_form() {
    // u(t) = t on [0, 1] with alpha = 1/2, p = 2: |u|^2 = 1/3 + 2 int int (t-s)^2 / (t-s)^2 = 1/3 + 1.
    let exact = (1.0f64 / 3.0 + 1.0).sqrt();
    let err = |n: usize| {
        let series: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        (wap_path_norm(&series, 0.5, 2.0, 1.0).unwrap() - exact).abs()
    };
    assert!(err(400) < 0.01);
    assert!(err(400) < err(50));
}

#[test]
fn path_norm_rejects_bad_arguments() {
    assert!(wap_path_norm(&[1.0], 0.5, 2.0, 1.0).is_err());
    assert!(wap_path_norm(&[1.0, 2.0], 1.0, 2.0, 1.0).is_err());
    assert!(wap_path_norm(&[1.0, 2.0], 0.5, 1.0, 1.0).is_err());
    assert!(wap_path_norm(&[1.0, 2.0], 0.5, 2.0, 0.0).is_err());
}

#[test]
fn path_norm_of_constants_is_the_lp_norm() {
    let v = wap_path_norm(&[2.0; 10], 0.3, 3.0, 2.0).unwrap();
    assert!((v - 2.0 * 2.0f64.powf(1.0 / 3.0)).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn path_norm_is_homogeneous(xs in prop::collection::vec(-5.0f64..5.0, 2..30), c in -4.0f64..4.0, a in 0.05f64..0.95, p in 1.1f64..4.0) {
        let scaled: Vec<f64> = xs.iter().map(|x| c * x).collect();
        let lhs = wap_path_norm(&scaled, a, p, 1.0).unwrap();
        let rhs = c.abs() * wap_path_norm(&xs, a, p, 1.0).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs));
    }

    #[test]
    fn path_norm_grows_with_alpha_on_short_intervals(xs in prop::collection::vec(-5.0f64..5.0, 2..30), a in 0.05f64..0.9, d in 0.0f64..0.09, t in 0.1f64..1.0) {
        let lo = wap_path_norm(&xs, a, 2.0, t).unwrap();
        let hi = wap_path_norm(&xs, a + d, 2.0, t).unwrap();
        prop_assert!(lo <= hi * (1.0 + 1e-12));
    }

    #[test]
    fn path_norm_obeys_the_triangle_inequality(xs in prop::collection::vec(-5.0f64..5.0, 8), ys in prop::collection::vec(-5.0f64..5.0, 8)) {
        let sum: Vec<f64> = xs.iter().zip(&ys).map(|(a, b)| a + b).collect();
        let n = |v: &[f64]| wap_path_norm(v, 0.4, 2.5, 1.0).unwrap();
        prop_assert!(n(&sum) <= (n(&xs) + n(&ys)) * (1.0 + 1e-12));
    }

    #[test]
    fn closed_form_coefficients_are_symmetric(k in 3i64..60, r in 0.5f64..3.0, tau in 0.0f64..0.2) {
        prop_assert!((b_closed(k, r, tau) - b_closed(2 - k, r, tau)).abs() <= 1e-12 * b_closed(k, r, tau).abs().max(1.0));
        prop_assert!(a_closed(k, r, tau) >= 0.0);
    }
}

#[test]
fn example_1d_direct_matches_closed_form() {
    for (r, tau) in [(1.0, 0.0), (1.5, 0.0), (2.0, 0.05), (0.5, 0.1)] {
        let rep = example_1d(r, tau, 40).unwrap();
        assert!(rep.discrepancy < 1e-12, "r={r} tau={tau}: {}", rep.discrepancy);
        assert_eq!(rep.k.len(), rep.a_closed.len());
        assert_eq!(rep.k_min, 3);
    }
    let rep = example_1d(1.0, 0.0, 40).unwrap();
    assert!(rep.b_closed.iter().all(|b| *b == 0.0));
    assert!(example_1d(0.0, 0.0, 40).is_err());
    assert!(example_1d(1.0, -0.1, 40).is_err());
    assert!(example_1d(1.0, 0.0, 4).is_err());
}

#[test]
fn example_1d_analytic_weight_grows_exponentially() {
    let rep = example_1d(1.0, 0.1, 64).unwrap();
    let gain = rep.a_scaled_at(62).unwrap() / rep.a_scaled_at(31).unwrap();
    assert!(gain > (0.2f64 * 31.0).exp() / 2.0);
    let flat = example_1d(1.0, 0.0, 64).unwrap();
    let sc = flat.a_scaled();
    let (lo, hi) = sc.iter().fold((f64::MAX, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
    assert!(hi / lo < 2.0);
}

#[test]
fn log_slope_recovers_powers() {
    let x = [2.0, 4.0, 8.0, 16.0];
    let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-1.5)).collect();
    assert!((log_slope(&x, &y) + 1.5).abs() < 1e-12);
}

#[test]
fn product_matches_cosine_identity() {
    let lat = Lattice::new(4).unwrap();
    let cos = |m: [i64; 3]| {
        let mut f = SpectralField::zeros(lat, &[Parity::NoConstraint]);
        f.set(0, m, Complex64::new(0.5, 0.0));
        f.set(0, [-m[0], -m[1], -m[2]], Complex64::new(0.5, 0.0));
        f
    };
    let p = product(&cos([1, 0, 0]), &cos([0, 1, 0]));
    let expected = cos([1, 1, 0]).scaled(0.5).add(&cos([1, -1, 0]).scaled(0.5)).unwrap();
    let diff = p.sub(&expected).unwrap();
    assert!(diff.data().iter().all(|z| z.norm() < 1e-14));
}

#[test]
fn constant_transport_gives_vanishing_commutators() {
    let cfg = small_sweep(TransportKind::Constant);
    let negative = SweepConfig { alpha: 0.5, ..cfg.clone() };
    for rep in [
        verify_commutator_negative(&negative).unwrap(),
        verify_commutator_positive(&cfg).unwrap(),
        verify_double_commutator(&cfg).unwrap(),
    ]
        .into_iter()
        .chain(verify_leray_commutator(&cfg).unwrap())
    {
        let worst = rep.samples.iter().map(|s| s.ratio).fold(0.0, f64::max);
        assert!(worst < 1e-10, "{} {worst:e}", rep.lemma_id);
        assert!(rep.flat);
    }
}

#[test]
fn random_sweeps_report_every_sample() {
    let cfg = small_sweep(TransportKind::Random);
    let [prod, comm] = verify_kato_ponce(&cfg).unwrap();
    for rep in [prod, comm] {
        assert_eq!(rep.samples.len(), 6);
        assert_eq!(rep.max_ratio.len(), 2);
        assert!(rep.samples.iter().all(|s| s.ratio.is_finite() && s.ratio >= 0.0));
        assert!(!rep.lemma_id.is_empty() && !rep.lhs.is_empty() && !rep.rhs.is_empty());
    }
    let outside = verify_commutator_positive(&SweepConfig { s: 2.0, ..cfg }).unwrap();
    assert!(outside.outside_hypotheses);
}

#[test]
fn constant_noise_cancels_exactly() {
    let lat = Lattice::new(8).unwrap();
    let noise = build_noise_model(&NoiseSpec { family: NoiseFamily::Constant, ..Default::default() }, lat).unwrap();
    let v = sample_state(lat, 3.0, 1.0, 1.0, 4).unwrap();
    let c = cancellation_functional(&v, &noise, 1.0).unwrap();
    assert!(c.combined.abs() < 1e-12 * c.norm_upper * c.norm_upper);
}

#[test]
fn barotropic_noise_drops_the_shear_regressor() {
    let lat = Lattice::new(8).unwrap();
    let noise = sample_noise(lat, NoiseFamily::Barotropic, 2, 2, 3).unwrap();
    let rep = verify_cancellation(&noise, 1.0, 12, 3.0, &[1, 2], 5).unwrap();
    assert!(rep.features.iter().all(|f| f[0] == 0.0));
    assert_eq!(rep.coefficients[0], 0.0);
    assert_eq!(rep.ladder.len(), 2);
    assert!(rep.max_combined_ratio.is_finite());
}

#[test]
fn min_norm_fit_recovers_exact_coefficients() {
    let x: Vec<[f64; 3]> = (0..10).map(|i| [i as f64, (i * i) as f64, 1.0]).collect();
    let y: Vec<f64> = x.iter().map(|r| 2.0 * r[0] - 0.5 * r[1] + 3.0 * r[2]).collect();
    let c = min_norm_fit(&x, &y);
    assert!((c[0] - 2.0).abs() < 1e-9 && (c[1] + 0.5).abs() < 1e-9 && (c[2] - 3.0).abs() < 1e-9);
    assert_eq!(ladder_growth(&[1.0, 2.0, 4.0]), (4.0, 4.0, true));
}

#[test]
fn energy_identity_residual_vanishes_with_dt() {
    let base = SimParams { n: 6, t_end: 0.2, f0: 0.5, ..Default::default() };
    let lat = base.lattice().unwrap();
    let noise = build_noise_model(&NoiseSpec::default(), lat).unwrap();
    let v0 = sample_state(lat, 4.0, 1.0, 1.0, 2).unwrap();
    let residual = |dt: f64| {
        let p = SimParams { dt, ..base.clone() };
        let wiener = WienerPath::nested(3, 2.5e-3, (dt / 2.5e-3).log2().round() as u32);
        let d = integrate(&p, &noise, &v0, &wiener, 0, true).unwrap();
        verify_energy_identity(&d, &p).unwrap()
    };
    let coarse = residual(1e-2);
    let fine = residual(2.5e-3);
    assert_eq!(coarse.steps, 20);
    assert!(fine.residual < coarse.residual, "{} -> {}", coarse.residual, fine.residual);
    assert!(coarse.dissipation_total > 0.0 && coarse.margin > 0.0);
    assert!(coarse.c_fit.is_finite());

    let zero = fracpe::operators::StateV::zeros(lat);
    let d = integrate(&SimParams { dt: 1e-2, ..base.clone() }, &noise, &zero, &WienerPath::new(3, 1e-2), 0, true).unwrap();
    let r = verify_energy_identity(&d, &base).unwrap();
    assert_eq!(r.residual, 0.0);
    assert_eq!(r.c_fit, 0.0);
    let d = integrate(&base, &noise, &v0, &WienerPath::new(3, 1e-2), 0, false).unwrap();
    assert!(verify_energy_identity(&d, &base).is_err());
}

#[test]
fn deterministic_self_refinement_recovers_scheme_orders() {
    let none = fracpe::noise::NoiseModel::none();
    for (scheme, expected) in [(Scheme::EulerMaruyamaIto, 1.0), (Scheme::HeunStratonovich, 2.0)] {
        let base = SimParams { n: 6, t_end: 0.2, scheme, ..Default::default() };
        let lat = base.lattice().unwrap();
        let v0 = sample_state(lat, 4.0, 1.0, 1.0, 2).unwrap();
        let rep = convergence_study(ConvergenceKind::SelfRefinement, &base, &none, &v0, &[2e-2, 1e-2, 5e-3], 1, 1).unwrap();
        assert_eq!(rep.points.len(), 3);
        assert!((rep.strong_order - expected).abs() < 0.15, "{scheme:?}: {}", rep.strong_order);
    }
}

#[test]
fn convergence_study_rejects_non_nested_steps() {
    let base = SimParams { n: 4, t_end: 0.2, ..Default::default() };
    let lat = base.lattice().unwrap();
    let noise = build_noise_model(&NoiseSpec::default(), lat).unwrap();
    let v0 = sample_state(lat, 4.0, 1.0, 1.0, 2).unwrap();
    assert!(convergence_study(ConvergenceKind::Schemes, &base, &noise, &v0, &[1e-2, 3e-3], 2, 1).is_err());
    assert!(convergence_study(ConvergenceKind::Schemes, &base, &noise, &v0, &[1e-2], 2, 1).is_err());
}

#[test]
fn sampled_fields_are_real_and_decay() {
    let lat = Lattice::new(6).unwrap();
    let f = sample_field(lat, &[Parity::EvenInZ], 3.0, 1);
    assert!(f.symmetry_defect() < 1e-15);
    let v = sample_state(lat, 3.0, 1.5, 2.0, 1).unwrap();
    assert!((fracpe::spectral::norms::sobolev_norm(v.field(), 1.5) - 2.0).abs() < 1e-12);
}
