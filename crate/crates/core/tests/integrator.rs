use fracpe::integrator::{
    cutoff, integrate, path_seed, run_ensemble, twin_run, Scheme, SimParams, Stepper, BLOWUP_NORM,
};
use fracpe::lab::sampling::sample_state;
use fracpe::noise::{build_noise_model, NoiseModel, NoiseSpec, WienerPath};
use fracpe::spectral::norms::inner;

fn params(scheme: Scheme) -> SimParams {
    SimParams {
        n: 6,
        dt: 1e-2,
        t_end: 0.2,
        f0: 0.5,
        scheme,
        record_every: 1,
        ..Default::default()
    }
}

const SCHEMES: [Scheme; 2] = [Scheme::EulerMaruyamaIto, Scheme::HeunStratonovich];

#[test]
fn runs_are_bitwise_deterministic() {
    for scheme in SCHEMES {
        let p = params(scheme);
        let lat = p.lattice().unwrap();
        let noise = build_noise_model(&NoiseSpec::default(), lat).unwrap();
        let v0 = sample_state(lat, 4.0, 1.0, 1.0, 2).unwrap();
        let w = WienerPath::new(8, p.dt);
        let a = integrate(&p, &noise, &v0, &w, 0, false).unwrap();
        let b = integrate(&p, &noise, &v0, &w, 0, false).unwrap();
        assert!(a.final_state.field().bit_eq(b.final_state.field()));
        assert_eq!(a.samples, b.samples);
    }
}

#[test]
fn resumed_runs_match_uninterrupted_runs() {
    for scheme in SCHEMES {
        let p = params(scheme);
        let lat = p.lattice().unwrap();
        let noise = build_noise_model(&NoiseSpec::default(), lat).unwrap();
        let v0 = sample_state(lat, 4.0, 1.0, 1.0, 2).unwrap();
        let w = WienerPath::new(8, p.dt);
        let full = integrate(&p, &noise, &v0, &w, 0, false).unwrap();
        let half = integrate(&SimParams { t_end: 0.1, ..p.clone() }, &noise, &v0, &w, 0, false).unwrap();
        assert_eq!(half.final_step, 10);
        let rest = integrate(&p, &noise, &half.final_state, &w, half.final_step, false).unwrap();
        assert!(rest.final_state.field().bit_eq(full.final_state.field()));
        assert_eq!(rest.final_step, full.final_step);
    }
}

#[test]
fn ensembles_follow_path_seeds() {
    let p = params(Scheme::EulerMaruyamaIto);
    let lat = p.lattice().unwrap();
    let noise = build_noise_model(&NoiseSpec::default(), lat).unwrap();
    let v0 = sample_state(lat, 4.0, 1.0, 1.0, 2).unwrap();
    let paths = run_ensemble(&p, &noise, |_| Ok(v0.clone()), 3, 4, 0).unwrap();
    for (i, d) in paths.iter().enumerate() {
        let single = integrate(&p, &noise, &v0, &WienerPath::new(path_seed(3, i), p.dt), 0, false).unwrap();
        assert!(d.final_state.field().bit_eq(single.final_state.field()));
    }
    assert!(!paths[0].final_state.field().bit_eq(paths[1].final_state.field()));
}

#[test]
fn nested_leaves_reproduce_the_coarse_path() {
    let p = params(Scheme::HeunStratonovich);
    let lat = p.lattice().unwrap();
    let noise = build_noise_model(&NoiseSpec::default(), lat).unwrap();
    let v0 = sample_state(lat, 4.0, 1.0, 1.0, 2).unwrap();
    let flat = integrate(&p, &noise, &v0, &WienerPath::new(5, p.dt), 0, false).unwrap();
    let nested = integrate(&p, &noise, &v0, &WienerPath::nested(5, p.dt, 0), 0, false).unwrap();
    assert!(flat.final_state.field().bit_eq(nested.final_state.field()));
    let two = WienerPath::nested(5, p.dt / 2.0, 1);
    assert!(integrate(&p, &noise, &v0, &two, 0, false).is_ok());
    assert!(integrate(&p, &noise, &v0, &WienerPath::new(5, p.dt / 2.0), 0, false).is_err());
}

#[test]
fn inviscid_deterministic_energy_drift_is_second_order_in_dt() {
    let none = NoiseModel::none();
    let lat = params(Scheme::HeunStratonovich).lattice().unwrap();
    let v0 = sample_state(lat, 4.0, 1.0, 1.0, 6).unwrap();
    let e0 = inner(v0.field(), v0.field());
    let drift = |dt: f64| {
        let p = SimParams {
            dt,
            t_end: 0.2,
            dissipation: false,
            ..params(Scheme::HeunStratonovich)
        };
        let d = integrate(&p, &none, &v0, &WienerPath::new(1, dt), 0, false).unwrap();
        (inner(d.final_state.field(), d.final_state.field()) - e0).abs() / e0
    };
    let (a, b) = (drift(1e-2), drift(5e-3));
    assert!(a < 1e-3, "drift {a}");
    assert!(b < a / 3.0, "drift {a} -> {b}");
}

#[test]
fn dissipation_decreases_deterministic_energy() {
    let none = NoiseModel::none();
    let p = params(Scheme::EulerMaruyamaIto);
    let lat = p.lattice().unwrap();
    let v0 = sample_state(lat, 4.0, 1.0, 1.0, 6).unwrap();
    let d = integrate(&p, &none, &v0, &WienerPath::new(1, p.dt), 0, false).unwrap();
    let e: Vec<f64> = d.samples.iter().map(|s| s.energy).collect();
    assert!(e.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)));
}

#[test]
fn cutoff_switches_off_advection_above_rho() {
    let p = SimParams {
        rho: 1e-3,
        ..params(Scheme::EulerMaruyamaIto)
    };
    let lat = p.lattice().unwrap();
    let none = NoiseModel::none();
    let v0 = sample_state(lat, 4.0, 1.0, 1.0, 6).unwrap();
    let stepper = Stepper::new(&p, &none).unwrap();
    let eval = stepper.evaluate_for_step(&v0).unwrap();
    assert_eq!(eval.theta, 0.0);
    assert_eq!(inner(&eval.advection, &eval.advection), 0.0);
    let d = integrate(&p, &none, &v0, &WienerPath::new(1, p.dt), 0, false).unwrap();
    assert_eq!(d.cutoff_time, Some(0.0));
    assert_eq!(d.stopping_time, Some(0.0));
    assert!(d.samples.iter().all(|s| s.theta == cutoff(s.w1inf, p.rho)));
}

#[test]
fn huge_states_are_marked_as_blowups() {
    let p = params(Scheme::EulerMaruyamaIto);
    let lat = p.lattice().unwrap();
    let none = NoiseModel::none();
    let v0 = sample_state(lat, 4.0, 1.0, 10.0 * BLOWUP_NORM, 6).unwrap();
    let d = integrate(&p, &none, &v0, &WienerPath::new(1, p.dt), 0, false).unwrap();
    assert_eq!(d.blowup.as_ref().map(|b| b.step), Some(0));
    assert_eq!(d.final_step, 0);
}

#[test]
fn twin_with_zero_delta_is_identical() {
    let p = params(Scheme::HeunStratonovich);
    let lat = p.lattice().unwrap();
    let noise = build_noise_model(&NoiseSpec::default(), lat).unwrap();
    let v0 = sample_state(lat, 4.0, 1.0, 1.0, 2).unwrap();
    let u = sample_state(lat, 4.0, 1.0, 1.0, 3).unwrap();
    let r = twin_run(&p, &noise, &v0, &u, 0.0, 1, 3, 0).unwrap();
    assert!(r.paths.iter().all(|p| p.identical));
    assert_eq!(r.max_final_diff, 0.0);
    let r = twin_run(&p, &noise, &v0, &u, 1e-6, 1, 3, 0).unwrap();
    assert!(r.paths.iter().all(|p| !p.identical));
    assert!(r.max_final_diff > 0.0 && r.max_final_diff < 1e-4);
    assert!(r.c_fit.is_finite() && r.c_fit >= 0.0);
}

#[test]
fn invalid_parameters_name_their_key() {
    for (p, key) in [
        (SimParams { s: 0.5, ..Default::default() }, "s"),
        (SimParams { rho: 0.0, ..Default::default() }, "rho"),
        (SimParams { t_end: 0.015, ..Default::default() }, "t_end"),
        (SimParams { p: 1.0, ..Default::default() }, "p"),
    ] {
        let err = p.validate().unwrap_err().to_string();
        assert!(err.contains(key), "{err}");
    }
    let none = NoiseModel::none();
    let other = build_noise_model(&NoiseSpec::default(), fracpe::spectral::Lattice::new(4).unwrap()).unwrap();
    assert!(Stepper::new(&SimParams::default(), &other).is_err());
    assert!(Stepper::new(&SimParams::default(), &none).is_ok());
}
