//! One-step maps for the truncated system.
//!
//! Both schemes treat `Lambda^s` with the integrating factor
//! `E = exp(-|k|^s dt)` and everything else explicitly; the cutoff is frozen at
//! its value at the start of the step.

use serde::{Deserialize, Serialize};

use super::cutoff::cutoff;
use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::operators::{coriolis, SampledState, StateV};
use crate::spectral::lattice::{norm2, wavenumber};
use crate::spectral::norms::{lambda, leray_hydrostatic};
use crate::spectral::{Lattice, SpectralField};

/// Time-stepping scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Euler-Maruyama on the Ito form with the explicit corrector.
    EulerMaruyamaIto,
    /// Stochastic Heun on the Stratonovich form, no corrector.
    HeunStratonovich,
}

/// Physical and numerical parameters of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimParams {
    pub n: usize,
    /// Dissipation order `s >= 1`.
    pub s: f64,
    /// Regularity index `sigma >= 1`.
    pub sigma: f64,
    /// Cutoff radius.
    pub rho: f64,
    /// Coriolis parameter.
    pub f0: f64,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    /// Moment exponent `p >= 2` of the energy functional.
    pub p: f64,
    pub record_every: usize,
    /// Keep the `Lambda^s` term; switching it off is for conservation checks.
    pub dissipation: bool,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            n: 8,
            s: 1.5,
            sigma: 1.0,
            rho: 50.0,
            f0: 0.0,
            dt: 1e-2,
            t_end: 1.0,
            scheme: Scheme::EulerMaruyamaIto,
            p: 2.0,
            record_every: 10,
            dissipation: true,
        }
    }
}

impl SimParams {
    pub fn lattice(&self) -> Result<Lattice> {
        Lattice::new(self.n)
    }

    /// Number of steps from 0 to `t_end`; `t_end` must be a multiple of `dt`.
    pub fn total_steps(&self) -> Result<u64> {
        let ratio = self.t_end / self.dt;
        let steps = ratio.round();
        if !(ratio.is_finite() && (ratio - steps).abs() <= 1e-9 * steps.max(1.0)) || steps < 0.0 {
            return Err(Error::invalid(format!(
                "t_end {} is not a whole number of steps of {}",
                self.t_end, self.dt
            )));
        }
        Ok(steps as u64)
    }

    pub fn validate(&self) -> Result<()> {
        let checks: [(&str, bool, &str); 7] = [
            ("n", self.n >= 1, "must be >= 1"),
            ("s", self.s >= 1.0 && self.s.is_finite(), "must be >= 1"),
            ("sigma", self.sigma >= 1.0 && self.sigma.is_finite(), "must be >= 1"),
            ("rho", self.rho > 0.0 && self.rho.is_finite(), "must be > 0"),
            ("dt", self.dt > 0.0 && self.dt.is_finite(), "must be > 0"),
            ("p", self.p >= 2.0 && self.p.is_finite(), "must be >= 2"),
            ("record_every", self.record_every >= 1, "must be >= 1"),
        ];
        for (key, ok, msg) in checks {
            if !ok {
                return Err(Error::config(key, msg));
            }
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::config("t_end", "must be >= 0"));
        }
        if !self.f0.is_finite() {
            return Err(Error::config("f0", "must be finite"));
        }
        self.total_steps().map_err(|e| Error::config("t_end", e.to_string()))?;
        Ok(())
    }
}

/// Operator evaluations at one state.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub theta: f64,
    pub w1inf: f64,
    /// `P_n P Q(V, V)`.
    pub advection: SpectralField,
    /// `P F(V)`.
    pub coriolis: SpectralField,
    /// `G_k = P_n P B_k V`.
    pub noise: Vec<SpectralField>,
    /// `P_n P B_k G_k`, present when requested.
    pub second_order: Option<Vec<SpectralField>>,
}

impl Evaluation {
    /// `-theta^2 P Q - P F`, plus the Ito corrector when `ito` is set.
    pub fn drift(&self, ito: bool) -> SpectralField {
        let mut d = self.coriolis.scaled(-1.0);
        d.axpy(-self.theta * self.theta, &self.advection)
            .expect("same shape");
        if ito {
            for g in self.second_order.as_ref().expect("second-order terms evaluated") {
                d.axpy(0.5, g).expect("same shape");
            }
        }
        d
    }

    /// `sum_k G_k dW_k`.
    pub fn noise_increment(&self, dw: &[f64]) -> Option<SpectralField> {
        let mut it = self.noise.iter().zip(dw);
        let (g0, w0) = it.next()?;
        let mut acc = g0.scaled(*w0);
        for (g, w) in it {
            acc.axpy(*w, g).expect("same shape");
        }
        Some(acc)
    }
}

/// Increments of the Ito energy balance for `|Lambda^sigma V|^p` over one step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyTerms {
    pub step: u64,
    /// `|Lambda^sigma V|^p` at the start of the step.
    pub level: f64,
    /// Deterministic drift rate.
    pub i0: f64,
    /// Dissipative part of `i0`, sign reversed.
    pub dissipation: f64,
    /// Corrector-plus-quadratic-variation rate.
    pub i1: f64,
    /// Rate from the `p > 2` quadratic variation.
    pub i2: f64,
    /// Martingale increment over the step.
    pub i3: f64,
}

/// Precomputed one-step map for fixed parameters and noise.
pub struct Stepper<'a> {
    params: SimParams,
    lattice: Lattice,
    noise: &'a NoiseModel,
    decay: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(params: &SimParams, noise: &'a NoiseModel) -> Result<Self> {
        params.validate()?;
        let lattice = params.lattice()?;
        if let Some(l) = noise.lattice() {
            if l != lattice {
                return Err(Error::invalid("noise fields live on another lattice"));
            }
        }
        let decay = (0..lattice.box_len())
            .map(|i| {
                let m = lattice.mode(i);
                if !params.dissipation || norm2(m) == 0 {
                    1.0
                } else {
                    (-wavenumber(m).powf(params.s) * params.dt).exp()
                }
            })
            .collect();
        Ok(Self {
            params: params.clone(),
            lattice,
            noise,
            decay,
        })
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn noise(&self) -> &NoiseModel {
        self.noise
    }

    fn needs_second_order(&self) -> bool {
        self.params.scheme == Scheme::EulerMaruyamaIto
    }

    /// Evaluates every operator at `v`; `theta` overrides the cutoff value.
    pub fn evaluate(&self, v: &SpectralField, theta: Option<f64>, second_order: bool) -> Result<Evaluation> {
        let sampled = SampledState::new(v)?;
        let w1inf = sampled.w1inf();
        let theta = theta.unwrap_or_else(|| cutoff(w1inf, self.params.rho));
        let advection = if theta > 0.0 {
            leray_hydrostatic(&sampled.self_advection())?
        } else {
            SpectralField::zeros(self.lattice, v.parity())
        };
        let coriolis = leray_hydrostatic(&coriolis(v, self.params.f0)?)?;
        let mut noise = Vec::with_capacity(self.noise.len());
        for b in self.noise.advectors() {
            noise.push(leray_hydrostatic(&sampled.transported_by(b))?);
        }
        let second_order = if second_order {
            let mut out = Vec::with_capacity(noise.len());
            for (b, g) in self.noise.advectors().iter().zip(&noise) {
                out.push(leray_hydrostatic(&b.apply(g)?)?);
            }
            Some(out)
        } else {
            None
        };
        Ok(Evaluation {
            theta,
            w1inf,
            advection,
            coriolis,
            noise,
            second_order,
        })
    }

    /// Evaluation suited to the configured scheme.
    pub fn evaluate_for_step(&self, v: &StateV) -> Result<Evaluation> {
        self.evaluate(v.field(), None, self.needs_second_order())
    }

    fn dissipate(&self, x: &mut SpectralField) {
        let len = self.lattice.box_len();
        for c in 0..x.components() {
            for (z, e) in x.data_mut()[c * len..(c + 1) * len].iter_mut().zip(&self.decay) {
                *z *= *e;
            }
        }
    }

    fn finish(&self, x: SpectralField, step: u64) -> Result<StateV> {
        if x.data().iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Blowup {
                step,
                reason: "non-finite coefficients".into(),
            });
        }
        StateV::project(&x)
    }

    /// Advances `v` one step given its evaluation and the Wiener increments.
    pub fn advance(&self, v: &StateV, eval: &Evaluation, step: u64, dw: &[f64]) -> Result<StateV> {
        let x = self.unprojected(v, eval, step, dw)?;
        self.finish(x, step)
    }

    /// The update of [`Stepper::advance`] before the final projection onto states.
    pub fn unprojected(&self, v: &StateV, eval: &Evaluation, step: u64, dw: &[f64]) -> Result<SpectralField> {
        match self.params.scheme {
            Scheme::EulerMaruyamaIto => self.update_em(v, eval, dw),
            Scheme::HeunStratonovich => self.update_heun(v, eval, step, dw),
        }
    }

    fn update_em(&self, v: &StateV, eval: &Evaluation, dw: &[f64]) -> Result<SpectralField> {
        let dt = self.params.dt;
        let mut x = v.field().clone();
        x.axpy(dt, &eval.drift(true))?;
        if let Some(g) = eval.noise_increment(dw) {
            x.axpy(1.0, &g)?;
        }
        self.dissipate(&mut x);
        Ok(x)
    }

    fn update_heun(&self, v: &StateV, eval: &Evaluation, step: u64, dw: &[f64]) -> Result<SpectralField> {
        let dt = self.params.dt;
        let mut k0 = eval.drift(false).scaled(dt);
        if let Some(g) = eval.noise_increment(dw) {
            k0.axpy(1.0, &g)?;
        }
        let mut pred = v.field().add(&k0)?;
        self.dissipate(&mut pred);
        let pred = self.finish(pred, step)?;
        let eval1 = self.evaluate(pred.field(), Some(eval.theta), false)?;
        let mut k1 = eval1.drift(false).scaled(dt);
        if let Some(g) = eval1.noise_increment(dw) {
            k1.axpy(1.0, &g)?;
        }
        let mut x = v.field().clone();
        x.axpy(0.5, &k0)?;
        self.dissipate(&mut x);
        x.axpy(0.5, &k1)?;
        Ok(x)
    }

    /// One Euler-Maruyama step on the Ito form.
    pub fn step_em_ito(&self, v: &StateV, step: u64, dw: &[f64]) -> Result<StateV> {
        let eval = self.evaluate(v.field(), None, true)?;
        let x = self.update_em(v, &eval, dw)?;
        self.finish(x, step)
    }

    /// One stochastic Heun step on the Stratonovich form.
    pub fn step_heun_stratonovich(&self, v: &StateV, step: u64, dw: &[f64]) -> Result<StateV> {
        let eval = self.evaluate(v.field(), None, false)?;
        let x = self.update_heun(v, &eval, step, dw)?;
        self.finish(x, step)
    }

    /// Energy-balance increments at `v`; `eval` must carry second-order terms.
    pub fn energy_terms(&self, v: &StateV, eval: &Evaluation, step: u64, dw: &[f64]) -> Result<EnergyTerms> {
        let p = self.params.p;
        let sigma = self.params.sigma;
        let f = v.field();
        let weighted = lambda(f, 2.0 * sigma)?;
        let level2 = crate::spectral::norms::inner(f, &weighted).max(0.0);
        let level = level2.sqrt();
        let pow = |e: f64| if level2 == 0.0 { 0.0 } else { level.powf(e) };
        let pair = |a: &SpectralField| crate::spectral::norms::inner(a, &weighted);

        let mut det = eval.advection.scaled(eval.theta * eval.theta);
        det.axpy(1.0, &eval.coriolis)?;
        let dissipation = if self.params.dissipation { pair(&lambda(f, self.params.s)?) } else { 0.0 };
        let i0 = -pair(&det) - dissipation;
        let second = eval
            .second_order
            .as_ref()
            .ok_or_else(|| Error::invalid("energy terms need second-order noise evaluations"))?;
        let mut i1 = 0.0;
        let mut i2 = 0.0;
        let mut i3 = 0.0;
        for ((g, gg), w) in eval.noise.iter().zip(second).zip(dw) {
            let lg = lambda(g, sigma)?;
            i1 += pair(gg) + crate::spectral::norms::inner(&lg, &lg);
            let m = pair(g);
            i2 += m * m;
            i3 += m * w;
        }
        Ok(EnergyTerms {
            step,
            level: pow(p),
            i0: p * pow(p - 2.0) * i0,
            dissipation: p * pow(p - 2.0) * dissipation,
            i1: 0.5 * p * pow(p - 2.0) * i1,
            i2: 0.5 * p * (p - 2.0) * pow(p - 4.0) * i2,
            i3: p * pow(p - 2.0) * i3,
        })
    }
}
