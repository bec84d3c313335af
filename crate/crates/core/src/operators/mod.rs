//! Primitive-equation operators on Galerkin fields: vertical velocity,
//! hydrostatic nonlinearity, Coriolis, transport noise and commutators.
//!
//! Every product is computed pseudo-spectrally and truncated back to the ball,
//! so each operator returns `P_n` of its continuum counterpart.

mod advection;
mod state;

pub use advection::{divergence_defect, Advector};
pub use state::{state_defect, StateV, STATE_PARITY};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::lattice::wavevector;
use crate::spectral::norms::{self, derivative, lambda, leray_complement, leray_hydrostatic};
use crate::spectral::{transform, Parity, SpectralField};

/// `w(V) = -int_0^z div_h V`, the odd-in-z solution of `dz w = -div_h V`.
///
/// Barotropic modes must be horizontally divergence-free.
pub fn vertical_velocity(v: &SpectralField) -> Result<SpectralField> {
    if v.components() != 2 {
        return Err(Error::invalid("vertical velocity needs a two-component field"));
    }
    let lat = v.lattice();
    let mut w = SpectralField::zeros(lat, &[v.parity()[0].join(v.parity()[1]).dz()]);
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (i, m) in lat.ball() {
        let k = wavevector(m);
        let div = k[0] * v.component(0)[i] + k[1] * v.component(1)[i];
        scale = scale.max((k[0].hypot(k[1])) * v.component(0)[i].norm().max(v.component(1)[i].norm()));
        if m[2] == 0 {
            worst = worst.max(div.norm());
        } else {
            w.component_mut(0)[i] = -div / k[2];
        }
    }
    if worst > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::precondition(format!(
            "barotropic part has horizontal divergence {worst:.3e}"
        )));
    }
    Ok(w)
}

/// Advecting velocity `(g1, g2, w(g))`.
pub fn momentum_velocity(g: &SpectralField) -> Result<SpectralField> {
    let w = vertical_velocity(g)?;
    SpectralField::stack(&[g, &w])
}

/// `P_n Q(g, f) = P_n (g . grad_h f + w(g) dz f)`.
pub fn nonlinear_q(g: &SpectralField, f: &SpectralField) -> Result<SpectralField> {
    Advector::from_velocity(&momentum_velocity(g)?)?.apply(f)
}

/// `F(V) = f0 (-V2, V1)`.
pub fn coriolis(v: &SpectralField, f0: f64) -> Result<SpectralField> {
    if v.components() != 2 {
        return Err(Error::invalid("Coriolis acts on two-component fields"));
    }
    let mut out = SpectralField::zeros(v.lattice(), &[v.parity()[1], v.parity()[0]]);
    for (x, y) in out.component_mut(0).iter_mut().zip(v.component(1)) {
        *x = -f0 * y;
    }
    for (x, y) in out.component_mut(1).iter_mut().zip(v.component(0)) {
        *x = f0 * y;
    }
    Ok(out)
}

/// `P_n (b . grad f)` for a divergence-free `b`.
pub fn transport(b: &SpectralField, f: &SpectralField) -> Result<SpectralField> {
    Advector::from_transport(b)?.apply(f)
}

/// `P_n P B V` with `P` the hydrostatic projector.
pub fn noise_operator(b: &Advector, v: &SpectralField) -> Result<SpectralField> {
    leray_hydrostatic(&b.apply(v)?)
}

/// Ito corrector `1/2 sum_k P_n P B_k P_n P B_k V`.
pub fn ito_corrector(noise: &[Advector], v: &SpectralField) -> Result<SpectralField> {
    let mut out = SpectralField::zeros(v.lattice(), v.parity());
    for b in noise {
        let once = noise_operator(b, v)?;
        out.axpy(0.5, &noise_operator(b, &once)?)?;
    }
    Ok(out)
}

/// `[P, B] phi = P B phi - B P phi` on two-component fields.
pub fn leray_commutator(b: &SpectralField, phi: &SpectralField) -> Result<SpectralField> {
    let adv = Advector::from_transport(b)?;
    let p_b = leray_hydrostatic(&adv.apply(phi)?)?;
    let b_p = adv.apply(&leray_hydrostatic(phi)?)?;
    p_b.sub(&b_p)
}

/// `-Q(B phi)`, the closed form of `[P, B] phi` when `P phi = phi`.
pub fn leray_commutator_closed(b: &SpectralField, phi: &SpectralField) -> Result<SpectralField> {
    Ok(leray_complement(&transport(b, phi)?)?.scaled(-1.0))
}

/// `[Lambda^s, B] f = P_n Lambda^s P_n (B f) - P_n B (Lambda^s f)`.
pub fn lambda_commutator(s: f64, b: &SpectralField, f: &SpectralField) -> Result<SpectralField> {
    let adv = Advector::from_transport(b)?;
    lambda_commutator_with(s, &adv, f)
}

pub fn lambda_commutator_with(s: f64, adv: &Advector, f: &SpectralField) -> Result<SpectralField> {
    let first = lambda(&adv.apply(f)?, s)?;
    let second = adv.apply(&lambda(f, s)?)?;
    first.sub(&second)
}

/// `[[Lambda^s, B], B] f = [Lambda^s, B](B f) - B([Lambda^s, B] f)`.
pub fn double_commutator(s: f64, b: &SpectralField, f: &SpectralField) -> Result<SpectralField> {
    let adv = Advector::from_transport(b)?;
    let bf = adv.apply(f)?;
    let c_bf = lambda_commutator_with(s, &adv, &bf)?;
    let c_f = lambda_commutator_with(s, &adv, f)?;
    c_bf.sub(&adv.apply(&c_f)?)
}

/// Grid samples of a momentum field, its gradient and its vertical velocity,
/// shared across every operator evaluated at the same state.
#[derive(Clone, Debug)]
pub struct SampledState {
    pub values: Vec<Vec<f64>>,
    pub grads: Vec<Vec<f64>>,
    pub velocity: Advector,
    pub parity: Vec<Parity>,
}

impl SampledState {
    pub fn new(v: &SpectralField) -> Result<Self> {
        let w = vertical_velocity(v)?;
        let derivs: Vec<SpectralField> = (0..3).map(|a| derivative(v, a)).collect();
        let mut comps: Vec<&[Complex64]> = vec![v.component(0), v.component(1)];
        for c in 0..2 {
            for d in &derivs {
                comps.push(d.component(c));
            }
        }
        comps.push(w.component(0));
        let mut grids = transform::to_grid(v.lattice(), &comps);
        let wgrid = grids.pop().expect("w sample");
        let grads = grids.split_off(2);
        let values = grids;
        let velocity = Advector::from_grids(
            v.lattice(),
            [v.parity()[0], v.parity()[1], w.parity()[0]],
            vec![values[0].clone(), values[1].clone(), wgrid],
        );
        Ok(Self {
            values,
            grads,
            velocity,
            parity: v.parity().to_vec(),
        })
    }

    /// `P_n Q(V, V)`.
    pub fn self_advection(&self) -> SpectralField {
        self.velocity.apply_gradients(&self.grads, &self.parity)
    }

    /// `P_n (b . grad V)` reusing the sampled gradient.
    pub fn transported_by(&self, b: &Advector) -> SpectralField {
        b.apply_gradients(&self.grads, &self.parity)
    }

    pub fn w1inf(&self) -> f64 {
        norms::w1inf_from_grids(&self.values, &self.grads)
    }
}
