//! Spectral fields: truncated Fourier coefficients with a per-component
//! z-parity class.
//!
//! Invariants kept by [`SpectralField::symmetrize`]:
//! - `c(-m) = conj(c(m))` (real field),
//! - `c(m1, m2, -m3) = +/- c(m1, m2, m3)` for even/odd components,
//! - `c(m) = 0` for `|m| > n`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lattice::Lattice;
use crate::error::{Error, Result};

/// Behaviour of a component under `z -> -z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    EvenInZ,
    OddInZ,
    NoConstraint,
}

impl Parity {
    /// Parity of `d/dz` applied to a field of this parity.
    pub fn dz(self) -> Self {
        match self {
            Parity::EvenInZ => Parity::OddInZ,
            Parity::OddInZ => Parity::EvenInZ,
            Parity::NoConstraint => Parity::NoConstraint,
        }
    }

    /// Parity of a pointwise product.
    pub fn times(self, other: Self) -> Self {
        use Parity::*;
        match (self, other) {
            (NoConstraint, _) | (_, NoConstraint) => NoConstraint,
            (a, b) if a == b => EvenInZ,
            _ => OddInZ,
        }
    }

    /// Common parity of a sum, `NoConstraint` when the terms disagree.
    pub fn join(self, other: Self) -> Self {
        if self == other {
            self
        } else {
            Parity::NoConstraint
        }
    }

    fn sign(self) -> Option<f64> {
        match self {
            Parity::EvenInZ => Some(1.0),
            Parity::OddInZ => Some(-1.0),
            Parity::NoConstraint => None,
        }
    }
}

/// Coefficient box per component, component-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    lattice: Lattice,
    parity: Vec<Parity>,
    data: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(lattice: Lattice, parity: &[Parity]) -> Self {
        Self {
            lattice,
            parity: parity.to_vec(),
            data: vec![Complex64::new(0.0, 0.0); lattice.box_len() * parity.len()],
        }
    }

    /// Field with coefficients `coef(component, m)` on the ball, then symmetrized.
    pub fn from_fn(
        lattice: Lattice,
        parity: &[Parity],
        mut coef: impl FnMut(usize, [i64; 3]) -> Complex64,
    ) -> Self {
        let mut f = Self::zeros(lattice, parity);
        let len = lattice.box_len();
        for c in 0..parity.len() {
            for (i, m) in lattice.ball() {
                f.data[c * len + i] = coef(c, m);
            }
        }
        f.symmetrize();
        f
    }

    /// Wraps raw component-major box data without symmetrizing.
    pub fn from_raw(lattice: Lattice, parity: &[Parity], data: Vec<Complex64>) -> Result<Self> {
        if data.len() != lattice.box_len() * parity.len() {
            return Err(Error::invalid(format!(
                "expected {} coefficients, got {}",
                lattice.box_len() * parity.len(),
                data.len()
            )));
        }
        Ok(Self {
            lattice,
            parity: parity.to_vec(),
            data,
        })
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn components(&self) -> usize {
        self.parity.len()
    }

    pub fn parity(&self) -> &[Parity] {
        &self.parity
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let len = self.lattice.box_len();
        &self.data[c * len..(c + 1) * len]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let len = self.lattice.box_len();
        &mut self.data[c * len..(c + 1) * len]
    }

    /// Single component as a one-component field.
    pub fn extract(&self, c: usize) -> SpectralField {
        SpectralField {
            lattice: self.lattice,
            parity: vec![self.parity[c]],
            data: self.component(c).to_vec(),
        }
    }

    /// Stacks fields on a common lattice into one multi-component field.
    pub fn stack(parts: &[&SpectralField]) -> Result<SpectralField> {
        let first = parts
            .first()
            .ok_or_else(|| Error::invalid("cannot stack zero fields"))?;
        let mut parity = Vec::new();
        let mut data = Vec::new();
        for p in parts {
            if p.lattice != first.lattice {
                return Err(Error::invalid("stacked fields live on different lattices"));
            }
            parity.extend_from_slice(&p.parity);
            data.extend_from_slice(&p.data);
        }
        Ok(SpectralField {
            lattice: first.lattice,
            parity,
            data,
        })
    }

    pub fn get(&self, c: usize, m: [i64; 3]) -> Complex64 {
        match self.lattice.try_index(m) {
            Some(i) => self.component(c)[i],
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Sets one coefficient; the caller restores the invariants afterwards.
    pub fn set(&mut self, c: usize, m: [i64; 3], v: Complex64) {
        let i = self.lattice.index(m);
        self.component_mut(c)[i] = v;
    }

    pub fn set_parity(&mut self, c: usize, p: Parity) {
        self.parity[c] = p;
    }

    /// Projects onto real, parity-respecting, ball-truncated coefficients.
    pub fn symmetrize(&mut self) {
        let lat = self.lattice;
        let len = lat.box_len();
        let mut tmp = vec![Complex64::new(0.0, 0.0); len];
        for c in 0..self.parity.len() {
            let sign = self.parity[c].sign();
            let comp = &mut self.data[c * len..(c + 1) * len];
            for (i, m) in (0..len).map(|i| (i, lat.mode(i))) {
                if !lat.in_ball(m) {
                    comp[i] = Complex64::new(0.0, 0.0);
                }
            }
            if let Some(sign) = sign {
                for i in 0..len {
                    tmp[i] = 0.5 * (comp[i] + sign * comp[lat.reflect_z(i)]);
                }
                comp.copy_from_slice(&tmp);
            }
            for i in 0..len {
                tmp[i] = 0.5 * (comp[i] + comp[lat.negate(i)].conj());
            }
            comp.copy_from_slice(&tmp);
        }
    }

    /// Largest violation of reality, parity or truncation, relative to the
    /// largest coefficient.
    pub fn symmetry_defect(&self) -> f64 {
        let lat = self.lattice;
        let len = lat.box_len();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for c in 0..self.parity.len() {
            let comp = self.component(c);
            let sign = self.parity[c].sign();
            for i in 0..len {
                if !lat.in_ball(lat.mode(i)) {
                    worst = worst.max(comp[i].norm());
                    continue;
                }
                worst = worst.max((comp[i] - comp[lat.negate(i)].conj()).norm());
                if let Some(sign) = sign {
                    worst = worst.max((comp[i] - sign * comp[lat.reflect_z(i)]).norm());
                }
            }
        }
        worst / scale
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Mean (zero mode) of component `c`.
    pub fn mean(&self, c: usize) -> f64 {
        self.component(c)[self.lattice.index([0, 0, 0])].re
    }

    pub fn remove_mean(&mut self) {
        let i0 = self.lattice.index([0, 0, 0]);
        for c in 0..self.parity.len() {
            self.component_mut(c)[i0] = Complex64::new(0.0, 0.0);
        }
    }

    fn check_shape(&self, other: &SpectralField) -> Result<()> {
        if self.lattice != other.lattice || self.parity.len() != other.parity.len() {
            return Err(Error::invalid(
                "fields differ in lattice or component count",
            ));
        }
        Ok(())
    }

    /// `self += a * other`; parities join componentwise.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) -> Result<()> {
        self.check_shape(other)?;
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += a * y;
        }
        for (p, q) in self.parity.iter_mut().zip(&other.parity) {
            *p = p.join(*q);
        }
        Ok(())
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        let mut out = self.clone();
        out.axpy(1.0, other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    pub fn scale(&mut self, a: f64) {
        for x in &mut self.data {
            *x *= a;
        }
    }

    pub fn scaled(&self, a: f64) -> SpectralField {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// Applies a real radial multiplier `mult(m)` to every component.
    pub fn map_modes(&self, mut mult: impl FnMut([i64; 3]) -> f64) -> SpectralField {
        let mut out = self.clone();
        let lat = self.lattice;
        let len = lat.box_len();
        let factors: Vec<f64> = (0..len).map(|i| mult(lat.mode(i))).collect();
        for c in 0..self.parity.len() {
            for (x, f) in out.component_mut(c).iter_mut().zip(&factors) {
                *x *= *f;
            }
        }
        out
    }

    /// Copies coefficients onto another lattice, dropping modes outside its ball.
    pub fn relattice(&self, target: Lattice) -> SpectralField {
        let mut out = SpectralField::zeros(target, &self.parity);
        let len = target.box_len();
        for c in 0..self.parity.len() {
            for (i, m) in target.ball() {
                out.data[c * len + i] = self.get(c, m);
            }
        }
        out
    }

    /// Maximum coefficient difference.
    pub fn max_diff(&self, other: &SpectralField) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Bitwise equality of coefficients, lattice and parities.
    pub fn bit_eq(&self, other: &SpectralField) -> bool {
        self.lattice == other.lattice
            && self.parity == other.parity
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits())
    }
}
