//! Norms, inner products, Fourier multipliers and projections on [`SpectralField`].

use num_complex::Complex64;

use super::field::SpectralField;
use super::lattice::{norm2, wavenumber, wavevector, Lattice};
use super::transform;
use crate::error::{Error, Result};

/// Real inner product `Re sum_m f(m) conj(g(m))`, i.e. the L2 pairing on the unit torus.
pub fn inner(f: &SpectralField, g: &SpectralField) -> f64 {
    debug_assert_eq!(f.lattice(), g.lattice());
    debug_assert_eq!(f.components(), g.components());
    f.data().iter().zip(g.data()).map(|(a, b)| (a * b.conj()).re).sum()
}

pub fn l2_norm(f: &SpectralField) -> f64 {
    inner(f, f).sqrt()
}

fn weighted_sum(f: &SpectralField, weight: impl Fn([i64; 3]) -> f64) -> f64 {
    let lat = f.lattice();
    let len = lat.box_len();
    let mut total = 0.0;
    for (i, m) in lat.ball() {
        let w = weight(m);
        if w == 0.0 {
            continue;
        }
        for c in 0..f.components() {
            total += w * f.data()[c * len + i].norm_sqr();
        }
    }
    total
}

/// `H^sigma` norm with weight `1 + |k|^(2 sigma)`; `sigma = 0` is the plain L2 norm.
pub fn sobolev_norm(f: &SpectralField, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return l2_norm(f);
    }
    weighted_sum(f, |m| {
        if norm2(m) == 0 {
            1.0
        } else {
            1.0 + wavenumber(m).powf(2.0 * sigma)
        }
    })
    .sqrt()
}

/// Homogeneous norm `(sum_{m != 0} |k|^(2 sigma) |f(m)|^2)^(1/2)`.
pub fn hdot_norm(f: &SpectralField, sigma: f64) -> f64 {
    weighted_sum(f, |m| {
        if norm2(m) == 0 {
            0.0
        } else {
            wavenumber(m).powf(2.0 * sigma)
        }
    })
    .sqrt()
}

/// `Lambda^s f` with symbol `|k|^s`. Negative `s` requires a zero-mean field;
/// `s = 0` is the identity.
pub fn lambda(f: &SpectralField, s: f64) -> Result<SpectralField> {
    if s == 0.0 {
        return Ok(f.clone());
    }
    if s < 0.0 {
        let scale = f.max_abs().max(f64::MIN_POSITIVE);
        for c in 0..f.components() {
            if f.mean(c).abs() > 1e-12 * scale {
                return Err(Error::precondition(
                    "Lambda with negative order needs a zero-mean field",
                ));
            }
        }
    }
    Ok(f.map_modes(|m| {
        if norm2(m) == 0 {
            0.0
        } else {
            wavenumber(m).powf(s)
        }
    }))
}

/// Zeroes every mode with `|m| > n`.
pub fn project_galerkin(f: &SpectralField, n: usize) -> Result<SpectralField> {
    if n > f.lattice().n() {
        return Err(Error::invalid(format!(
            "cannot project onto n = {n} above the lattice level {}",
            f.lattice().n()
        )));
    }
    let cap = (n * n) as i64;
    Ok(f.map_modes(|m| if norm2(m) <= cap { 1.0 } else { 0.0 }))
}

/// Spectral partial derivative along `axis`.
pub fn derivative(f: &SpectralField, axis: usize) -> SpectralField {
    let lat = f.lattice();
    let len = lat.box_len();
    let mut out = f.clone();
    let factors: Vec<Complex64> = (0..len)
        .map(|i| Complex64::new(0.0, wavevector(lat.mode(i))[axis]))
        .collect();
    for c in 0..f.components() {
        for (x, k) in out.component_mut(c).iter_mut().zip(&factors) {
            *x *= k;
        }
        if axis == 2 {
            out.set_parity(c, f.parity()[c].dz());
        }
    }
    out
}

/// Horizontal gradient of a scalar field: `(d1 f, d2 f)`.
pub fn grad_h(f: &SpectralField) -> Result<SpectralField> {
    if f.components() != 1 {
        return Err(Error::invalid("grad_h expects a scalar field"));
    }
    SpectralField::stack(&[&derivative(f, 0), &derivative(f, 1)])
}

/// Horizontal divergence `d1 f1 + d2 f2` of a two-component field.
pub fn div_h(f: &SpectralField) -> Result<SpectralField> {
    if f.components() != 2 {
        return Err(Error::invalid("div_h expects a two-component field"));
    }
    let mut d = derivative(&f.extract(0), 0);
    d.axpy(1.0, &derivative(&f.extract(1), 1))?;
    Ok(d)
}

/// Hydrostatic Leray projector: removes the horizontal gradient part of the
/// barotropic (`m3 = 0`) slice and leaves baroclinic modes untouched.
pub fn leray_hydrostatic(f: &SpectralField) -> Result<SpectralField> {
    if f.components() != 2 {
        return Err(Error::invalid("the hydrostatic projector acts on two-component fields"));
    }
    let lat = f.lattice();
    let mut out = f.clone();
    apply_leray_in_place(lat, out.data_mut());
    Ok(out)
}

/// Complementary projector `I - P`.
pub fn leray_complement(f: &SpectralField) -> Result<SpectralField> {
    let p = leray_hydrostatic(f)?;
    f.sub(&p)
}

pub(crate) fn apply_leray_in_place(lat: Lattice, data: &mut [Complex64]) {
    let len = lat.box_len();
    let n = lat.n() as i64;
    for m1 in -n..=n {
        for m2 in -n..=n {
            if m1 == 0 && m2 == 0 {
                continue;
            }
            let i = lat.index([m1, m2, 0]);
            let (k1, k2) = (m1 as f64, m2 as f64);
            let kk = k1 * k1 + k2 * k2;
            let d = (k1 * data[i] + k2 * data[len + i]) / kk;
            data[i] -= k1 * d;
            data[len + i] -= k2 * d;
        }
    }
}

/// Discrete `W^{1,inf}` norm from grid values and gradients:
/// `max_x max(|f(x)|_2, max_{c,j} |d_j f_c(x)|)`.
pub fn w1inf_from_grids(values: &[Vec<f64>], grads: &[Vec<f64>]) -> f64 {
    let len = values.first().map_or(0, |v| v.len());
    let mut best: f64 = 0.0;
    for p in 0..len {
        let mag2: f64 = values.iter().map(|v| v[p] * v[p]).sum();
        best = best.max(mag2.sqrt());
    }
    for g in grads {
        best = g.iter().fold(best, |acc, v| acc.max(v.abs()));
    }
    best
}

/// Discrete `W^{1,inf}` norm on the collocation grid.
pub fn w1inf_norm(f: &SpectralField) -> f64 {
    let values = transform::field_to_grid(f);
    let grads = physical_gradients(f);
    w1inf_from_grids(&values, &grads)
}

/// Grid samples of `d_j f_c`, ordered `(c, j)`.
pub fn physical_gradients(f: &SpectralField) -> Vec<Vec<f64>> {
    let derivs: Vec<SpectralField> = (0..3).map(|a| derivative(f, a)).collect();
    let mut comps = Vec::with_capacity(3 * f.components());
    for c in 0..f.components() {
        for d in &derivs {
            comps.push(d.component(c));
        }
    }
    transform::to_grid(f.lattice(), &comps)
}

/// Maximum over the grid of `|f_c(x)|`.
pub fn sup_norm(f: &SpectralField) -> f64 {
    transform::field_to_grid(f)
        .iter()
        .flat_map(|v| v.iter())
        .fold(0.0, |acc: f64, v| acc.max(v.abs()))
}

/// True when every component is real, parity-respecting and ball-truncated to `tol`.
pub fn is_structured(f: &SpectralField, tol: f64) -> bool {
    f.symmetry_defect() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::field::Parity;
    use std::f64::consts::TAU;

    fn cos_x1(lat: Lattice) -> SpectralField {
        let mut f = SpectralField::zeros(lat, &[Parity::EvenInZ]);
        f.set(0, [1, 0, 0], Complex64::new(0.5, 0.0));
        f.set(0, [-1, 0, 0], Complex64::new(0.5, 0.0));
        f
    }

    #[test]
    fn cosine_norms() {
        let lat = Lattice::new(4).unwrap();
        let f = cos_x1(lat);
        assert!((inner(&f, &f) - 0.5).abs() < 1e-15);
        assert!((sobolev_norm(&f, 0.0).powi(2) - 0.5).abs() < 1e-15);
        let h1 = sobolev_norm(&f, 1.0).powi(2);
        assert!((h1 - 0.5 * (1.0 + TAU * TAU)).abs() < 1e-12);
        assert!((hdot_norm(&f, 1.0).powi(2) - 0.5 * TAU * TAU).abs() < 1e-12);
    }

    #[test]
    fn lambda_negative_needs_zero_mean() {
        let lat = Lattice::new(2).unwrap();
        let mut f = cos_x1(lat);
        assert!(lambda(&f, -1.0).is_ok());
        f.set(0, [0, 0, 0], Complex64::new(1.0, 0.0));
        assert!(matches!(lambda(&f, -1.0), Err(Error::PreconditionViolation(_))));
    }

    #[test]
    fn galerkin_above_level_is_error() {
        let lat = Lattice::new(2).unwrap();
        assert!(project_galerkin(&cos_x1(lat), 3).is_err());
        let g = project_galerkin(&cos_x1(lat), 0).unwrap();
        assert_eq!(g.max_abs(), 0.0);
    }

    #[test]
    fn w1inf_of_cosine() {
        let lat = Lattice::with_grid(4, 16).unwrap();
        let w = w1inf_norm(&cos_x1(lat));
        assert!((w - TAU).abs() < 1e-12);
    }

    #[test]
    fn leray_kills_gradients_of_barotropic_slice() {
        let lat = Lattice::new(3).unwrap();
        let phi = SpectralField::from_fn(lat, &[Parity::EvenInZ], |_, m| {
            if m[2] == 0 {
                Complex64::new(1.0 / (1.0 + norm2(m) as f64), 0.3)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let g = grad_h(&phi).unwrap();
        let p = leray_hydrostatic(&g).unwrap();
        assert!(p.max_abs() < 1e-14 * g.max_abs());
    }
}
