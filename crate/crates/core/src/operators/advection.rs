//! Dealiased advection `u . grad f` with a velocity sampled once on the grid.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::lattice::wavevector;
use crate::spectral::norms::physical_gradients;
use crate::spectral::{transform, Lattice, Parity, SpectralField};

/// A velocity field `u = (u1, u2, u3)` pinned to collocation points.
#[derive(Clone, Debug)]
pub struct Advector {
    lattice: Lattice,
    parity: [Parity; 3],
    grid: Vec<Vec<f64>>,
}

impl Advector {
    /// Samples a three-component velocity; no structural checks.
    pub fn from_velocity(u: &SpectralField) -> Result<Self> {
        if u.components() != 3 {
            return Err(Error::invalid("advecting velocity needs three components"));
        }
        Ok(Self {
            lattice: u.lattice(),
            parity: [u.parity()[0], u.parity()[1], u.parity()[2]],
            grid: transform::field_to_grid(u),
        })
    }

    pub(crate) fn from_grids(lattice: Lattice, parity: [Parity; 3], grid: Vec<Vec<f64>>) -> Self {
        Self {
            lattice,
            parity,
            grid,
        }
    }

    /// Samples a transport field after checking `div b = 0`.
    pub fn from_transport(b: &SpectralField) -> Result<Self> {
        check_divergence_free(b)?;
        Self::from_velocity(b)
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn grid(&self) -> &[Vec<f64>] {
        &self.grid
    }

    /// `P_n (u . grad f)`.
    pub fn apply(&self, f: &SpectralField) -> Result<SpectralField> {
        if f.lattice() != self.lattice {
            return Err(Error::invalid("advected field lives on another lattice"));
        }
        let grads = physical_gradients(f);
        Ok(self.apply_gradients(&grads, f.parity()))
    }

    /// Same as [`Advector::apply`] given grid gradients ordered `(c, j)`.
    pub fn apply_gradients(&self, grads: &[Vec<f64>], parity: &[Parity]) -> SpectralField {
        let comps = parity.len();
        let len = self.lattice.grid_len();
        let mut products: Vec<Vec<f64>> = Vec::with_capacity(comps);
        let mut out_parity = Vec::with_capacity(comps);
        for c in 0..comps {
            let mut acc = vec![0.0; len];
            for j in 0..3 {
                let u = &self.grid[j];
                let d = &grads[3 * c + j];
                for p in 0..len {
                    acc[p] += u[p] * d[p];
                }
            }
            products.push(acc);
            let dpar = |j: usize| if j == 2 { parity[c].dz() } else { parity[c] };
            let pc = (0..3)
                .map(|j| self.parity[j].times(dpar(j)))
                .reduce(Parity::join)
                .expect("three terms");
            out_parity.push(pc);
        }
        let refs: Vec<&[f64]> = products.iter().map(|v| v.as_slice()).collect();
        let boxes = transform::from_grid(self.lattice, &refs);
        let data: Vec<Complex64> = boxes.into_iter().flatten().collect();
        let mut out = SpectralField::from_raw(self.lattice, &out_parity, data)
            .expect("component count matches");
        out.symmetrize();
        out
    }
}

/// Largest `|k . b(k)|` relative to `max |k| |b(k)|`.
pub fn divergence_defect(b: &SpectralField) -> f64 {
    let lat = b.lattice();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (i, m) in lat.ball() {
        let k = wavevector(m);
        let kn = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
        let mut d = Complex64::new(0.0, 0.0);
        for j in 0..3 {
            let v = b.component(j)[i];
            d += k[j] * v;
            scale = scale.max(kn * v.norm());
        }
        worst = worst.max(d.norm());
    }
    if scale == 0.0 {
        0.0
    } else {
        worst / scale
    }
}

fn check_divergence_free(b: &SpectralField) -> Result<()> {
    if b.components() != 3 {
        return Err(Error::invalid("transport field needs three components"));
    }
    let d = divergence_defect(b);
    if d > 1e-10 {
        return Err(Error::precondition(format!(
            "transport field is not divergence-free (relative defect {d:.3e})"
        )));
    }
    Ok(())
}
