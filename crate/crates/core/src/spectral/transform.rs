//! Pruned 3D transforms between coefficient boxes and collocation grids.
//!
//! Physical samples are stored at `x_j = j / N` in the layout
//! `(j2, j3, j1)` with `j1` fastest; see [`grid_index`]. Two real fields are
//! packed into one complex transform.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use std::sync::LazyLock;
use rustfft::{Fft, FftPlanner};

use super::field::SpectralField;
use super::lattice::Lattice;

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

static PLANS: LazyLock<Mutex<HashMap<usize, Arc<Plans>>>> = LazyLock::new(|| Mutex::new(HashMap::new()));

fn plans(grid: usize) -> Arc<Plans> {
    let mut cache = PLANS.lock().expect("fft plan cache poisoned");
    cache
        .entry(grid)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plans {
                forward: planner.plan_fft_forward(grid),
                inverse: planner.plan_fft_inverse(grid),
            })
        })
        .clone()
}

/// Flat offset of grid point `(j1, j2, j3)`.
pub fn grid_index(grid: usize, j: [usize; 3]) -> usize {
    (j[1] * grid + j[2]) * grid + j[0]
}

/// Grid point of a flat offset.
pub fn grid_point(grid: usize, idx: usize) -> [usize; 3] {
    let j1 = idx % grid;
    let j3 = (idx / grid) % grid;
    let j2 = idx / (grid * grid);
    [j1, j2, j3]
}

fn wrap(m: i64, grid: usize) -> usize {
    m.rem_euclid(grid as i64) as usize
}

fn run(fft: &Arc<dyn Fft<f64>>, buf: &mut [Complex64]) {
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(buf, &mut scratch);
}

/// Unnormalized synthesis `sum_m c_m exp(2 pi i m.x)` on the grid.
pub fn synthesize(lat: Lattice, coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = lat.n() as i64;
    let s = lat.side();
    let g = lat.grid();
    let p = plans(g);
    let zero = Complex64::new(0.0, 0.0);

    let mut a2 = vec![zero; s * s * g];
    for l in 0..s * s {
        for i3 in 0..s {
            a2[l * g + wrap(i3 as i64 - n, g)] = coeffs[l * s + i3];
        }
    }
    run(&p.inverse, &mut a2);

    let mut a1 = vec![zero; s * g * g];
    for i1 in 0..s {
        for i2 in 0..s {
            let dst = wrap(i2 as i64 - n, g);
            let src = &a2[(i1 * s + i2) * g..(i1 * s + i2 + 1) * g];
            for (j3, v) in src.iter().enumerate() {
                a1[(i1 * g + j3) * g + dst] = *v;
            }
        }
    }
    run(&p.inverse, &mut a1);

    let mut x = vec![zero; g * g * g];
    for i1 in 0..s {
        let dst = wrap(i1 as i64 - n, g);
        for j3 in 0..g {
            let src = &a1[(i1 * g + j3) * g..(i1 * g + j3 + 1) * g];
            for (j2, v) in src.iter().enumerate() {
                x[(j2 * g + j3) * g + dst] = *v;
            }
        }
    }
    run(&p.inverse, &mut x);
    x
}

/// Normalized analysis onto the coefficient box.
pub fn analyze(lat: Lattice, values: &[Complex64]) -> Vec<Complex64> {
    let n = lat.n() as i64;
    let s = lat.side();
    let g = lat.grid();
    let p = plans(g);
    let zero = Complex64::new(0.0, 0.0);

    let mut x = values.to_vec();
    run(&p.forward, &mut x);

    let mut a1 = vec![zero; s * g * g];
    for i1 in 0..s {
        let src = wrap(i1 as i64 - n, g);
        for j3 in 0..g {
            let dst = &mut a1[(i1 * g + j3) * g..(i1 * g + j3 + 1) * g];
            for (j2, v) in dst.iter_mut().enumerate() {
                *v = x[(j2 * g + j3) * g + src];
            }
        }
    }
    drop(x);
    run(&p.forward, &mut a1);

    let mut a2 = vec![zero; s * s * g];
    for i1 in 0..s {
        for i2 in 0..s {
            let src = wrap(i2 as i64 - n, g);
            let dst = &mut a2[(i1 * s + i2) * g..(i1 * s + i2 + 1) * g];
            for (j3, v) in dst.iter_mut().enumerate() {
                *v = a1[(i1 * g + j3) * g + src];
            }
        }
    }
    run(&p.forward, &mut a2);

    let scale = 1.0 / (g * g * g) as f64;
    let mut out = vec![zero; s * s * s];
    for l in 0..s * s {
        for i3 in 0..s {
            out[l * s + i3] = a2[l * g + wrap(i3 as i64 - n, g)] * scale;
        }
    }
    out
}

/// Real grid values of each coefficient array (each must describe a real field).
pub fn to_grid(lat: Lattice, comps: &[&[Complex64]]) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(comps.len());
    for pair in comps.chunks(2) {
        if pair.len() == 2 {
            let i = Complex64::new(0.0, 1.0);
            let packed: Vec<Complex64> = pair[0].iter().zip(pair[1]).map(|(a, b)| a + i * b).collect();
            let x = synthesize(lat, &packed);
            out.push(x.iter().map(|z| z.re).collect());
            out.push(x.iter().map(|z| z.im).collect());
        } else {
            let x = synthesize(lat, pair[0]);
            out.push(x.iter().map(|z| z.re).collect());
        }
    }
    out
}

/// Coefficient boxes of real grid fields (not yet truncated to the ball).
pub fn from_grid(lat: Lattice, grids: &[&[f64]]) -> Vec<Vec<Complex64>> {
    let mut out = Vec::with_capacity(grids.len());
    for pair in grids.chunks(2) {
        if pair.len() == 2 {
            let packed: Vec<Complex64> = pair[0]
                .iter()
                .zip(pair[1])
                .map(|(a, b)| Complex64::new(*a, *b))
                .collect();
            let h = analyze(lat, &packed);
            let len = h.len();
            let mut u = vec![Complex64::new(0.0, 0.0); len];
            let mut v = vec![Complex64::new(0.0, 0.0); len];
            for i in 0..len {
                let a = h[i];
                let b = h[len - 1 - i].conj();
                u[i] = 0.5 * (a + b);
                v[i] = Complex64::new(0.0, -0.5) * (a - b);
            }
            out.push(u);
            out.push(v);
        } else {
            let packed: Vec<Complex64> = pair[0].iter().map(|a| Complex64::new(*a, 0.0)).collect();
            out.push(analyze(lat, &packed));
        }
    }
    out
}

/// Physical samples of every component of a field.
pub fn field_to_grid(f: &SpectralField) -> Vec<Vec<f64>> {
    let comps: Vec<&[Complex64]> = (0..f.components()).map(|c| f.component(c)).collect();
    to_grid(f.lattice(), &comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::field::Parity;

    #[test]
    fn synthesis_matches_direct_sum() {
        let lat = Lattice::with_grid(2, 7).unwrap();
        let f = SpectralField::from_fn(lat, &[Parity::NoConstraint], |_, m| {
            Complex64::new(0.3 * m[0] as f64 + 0.1, 0.2 * m[1] as f64 - 0.05 * m[2] as f64)
        });
        let x = synthesize(lat, f.component(0));
        let g = lat.grid();
        for idx in [0usize, 5, 17, 100, 342] {
            let j = grid_point(g, idx);
            let mut direct = Complex64::new(0.0, 0.0);
            for (i, m) in lat.ball() {
                let phase: f64 = (0..3).map(|a| m[a] as f64 * j[a] as f64 / g as f64).sum::<f64>()
                    * std::f64::consts::TAU;
                direct += f.component(0)[i] * Complex64::from_polar(1.0, phase);
            }
            assert!((direct - x[idx]).norm() < 1e-12);
            assert!(x[idx].im.abs() < 1e-12);
        }
    }

    #[test]
    fn pair_roundtrip() {
        let lat = Lattice::new(3).unwrap();
        let p = [Parity::EvenInZ, Parity::OddInZ, Parity::NoConstraint];
        let f = SpectralField::from_fn(lat, &p, |c, m| {
            Complex64::new((c as f64 + 1.0) / (1.0 + m[0].abs() as f64), m[2] as f64 * 0.1)
        });
        let grids = field_to_grid(&f);
        let refs: Vec<&[f64]> = grids.iter().map(|v| v.as_slice()).collect();
        let back = from_grid(lat, &refs);
        for c in 0..3 {
            for (a, b) in back[c].iter().zip(f.component(c)) {
                assert!((a - b).norm() < 1e-13);
            }
        }
    }
}
