//! Independent oracles: mode-by-mode convolutions and direct Fourier sums.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;

use fracpe::spectral::{Lattice, Parity, SpectralField};
use num_complex::Complex64;

pub type Modes = BTreeMap<[i64; 3], Complex64>;

pub fn modes_of(f: &SpectralField, c: usize) -> Modes {
    let lat = f.lattice();
    lat.ball().map(|(_, m)| (m, f.get(c, m))).filter(|(_, v)| *v != Complex64::new(0.0, 0.0)).collect()
}

pub fn field_of(lat: Lattice, parity: &[Parity], comps: &[Modes]) -> SpectralField {
    let mut f = SpectralField::zeros(lat, parity);
    for (c, modes) in comps.iter().enumerate() {
        for (m, v) in modes {
            if lat.in_ball(*m) {
                f.set(c, *m, *v);
            }
        }
    }
    f
}

pub fn k(m: [i64; 3]) -> [f64; 3] {
    [2.0 * PI * m[0] as f64, 2.0 * PI * m[1] as f64, 2.0 * PI * m[2] as f64]
}

pub fn deriv(f: &Modes, axis: usize) -> Modes {
    f.iter().map(|(m, v)| (*m, v * Complex64::new(0.0, k(*m)[axis]))).collect()
}

/// Full (untruncated) product by double loop over modes.
pub fn convolve(f: &Modes, g: &Modes) -> Modes {
    let mut out = Modes::new();
    for (p, a) in f {
        for (q, b) in g {
            let m = [p[0] + q[0], p[1] + q[1], p[2] + q[2]];
            *out.entry(m).or_insert(Complex64::new(0.0, 0.0)) += a * b;
        }
    }
    out
}

pub fn add(f: &Modes, g: &Modes, a: f64) -> Modes {
    let mut out = f.clone();
    for (m, v) in g {
        *out.entry(*m).or_insert(Complex64::new(0.0, 0.0)) += a * v;
    }
    out
}

pub fn truncate(f: &Modes, n: usize) -> Modes {
    f.iter().filter(|(m, _)| (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as usize <= n * n).map(|(m, v)| (*m, *v)).collect()
}

/// `P_n (u . grad) f` per component of `f`.
pub fn transport(u: &[Modes], f: &[Modes], n: usize) -> Vec<Modes> {
    f.iter()
        .map(|fc| {
            let mut acc = Modes::new();
            for (j, uj) in u.iter().enumerate() {
                acc = add(&acc, &convolve(uj, &deriv(fc, j)), 1.0);
            }
            truncate(&acc, n)
        })
        .collect()
}

/// `w = -(k1 V1 + k2 V2) / k3` away from `m3 = 0`.
pub fn vertical(v: &[Modes]) -> Modes {
    let mut out = Modes::new();
    for (m, a) in &v[0] {
        if m[2] != 0 {
            *out.entry(*m).or_insert(Complex64::new(0.0, 0.0)) -= a * k(*m)[0] / k(*m)[2];
        }
    }
    for (m, b) in &v[1] {
        if m[2] != 0 {
            *out.entry(*m).or_insert(Complex64::new(0.0, 0.0)) -= b * k(*m)[1] / k(*m)[2];
        }
    }
    out
}

/// Hydrostatic projector: horizontal Leray on the `m3 = 0` slice.
pub fn leray(v: &[Modes]) -> Vec<Modes> {
    let mut keys: Vec<[i64; 3]> = v[0].keys().chain(v[1].keys()).cloned().collect();
    keys.sort();
    keys.dedup();
    let mut out = vec![Modes::new(), Modes::new()];
    let zero = Complex64::new(0.0, 0.0);
    for m in keys {
        let a = *v[0].get(&m).unwrap_or(&zero);
        let b = *v[1].get(&m).unwrap_or(&zero);
        let kk = k(m);
        let kh2 = kk[0] * kk[0] + kk[1] * kk[1];
        if m[2] == 0 && kh2 > 0.0 {
            let d = (a * kk[0] + b * kk[1]) / kh2;
            out[0].insert(m, a - d * kk[0]);
            out[1].insert(m, b - d * kk[1]);
        } else {
            out[0].insert(m, a);
            out[1].insert(m, b);
        }
    }
    out
}

/// Homogeneous `|k|^s` multiplier (zero at `k = 0`).
pub fn lambda(f: &Modes, s: f64) -> Modes {
    f.iter()
        .map(|(m, v)| {
            let kk = k(*m);
            let r = (kk[0] * kk[0] + kk[1] * kk[1] + kk[2] * kk[2]).sqrt();
            (*m, if r == 0.0 { Complex64::new(0.0, 0.0) } else { v * r.powf(s) })
        })
        .collect()
}

pub fn max_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs(a: &SpectralField) -> f64 {
    a.data().iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Direct sum `sum_m c_m e^(2 pi i m.x)` at a point.
pub fn evaluate(f: &SpectralField, c: usize, x: [f64; 3]) -> f64 {
    f.lattice()
        .ball()
        .map(|(_, m)| {
            let ph = 2.0 * PI * (m[0] as f64 * x[0] + m[1] as f64 * x[1] + m[2] as f64 * x[2]);
            (f.get(c, m) * Complex64::new(ph.cos(), ph.sin())).re
        })
        .sum()
}
