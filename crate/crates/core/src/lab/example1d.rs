//! Corrector pairing for `b = 2 cos x` on the `2 pi`-periodic circle with
//! integer wavenumbers, under the weight `Lambda^r e^(tau Lambda)`.
//!
//! For real `f` the sum `I + II` of the corrector pairing and the squared
//! transport norm is the quadratic form
//! `sum_k a(k) |f_k|^2 + b(k) Re(f_(k-2) conj f_k)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CONVENTION: &str = "integer wavenumbers on the 2pi-periodic circle";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Example1DReport {
    pub r: f64,
    pub tau: f64,
    pub k_min: i64,
    pub k_max: i64,
    pub convention: String,
    pub k: Vec<i64>,
    pub a_closed: Vec<f64>,
    pub b_closed: Vec<f64>,
    pub a_direct: Vec<f64>,
    pub b_direct: Vec<f64>,
    /// Largest discrepancy relative to the largest closed-form coefficient.
    pub discrepancy: f64,
    pub abs_discrepancy: f64,
}

impl Example1DReport {
    /// `a(k) / |k|^(2r)` over the reported range.
    pub fn a_scaled(&self) -> Vec<f64> {
        self.k
            .iter()
            .zip(&self.a_closed)
            .map(|(&k, a)| a / (k.abs() as f64).powf(2.0 * self.r))
            .collect()
    }

    pub fn a_scaled_at(&self, k: i64) -> Option<f64> {
        let i = self.k.iter().position(|&j| j == k)?;
        Some(self.a_scaled()[i])
    }
}

fn weight(k: i64, r: f64, tau: f64) -> f64 {
    let ka = k.abs() as f64;
    ka.powf(2.0 * r) * (2.0 * tau * ka).exp()
}

pub fn a_closed(k: i64, r: f64, tau: f64) -> f64 {
    let kf = k as f64;
    (weight(k + 1, r, tau) + weight(k - 1, r, tau) - 2.0 * weight(k, r, tau)) * kf * kf
}

pub fn b_closed(k: i64, r: f64, tau: f64) -> f64 {
    let kf = k as f64;
    2.0 * kf * (kf - 2.0) * weight(k - 1, r, tau)
        - (kf - 1.0) * (kf - 2.0) * weight(k, r, tau)
        - kf * (kf - 1.0) * weight(k - 2, r, tau)
}

/// Coefficients indexed by `k + half` for `|k| <= half`.
struct Line {
    half: i64,
    c: Vec<Complex64>,
}

impl Line {
    fn zeros(half: i64) -> Self {
        Self {
            half,
            c: vec![Complex64::new(0.0, 0.0); (2 * half + 1) as usize],
        }
    }

    fn get(&self, k: i64) -> Complex64 {
        if k.abs() > self.half {
            Complex64::new(0.0, 0.0)
        } else {
            self.c[(k + self.half) as usize]
        }
    }

    fn modes(&self) -> impl Iterator<Item = i64> {
        -self.half..=self.half
    }

    fn map(&self, f: impl Fn(i64, Complex64) -> Complex64) -> Self {
        let mut out = Self::zeros(self.half);
        for k in self.modes() {
            out.c[(k + self.half) as usize] = f(k, self.get(k));
        }
        out
    }

    /// `2 cos(x) d/dx`, exact on the line since `half` leaves room for the shift.
    fn transport(&self) -> Self {
        let d = self.map(|k, v| v * Complex64::new(0.0, k as f64));
        d.map(|k, _| d.get(k - 1) + d.get(k + 1))
    }

    fn weighted(&self, r: f64, tau: f64) -> Self {
        self.map(|k, v| v * weight(k, r, tau).sqrt())
    }

    fn inner(&self, other: &Self) -> f64 {
        self.modes().map(|k| (self.get(k) * other.get(k).conj()).re).sum()
    }
}

/// `I + II` for the real trigonometric polynomial `sum_j amp_j cos(k_j x)`.
fn pairing(terms: &[(i64, f64)], half: i64, r: f64, tau: f64) -> f64 {
    let mut f = Line::zeros(half);
    for &(k, amp) in terms {
        f.c[(k + half) as usize] += 0.5 * amp;
        f.c[(-k + half) as usize] += 0.5 * amp;
    }
    let bf = f.transport();
    let bbf = bf.transport();
    let i = bbf.weighted(r, tau).inner(&f.weighted(r, tau));
    let wb = bf.weighted(r, tau);
    i + wb.inner(&wb)
}

pub fn example_1d(r: f64, tau: f64, kmax: i64) -> Result<Example1DReport> {
    if !(r > 0.0) {
        return Err(Error::invalid(format!("r must be positive, got {r}")));
    }
    if !(tau >= 0.0) {
        return Err(Error::invalid(format!("tau must be nonnegative, got {tau}")));
    }
    if kmax < 5 {
        return Err(Error::invalid(format!("kmax = {kmax} leaves no modes in 3..=kmax-2")));
    }
    let half = kmax + 2;
    let (k_min, k_max) = (3, kmax - 2);
    let k: Vec<i64> = (k_min..=k_max).collect();
    let a_cl: Vec<f64> = k.iter().map(|&k| a_closed(k, r, tau)).collect();
    let b_cl: Vec<f64> = k.iter().map(|&k| b_closed(k, r, tau)).collect();
    // cos(kx) has |f_k|^2 = 1/4 on both k and -k; the cross term of
    // cos(kx) + cos((k-2)x) collects b(k) and b(2-k) = b(k), each with weight 1/4.
    let a_dir: Vec<f64> = k.iter().map(|&k| 2.0 * pairing(&[(k, 1.0)], half, r, tau)).collect();
    let b_dir: Vec<f64> = k
        .iter()
        .map(|&k| {
            let both = pairing(&[(k, 1.0), (k - 2, 1.0)], half, r, tau);
            2.0 * (both - pairing(&[(k, 1.0)], half, r, tau) - pairing(&[(k - 2, 1.0)], half, r, tau))
        })
        .collect();
    let abs_disc = a_cl
        .iter()
        .zip(&a_dir)
        .chain(b_cl.iter().zip(&b_dir))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let scale = a_cl.iter().chain(&b_cl).map(|v| v.abs()).fold(0.0, f64::max);
    Ok(Example1DReport {
        r,
        tau,
        k_min,
        k_max,
        convention: CONVENTION.into(),
        k,
        a_closed: a_cl,
        b_closed: b_cl,
        a_direct: a_dir,
        b_direct: b_dir,
        discrepancy: if scale > 0.0 { abs_disc / scale } else { abs_disc },
        abs_discrepancy: abs_disc,
    })
}
