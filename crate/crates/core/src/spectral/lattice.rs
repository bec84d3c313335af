//! Truncation lattice: integer modes `m` with `|m| <= n` on the unit torus.
//!
//! Coefficients live in a dense box `[-n, n]^3` indexed lexicographically
//! with `m3` fastest; entries outside the Euclidean ball are kept at zero.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Galerkin truncation level together with the collocation grid size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Lattice {
    n: usize,
    grid: usize,
}

impl Lattice {
    /// Lattice with the smallest 7-smooth grid satisfying `grid >= 3n + 1`.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("truncation level n must be >= 1"));
        }
        Self::with_grid(n, smooth_at_least(3 * n + 1))
    }

    /// Lattice with an explicit grid; the grid must dealias quadratic products.
    pub fn with_grid(n: usize, grid: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("truncation level n must be >= 1"));
        }
        if grid < 3 * n + 1 {
            return Err(Error::invalid(format!(
                "grid {grid} cannot dealias products at n = {n} (need >= {})",
                3 * n + 1
            )));
        }
        Ok(Self { n, grid })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    /// Points per axis of the coefficient box.
    pub fn side(&self) -> usize {
        2 * self.n + 1
    }

    /// Number of coefficient slots per component.
    pub fn box_len(&self) -> usize {
        self.side().pow(3)
    }

    /// Number of collocation points per component.
    pub fn grid_len(&self) -> usize {
        self.grid.pow(3)
    }

    pub fn index(&self, m: [i64; 3]) -> usize {
        let n = self.n as i64;
        let s = self.side();
        debug_assert!(m.iter().all(|&c| c.abs() <= n));
        (((m[0] + n) as usize) * s + (m[1] + n) as usize) * s + (m[2] + n) as usize
    }

    /// Box index of `m`, or `None` when `m` lies outside the box.
    pub fn try_index(&self, m: [i64; 3]) -> Option<usize> {
        let n = self.n as i64;
        if m.iter().all(|&c| c.abs() <= n) {
            Some(self.index(m))
        } else {
            None
        }
    }

    pub fn mode(&self, idx: usize) -> [i64; 3] {
        let s = self.side();
        let n = self.n as i64;
        let i3 = idx % s;
        let i2 = (idx / s) % s;
        let i1 = idx / (s * s);
        [i1 as i64 - n, i2 as i64 - n, i3 as i64 - n]
    }

    pub fn in_ball(&self, m: [i64; 3]) -> bool {
        norm2(m) <= (self.n * self.n) as i64
    }

    /// Box indices of all modes in the truncation ball, in box order.
    pub fn ball(&self) -> impl Iterator<Item = (usize, [i64; 3])> + '_ {
        (0..self.box_len())
            .map(|i| (i, self.mode(i)))
            .filter(|(_, m)| self.in_ball(*m))
    }

    /// Index of `(m1, m2, -m3)`.
    pub fn reflect_z(&self, idx: usize) -> usize {
        let s = self.side();
        let i3 = idx % s;
        idx - i3 + (s - 1 - i3)
    }

    /// Index of `-m`.
    pub fn negate(&self, idx: usize) -> usize {
        self.box_len() - 1 - idx
    }
}

/// Wavevector `k = 2 pi m`.
pub fn wavevector(m: [i64; 3]) -> [f64; 3] {
    [TAU * m[0] as f64, TAU * m[1] as f64, TAU * m[2] as f64]
}

/// `|k|` for `k = 2 pi m`.
pub fn wavenumber(m: [i64; 3]) -> f64 {
    TAU * (norm2(m) as f64).sqrt()
}

pub fn norm2(m: [i64; 3]) -> i64 {
    m[0] * m[0] + m[1] * m[1] + m[2] * m[2]
}

fn smooth_at_least(min: usize) -> usize {
    (min..)
        .find(|&g| {
            let mut r = g;
            for p in [2, 3, 5, 7] {
                while r % p == 0 {
                    r /= p;
                }
            }
            r == 1
        })
        .expect("7-smooth numbers are unbounded")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip() {
        let lat = Lattice::new(3).unwrap();
        for i in 0..lat.box_len() {
            assert_eq!(lat.index(lat.mode(i)), i);
        }
    }

    #[test]
    fn reflections_match_modes() {
        let lat = Lattice::new(2).unwrap();
        for i in 0..lat.box_len() {
            let [a, b, c] = lat.mode(i);
            assert_eq!(lat.mode(lat.reflect_z(i)), [a, b, -c]);
            assert_eq!(lat.mode(lat.negate(i)), [-a, -b, -c]);
        }
    }

    #[test]
    fn default_grid_dealiases() {
        for n in 1..20 {
            let lat = Lattice::new(n).unwrap();
            assert!(lat.grid() >= 3 * n + 1);
        }
        assert_eq!(Lattice::new(8).unwrap().grid(), 25);
        assert_eq!(Lattice::new(16).unwrap().grid(), 49);
        assert!(Lattice::with_grid(4, 12).is_err());
    }

    #[test]
    fn ball_is_euclidean() {
        let lat = Lattice::new(2).unwrap();
        let count = lat.ball().count();
        // |m|^2 <= 4 on Z^3: 1 + 6 + 12 + 8 + 6
        assert_eq!(count, 33);
    }
}
