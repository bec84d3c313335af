//! Random test fields with power-law spectra.
//!
//! The coefficient at mode `m` depends only on `(seed, component, m)`, so a
//! sample at level `n` is the truncation of the same sample at any finer level.

use num_complex::Complex64;

use crate::error::Result;
use crate::noise::{build_noise_model, derive_seed, standard_normal, NoiseFamily, NoiseModel, NoiseSpec};
use crate::operators::{StateV, STATE_PARITY};
use crate::spectral::lattice::norm2;
use crate::spectral::norms::sobolev_norm;
use crate::spectral::{Lattice, Parity, SpectralField};

/// Key of mode `m` independent of the lattice.
fn mode_key(m: [i64; 3], c: usize) -> u64 {
    let enc = |x: i64| (x + 512) as u64;
    ((enc(m[0]) * 1024 + enc(m[1])) * 1024 + enc(m[2])) * 8 + c as u64
}

/// Zero-mean field with Gaussian coefficients of size `|m|^(-slope)`.
pub fn sample_field(lattice: Lattice, parity: &[Parity], slope: f64, seed: u64) -> SpectralField {
    SpectralField::from_fn(lattice, parity, |c, m| {
        let r2 = norm2(m);
        if r2 == 0 {
            return Complex64::new(0.0, 0.0);
        }
        let key = mode_key(m, c);
        Complex64::new(standard_normal(seed, 0, key), standard_normal(seed, 1, key)) * (r2 as f64).powf(-0.5 * slope)
    })
}

/// Admissible state with spectral slope `slope`, scaled to `|V|_sigma = size`.
pub fn sample_state(lattice: Lattice, slope: f64, sigma: f64, size: f64, seed: u64) -> Result<StateV> {
    let f = sample_field(lattice, &STATE_PARITY, slope, seed);
    let v = StateV::project(&f)?;
    let norm = sobolev_norm(v.field(), sigma);
    if norm == 0.0 {
        return Ok(v);
    }
    StateV::project(&v.field().scaled(size / norm))
}

/// Random divergence-free noise on `lattice` with `modes` fields.
pub fn sample_noise(lattice: Lattice, family: NoiseFamily, modes: usize, max_wavenumber: usize, seed: u64) -> Result<NoiseModel> {
    let spec = NoiseSpec {
        family,
        modes,
        amplitude: 1.0,
        decay: 0.0,
        spectral_slope: 2.0,
        max_wavenumber,
        seed: derive_seed(seed, 77),
        ..NoiseSpec::default()
    };
    build_noise_model(&spec, lattice)
}
