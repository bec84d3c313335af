//! Transport-noise fields `b_k`, their admissibility statistics and the
//! Wiener increments that drive them.

mod wiener;

pub use wiener::{derive_seed, standard_normal, WienerPath};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::Advector;
use crate::spectral::lattice::{norm2, wavevector};
use crate::spectral::norms::{derivative, l2_norm, sobolev_norm};
use crate::spectral::{Lattice, Parity, SpectralField};

/// Parities of `(b1, b2, b3)`.
pub const NOISE_PARITY: [Parity; 3] = [Parity::EvenInZ, Parity::EvenInZ, Parity::OddInZ];

/// Shape of the noise fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseFamily {
    /// Random solenoidal fields with a power-law spectrum.
    Random,
    /// Random horizontal flows independent of `z` (`dz b^h = 0`).
    Barotropic,
    /// `b_k = a_k cos(2 pi (k+1) z) e_j`, alternating `j` between 1 and 2.
    Shear,
    /// Spatially constant horizontal vectors, alternating `e1` and `e2`.
    Constant,
}

/// Parameters of a noise model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSpec {
    pub family: NoiseFamily,
    /// Number of modes `K`.
    pub modes: usize,
    /// L2 size of the leading mode; mode `k` has size `amplitude (k+1)^(-decay)`.
    pub amplitude: f64,
    pub decay: f64,
    /// Coefficient envelope `|m|^(-slope)` for the random families.
    pub spectral_slope: f64,
    /// Largest `|m|` carried by a noise field.
    pub max_wavenumber: usize,
    pub seed: u64,
    /// Bound on the smallness statistic required when `s = 1`.
    pub smallness_threshold: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            family: NoiseFamily::Random,
            modes: 2,
            amplitude: 0.05,
            decay: 1.0,
            spectral_slope: 8.0,
            max_wavenumber: 2,
            seed: 1,
            smallness_threshold: 0.2,
        }
    }
}

impl NoiseSpec {
    /// Range checks; errors name the offending key.
    pub fn validate(&self) -> Result<()> {
        let checks: [(&str, bool, &str); 4] = [
            ("amplitude", self.amplitude.is_finite() && self.amplitude >= 0.0, "must be finite and >= 0"),
            ("decay", self.decay.is_finite() && self.decay >= 0.0, "must be finite and >= 0"),
            ("spectral_slope", self.spectral_slope.is_finite(), "must be finite"),
            ("smallness_threshold", self.smallness_threshold > 0.0, "must be > 0"),
        ];
        for (key, ok, msg) in checks {
            if !ok {
                return Err(Error::config(key, msg));
            }
        }
        if self.max_wavenumber == 0 && matches!(self.family, NoiseFamily::Random | NoiseFamily::Barotropic) {
            return Err(Error::config("max_wavenumber", "must be >= 1 for random families"));
        }
        Ok(())
    }

    pub fn mode_amplitude(&self, k: usize) -> f64 {
        self.amplitude * ((k + 1) as f64).powf(-self.decay)
    }
}

/// Noise fields together with their grid samples.
#[derive(Clone, Debug)]
pub struct NoiseModel {
    spec: NoiseSpec,
    fields: Vec<SpectralField>,
    advectors: Vec<Advector>,
}

impl NoiseModel {
    pub fn spec(&self) -> &NoiseSpec {
        &self.spec
    }

    pub fn fields(&self) -> &[SpectralField] {
        &self.fields
    }

    pub fn advectors(&self) -> &[Advector] {
        &self.advectors
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn lattice(&self) -> Option<Lattice> {
        self.fields.first().map(|f| f.lattice())
    }

    /// Model made of explicitly supplied fields.
    pub fn from_fields(spec: NoiseSpec, fields: Vec<SpectralField>) -> Result<Self> {
        let advectors = fields
            .iter()
            .map(Advector::from_transport)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spec,
            fields,
            advectors,
        })
    }

    /// Model without noise.
    pub fn none() -> Self {
        Self {
            spec: NoiseSpec {
                modes: 0,
                ..NoiseSpec::default()
            },
            fields: Vec::new(),
            advectors: Vec::new(),
        }
    }

    /// First `k` modes of this model.
    pub fn truncated(&self, k: usize) -> Self {
        let k = k.min(self.len());
        Self {
            spec: NoiseSpec {
                modes: k,
                ..self.spec.clone()
            },
            fields: self.fields[..k].to_vec(),
            advectors: self.advectors[..k].to_vec(),
        }
    }
}

/// Builds the noise fields on `lattice`.
pub fn build_noise_model(spec: &NoiseSpec, lattice: Lattice) -> Result<NoiseModel> {
    if spec.max_wavenumber > lattice.n() {
        return Err(Error::invalid(format!(
            "noise max_wavenumber {} exceeds the truncation level {}",
            spec.max_wavenumber,
            lattice.n()
        )));
    }
    if !(spec.amplitude.is_finite() && spec.amplitude >= 0.0) {
        return Err(Error::invalid("noise amplitude must be finite and nonnegative"));
    }
    let mut fields = Vec::with_capacity(spec.modes);
    for k in 0..spec.modes {
        let mut b = match spec.family {
            NoiseFamily::Random => random_solenoidal(spec, lattice, k, false),
            NoiseFamily::Barotropic => random_solenoidal(spec, lattice, k, true),
            NoiseFamily::Shear => shear(lattice, k)?,
            NoiseFamily::Constant => constant(lattice, k),
        };
        let size = l2_norm(&b);
        if size > 0.0 {
            b.scale(spec.mode_amplitude(k) / size);
        }
        fields.push(b);
    }
    NoiseModel::from_fields(spec.clone(), fields)
}

fn random_solenoidal(spec: &NoiseSpec, lattice: Lattice, k: usize, barotropic: bool) -> SpectralField {
    let cap = (spec.max_wavenumber * spec.max_wavenumber) as i64;
    let stream = derive_seed(spec.seed, k as u64);
    let mut b = SpectralField::from_fn(lattice, &NOISE_PARITY, |c, m| {
        let r2 = norm2(m);
        if r2 == 0 || r2 > cap || (barotropic && (m[2] != 0 || c == 2)) {
            return Complex64::new(0.0, 0.0);
        }
        let key = (lattice.index(m) as u64) * 3 + c as u64;
        let env = (r2 as f64).powf(-0.5 * spec.spectral_slope);
        Complex64::new(
            standard_normal(stream, 0, key),
            standard_normal(stream, 1, key),
        ) * env
    });
    solenoidal_projection(&mut b);
    b.symmetrize();
    b
}

/// Removes the longitudinal part `k (k . b) / |k|^2` mode by mode.
pub fn solenoidal_projection(b: &mut SpectralField) {
    let lat = b.lattice();
    let len = lat.box_len();
    for (i, m) in lat.ball() {
        if norm2(m) == 0 {
            continue;
        }
        let k = wavevector(m);
        let kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        let data = b.data_mut();
        let d = (0..3).map(|j| k[j] * data[j * len + i]).sum::<Complex64>() / kk;
        for j in 0..3 {
            data[j * len + i] -= k[j] * d;
        }
    }
}

fn shear(lattice: Lattice, k: usize) -> Result<SpectralField> {
    let m3 = (k + 1) as i64;
    if m3 > lattice.n() as i64 {
        return Err(Error::invalid("shear noise mode exceeds the truncation level"));
    }
    let mut b = SpectralField::zeros(lattice, &NOISE_PARITY);
    let c = k % 2;
    b.set(c, [0, 0, m3], Complex64::new(0.5, 0.0));
    b.set(c, [0, 0, -m3], Complex64::new(0.5, 0.0));
    Ok(b)
}

fn constant(lattice: Lattice, k: usize) -> SpectralField {
    let mut b = SpectralField::zeros(lattice, &NOISE_PARITY);
    b.set(k % 2, [0, 0, 0], Complex64::new(1.0, 0.0));
    b
}

/// Admissibility statistics of a noise model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseReport {
    /// `sum_k |b_k|^2_{sigma+3}`.
    pub regularity: f64,
    /// `sum_k |b_k|_{sigma+3} |dz b_k^h|_{sigma-3/2}`.
    pub smallness: f64,
    pub smallness_threshold: f64,
    pub regularity_ok: bool,
    pub smallness_required: bool,
    pub smallness_ok: bool,
    pub passes: bool,
}

/// Evaluates the regularity and smallness conditions on the noise fields.
///
/// `regularity_ok` also asks that the spectral envelope of the random families
/// keep `sum_k |b_k|^2_{sigma+3}` bounded as the truncation grows.
pub fn check_noise_conditions(model: &NoiseModel, sigma: f64, s: f64) -> NoiseReport {
    let mut regularity = 0.0;
    let mut smallness = 0.0;
    for b in model.fields() {
        let hi = sobolev_norm(b, sigma + 3.0);
        regularity += hi * hi;
        let dz = derivative(&SpectralField::stack(&[&b.extract(0), &b.extract(1)]).expect("same lattice"), 2);
        smallness += hi * sobolev_norm(&dz, sigma - 1.5);
    }
    let spec = model.spec();
    let envelope_ok = match spec.family {
        NoiseFamily::Random | NoiseFamily::Barotropic => spec.spectral_slope > sigma + 4.5,
        NoiseFamily::Shear | NoiseFamily::Constant => true,
    };
    let regularity_ok = regularity.is_finite() && envelope_ok;
    let smallness_required = s <= 1.0;
    let smallness_ok = smallness <= spec.smallness_threshold;
    NoiseReport {
        regularity,
        smallness,
        smallness_threshold: spec.smallness_threshold,
        regularity_ok,
        smallness_required,
        smallness_ok,
        passes: regularity_ok && (!smallness_required || smallness_ok),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::divergence_defect;

    #[test]
    fn random_fields_are_admissible() {
        let lat = Lattice::new(4).unwrap();
        for family in [NoiseFamily::Random, NoiseFamily::Barotropic, NoiseFamily::Shear] {
            let spec = NoiseSpec {
                family,
                modes: 3,
                max_wavenumber: 3,
                ..NoiseSpec::default()
            };
            let model = build_noise_model(&spec, lat).unwrap();
            for (k, b) in model.fields().iter().enumerate() {
                assert!(divergence_defect(b) < 1e-13);
                assert!(b.symmetry_defect() < 1e-15);
                assert!(b.mean(0).abs() < 1e-15);
                assert!((l2_norm(b) - spec.mode_amplitude(k)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn barotropic_has_no_vertical_shear() {
        let lat = Lattice::new(4).unwrap();
        let spec = NoiseSpec {
            family: NoiseFamily::Barotropic,
            max_wavenumber: 3,
            ..NoiseSpec::default()
        };
        let report = check_noise_conditions(&build_noise_model(&spec, lat).unwrap(), 1.0, 1.0);
        assert_eq!(report.smallness, 0.0);
        assert!(report.passes);
    }

    #[test]
    fn statistics_grow_with_mode_count() {
        let lat = Lattice::new(4).unwrap();
        let spec = NoiseSpec {
            modes: 4,
            max_wavenumber: 3,
            ..NoiseSpec::default()
        };
        let model = build_noise_model(&spec, lat).unwrap();
        let mut last = (0.0, 0.0);
        for k in 1..=4 {
            let r = check_noise_conditions(&model.truncated(k), 0.5, 1.0);
            assert!(r.regularity >= last.0 && r.smallness >= last.1);
            last = (r.regularity, r.smallness);
        }
    }

    #[test]
    fn slow_decay_fails_regularity() {
        let lat = Lattice::new(4).unwrap();
        let spec = NoiseSpec {
            spectral_slope: 2.0,
            max_wavenumber: 3,
            ..NoiseSpec::default()
        };
        let r = check_noise_conditions(&build_noise_model(&spec, lat).unwrap(), 1.0, 1.5);
        assert!(!r.regularity_ok && !r.passes);
    }

    #[test]
    fn oversized_noise_fails_smallness_only_at_s_one() {
        let lat = Lattice::new(4).unwrap();
        let spec = NoiseSpec {
            amplitude: 50.0,
            max_wavenumber: 3,
            ..NoiseSpec::default()
        };
        let model = build_noise_model(&spec, lat).unwrap();
        assert!(!check_noise_conditions(&model, 1.0, 1.0).passes);
        assert!(check_noise_conditions(&model, 1.0, 1.5).passes);
    }
}
