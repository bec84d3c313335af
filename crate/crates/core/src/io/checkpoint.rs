//! Binary state checkpoints.
//!
//! Layout: magic `HSTV1`, then `n`, `grid`, component count and step as
//! little-endian `u64`, time as little-endian `f64`, then `(re, im)` pairs of
//! little-endian `f64` in `(component, m1, m2, m3)` order over the full box
//! `-n..=n` per axis. Modes outside the ball are stored as zeros.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::noise::NOISE_PARITY;
use crate::operators::{StateV, STATE_PARITY};
use crate::spectral::{Lattice, Parity, SpectralField};

pub const MAGIC: &[u8; 5] = b"HSTV1";

#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub field: SpectralField,
    pub step: u64,
    pub t: f64,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn encode(field: &SpectralField, step: u64, t: f64) -> Vec<u8> {
    let lat = field.lattice();
    let mut out = Vec::with_capacity(37 + 16 * field.data().len());
    out.extend_from_slice(MAGIC);
    for v in [lat.n() as u64, lat.grid() as u64, field.components() as u64, step] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&t.to_le_bytes());
    for c in field.data() {
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
    out
}

fn take<'a>(bytes: &mut &'a [u8], len: usize, what: &str) -> Result<&'a [u8]> {
    if bytes.len() < len {
        return Err(Error::Format(format!("truncated checkpoint while reading {what}")));
    }
    let (head, tail) = bytes.split_at(len);
    *bytes = tail;
    Ok(head)
}

fn u64_le(bytes: &mut &[u8], what: &str) -> Result<u64> {
    Ok(u64::from_le_bytes(take(bytes, 8, what)?.try_into().expect("8 bytes")))
}

fn f64_le(bytes: &mut &[u8], what: &str) -> Result<f64> {
    Ok(f64::from_le_bytes(take(bytes, 8, what)?.try_into().expect("8 bytes")))
}

/// Parity implied by the component count.
fn parity_for(components: usize) -> Result<Vec<Parity>> {
    match components {
        1 => Ok(vec![Parity::NoConstraint]),
        2 => Ok(STATE_PARITY.to_vec()),
        3 => Ok(NOISE_PARITY.to_vec()),
        c => Err(Error::Format(format!("unsupported component count {c}"))),
    }
}

/// Decodes one record from the front of `bytes`, advancing past it.
pub fn decode_one(bytes: &mut &[u8]) -> Result<Checkpoint> {
    let magic = take(bytes, MAGIC.len(), "magic")?;
    if magic != MAGIC {
        if &magic[..4] == b"HSTV" {
            return Err(Error::VersionSkew {
                found: String::from_utf8_lossy(magic).into_owned(),
                expected: String::from_utf8_lossy(MAGIC).into_owned(),
            });
        }
        return Err(Error::Format("magic mismatch".into()));
    }
    let n = u64_le(bytes, "n")? as usize;
    let grid = u64_le(bytes, "grid")? as usize;
    let comps = u64_le(bytes, "component count")? as usize;
    let step = u64_le(bytes, "step")?;
    let t = f64_le(bytes, "time")?;
    let parity = parity_for(comps)?;
    let lat = Lattice::with_grid(n, grid).map_err(|e| Error::Format(format!("bad lattice header: {e}")))?;
    let len = comps * lat.box_len();
    let payload = take(bytes, 16 * len, "coefficients")?;
    let data: Vec<Complex64> = payload
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
            )
        })
        .collect();
    let box_len = lat.box_len();
    if let Some(i) = (0..len).find(|&i| !lat.in_ball(lat.mode(i % box_len)) && data[i] != Complex64::new(0.0, 0.0)) {
        return Err(Error::Format(format!("nonzero coefficient outside the ball at mode {:?}", lat.mode(i % box_len))));
    }
    let field = SpectralField::from_raw(lat, &parity, data).map_err(|e| Error::Format(e.to_string()))?;
    Ok(Checkpoint { field, step, t })
}

pub fn decode(bytes: &[u8]) -> Result<Checkpoint> {
    let mut rest = bytes;
    let cp = decode_one(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::Format(format!("{} trailing bytes after checkpoint", rest.len())));
    }
    Ok(cp)
}

pub fn write_checkpoint(path: &Path, field: &SpectralField, step: u64, t: f64) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(io_err(path))?;
    file.write_all(&encode(field, step, t)).map_err(io_err(path))
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .map_err(io_err(path))?
        .read_to_end(&mut bytes)
        .map_err(io_err(path))?;
    decode(&bytes)
}

/// Reads a two-component checkpoint as an admissible state.
pub fn read_state(path: &Path) -> Result<(StateV, u64, f64)> {
    let cp = read_checkpoint(path)?;
    if cp.field.components() != 2 {
        return Err(Error::Format(format!(
            "state checkpoint has {} components, expected 2",
            cp.field.components()
        )));
    }
    Ok((StateV::new(cp.field)?, cp.step, cp.t))
}

/// Noise fields as consecutive records, record `k` carrying step `k`.
pub fn write_noise(path: &Path, fields: &[SpectralField]) -> Result<()> {
    let mut bytes = Vec::new();
    for (k, f) in fields.iter().enumerate() {
        bytes.extend(encode(f, k as u64, 0.0));
    }
    std::fs::write(path, bytes).map_err(io_err(path))
}

pub fn read_noise(path: &Path) -> Result<Vec<SpectralField>> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    let mut rest = bytes.as_slice();
    let mut out = Vec::new();
    while !rest.is_empty() {
        out.push(decode_one(&mut rest)?.field);
    }
    Ok(out)
}
