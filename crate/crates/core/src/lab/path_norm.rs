//! Fractional-in-time Sobolev norm `W^(alpha,p)(0,T)` of a sampled path.

use crate::error::{Error, Result};

/// `series[i]` samples the path at the midpoint of the `i`-th of
/// `series.len()` equal cells of `[0, T]`. Cells on the diagonal of the
/// double integral are dropped.
///
/// Monotone in `alpha` whenever `T <= 1`, since then every time separation
/// is at most one.
pub fn wap_path_norm(series: &[f64], alpha: f64, p: f64, t_total: f64) -> Result<f64> {
    if series.len() < 2 {
        return Err(Error::invalid(format!("path norm needs at least 2 samples, got {}", series.len())));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(p > 1.0) {
        return Err(Error::invalid(format!("p must exceed 1, got {p}")));
    }
    if !(t_total > 0.0) {
        return Err(Error::invalid(format!("T must be positive, got {t_total}")));
    }
    let h = t_total / series.len() as f64;
    let expo = 1.0 + alpha * p;
    let mut single = 0.0;
    let mut double = 0.0;
    for (i, ui) in series.iter().enumerate() {
        single += ui.abs().powf(p);
        for (j, uj) in series.iter().enumerate().skip(i + 1) {
            let gap = (j - i) as f64 * h;
            double += (ui - uj).abs().powf(p) / gap.powf(expo);
        }
    }
    Ok((h * single + 2.0 * h * h * double).powf(1.0 / p))
}
