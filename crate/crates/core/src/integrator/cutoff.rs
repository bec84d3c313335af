//! Smooth cutoff `theta_rho`: equal to 1 on `[0, rho/2]`, 0 on `[rho, inf)`,
//! non-increasing and smooth in between.

fn bump(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// `theta_rho(x)`.
pub fn cutoff(x: f64, rho: f64) -> f64 {
    let half = 0.5 * rho;
    if x <= half {
        return 1.0;
    }
    if x >= rho {
        return 0.0;
    }
    let u = (x - half) / half;
    let a = bump(1.0 - u);
    let b = bump(u);
    a / (a + b)
}

/// Lipschitz constant of `theta_rho`, from a fine sampling of the transition.
pub fn lipschitz_constant(rho: f64) -> f64 {
    let samples = 20_000;
    let mut best: f64 = 0.0;
    let mut prev = 1.0;
    for i in 1..=samples {
        let u = i as f64 / samples as f64;
        let a = bump(1.0 - u);
        let b = bump(u);
        let v = if a + b > 0.0 { a / (a + b) } else { 0.0 };
        best = best.max((prev - v).abs() * samples as f64);
        prev = v;
    }
    best * 2.0 / rho
}
