//! Dispatch of a validated configuration to the simulator and the lab.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::json;

use super::checkpoint;
use super::config::{InitialKind, Mode, OutputSpec, RunConfig};
use super::records::{digest, Emitter, KIND_HEADER, KIND_SUMMARY};
use crate::error::{Error, Result};
use crate::integrator::{energy_bound_constant, integrate, path_seed, run_ensemble, twin_run, PathDiagnostics};
use crate::lab::{cancellation, convergence, example1d, lemmas, sampling};
use crate::noise::{build_noise_model, check_noise_conditions, derive_seed, NoiseModel, WienerPath};
use crate::operators::StateV;
use crate::spectral::norms::sobolev_norm;
use crate::spectral::Lattice;

/// Largest admissible relative discrepancy of the 1D example.
pub const EXAMPLE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub output: PathBuf,
    pub records: u64,
    /// Named failed checks; empty on success.
    pub failures: Vec<String>,
}

impl RunOutcome {
    pub fn success(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Identifier of a configuration, independent of where output goes.
pub fn run_id(cfg: &RunConfig) -> Result<String> {
    let canonical = RunConfig {
        output: OutputSpec::default(),
        ..cfg.clone()
    };
    Ok(digest(canonical.to_toml()?.as_bytes()))
}

fn unix_time() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Runs `cfg`, writing NDJSON into its output directory (or `default_dir`).
pub fn run(cfg: &RunConfig, default_dir: &Path) -> Result<RunOutcome> {
    let dir = cfg.output_dir(default_dir);
    std::fs::create_dir_all(&dir).map_err(|source| Error::Io {
        path: dir.clone(),
        source,
    })?;
    let path = cfg.output_path(default_dir);
    let file = File::create(&path).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    let (records, failures) = run_to_writer(cfg, &dir, BufWriter::new(file), unix_time())?;
    Ok(RunOutcome {
        output: path,
        records,
        failures,
    })
}

/// Runs `cfg` into `out`; auxiliary files go to `dir`. Returns the record
/// count and the failed checks.
pub fn run_to_writer<W: Write>(cfg: &RunConfig, dir: &Path, out: W, timestamp: u64) -> Result<(u64, Vec<String>)> {
    cfg.validate()?;
    let mut em = Emitter::new(out, run_id(cfg)?);
    em.emit(
        KIND_HEADER,
        &json!({ "mode": cfg.mode.name(), "timestamp": timestamp, "config": cfg.to_toml()? }),
    )?;
    let mut failures = Vec::new();
    let mut summary = match cfg.mode {
        Mode::Simulate => simulate(cfg, dir, &mut em, &mut failures)?,
        Mode::Twin => twin(cfg, &mut em, &mut failures)?,
        Mode::VerifyLemmas => verify_lemmas(cfg, &mut em, &mut failures)?,
        Mode::Example1d => example(cfg, &mut em, &mut failures)?,
        Mode::Convergence => convergence_mode(cfg, &mut em, &mut failures)?,
        Mode::CheckNoise => check_noise(cfg, &mut em, &mut failures)?,
    };
    summary["mode"] = json!(cfg.mode.name());
    summary["status"] = json!(if failures.is_empty() { "ok" } else { "failed" });
    summary["failures"] = json!(failures);
    em.emit(KIND_SUMMARY, &summary)?;
    let count = em.count();
    em.into_inner()?;
    Ok((count, failures))
}

fn lattice(cfg: &RunConfig) -> Result<Lattice> {
    cfg.sim.lattice()
}

fn noise_model(cfg: &RunConfig, lat: Lattice) -> Result<NoiseModel> {
    build_noise_model(&cfg.noise, lat)
}

fn initial_state(cfg: &RunConfig, lat: Lattice) -> Result<StateV> {
    match cfg.initial.kind {
        InitialKind::Zero => Ok(StateV::zeros(lat)),
        InitialKind::Random => sampling::sample_state(lat, cfg.initial.slope, cfg.sim.sigma, cfg.initial.size, cfg.initial.seed),
    }
}

fn resolve(dir: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        dir.join(p)
    }
}

fn emit_path<W: Write>(em: &mut Emitter<W>, cfg: &RunConfig, index: usize, d: &PathDiagnostics, failures: &mut Vec<String>) -> Result<()> {
    for s in &d.samples {
        em.emit(
            "timeseries",
            &json!({
                "path": index,
                "step": s.step,
                "t": s.t,
                "norm_sigma": s.norm_sigma,
                "norm_sigma_s2": s.norm_sigma_s2,
                "w1inf": s.w1inf,
                "theta": s.theta,
                "energy_integral": s.energy_integral,
                "energy": s.energy,
                "n": cfg.sim.n,
                "seed": cfg.ensemble.seed,
            }),
        )?;
    }
    if let Some(b) = &d.blowup {
        em.emit("blowup", &json!({ "path": index, "step": b.step, "reason": b.reason, "n": cfg.sim.n, "seed": cfg.ensemble.seed }))?;
        failures.push(format!("blowup: path {index} at step {} ({})", b.step, b.reason));
    }
    Ok(())
}

fn simulate<W: Write>(cfg: &RunConfig, dir: &Path, em: &mut Emitter<W>, failures: &mut Vec<String>) -> Result<serde_json::Value> {
    let lat = lattice(cfg)?;
    let noise = noise_model(cfg, lat)?;
    if let Some(p) = &cfg.output.noise_dump {
        checkpoint::write_noise(&resolve(dir, p), noise.fields())?;
    }
    let leaf_dt = cfg.sim.dt / (1u64 << cfg.ensemble.leaf_level) as f64;
    let (v0, start) = match &cfg.output.resume {
        Some(p) => {
            let (v, step, _) = checkpoint::read_state(&resolve(dir, p))?;
            if v.lattice() != lat {
                return Err(Error::config("output.resume", "checkpoint lattice differs from sim.n"));
            }
            (v, step)
        }
        None => (initial_state(cfg, lat)?, 0),
    };
    let paths = if cfg.ensemble.paths == 1 {
        let wiener = WienerPath::nested(path_seed(cfg.ensemble.seed, 0), leaf_dt, cfg.ensemble.leaf_level);
        vec![integrate(&cfg.sim, &noise, &v0, &wiener, start, false)?]
    } else {
        run_ensemble(&cfg.sim, &noise, |_| Ok(v0.clone()), cfg.ensemble.seed, cfg.ensemble.paths, cfg.ensemble.leaf_level)?
    };
    for (i, d) in paths.iter().enumerate() {
        emit_path(em, cfg, i, d, failures)?;
    }
    if let Some(p) = &cfg.output.checkpoint {
        let d = &paths[0];
        checkpoint::write_checkpoint(&resolve(dir, p), d.final_state.field(), d.final_step, d.final_step as f64 * cfg.sim.dt)?;
    }
    let m = paths.len() as f64;
    let initial_level = sobolev_norm(v0.field(), cfg.sim.sigma).powf(cfg.sim.p);
    Ok(json!({
        "n": cfg.sim.n,
        "seed": cfg.ensemble.seed,
        "paths": paths.len(),
        "start_step": start,
        "blowups": paths.iter().filter(|d| d.blowup.is_some()).count(),
        "stopped": paths.iter().filter(|d| d.stopping_time.is_some()).count(),
        "cutoff_reached": paths.iter().filter(|d| d.cutoff_time.is_some()).count(),
        "mean_sup_level": paths.iter().map(|d| d.sup_level).sum::<f64>() / m,
        "energy_integral": paths.iter().map(|d| d.energy_integral).sum::<f64>() / m,
        "c_fit": energy_bound_constant(&paths, initial_level),
        "final_step": paths[0].final_step,
    }))
}

fn twin<W: Write>(cfg: &RunConfig, em: &mut Emitter<W>, failures: &mut Vec<String>) -> Result<serde_json::Value> {
    let lat = lattice(cfg)?;
    let noise = noise_model(cfg, lat)?;
    let v0 = initial_state(cfg, lat)?;
    let pert = sampling::sample_state(lat, cfg.twin.perturbation_slope, cfg.sim.sigma - 0.5, 1.0, cfg.twin.perturbation_seed)?;
    let report = match twin_run(&cfg.sim, &noise, &v0, &pert, cfg.twin.delta, cfg.ensemble.seed, cfg.ensemble.paths, cfg.ensemble.leaf_level) {
        Ok(r) => r,
        Err(Error::Blowup { step, reason }) => {
            failures.push(format!("blowup: twin pair at step {step} ({reason})"));
            return Ok(json!({ "n": cfg.sim.n, "seed": cfg.ensemble.seed }));
        }
        Err(e) => return Err(e),
    };
    let every = cfg.sim.record_every as u64;
    for (i, p) in report.paths.iter().enumerate() {
        let last = p.steps.last().map(|s| s.step);
        for s in p.steps.iter().filter(|s| s.step % every == 0 || Some(s.step) == last) {
            em.emit(
                "twin",
                &json!({
                    "path": i,
                    "step": s.step,
                    "t": s.t,
                    "diff_norm": s.diff_norm,
                    "weight": s.weight,
                    "weighted": s.weighted,
                    "n": cfg.sim.n,
                    "seed": cfg.ensemble.seed,
                }),
            )?;
        }
        em.emit(
            "twin_path",
            &json!({
                "path": i,
                "identical": p.identical,
                "residual": p.residual,
                "monotonicity_excess": p.monotonicity_excess,
                "n": cfg.sim.n,
                "seed": cfg.ensemble.seed,
            }),
        )?;
    }
    Ok(json!({
        "n": cfg.sim.n,
        "seed": cfg.ensemble.seed,
        "delta": cfg.twin.delta,
        "paths": report.paths.len(),
        "c_fit": report.c_fit,
        "max_final_diff": report.max_final_diff,
        "mean_residual": report.mean_residual,
        "identical": report.paths.iter().all(|p| p.identical),
    }))
}

fn verify_lemmas<W: Write>(cfg: &RunConfig, em: &mut Emitter<W>, failures: &mut Vec<String>) -> Result<serde_json::Value> {
    let sweep = cfg.lemmas.sweep();
    let reports = lemmas::run_all(&sweep, &cfg.lemmas.alphas)?;
    let mut flat = 0;
    for r in &reports {
        if cfg.lemmas.emit_samples {
            for s in &r.samples {
                em.emit(
                    "lemma_sample",
                    &json!({
                        "lemma_id": r.lemma_id,
                        "alpha": r.alpha,
                        "n": s.n,
                        "index": s.index,
                        "seed": derive_seed(sweep.seed, s.index as u64),
                        "lhs": s.lhs,
                        "rhs": s.rhs,
                        "ratio": s.ratio,
                    }),
                )?;
            }
        }
        em.emit(
            "lemma_report",
            &json!({
                "lemma_id": r.lemma_id,
                "lhs_formula": r.lhs,
                "rhs_formula": r.rhs,
                "s": r.s,
                "alpha": r.alpha,
                "resolutions": r.resolutions,
                "samples": r.samples.len() / r.resolutions.len().max(1),
                "max_ratio": r.max_ratio,
                "trend_slope": r.trend_slope,
                "flat": r.flat,
                "outside_hypotheses": r.outside_hypotheses,
                "seed": sweep.seed,
            }),
        )?;
        if r.flat {
            flat += 1;
        } else if !r.outside_hypotheses {
            failures.push(format!(
                "lemma trend failure: {} (alpha = {}) slope {:.3} > {}",
                r.lemma_id,
                r.alpha,
                r.trend_slope,
                lemmas::TREND_TOLERANCE
            ));
        }
    }
    let mut summary = json!({
        "n": cfg.lemmas.resolutions,
        "seed": sweep.seed,
        "reports": reports.len(),
        "flat": flat,
    });
    let lat = lattice(cfg)?;
    let levels: Vec<u32> = (2..8).filter(|j| (1usize << j) + 1 <= lat.n()).collect();
    if cfg.noise.modes > 0 && !levels.is_empty() {
        let noise = noise_model(cfg, lat)?;
        let c = cancellation::verify_cancellation(&noise, cfg.sim.sigma, 8, cfg.initial.slope, &levels, sweep.seed)?;
        for rung in &c.ladder {
            em.emit(
                "cancellation_ladder",
                &json!({
                    "level": rung.level,
                    "shell": rung.shell,
                    "ratio": rung.combined_ratio,
                    "naive_ratio": rung.naive_ratio,
                    "n": cfg.sim.n,
                    "seed": sweep.seed,
                }),
            )?;
        }
        summary["cancellation"] = json!({
            "coefficients": c.coefficients,
            "max_combined_ratio": c.max_combined_ratio,
            "combined_variation": c.combined_variation,
            "naive_growth": c.naive_growth,
            "naive_increasing": c.naive_increasing,
        });
    }
    Ok(summary)
}

fn example<W: Write>(cfg: &RunConfig, em: &mut Emitter<W>, failures: &mut Vec<String>) -> Result<serde_json::Value> {
    let e = &cfg.example;
    let rep = example1d::example_1d(e.r, e.tau, e.kmax)?;
    let scaled = rep.a_scaled();
    for i in 0..rep.k.len() {
        em.emit(
            "example1d",
            &json!({
                "k": rep.k[i],
                "a_closed": rep.a_closed[i],
                "b_closed": rep.b_closed[i],
                "a_direct": rep.a_direct[i],
                "b_direct": rep.b_direct[i],
                "ratio": scaled[i],
                "r": rep.r,
                "tau": rep.tau,
            }),
        )?;
    }
    if !(rep.discrepancy <= EXAMPLE_TOLERANCE) {
        failures.push(format!("example-1d discrepancy {:.3e} > {EXAMPLE_TOLERANCE:e}", rep.discrepancy));
    }
    Ok(json!({
        "r": rep.r,
        "tau": rep.tau,
        "k_min": rep.k_min,
        "k_max": rep.k_max,
        "convention": rep.convention,
        "discrepancy": rep.discrepancy,
        "abs_discrepancy": rep.abs_discrepancy,
        "max_abs_b": rep.b_closed.iter().fold(0.0f64, |m, b| m.max(b.abs())),
    }))
}

fn convergence_mode<W: Write>(cfg: &RunConfig, em: &mut Emitter<W>, failures: &mut Vec<String>) -> Result<serde_json::Value> {
    let lat = lattice(cfg)?;
    let noise = noise_model(cfg, lat)?;
    let v0 = initial_state(cfg, lat)?;
    let c = &cfg.convergence;
    let rep = convergence::convergence_study(c.kind, &cfg.sim, &noise, &v0, &c.dts, c.paths, c.seed)?;
    for p in &rep.points {
        em.emit(
            "convergence",
            &json!({
                "dt": p.dt,
                "strong": p.strong,
                "weak": p.weak,
                "blowups": p.blowups,
                "comparison": rep.kind,
                "n": cfg.sim.n,
                "seed": c.seed,
            }),
        )?;
        if p.blowups > 0 {
            failures.push(format!("blowup: {} path(s) at dt = {}", p.blowups, p.dt));
        }
    }
    Ok(json!({
        "n": cfg.sim.n,
        "seed": c.seed,
        "comparison": rep.kind,
        "paths": rep.paths,
        "strong_order": rep.strong_order,
        "weak_order": rep.weak_order,
    }))
}

fn check_noise<W: Write>(cfg: &RunConfig, em: &mut Emitter<W>, failures: &mut Vec<String>) -> Result<serde_json::Value> {
    let lat = lattice(cfg)?;
    let noise = noise_model(cfg, lat)?;
    let rep = check_noise_conditions(&noise, cfg.sim.sigma, cfg.sim.s);
    em.emit("noise_check", &json!({ "report": rep, "n": cfg.sim.n, "seed": cfg.noise.seed }))?;
    if !rep.regularity_ok {
        failures.push("noise regularity condition fails".into());
    }
    if rep.smallness_required && !rep.smallness_ok {
        failures.push(format!(
            "noise smallness condition fails: {:.3e} > {:.3e}",
            rep.smallness, rep.smallness_threshold
        ));
    }
    Ok(json!({
        "n": cfg.sim.n,
        "seed": cfg.noise.seed,
        "regularity": rep.regularity,
        "smallness": rep.smallness,
        "passes": rep.passes,
    }))
}
