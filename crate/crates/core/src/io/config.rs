//! Run configuration: TOML sections, dotted overrides and validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::SimParams;
use crate::lab::convergence::ConvergenceKind;
use crate::lab::lemmas::TransportKind;
use crate::noise::NoiseSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Simulate,
    Twin,
    VerifyLemmas,
    #[serde(rename = "example-1d")]
    Example1d,
    Convergence,
    CheckNoise,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Twin => "twin",
            Mode::VerifyLemmas => "verify-lemmas",
            Mode::Example1d => "example-1d",
            Mode::Convergence => "convergence",
            Mode::CheckNoise => "check-noise",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    Zero,
    Random,
}

/// Initial state; `size` is the target `|V0|_sigma`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InitialSpec {
    pub kind: InitialKind,
    pub slope: f64,
    pub size: f64,
    pub seed: u64,
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self {
            kind: InitialKind::Random,
            slope: 4.0,
            size: 1.0,
            seed: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnsembleSpec {
    pub paths: usize,
    pub seed: u64,
    /// Wiener leaves per step are `2^leaf_level`.
    pub leaf_level: u32,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self {
            paths: 1,
            seed: 7,
            leaf_level: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TwinSpec {
    pub delta: f64,
    /// Perturbation direction, normalized to `|.|_(sigma-1/2) = 1`.
    pub perturbation_seed: u64,
    pub perturbation_slope: f64,
}

impl Default for TwinSpec {
    fn default() -> Self {
        Self {
            delta: 1e-6,
            perturbation_seed: 4,
            perturbation_slope: 4.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LemmaSpec {
    pub resolutions: Vec<usize>,
    pub samples: usize,
    pub s: f64,
    pub alphas: Vec<f64>,
    pub beta: f64,
    pub seed: u64,
    pub field_slope: f64,
    pub noise_slope: f64,
    pub transport: TransportKind,
    /// Emit one record per sample in addition to the per-lemma reports.
    pub emit_samples: bool,
}

impl Default for LemmaSpec {
    fn default() -> Self {
        let sweep = crate::lab::lemmas::SweepConfig::default();
        Self {
            resolutions: sweep.resolutions,
            samples: sweep.samples,
            s: sweep.s,
            alphas: vec![-0.5, 0.0, 0.5],
            beta: sweep.beta,
            seed: sweep.seed,
            field_slope: sweep.field_slope,
            noise_slope: sweep.noise_slope,
            transport: sweep.transport,
            emit_samples: true,
        }
    }
}

impl LemmaSpec {
    pub fn sweep(&self) -> crate::lab::lemmas::SweepConfig {
        crate::lab::lemmas::SweepConfig {
            resolutions: self.resolutions.clone(),
            samples: self.samples,
            s: self.s,
            alpha: 0.0,
            beta: self.beta,
            seed: self.seed,
            field_slope: self.field_slope,
            noise_slope: self.noise_slope,
            transport: self.transport,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExampleSpec {
    pub r: f64,
    pub tau: f64,
    pub kmax: i64,
}

impl Default for ExampleSpec {
    fn default() -> Self {
        Self {
            r: 1.0,
            tau: 0.0,
            kmax: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvergenceSpec {
    pub kind: ConvergenceKind,
    pub dts: Vec<f64>,
    pub paths: usize,
    pub seed: u64,
}

impl Default for ConvergenceSpec {
    fn default() -> Self {
        Self {
            kind: ConvergenceKind::Schemes,
            dts: vec![1e-2, 5e-3, 2.5e-3],
            paths: 8,
            seed: 9,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputSpec {
    /// Output directory; falls back to the caller's default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// NDJSON file name inside `dir`; defaults to `<mode>.ndjson`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    /// Final state written here (relative to `dir`) by `simulate`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<PathBuf>,
    /// State and step to resume `simulate` from.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resume: Option<PathBuf>,
    /// Noise fields dumped here (relative to `dir`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_dump: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default)]
    pub sim: SimParams,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub ensemble: EnsembleSpec,
    #[serde(default)]
    pub twin: TwinSpec,
    #[serde(default)]
    pub lemmas: LemmaSpec,
    #[serde(default)]
    pub example: ExampleSpec,
    #[serde(default)]
    pub convergence: ConvergenceSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

impl RunConfig {
    /// Range checks; errors carry the dotted key path.
    pub fn validate(&self) -> Result<()> {
        let scoped = |section: &str, r: Result<()>| {
            r.map_err(|e| match e {
                Error::Config { key, message } => Error::config(format!("{section}.{key}"), message),
                other => other,
            })
        };
        scoped("sim", self.sim.validate())?;
        scoped("noise", self.noise.validate())?;
        let checks: [(&str, bool, &str); 10] = [
            ("initial.size", self.initial.size.is_finite() && self.initial.size >= 0.0, "must be finite and >= 0"),
            ("ensemble.paths", self.ensemble.paths >= 1, "must be >= 1"),
            ("twin.delta", self.twin.delta.is_finite() && self.twin.delta >= 0.0, "must be finite and >= 0"),
            ("lemmas.samples", self.lemmas.samples >= 1, "must be >= 1"),
            ("lemmas.resolutions", !self.lemmas.resolutions.is_empty() && self.lemmas.resolutions.iter().all(|&n| n >= 1), "must be a nonempty list of levels >= 1"),
            ("example.r", self.example.r > 0.0, "must be > 0"),
            ("example.tau", self.example.tau >= 0.0, "must be >= 0"),
            ("example.kmax", self.example.kmax >= 5, "must be >= 5"),
            ("convergence.dts", self.convergence.dts.len() >= 2 && self.convergence.dts.iter().all(|&d| d > 0.0), "must list at least two positive steps"),
            ("convergence.paths", self.convergence.paths >= 1, "must be >= 1"),
        ];
        for (key, ok, msg) in checks {
            if !ok {
                return Err(Error::config(key, msg));
            }
        }
        if self.noise.max_wavenumber > self.sim.n {
            return Err(Error::config("noise.max_wavenumber", format!("exceeds sim.n = {}", self.sim.n)));
        }
        if (self.output.checkpoint.is_some() || self.output.resume.is_some()) && self.ensemble.paths != 1 {
            return Err(Error::config("ensemble.paths", "checkpoints need a single path"));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(format!("config serialization: {e}")))
    }

    pub fn output_path(&self, default_dir: &Path) -> PathBuf {
        let dir = self.output.dir.clone().unwrap_or_else(|| default_dir.to_path_buf());
        let file = self.output.file.clone().unwrap_or_else(|| format!("{}.ndjson", self.mode.name()));
        dir.join(file)
    }

    pub fn output_dir(&self, default_dir: &Path) -> PathBuf {
        self.output.dir.clone().unwrap_or_else(|| default_dir.to_path_buf())
    }
}

fn toml_value(text: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {text}")) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(text.into())),
        Err(_) => toml::Value::String(text.into()),
    }
}

/// Applies `key.path=value`; the value is read as TOML and falls back to a bare string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, value) = assignment
        .split_once('=')
        .ok_or_else(|| Error::config(assignment, "override must have the form key=value"))?;
    let key = key.trim();
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::config(key, "empty key segment"));
    }
    let mut node = table;
    for part in &parts[..parts.len() - 1] {
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(key, format!("`{part}` is not a table")))?;
    }
    node.insert(parts[parts.len() - 1].to_string(), toml_value(value.trim()));
    Ok(())
}

/// Parses a config table, reporting every unknown key at once.
pub fn from_table(table: toml::Table) -> Result<RunConfig> {
    let text = toml::to_string(&table).map_err(|e| Error::Format(e.to_string()))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut unknown = Vec::new();
    let de = toml::Deserializer::parse(text).map_err(|e| Error::config("<document>", e.to_string()))?;
    let mut record = |path: serde_ignored::Path<'_>| unknown.push(path.to_string());
    let ignored = serde_ignored::Deserializer::new(de, &mut record);
    let parsed: std::result::Result<RunConfig, _> = serde_path_to_error::deserialize(ignored);
    if !unknown.is_empty() {
        return Err(Error::UnknownKeys(unknown));
    }
    let cfg = parsed.map_err(|e| {
        let key = e.path().to_string();
        Error::config(key, e.into_inner().message().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads `path`, forces `mode`, applies overrides in order and validates.
pub fn load_config(path: Option<&Path>, mode: Mode, overrides: &[String]) -> Result<RunConfig> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| Error::Io {
                path: p.to_path_buf(),
                source,
            })?;
            text.parse::<toml::Table>().map_err(|e| Error::config("<document>", e.to_string()))?
        }
        None => toml::Table::new(),
    };
    if let Some(existing) = table.get("mode").and_then(|v| v.as_str()) {
        if existing != mode.name() {
            return Err(Error::config("mode", format!("file declares `{existing}` but `{}` was requested", mode.name())));
        }
    }
    table.insert("mode".into(), toml::Value::String(mode.name().into()));
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    from_table(table)
}
