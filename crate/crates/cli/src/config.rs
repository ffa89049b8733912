//! Experiment configuration: JSON file plus command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use baplab_core::ap::ApSignal;
use baplab_core::diagnostics::DecayThresholds;
use baplab_core::model::{gallery, Model, ModelSpec, VerdictThresholds};
use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config key `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
    #[error("config file {path}: {reason}")]
    File { path: String, reason: String },
    #[error("missing required key `{0}` for this command")]
    Missing(&'static str),
}

fn invalid(key: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key, reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    Nondegeneracy,
    Simulate,
    Decay,
    Contraction,
    KineticProbe,
}

/// Keys accepted in a config file. Every key is optional; unknown keys are an error.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<Command>,
    pub model: Option<String>,
    pub signal: Option<String>,
    pub signal_b: Option<String>,
    pub grid_n: Option<usize>,
    pub grid_l: Option<f64>,
    pub end_time: Option<f64>,
    pub cfl_convective: Option<f64>,
    pub cfl_diffusive: Option<f64>,
    pub viscosity: Option<f64>,
    pub diagnostic_stride: Option<usize>,
    pub store_fields: Option<bool>,
    pub project: Option<bool>,
    pub refinement: Option<Vec<usize>>,
    pub delta: Option<f64>,
    pub ell_schedule: Option<Vec<f64>>,
    pub ell: Option<f64>,
    pub sphere_samples: Option<usize>,
    pub xi_quadrature: Option<usize>,
    pub xi_nodes: Option<usize>,
    pub thresholds: Option<VerdictThresholds>,
    pub decay_thresholds: Option<DecayThresholds>,
    pub entropy_tolerance: Option<f64>,
    pub expect: Option<String>,
    pub out: Option<String>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "baplab", version, about = "Entropy solutions with almost-periodic data: simulation and diagnostics")]
pub struct Cli {
    /// Experiment to run (may instead come from the config file)
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// JSON config file; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Model JSON file, or `gallery:<name>`
    #[arg(long)]
    pub model: Option<String>,
    /// Signal JSON file (repeat for the second signal of `contraction`)
    #[arg(long)]
    pub signal: Vec<String>,
    /// Cells per axis
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Super-cell length per axis
    #[arg(long)]
    pub grid_l: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub end_time: Option<f64>,
    #[arg(long)]
    pub cfl_c: Option<f64>,
    #[arg(long)]
    pub cfl_d: Option<f64>,
    #[arg(long)]
    pub viscosity: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Comma-separated, strictly decreasing
    #[arg(long, value_delimiter = ',')]
    pub ell_schedule: Option<Vec<f64>>,
    /// Comma-separated cell counts for `decay`
    #[arg(long, value_delimiter = ',')]
    pub refinement: Option<Vec<usize>>,
    /// Expected verdict; the exit code reports a mismatch
    #[arg(long)]
    pub expect: Option<String>,
    /// Project frequencies onto the super-cell lattice before simulating
    #[arg(long)]
    pub project: bool,
    #[arg(long)]
    pub store_fields: bool,
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Fully resolved and validated configuration, echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub model: String,
    pub signal: Option<String>,
    pub signal_b: Option<String>,
    pub grid_n: usize,
    pub grid_l: f64,
    pub end_time: f64,
    pub cfl_convective: f64,
    pub cfl_diffusive: f64,
    pub viscosity: f64,
    pub diagnostic_stride: usize,
    pub store_fields: bool,
    pub project: bool,
    pub refinement: Vec<usize>,
    pub delta: f64,
    pub ell_schedule: Vec<f64>,
    pub ell: f64,
    pub sphere_samples: Option<usize>,
    pub xi_quadrature: usize,
    pub xi_nodes: usize,
    pub thresholds: VerdictThresholds,
    pub decay_thresholds: DecayThresholds,
    pub entropy_tolerance: f64,
    pub expect: Option<String>,
    pub out: String,
    pub seed: u64,
}

pub const DEFAULT_DELTA: f64 = 3.0;
pub const DEFAULT_ELL_SCHEDULE: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

pub fn read_file_config(path: &Path) -> Result<FileConfig, ConfigError> {
    let text = fs::read_to_string(path)
        .map_err(|e| ConfigError::File { path: path.display().to_string(), reason: e.to_string() })?;
    parse_file_config(&text).map_err(|e| match e {
        ConfigError::File { reason, .. } => ConfigError::File { path: path.display().to_string(), reason },
        other => other,
    })
}

pub fn parse_file_config(text: &str) -> Result<FileConfig, ConfigError> {
    serde_json::from_str(text).map_err(|e| ConfigError::File { path: String::new(), reason: e.to_string() })
}

/// Merge flags over the file config, fill defaults and validate.
pub fn resolve(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let mut f = match &cli.config {
        Some(p) => read_file_config(p)?,
        None => FileConfig::default(),
    };
    if cli.command.is_some() {
        f.command = cli.command;
    }
    macro_rules! over {
        ($($flag:ident => $key:ident),*) => {$(
            if let Some(v) = cli.$flag.clone() { f.$key = Some(v); }
        )*};
    }
    over!(model => model, grid_n => grid_n, grid_l => grid_l, end_time => end_time, cfl_c => cfl_convective,
          cfl_d => cfl_diffusive, viscosity => viscosity, delta => delta, ell_schedule => ell_schedule,
          refinement => refinement, expect => expect, out => out, seed => seed);
    if let Some(s) = cli.signal.first() {
        f.signal = Some(s.clone());
    }
    if let Some(s) = cli.signal.get(1) {
        f.signal_b = Some(s.clone());
    }
    if cli.project {
        f.project = Some(true);
    }
    if cli.store_fields {
        f.store_fields = Some(true);
    }
    fill(f)
}

/// Fill defaults and validate a file config.
pub fn fill(f: FileConfig) -> Result<ExperimentConfig, ConfigError> {
    let command = f.command.ok_or(ConfigError::Missing("command"))?;
    let grid_n = f.grid_n.unwrap_or(256);
    let cfg = ExperimentConfig {
        command,
        model: f.model.ok_or(ConfigError::Missing("model"))?,
        signal: f.signal,
        signal_b: f.signal_b,
        grid_n,
        grid_l: f.grid_l.unwrap_or(1.0),
        end_time: f.end_time.unwrap_or(1.0),
        cfl_convective: f.cfl_convective.unwrap_or(0.4),
        cfl_diffusive: f.cfl_diffusive.unwrap_or(0.25),
        viscosity: f.viscosity.unwrap_or(0.0),
        diagnostic_stride: f.diagnostic_stride.unwrap_or(1),
        store_fields: f.store_fields.unwrap_or(false),
        project: f.project.unwrap_or(false),
        refinement: f.refinement.unwrap_or_else(|| vec![grid_n]),
        delta: f.delta.unwrap_or(DEFAULT_DELTA),
        ell_schedule: f.ell_schedule.unwrap_or_else(|| DEFAULT_ELL_SCHEDULE.to_vec()),
        ell: f.ell.unwrap_or(1e-4),
        sphere_samples: f.sphere_samples,
        xi_quadrature: f.xi_quadrature.unwrap_or(4096),
        xi_nodes: f.xi_nodes.unwrap_or(baplab_core::kinetic::DEFAULT_XI_NODES),
        thresholds: f.thresholds.unwrap_or_default(),
        decay_thresholds: f.decay_thresholds.unwrap_or_default(),
        entropy_tolerance: f.entropy_tolerance.unwrap_or(1.0),
        expect: f.expect,
        out: f.out.unwrap_or_else(|| "baplab-out".into()),
        seed: f.seed.unwrap_or(0),
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(c: &ExperimentConfig) -> Result<(), ConfigError> {
    if c.grid_n < 4 {
        return Err(invalid("grid_n", "need at least 4 cells"));
    }
    if !(c.grid_l > 0.0 && c.grid_l.is_finite()) {
        return Err(invalid("grid_l", "must be positive"));
    }
    if !(c.end_time >= 0.0 && c.end_time.is_finite()) {
        return Err(invalid("end_time", format!("must be finite and >= 0, got {}", c.end_time)));
    }
    if !(c.cfl_convective > 0.0 && c.cfl_convective <= 1.0) {
        return Err(invalid("cfl_convective", "must lie in (0, 1]"));
    }
    if !(c.cfl_diffusive > 0.0 && c.cfl_diffusive <= 0.5) {
        return Err(invalid("cfl_diffusive", "must lie in (0, 0.5]"));
    }
    if !(c.viscosity >= 0.0 && c.viscosity.is_finite()) {
        return Err(invalid("viscosity", "must be >= 0"));
    }
    if c.diagnostic_stride == 0 {
        return Err(invalid("diagnostic_stride", "must be >= 1"));
    }
    if c.refinement.is_empty() || c.refinement.iter().any(|&n| n < 4) {
        return Err(invalid("refinement", "needs one or more grids of at least 4 cells"));
    }
    if !(c.delta > 0.0 && c.delta.is_finite()) {
        return Err(invalid("delta", "must be positive"));
    }
    if c.ell_schedule.len() < 3
        || c.ell_schedule.iter().any(|&l| !(l > 0.0))
        || c.ell_schedule.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(invalid("ell_schedule", "needs at least 3 positive, strictly decreasing entries"));
    }
    if !(c.ell > 0.0) {
        return Err(invalid("ell", "must be positive"));
    }
    if c.xi_quadrature < 8 {
        return Err(invalid("xi_quadrature", "need at least 8 nodes"));
    }
    if c.xi_nodes < 64 {
        return Err(invalid("xi_nodes", "need at least 64 nodes"));
    }
    if c.sphere_samples == Some(0) {
        return Err(invalid("sphere_samples", "must be positive"));
    }
    if !(c.entropy_tolerance > 0.0) {
        return Err(invalid("entropy_tolerance", "must be positive"));
    }
    if let Some(e) = &c.expect {
        let allowed: &[&str] = match c.command {
            Command::Nondegeneracy => &["nondegenerate", "degenerate", "inconclusive"],
            Command::Decay => &["decays", "persists", "vacuous", "inconclusive"],
            _ => &["pass", "fail"],
        };
        if !allowed.contains(&e.as_str()) {
            return Err(invalid("expect", format!("`{e}` is not one of {allowed:?}")));
        }
    }
    check_model_ref(&c.model)?;
    let needs_signal = matches!(c.command, Command::Spectrum | Command::Simulate | Command::Decay | Command::Contraction);
    if needs_signal {
        check_file("signal", c.signal.as_deref().ok_or(ConfigError::Missing("signal"))?)?;
    }
    if c.command == Command::Contraction {
        check_file("signal_b", c.signal_b.as_deref().ok_or(ConfigError::Missing("signal_b"))?)?;
    }
    Ok(())
}

fn check_file(key: &'static str, path: &str) -> Result<(), ConfigError> {
    if Path::new(path).is_file() {
        Ok(())
    } else {
        Err(invalid(key, format!("file `{path}` does not exist")))
    }
}

fn check_model_ref(model: &str) -> Result<(), ConfigError> {
    match model.strip_prefix("gallery:") {
        Some(name) => gallery_model(name).map(|_| ()),
        None => check_file("model", model),
    }
}

/// Gallery models by name, all with `M = 1`.
pub fn gallery_model(name: &str) -> Result<Model, ConfigError> {
    Ok(match name {
        "burgers1d" => gallery::burgers_1d(1.0),
        "linear-advection1d" => gallery::linear_advection_1d(1.0, 1.0),
        "degenerate-diffusion1d" => gallery::degenerate_diffusion_1d(1.0),
        "zero1d" => gallery::zero_1d(1.0),
        "anisotropic2d" => gallery::anisotropic_2d(1.0),
        "mixed-diffusion2d" => gallery::mixed_diffusion_2d(1.0),
        other => return Err(invalid("model", format!("unknown gallery model `{other}`"))),
    })
}

pub fn load_model(model: &str) -> Result<Model, ConfigError> {
    if let Some(name) = model.strip_prefix("gallery:") {
        return gallery_model(name);
    }
    let text = fs::read_to_string(model).map_err(|e| invalid("model", format!("{model}: {e}")))?;
    let spec: ModelSpec = serde_json::from_str(&text).map_err(|e| invalid("model", format!("{model}: {e}")))?;
    Model::new(spec).map_err(|e| invalid("model", format!("{model}: {e}")))
}

pub fn load_signal(key: &'static str, path: &str) -> Result<ApSignal, ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| invalid(key, format!("{path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| invalid(key, format!("{path}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let f = parse_file_config(r#"{"command":"nondegeneracy","model":"gallery:burgers1d"}"#).unwrap();
        let c = fill(f).unwrap();
        assert_eq!((c.cfl_convective, c.cfl_diffusive), (0.4, 0.25));
        assert_eq!(c.xi_nodes, 1024);
        assert_eq!(c.thresholds, VerdictThresholds::default());
        assert_eq!(c.ell_schedule, DEFAULT_ELL_SCHEDULE.to_vec());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_file_config(r#"{"clf_convective":0.4}"#).unwrap_err();
        assert!(err.to_string().contains("clf_convective"), "{err}");
    }

    #[test]
    fn negative_end_time_is_a_range_error() {
        let f = parse_file_config(r#"{"command":"nondegeneracy","model":"gallery:burgers1d","end_time":-1}"#).unwrap();
        let err = fill(f).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { key: "end_time", .. }), "{err}");
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        fs::write(&p, r#"{"command":"nondegeneracy","model":"gallery:burgers1d","delta":1.0}"#).unwrap();
        let cli = Cli::parse_from(["baplab", "--config", p.to_str().unwrap(), "--delta", "2.5"]);
        assert_eq!(resolve(&cli).unwrap().delta, 2.5);
    }
}
