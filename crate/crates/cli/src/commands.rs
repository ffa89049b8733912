//! Experiment dispatch and report writing.

use std::fs;
use std::path::{Path, PathBuf};

use baplab_core::ap::ApSignal;
use baplab_core::diagnostics::{
    contraction_experiment, decay_experiment, default_k_values, entropy_residual, monotone_stats, ContractionReport,
    DecayReport, EntropyReport, MonotoneReport, Verdict,
};
use baplab_core::io::{write_csv, write_fields, write_json, write_trajectory_csv};
use baplab_core::kinetic::{dissipation_budget, probe_sweep, KineticDiagnostics, MultiplierProbe};
use baplab_core::model::{
    nondegeneracy_verdict, omega_delta, sphere_directions, DegeneracyReport, Direction, Model, OmegaOptions,
};
use baplab_core::solver::{GridSpec, Solver, SolverConfig};
use baplab_core::VERSION;
use serde::Serialize;
use thiserror::Error;

use crate::config::{load_model, load_signal, Command, ConfigError, ExperimentConfig};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] baplab_core::Error),
    #[error("output directory {path}: {reason}")]
    Output { path: String, reason: String },
}

/// Envelope shared by every report.
#[derive(Debug, Serialize)]
pub struct Report<'a, T: Serialize> {
    pub version: &'static str,
    pub command: Command,
    pub seed: u64,
    pub config: &'a ExperimentConfig,
    pub verdict: Verdict,
    pub files: Vec<String>,
    pub result: T,
}

/// What a command produced: the overall verdict and the files written.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub verdict: Verdict,
    pub report_path: PathBuf,
}

fn model_and_grid(cfg: &ExperimentConfig) -> Result<(Model, GridSpec), RunError> {
    let model = load_model(&cfg.model)?;
    let grid = GridSpec::uniform(model.dims(), cfg.grid_l, cfg.grid_n)?;
    Ok((model, grid))
}

#[derive(Debug, Serialize)]
struct PreparedSignal {
    path: String,
    projected: bool,
    max_freq_error: f64,
}

fn signal(
    cfg: &ExperimentConfig,
    key: &'static str,
    path: &str,
    grid: &GridSpec,
) -> Result<(ApSignal, PreparedSignal), RunError> {
    let sig = load_signal(key, path)?;
    if sig.dims() != grid.dims() {
        return Err(ConfigError::Invalid {
            key,
            reason: format!("signal has {} dims, model has {}", sig.dims(), grid.dims()),
        }
        .into());
    }
    let (sig, err) = if cfg.project { sig.commensurate_project(grid.lengths())? } else { (sig, 0.0) };
    Ok((sig, PreparedSignal { path: path.into(), projected: cfg.project, max_freq_error: err }))
}

fn solver_config(cfg: &ExperimentConfig, model: Model, grid: GridSpec) -> SolverConfig {
    SolverConfig {
        model,
        grid,
        cfl_convective: cfg.cfl_convective,
        cfl_diffusive: cfg.cfl_diffusive,
        end_time: cfg.end_time,
        viscosity: cfg.viscosity,
        diagnostic_stride: cfg.diagnostic_stride,
        store_fields: cfg.store_fields,
    }
}

fn omega_options(cfg: &ExperimentConfig) -> OmegaOptions {
    OmegaOptions { sphere_samples: cfg.sphere_samples, xi_quadrature: cfg.xi_quadrature, refine: true, seed: cfg.seed }
}

fn expected(cfg: &ExperimentConfig, actual: &str, default_pass: bool) -> Verdict {
    Verdict::from_bool(match &cfg.expect {
        Some(e) => e == actual,
        None => default_pass,
    })
}

fn label<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|j| j.as_str().map(String::from)).unwrap_or_default()
}

/// Run the configured experiment and write its report into `cfg.out`.
pub fn dispatch(cfg: &ExperimentConfig) -> Result<Outcome, RunError> {
    let out = PathBuf::from(&cfg.out);
    fs::create_dir_all(&out).map_err(|e| RunError::Output { path: cfg.out.clone(), reason: e.to_string() })?;
    match cfg.command {
        Command::Spectrum => spectrum(cfg, &out),
        Command::Nondegeneracy => nondegeneracy(cfg, &out),
        Command::Simulate => simulate(cfg, &out),
        Command::Decay => decay(cfg, &out),
        Command::Contraction => contraction(cfg, &out),
        Command::KineticProbe => kinetic_probe(cfg, &out),
    }
}

fn finish<T: Serialize>(
    cfg: &ExperimentConfig,
    out: &Path,
    verdict: Verdict,
    mut files: Vec<String>,
    result: T,
) -> Result<Outcome, RunError> {
    files.sort();
    let report = Report { version: VERSION, command: cfg.command, seed: cfg.seed, config: cfg, verdict, files, result };
    let report_path = out.join("report.json");
    write_json(&report_path, &report)?;
    Ok(Outcome { verdict, report_path })
}

#[derive(Debug, Serialize)]
struct SpectrumResult {
    signal: PreparedSignal,
    dims: usize,
    terms: usize,
    mean_value: [f64; 2],
    is_real: bool,
    reality_defect: f64,
    n1: baplab_core::ap::SeminormEstimate,
    n2: baplab_core::ap::SeminormEstimate,
    spectrum: Vec<Vec<f64>>,
}

fn spectrum(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome, RunError> {
    let path = cfg.signal.as_deref().ok_or(ConfigError::Missing("signal"))?;
    let raw = load_signal("signal", path)?;
    let lengths = vec![cfg.grid_l; raw.dims()];
    let (sig, err) = if cfg.project { raw.commensurate_project(&lengths)? } else { (raw, 0.0) };
    let boxes = [10.0, 20.0, 40.0];
    let mean = sig.mean_value();
    let rows: Vec<Vec<f64>> = sig
        .terms()
        .map(|(f, a)| {
            let mut r = f.to_vec();
            r.extend([a.re, a.im]);
            r
        })
        .collect();
    let header = match sig.dims() {
        1 => "freq,re,im",
        _ => "freq_x,freq_y,re,im",
    };
    write_csv(&out.join("terms.csv"), header, &rows)?;
    let result = SpectrumResult {
        signal: PreparedSignal { path: path.into(), projected: cfg.project, max_freq_error: err },
        dims: sig.dims(),
        terms: sig.len(),
        mean_value: [mean.re, mean.im],
        is_real: sig.is_real(1e-12),
        reality_defect: sig.reality_defect().0,
        n1: sig.besicovitch_seminorm(1, &boxes)?,
        n2: sig.besicovitch_seminorm(2, &boxes)?,
        spectrum: sig.spectrum().iter().map(|f| f.to_vec()).collect(),
    };
    finish(cfg, out, Verdict::Pass, vec!["terms.csv".into()], result)
}

fn nondegeneracy(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome, RunError> {
    let model = load_model(&cfg.model)?;
    let report: DegeneracyReport =
        nondegeneracy_verdict(&model, cfg.delta, &cfg.ell_schedule, &cfg.thresholds, &omega_options(cfg))?;
    let rows: Vec<Vec<f64>> = report.ell_schedule.iter().zip(&report.omega_values).map(|(l, w)| vec![*l, *w]).collect();
    write_csv(&out.join("omega.csv"), "ell,omega", &rows)?;
    let verdict_label = label(&report.verdict);
    let verdict = expected(cfg, &verdict_label, verdict_label != "inconclusive");
    finish(cfg, out, verdict, vec!["omega.csv".into()], report)
}

#[derive(Debug, Serialize)]
struct SimulateResult {
    signal: PreparedSignal,
    steps: usize,
    dt: f64,
    max_principle_guaranteed: bool,
    initial: baplab_core::solver::Snapshot,
    last: baplab_core::solver::Snapshot,
    monotone: MonotoneReport,
    kinetic: KineticDiagnostics,
    entropy: Option<EntropyReport>,
}

fn simulate(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome, RunError> {
    let (model, grid) = model_and_grid(cfg)?;
    let path = cfg.signal.as_deref().ok_or(ConfigError::Missing("signal"))?;
    let (sig, prepared) = signal(cfg, "signal", path, &grid)?;
    let m = model.state_bound();
    let solver = Solver::new(solver_config(cfg, model, grid))?;
    let traj = solver.run(&sig)?;
    let mut files = vec!["series.csv".to_string()];
    write_trajectory_csv(&out.join("series.csv"), &traj)?;
    let entropy = if cfg.store_fields && traj.fields.len() >= 2 && cfg.end_time > 0.0 {
        write_fields(out, "fields", &traj)?;
        files.extend(["fields.bin".to_string(), "fields.json".to_string()]);
        Some(entropy_residual(&traj, &default_k_values(m), cfg.entropy_tolerance)?)
    } else {
        None
    };
    let monotone = monotone_stats(&traj);
    let kinetic = dissipation_budget(&traj, cfg.xi_nodes)?;
    let ok = monotone.verdict.passed()
        && kinetic.nonnegative
        && kinetic.within_bound
        && entropy.as_ref().map_or(true, |e| e.pass);
    let verdict = expected(cfg, if ok { "pass" } else { "fail" }, ok);
    let result = SimulateResult {
        signal: prepared,
        steps: traj.steps,
        dt: traj.dt,
        max_principle_guaranteed: traj.max_principle_guaranteed,
        initial: *traj.initial(),
        last: *traj.last(),
        monotone,
        kinetic,
        entropy,
    };
    finish(cfg, out, verdict, files, result)
}

#[derive(Debug, Serialize)]
struct DecayResult {
    signal: PreparedSignal,
    report: DecayReport,
}

fn decay(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome, RunError> {
    let (model, grid) = model_and_grid(cfg)?;
    let path = cfg.signal.as_deref().ok_or(ConfigError::Missing("signal"))?;
    let (sig, prepared) = signal(cfg, "signal", path, &grid)?;
    let report = decay_experiment(&solver_config(cfg, model, grid), &sig, &cfg.refinement, &cfg.decay_thresholds)?;
    let rows: Vec<Vec<f64>> = report.finest().series.iter().map(|(t, d)| vec![*t, *d]).collect();
    write_csv(&out.join("decay.csv"), "time,D", &rows)?;
    let verdict_label = label(&report.verdict);
    let verdict = expected(cfg, &verdict_label, verdict_label != "inconclusive");
    finish(cfg, out, verdict, vec!["decay.csv".into()], DecayResult { signal: prepared, report })
}

#[derive(Debug, Serialize)]
struct ContractionResult {
    signal_a: PreparedSignal,
    signal_b: PreparedSignal,
    report: ContractionReport,
}

fn contraction(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome, RunError> {
    let (model, grid) = model_and_grid(cfg)?;
    let pa = cfg.signal.as_deref().ok_or(ConfigError::Missing("signal"))?;
    let pb = cfg.signal_b.as_deref().ok_or(ConfigError::Missing("signal_b"))?;
    let (a, signal_a) = signal(cfg, "signal", pa, &grid)?;
    let (b, signal_b) = signal(cfg, "signal_b", pb, &grid)?;
    let report = contraction_experiment(&solver_config(cfg, model, grid), &a, &b)?;
    let rows: Vec<Vec<f64>> = report.series.iter().map(|(t, d)| vec![*t, *d]).collect();
    write_csv(&out.join("distance.csv"), "time,n1", &rows)?;
    let verdict = expected(cfg, &label(&report.verdict), report.verdict.passed());
    finish(cfg, out, verdict, vec!["distance.csv".into()], ContractionResult { signal_a, signal_b, report })
}

#[derive(Debug, Serialize)]
struct ProbeResult {
    delta: f64,
    ell: f64,
    omega: f64,
    omega_argsup: Direction,
    directions: usize,
    /// `max sup|m| · √ℓ`, at most 1
    worst_sup_ratio: f64,
    /// `max ℓ ∫|m|² / ω_δ(ℓ)`, at most 1
    worst_integral_ratio: f64,
    probes: Vec<MultiplierProbe>,
}

/// Relative slack for the two multiplier inequalities, which hold with
/// equality on degenerate directions.
pub const PROBE_SLACK: f64 = 1e-12;

fn kinetic_probe(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome, RunError> {
    let model = load_model(&cfg.model)?;
    let opts = omega_options(cfg);
    let n = opts.samples_for(model.dims());
    let dirs = sphere_directions(model.dims(), cfg.delta, n, cfg.seed)?;
    let (omega, omega_argsup) = omega_delta(&model, cfg.delta, cfg.ell, &opts)?;
    let probes = probe_sweep(&model, &dirs, cfg.ell, cfg.xi_nodes)?;
    let worst_sup_ratio = probes.iter().map(|p| p.sup_m * cfg.ell.sqrt()).fold(0.0, f64::max);
    let worst_integral_ratio = probes.iter().map(|p| cfg.ell * p.int_m2 / omega).fold(0.0, f64::max);
    let kappa_cols: Vec<String> = (1..=model.dims()).map(|i| format!("kappa{i}")).collect();
    let header = format!("tau,{},ell,sup_m,int_m2", kappa_cols.join(","));
    let rows: Vec<Vec<f64>> = probes
        .iter()
        .map(|p| {
            let mut r = vec![p.tau];
            r.extend(&p.kappa);
            r.extend([p.ell, p.sup_m, p.int_m2]);
            r
        })
        .collect();
    write_csv(&out.join("probes.csv"), &header, &rows)?;
    let ok = worst_sup_ratio <= 1.0 + PROBE_SLACK && worst_integral_ratio <= 1.0 + PROBE_SLACK;
    let verdict = expected(cfg, if ok { "pass" } else { "fail" }, ok);
    let result = ProbeResult {
        delta: cfg.delta,
        ell: cfg.ell,
        omega,
        omega_argsup,
        directions: n,
        worst_sup_ratio,
        worst_integral_ratio,
        probes,
    };
    finish(cfg, out, verdict, vec!["probes.csv".into()], result)
}
