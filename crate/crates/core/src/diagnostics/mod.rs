//! Qualitative functionals on trajectories: decay to the mean, L¹ contraction,
//! monotone statistics, entropy residuals and spectral tails.

mod entropy;
mod spectral;

pub use entropy::{entropy_residual, default_k_values, EntropyLevel, EntropyReport, TestFunction};
pub use spectral::{field_spectrum, tail_uniformity, TailReport};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ap::ApSignal;
use crate::error::{Error, Result};
use crate::solver::{init_field, Field, GridSpec, Solver, SolverConfig, Trajectory};

/// Per-step slack for "non-increasing".
pub const MONOTONE_TOL: f64 = 1e-12;

/// `(1/#cells) Σ |a_c - b_c|`
pub fn grid_n1(a: &Field, b: &Field) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    let s: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).sum();
    Ok(s / a.values().len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayVerdict {
    Decays,
    Persists,
    Vacuous,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecayThresholds {
    /// `D(T)/D(0)` below which the finest run counts as decayed.
    pub decay_ratio: f64,
    /// Finest-grid ratio a persisting run must reach.
    pub persist_ratio: f64,
    /// `D(0)` at or below which the experiment is vacuous.
    pub vacuous_level: f64,
}

impl Default for DecayThresholds {
    fn default() -> Self {
        DecayThresholds { decay_ratio: 0.1, persist_ratio: 0.9, vacuous_level: 1e-14 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRun {
    pub cells: usize,
    /// `(t, D(t))`
    pub series: Vec<(f64, f64)>,
    pub monotone_violations: usize,
    pub worst_violation: f64,
    pub final_ratio: Option<f64>,
}

impl DecayRun {
    fn from_trajectory(cells: usize, tr: &Trajectory) -> Self {
        let series: Vec<(f64, f64)> = tr.snapshots.iter().map(|s| (s.time, s.l1_to_mean)).collect();
        let (monotone_violations, worst_violation) = violations(series.iter().map(|p| p.1));
        let d0 = series[0].1;
        let final_ratio = (d0 > 0.0).then(|| series.last().unwrap().1 / d0);
        DecayRun { cells, series, monotone_violations, worst_violation, final_ratio }
    }
}

/// Count and size of increases beyond [`MONOTONE_TOL`].
fn violations(series: impl Iterator<Item = f64>) -> (usize, f64) {
    let v: Vec<f64> = series.collect();
    let mut count = 0;
    let mut worst = 0.0f64;
    for w in v.windows(2) {
        let inc = w[1] - w[0];
        worst = worst.max(inc);
        if inc > MONOTONE_TOL {
            count += 1;
        }
    }
    (count, worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub reference_mean: f64,
    pub thresholds: DecayThresholds,
    /// One run per refinement level, in the order given.
    pub runs: Vec<DecayRun>,
    /// `(N, D(T)/D(0))` per level.
    pub refinement_trend: Vec<(usize, Option<f64>)>,
    /// Finest-grid values.
    pub final_ratio: Option<f64>,
    pub monotone_violations: usize,
    pub worst_violation: f64,
    pub verdict: DecayVerdict,
}

impl DecayReport {
    pub fn finest(&self) -> &DecayRun {
        self.runs.iter().max_by_key(|r| r.cells).expect("at least one run")
    }
}

fn with_cells(grid: &GridSpec, n: usize) -> Result<GridSpec> {
    GridSpec::new(grid.lengths().to_vec(), vec![n; grid.dims()])
}

/// Run `initial` at every `N` in `refinement` (applied to each axis) and
/// classify the decay of `D(t) = mean |u(t) - mean(u0)|`.
pub fn decay_experiment(
    config: &SolverConfig,
    initial: &ApSignal,
    refinement: &[usize],
    thresholds: &DecayThresholds,
) -> Result<DecayReport> {
    if refinement.is_empty() {
        return Err(Error::InvalidArgument { name: "refinement", reason: "needs at least one grid".into() });
    }
    let mut cfg = config.clone();
    cfg.store_fields = false;
    let runs: Vec<Result<DecayRun>> = refinement
        .par_iter()
        .map(|&n| {
            let mut c = cfg.clone();
            c.grid = with_cells(&config.grid, n)?;
            let tr = Solver::new(c)?.run(initial)?;
            Ok(DecayRun::from_trajectory(n, &tr))
        })
        .collect();
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(classify_decay(initial.mean_value().re, runs, thresholds))
}

fn classify_decay(reference_mean: f64, runs: Vec<DecayRun>, thresholds: &DecayThresholds) -> DecayReport {
    let mut sorted: Vec<&DecayRun> = runs.iter().collect();
    sorted.sort_by_key(|r| r.cells);
    let finest = *sorted.last().unwrap();
    let d0 = finest.series[0].1;
    let verdict = if d0 <= thresholds.vacuous_level {
        DecayVerdict::Vacuous
    } else {
        let ratio = finest.final_ratio.unwrap_or(f64::NAN);
        let ratios: Vec<f64> = sorted.iter().map(|r| r.final_ratio.unwrap_or(f64::NAN)).collect();
        let increasing = ratios.len() >= 2 && ratios.windows(2).all(|w| w[1] > w[0]);
        if finest.monotone_violations == 0 && ratio < thresholds.decay_ratio {
            DecayVerdict::Decays
        } else if increasing && ratio >= thresholds.persist_ratio {
            DecayVerdict::Persists
        } else {
            DecayVerdict::Inconclusive
        }
    };
    DecayReport {
        reference_mean,
        thresholds: *thresholds,
        refinement_trend: runs.iter().map(|r| (r.cells, r.final_ratio)).collect(),
        final_ratio: finest.final_ratio,
        monotone_violations: finest.monotone_violations,
        worst_violation: finest.worst_violation,
        verdict,
        runs: runs.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    /// `(t, N1(u - v))` after every step.
    pub series: Vec<(f64, f64)>,
    pub max_step_increase: f64,
    /// `1e-12` for diagonal `A`, the smallest cell width otherwise.
    pub tolerance: f64,
    pub diagonal: bool,
    pub verdict: Verdict,
}

/// Step-locked pair of runs from two signals.
pub fn contraction_experiment(config: &SolverConfig, a: &ApSignal, b: &ApSignal) -> Result<ContractionReport> {
    let ua = init_field(a, &config.grid)?;
    let ub = init_field(b, &config.grid)?;
    contraction_fields(config, ua, ub)
}

/// Step-locked pair of runs from two fields. Both runs share the schedule of
/// one solver, so their step sizes coincide.
pub fn contraction_fields(config: &SolverConfig, a: Field, b: Field) -> Result<ContractionReport> {
    let solver = Solver::new(config.clone())?;
    let (steps, dt) = solver.schedule();
    let mut u = a;
    let mut v = b;
    let mut series = vec![(0.0, grid_n1(&u, &v)?)];
    let mut max_inc = f64::NEG_INFINITY;
    for n in 0..steps {
        let (t, h) = solver.step_time(n, steps, dt);
        u = solver.step(&u, h)?;
        v = solver.step(&v, h)?;
        let dist = grid_n1(&u, &v)?;
        let time = if n + 1 == steps { config.end_time } else { t + h };
        max_inc = max_inc.max(dist - series.last().unwrap().1);
        series.push((time, dist));
    }
    let diagonal = config.model.is_diagonal();
    let tolerance = if diagonal { MONOTONE_TOL } else { config.grid.min_dx() };
    let max_step_increase = if steps == 0 { 0.0 } else { max_inc };
    Ok(ContractionReport {
        series,
        max_step_increase,
        tolerance,
        diagonal,
        verdict: Verdict::from_bool(max_step_increase <= tolerance),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneReport {
    /// Largest increase of `I = mean u²` between snapshots.
    pub l2_worst_increase: f64,
    /// Largest `max|u(t)| - max|u(0)|`.
    pub maxabs_worst_excess: f64,
    pub max_principle_checked: bool,
    /// Largest `|mean(t) - mean(0)|`.
    pub mean_drift: f64,
    /// `mean_drift / max(|mean(0)|, max|u(0)|)`.
    pub mean_drift_relative: f64,
    pub l2_pass: bool,
    pub max_principle_pass: bool,
    pub conservation_pass: bool,
    pub verdict: Verdict,
}

/// Check `I` non-increasing, the maximum principle (when guaranteed) and
/// conservation of the mean, all to [`MONOTONE_TOL`].
pub fn monotone_stats(traj: &Trajectory) -> MonotoneReport {
    let s = &traj.snapshots;
    let first = s[0];
    let (_, l2_worst) = violations(s.iter().map(|x| x.l2));
    let maxabs_excess = s.iter().map(|x| x.maxabs - first.maxabs).fold(0.0, f64::max);
    let mean_drift = s.iter().map(|x| (x.mean - first.mean).abs()).fold(0.0, f64::max);
    let scale = first.mean.abs().max(first.maxabs);
    let mean_drift_relative = if scale > 0.0 { mean_drift / scale } else { mean_drift };
    let l2_pass = l2_worst <= MONOTONE_TOL;
    let checked = traj.max_principle_guaranteed;
    let max_principle_pass = !checked || maxabs_excess <= MONOTONE_TOL;
    let conservation_pass = mean_drift_relative <= MONOTONE_TOL;
    MonotoneReport {
        l2_worst_increase: l2_worst,
        maxabs_worst_excess: maxabs_excess,
        max_principle_checked: checked,
        mean_drift,
        mean_drift_relative,
        l2_pass,
        max_principle_pass,
        conservation_pass,
        verdict: Verdict::from_bool(l2_pass && max_principle_pass && conservation_pass),
    }
}
