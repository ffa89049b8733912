//! Explicit monotone finite-volume solver on a periodic super-cell.
//!
//! ```text
//! u_c^{n+1} = u_c^n - dt Σ_i (F_{i+} - F_{i-}) / Δx_i
//!                   + dt Σ_{ij} D²_ij[A_ij(u)]_c + ε dt Δ_h u
//! ```
//!
//! Convection uses the Engquist-Osher flux, `D²_ii` the 3-point second
//! difference and `D²_ij` (`i ≠ j`) the centered cross difference on the four
//! diagonal neighbours.

mod flux;
mod init;

pub use flux::{numerical_flux, EoFlux};
pub use init::{init_field, COMMENSURATE_TOL};

use serde::{Deserialize, Serialize};

use crate::ap::ApSignal;
use crate::error::{Error, Result};
use crate::model::{spectral_radius_psd, Model};

/// Sample count for the maximum of `ρ(A'(u))` over `[-M, M]`.
pub const RHO_SAMPLES: usize = 1025;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpecRaw {
    lengths: Vec<f64>,
    cells: Vec<usize>,
}

/// Periodic grid: `cells[i]` cells of width `lengths[i] / cells[i]` per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpecRaw", into = "GridSpecRaw")]
pub struct GridSpec {
    lengths: Vec<f64>,
    cells: Vec<usize>,
}

impl TryFrom<GridSpecRaw> for GridSpec {
    type Error = Error;
    fn try_from(r: GridSpecRaw) -> Result<Self> {
        GridSpec::new(r.lengths, r.cells)
    }
}

impl From<GridSpec> for GridSpecRaw {
    fn from(g: GridSpec) -> Self {
        GridSpecRaw { lengths: g.lengths, cells: g.cells }
    }
}

impl GridSpec {
    pub fn new(lengths: Vec<f64>, cells: Vec<usize>) -> Result<Self> {
        if lengths.is_empty() || lengths.len() > 2 {
            return Err(Error::InvalidArgument { name: "grid", reason: "1 or 2 axes supported".into() });
        }
        if cells.len() != lengths.len() {
            return Err(Error::DimensionMismatch { expected: lengths.len(), got: cells.len() });
        }
        if lengths.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidArgument { name: "grid.lengths", reason: "must be positive".into() });
        }
        if cells.iter().any(|&n| n < 4) {
            return Err(Error::InvalidArgument { name: "grid.cells", reason: "need at least 4 cells per axis".into() });
        }
        Ok(GridSpec { lengths, cells })
    }

    /// Same cell count `n` on every axis of a cube of side `l`.
    pub fn uniform(dims: usize, l: f64, n: usize) -> Result<Self> {
        GridSpec::new(vec![l; dims], vec![n; dims])
    }

    pub fn dims(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn dx(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.cells[axis] as f64
    }

    pub fn min_dx(&self) -> f64 {
        (0..self.dims()).map(|i| self.dx(i)).fold(f64::INFINITY, f64::min)
    }

    /// Total number of cells.
    pub fn len(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row-major stride of `axis`.
    fn stride(&self, axis: usize) -> usize {
        self.cells[axis + 1..].iter().product()
    }

    /// Index of the periodic neighbour `offset` cells along `axis`.
    pub fn neighbour(&self, c: usize, axis: usize, offset: isize) -> usize {
        let stride = self.stride(axis);
        let n = self.cells[axis];
        let coord = (c / stride) % n;
        let moved = (coord as isize + offset).rem_euclid(n as isize) as usize;
        c + moved * stride - coord * stride
    }

    /// Cell centre coordinates.
    pub fn centre(&self, c: usize) -> Vec<f64> {
        (0..self.dims())
            .map(|i| {
                let coord = (c / self.stride(i)) % self.cells[i];
                (coord as f64 + 0.5) * self.dx(i)
            })
            .collect()
    }
}

/// Cell averages in row-major order (axis 0 slowest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    grid: GridSpec,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), got: values.len() });
        }
        if let Some(cell) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: 0, cell });
        }
        Ok(Field { grid, values })
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        let n = grid.len();
        Field { grid, values: vec![c; n] }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `I = mean of u²`.
    pub fn mean_square(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64
    }

    /// Grid mean of `|u - c|`.
    pub fn l1_distance_to(&self, c: f64) -> f64 {
        self.values.iter().map(|v| (v - c).abs()).sum::<f64>() / self.values.len() as f64
    }

    /// Periodic shift by `offset` cells along `axis`: `out[c + offset] = self[c]`.
    pub fn shifted(&self, axis: usize, offset: isize) -> Field {
        let mut out = vec![0.0; self.values.len()];
        for (c, &v) in self.values.iter().enumerate() {
            out[self.grid.neighbour(c, axis, offset)] = v;
        }
        Field { grid: self.grid.clone(), values: out }
    }

    /// Mirror `x -> -x` on every axis, mapping cell `j` to `N - 1 - j`.
    pub fn reflected(&self) -> Field {
        let g = &self.grid;
        let mut out = vec![0.0; self.values.len()];
        for (c, &v) in self.values.iter().enumerate() {
            let mut idx = 0;
            for i in 0..g.dims() {
                let coord = (c / g.stride(i)) % g.cells[i];
                idx += (g.cells[i] - 1 - coord) * g.stride(i);
            }
            out[idx] = v;
        }
        Field { grid: g.clone(), values: out }
    }
}

fn default_cfl_c() -> f64 {
    0.4
}
fn default_cfl_d() -> f64 {
    0.25
}
fn default_stride() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub model: Model,
    pub grid: GridSpec,
    #[serde(default = "default_cfl_c")]
    pub cfl_convective: f64,
    #[serde(default = "default_cfl_d")]
    pub cfl_diffusive: f64,
    pub end_time: f64,
    #[serde(default)]
    pub viscosity: f64,
    #[serde(default = "default_stride")]
    pub diagnostic_stride: usize,
    #[serde(default)]
    pub store_fields: bool,
}

impl SolverConfig {
    pub fn new(model: Model, grid: GridSpec, end_time: f64) -> Self {
        SolverConfig {
            model,
            grid,
            cfl_convective: default_cfl_c(),
            cfl_diffusive: default_cfl_d(),
            end_time,
            viscosity: 0.0,
            diagnostic_stride: default_stride(),
            store_fields: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: &str| Err(Error::InvalidArgument { name, reason: reason.into() });
        if self.model.dims() != self.grid.dims() {
            return Err(Error::DimensionMismatch { expected: self.model.dims(), got: self.grid.dims() });
        }
        if !(self.cfl_convective > 0.0 && self.cfl_convective <= 1.0) {
            return bad("cfl_convective", "must lie in (0, 1]");
        }
        if !(self.cfl_diffusive > 0.0 && self.cfl_diffusive <= 0.5) {
            return bad("cfl_diffusive", "must lie in (0, 0.5]");
        }
        if !(self.end_time >= 0.0 && self.end_time.is_finite()) {
            return bad("end_time", "must be finite and >= 0");
        }
        if !(self.viscosity >= 0.0 && self.viscosity.is_finite()) {
            return bad("viscosity", "must be finite and >= 0");
        }
        if self.diagnostic_stride == 0 {
            return bad("diagnostic_stride", "must be >= 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub mean: f64,
    /// Grid mean of `|u - reference_mean|`.
    pub l1_to_mean: f64,
    /// Grid mean of `u²`.
    pub l2: f64,
    pub maxabs: f64,
    pub min: f64,
    pub max: f64,
    /// `½(I_prev - I)` since the previous snapshot.
    pub dissipation_step: f64,
}

impl Snapshot {
    fn of(step: usize, time: f64, f: &Field, reference_mean: f64, prev_l2: Option<f64>) -> Self {
        let l2 = f.mean_square();
        Snapshot {
            step,
            time,
            mean: f.mean(),
            l1_to_mean: f.l1_distance_to(reference_mean),
            l2,
            maxabs: f.max_abs(),
            min: f.min(),
            max: f.max(),
            dissipation_step: prev_l2.map_or(0.0, |p| 0.5 * (p - l2)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub config: SolverConfig,
    /// Constant the `l1_to_mean` series is measured against.
    pub reference_mean: f64,
    pub max_principle_guaranteed: bool,
    /// Nominal step size; only the last step may be shorter.
    pub dt: f64,
    pub steps: usize,
    pub snapshots: Vec<Snapshot>,
    /// Fields at the snapshot times when `store_fields` is set.
    #[serde(skip)]
    pub fields: Vec<Field>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time).collect()
    }

    pub fn initial(&self) -> &Snapshot {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory has an initial snapshot")
    }
}

/// Precomputed stencil data for one model on one grid.
#[derive(Debug, Clone)]
pub struct Solver {
    config: SolverConfig,
    eo: Vec<EoFlux>,
    max_speed: Vec<f64>,
    max_rho: f64,
    /// `(i, j)` pairs with a nonzero primitive, `i <= j`.
    diffusion_pairs: Vec<(usize, usize)>,
    plus: Vec<Vec<usize>>,
    minus: Vec<Vec<usize>>,
}

impl Solver {
    pub fn new(config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let model = &config.model;
        let grid = &config.grid;
        let d = model.dims();
        let m = model.state_bound();
        let eo = (0..d).map(|i| EoFlux::new(model.flux(i))).collect();
        let max_speed = (0..d).map(|i| model.speed(i).max_abs_on(-m, m)).collect();
        let max_rho = if model.has_diffusion() {
            (0..RHO_SAMPLES)
                .map(|k| {
                    let u = -m + 2.0 * m * k as f64 / (RHO_SAMPLES - 1) as f64;
                    spectral_radius_psd(&model.diffusivity_at(u))
                })
                .fold(0.0, f64::max)
        } else {
            0.0
        };
        let mut diffusion_pairs = Vec::new();
        for i in 0..d {
            for j in i..d {
                if !model.diffusion_primitive(i, j).is_zero() {
                    diffusion_pairs.push((i, j));
                }
            }
        }
        let plus = (0..d).map(|i| (0..grid.len()).map(|c| grid.neighbour(c, i, 1)).collect()).collect();
        let minus = (0..d).map(|i| (0..grid.len()).map(|c| grid.neighbour(c, i, -1)).collect()).collect();
        Ok(Solver { config, eo, max_speed, max_rho, diffusion_pairs, plus, minus })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn model(&self) -> &Model {
        &self.config.model
    }

    pub fn grid(&self) -> &GridSpec {
        &self.config.grid
    }

    /// `max_u |a_i(u)|` over `[-M, M]`.
    pub fn max_speed(&self, axis: usize) -> f64 {
        self.max_speed[axis]
    }

    /// Sampled `max_u ρ(A'(u))` over `[-M, M]`.
    pub fn max_diffusivity(&self) -> f64 {
        self.max_rho
    }

    /// CFL step: the minimum over axes of the convective and diffusive bounds,
    /// or `end_time` when neither constrains the step.
    pub fn stable_dt(&self) -> f64 {
        let c = &self.config;
        let d = c.grid.dims() as f64;
        let mut dt = f64::INFINITY;
        for i in 0..c.grid.dims() {
            let dx = c.grid.dx(i);
            if self.max_speed[i] > 0.0 {
                dt = dt.min(c.cfl_convective * dx / self.max_speed[i]);
            }
            let diff = 2.0 * d * self.max_rho + 2.0 * d * c.viscosity;
            if diff > 0.0 {
                dt = dt.min(c.cfl_diffusive * dx * dx / diff);
            }
        }
        if dt.is_finite() {
            dt
        } else {
            c.end_time
        }
    }

    /// One explicit update of `field` by `dt`.
    pub fn step(&self, field: &Field, dt: f64) -> Result<Field> {
        self.step_indexed(field, dt, 0)
    }

    fn step_indexed(&self, field: &Field, dt: f64, index: usize) -> Result<Field> {
        if field.grid() != self.grid() {
            return Err(Error::GridMismatch);
        }
        let bound = self.stable_dt();
        if !(dt >= 0.0) || dt > bound * (1.0 + 1e-12) {
            return Err(Error::StepTooLarge { dt, bound });
        }
        let grid = self.grid();
        let model = self.model();
        let u = field.values();
        let n = u.len();
        let mut next = u.to_vec();

        for (i, eo) in self.eo.iter().enumerate() {
            if model.flux(i).degree().map_or(true, |deg| deg == 0) {
                continue;
            }
            let split: Vec<(f64, f64)> = u.iter().map(|&v| eo.split(v)).collect();
            // face c+1/2 between c and plus[c]
            let faces: Vec<f64> =
                (0..n).map(|c| eo.f0() + split[c].0 + split[self.plus[i][c]].1).collect();
            let lam = dt / grid.dx(i);
            for c in 0..n {
                next[c] -= lam * (faces[c] - faces[self.minus[i][c]]);
            }
        }

        for &(i, j) in &self.diffusion_pairs {
            let prim = model.diffusion_primitive(i, j);
            let a: Vec<f64> = u.iter().map(|&v| prim.eval(v)).collect();
            if i == j {
                let h = dt / (grid.dx(i) * grid.dx(i));
                for c in 0..n {
                    next[c] += h * (a[self.plus[i][c]] - 2.0 * a[c] + a[self.minus[i][c]]);
                }
            } else {
                // A_ij and A_ji together
                let h = 2.0 * dt / (4.0 * grid.dx(i) * grid.dx(j));
                let (pi, mi, pj, mj) = (&self.plus[i], &self.minus[i], &self.plus[j], &self.minus[j]);
                for c in 0..n {
                    let s = a[pj[pi[c]]] - a[mj[pi[c]]] - a[pj[mi[c]]] + a[mj[mi[c]]];
                    next[c] += h * s;
                }
            }
        }

        let eps = self.config.viscosity;
        if eps > 0.0 {
            for i in 0..grid.dims() {
                let h = eps * dt / (grid.dx(i) * grid.dx(i));
                for c in 0..n {
                    next[c] += h * (u[self.plus[i][c]] - 2.0 * u[c] + u[self.minus[i][c]]);
                }
            }
        }

        if let Some(cell) = next.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: index, cell });
        }
        Ok(Field { grid: grid.clone(), values: next })
    }

    /// Number of steps and nominal step size needed to reach `end_time`.
    pub fn schedule(&self) -> (usize, f64) {
        let t_end = self.config.end_time;
        if t_end == 0.0 {
            return (0, 0.0);
        }
        let dt = self.stable_dt();
        let steps = ((t_end / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        (steps, dt)
    }

    /// Time and step size of step `n` (0-based) under [`Solver::schedule`].
    pub fn step_time(&self, n: usize, steps: usize, dt: f64) -> (f64, f64) {
        let t = n as f64 * dt;
        if n + 1 == steps {
            (t, self.config.end_time - t)
        } else {
            (t, dt)
        }
    }

    pub fn run(&self, initial: &ApSignal) -> Result<Trajectory> {
        let field = init_field(initial, self.grid())?;
        self.run_field_with_mean(field, initial.mean_value().re)
    }

    /// Run from a given field; `l1_to_mean` is measured against its grid mean.
    pub fn run_field(&self, field: Field) -> Result<Trajectory> {
        let mean = field.mean();
        self.run_field_with_mean(field, mean)
    }

    pub fn run_field_with_mean(&self, field: Field, reference_mean: f64) -> Result<Trajectory> {
        if field.grid() != self.grid() {
            return Err(Error::GridMismatch);
        }
        let cfg = &self.config;
        let (steps, dt) = self.schedule();
        let mut snapshots = vec![Snapshot::of(0, 0.0, &field, reference_mean, None)];
        let mut fields = Vec::new();
        if cfg.store_fields {
            fields.push(field.clone());
        }
        let mut u = field;
        for n in 0..steps {
            let (t, h) = self.step_time(n, steps, dt);
            u = self.step_indexed(&u, h, n)?;
            let done = n + 1;
            if done % cfg.diagnostic_stride == 0 || done == steps {
                let time = if done == steps { cfg.end_time } else { t + h };
                let prev = snapshots.last().map(|s| s.l2);
                snapshots.push(Snapshot::of(done, time, &u, reference_mean, prev));
                if cfg.store_fields {
                    fields.push(u.clone());
                }
            }
        }
        Ok(Trajectory {
            config: cfg.clone(),
            reference_mean,
            max_principle_guaranteed: cfg.model.is_diagonal(),
            dt,
            steps,
            snapshots,
            fields,
        })
    }

    /// Final field only, without diagnostics.
    pub fn evolve(&self, field: Field) -> Result<Field> {
        let (steps, dt) = self.schedule();
        let mut u = field;
        for n in 0..steps {
            let (_, h) = self.step_time(n, steps, dt);
            u = self.step_indexed(&u, h, n)?;
        }
        Ok(u)
    }
}

/// Convenience wrapper: validate, build the solver and run.
pub fn run(config: &SolverConfig, initial: &ApSignal) -> Result<Trajectory> {
    Solver::new(config.clone())?.run(initial)
}
