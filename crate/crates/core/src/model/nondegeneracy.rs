//! Numerical evaluation of the non-degeneracy functional
//!
//! ```text
//! ω_δ(ℓ) = sup_{|τ|+|κ|=δ} ∫_{|ξ|≤M} ℓ / (ℓ + |τ + a(ξ)·κ|² + (κᵀA'(ξ)κ)²) dξ
//! ```
//!
//! and a heuristic verdict on whether it tends to zero as `ℓ -> 0+`.
//! The sup is sampled on the ℓ¹-type sphere `|τ| + |κ|₂ = δ` with a
//! deterministic low-discrepancy point set, followed by one local refinement
//! pass around the best sample.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Model;
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::quadrature::GaussLegendre;

const PANEL_ORDER: usize = 8;
const GOLDEN: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub tau: f64,
    pub kappa: Vec<f64>,
}

impl Direction {
    pub fn l1_norm(&self) -> f64 {
        self.tau.abs() + self.kappa.iter().map(|k| k * k).sum::<f64>().sqrt()
    }

    /// Rescaled to `τ² + |κ|² = 1`.
    pub fn unit(&self) -> Direction {
        let n = (self.tau * self.tau + self.kappa.iter().map(|k| k * k).sum::<f64>()).sqrt();
        Direction { tau: self.tau / n, kappa: self.kappa.iter().map(|k| k / n).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OmegaOptions {
    /// Sphere sample count; `None` picks 720 in one space dimension, 4096 in two.
    pub sphere_samples: Option<usize>,
    /// Total Gauss-Legendre nodes in ξ (8-point panels).
    pub xi_quadrature: usize,
    pub refine: bool,
    /// Offsets the low-discrepancy point set.
    pub seed: u64,
}

impl Default for OmegaOptions {
    fn default() -> Self {
        OmegaOptions { sphere_samples: None, xi_quadrature: 4096, refine: true, seed: 0 }
    }
}

impl OmegaOptions {
    pub fn samples_for(&self, dims: usize) -> usize {
        self.sphere_samples.unwrap_or(if dims == 1 { 720 } else { 4096 })
    }
}

/// Symbols `X(ξ) = τ + a(ξ)·κ` and `Y(ξ) = κᵀA'(ξ)κ` as polynomials in ξ.
fn symbols(model: &Model, dir: &Direction) -> (Poly, Poly) {
    let d = model.dims();
    let mut x = Poly::constant(dir.tau);
    let mut y = Poly::zero();
    for i in 0..d {
        x = x.add(&model.speed(i).scale(dir.kappa[i]));
        for j in 0..d {
            y = y.add(&model.diffusivity(i, j).scale(dir.kappa[i] * dir.kappa[j]));
        }
    }
    (x, y)
}

struct InnerRule {
    gl: GaussLegendre,
    uniform_edges: Vec<f64>,
}

impl InnerRule {
    fn new(m: f64, nodes: usize) -> Self {
        let panels = (nodes / PANEL_ORDER).max(1);
        let uniform_edges = (0..=panels).map(|k| -m + 2.0 * m * k as f64 / panels as f64).collect();
        InnerRule { gl: GaussLegendre::new(PANEL_ORDER), uniform_edges }
    }

    /// Integrate `ℓ/(ℓ + X² + Y²)`, splitting panels at the zeros of `X` and `Y`
    /// where the integrand peaks.
    fn integrate(&self, x: &Poly, y: &Poly, ell: f64) -> f64 {
        let (lo, hi) = (self.uniform_edges[0], *self.uniform_edges.last().unwrap());
        let mut edges = self.uniform_edges.clone();
        edges.extend(x.real_roots_in(lo, hi));
        edges.extend(y.real_roots_in(lo, hi));
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
        edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
        let f = |xi: f64| {
            let xv = x.eval(xi);
            let yv = y.eval(xi);
            ell / (ell + xv * xv + yv * yv)
        };
        edges.windows(2).map(|w| self.gl.integrate(w[0], w[1], f)).sum()
    }
}

/// Inner integral at a fixed `(τ, κ)`.
pub fn omega_integral(model: &Model, dir: &Direction, ell: f64, xi_quadrature: usize) -> f64 {
    let rule = InnerRule::new(model.state_bound(), xi_quadrature);
    let (x, y) = symbols(model, dir);
    rule.integrate(&x, &y, ell)
}

fn frac(x: f64) -> f64 {
    x - x.floor()
}

/// Seeded low-discrepancy directions on `|τ| + |κ|₂ = δ`.
pub fn sphere_directions(dims: usize, delta: f64, n: usize, seed: u64) -> Result<Vec<Direction>> {
    let o1 = frac(seed as f64 * GOLDEN);
    let o2 = frac(seed as f64 * std::f64::consts::SQRT_2);
    match dims {
        1 => Ok((0..n).map(|j| direction_1d(delta, 2.0 * PI * (j as f64 + o1) / n as f64)).collect()),
        2 => Ok((0..n)
            .map(|j| {
                let z = 1.0 - 2.0 * frac((j as f64 + 0.5) / n as f64 + o1);
                let polar = z.clamp(-1.0, 1.0).acos();
                let azimuth = 2.0 * PI * frac(j as f64 * GOLDEN + o2);
                direction_2d(delta, polar, azimuth)
            })
            .collect()),
        d => Err(Error::InvalidArgument {
            name: "dims",
            reason: format!("sphere sampling supports 1 or 2 space dimensions, got {d}"),
        }),
    }
}

fn direction_1d(delta: f64, theta: f64) -> Direction {
    let (s, c) = theta.sin_cos();
    let r = c.abs() + s.abs();
    Direction { tau: delta * c / r, kappa: vec![delta * s / r] }
}

fn direction_2d(delta: f64, polar: f64, azimuth: f64) -> Direction {
    let (sp, cp) = polar.sin_cos();
    let (sa, ca) = azimuth.sin_cos();
    let r = cp.abs() + sp.abs();
    Direction { tau: delta * cp / r, kappa: vec![delta * sp * ca / r, delta * sp * sa / r] }
}

/// Sampled sup of the inner integral over the δ-sphere, and the direction attaining it.
pub fn omega_delta(model: &Model, delta: f64, ell: f64, opts: &OmegaOptions) -> Result<(f64, Direction)> {
    if !(delta > 0.0) || !(ell > 0.0) {
        return Err(Error::InvalidArgument { name: "delta/ell", reason: "must be positive".into() });
    }
    let dims = model.dims();
    let n = opts.samples_for(dims).max(1);
    let rule = InnerRule::new(model.state_bound(), opts.xi_quadrature);
    let dirs = sphere_directions(dims, delta, n, opts.seed)?;
    let eval = |dir: &Direction| {
        let (x, y) = symbols(model, dir);
        rule.integrate(&x, &y, ell)
    };
    let values: Vec<f64> = dirs.par_iter().map(eval).collect();
    // fixed-order scan, ties to the lowest index
    let mut best = 0;
    for (k, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = k;
        }
    }
    let mut best_val = values[best];
    let mut best_dir = dirs[best].clone();

    if opts.refine {
        let (v, d) = match dims {
            1 => refine_1d(delta, n, best, opts.seed, &eval),
            _ => refine_2d(delta, n, &best_dir, &eval),
        };
        if v > best_val {
            best_val = v;
            best_dir = d;
        }
    }
    let cap = 2.0 * model.state_bound();
    Ok((best_val.min(cap), best_dir))
}

fn refine_1d<F: Fn(&Direction) -> f64>(delta: f64, n: usize, best: usize, seed: u64, eval: &F) -> (f64, Direction) {
    let o1 = frac(seed as f64 * GOLDEN);
    let h = 2.0 * PI / n as f64;
    let center = h * (best as f64 + o1);
    let (mut a, mut b) = (center - h, center + h);
    let f = |t: f64| eval(&direction_1d(delta, t));
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    (f(t), direction_1d(delta, t))
}

fn refine_2d<F: Fn(&Direction) -> f64>(delta: f64, n: usize, start: &Direction, eval: &F) -> (f64, Direction) {
    let u = start.unit();
    let kn = (u.kappa[0] * u.kappa[0] + u.kappa[1] * u.kappa[1]).sqrt();
    let mut polar = kn.atan2(u.tau);
    let mut azimuth = u.kappa[1].atan2(u.kappa[0]);
    let f = |p: f64, a: f64| eval(&direction_2d(delta, p, a));
    let mut val = f(polar, azimuth);
    let mut step = (4.0 * PI / n as f64).sqrt();
    let mut iters = 0;
    while step > 1e-10 && iters < 400 {
        iters += 1;
        let mut moved = false;
        for (dp, da) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let v = f(polar + dp, azimuth + da);
            if v > val {
                val = v;
                polar += dp;
                azimuth += da;
                moved = true;
                break;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (val, direction_2d(delta, polar, azimuth))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerdictThresholds {
    /// Fraction of `2M` below which the final ω counts as vanished.
    pub low_fraction: f64,
    /// Fraction of `2M` above which a flat tail counts as degenerate.
    pub high_fraction: f64,
    /// Relative change across the last two ℓ that counts as flat.
    pub flat_tolerance: f64,
    /// Threshold for the zero set in the measure condition.
    pub zero_tolerance: f64,
}

impl Default for VerdictThresholds {
    fn default() -> Self {
        VerdictThresholds { low_fraction: 0.05, high_fraction: 0.5, flat_tolerance: 0.01, zero_tolerance: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DegeneracyVerdict {
    Nondegenerate,
    Degenerate,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSample {
    pub direction: Direction,
    /// Estimated ξ-measure of `{|τ + a(ξ)·κ| < ε₀, κᵀA'(ξ)κ < ε₀}`.
    pub measure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyReport {
    pub model: String,
    pub state_bound: f64,
    pub delta: f64,
    pub ell_schedule: Vec<f64>,
    pub omega_values: Vec<f64>,
    pub argsup: Vec<Direction>,
    pub verdict: DegeneracyVerdict,
    pub thresholds: VerdictThresholds,
    pub measure_condition_samples: Vec<MeasureSample>,
}

/// Midpoint estimate of the zero-set measure at a unit direction.
pub fn zero_set_measure(model: &Model, unit: &Direction, eps_zero: f64, samples: usize) -> f64 {
    let (x, y) = symbols(model, unit);
    let m = model.state_bound();
    let h = 2.0 * m / samples as f64;
    let count = (0..samples)
        .filter(|&j| {
            let xi = -m + (j as f64 + 0.5) * h;
            x.eval(xi).abs() < eps_zero && y.eval(xi) < eps_zero
        })
        .count();
    count as f64 * h
}

pub fn nondegeneracy_verdict(
    model: &Model,
    delta: f64,
    ell_schedule: &[f64],
    thresholds: &VerdictThresholds,
    opts: &OmegaOptions,
) -> Result<DegeneracyReport> {
    if ell_schedule.len() < 3 {
        return Err(Error::InvalidArgument { name: "ell_schedule", reason: "needs at least 3 entries".into() });
    }
    if ell_schedule.iter().any(|&l| !(l > 0.0)) || ell_schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument {
            name: "ell_schedule",
            reason: "must be positive and strictly decreasing".into(),
        });
    }
    let mut omega_values = Vec::with_capacity(ell_schedule.len());
    let mut argsup = Vec::with_capacity(ell_schedule.len());
    for &ell in ell_schedule {
        let (v, d) = omega_delta(model, delta, ell, opts)?;
        omega_values.push(v);
        argsup.push(d);
    }
    let two_m = 2.0 * model.state_bound();
    let last = *omega_values.last().unwrap();
    let prev = omega_values[omega_values.len() - 2];
    let non_increasing = omega_values.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let verdict = if non_increasing && last < thresholds.low_fraction * two_m {
        DegeneracyVerdict::Nondegenerate
    } else if last > thresholds.high_fraction * two_m && (last - prev).abs() < thresholds.flat_tolerance * prev {
        DegeneracyVerdict::Degenerate
    } else {
        DegeneracyVerdict::Inconclusive
    };
    let measure_condition_samples = argsup
        .iter()
        .map(|d| {
            let unit = d.unit();
            let measure = zero_set_measure(model, &unit, thresholds.zero_tolerance, 1 << 16);
            MeasureSample { direction: unit, measure }
        })
        .collect();
    Ok(DegeneracyReport {
        model: model.name().to_string(),
        state_bound: model.state_bound(),
        delta,
        ell_schedule: ell_schedule.to_vec(),
        omega_values,
        argsup,
        verdict,
        thresholds: *thresholds,
        measure_condition_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::gallery;

    #[test]
    fn burgers_inner_integral_closed_form() {
        // ∫_{-1}^{1} ℓ/(ℓ+ξ²) dξ = 2√ℓ·arctan(1/√ℓ)
        let m = gallery::burgers_1d(1.0);
        let ell: f64 = 0.01;
        let dir = Direction { tau: 0.0, kappa: vec![1.0] };
        let got = omega_integral(&m, &dir, ell, 4096);
        let want = 2.0 * ell.sqrt() * (1.0 / ell.sqrt()).atan();
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        assert!((want - 0.2942256).abs() < 1e-7);
    }

    #[test]
    fn degenerate_directions_saturate() {
        let opts = OmegaOptions::default();
        for c in [1.0, -2.0, 0.5] {
            let m = gallery::linear_advection_1d(c, 1.0);
            let delta = 0.7;
            let dir = Direction { tau: -c * delta / (c.abs() + 1.0), kappa: vec![delta / (c.abs() + 1.0)] };
            let inner = omega_integral(&m, &dir, 1e-3, 512);
            assert!((inner - 2.0).abs() < 1e-12);
            let (w, _) = omega_delta(&m, delta, 1e-3, &opts).unwrap();
            assert!((w - 2.0).abs() < 1e-9, "c={c}: {w}");
        }
        let z = gallery::zero_1d(1.0);
        let (w, _) = omega_delta(&z, 0.3, 1e-4, &opts).unwrap();
        assert!((w - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sphere_points_have_l1_norm_delta() {
        for dims in [1, 2] {
            for d in sphere_directions(dims, 0.5, 100, 3).unwrap() {
                assert!((d.l1_norm() - 0.5).abs() < 1e-14);
            }
        }
        assert!(sphere_directions(3, 1.0, 10, 0).is_err());
    }

    #[test]
    fn schedule_validation() {
        let m = gallery::burgers_1d(1.0);
        let t = VerdictThresholds::default();
        let o = OmegaOptions::default();
        assert!(nondegeneracy_verdict(&m, 1.0, &[1e-1, 1e-2], &t, &o).is_err());
        assert!(nondegeneracy_verdict(&m, 1.0, &[1e-1, 1e-2, 1e-2], &t, &o).is_err());
    }

    #[test]
    fn zero_set_measure_of_advection() {
        let m = gallery::linear_advection_1d(1.0, 1.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let meas = zero_set_measure(&m, &Direction { tau: -s, kappa: vec![s] }, 1e-6, 1 << 12);
        assert!((meas - 2.0).abs() < 1e-12);
        let b = gallery::burgers_1d(1.0);
        let meas = zero_set_measure(&b, &Direction { tau: 0.0, kappa: vec![1.0] }, 1e-6, 1 << 16);
        assert!(meas < 1e-4);
    }
}
