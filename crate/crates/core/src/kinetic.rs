//! Kinetic formulation: the function `χ(ξ; u)`, its moment identities, the
//! L² dissipation budget and probes of the multiplier
//! `m(ξ) = 1 / (√ℓ + i(τ + a(ξ)·κ) + κᵀA'(ξ)κ)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Direction, Model};
use crate::quadrature::trapezoid;
use crate::solver::{Field, Trajectory};

pub const DEFAULT_XI_NODES: usize = 1024;
/// Floor below which a negative per-step dissipation counts as roundoff.
pub const DISSIPATION_FLOOR: f64 = 1e-12;

/// `1` for `0 < ξ < u`, `-1` for `u < ξ < 0`, `0` otherwise.
pub fn chi(xi: f64, u: f64) -> i8 {
    if 0.0 < xi && xi < u {
        1
    } else if u < xi && xi < 0.0 {
        -1
    } else {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiMoments {
    /// `max_c |∫χ dξ - u_c|`
    pub zeroth: f64,
    /// `max_c |∫ξχ dξ - u_c²/2|`
    pub first: f64,
    /// `2M/K`
    pub bound: f64,
    pub nodes: usize,
}

impl ChiMoments {
    pub fn within_bound(&self) -> bool {
        self.zeroth <= self.bound && self.first <= self.bound
    }
}

/// Trapezoid moments of `χ(·; u)` on `nodes` uniform points spanning `[-M, M]`.
///
/// For even `nodes` the origin falls between two nodes and only the jump at
/// `ξ = u` contributes, so the zeroth-moment error is at most `M/(K-1)` and the
/// first-moment error about `|u| M/(K-1)`.
pub fn chi_moment_check(values: &[f64], m: f64, nodes: usize) -> Result<ChiMoments> {
    if nodes < 64 {
        return Err(Error::InvalidArgument { name: "nodes", reason: format!("need at least 64, got {nodes}") });
    }
    if !(m > 0.0) {
        return Err(Error::InvalidArgument { name: "M", reason: "must be positive".into() });
    }
    if let Some(&u) = values.iter().find(|u| !(u.abs() <= m)) {
        return Err(Error::OutOfBound { u, bound: m });
    }
    let (zeroth, first) = values
        .par_iter()
        .map(|&u| {
            let z = trapezoid(-m, m, nodes, |xi| chi(xi, u) as f64);
            let f = trapezoid(-m, m, nodes, |xi| xi * chi(xi, u) as f64);
            ((z - u).abs(), (f - 0.5 * u * u).abs())
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    Ok(ChiMoments { zeroth, first, bound: 2.0 * m / nodes as f64, nodes })
}

/// [`chi_moment_check`] on a field.
pub fn chi_moment_check_field(field: &Field, m: f64, nodes: usize) -> Result<ChiMoments> {
    chi_moment_check(field.values(), m, nodes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KineticDiagnostics {
    pub xi_nodes: usize,
    /// χ moment residuals per stored field (empty when fields were not stored).
    pub chi_residuals: Vec<ChiMoments>,
    /// `½(I(t_n) - I(t_{n+1}))` between consecutive snapshots.
    pub dissipation_per_step: Vec<f64>,
    /// Sum of the per-step terms.
    pub cumulative_budget: f64,
    /// `½(I(0) - I(T))` from the end points.
    pub budget_identity: f64,
    /// `½(I(0) - I(T))` recomputed from stored fields, when present.
    pub budget_from_fields: Option<f64>,
    /// `½M²`
    pub bound: f64,
    pub min_step: f64,
    pub nonnegative: bool,
    pub within_bound: bool,
}

pub fn dissipation_budget(traj: &Trajectory, xi_nodes: usize) -> Result<KineticDiagnostics> {
    let s = &traj.snapshots;
    let m = traj.config.model.state_bound();
    let dissipation_per_step: Vec<f64> = s.windows(2).map(|w| 0.5 * (w[0].l2 - w[1].l2)).collect();
    let cumulative_budget: f64 = dissipation_per_step.iter().sum();
    let budget_identity = 0.5 * (s[0].l2 - s[s.len() - 1].l2);
    let budget_from_fields = match (traj.fields.first(), traj.fields.last()) {
        (Some(a), Some(b)) if traj.fields.len() == s.len() => Some(0.5 * (a.mean_square() - b.mean_square())),
        _ => None,
    };
    let chi_residuals = traj
        .fields
        .iter()
        .map(|f| chi_moment_check_field(f, m.max(f.max_abs()), xi_nodes))
        .collect::<Result<Vec<_>>>()?;
    let min_step = dissipation_per_step.iter().copied().fold(0.0, f64::min);
    let bound = 0.5 * m * m;
    Ok(KineticDiagnostics {
        xi_nodes,
        chi_residuals,
        dissipation_per_step,
        cumulative_budget,
        budget_identity,
        budget_from_fields,
        bound,
        min_step,
        nonnegative: min_step >= -DISSIPATION_FLOOR,
        within_bound: cumulative_budget <= bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierProbe {
    pub tau: f64,
    pub kappa: Vec<f64>,
    pub ell: f64,
    pub sup_m: f64,
    pub int_m2: f64,
}

/// `sup |m|` on the ξ grid and the trapezoid integral of `|m|²` over `[-M, M]`.
pub fn multiplier_probe(model: &Model, tau: f64, kappa: &[f64], ell: f64, nodes: usize) -> Result<MultiplierProbe> {
    if !(ell > 0.0) {
        return Err(Error::InvalidArgument { name: "ell", reason: "must be positive".into() });
    }
    let d = model.dims();
    if kappa.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: kappa.len() });
    }
    if nodes < 2 {
        return Err(Error::InvalidArgument { name: "nodes", reason: "need at least 2".into() });
    }
    let m = model.state_bound();
    let root = ell.sqrt();
    let abs2 = |xi: f64| {
        let mut x = tau;
        let mut y = 0.0;
        for i in 0..d {
            x += model.speed(i).eval(xi) * kappa[i];
            for j in 0..d {
                y += kappa[i] * model.diffusivity(i, j).eval(xi) * kappa[j];
            }
        }
        1.0 / ((root + y) * (root + y) + x * x)
    };
    let h = 2.0 * m / (nodes - 1) as f64;
    let sup2 = (0..nodes).map(|j| abs2(-m + h * j as f64)).fold(0.0, f64::max);
    Ok(MultiplierProbe {
        tau,
        kappa: kappa.to_vec(),
        ell,
        sup_m: sup2.sqrt(),
        int_m2: trapezoid(-m, m, nodes, abs2),
    })
}

/// Probes over a batch of directions, in input order.
pub fn probe_sweep(model: &Model, dirs: &[Direction], ell: f64, nodes: usize) -> Result<Vec<MultiplierProbe>> {
    dirs.par_iter().map(|d| multiplier_probe(model, d.tau, &d.kappa, ell, nodes)).collect()
}

/// `φ_B(t)`: 1 on `|t| <= B`, linear down to 0 at `|t| = 2B`.
pub fn time_truncation(b: f64, t: f64) -> f64 {
    let a = t.abs();
    if a <= b {
        1.0
    } else if a <= 2.0 * b {
        (2.0 * b - a) / b
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::gallery;

    #[test]
    fn chi_values() {
        assert_eq!(chi(1.0, 2.0), 1);
        assert_eq!(chi(-0.5, -1.0), -1);
        assert_eq!(chi(3.0, 2.0), 0);
        assert_eq!(chi(0.0, 1.0), 0);
    }

    #[test]
    fn moments_of_simple_states() {
        let z = chi_moment_check(&[0.0; 5], 1.0, 64).unwrap();
        assert_eq!((z.zeroth, z.first), (0.0, 0.0));
        // ∫χ(ξ;2) = 2 and ∫ξχ(ξ;2) = 2, approached as the grid is refined
        let coarse = chi_moment_check(&[2.0], 2.0, 1024).unwrap();
        let fine = chi_moment_check(&[2.0], 2.0, 1 << 16).unwrap();
        assert!(fine.zeroth < coarse.zeroth && fine.first < coarse.first);
        assert!(fine.zeroth < 1e-4 && fine.first < 1e-4);
        assert!(chi_moment_check(&[0.5], 1.0, 32).is_err());
        assert!(chi_moment_check(&[1.5], 1.0, 128).is_err());
    }

    #[test]
    fn multiplier_at_origin() {
        let m = gallery::burgers_1d(1.0);
        let p = multiplier_probe(&m, 0.0, &[0.0], 1.0, 101).unwrap();
        assert!((p.sup_m - 1.0).abs() < 1e-15);
        assert!((p.int_m2 - 2.0).abs() < 1e-13);
    }

    #[test]
    fn truncation_values() {
        assert_eq!(time_truncation(1.0, 0.5), 1.0);
        assert_eq!(time_truncation(1.0, 1.5), 0.5);
        assert_eq!(time_truncation(1.0, 3.0), 0.0);
        assert_eq!(time_truncation(1.0, -1.5), 0.5);
    }
}
