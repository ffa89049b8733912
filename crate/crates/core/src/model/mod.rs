//! Constitutive data of `u_t + div f(u) = D^2 : A(u)`: polynomial fluxes,
//! diffusion primitives `A_ij` and their square-root factors `sigma_ik`.

pub mod gallery;
pub mod nondegeneracy;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Poly;

pub use nondegeneracy::{
    nondegeneracy_verdict, omega_delta, omega_integral, sphere_directions, zero_set_measure, DegeneracyReport, DegeneracyVerdict,
    Direction, MeasureSample, OmegaOptions, VerdictThresholds,
};

/// Sample count used to check `sigma sigma^T = A'` and positivity.
pub const VALIDATION_SAMPLES: usize = 1024;
pub const SYMMETRY_TOL: f64 = 1e-12;
pub const SQRT_TOL: f64 = 1e-8;
pub const PSD_TOL: f64 = 1e-10;

/// Unvalidated model description, matching the JSON model files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub dims: usize,
    pub flux: Vec<Poly>,
    #[serde(rename = "A")]
    pub diffusion: Vec<Vec<Poly>>,
    pub sigma: Vec<Vec<Poly>>,
    #[serde(rename = "M")]
    pub state_bound: f64,
    #[serde(default)]
    pub name: String,
}

/// A validated model with its derived polynomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelSpec", into = "ModelSpec")]
pub struct Model {
    spec: ModelSpec,
    /// `a_i = f_i'`
    speeds: Vec<Poly>,
    /// `a_ij = A_ij'`
    diffusivity: Vec<Vec<Poly>>,
    /// `beta_ik = ∫_0^u sigma_ik`
    beta: Vec<Vec<Poly>>,
    diagonal: bool,
    has_diffusion: bool,
}

impl TryFrom<ModelSpec> for Model {
    type Error = Error;
    fn try_from(spec: ModelSpec) -> Result<Self> {
        validate(spec)
    }
}

impl From<Model> for ModelSpec {
    fn from(m: Model) -> Self {
        m.spec
    }
}

fn shape_error(reason: String) -> Error {
    Error::InvalidArgument { name: "model", reason }
}

/// Check every model invariant and cache the derived polynomials.
pub fn validate(spec: ModelSpec) -> Result<Model> {
    let d = spec.dims;
    if d == 0 {
        return Err(shape_error("dims must be positive".into()));
    }
    if spec.flux.len() != d {
        return Err(shape_error(format!("expected {d} flux components, got {}", spec.flux.len())));
    }
    for (label, mat) in [("A", &spec.diffusion), ("sigma", &spec.sigma)] {
        if mat.len() != d || mat.iter().any(|row| row.len() != d) {
            return Err(shape_error(format!("{label} must be a {d}x{d} matrix of polynomials")));
        }
    }
    if !(spec.state_bound > 0.0) || !spec.state_bound.is_finite() {
        return Err(shape_error(format!("state bound M = {} must be positive", spec.state_bound)));
    }
    let all_finite = spec
        .flux
        .iter()
        .chain(spec.diffusion.iter().flatten())
        .chain(spec.sigma.iter().flatten())
        .all(|p| p.coeffs().iter().all(|c| c.is_finite()));
    if !all_finite {
        return Err(shape_error("non-finite polynomial coefficient".into()));
    }

    for i in 0..d {
        for j in i + 1..d {
            let diff = spec.diffusion[i][j].max_coeff_diff(&spec.diffusion[j][i]);
            if diff > SYMMETRY_TOL {
                return Err(Error::NotSymmetric { i, j, diff });
            }
        }
    }

    let diffusivity: Vec<Vec<Poly>> = spec
        .diffusion
        .iter()
        .map(|row| row.iter().map(Poly::derivative).collect())
        .collect();
    let m = spec.state_bound;
    let samples: Vec<f64> = (0..VALIDATION_SAMPLES)
        .map(|k| -m + 2.0 * m * k as f64 / (VALIDATION_SAMPLES - 1) as f64)
        .collect();

    for &u in &samples {
        let mat = eval_matrix(&diffusivity, u);
        let (lmin, idx) = min_eigenvalue(&mat);
        if lmin < -PSD_TOL {
            return Err(Error::NotPsd { i: idx, j: idx, u, eigenvalue: lmin });
        }
    }
    for &u in &samples {
        let a = eval_matrix(&diffusivity, u);
        let s = eval_matrix(&spec.sigma, u);
        for i in 0..d {
            for j in 0..d {
                let ss: f64 = (0..d).map(|k| s[i][k] * s[j][k]).sum();
                let residual = (ss - a[i][j]).abs();
                if residual > SQRT_TOL {
                    return Err(Error::SqrtMismatch { i, j, u, residual });
                }
            }
        }
    }

    let speeds = spec.flux.iter().map(Poly::derivative).collect();
    let beta = spec
        .sigma
        .iter()
        .map(|row| row.iter().map(Poly::antiderivative).collect())
        .collect();
    let diagonal = (0..d).all(|i| (0..d).all(|j| i == j || spec.diffusion[i][j].is_zero()));
    let has_diffusion = diffusivity.iter().flatten().any(|p| !p.is_zero());
    Ok(Model { spec, speeds, diffusivity, beta, diagonal, has_diffusion })
}

fn eval_matrix(m: &[Vec<Poly>], u: f64) -> Vec<Vec<f64>> {
    m.iter().map(|row| row.iter().map(|p| p.eval(u)).collect()).collect()
}

/// Smallest eigenvalue of a small symmetric matrix (cyclic Jacobi), together
/// with the index of the smallest diagonal entry of the input for reporting.
fn min_eigenvalue(mat: &[Vec<f64>]) -> (f64, usize) {
    let n = mat.len();
    let idx = (0..n)
        .min_by(|&a, &b| mat[a][a].partial_cmp(&mat[b][b]).unwrap())
        .unwrap_or(0);
    let mut a: Vec<Vec<f64>> = mat.to_vec();
    for _sweep in 0..50 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let lmin = (0..n).map(|i| a[i][i]).fold(f64::INFINITY, f64::min);
    (lmin, idx)
}

/// Largest eigenvalue of a symmetric matrix.
pub(crate) fn spectral_radius_psd(mat: &[Vec<f64>]) -> f64 {
    match mat.len() {
        1 => mat[0][0].abs(),
        2 => {
            let (a, b, d) = (mat[0][0], mat[0][1], mat[1][1]);
            let half_tr = 0.5 * (a + d);
            let disc = (0.25 * (a - d) * (a - d) + b * b).sqrt();
            (half_tr + disc).abs().max((half_tr - disc).abs())
        }
        _ => {
            let neg: Vec<Vec<f64>> = mat.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
            (-min_eigenvalue(&neg).0).max(min_eigenvalue(mat).0.abs())
        }
    }
}

impl Model {
    pub fn new(spec: ModelSpec) -> Result<Self> {
        validate(spec)
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn dims(&self) -> usize {
        self.spec.dims
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    /// `M`, the bound on `|u|`.
    pub fn state_bound(&self) -> f64 {
        self.spec.state_bound
    }

    pub fn flux(&self, axis: usize) -> &Poly {
        &self.spec.flux[axis]
    }

    pub fn speed(&self, axis: usize) -> &Poly {
        &self.speeds[axis]
    }

    pub fn diffusion_primitive(&self, i: usize, j: usize) -> &Poly {
        &self.spec.diffusion[i][j]
    }

    pub fn diffusivity(&self, i: usize, j: usize) -> &Poly {
        &self.diffusivity[i][j]
    }

    /// True when every off-diagonal `A_ij` vanishes.
    pub fn is_diagonal(&self) -> bool {
        self.diagonal
    }

    pub fn has_diffusion(&self) -> bool {
        self.has_diffusion
    }

    /// `A'(u)` as a dense matrix.
    pub fn diffusivity_at(&self, u: f64) -> Vec<Vec<f64>> {
        eval_matrix(&self.diffusivity, u)
    }

    /// `beta_ik(u) = ∫_0^u sigma_ik(v) dv`.
    pub fn beta(&self, i: usize, k: usize, u: f64) -> Result<f64> {
        let m = self.state_bound();
        if u.abs() > m {
            return Err(Error::OutOfBound { u, bound: m });
        }
        if i >= self.dims() || k >= self.dims() {
            return Err(Error::InvalidArgument {
                name: "index",
                reason: format!("({i},{k}) outside {}x{}", self.dims(), self.dims()),
            });
        }
        Ok(self.beta[i][k].eval(u))
    }

    /// Mirror model `f -> -f`, the flux of the equation under `x -> -x`.
    pub fn reflected(&self) -> Model {
        let mut spec = self.spec.clone();
        spec.flux = spec.flux.iter().map(|p| p.scale(-1.0)).collect();
        spec.name = format!("{}-reflected", spec.name);
        validate(spec).expect("reflection preserves validity")
    }
}

/// Square-root factors for a diagonal `A'` whose entries are monomials
/// `c u^(2m)` with `c >= 0`: `sigma_ii = sqrt(c) u^m`.
pub fn sigma_from_diagonal(diffusivity_diag: &[Poly]) -> Result<Vec<Vec<Poly>>> {
    let d = diffusivity_diag.len();
    let mut sigma = vec![vec![Poly::zero(); d]; d];
    for (i, p) in diffusivity_diag.iter().enumerate() {
        if p.is_zero() {
            continue;
        }
        let nz: Vec<(usize, f64)> = p
            .coeffs()
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, c)| c != 0.0)
            .collect();
        match nz.as_slice() {
            [(k, c)] if k % 2 == 0 && *c > 0.0 => {
                sigma[i][i] = Poly::monomial(c.sqrt(), k / 2);
            }
            _ => {
                return Err(Error::InvalidArgument {
                    name: "diffusivity",
                    reason: format!("entry {i} is not a nonnegative even monomial"),
                })
            }
        }
    }
    Ok(sigma)
}
