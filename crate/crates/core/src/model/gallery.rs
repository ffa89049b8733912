//! Reference models used throughout tests and experiments.

use super::{validate, Model, ModelSpec};
use crate::poly::Poly;

fn one_d(name: &str, flux: Poly, a: Poly, sigma: Poly, m: f64) -> Model {
    validate(ModelSpec {
        dims: 1,
        flux: vec![flux],
        diffusion: vec![vec![a]],
        sigma: vec![vec![sigma]],
        state_bound: m,
        name: name.into(),
    })
    .expect("gallery model is valid")
}

/// `f = u^2/2`, no diffusion.
pub fn burgers_1d(m: f64) -> Model {
    one_d("burgers1d", Poly::new(vec![0.0, 0.0, 0.5]), Poly::zero(), Poly::zero(), m)
}

/// `f = c u`, no diffusion.
pub fn linear_advection_1d(c: f64, m: f64) -> Model {
    one_d("linear-advection1d", Poly::new(vec![0.0, c]), Poly::zero(), Poly::zero(), m)
}

/// `f = 0`, `A = u^3/3`, `sigma = u`.
pub fn degenerate_diffusion_1d(m: f64) -> Model {
    one_d(
        "degenerate-diffusion1d",
        Poly::zero(),
        Poly::new(vec![0.0, 0.0, 0.0, 1.0 / 3.0]),
        Poly::new(vec![0.0, 1.0]),
        m,
    )
}

/// `f = 0`, `A = 0`.
pub fn zero_1d(m: f64) -> Model {
    one_d("zero1d", Poly::zero(), Poly::zero(), Poly::zero(), m)
}

/// `f = (u^2/2, 0)`, `A = diag(0, u^3/3)`: hyperbolic along x, degenerate parabolic along y.
pub fn anisotropic_2d(m: f64) -> Model {
    let z = Poly::zero();
    validate(ModelSpec {
        dims: 2,
        flux: vec![Poly::new(vec![0.0, 0.0, 0.5]), z.clone()],
        diffusion: vec![
            vec![z.clone(), z.clone()],
            vec![z.clone(), Poly::new(vec![0.0, 0.0, 0.0, 1.0 / 3.0])],
        ],
        sigma: vec![vec![z.clone(), z.clone()], vec![z.clone(), Poly::new(vec![0.0, 1.0])]],
        state_bound: m,
        name: "anisotropic2d".into(),
    })
    .expect("gallery model is valid")
}

/// `f = (u^2/2, u^2/2)`, `A = [[u, u/2], [u/2, u]]`: full constant-coefficient
/// diffusion with an off-diagonal part.
pub fn mixed_diffusion_2d(m: f64) -> Model {
    let z = Poly::zero();
    let s = 3f64.sqrt() / 2.0;
    validate(ModelSpec {
        dims: 2,
        flux: vec![Poly::new(vec![0.0, 0.0, 0.5]), Poly::new(vec![0.0, 0.0, 0.5])],
        diffusion: vec![
            vec![Poly::new(vec![0.0, 1.0]), Poly::new(vec![0.0, 0.5])],
            vec![Poly::new(vec![0.0, 0.5]), Poly::new(vec![0.0, 1.0])],
        ],
        // Cholesky factor of [[1, 1/2], [1/2, 1]]
        sigma: vec![vec![Poly::constant(1.0), z.clone()], vec![Poly::constant(0.5), Poly::constant(s)]],
        state_bound: m,
        name: "mixed-diffusion2d".into(),
    })
    .expect("gallery model is valid")
}

/// The four models of the acceptance gallery (unit state bound).
pub fn acceptance_gallery() -> Vec<Model> {
    vec![burgers_1d(1.0), linear_advection_1d(1.0, 1.0), degenerate_diffusion_1d(1.0), anisotropic_2d(1.0)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn gallery_validates() {
        for m in acceptance_gallery() {
            assert!(m.is_diagonal(), "{}", m.name());
        }
        assert!(!mixed_diffusion_2d(1.0).is_diagonal());
        zero_1d(1.0);
    }

    #[test]
    fn perturbed_gallery_is_rejected() {
        for m in acceptance_gallery().into_iter().chain([mixed_diffusion_2d(1.0)]) {
            let d = m.dims();
            // flip the sign of A: A' becomes negative wherever it was positive
            let mut spec = m.spec().clone();
            if m.has_diffusion() {
                for row in spec.diffusion.iter_mut() {
                    for p in row.iter_mut() {
                        *p = p.scale(-1.0);
                    }
                }
                assert!(matches!(validate(spec), Err(Error::NotPsd { .. })), "{}", m.name());
            }
            // a nonzero sigma with A = unchanged breaks sigma sigma^T = A'
            let mut spec = m.spec().clone();
            spec.sigma[d - 1][d - 1] = spec.sigma[d - 1][d - 1].add(&Poly::constant(0.5));
            assert!(matches!(validate(spec), Err(Error::SqrtMismatch { .. })), "{}", m.name());
        }
    }
}
