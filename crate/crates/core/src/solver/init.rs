//! Exact cell averages of lattice-commensurate trigonometric polynomials.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Field, GridSpec};
use crate::ap::ApSignal;
use crate::error::{Error, Result};

/// Relative tolerance for `λ L` to count as an integer.
pub const COMMENSURATE_TOL: f64 = 1e-9;
/// Reality tolerance relative to the total amplitude.
pub const REALITY_TOL: f64 = 1e-12;

/// Per-axis cell-average factors of `e^{2πikx/L}`, one per cell.
///
/// The average over `[jΔx, (j+1)Δx]` is `e^{2πikj/N} (e^{2πik/N} - 1) / (2πik/N)`.
/// The phase `kj mod N` is reduced in integer arithmetic so large `k` and `j`
/// lose no accuracy.
fn axis_factors(k: i64, n: usize) -> Vec<Complex64> {
    if k == 0 {
        return vec![Complex64::new(1.0, 0.0); n];
    }
    let ni = n as i64;
    let r = k.rem_euclid(ni);
    if r == 0 {
        // the mode completes whole periods inside every cell
        return vec![Complex64::new(0.0, 0.0); n];
    }
    let theta = 2.0 * PI * k as f64 / n as f64;
    let (s, c) = theta.sin_cos();
    let shape = Complex64::new(c - 1.0, s) / Complex64::new(0.0, theta);
    (0..n)
        .map(|j| {
            let ph = (r as i128 * j as i128).rem_euclid(ni as i128) as f64;
            let (s, c) = (2.0 * PI * ph / n as f64).sin_cos();
            Complex64::new(c, s) * shape
        })
        .collect()
}

/// Cell averages of a real, lattice-commensurate signal.
pub fn init_field(sig: &ApSignal, grid: &GridSpec) -> Result<Field> {
    let d = grid.dims();
    if sig.dims() != d {
        return Err(Error::DimensionMismatch { expected: d, got: sig.dims() });
    }
    sig.require_real(REALITY_TOL)?;
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (freq, amp) in sig.terms() {
        let mut ks = Vec::with_capacity(d);
        for (axis, (&lam, &len)) in freq.iter().zip(grid.lengths()).enumerate() {
            let x = lam * len;
            let k = x.round();
            if (x - k).abs() > COMMENSURATE_TOL * x.abs().max(1.0) {
                return Err(Error::Incommensurate { axis, freq: lam, length: len });
            }
            ks.push(k as i64);
        }
        let cells = grid.cells();
        if d == 1 {
            for (a, f) in acc.iter_mut().zip(axis_factors(ks[0], cells[0])) {
                *a += amp * f;
            }
        } else {
            let fx = axis_factors(ks[0], cells[0]);
            let fy = axis_factors(ks[1], cells[1]);
            for (ix, x) in fx.iter().enumerate() {
                let row = &mut acc[ix * cells[1]..(ix + 1) * cells[1]];
                for (a, y) in row.iter_mut().zip(&fy) {
                    *a += amp * x * y;
                }
            }
        }
    }
    Field::new(grid.clone(), acc.into_iter().map(|z| z.re).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre;

    #[test]
    fn constant_fills_every_cell() {
        let g = GridSpec::new(vec![3.0], vec![16]).unwrap();
        let f = init_field(&ApSignal::constant(1, 0.7), &g).unwrap();
        assert!(f.values().iter().all(|&v| (v - 0.7).abs() < 1e-15));
    }

    #[test]
    fn four_cell_sine_matches_dense_quadrature() {
        let g = GridSpec::new(vec![1.0], vec![4]).unwrap();
        let f = init_field(&ApSignal::sine(vec![1.0], 1.0, 0.0), &g).unwrap();
        let gl = GaussLegendre::new(20);
        for j in 0..4 {
            let (a, b) = (j as f64 / 4.0, (j + 1) as f64 / 4.0);
            let want = gl.integrate(a, b, |x| (2.0 * PI * x).sin()) * 4.0;
            assert!((f.values()[j] - want).abs() < 1e-14, "cell {j}");
        }
        assert!((f.values()[0] - 2.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn sine_mean_vanishes() {
        for n in [4, 7, 64, 333] {
            let g = GridSpec::new(vec![2.5], vec![n]).unwrap();
            let f = init_field(&ApSignal::sine(vec![0.4], 1.3, 0.2), &g).unwrap();
            assert!(f.mean().abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn two_d_product_mode() {
        let g = GridSpec::new(vec![1.0, 2.0], vec![8, 6]).unwrap();
        let sig = ApSignal::cosine(vec![1.0, 0.5], 0.8, 0.0);
        let f = init_field(&sig, &g).unwrap();
        let gl = GaussLegendre::new(16);
        for ix in 0..8 {
            for iy in 0..6 {
                let (x0, y0) = (ix as f64 / 8.0, iy as f64 / 3.0);
                let want = gl.integrate(x0, x0 + 0.125, |x| {
                    gl.integrate(y0, y0 + 1.0 / 3.0, |y| 0.8 * (2.0 * PI * (x + 0.5 * y)).cos())
                }) / (0.125 / 3.0);
                assert!((f.values()[ix * 6 + iy] - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn errors() {
        let g = GridSpec::new(vec![1.0], vec![8]).unwrap();
        let err = init_field(&ApSignal::sine(vec![2f64.sqrt()], 1.0, 0.0), &g).unwrap_err();
        assert!(matches!(err, Error::Incommensurate { axis: 0, .. }));
        let cplx = ApSignal::mode(vec![1.0], Complex64::new(1.0, 0.0));
        assert!(matches!(init_field(&cplx, &g), Err(Error::NotReal { .. })));
    }
}
