//! Engquist-Osher flux for polynomial fluxes.
//!
//! `F(a, b) = f(0) + G+(a) + G-(b)` with `G±(u) = ∫_0^u max/min(f', 0)`.
//! Between consecutive real roots of `f'` the sign of `f'` is fixed, so each
//! piece integrates exactly to `max(f(q) - f(p), 0)` or `min(f(q) - f(p), 0)`.

use crate::error::{Error, Result};
use crate::model::Model;
use crate::poly::Poly;

#[derive(Debug, Clone)]
pub struct EoFlux {
    flux: Poly,
    f0: f64,
    /// Real roots of `f'`, ascending.
    critical: Vec<f64>,
}

impl EoFlux {
    pub fn new(flux: &Poly) -> Self {
        let critical = flux.derivative().real_roots();
        EoFlux { flux: flux.clone(), f0: flux.eval(0.0), critical }
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    /// `(G+(u), G-(u))`.
    #[inline]
    pub fn split(&self, u: f64) -> (f64, f64) {
        let (lo, hi, sign) = if u >= 0.0 { (0.0, u, 1.0) } else { (u, 0.0, -1.0) };
        let mut gp = 0.0;
        let mut gm = 0.0;
        let mut fp = self.flux.eval(lo);
        for &c in self.critical.iter().filter(|&&c| c > lo && c < hi) {
            let fc = self.flux.eval(c);
            let df = fc - fp;
            gp += df.max(0.0);
            gm += df.min(0.0);
            fp = fc;
        }
        let df = self.flux.eval(hi) - fp;
        gp += df.max(0.0);
        gm += df.min(0.0);
        (sign * gp, sign * gm)
    }

    #[inline]
    pub fn eval(&self, a: f64, b: f64) -> f64 {
        self.f0 + self.split(a).0 + self.split(b).1
    }
}

/// Engquist-Osher numerical flux along `axis`; both states must lie in `[-M, M]`.
pub fn numerical_flux(model: &Model, u_left: f64, u_right: f64, axis: usize) -> Result<f64> {
    let m = model.state_bound();
    for u in [u_left, u_right] {
        if !(u.abs() <= m) {
            return Err(Error::OutOfBound { u, bound: m });
        }
    }
    if axis >= model.dims() {
        return Err(Error::DimensionMismatch { expected: model.dims(), got: axis + 1 });
    }
    Ok(EoFlux::new(model.flux(axis)).eval(u_left, u_right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::gallery;

    #[test]
    fn burgers_closed_forms() {
        let m = gallery::burgers_1d(1.0);
        assert_eq!(numerical_flux(&m, -1.0, 1.0, 0).unwrap(), 0.0);
        assert_eq!(numerical_flux(&m, 1.0, -1.0, 0).unwrap(), 1.0);
        assert!(matches!(numerical_flux(&m, 1.5, 0.0, 0), Err(Error::OutOfBound { .. })));
    }

    #[test]
    fn consistency_for_nonconvex_flux() {
        // f = u^3 - u has critical points ±1/√3
        let eo = EoFlux::new(&Poly::new(vec![0.0, -1.0, 0.0, 1.0]));
        for u in [-1.2, -0.6, -0.1, 0.0, 0.3, 0.58, 0.9] {
            let f = u * u * u - u;
            assert!((eo.eval(u, u) - f).abs() < 1e-14, "u={u}");
        }
    }

    #[test]
    fn monotone_in_each_argument() {
        let eo = EoFlux::new(&Poly::new(vec![0.1, -1.0, 0.5, 1.0]));
        let grid: Vec<f64> = (0..41).map(|k| -1.0 + 0.05 * k as f64).collect();
        for &a in &grid {
            for w in grid.windows(2) {
                assert!(eo.eval(w[1], a) >= eo.eval(w[0], a) - 1e-14);
                assert!(eo.eval(a, w[1]) <= eo.eval(a, w[0]) + 1e-14);
            }
        }
    }
}
