//! Dense real polynomials with coefficients stored in ascending degree.

use serde::{Deserialize, Serialize};

/// Real polynomial `c[0] + c[1] u + c[2] u^2 + ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct Poly(Vec<f64>);

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Poly(coeffs);
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    /// `c * u^k`
    pub fn monomial(c: f64, k: usize) -> Self {
        let mut v = vec![0.0; k + 1];
        v[k] = c;
        Poly::new(v)
    }

    fn trim(&mut self) {
        while matches!(self.0.last(), Some(&c) if c == 0.0) {
            self.0.pop();
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * u + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    /// Antiderivative vanishing at `u = 0`.
    pub fn antiderivative(&self) -> Poly {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(0.0);
        v.extend(self.0.iter().enumerate().map(|(k, &c)| c / (k + 1) as f64));
        Poly::new(v)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        Poly::new(
            (0..n)
                .map(|k| self.0.get(k).unwrap_or(&0.0) + other.0.get(k).unwrap_or(&0.0))
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.0.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Poly::new(v)
    }

    /// Largest absolute coefficient difference, padding the shorter one with zeros.
    pub fn max_coeff_diff(&self, other: &Poly) -> f64 {
        let n = self.0.len().max(other.0.len());
        (0..n)
            .map(|k| (self.0.get(k).unwrap_or(&0.0) - other.0.get(k).unwrap_or(&0.0)).abs())
            .fold(0.0, f64::max)
    }

    /// Real roots in the closed interval `[lo, hi]`, sorted ascending.
    ///
    /// Roots are isolated recursively: the critical points of `p` split the
    /// interval into monotone pieces, each holding at most one simple root,
    /// which is then found by bisection. Even-multiplicity roots show up as
    /// critical points where `p` vanishes to within roundoff.
    pub fn real_roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let deg = match self.degree() {
            None | Some(0) => return Vec::new(),
            Some(d) => d,
        };
        if deg == 1 {
            let r = -self.0[0] / self.0[1];
            return if (lo..=hi).contains(&r) { vec![r] } else { Vec::new() };
        }
        let scale = self.0.iter().fold(0.0f64, |m, c| m.max(c.abs()))
            * (1.0 + lo.abs().max(hi.abs())).powi(deg as i32);
        let touch_tol = 1e-13 * scale;

        let mut knots = vec![lo];
        knots.extend(self.derivative().real_roots_in(lo, hi));
        knots.push(hi);
        knots.dedup_by(|a, b| (*a - *b).abs() <= f64::EPSILON * (1.0 + b.abs()));

        let mut roots: Vec<f64> = Vec::new();
        let push = |r: f64, roots: &mut Vec<f64>| {
            if roots
                .last()
                .map_or(true, |&l| (r - l).abs() > 1e-12 * (1.0 + r.abs()))
            {
                roots.push(r);
            }
        };
        for w in knots.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (fa, fb) = (self.eval(a), self.eval(b));
            if fa.abs() <= touch_tol {
                push(a, &mut roots);
            }
            if fa.abs() > touch_tol && fb.abs() > touch_tol && fa.signum() != fb.signum() {
                push(self.bisect(a, b, fa), &mut roots);
            }
        }
        if let Some(&last) = knots.last() {
            if self.eval(last).abs() <= touch_tol {
                push(last, &mut roots);
            }
        }
        roots
    }

    fn bisect(&self, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = self.eval(m);
            if fm == 0.0 {
                return m;
            }
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    /// Maximum of `|p|` over `[lo, hi]`, exact up to root-finding accuracy.
    pub fn max_abs_on(&self, lo: f64, hi: f64) -> f64 {
        let mut best = self.eval(lo).abs().max(self.eval(hi).abs());
        for r in self.derivative().real_roots_in(lo, hi) {
            best = best.max(self.eval(r).abs());
        }
        best
    }

    /// Cauchy bound on the modulus of every root.
    pub fn root_bound(&self) -> f64 {
        match self.degree() {
            None | Some(0) => 0.0,
            Some(d) => {
                let lead = self.0[d].abs();
                1.0 + self.0[..d].iter().fold(0.0f64, |m, c| m.max(c.abs() / lead))
            }
        }
    }

    /// All real roots, sorted ascending.
    pub fn real_roots(&self) -> Vec<f64> {
        let b = self.root_bound();
        self.real_roots_in(-b, b)
    }
}

impl From<Vec<f64>> for Poly {
    fn from(v: Vec<f64>) -> Self {
        Poly::new(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_and_calculus() {
        let p = Poly::new(vec![1.0, -2.0, 3.0]);
        assert_eq!(p.eval(2.0), 1.0 - 4.0 + 12.0);
        assert_eq!(p.derivative(), Poly::new(vec![-2.0, 6.0]));
        let q = p.antiderivative();
        assert_eq!(q.eval(0.0), 0.0);
        assert!((q.eval(1.0) - (1.0 - 1.0 + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn trailing_zeros_are_trimmed() {
        assert_eq!(Poly::new(vec![0.0, 0.0]), Poly::zero());
        assert_eq!(Poly::new(vec![1.0, 0.0]).degree(), Some(0));
    }

    #[test]
    fn roots_of_cubic() {
        // (u+1)(u)(u-0.5) = u^3 + 0.5u^2 - 0.5u
        let p = Poly::new(vec![0.0, -0.5, 0.5, 1.0]);
        let r = p.real_roots_in(-2.0, 2.0);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([-1.0, 0.0, 0.5]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert_eq!(p.real_roots_in(0.1, 0.4), Vec::<f64>::new());
    }

    #[test]
    fn double_root_is_reported() {
        let p = Poly::new(vec![0.0, 0.0, 1.0]);
        let r = p.real_roots_in(-1.0, 1.0);
        assert_eq!(r.len(), 1);
        assert!(r[0].abs() < 1e-12);
    }

    #[test]
    fn max_abs_uses_interior_extrema() {
        let p = Poly::new(vec![0.0, 1.0, 0.0, -1.0]); // u - u^3
        let m = p.max_abs_on(0.0, 0.9);
        let want = 2.0 / (3.0 * 3f64.sqrt());
        assert!((m - want).abs() < 1e-12);
    }

    #[test]
    fn product_matches_pointwise() {
        let a = Poly::new(vec![1.0, 2.0]);
        let b = Poly::new(vec![-1.0, 0.0, 3.0]);
        let c = a.mul(&b);
        for u in [-1.3, 0.0, 0.7, 2.0] {
            assert!((c.eval(u) - a.eval(u) * b.eval(u)).abs() < 1e-12);
        }
    }
}
