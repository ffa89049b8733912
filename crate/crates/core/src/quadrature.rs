//! Gauss-Legendre rules and composite integration over panels.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Integrate `f` over `[a, b]` with one application of the rule.
    #[inline]
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(mid + half * x);
        }
        s * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss-Legendre rule: `panels` equal panels on `[a, b]`,
/// additionally split at every point of `breaks` lying strictly inside.
#[derive(Debug, Clone)]
pub struct CompositeRule {
    pub rule: GaussLegendre,
    pub edges: Vec<f64>,
}

impl CompositeRule {
    pub fn new(a: f64, b: f64, panels: usize, order: usize, breaks: &[f64]) -> Self {
        let panels = panels.max(1);
        let mut edges: Vec<f64> = (0..=panels)
            .map(|k| a + (b - a) * k as f64 / panels as f64)
            .collect();
        edges.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
        edges.sort_by(|x, y| x.partial_cmp(y).unwrap());
        edges.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (1.0 + y.abs()));
        CompositeRule { rule: GaussLegendre::new(order), edges }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.edges
            .windows(2)
            .map(|w| self.rule.integrate(w[0], w[1], &f))
            .sum()
    }
}

/// Trapezoid rule on `k` uniform nodes spanning `[a, b]` (endpoints included).
pub fn trapezoid<F: Fn(f64) -> f64>(a: f64, b: f64, k: usize, f: F) -> f64 {
    assert!(k >= 2);
    let h = (b - a) / (k - 1) as f64;
    let mut s = 0.5 * (f(a) + f(b));
    for j in 1..k - 1 {
        s += f(a + h * j as f64);
    }
    s * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_rules_are_exact_on_polynomials() {
        for n in 1..12 {
            let g = GaussLegendre::new(n);
            let wsum: f64 = g.weights.iter().sum();
            assert!((wsum - 2.0).abs() < 1e-13, "n={n}");
            // exact up to degree 2n-1
            let deg = 2 * n - 1;
            let got = g.integrate(0.0, 1.0, |x| x.powi(deg as i32));
            assert!((got - 1.0 / (deg as f64 + 1.0)).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn nodes_symmetric_and_sorted() {
        let g = GaussLegendre::new(8);
        for i in 0..8 {
            assert!((g.nodes[i] + g.nodes[7 - i]).abs() < 1e-15);
        }
        assert!(g.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn composite_includes_breaks() {
        let c = CompositeRule::new(-1.0, 1.0, 4, 8, &[0.3, 5.0]);
        assert!(c.edges.contains(&0.3));
        assert_eq!(c.edges.len(), 6);
        let got = c.integrate(|x| x.abs());
        assert!((got - 1.0).abs() < 1e-14);
    }

    #[test]
    fn trapezoid_linear_exact() {
        let v = trapezoid(-1.0, 2.0, 7, |x| 3.0 * x + 1.0);
        assert!((v - 7.5).abs() < 1e-13);
    }
}
