//! One-dimensional quadrature rules.
//!
//! Gauss-Legendre handles smooth integrands (exact for polynomials of degree
//! `2n - 1`); tanh-sinh handles integrands with algebraic endpoint behaviour
//! such as `u^{0.618}(1-u)^{3}` that arise from beta densities.

use std::f64::consts::PI;

/// Nodes and weights on an interval.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Affine map of a rule on [-1, 1] onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> Rule {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Rule {
            nodes: self.nodes.iter().map(|t| mid + half * t).collect(),
            weights: self.weights.iter().map(|w| w * half).collect(),
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }
}

/// n-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_n).
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1, "Gauss-Legendre order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() <= 1e-16 {
                break;
            }
        }
        // recompute derivative at the converged node
        let (mut p0, mut p1) = (1.0, 0.0);
        for j in 0..n {
            let p2 = p1;
            p1 = p0;
            p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
        }
        if z * z != 1.0 {
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

/// Tanh-sinh node on (0, 1), carrying the distance to the right endpoint
/// separately so integrands can evaluate `(1 - u)^b` without cancellation.
#[derive(Debug, Clone, Copy)]
pub struct UnitNode {
    pub u: f64,
    pub one_minus_u: f64,
    pub weight: f64,
}

/// Tanh-sinh rule on (0, 1) with step `1 / steps_per_unit` over t ∈ [-3.5, 3.5].
pub fn tanh_sinh_unit(steps_per_unit: usize) -> Vec<UnitNode> {
    let h = 1.0 / steps_per_unit as f64;
    let kmax = (3.5 * steps_per_unit as f64).ceil() as i64;
    let mut out = Vec::with_capacity(2 * kmax as usize + 1);
    for k in -kmax..=kmax {
        let t = k as f64 * h;
        let y = 0.5 * PI * t.sinh();
        // u = 1/(1+e^{-2y}), 1-u = 1/(1+e^{2y})
        let u = 1.0 / (1.0 + (-2.0 * y).exp());
        let one_minus_u = 1.0 / (1.0 + (2.0 * y).exp());
        let weight = h * PI * u * one_minus_u * t.cosh();
        if weight > 0.0 && u > 0.0 && one_minus_u > 0.0 {
            out.push(UnitNode {
                u,
                one_minus_u,
                weight,
            });
        }
    }
    out
}

/// Default tanh-sinh density (points per unit of t).
pub const TANH_SINH_STEPS: usize = 24;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_exact_for_polynomials() {
        for n in [1usize, 2, 5, 16, 64] {
            let rule = gauss_legendre(n);
            assert!((rule.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for deg in 0..(2 * n) {
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                let got = rule.integrate(|x| x.powi(deg as i32));
                assert!((got - exact).abs() < 1e-13, "n={n} deg={deg}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn legendre_nodes_sorted_and_symmetric() {
        let rule = gauss_legendre(9);
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
        for i in 0..9 {
            assert_eq!(rule.nodes[i], -rule.nodes[8 - i]);
        }
    }

    #[test]
    fn mapped_rule_integrates_on_interval() {
        let rule = gauss_legendre(8).mapped(1.0, 3.0);
        let got = rule.integrate(|x| x * x);
        assert!((got - 26.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn tanh_sinh_handles_endpoint_powers() {
        let nodes = tanh_sinh_unit(TANH_SINH_STEPS);
        // ∫ u^{0.618} (1-u)^{2.5} du = B(1.618, 3.5)
        let got: f64 = nodes
            .iter()
            .map(|n| n.weight * n.u.powf(0.618) * n.one_minus_u.powf(2.5))
            .sum();
        let exact = statrs::function::beta::beta(1.618, 3.5);
        assert!((got - exact).abs() < 1e-13, "{got} vs {exact}");
        let total: f64 = nodes.iter().map(|n| n.weight).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }
}
