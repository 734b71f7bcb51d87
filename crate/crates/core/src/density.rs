//! The sampling-density abstraction shared by every design family.

use rand::RngCore;

use crate::model::{monomial, DesignSpace};
use crate::rng::open01;

/// A quadrature node on the support of a density, with the density value cached.
#[derive(Debug, Clone)]
pub struct QuadNode {
    pub x: Vec<f64>,
    pub weight: f64,
    pub phi: f64,
}

/// A density φ with respect to Lebesgue measure.
pub trait SamplingDensity: Send + Sync + std::fmt::Debug {
    fn dim(&self) -> usize;

    fn pdf(&self, x: &[f64]) -> f64;

    /// Nodes whose weighted sums approximate ∫_{supp φ} g dx for smooth g.
    fn quadrature(&self) -> Vec<QuadNode>;

    /// For each exponent vector e: (∫ x^e φ dx, ∫ x^e φ² dx).
    fn monomial_moments(&self, exps: &[Vec<u32>]) -> (Vec<f64>, Vec<f64>) {
        quadrature_moments(&self.quadrature(), exps)
    }

    /// One independent draw from φ.
    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64>;

    fn label(&self) -> String;
}

pub fn quadrature_moments(nodes: &[QuadNode], exps: &[Vec<u32>]) -> (Vec<f64>, Vec<f64>) {
    let mut first = vec![0.0; exps.len()];
    let mut second = vec![0.0; exps.len()];
    for node in nodes {
        let wp = node.weight * node.phi;
        for (j, e) in exps.iter().enumerate() {
            let xe = monomial(&node.x, e);
            first[j] += wp * xe;
            second[j] += wp * node.phi * xe;
        }
    }
    (first, second)
}

/// Uniform density on a box.
#[derive(Debug, Clone)]
pub struct UniformDensity {
    lower: Vec<f64>,
    upper: Vec<f64>,
    height: f64,
}

impl UniformDensity {
    pub fn on(space: &DesignSpace) -> crate::Result<Self> {
        match space {
            DesignSpace::Box { lower, upper } => Ok(UniformDensity {
                lower: lower.clone(),
                upper: upper.clone(),
                height: 1.0 / space.measure(),
            }),
            DesignSpace::Grid { .. } => Err(crate::error::invalid("uniform density needs a box")),
        }
    }
}

impl SamplingDensity for UniformDensity {
    fn dim(&self) -> usize {
        self.lower.len()
    }

    fn pdf(&self, x: &[f64]) -> f64 {
        let inside = x
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| *v >= *l && *v <= *u);
        if inside {
            self.height
        } else {
            0.0
        }
    }

    fn quadrature(&self) -> Vec<QuadNode> {
        let q = self.dim();
        let rule = crate::quadrature::gauss_legendre(8);
        let rules: Vec<_> = (0..q).map(|j| rule.mapped(self.lower[j], self.upper[j])).collect();
        let total = rule.len().pow(q as u32);
        (0..total)
            .map(|mut idx| {
                let mut x = vec![0.0; q];
                let mut w = 1.0;
                for (j, r) in rules.iter().enumerate() {
                    let i = idx % r.len();
                    idx /= r.len();
                    x[j] = r.nodes[i];
                    w *= r.weights[i];
                }
                QuadNode { x, weight: w, phi: self.height }
            })
            .collect()
    }

    fn monomial_moments(&self, exps: &[Vec<u32>]) -> (Vec<f64>, Vec<f64>) {
        let space = DesignSpace::Box {
            lower: self.lower.clone(),
            upper: self.upper.clone(),
        };
        let first: Vec<f64> = exps.iter().map(|e| self.height * space.monomial_integral(e)).collect();
        let second = first.iter().map(|v| v * self.height).collect();
        (first, second)
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| l + (u - l) * open01(rng))
            .collect()
    }

    fn label(&self) -> String {
        "uniform".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::model::{density_moments, RegressorBasis};

    #[test]
    fn uniform_moments_scale_a() {
        let sp = DesignSpace::interval(-1.0, 1.0).unwrap();
        let u = UniformDensity::on(&sp).unwrap();
        let basis = RegressorBasis::Polynomial { degree: 2 };
        let ms = density_moments(&basis, &u, &sp).unwrap();
        assert!(max_abs(&(&ms.m - &ms.a * 0.5)) < 1e-15);
        assert!(max_abs(&(&ms.k - &ms.a * 0.25)) < 1e-15);
        assert!(max_abs(&ms.g) < 1e-15);
        // the generic quadrature path agrees with the closed form
        let exps = basis.exponents();
        let (f1, f2) = quadrature_moments(&u.quadrature(), &exps);
        let (c1, c2) = u.monomial_moments(&exps);
        for j in 0..exps.len() {
            assert!((f1[j] - c1[j]).abs() < 1e-14 && (f2[j] - c2[j]).abs() < 1e-14);
        }
    }
}
