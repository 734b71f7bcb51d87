//! Regression bases, design spaces, designs and their moment matrices.

use serde::{Deserialize, Serialize};

use crate::density::SamplingDensity;
use crate::error::{invalid, DesignError, Result};
use crate::linalg::{max_abs, null_directions, spd_inverse, sym_eigen, symmetrize, Mat, Vector, PSD_TOL};

/// Design space χ with its reference measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DesignSpace {
    /// Lebesgue measure on a product of intervals (q = 1 is an interval).
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// Counting measure on a finite set of points.
    Grid { points: Vec<Vec<f64>> },
}

impl DesignSpace {
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::rectangle(vec![lo], vec![hi])
    }

    pub fn rectangle(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(DesignError::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        for (j, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l < u) || !l.is_finite() || !u.is_finite() {
                return Err(invalid(format!("coordinate {j}: need lower < upper, got [{l}, {u}]")));
            }
        }
        Ok(DesignSpace::Box { lower, upper })
    }

    /// `[-half, half]^k`.
    pub fn cube(k: usize, half: f64) -> Result<Self> {
        Self::rectangle(vec![-half; k], vec![half; k])
    }

    pub fn grid(points: Vec<Vec<f64>>) -> Result<Self> {
        let q = points.first().map(|p| p.len()).unwrap_or(0);
        if q == 0 {
            return Err(invalid("finite grid needs at least one point"));
        }
        if let Some(p) = points.iter().find(|p| p.len() != q) {
            return Err(DesignError::DimensionMismatch { expected: q, got: p.len() });
        }
        Ok(DesignSpace::Grid { points })
    }

    pub fn dim(&self) -> usize {
        match self {
            DesignSpace::Box { lower, .. } => lower.len(),
            DesignSpace::Grid { points } => points[0].len(),
        }
    }

    pub fn is_counting(&self) -> bool {
        matches!(self, DesignSpace::Grid { .. })
    }

    /// Lebesgue volume, or the number of grid points.
    pub fn measure(&self) -> f64 {
        match self {
            DesignSpace::Box { lower, upper } => lower.iter().zip(upper).map(|(l, u)| u - l).product(),
            DesignSpace::Grid { points } => points.len() as f64,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            DesignSpace::Box { lower, upper } => {
                x.len() == lower.len()
                    && x.iter().zip(lower.iter().zip(upper)).all(|(v, (l, u))| *v >= *l && *v <= *u)
            }
            DesignSpace::Grid { points } => points.iter().any(|p| p.as_slice() == x),
        }
    }

    /// ∫ x^e dμ.
    pub fn monomial_integral(&self, e: &[u32]) -> f64 {
        match self {
            DesignSpace::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .zip(e)
                .map(|((l, u), &p)| {
                    let q = p as i32 + 1;
                    (u.powi(q) - l.powi(q)) / q as f64
                })
                .product(),
            DesignSpace::Grid { points } => points.iter().map(|x| monomial(x, e)).sum(),
        }
    }
}

pub fn monomial(x: &[f64], e: &[u32]) -> f64 {
    x.iter().zip(e).map(|(v, &p)| if p == 0 { 1.0 } else { v.powi(p as i32) }).product()
}

/// Regressors f(x). The full second-order basis is ordered
/// (1, x_1..x_k, x_1²..x_k², x_1x_2, x_1x_3, .., x_{k-1}x_k).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum RegressorBasis {
    Polynomial { degree: usize },
    FullSecondOrder { k: usize },
}

impl RegressorBasis {
    /// Straight-line regression.
    pub const SLR: RegressorBasis = RegressorBasis::Polynomial { degree: 1 };

    pub fn p(&self) -> usize {
        match *self {
            RegressorBasis::Polynomial { degree } => degree + 1,
            RegressorBasis::FullSecondOrder { k } => 1 + 2 * k + k * (k - 1) / 2,
        }
    }

    pub fn q(&self) -> usize {
        match *self {
            RegressorBasis::Polynomial { .. } => 1,
            RegressorBasis::FullSecondOrder { k } => k,
        }
    }

    /// Exponent vector of each regressor (every regressor is a monomial).
    pub fn exponents(&self) -> Vec<Vec<u32>> {
        match *self {
            RegressorBasis::Polynomial { degree } => (0..=degree as u32).map(|d| vec![d]).collect(),
            RegressorBasis::FullSecondOrder { k } => {
                let mut out = vec![vec![0; k]];
                for pow in [1, 2] {
                    for j in 0..k {
                        let mut e = vec![0; k];
                        e[j] = pow;
                        out.push(e);
                    }
                }
                for i in 0..k {
                    for j in (i + 1)..k {
                        let mut e = vec![0; k];
                        e[i] = 1;
                        e[j] = 1;
                        out.push(e);
                    }
                }
                out
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vector> {
        if x.len() != self.q() {
            return Err(DesignError::DimensionMismatch {
                expected: self.q(),
                got: x.len(),
            });
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> Vector {
        match *self {
            RegressorBasis::Polynomial { degree } => {
                let mut v = Vector::zeros(degree + 1);
                let mut acc = 1.0;
                for d in 0..=degree {
                    v[d] = acc;
                    acc *= x[0];
                }
                v
            }
            RegressorBasis::FullSecondOrder { k } => {
                let mut v = Vector::zeros(self.p());
                v[0] = 1.0;
                for j in 0..k {
                    v[1 + j] = x[j];
                    v[1 + k + j] = x[j] * x[j];
                }
                let mut idx = 1 + 2 * k;
                for i in 0..k {
                    for j in (i + 1)..k {
                        v[idx] = x[i] * x[j];
                        idx += 1;
                    }
                }
                v
            }
        }
    }

    /// Exponents of the products f_i f_j for i ≤ j, in row-major upper-triangle order.
    pub(crate) fn product_exponents(&self) -> Vec<(usize, usize, Vec<u32>)> {
        let ex = self.exponents();
        let mut out = Vec::new();
        for i in 0..ex.len() {
            for j in i..ex.len() {
                let e: Vec<u32> = ex[i].iter().zip(&ex[j]).map(|(a, b)| a + b).collect();
                out.push((i, j, e));
            }
        }
        out
    }
}

pub fn eval_basis(basis: &RegressorBasis, x: &[f64]) -> Result<Vector> {
    basis.eval(x)
}

fn fill_symmetric(p: usize, pairs: &[(usize, usize, Vec<u32>)], values: &[f64]) -> Mat {
    let mut m = Mat::zeros(p, p);
    for ((i, j, _), v) in pairs.iter().zip(values) {
        m[(*i, *j)] = *v;
        m[(*j, *i)] = *v;
    }
    m
}

/// A = ∫ f f' dμ, exact (closed-form monomial integrals or grid summation).
pub fn moment_matrix_a(basis: &RegressorBasis, space: &DesignSpace) -> Result<Mat> {
    if space.dim() != basis.q() {
        return Err(DesignError::DimensionMismatch {
            expected: basis.q(),
            got: space.dim(),
        });
    }
    let pairs = basis.product_exponents();
    let vals: Vec<f64> = pairs.iter().map(|(_, _, e)| space.monomial_integral(e)).collect();
    let a = fill_symmetric(basis.p(), &pairs, &vals);
    if spd_inverse(&a).is_none() {
        return Err(DesignError::Singular {
            what: "A",
            directions: null_directions(&a, 1e-12),
        });
    }
    Ok(a)
}

/// n points with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub points: Vec<Vec<f64>>,
    pub seed: u64,
    pub strategy: String,
}

impl Design {
    pub fn new(points: Vec<Vec<f64>>, seed: u64, strategy: impl Into<String>) -> Self {
        Design {
            points,
            seed,
            strategy: strategy.into(),
        }
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map(|p| p.len()).unwrap_or(0)
    }
}

/// (M_δ, M_φ) with M_δ = n⁻¹Σ f f' and M_φ = n⁻¹Σ φ(x_i) f f'.
pub fn design_moments(
    basis: &RegressorBasis,
    design: &Design,
    density: Option<&dyn SamplingDensity>,
) -> Result<(Mat, Option<Mat>)> {
    if design.n() == 0 {
        return Err(invalid("design has no points"));
    }
    let p = basis.p();
    let mut md = Mat::zeros(p, p);
    let mut mphi = density.map(|_| Mat::zeros(p, p));
    for x in &design.points {
        let f = basis.eval(x)?;
        let outer = &f * f.transpose();
        if let (Some(mp), Some(d)) = (mphi.as_mut(), density) {
            *mp += &outer * d.pdf(x);
        }
        md += outer;
    }
    let inv_n = 1.0 / design.n() as f64;
    Ok((md * inv_n, mphi.map(|m| m * inv_n)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentSource {
    Design,
    Density,
}

/// A, M, K, H = M A⁻¹ M and G = K − H.
#[derive(Debug, Clone)]
pub struct MomentSet {
    pub a: Mat,
    pub m: Mat,
    pub k: Mat,
    pub h: Mat,
    pub g: Mat,
    pub source: MomentSource,
}

/// Tolerance on ∫φ dx = 1.
pub const NORMALIZATION_TOL: f64 = 1e-8;

/// M_Φ = ∫ f f' φ dx and K_Φ = ∫ f f' φ² dx from the density's monomial moments.
pub fn density_moments(
    basis: &RegressorBasis,
    density: &dyn SamplingDensity,
    space: &DesignSpace,
) -> Result<MomentSet> {
    if density.dim() != basis.q() {
        return Err(DesignError::DimensionMismatch {
            expected: basis.q(),
            got: density.dim(),
        });
    }
    if space.is_counting() {
        return Err(invalid("densities are taken with respect to Lebesgue measure"));
    }
    let a = moment_matrix_a(basis, space)?;
    let pairs = basis.product_exponents();
    let mut exps: Vec<Vec<u32>> = pairs.iter().map(|(_, _, e)| e.clone()).collect();
    exps.push(vec![0; basis.q()]);
    let (first, second) = density.monomial_moments(&exps);
    let mass = first[exps.len() - 1];
    if (mass - 1.0).abs() > NORMALIZATION_TOL {
        return Err(DesignError::Numerical(format!(
            "density {} integrates to {mass} rather than 1",
            density.label()
        )));
    }
    let npairs = pairs.len();
    let p = basis.p();
    let m = fill_symmetric(p, &pairs, &first[..npairs]);
    let k = fill_symmetric(p, &pairs, &second[..npairs]);
    if !k.iter().all(|v| v.is_finite()) {
        return Err(DesignError::Numerical("K is not finite".into()));
    }
    let a_inv = spd_inverse(&a).ok_or(DesignError::Singular {
        what: "A",
        directions: null_directions(&a, 1e-12),
    })?;
    let h = symmetrize(&(&m * &a_inv * &m));
    let g = symmetrize(&(&k - &h));
    let lmin = *sym_eigen(&g)?.values.last().unwrap_or(&0.0);
    let scale = max_abs(&g).max(max_abs(&k) * 1e-6);
    if lmin < -PSD_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(DesignError::Numerical(format!(
            "G is not positive semidefinite (smallest eigenvalue {lmin:e})"
        )));
    }
    Ok(MomentSet {
        a,
        m,
        k,
        h,
        g,
        source: MomentSource::Density,
    })
}
