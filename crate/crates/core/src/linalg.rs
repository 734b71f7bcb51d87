//! Small dense symmetric linear algebra.
//!
//! Every loss formula works with p×p symmetric matrices where p is at most a
//! few dozen, so a cyclic Jacobi eigensolver is accurate and cheap. Its output
//! ordering is fully deterministic: eigenvalues are sorted in decreasing order
//! with ties kept in original column order, and each eigenvector is signed so
//! that its first non-negligible component is positive.

use nalgebra::{DMatrix, DVector};

use crate::error::{DesignError, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Absolute symmetry tolerance, scaled by the largest entry when that exceeds one.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Relative PSD tolerance: smallest eigenvalue must be ≥ −PSD_TOL·‖G‖.
pub const PSD_TOL: f64 = 1e-10;

const SIGN_EPS: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone)]
pub struct SymEigen {
    /// Decreasing.
    pub values: Vec<f64>,
    /// Column j is the unit eigenvector for `values[j]`.
    pub vectors: Mat,
}

#[derive(Debug, Clone)]
pub struct EigPair {
    pub value: f64,
    pub vector: Vector,
    /// Another eigenvalue lies within tolerance of the maximum.
    pub tied: bool,
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn asymmetry(m: &Mat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn check_symmetric(m: &Mat) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(DesignError::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    let asym = asymmetry(m);
    if asym > SYMMETRY_TOL * max_abs(m).max(1.0) {
        return Err(DesignError::NotSymmetric(asym));
    }
    Ok(())
}

/// (M + M')/2.
pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

fn canonical_sign(v: &mut Vector) {
    if let Some(first) = v.iter().copied().find(|x| x.abs() > SIGN_EPS) {
        if first < 0.0 {
            v.neg_mut();
        }
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
pub fn sym_eigen(s: &Mat) -> Result<SymEigen> {
    check_symmetric(s)?;
    let n = s.nrows();
    let mut a = symmetrize(s);
    let mut v = Mat::identity(n, n);
    let scale = max_abs(&a).max(f64::MIN_POSITIVE);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable: equal eigenvalues keep their column order
    order.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Mat::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut vec = v.column(src).into_owned();
        canonical_sign(&mut vec);
        vectors.set_column(col, &vec);
    }
    Ok(SymEigen { values, vectors })
}

/// Largest eigenvalue with a unit eigenvector under the sign convention above.
pub fn max_eigpair(s: &Mat) -> Result<EigPair> {
    let eig = sym_eigen(s)?;
    let value = eig.values[0];
    let tol = 1e-10 * value.abs().max(1.0);
    let tied = eig.values.len() > 1 && (value - eig.values[1]).abs() <= tol;
    Ok(EigPair {
        value,
        vector: eig.vectors.column(0).into_owned(),
        tied,
    })
}

/// Spectral square root and pseudo-inverse square root of a PSD matrix.
#[derive(Debug, Clone)]
pub struct PsdRoots {
    pub sqrt: Mat,
    pub inv_sqrt: Mat,
    /// Number of eigenvalues above the relative cutoff.
    pub rank: usize,
    pub min_eigenvalue: f64,
}

/// `cutoff` is relative to the largest eigenvalue magnitude (and to `reference_norm`
/// when that is larger, so an essentially-zero matrix has rank zero).
pub fn psd_roots(g: &Mat, reference_norm: f64, cutoff: f64) -> Result<PsdRoots> {
    let eig = sym_eigen(g)?;
    let n = g.nrows();
    let lmax = eig.values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let min_eigenvalue = *eig.values.last().unwrap_or(&0.0);
    let scale = lmax.max(reference_norm);
    if min_eigenvalue < -PSD_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(DesignError::Numerical(format!(
            "matrix expected positive semidefinite; smallest eigenvalue {min_eigenvalue:e} \
             against norm {scale:e}"
        )));
    }
    let mut sqrt = Mat::zeros(n, n);
    let mut inv_sqrt = Mat::zeros(n, n);
    let mut rank = 0;
    for (j, &lam) in eig.values.iter().enumerate() {
        let col = eig.vectors.column(j);
        let outer = col * col.transpose();
        if lam > cutoff * scale && lam > 0.0 {
            rank += 1;
            sqrt += &outer * lam.sqrt();
            inv_sqrt += &outer * (1.0 / lam.sqrt());
        }
    }
    Ok(PsdRoots {
        sqrt: symmetrize(&sqrt),
        inv_sqrt: symmetrize(&inv_sqrt),
        rank,
        min_eigenvalue,
    })
}

/// Inverse of a symmetric positive definite matrix, or `None` when it is singular or
/// too ill-conditioned (reciprocal condition below `1e-14`).
pub fn spd_inverse(s: &Mat) -> Option<Mat> {
    let n = s.nrows();
    if n == 0 || !s.iter().all(|v| v.is_finite()) {
        return None;
    }
    let chol = s.clone().cholesky()?;
    let l = chol.l_dirty();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for i in 0..n {
        let d = l[(i, i)].abs();
        lo = lo.min(d);
        hi = hi.max(d);
    }
    if hi == 0.0 || (lo / hi).powi(2) < 1e-14 {
        return None;
    }
    Some(symmetrize(&chol.inverse()))
}

/// Unit eigenvectors of a PSD matrix whose eigenvalues fall below `rel_tol`·λ_max.
pub fn null_directions(s: &Mat, rel_tol: f64) -> Vec<Vec<f64>> {
    match sym_eigen(&symmetrize(s)) {
        Ok(eig) => {
            let lmax = eig.values.first().copied().unwrap_or(0.0).abs().max(f64::MIN_POSITIVE);
            eig.values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v <= rel_tol * lmax)
                .map(|(j, _)| eig.vectors.column(j).iter().copied().collect())
                .collect()
        }
        Err(_) => Vec::new(),
    }
}

pub fn trace_product(a: &Mat, b: &Mat) -> f64 {
    // tr(AB) without forming the product
    let n = a.nrows();
    let mut t = 0.0;
    for i in 0..n {
        for k in 0..n {
            t += a[(i, k)] * b[(k, i)];
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_maximum() {
        let s = Mat::from_diagonal(&Vector::from_vec(vec![3.0, 1.0]));
        let ep = max_eigpair(&s).unwrap();
        assert_eq!(ep.value, 3.0);
        assert_eq!(ep.vector.as_slice(), &[1.0, 0.0]);
        assert!(!ep.tied);
    }

    #[test]
    fn identity_returns_first_axis_and_flags_tie() {
        let ep = max_eigpair(&Mat::identity(4, 4)).unwrap();
        assert_eq!(ep.value, 1.0);
        assert_eq!(ep.vector.as_slice(), &[1.0, 0.0, 0.0, 0.0]);
        assert!(ep.tied);
    }

    #[test]
    fn random_symmetric_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let x = Mat::from_fn(6, 6, |_, _| rng.random::<f64>() - 0.5);
            let s = symmetrize(&(&x + x.transpose()));
            let ep = max_eigpair(&s).unwrap();
            let resid = (&s * &ep.vector - &ep.vector * ep.value).norm();
            assert!(resid <= 1e-10, "residual {resid}");
            assert!((ep.vector.norm() - 1.0).abs() < 1e-12);
            let eig = sym_eigen(&s).unwrap();
            assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
            let first = ep.vector.iter().find(|v| v.abs() > SIGN_EPS).unwrap();
            assert!(*first > 0.0);
        }
    }

    #[test]
    fn rejects_asymmetric_input() {
        let mut s = Mat::identity(3, 3);
        s[(0, 2)] = 1e-6;
        assert!(matches!(max_eigpair(&s), Err(DesignError::NotSymmetric(_))));
    }

    #[test]
    fn square_roots_reconstruct() {
        let g = Mat::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 2.0]);
        let r = psd_roots(&g, 0.0, 1e-12).unwrap();
        assert_eq!(r.rank, 3);
        assert!((&r.sqrt * &r.sqrt - &g).norm() < 1e-12);
        assert!((&r.inv_sqrt * &g * &r.inv_sqrt - Mat::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let r = psd_roots(&Mat::zeros(2, 2), 1.0, 1e-10).unwrap();
        assert_eq!(r.rank, 0);
        assert_eq!(r.inv_sqrt, Mat::zeros(2, 2));
    }

    #[test]
    fn indefinite_is_rejected() {
        let g = Mat::from_diagonal(&Vector::from_vec(vec![1.0, -0.1]));
        assert!(psd_roots(&g, 0.0, 1e-12).is_err());
    }

    #[test]
    fn spd_inverse_detects_singularity() {
        let s = Mat::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(spd_inverse(&s).is_none());
        let s = Mat::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let inv = spd_inverse(&s).unwrap();
        assert!((&s * inv - Mat::identity(2, 2)).norm() < 1e-14);
    }
}
