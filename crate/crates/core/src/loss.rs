//! Maximum loss I_ν(Φ), the least favourable contaminant ψ_Φ, the random-design
//! loss j_ν(δ) and a direct IMSE evaluation.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::density::SamplingDensity;
use crate::error::{invalid, DesignError, Result};
use crate::linalg::{max_abs, max_eigpair, psd_roots, spd_inverse, symmetrize, trace_product, EigPair, Mat, PsdRoots, Vector};
use crate::model::{density_moments, design_moments, Design, DesignSpace, MomentSet, RegressorBasis};

/// Relative eigenvalue cutoff used when forming G^{±1/2}.
pub const G_RANK_CUTOFF: f64 = 1e-10;

/// Everything about (basis, χ, Φ) that the loss formulas reuse.
#[derive(Debug, Clone)]
pub struct LossContext {
    pub basis: RegressorBasis,
    pub space: DesignSpace,
    pub density: Arc<dyn SamplingDensity>,
    pub moments: MomentSet,
    pub a_inv: Mat,
    /// None when M_Φ is singular.
    pub m_inv: Option<Mat>,
    pub h_inv: Option<Mat>,
    pub g_roots: PsdRoots,
    /// Top eigenpair of G^{1/2} H⁻¹ G^{1/2} + I (only when H is invertible).
    pub top: Option<EigPair>,
    /// G has no usable direction: the least favourable contaminant is zero.
    pub degenerate: bool,
}

impl LossContext {
    pub fn new(basis: RegressorBasis, space: DesignSpace, density: Arc<dyn SamplingDensity>) -> Result<Self> {
        let moments = density_moments(&basis, density.as_ref(), &space)?;
        let a_inv = spd_inverse(&moments.a).ok_or_else(|| DesignError::Numerical("A not invertible".into()))?;
        let m_inv = spd_inverse(&moments.m);
        let h_inv = spd_inverse(&moments.h);
        let g_roots = psd_roots(&moments.g, max_abs(&moments.k), G_RANK_CUTOFF)?;
        let top = match &h_inv {
            Some(hi) => {
                let p = basis.p();
                let s = symmetrize(&(&g_roots.sqrt * hi * &g_roots.sqrt + Mat::identity(p, p)));
                Some(max_eigpair(&s)?)
            }
            None => None,
        };
        let degenerate = g_roots.rank == 0 || top.as_ref().is_some_and(|t| t.value - 1.0 <= 1e-12 * t.value);
        Ok(LossContext {
            basis,
            space,
            density,
            moments,
            a_inv,
            m_inv,
            h_inv,
            g_roots,
            top,
            degenerate,
        })
    }

    /// β_Φ, or None when M_Φ is singular.
    pub fn beta(&self) -> Option<&Vector> {
        self.top.as_ref().map(|t| &t.vector)
    }

    /// G^{-1/2} β (zero in the degenerate case).
    fn u(&self) -> Option<Vector> {
        if self.degenerate {
            return Some(Vector::zeros(self.basis.p()));
        }
        self.beta().map(|b| &self.g_roots.inv_sqrt * b)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LossReport {
    pub nu: f64,
    pub variance_term: f64,
    pub bias_term: f64,
    pub combined: f64,
    pub beta: Option<Vec<f64>>,
    pub tied: bool,
    pub degenerate: bool,
}

impl LossReport {
    fn new(nu: f64, variance_term: f64, bias_term: f64) -> Self {
        LossReport {
            nu,
            variance_term,
            bias_term,
            combined: (1.0 - nu) * variance_term + nu * bias_term,
            beta: None,
            tied: false,
            degenerate: false,
        }
    }

    pub fn infinite(nu: f64) -> Self {
        LossReport::new(nu, f64::INFINITY, f64::INFINITY)
    }

    pub fn is_finite(&self) -> bool {
        self.combined.is_finite()
    }
}

fn check_nu(nu: f64) -> Result<()> {
    if (0.0..=1.0).contains(&nu) {
        Ok(())
    } else {
        Err(invalid(format!("nu must lie in [0, 1], got {nu}")))
    }
}

/// I_ν(Φ) = (1−ν) tr(A M_Φ⁻¹) + ν ch_max(K_Φ H_Φ⁻¹).
pub fn max_loss_i(ctx: &LossContext, nu: f64) -> Result<LossReport> {
    check_nu(nu)?;
    let (Some(m_inv), Some(top)) = (&ctx.m_inv, &ctx.top) else {
        return Ok(LossReport::infinite(nu));
    };
    let mut rep = LossReport::new(nu, trace_product(&ctx.moments.a, m_inv), top.value);
    rep.beta = Some(top.vector.iter().copied().collect());
    rep.tied = top.tied;
    rep.degenerate = ctx.degenerate;
    Ok(rep)
}

/// ψ(x) = φ(x) f(x)'w − f(x)'v with w = (τ/√n) G^{-1/2}β and v = A⁻¹M_Φ w.
#[derive(Debug, Clone)]
pub struct Contaminant {
    basis: RegressorBasis,
    density: Arc<dyn SamplingDensity>,
    pub w: Vector,
    pub v: Vector,
    a: Mat,
    pub tau: f64,
    pub n: usize,
    /// True when ψ ≡ 0 because G carries no bias direction.
    pub degenerate: bool,
}

impl Contaminant {
    pub fn zero(ctx: &LossContext, tau: f64, n: usize) -> Self {
        let p = ctx.basis.p();
        Contaminant {
            basis: ctx.basis,
            density: ctx.density.clone(),
            w: Vector::zeros(p),
            v: Vector::zeros(p),
            a: ctx.moments.a.clone(),
            tau,
            n,
            degenerate: true,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let f = self.basis.eval_unchecked(x);
        self.density.pdf(x) * f.dot(&self.w) - f.dot(&self.v)
    }

    /// (∫ f ψ dμ, ∫ ψ² dμ) over χ. On the support the integrals use the density's
    /// quadrature nodes; off the support ψ = −f'v, whose integrals are completed with A.
    pub fn integrals(&self) -> (Vector, f64) {
        let p = self.basis.p();
        let mut ortho = Vector::zeros(p);
        let mut sq = 0.0;
        for node in self.density.quadrature() {
            let f = self.basis.eval_unchecked(&node.x);
            let off = f.dot(&self.v);
            let psi = self.eval(&node.x);
            ortho += &f * (node.weight * (psi + off));
            sq += node.weight * (psi * psi - off * off);
        }
        let av = &self.a * &self.v;
        (ortho - av.clone(), sq + self.v.dot(&av))
    }

    /// ∫ψ² = w'Kw − 2w'Mv + v'Av from the moment matrices of Φ.
    pub fn norm_sq_from_moments(&self, moments: &MomentSet) -> f64 {
        let (w, v) = (&self.w, &self.v);
        w.dot(&(&moments.k * w)) - 2.0 * w.dot(&(&moments.m * v)) + v.dot(&(&moments.a * v))
    }
}

/// Least favourable contaminant for Φ at scale τ, design size n.
pub fn least_favourable_psi(ctx: &LossContext, tau: f64, n: usize) -> Result<Contaminant> {
    if !(tau > 0.0) || n == 0 {
        return Err(invalid("need tau > 0 and n >= 1"));
    }
    if ctx.degenerate {
        return Ok(Contaminant::zero(ctx, tau, n));
    }
    let u = ctx.u().ok_or(DesignError::Singular {
        what: "M_Phi",
        directions: crate::linalg::null_directions(&ctx.moments.m, 1e-12),
    })?;
    let w = u * (tau / (n as f64).sqrt());
    let v = &ctx.a_inv * &ctx.moments.m * &w;
    Ok(Contaminant {
        basis: ctx.basis,
        density: ctx.density.clone(),
        w,
        v,
        a: ctx.moments.a.clone(),
        tau,
        n,
        degenerate: false,
    })
}

/// Variance term tr(A M_δ⁻¹) and γ_δ of one design; infinite when M_δ is singular.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DesignTerms {
    pub variance_term: f64,
    pub gamma: f64,
}

pub fn design_terms(ctx: &LossContext, design: &Design) -> Result<DesignTerms> {
    let (md, mphi) = design_moments(&ctx.basis, design, Some(ctx.density.as_ref()))?;
    let Some(md_inv) = spd_inverse(&md) else {
        return Ok(DesignTerms {
            variance_term: f64::INFINITY,
            gamma: f64::INFINITY,
        });
    };
    let Some(u) = ctx.u() else {
        return Ok(DesignTerms {
            variance_term: trace_product(&ctx.moments.a, &md_inv),
            gamma: f64::INFINITY,
        });
    };
    let mphi = mphi.expect("density supplied");
    // L' u = (M_δ⁻¹ M_φ − A⁻¹ M_Φ) u
    let lu = &md_inv * (&mphi * &u) - &ctx.a_inv * (&ctx.moments.m * &u);
    let gamma = lu.dot(&(&ctx.moments.a * &lu)) + 1.0;
    Ok(DesignTerms {
        variance_term: trace_product(&ctx.moments.a, &md_inv),
        gamma,
    })
}

pub fn gamma_delta(ctx: &LossContext, design: &Design) -> Result<f64> {
    Ok(design_terms(ctx, design)?.gamma)
}

/// j_ν(δ) = (1−ν) tr(A M_δ⁻¹) + ν γ_δ.
pub fn j_nu(ctx: &LossContext, design: &Design, nu: f64) -> Result<LossReport> {
    check_nu(nu)?;
    let t = design_terms(ctx, design)?;
    if !t.variance_term.is_finite() || !t.gamma.is_finite() {
        return Ok(LossReport::infinite(nu));
    }
    let mut rep = LossReport::new(nu, t.variance_term, t.gamma);
    rep.beta = ctx.beta().map(|b| b.iter().copied().collect());
    rep.tied = ctx.top.as_ref().is_some_and(|t| t.tied);
    rep.degenerate = ctx.degenerate;
    Ok(rep)
}

/// (σ²/n) tr(A M_δ⁻¹) + b' M_δ⁻¹ A M_δ⁻¹ b + ∫ψ² with b = n⁻¹ Σ f(x_i) ψ(x_i).
pub fn imse_direct(ctx: &LossContext, design: &Design, psi: &Contaminant, sigma2: f64) -> Result<f64> {
    let (md, _) = design_moments(&ctx.basis, design, None)?;
    let Some(md_inv) = spd_inverse(&md) else {
        return Ok(f64::INFINITY);
    };
    let n = design.n() as f64;
    let mut b = Vector::zeros(ctx.basis.p());
    for x in &design.points {
        b += ctx.basis.eval(x)? * psi.eval(x);
    }
    b /= n;
    let mb = &md_inv * &b;
    let norm_sq = psi.norm_sq_from_moments(&ctx.moments);
    Ok(sigma2 / n * trace_product(&ctx.moments.a, &md_inv) + mb.dot(&(&ctx.moments.a * &mb)) + norm_sq)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RepValue {
    pub rep: usize,
    pub j_nu: f64,
    pub variance_term: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct McEstimate {
    pub values: Vec<RepValue>,
    pub mean: f64,
    pub sd: f64,
    pub singular: usize,
}

/// Monte Carlo estimate of J_ν(Φ) = E[j_ν(δ)]. Replicate r draws its design from
/// `sampler(replicate_seed(seed, r))`; replicates run in parallel and are collected
/// in index order, so the output does not depend on scheduling.
pub fn estimate_j_mc<S>(ctx: &LossContext, nu: f64, reps: usize, seed: u64, sampler: S) -> Result<McEstimate>
where
    S: Fn(u64) -> Result<Design> + Sync,
{
    check_nu(nu)?;
    if reps == 0 {
        return Err(invalid("reps must be at least 1"));
    }
    let values = (0..reps)
        .into_par_iter()
        .map(|r| {
            let design = sampler(crate::rng::replicate_seed(seed, r as u64))?;
            let t = design_terms(ctx, &design)?;
            Ok(RepValue {
                rep: r,
                j_nu: (1.0 - nu) * t.variance_term + nu * t.gamma,
                variance_term: t.variance_term,
                gamma: t.gamma,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let finite: Vec<f64> = values.iter().map(|v| v.j_nu).filter(|v| v.is_finite()).collect();
    let singular = reps - finite.len();
    if finite.is_empty() {
        return Err(DesignError::Numerical("every replicate had a singular design".into()));
    }
    let (mean, sd) = mean_sd(&finite);
    Ok(McEstimate { values, mean, sd, singular })
}

/// Two-pass mean and sample standard deviation (n−1 divisor; 0 for one value).
pub fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = v.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}
