//! Straight-line regression on [-1, 1]: Huber's minimax density m(x), its
//! quantiles, and jittered designs sampled from piecewise-uniform bins.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::density::{QuadNode, SamplingDensity};
use crate::error::{invalid, DesignError, Result};
use crate::model::Design;
use crate::quadrature::gauss_legendre;
use crate::rng::{open01, substream};

/// ν at which α = 0 and m(x) = 3x²/2.
pub const NU_ALPHA_ZERO: f64 = 25.0 / 106.0;

/// Normalizer d(α) of m(x) = 3(x² − α)⁺ / d(α).
pub fn d_alpha(alpha: f64) -> f64 {
    if alpha <= 0.0 {
        2.0 * (1.0 - 3.0 * alpha)
    } else {
        let r = alpha.sqrt();
        2.0 * (1.0 - r).powi(2) * (1.0 + 2.0 * r)
    }
}

/// ν as a function of α (both branches).
pub fn nu_from_alpha(alpha: f64) -> f64 {
    let inv = if alpha <= 0.0 {
        1.0 + 9.0 * (3.0 - 5.0 * alpha).powi(2) / (25.0 * (1.0 - 3.0 * alpha).powi(3))
    } else {
        let r = alpha.sqrt();
        1.0 + 9.0 * (3.0 + 6.0 * r + 4.0 * alpha + 2.0 * alpha * r).powi(2)
            / (25.0 * (1.0 - r).powi(2) * (1.0 + 2.0 * r).powi(3))
    };
    1.0 / inv
}

/// Solves the α ≤ 0 branch of the α↔ν relation by bisection on [-1e6, 0].
pub fn alpha_from_nu(nu: f64) -> Result<f64> {
    if !(nu < 1.0) || !(nu >= NU_ALPHA_ZERO) {
        return Err(invalid(format!(
            "nu = {nu} is outside [25/106, 1), where the minimax density has alpha <= 0"
        )));
    }
    if nu == NU_ALPHA_ZERO {
        return Ok(0.0);
    }
    let target = 1.0 / nu;
    let inv = |a: f64| 1.0 / nu_from_alpha(a);
    // 1/ν(α) increases with α on α ≤ 0
    let (mut lo, mut hi) = (-1e6_f64, 0.0_f64);
    if inv(lo) > target {
        return Err(invalid(format!("nu = {nu} is too close to 1 to resolve alpha")));
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if inv(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// m(x) = 3(x² − α)/d(α) on [-1, 1], α ≤ 0.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HuberDensity {
    pub alpha: f64,
    pub d_alpha: f64,
}

impl HuberDensity {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha <= 0.0) {
            return Err(invalid(format!(
                "alpha = {alpha}: only the alpha <= 0 branch is supported"
            )));
        }
        Ok(HuberDensity {
            alpha,
            d_alpha: d_alpha(alpha),
        })
    }

    pub fn from_nu(nu: f64) -> Result<Self> {
        Self::new(alpha_from_nu(nu)?)
    }

    pub fn m(&self, x: f64) -> f64 {
        if x.abs() > 1.0 {
            0.0
        } else {
            3.0 * (x * x - self.alpha).max(0.0) / self.d_alpha
        }
    }

    pub fn mu2(&self) -> f64 {
        let a = self.alpha;
        (3.0 - 5.0 * a) / (5.0 * (1.0 - 3.0 * a))
    }

    /// ∫ m².
    pub fn kappa0(&self) -> f64 {
        let a = self.alpha;
        9.0 / self.d_alpha.powi(2) * (0.4 - 4.0 * a / 3.0 + 2.0 * a * a)
    }

    /// ∫ x² m².
    pub fn kappa2(&self) -> f64 {
        let a = self.alpha;
        9.0 / self.d_alpha.powi(2) * (2.0 / 7.0 - 0.8 * a + 2.0 * a * a / 3.0)
    }

    /// K_ν(α), the maximum loss of the continuous design m for weight ν.
    pub fn k_nu(&self, nu: f64) -> f64 {
        let mu2 = self.mu2();
        2.0 * (1.0 - nu) * (1.0 + 1.0 / (3.0 * mu2))
            + 2.0 * nu * self.kappa0().max(self.kappa2() / (3.0 * mu2 * mu2))
    }

    /// I_ν(ξ) in closed form.
    pub fn i_nu_xi(&self, nu: f64) -> f64 {
        let mu2 = self.mu2();
        2.0 * (1.0 - nu) * (1.0 + 1.0 / (3.0 * mu2)) + nu * (1.0 + 1.25 * (3.0 * mu2 - 1.0).powi(2))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let x = x.clamp(-1.0, 1.0);
        let a = self.alpha;
        (x.powi(3) - 3.0 * a * x + 1.0 - 3.0 * a) / (2.0 * (1.0 - 3.0 * a))
    }

    /// Real root of t³ − 3αt = (1 − 3α)(2u − 1) by Cardano's formula.
    pub fn quantile(&self, u: f64) -> f64 {
        cardano(self.alpha, -(1.0 - 3.0 * self.alpha) * (2.0 * u - 1.0))
    }

    pub fn sample_design(&self, n: usize, seed: u64) -> Design {
        let mut rng = substream(seed, 0);
        let pts = (0..n).map(|_| vec![self.quantile(open01(&mut rng))]).collect();
        Design::new(pts, seed, "sample-from-m")
    }
}

/// Root of t³ − 3αt + s = 0 for α ≤ 0 (a single real root).
fn cardano(alpha: f64, s: f64) -> f64 {
    let delta = s * s / 4.0 - alpha.powi(3);
    let r = delta.sqrt();
    // f64::cbrt is the real, sign-preserving cube root
    (-s / 2.0 + r).cbrt() + (-s / 2.0 - r).cbrt()
}

impl SamplingDensity for HuberDensity {
    fn dim(&self) -> usize {
        1
    }

    fn pdf(&self, x: &[f64]) -> f64 {
        self.m(x[0])
    }

    fn quadrature(&self) -> Vec<QuadNode> {
        gauss_legendre(32)
            .nodes
            .iter()
            .zip(gauss_legendre(32).weights)
            .map(|(&x, w)| QuadNode {
                x: vec![x],
                weight: w,
                phi: self.m(x),
            })
            .collect()
    }

    fn monomial_moments(&self, exps: &[Vec<u32>]) -> (Vec<f64>, Vec<f64>) {
        // ∫_{-1}^{1} x^e dx
        let mom = |e: u32| if e % 2 == 1 { 0.0 } else { 2.0 / (e as f64 + 1.0) };
        let (a, d) = (self.alpha, self.d_alpha);
        let first = exps
            .iter()
            .map(|e| 3.0 / d * (mom(e[0] + 2) - a * mom(e[0])))
            .collect();
        let second = exps
            .iter()
            .map(|e| 9.0 / (d * d) * (mom(e[0] + 4) - 2.0 * a * mom(e[0] + 2) + a * a * mom(e[0])))
            .collect();
        (first, second)
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        vec![self.quantile(open01(rng))]
    }

    fn label(&self) -> String {
        format!("huber(alpha={})", self.alpha)
    }
}

/// t_i = ξ⁻¹((i − 1/2)/n), i = 1..n, for m with parameter α ≤ 0.
pub fn cardano_quantiles(n: usize, alpha: f64) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(invalid("need n >= 2 quantiles"));
    }
    if !(alpha <= 0.0) {
        return Err(invalid(format!("alpha = {alpha} must be <= 0")));
    }
    let nf = n as f64;
    Ok((1..=n)
        .map(|i| {
            let s = -(1.0 - 3.0 * alpha) * ((2 * i) as f64 - 1.0 - nf) / nf;
            cardano(alpha, s)
        })
        .collect())
}

/// φ_n(x; c) = (2c)⁻¹ Σ I[|x − t_i| ≤ c/n].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JitterDensity {
    pub quantiles: Vec<f64>,
    pub c: f64,
}

/// Slack allowed when bins touch or meet ±1.
const TOUCH_TOL: f64 = 1e-12;

pub fn jitter_density(quantiles: &[f64], c: f64) -> Result<JitterDensity> {
    let n = quantiles.len();
    if n == 0 {
        return Err(invalid("no quantiles"));
    }
    if !(c > 0.0 && c <= 1.0) {
        return Err(invalid(format!("c = {c} must lie in (0, 1]")));
    }
    if let Some(i) = (1..n).find(|&i| !(quantiles[i] > quantiles[i - 1])) {
        return Err(invalid(format!("quantiles not strictly increasing at index {i}")));
    }
    let h = c / n as f64;
    if quantiles[0] - h < -1.0 - TOUCH_TOL {
        return Err(DesignError::Infeasible(format!(
            "bin 1 [{}, {}] extends below -1 (need c <= n(1 + t_1) = {})",
            quantiles[0] - h,
            quantiles[0] + h,
            n as f64 * (1.0 + quantiles[0])
        )));
    }
    if quantiles[n - 1] + h > 1.0 + TOUCH_TOL {
        return Err(DesignError::Infeasible(format!(
            "bin {n} extends above 1 (need c <= n(1 - t_n))"
        )));
    }
    for i in 1..n {
        if quantiles[i] - h < quantiles[i - 1] + h - TOUCH_TOL {
            return Err(DesignError::Infeasible(format!(
                "bins {} and {} overlap: t = {}, {} with half-width {h}",
                i,
                i + 1,
                quantiles[i - 1],
                quantiles[i]
            )));
        }
    }
    Ok(JitterDensity {
        quantiles: quantiles.to_vec(),
        c,
    })
}

impl JitterDensity {
    /// Minimax jitter density for weight ν: Cardano quantiles of m, then bins.
    pub fn for_nu(nu: f64, n: usize, c: f64) -> Result<Self> {
        let alpha = alpha_from_nu(nu)?;
        jitter_density(&cardano_quantiles(n, alpha)?, c)
    }

    pub fn n(&self) -> usize {
        self.quantiles.len()
    }

    pub fn half_width(&self) -> f64 {
        self.c / self.n() as f64
    }

    pub fn bins(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = self.half_width();
        self.quantiles.iter().map(move |t| (t - h, t + h))
    }

    pub fn in_support(&self, x: f64) -> bool {
        self.bins().any(|(l, u)| x >= l && x <= u)
    }

    /// (λ₂, γ₀).
    pub fn lambda2_gamma0(&self) -> (f64, f64) {
        lambda2_gamma0(&self.quantiles, self.c)
    }
}

/// λ₂(c) = n⁻¹Σt_i² + c²/(3n²), γ₀ = c⁻¹ max(1, 1/(3λ₂)).
pub fn lambda2_gamma0(quantiles: &[f64], c: f64) -> (f64, f64) {
    let n = quantiles.len() as f64;
    let lambda2 = quantiles.iter().map(|t| t * t).sum::<f64>() / n + c * c / (3.0 * n * n);
    (lambda2, (1.0 / c) * 1f64.max(1.0 / (3.0 * lambda2)))
}

/// (I_ν(ξ), I_ν(Φ)) in closed form for the minimax density with parameter α and the
/// jitter density with the given quantiles and c. The I_ν(Φ) formula is evaluated
/// even when the bins would overlap.
pub fn slr_loss_closed(alpha: f64, quantiles: &[f64], c: f64, nu: f64) -> Result<(f64, f64)> {
    let m = HuberDensity::new(alpha)?;
    let (lambda2, _) = lambda2_gamma0(quantiles, c);
    let i_phi = 2.0 * (1.0 - nu) * (1.0 + 1.0 / (3.0 * lambda2)) + nu / c * 1f64.max(1.0 / (3.0 * lambda2));
    Ok((m.i_nu_xi(nu), i_phi))
}

/// Least favourable contaminant of a jitter density, in closed form.
#[derive(Debug, Clone)]
pub struct ClosedPsi {
    density: JitterDensity,
    scale: f64,
    gamma0: f64,
    lambda2: f64,
    /// λ₂ = 1/3: intercept and slope directions tie.
    pub tied: bool,
    /// c = 1 with λ₂ ≥ 1/3: ψ ≡ 0.
    pub degenerate: bool,
}

pub fn psi_phi_closed(density: &JitterDensity, tau: f64, n: usize) -> ClosedPsi {
    let (lambda2, gamma0) = density.lambda2_gamma0();
    let degenerate = (gamma0 - 1.0).abs() <= 1e-14;
    ClosedPsi {
        density: density.clone(),
        scale: tau / (n as f64).sqrt(),
        gamma0,
        lambda2,
        tied: (lambda2 - 1.0 / 3.0).abs() <= 1e-14,
        degenerate,
    }
}

impl ClosedPsi {
    pub fn eval(&self, x: f64) -> f64 {
        if self.degenerate {
            return 0.0;
        }
        let ind = if self.density.in_support(x) { 1.0 } else { 0.0 };
        let g = 1.0 / self.gamma0;
        let base = self.scale * (ind - g) / (2.0 * self.density.c * (1.0 - g)).sqrt();
        if self.lambda2 < 1.0 / 3.0 {
            base * x / self.lambda2.sqrt()
        } else {
            base
        }
    }
}

/// tr(A M_δ⁻¹) = 2{1 + (μ_δ² + 1/3)/σ_δ²} for SLR on [-1, 1] (σ_δ² the population variance).
pub fn trace_identity(design: &Design) -> Result<f64> {
    let n = design.n() as f64;
    if design.n() == 0 || design.dim() != 1 {
        return Err(invalid("need a non-empty one-dimensional design"));
    }
    let mean = design.points.iter().map(|p| p[0]).sum::<f64>() / n;
    let var = design.points.iter().map(|p| (p[0] - mean).powi(2)).sum::<f64>() / n;
    if !(var > 0.0) {
        return Ok(f64::INFINITY);
    }
    Ok(2.0 * (1.0 + (mean * mean + 1.0 / 3.0) / var))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SampleMode {
    /// n i.i.d. draws from φ_n.
    Complete,
    /// One draw from each bin.
    Stratified,
}

impl SampleMode {
    pub fn strategy_name(self) -> &'static str {
        match self {
            SampleMode::Complete => "jitter-complete",
            SampleMode::Stratified => "jitter-stratified",
        }
    }
}

/// Complete sampling uses substream (seed, 0); stratified bin i uses (seed, i).
pub fn sample_jitter(density: &JitterDensity, mode: SampleMode, seed: u64) -> Design {
    let n = density.n();
    let h = density.half_width();
    let pts = match mode {
        SampleMode::Complete => {
            let mut rng = substream(seed, 0);
            (0..n).map(|_| draw_from_mixture(density, &mut rng)).collect()
        }
        SampleMode::Stratified => density
            .quantiles
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let mut rng = substream(seed, i as u64);
                vec![t - h + 2.0 * h * open01(&mut rng)]
            })
            .collect(),
    };
    Design::new(pts, seed, mode.strategy_name())
}

fn draw_from_mixture(density: &JitterDensity, rng: &mut dyn RngCore) -> Vec<f64> {
    let n = density.n();
    let h = density.half_width();
    let bin = ((open01(rng) * n as f64) as usize).min(n - 1);
    vec![density.quantiles[bin] - h + 2.0 * h * open01(rng)]
}

impl SamplingDensity for JitterDensity {
    fn dim(&self) -> usize {
        1
    }

    /// Bins are closed; a point where two bins touch still has density (2c)⁻¹.
    fn pdf(&self, x: &[f64]) -> f64 {
        if self.in_support(x[0]) {
            0.5 / self.c
        } else {
            0.0
        }
    }

    fn quadrature(&self) -> Vec<QuadNode> {
        let rule = gauss_legendre(8);
        let phi = 0.5 / self.c;
        self.bins()
            .flat_map(|(l, u)| {
                let r = rule.mapped(l, u);
                r.nodes
                    .into_iter()
                    .zip(r.weights)
                    .map(move |(x, w)| QuadNode { x: vec![x], weight: w, phi })
            })
            .collect()
    }

    fn monomial_moments(&self, exps: &[Vec<u32>]) -> (Vec<f64>, Vec<f64>) {
        let phi = 0.5 / self.c;
        let first: Vec<f64> = exps
            .iter()
            .map(|e| {
                let q = e[0] as i32 + 1;
                phi * self.bins().map(|(l, u)| (u.powi(q) - l.powi(q)) / q as f64).sum::<f64>()
            })
            .collect();
        let second = first.iter().map(|v| v * phi).collect();
        (first, second)
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        draw_from_mixture(self, rng)
    }

    fn label(&self) -> String {
        format!("jitter(n={}, c={})", self.n(), self.c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_zero_limit() {
        assert_eq!(alpha_from_nu(NU_ALPHA_ZERO).unwrap(), 0.0);
        assert!((nu_from_alpha(0.0) - NU_ALPHA_ZERO).abs() < 1e-16);
        let m = HuberDensity::new(0.0).unwrap();
        for x in [-1.0, -0.3, 0.0, 0.8] {
            assert!((m.m(x) - 1.5 * x * x).abs() < 1e-15);
        }
        assert!(alpha_from_nu(0.2).is_err());
        assert!(alpha_from_nu(1.0).is_err());
        assert!(HuberDensity::new(0.1).is_err());
    }

    #[test]
    fn alpha_half() {
        let a = alpha_from_nu(0.5).unwrap();
        assert!((a + 0.325).abs() <= 2e-3, "{a}");
        assert!((nu_from_alpha(a) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn alpha_branches_meet_at_zero() {
        assert!((nu_from_alpha(1e-14) - nu_from_alpha(-1e-14)).abs() < 1e-6);
        assert!((d_alpha(1e-14) - d_alpha(-1e-14)).abs() < 1e-6);
        // ν → 0 as α → 1 on the positive branch
        assert!(nu_from_alpha(0.999_999) < 1e-6);
    }

    #[test]
    fn k_nu_minimized_near_alpha() {
        let nu = 0.5;
        let best = (0..=50_000)
            .map(|i| -5.0 + 5.0 * i as f64 / 50_000.0)
            .min_by(|a, b| {
                let ka = HuberDensity::new(*a).unwrap().k_nu(nu);
                let kb = HuberDensity::new(*b).unwrap().k_nu(nu);
                ka.partial_cmp(&kb).unwrap()
            })
            .unwrap();
        let a = alpha_from_nu(nu).unwrap();
        assert!((best - a).abs() < 2e-3, "grid {best} vs {a}");
        let m = HuberDensity::new(a).unwrap();
        // κ₀ is the active branch of the max
        assert!(m.kappa0() >= m.kappa2() / (3.0 * m.mu2().powi(2)));
    }

    #[test]
    fn huber_moments_match_quadrature() {
        let m = HuberDensity::from_nu(0.5).unwrap();
        let exps: Vec<Vec<u32>> = (0..6).map(|e| vec![e]).collect();
        let (c1, c2) = m.monomial_moments(&exps);
        let (q1, q2) = crate::density::quadrature_moments(&m.quadrature(), &exps);
        for j in 0..6 {
            assert!((c1[j] - q1[j]).abs() < 1e-14 && (c2[j] - q2[j]).abs() < 1e-14);
        }
        assert!((c1[0] - 1.0).abs() < 1e-14);
        assert!((c1[2] - m.mu2()).abs() < 1e-14);
        assert!((c2[0] - m.kappa0()).abs() < 1e-14);
        assert!((c2[2] - m.kappa2()).abs() < 1e-14);
    }

    #[test]
    fn quantiles_small_cases() {
        let t = cardano_quantiles(2, 0.0).unwrap();
        let r = 0.5f64.cbrt();
        assert!((t[0] + r).abs() < 1e-15 && (t[1] - r).abs() < 1e-15);
        let t5 = cardano_quantiles(5, -0.4).unwrap();
        assert_eq!(t5[2], 0.0);
    }

    #[test]
    fn quantiles_n10_against_root_finder() {
        let a = -0.325;
        let t = cardano_quantiles(10, a).unwrap();
        // bisection on t³ − 3αt − rhs, an increasing function for α ≤ 0
        let rhs = (1.0 - 3.0 * a) * (19.0 - 10.0) / 10.0;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid.powi(3) - 3.0 * a * mid < rhs {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((t[9] - lo).abs() < 1e-12);
        assert!((t[9] - 0.948).abs() <= 1e-3);
    }

    #[test]
    fn quantile_function_inverts_cdf() {
        let m = HuberDensity::from_nu(0.7).unwrap();
        for i in 1..100 {
            let u = i as f64 / 100.0;
            assert!((m.cdf(m.quantile(u)) - u).abs() < 1e-13);
        }
    }

    #[test]
    fn jitter_feasibility() {
        let j = JitterDensity::for_nu(0.5, 10, 0.5).unwrap();
        let (l2, _) = j.lambda2_gamma0();
        assert!(l2 >= 1.0 / 3.0);
        let err = JitterDensity::for_nu(0.5, 10, 1.0).unwrap_err();
        assert!(matches!(err, DesignError::Infeasible(_)));
        // interior overlap detected even when the endpoint condition holds
        let err = jitter_density(&[-0.5, -0.45, 0.5], 0.3).unwrap_err();
        assert!(err.to_string().contains("bins 1 and 2 overlap"), "{err}");
        assert!(jitter_density(&[0.0, 0.1], 10.0).is_err());
    }

    #[test]
    fn lambda2_gamma0_arithmetic() {
        let t = [-(0.5f64.cbrt()), 0.5f64.cbrt()];
        let (l2, g0) = lambda2_gamma0(&t, 0.3);
        let expect = 0.5f64.cbrt().powi(2) + 0.09 / 12.0;
        assert!((l2 - expect).abs() < 1e-15);
        assert!((l2 - 0.6375).abs() < 5e-4);
        assert!((g0 - 1.0 / 0.3).abs() < 1e-15);
        // c = 1 with λ₂ ≥ 1/3
        let u: Vec<f64> = (0..4).map(|i| -0.75 + 0.5 * i as f64).collect();
        let (l2u, g0u) = lambda2_gamma0(&u, 1.0);
        assert!(l2u >= 1.0 / 3.0 - 1e-15);
        assert_eq!(g0u, 1.0);
    }

    #[test]
    fn closed_form_losses() {
        let a = alpha_from_nu(0.5).unwrap();
        let t = cardano_quantiles(10, a).unwrap();
        let (ixi, _) = slr_loss_closed(a, &t, 0.5, 0.5).unwrap();
        assert!((ixi - 2.31).abs() <= 0.01, "{ixi}");
        let mut prev = f64::INFINITY;
        for i in 1..=10 {
            let c = i as f64 / 10.0;
            let (_, iphi) = slr_loss_closed(a, &t, c, 0.5).unwrap();
            assert!(iphi <= prev + 1e-12, "c = {c}");
            prev = iphi;
        }
    }

    #[test]
    fn closed_psi_shape_and_flags() {
        let j = JitterDensity::for_nu(0.5, 10, 0.5).unwrap();
        let psi = psi_phi_closed(&j, 1.0, 10);
        assert!(!psi.degenerate && !psi.tied);
        // two levels: positive on the support, negative off it
        let on = psi.eval(j.quantiles[3]);
        let off = psi.eval(0.5 * (j.quantiles[4] + j.quantiles[5]));
        assert!(on > 0.0 && off < 0.0);
        assert_eq!(psi.eval(j.quantiles[0]), on);
        let u: Vec<f64> = (0..4).map(|i| -0.75 + 0.5 * i as f64).collect();
        let full = jitter_density(&u, 1.0).unwrap();
        let z = psi_phi_closed(&full, 1.0, 4);
        assert!(z.degenerate);
        assert_eq!(z.eval(0.1), 0.0);
    }

    #[test]
    fn trace_identity_simple() {
        let d = Design::new(vec![vec![-1.0], vec![1.0]], 0, "fixed");
        // M = I, tr(A) = 8/3
        assert!((trace_identity(&d).unwrap() - 8.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn stratified_puts_one_point_per_bin() {
        let j = JitterDensity::for_nu(0.5, 10, 0.5).unwrap();
        let d = sample_jitter(&j, SampleMode::Stratified, 7);
        assert_eq!(d.n(), 10);
        for (p, (l, u)) in d.points.iter().zip(j.bins()) {
            assert!(p[0] >= l && p[0] <= u);
        }
        assert_eq!(d, sample_jitter(&j, SampleMode::Stratified, 7));
    }

    #[test]
    fn complete_sampling_bin_frequencies() {
        let j = JitterDensity::for_nu(0.5, 10, 0.5).unwrap();
        let mut rng = substream(99, 0);
        let draws = 100_000;
        let mut counts = [0usize; 10];
        for _ in 0..draws {
            let x = j.sample(&mut rng)[0];
            let bin = j.bins().position(|(l, u)| x >= l && x <= u).expect("in a bin");
            counts[bin] += 1;
        }
        let p = 0.1;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - draws as f64 * p).abs() <= 3.0 * sd, "{counts:?}");
        }
    }
}
