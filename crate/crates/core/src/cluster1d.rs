//! One-dimensional cluster designs: beta densities on contracted Voronoi
//! intervals around the support of a classical design.

use rand::RngCore;
use serde::Serialize;

use crate::density::{QuadNode, SamplingDensity};
use crate::error::{invalid, Result};
use crate::model::Design;
use crate::quadrature::{tanh_sinh_unit, TANH_SINH_STEPS};
use crate::rng::{open01, substream};
use crate::special::{beta_inv_cdf, beta_unnormalized, ln_beta};

/// Support of the I-optimal design for polynomial regression of degree p − 1 on [-1, 1].
pub fn ioptimal_support(p: usize) -> Result<Vec<f64>> {
    match p {
        2 => Ok(vec![-1.0, 1.0]),
        3 => Ok(vec![-1.0, 0.0, 1.0]),
        4 => {
            let r = 1.0 / 5f64.sqrt();
            Ok(vec![-1.0, -r, r, 1.0])
        }
        _ => Err(invalid(format!(
            "built-in I-optimal supports exist for p in {{2, 3, 4}}, got {p}; pass a custom support"
        ))),
    }
}

/// (a, b) with mode δ; the free parameter is 1/c.
pub fn beta_mode_params(delta: f64, c: f64) -> (f64, f64) {
    let inv = 1.0 / c;
    if delta <= 0.0 {
        (1.0, inv)
    } else if delta >= 1.0 {
        (inv, 1.0)
    } else if delta < 0.5 {
        (1.0 + (inv - 1.0) * delta / (1.0 - delta), inv)
    } else if delta > 0.5 {
        (inv, 1.0 + (inv - 1.0) * (1.0 - delta) / delta)
    } else {
        (inv, inv)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Component {
    /// Support point t_i.
    pub t: f64,
    /// J_i = [k, l].
    pub k: f64,
    pub l: f64,
    pub delta: f64,
    pub a: f64,
    pub b: f64,
    /// |I_i| / 2.
    pub weight: f64,
    ln_beta: f64,
}

impl Component {
    pub fn len(&self) -> f64 {
        self.l - self.k
    }

    /// Beta(a, b) density at u ∈ [0, 1].
    fn beta_at(&self, u: f64, one_minus_u: f64) -> f64 {
        beta_unnormalized(self.a, self.b, u, one_minus_u) * (-self.ln_beta).exp()
    }

    fn draw(&self, rng: &mut dyn RngCore) -> f64 {
        self.k + self.len() * beta_inv_cdf(self.a, self.b, open01(rng))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClusterSpec {
    pub support: Vec<f64>,
    /// s_0..s_p.
    pub midpoints: Vec<f64>,
    pub c: f64,
    pub components: Vec<Component>,
}

pub fn build_partition(support: &[f64], c: f64) -> Result<ClusterSpec> {
    let p = support.len();
    if p == 0 {
        return Err(invalid("empty support"));
    }
    if !(c > 0.0 && c <= 1.0) {
        return Err(invalid(format!("c = {c} must lie in (0, 1]")));
    }
    if let Some(i) = (1..p).find(|&i| !(support[i] > support[i - 1])) {
        return Err(invalid(format!("support not strictly increasing at index {i}")));
    }
    if support.iter().any(|t| !(-1.0..=1.0).contains(t)) {
        return Err(invalid("support points must lie in [-1, 1]"));
    }
    let mut s = Vec::with_capacity(p + 1);
    s.push(support[0].min(-1.0));
    for i in 0..p - 1 {
        s.push(0.5 * (support[i] + support[i + 1]));
    }
    s.push(support[p - 1].max(1.0));
    let components = (0..p)
        .map(|i| {
            let t = support[i];
            let (lo, hi) = (s[i], s[i + 1]);
            let delta = (t - lo) / (hi - lo);
            let (a, b) = beta_mode_params(delta, c);
            Component {
                t,
                k: t - c * (t - lo),
                l: t + c * (hi - t),
                delta,
                a,
                b,
                weight: 0.5 * (hi - lo),
                ln_beta: ln_beta(a, b),
            }
        })
        .collect();
    Ok(ClusterSpec {
        support: support.to_vec(),
        midpoints: s,
        c,
        components,
    })
}

impl ClusterSpec {
    /// Cluster spec for weight ν around the I-optimal support (c = ν).
    pub fn ioptimal(p: usize, nu: f64) -> Result<Self> {
        build_partition(&ioptimal_support(p)?, nu)
    }

    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.weight).collect()
    }
}

/// φ(x; ν) = (2c)⁻¹ Σ β_{a_i,b_i}((x − k_i)/|J_i|) I(x ∈ J_i).
#[derive(Debug, Clone, Serialize)]
pub struct ClusterDensity1d {
    pub spec: ClusterSpec,
}

pub fn cluster_density_1d(spec: ClusterSpec) -> ClusterDensity1d {
    ClusterDensity1d { spec }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

impl SamplingDensity for ClusterDensity1d {
    fn dim(&self) -> usize {
        1
    }

    fn pdf(&self, x: &[f64]) -> f64 {
        let x = x[0];
        let scale = 0.5 / self.spec.c;
        self.spec
            .components
            .iter()
            .find(|comp| x >= comp.k && x <= comp.l)
            .map(|comp| {
                let u = (x - comp.k) / comp.len();
                scale * comp.beta_at(u, (comp.l - x) / comp.len())
            })
            .unwrap_or(0.0)
    }

    /// Tanh-sinh nodes on each J_i (the beta exponents are generally non-integer).
    fn quadrature(&self) -> Vec<QuadNode> {
        let unit = tanh_sinh_unit(TANH_SINH_STEPS);
        let scale = 0.5 / self.spec.c;
        let mut out = Vec::with_capacity(unit.len() * self.spec.components.len());
        for comp in &self.spec.components {
            let len = comp.len();
            for node in &unit {
                out.push(QuadNode {
                    x: vec![comp.k + len * node.u],
                    weight: len * node.weight,
                    phi: scale * comp.beta_at(node.u, node.one_minus_u),
                });
            }
        }
        out
    }

    /// Exact moments via beta-function identities.
    fn monomial_moments(&self, exps: &[Vec<u32>]) -> (Vec<f64>, Vec<f64>) {
        let scale = 0.5 / self.spec.c;
        let mut first = vec![0.0; exps.len()];
        let mut second = vec![0.0; exps.len()];
        for comp in &self.spec.components {
            let (a, b, k, len) = (comp.a, comp.b, comp.k, comp.len());
            for (idx, e) in exps.iter().enumerate() {
                let e = e[0];
                let (mut s1, mut s2) = (0.0, 0.0);
                for j in 0..=e {
                    let coef = binomial(e, j) * k.powi((e - j) as i32) * len.powi(j as i32);
                    s1 += coef * (ln_beta(a + j as f64, b) - comp.ln_beta).exp();
                    s2 += coef
                        * (ln_beta(2.0 * a - 1.0 + j as f64, 2.0 * b - 1.0) - 2.0 * comp.ln_beta).exp();
                }
                first[idx] += scale * len * s1;
                second[idx] += scale * scale * len * s2;
            }
        }
        (first, second)
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        let u = open01(rng);
        let mut acc = 0.0;
        let comps = &self.spec.components;
        let idx = comps
            .iter()
            .position(|c| {
                acc += c.weight;
                u < acc
            })
            .unwrap_or(comps.len() - 1);
        vec![comps[idx].draw(rng)]
    }

    fn label(&self) -> String {
        format!("cluster1d(p={}, c={})", self.spec.support.len(), self.spec.c)
    }
}

/// Largest-remainder rounding of n·w_i. Ties in the remainder go to the lower index.
pub fn largest_remainder(weights: &[f64], n: usize) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    let quotas: Vec<f64> = weights.iter().map(|w| n as f64 * w / total).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    // remainders compared on a 1e-9 grid so floating noise cannot break a tie
    let mut order: Vec<(i64, usize)> = quotas
        .iter()
        .enumerate()
        .map(|(i, q)| (((q - q.floor()) * 1e9).round() as i64, i))
        .collect();
    order.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
    for &(_, i) in order.iter().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// Stratified sample: largest-remainder counts, component i drawn from substream (seed, i).
pub fn stratified_sample_1d(spec: &ClusterSpec, n: usize, seed: u64) -> Result<Design> {
    let p = spec.components.len();
    if n < p {
        return Err(invalid(format!("n = {n} is smaller than the number of clusters {p}")));
    }
    let counts = largest_remainder(&spec.weights(), n);
    let mut pts = Vec::with_capacity(n);
    for (i, (comp, &ni)) in spec.components.iter().zip(&counts).enumerate() {
        let mut rng = substream(seed, i as u64);
        for _ in 0..ni {
            pts.push(vec![comp.draw(&mut rng)]);
        }
    }
    Ok(Design::new(pts, seed, "cluster1d"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn supports() {
        assert_eq!(ioptimal_support(2).unwrap(), vec![-1.0, 1.0]);
        assert_eq!(ioptimal_support(3).unwrap(), vec![-1.0, 0.0, 1.0]);
        let s4 = ioptimal_support(4).unwrap();
        assert!((s4[2] - 0.4472).abs() < 1e-4);
        assert!(ioptimal_support(5).is_err());
    }

    #[test]
    fn partition_weights_and_modes() {
        let s3 = ClusterSpec::ioptimal(3, 0.5).unwrap();
        assert_eq!(s3.midpoints, vec![-1.0, -0.5, 0.5, 1.0]);
        assert_eq!(s3.weights(), vec![0.25, 0.5, 0.25]);
        let s4 = ClusterSpec::ioptimal(4, 0.5).unwrap();
        let w: Vec<f64> = s4.weights().iter().map(|w| (w * 100.0).round() / 100.0).collect();
        assert_eq!(w, vec![0.14, 0.36, 0.36, 0.14]);
        let d2 = s4.components[1].delta;
        let expect = (-1.0 / 5f64.sqrt() + 0.7236) / 0.7236;
        assert!((d2 - expect).abs() < 1e-4 && (d2 - 0.382).abs() < 1e-3);
        let c = &s4.components[1];
        assert_eq!(c.b, 2.0);
        assert!((c.a - 1.618).abs() < 1e-3);
        assert!(build_partition(&[0.5, 0.1], 0.5).is_err());
    }

    #[test]
    fn mode_params() {
        assert_eq!(beta_mode_params(0.0, 0.25), (1.0, 4.0));
        assert_eq!(beta_mode_params(1.0, 0.25), (4.0, 1.0));
        assert_eq!(beta_mode_params(0.5, 0.5), (2.0, 2.0));
        for &d in &[0.1, 0.382, 0.7, 0.95] {
            let (a, b) = beta_mode_params(d, 0.3);
            assert!(((a - 1.0) * (1.0 - d) - (b - 1.0) * d).abs() < 1e-14);
            assert!(((a - 1.0) / (a + b - 2.0) - d).abs() < 1e-14);
        }
    }

    #[test]
    fn density_normalized_and_moments_match_quadrature() {
        for p in 2..=4 {
            for &nu in &[0.5, 0.04, 0.9] {
                let d = cluster_density_1d(ClusterSpec::ioptimal(p, nu).unwrap());
                let exps: Vec<Vec<u32>> = (0..=6).map(|e| vec![e]).collect();
                let (c1, c2) = d.monomial_moments(&exps);
                let (q1, q2) = crate::density::quadrature_moments(&d.quadrature(), &exps);
                assert!((c1[0] - 1.0).abs() < 1e-10);
                for j in 0..exps.len() {
                    assert!((c1[j] - q1[j]).abs() < 1e-9 * c1[j].abs().max(1.0), "p={p} nu={nu} e={j}");
                    assert!((c2[j] - q2[j]).abs() < 1e-9 * c2[j].abs().max(1.0), "p={p} nu={nu} e={j}");
                }
            }
        }
    }

    #[test]
    fn component_mode_at_support_point() {
        let spec = ClusterSpec::ioptimal(4, 0.5).unwrap();
        let d = cluster_density_1d(spec.clone());
        for comp in &spec.components {
            let h = comp.len() / 1e4;
            let mut best = (f64::NEG_INFINITY, 0.0);
            for i in 0..=10_000 {
                let x = comp.k + i as f64 * h;
                let v = d.pdf(&[x]);
                if v > best.0 {
                    best = (v, x);
                }
            }
            assert!((best.1 - comp.t).abs() <= h + 1e-12, "{} vs {}", best.1, comp.t);
        }
    }

    #[test]
    fn rounding_rule() {
        assert_eq!(largest_remainder(&[0.25, 0.5, 0.25], 10), vec![3, 5, 2]);
        let s4 = ClusterSpec::ioptimal(4, 0.5).unwrap();
        assert_eq!(largest_remainder(&s4.weights(), 10), vec![1, 4, 4, 1]);
        assert_eq!(largest_remainder(&[0.5, 0.5], 10), vec![5, 5]);
    }

    #[test]
    fn stratified_points_in_their_intervals() {
        let spec = ClusterSpec::ioptimal(3, 0.5).unwrap();
        let d = stratified_sample_1d(&spec, 10, 4).unwrap();
        let counts = largest_remainder(&spec.weights(), 10);
        let mut idx = 0;
        for (comp, n) in spec.components.iter().zip(counts) {
            for _ in 0..n {
                let x = d.points[idx][0];
                assert!(x >= comp.k && x <= comp.l);
                idx += 1;
            }
        }
        assert!(stratified_sample_1d(&spec, 2, 4).is_err());
    }

    #[test]
    fn small_nu_concentrates() {
        let spec = ClusterSpec::ioptimal(3, 0.01).unwrap();
        let d = stratified_sample_1d(&spec, 40, 1).unwrap();
        for x in &d.points {
            let nearest = spec.support.iter().map(|t| (x[0] - t).abs()).fold(f64::INFINITY, f64::min);
            assert!(nearest < 0.02);
        }
    }
}
