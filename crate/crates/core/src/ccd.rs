//! Clustered central composite designs: spherical beta densities around the CCD
//! support, sampled on contracted Voronoi tiles (k = 2) or on disjoint spheres (k ≥ 3).

use std::f64::consts::PI;

use rand::RngCore;
use serde::Serialize;

use crate::density::{QuadNode, SamplingDensity};
use crate::error::{invalid, DesignError, Result};
use crate::geom::{contract_tile, min_enclosing_circle, polygon_nodes, voronoi_clipped, Circle, ConvexPolygon, Point2, Tessellation2D, POLYGON_QUAD_ORDER};
use crate::model::Design;
use crate::quadrature::{gauss_legendre, tanh_sinh_unit};
use crate::rng::{open01, standard_normal, substream};
use crate::special::{beta_inv_cdf, ln_beta, ln_gamma};

/// 2^k corners (binary order, −1 before +1, first coordinate most significant),
/// then axial points (axis by axis, −√k before +√k), then the centre.
pub fn ccd_support(k: usize) -> Result<Vec<Vec<f64>>> {
    if k < 2 {
        return Err(invalid(format!("central composite designs need k >= 2, got {k}")));
    }
    let mut pts = Vec::with_capacity((1 << k) + 2 * k + 1);
    for m in 0..(1usize << k) {
        pts.push((0..k).map(|j| if (m >> (k - 1 - j)) & 1 == 1 { 1.0 } else { -1.0 }).collect());
    }
    let r = (k as f64).sqrt();
    for j in 0..k {
        for s in [-r, r] {
            let mut p = vec![0.0; k];
            p[j] = s;
            pts.push(p);
        }
    }
    pts.push(vec![0.0; k]);
    Ok(pts)
}

/// f^(k)(x; t, R, b): on the ball of radius R about t, ‖x − t‖/R ~ Beta(k, b).
#[derive(Debug, Clone, Serialize)]
pub struct SphericalBeta {
    pub center: Vec<f64>,
    pub radius: f64,
    pub b: f64,
    log_norm: f64,
}

impl SphericalBeta {
    pub fn new(center: Vec<f64>, radius: f64, b: f64) -> Result<Self> {
        let k = center.len();
        if k == 0 || !(radius > 0.0) || !(b >= 1.0) {
            return Err(invalid(format!("need k >= 1, R > 0, b >= 1 (got k={k}, R={radius}, b={b})")));
        }
        let kf = k as f64;
        let log_norm = ln_gamma(kf / 2.0) - (2.0f64).ln() - kf / 2.0 * PI.ln() - kf * radius.ln() - ln_beta(kf, b);
        Ok(SphericalBeta {
            center,
            radius,
            b,
            log_norm,
        })
    }

    pub fn k(&self) -> usize {
        self.center.len()
    }

    /// Normalizing constant Γ(k/2) / (2π^{k/2} R^k B(k, b)).
    pub fn norm(&self) -> f64 {
        self.log_norm.exp()
    }

    fn pdf_at_distance(&self, r: f64) -> f64 {
        if r > self.radius {
            return 0.0;
        }
        let shape = if self.b == 1.0 { 1.0 } else { (1.0 - r / self.radius).powf(self.b - 1.0) };
        self.norm() * shape
    }

    pub fn dist(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.center).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt()
    }

    pub fn pdf(&self, x: &[f64]) -> f64 {
        self.pdf_at_distance(self.dist(x))
    }

    /// Polar draw: ρ ~ Beta(k, b) by inverse CDF, then the angles.
    pub fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        let k = self.k();
        let rho = beta_inv_cdf(k as f64, self.b, open01(rng));
        let dir = sample_direction(k, rng);
        self.center.iter().zip(dir).map(|(c, d)| c + self.radius * rho * d).collect()
    }
}

/// Unit vector from angles θ_1..θ_{k−1}: for i ≤ k − 2, sin²θ_i ~ Beta(1/2, (k − i)/2)
/// with a random sign (the law with density ∝ cos^{k−i−1}θ on (−π/2, π/2)), and
/// θ_{k−1} ~ U(−π, π). y_i = cos θ_1 ⋯ cos θ_{i−1} sin θ_i, y_k = cos θ_1 ⋯ cos θ_{k−1}.
pub fn sample_direction(k: usize, rng: &mut dyn RngCore) -> Vec<f64> {
    let mut y = vec![0.0; k];
    let mut prod = 1.0;
    for i in 1..k.saturating_sub(1) {
        let z = beta_inv_cdf(0.5, (k - i) as f64 / 2.0, open01(rng));
        let mut theta = z.sqrt().asin();
        if open01(rng) < 0.5 {
            theta = -theta;
        }
        y[i - 1] = prod * theta.sin();
        prod *= theta.cos();
    }
    if k == 1 {
        y[0] = if open01(rng) < 0.5 { -1.0 } else { 1.0 };
        return y;
    }
    let phi = PI * (2.0 * open01(rng) - 1.0);
    y[k - 2] = prod * phi.sin();
    y[k - 1] = prod * phi.cos();
    y
}

/// Acceptance mass q = ∫_J f^(2) with the quadrature order that achieved it.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AcceptanceMass {
    pub q: f64,
    pub order: usize,
}

const Q_ORDERS: [usize; 4] = [POLYGON_QUAD_ORDER, 32, 64, 128];
const Q_TOL: f64 = 1e-12;

/// q = ∫_J f^(2) dx by fan quadrature from the sphere centre, doubling the order
/// until successive values agree to 1e-12.
pub fn acceptance_mass_q(subtile: &ConvexPolygon, sb: &SphericalBeta) -> Result<AcceptanceMass> {
    if sb.k() != 2 {
        return Err(DesignError::DimensionMismatch { expected: 2, got: sb.k() });
    }
    if subtile.vertices.iter().any(|v| sb.dist(v) > sb.radius * (1.0 + 1e-12)) {
        return Err(invalid("subtile is not contained in the sampling disc"));
    }
    let apex = [sb.center[0], sb.center[1]];
    let integrate = |order: usize| -> Result<f64> {
        Ok(polygon_nodes(subtile, apex, order)?
            .iter()
            .map(|(x, w)| w * sb.pdf(x))
            .sum())
    };
    let mut prev = integrate(Q_ORDERS[0])?;
    for &order in &Q_ORDERS[1..] {
        let cur = integrate(order)?;
        if (cur - prev).abs() <= Q_TOL * cur.abs().max(1.0) {
            // report the lower order: it already agrees with the refinement
            let used = Q_ORDERS[Q_ORDERS.iter().position(|&o| o == order).unwrap() - 1];
            return Ok(AcceptanceMass { q: prev, order: used });
        }
        prev = cur;
    }
    Err(DesignError::Numerical(format!(
        "acceptance mass quadrature did not converge by order {}",
        Q_ORDERS[Q_ORDERS.len() - 1]
    )))
}

/// Post-hoc estimate of q: the fraction of `draws` disc samples landing in the subtile,
/// with its binomial standard error.
pub fn acceptance_rate_mc(subtile: &ConvexPolygon, sb: &SphericalBeta, draws: usize, seed: u64) -> (f64, f64) {
    let mut rng = substream(seed, 0);
    let hits = (0..draws)
        .filter(|_| {
            let x = sb.sample(&mut rng);
            subtile.contains([x[0], x[1]])
        })
        .count();
    let p = hits as f64 / draws as f64;
    (p, (p * (1.0 - p) / draws as f64).sqrt())
}

/// Per-site counts: nearest-integer n ω_i for every site but the last (the centre),
/// which receives the remainder.
pub fn allocate_center_remainder(weights: &[f64], n: usize) -> Result<Vec<usize>> {
    let m = weights.len();
    if n < m {
        return Err(DesignError::Infeasible(format!("n = {n} is smaller than the number of sites {m}")));
    }
    let mut counts: Vec<usize> = weights[..m - 1].iter().map(|w| (n as f64 * w).round() as usize).collect();
    let used: usize = counts.iter().sum();
    if used >= n {
        return Err(DesignError::Infeasible(format!(
            "peripheral sites take {used} of {n} points, leaving none for the centre"
        )));
    }
    counts.push(n - used);
    if let Some(i) = counts.iter().position(|&c| c == 0) {
        return Err(DesignError::Infeasible(format!("site {} would receive no points", i + 1)));
    }
    Ok(counts)
}

/// Two-dimensional clustered CCD on a Voronoi tessellation of the design space.
#[derive(Debug, Clone, Serialize)]
pub struct Ccd2dSpec {
    pub nu: f64,
    /// c = ν².
    pub c: f64,
    /// b = 1/c.
    pub b: f64,
    pub lower: Point2,
    pub upper: Point2,
    pub tessellation: Tessellation2D,
    pub subtiles: Vec<ConvexPolygon>,
    /// Sampling discs S(t_i, R_i), R_i the largest distance from t_i to a vertex of J_i.
    pub discs: Vec<SphericalBeta>,
    /// Smallest enclosing circles of the subtiles (for reference; not centred at t_i in general).
    pub enclosing: Vec<Circle>,
    pub q: Vec<AcceptanceMass>,
    pub counts: Vec<usize>,
}

pub fn build_ccd2d(nu: f64, lower: Point2, upper: Point2, n: usize) -> Result<Ccd2dSpec> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(invalid(format!("nu = {nu} must lie in (0, 1)")));
    }
    let sites: Vec<Point2> = ccd_support(2)?.iter().map(|p| [p[0], p[1]]).collect();
    let tessellation = voronoi_clipped(&sites, lower, upper)?;
    let c = nu * nu;
    let b = 1.0 / c;
    let mut subtiles = Vec::new();
    let mut discs = Vec::new();
    let mut enclosing = Vec::new();
    let mut q = Vec::new();
    for (t, tile) in sites.iter().zip(&tessellation.tiles) {
        let j = contract_tile(tile, *t, c)?;
        let radius = j.vertices.iter().map(|v| (v[0] - t[0]).hypot(v[1] - t[1])).fold(0.0, f64::max);
        let sb = SphericalBeta::new(t.to_vec(), radius, b)?;
        q.push(acceptance_mass_q(&j, &sb)?);
        enclosing.push(min_enclosing_circle(&j.vertices)?);
        discs.push(sb);
        subtiles.push(j);
    }
    let counts = allocate_center_remainder(&tessellation.weights, n)?;
    Ok(Ccd2dSpec {
        nu,
        c,
        b,
        lower,
        upper,
        tessellation,
        subtiles,
        discs,
        enclosing,
        q,
        counts,
    })
}

/// Per-site rejection record.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SiteLog {
    pub drawn: usize,
    pub accepted: usize,
    pub rejected: Vec<Vec<f64>>,
}

/// Stratified rejection sampling: site i draws from its disc on substream (seed, i) until
/// n_i points land in J_i. Points are returned site by site.
pub fn sample_ccd2d(spec: &Ccd2dSpec, seed: u64) -> (Design, Vec<SiteLog>) {
    let mut pts = Vec::with_capacity(spec.counts.iter().sum());
    let mut logs = Vec::with_capacity(spec.counts.len());
    for (i, &ni) in spec.counts.iter().enumerate() {
        let mut rng = substream(seed, i as u64);
        let mut log = SiteLog::default();
        while log.accepted < ni {
            let x = spec.discs[i].sample(&mut rng);
            log.drawn += 1;
            if spec.subtiles[i].contains([x[0], x[1]]) {
                log.accepted += 1;
                pts.push(x);
            } else {
                log.rejected.push(x);
            }
        }
        logs.push(log);
    }
    (Design::new(pts, seed, "ccd2d"), logs)
}

/// φ(x; ν) = Σ (ω_i / q_i) f^(2)(x; t_i, R_i, 1/ν²) I(x ∈ J_i).
#[derive(Debug, Clone, Serialize)]
pub struct Ccd2dDensity {
    pub spec: Ccd2dSpec,
}

impl Ccd2dDensity {
    pub fn new(spec: Ccd2dSpec) -> Self {
        Ccd2dDensity { spec }
    }

    fn site_scale(&self, i: usize) -> f64 {
        self.spec.tessellation.weights[i] / self.spec.q[i].q
    }

    fn draw_at_site(&self, i: usize, rng: &mut dyn RngCore) -> Vec<f64> {
        loop {
            let x = self.spec.discs[i].sample(rng);
            if self.spec.subtiles[i].contains([x[0], x[1]]) {
                return x;
            }
        }
    }
}

impl SamplingDensity for Ccd2dDensity {
    fn dim(&self) -> usize {
        2
    }

    fn pdf(&self, x: &[f64]) -> f64 {
        let p = [x[0], x[1]];
        self.spec
            .subtiles
            .iter()
            .position(|j| j.contains(p))
            .map(|i| self.site_scale(i) * self.spec.discs[i].pdf(x))
            .unwrap_or(0.0)
    }

    fn quadrature(&self) -> Vec<QuadNode> {
        let mut out = Vec::new();
        for (i, j) in self.spec.subtiles.iter().enumerate() {
            let sb = &self.spec.discs[i];
            let apex = [sb.center[0], sb.center[1]];
            let scale = self.site_scale(i);
            let nodes = polygon_nodes(j, apex, self.spec.q[i].order).expect("apex inside subtile");
            out.extend(nodes.into_iter().map(|(x, w)| QuadNode {
                x: x.to_vec(),
                weight: w,
                phi: scale * sb.pdf(&x),
            }));
        }
        out
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        let u = open01(rng);
        let mut acc = 0.0;
        let w = &self.spec.tessellation.weights;
        let i = w
            .iter()
            .position(|wi| {
                acc += wi;
                u < acc
            })
            .unwrap_or(w.len() - 1);
        self.draw_at_site(i, rng)
    }

    fn label(&self) -> String {
        format!("ccd2d(nu={})", self.spec.nu)
    }
}

/// k ≥ 3 clustered CCD on disjoint spheres S(t_i, r_0 ν).
#[derive(Debug, Clone, Serialize)]
pub struct CcdKSpec {
    pub k: usize,
    pub nu: f64,
    /// c = ν^k.
    pub c: f64,
    /// b = 1/c.
    pub b: f64,
    /// r_0 = min(1, √k/2).
    pub r0: f64,
    /// r_0 c^{1/k} = r_0 ν.
    pub radius: f64,
    pub spheres: Vec<SphericalBeta>,
    pub weights: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Default k ≥ 3 weights: every peripheral site 1, the centre 2, normalized.
pub fn default_ccdk_weights(k: usize) -> Vec<f64> {
    let m = (1 << k) + 2 * k + 1;
    let total = (m + 1) as f64;
    let mut w = vec![1.0 / total; m];
    w[m - 1] = 2.0 / total;
    w
}

/// Site weights: explicit weights (summing to 1), raw counts (normalized; these also
/// fix the allocation), or the default.
#[derive(Debug, Clone)]
pub enum SiteWeights {
    Default,
    Weights(Vec<f64>),
    Counts(Vec<usize>),
}

pub fn build_ccdk(k: usize, nu: f64, weights: SiteWeights, n: usize) -> Result<CcdKSpec> {
    if k < 3 {
        return Err(invalid(format!("the sphere construction is for k >= 3, got {k}")));
    }
    if !(nu > 0.0 && nu < 1.0) {
        return Err(invalid(format!("nu = {nu} must lie in (0, 1)")));
    }
    let sites = ccd_support(k)?;
    let m = sites.len();
    let (w, counts) = match weights {
        SiteWeights::Default => {
            let w = default_ccdk_weights(k);
            let counts = allocate_center_remainder(&w, n)?;
            (w, counts)
        }
        SiteWeights::Weights(w) => {
            if w.len() != m {
                return Err(DesignError::DimensionMismatch { expected: m, got: w.len() });
            }
            let s: f64 = w.iter().sum();
            if w.iter().any(|v| !(*v > 0.0)) || (s - 1.0).abs() > 1e-9 {
                return Err(invalid(format!("weights must be positive and sum to 1 (sum = {s})")));
            }
            let counts = allocate_center_remainder(&w, n)?;
            (w, counts)
        }
        SiteWeights::Counts(c) => {
            if c.len() != m {
                return Err(DesignError::DimensionMismatch { expected: m, got: c.len() });
            }
            let total: usize = c.iter().sum();
            if c.contains(&0) || (n != 0 && total != n) {
                return Err(invalid(format!("counts must be positive and sum to n (sum = {total}, n = {n})")));
            }
            (c.iter().map(|&v| v as f64 / total as f64).collect(), c)
        }
    };
    let kf = k as f64;
    let c = nu.powi(k as i32);
    let b = 1.0 / c;
    let r0 = 1f64.min(kf.sqrt() / 2.0);
    let radius = r0 * c.powf(1.0 / kf);
    let mut min_d = f64::INFINITY;
    let mut pair = (0, 0);
    for i in 0..m {
        for j in i + 1..m {
            let d = sites[i].iter().zip(&sites[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            if d < min_d {
                min_d = d;
                pair = (i, j);
            }
        }
    }
    if 2.0 * radius > min_d {
        return Err(DesignError::Infeasible(format!(
            "sampling spheres of radius {radius} about sites {} and {} overlap (distance {min_d})",
            pair.0 + 1,
            pair.1 + 1
        )));
    }
    let spheres = sites
        .into_iter()
        .map(|t| SphericalBeta::new(t, radius, b))
        .collect::<Result<Vec<_>>>()?;
    Ok(CcdKSpec {
        k,
        nu,
        c,
        b,
        r0,
        radius,
        spheres,
        weights: w,
        counts,
    })
}

impl CcdKSpec {
    /// Half-width L of the default design space [−L, L]^k: the larger of 2 and the
    /// axial reach √k + r_0 ν, so every sphere lies inside.
    pub fn default_half_width(&self) -> f64 {
        2f64.max((self.k as f64).sqrt() + self.radius)
    }
}

/// Site i draws n_i points from its sphere on substream (seed, i).
pub fn sample_ccdk(spec: &CcdKSpec, seed: u64) -> Design {
    let mut pts = Vec::with_capacity(spec.counts.iter().sum());
    for (i, (sb, &ni)) in spec.spheres.iter().zip(&spec.counts).enumerate() {
        let mut rng = substream(seed, i as u64);
        for _ in 0..ni {
            pts.push(sb.sample(&mut rng));
        }
    }
    Design::new(pts, seed, "ccdk")
}

/// φ(x; ν) = Σ ω_i f^(k)(x; t_i, r_0 ν, 1/c) on disjoint spheres.
#[derive(Debug, Clone, Serialize)]
pub struct CcdKDensity {
    pub spec: CcdKSpec,
    /// Gauss-Legendre order for each polar angle in the product quadrature.
    #[serde(skip)]
    pub angular_order: usize,
}

impl CcdKDensity {
    pub fn new(spec: CcdKSpec) -> Self {
        // the product rule grows like order^(k-1); trade accuracy for size in higher k
        let angular_order = match spec.k {
            3 => 14,
            4 => 8,
            _ => 4,
        };
        CcdKDensity { spec, angular_order }
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// ∫_{S^{k−1}} u^m dσ(u).
fn sphere_monomial(m: &[u32]) -> f64 {
    if m.iter().any(|v| v % 2 == 1) {
        return 0.0;
    }
    let k = m.len() as f64;
    let total: u32 = m.iter().sum();
    let log = 2f64.ln() + m.iter().map(|&v| ln_gamma((v as f64 + 1.0) / 2.0)).sum::<f64>()
        - ln_gamma((total as f64 + k) / 2.0);
    log.exp()
}

/// (∫ x^e f, ∫ x^e f²) for one spherical beta, exactly.
fn spherical_moments(sb: &SphericalBeta, e: &[u32]) -> (f64, f64) {
    let k = sb.k();
    let kf = k as f64;
    let r = sb.radius;
    let norm = sb.norm();
    let (mut s1, mut s2) = (0.0, 0.0);
    // enumerate m ≤ e componentwise
    let mut m = vec![0u32; k];
    loop {
        let total: u32 = m.iter().sum();
        let sph = sphere_monomial(&m);
        if sph != 0.0 {
            let coef: f64 = (0..k)
                .map(|d| binomial(e[d], m[d]) * sb.center[d].powi((e[d] - m[d]) as i32))
                .product();
            let radial = r.powi(total as i32 + k as i32) * coef * sph;
            let p = total as f64 + kf;
            s1 += radial * (ln_beta(p, sb.b)).exp();
            s2 += radial * (ln_beta(p, 2.0 * (sb.b - 1.0) + 1.0)).exp();
        }
        let mut d = 0;
        loop {
            if d == k {
                return (norm * s1, norm * norm * s2);
            }
            if m[d] < e[d] {
                m[d] += 1;
                break;
            }
            m[d] = 0;
            d += 1;
        }
    }
}

/// Product rule on S^{k−1} in the angles of the polar sampler: Gauss-Legendre in each
/// θ_i ∈ (−π/2, π/2) with weight cos^{k−i−1}θ_i, and an equispaced rule in θ_{k−1}.
fn sphere_rule(k: usize, order: usize) -> Vec<(Vec<f64>, f64)> {
    let gl = gauss_legendre(order).mapped(-PI / 2.0, PI / 2.0);
    let az = 2 * order;
    let mut out = vec![(Vec::<f64>::new(), 1.0, 1.0)];
    for i in 1..k - 1 {
        let mut next = Vec::with_capacity(out.len() * order);
        for (y, w, prod) in &out {
            for (th, wt) in gl.nodes.iter().zip(&gl.weights) {
                let mut yy = y.clone();
                yy.push(prod * th.sin());
                next.push((yy, w * wt * th.cos().powi((k - i - 1) as i32), prod * th.cos()));
            }
        }
        out = next;
    }
    let mut rule = Vec::with_capacity(out.len() * az);
    for (y, w, prod) in out {
        for j in 0..az {
            let phi = -PI + 2.0 * PI * (j as f64 + 0.5) / az as f64;
            let mut yy = y.clone();
            yy.push(prod * phi.sin());
            yy.push(prod * phi.cos());
            rule.push((yy, w * 2.0 * PI / az as f64));
        }
    }
    rule
}

impl SamplingDensity for CcdKDensity {
    fn dim(&self) -> usize {
        self.spec.k
    }

    fn pdf(&self, x: &[f64]) -> f64 {
        self.spec
            .spheres
            .iter()
            .zip(&self.spec.weights)
            .find(|(sb, _)| sb.dist(x) <= sb.radius)
            .map(|(sb, w)| w * sb.pdf(x))
            .unwrap_or(0.0)
    }

    /// Radial tanh-sinh × angular product rule on every sphere.
    fn quadrature(&self) -> Vec<QuadNode> {
        let k = self.spec.k;
        let dirs = sphere_rule(k, self.angular_order);
        let radial = tanh_sinh_unit(12);
        let mut out = Vec::with_capacity(dirs.len() * radial.len() * self.spec.spheres.len());
        for (sb, w) in self.spec.spheres.iter().zip(&self.spec.weights) {
            let r = sb.radius;
            for node in &radial {
                let rho = node.u;
                let shape = if sb.b == 1.0 { 1.0 } else { node.one_minus_u.powf(sb.b - 1.0) };
                let phi = w * sb.norm() * shape;
                let wr = node.weight * r.powi(k as i32) * rho.powi(k as i32 - 1);
                for (u, wu) in &dirs {
                    out.push(QuadNode {
                        x: sb.center.iter().zip(u).map(|(c, d)| c + r * rho * d).collect(),
                        weight: wr * wu,
                        phi,
                    });
                }
            }
        }
        out
    }

    fn monomial_moments(&self, exps: &[Vec<u32>]) -> (Vec<f64>, Vec<f64>) {
        let mut first = vec![0.0; exps.len()];
        let mut second = vec![0.0; exps.len()];
        for (sb, w) in self.spec.spheres.iter().zip(&self.spec.weights) {
            for (j, e) in exps.iter().enumerate() {
                let (a, b) = spherical_moments(sb, e);
                first[j] += w * a;
                second[j] += w * w * b;
            }
        }
        (first, second)
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        let u = open01(rng);
        let mut acc = 0.0;
        let w = &self.spec.weights;
        let i = w
            .iter()
            .position(|wi| {
                acc += wi;
                u < acc
            })
            .unwrap_or(w.len() - 1);
        self.spec.spheres[i].sample(rng)
    }

    fn label(&self) -> String {
        format!("ccdk(k={}, nu={})", self.spec.k, self.spec.nu)
    }
}

/// Uniform direction from normalized Gaussians (used by the polar Monte Carlo checks).
pub fn gaussian_direction(k: usize, rng: &mut dyn RngCore) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..k).map(|_| standard_normal(rng)).collect();
        let n = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 1e-12 {
            return g.into_iter().map(|v| v / n).collect();
        }
    }
}
