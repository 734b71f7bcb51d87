//! Replicated random-design experiments: build a strategy's density, draw R designs on
//! per-replicate substreams, evaluate j_ν against the strategy's ψ_Φ, and summarize.

use std::sync::Arc;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::ccd::{build_ccd2d, build_ccdk, sample_ccd2d, sample_ccdk, Ccd2dDensity, CcdKDensity, SiteLog, SiteWeights};
use crate::cluster1d::{cluster_density_1d, largest_remainder, stratified_sample_1d, ClusterDensity1d, ClusterSpec};
use crate::density::SamplingDensity;
use crate::error::{invalid, DesignError, Result};
use crate::huber::{sample_jitter, HuberDensity, JitterDensity, SampleMode};
use crate::io::SCHEMA_VERSION;
use crate::loss::{estimate_j_mc, max_loss_i, mean_sd, LossContext, LossReport, RepValue};
use crate::model::{Design, DesignSpace, RegressorBasis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    JitterComplete,
    JitterStratified,
    SampleFromM,
    Cluster1d,
    Ccd2d,
    Ccdk,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::JitterComplete => "jitter-complete",
            Strategy::JitterStratified => "jitter-stratified",
            Strategy::SampleFromM => "sample-from-m",
            Strategy::Cluster1d => "cluster1d",
            Strategy::Ccd2d => "ccd2d",
            Strategy::Ccdk => "ccdk",
        }
    }

    /// Dimension k in the rule c = ν^k.
    pub fn c_exponent(self, k: usize) -> usize {
        match self {
            Strategy::Ccd2d => 2,
            Strategy::Ccdk => k,
            _ => 1,
        }
    }
}

/// Everything needed to build one family's density and sampler.
#[derive(Debug, Clone, Serialize)]
pub struct FamilyConfig {
    pub strategy: Strategy,
    pub nu: f64,
    /// Defaults to ν^k; only the jitter family accepts another value.
    pub c: Option<f64>,
    pub n: usize,
    /// Polynomial degree for cluster1d (p = degree + 1).
    pub degree: usize,
    /// Dimension for ccdk.
    pub k: usize,
    /// Explicit per-site counts for ccdk.
    pub counts: Option<Vec<usize>>,
}

impl FamilyConfig {
    pub fn new(strategy: Strategy, nu: f64, n: usize) -> Self {
        FamilyConfig {
            strategy,
            nu,
            c: None,
            n,
            degree: 1,
            k: 3,
            counts: None,
        }
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = Some(c);
        self
    }
}

#[derive(Debug)]
enum Family {
    Jitter(Arc<JitterDensity>, SampleMode),
    Huber(Arc<HuberDensity>),
    Cluster(Arc<ClusterDensity1d>),
    Ccd2d(Arc<Ccd2dDensity>),
    CcdK(Arc<CcdKDensity>),
}

/// A constructed strategy: loss context for its Φ, the reference I_ν(Φ), and a sampler.
#[derive(Debug)]
pub struct Prepared {
    pub config: FamilyConfig,
    pub c: f64,
    pub ctx: LossContext,
    /// I_ν(Φ).
    pub reference: LossReport,
    /// I_ν(ξ) of the continuous minimax design (one-dimensional straight line families).
    pub i_nu_xi: Option<f64>,
    /// γ₀ for jitter densities.
    pub gamma0: Option<f64>,
    family: Family,
}

pub fn prepare(cfg: &FamilyConfig) -> Result<Prepared> {
    let nu = cfg.nu;
    if !(nu > 0.0 && nu < 1.0) {
        return Err(invalid(format!("nu = {nu} must lie in (0, 1)")));
    }
    if cfg.n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let rule_c = nu.powi(cfg.strategy.c_exponent(cfg.k) as i32);
    let jitter = matches!(cfg.strategy, Strategy::JitterComplete | Strategy::JitterStratified);
    let c = match cfg.c {
        Some(c) if jitter => c,
        Some(c) if (c - rule_c).abs() > 1e-12 => {
            return Err(invalid(format!(
                "c is fixed at nu^k = {rule_c} for {}; --c applies to the jitter family",
                cfg.strategy.name()
            )))
        }
        _ => rule_c,
    };
    let line = DesignSpace::interval(-1.0, 1.0)?;
    let (family, basis, space): (Family, RegressorBasis, DesignSpace) = match cfg.strategy {
        Strategy::JitterComplete | Strategy::JitterStratified => {
            let mode = if cfg.strategy == Strategy::JitterComplete {
                SampleMode::Complete
            } else {
                SampleMode::Stratified
            };
            (Family::Jitter(Arc::new(JitterDensity::for_nu(nu, cfg.n, c)?), mode), RegressorBasis::SLR, line)
        }
        Strategy::SampleFromM => (Family::Huber(Arc::new(HuberDensity::from_nu(nu)?)), RegressorBasis::SLR, line),
        Strategy::Cluster1d => {
            if cfg.degree == 0 {
                return Err(invalid("degree must be at least 1"));
            }
            let spec = ClusterSpec::ioptimal(cfg.degree + 1, nu)?;
            if cfg.n < spec.components.len() {
                return Err(DesignError::Infeasible(format!(
                    "n = {} is smaller than the number of clusters {}",
                    cfg.n,
                    spec.components.len()
                )));
            }
            (
                Family::Cluster(Arc::new(cluster_density_1d(spec))),
                RegressorBasis::Polynomial { degree: cfg.degree },
                line,
            )
        }
        Strategy::Ccd2d => {
            let spec = build_ccd2d(nu, [-2.0, -2.0], [2.0, 2.0], cfg.n)?;
            (
                Family::Ccd2d(Arc::new(Ccd2dDensity::new(spec))),
                RegressorBasis::FullSecondOrder { k: 2 },
                DesignSpace::cube(2, 2.0)?,
            )
        }
        Strategy::Ccdk => {
            let weights = match &cfg.counts {
                Some(c) => SiteWeights::Counts(c.clone()),
                None => SiteWeights::Default,
            };
            let spec = build_ccdk(cfg.k, nu, weights, cfg.n)?;
            let half = spec.default_half_width();
            (
                Family::CcdK(Arc::new(CcdKDensity::new(spec))),
                RegressorBasis::FullSecondOrder { k: cfg.k },
                DesignSpace::cube(cfg.k, half)?,
            )
        }
    };
    let density: Arc<dyn SamplingDensity> = match &family {
        Family::Jitter(d, _) => d.clone(),
        Family::Huber(d) => d.clone(),
        Family::Cluster(d) => d.clone(),
        Family::Ccd2d(d) => d.clone(),
        Family::CcdK(d) => d.clone(),
    };
    let ctx = LossContext::new(basis, space, density)?;
    let reference = max_loss_i(&ctx, nu)?;
    let (i_nu_xi, gamma0) = match &family {
        Family::Jitter(d, _) => (Some(HuberDensity::from_nu(nu)?.i_nu_xi(nu)), Some(d.lambda2_gamma0().1)),
        Family::Huber(d) => (Some(d.i_nu_xi(nu)), None),
        _ => (None, None),
    };
    Ok(Prepared {
        config: cfg.clone(),
        c,
        ctx,
        reference,
        i_nu_xi,
        gamma0,
        family,
    })
}

impl Prepared {
    pub fn strategy(&self) -> Strategy {
        self.config.strategy
    }

    pub fn sample(&self, seed: u64) -> Result<Design> {
        Ok(self.sample_with_log(seed)?.0)
    }

    /// The design and, for ccd2d, the per-site rejection record.
    pub fn sample_with_log(&self, seed: u64) -> Result<(Design, Vec<SiteLog>)> {
        Ok(match &self.family {
            Family::Jitter(d, mode) => (sample_jitter(d, *mode, seed), Vec::new()),
            Family::Huber(d) => (d.sample_design(self.config.n, seed), Vec::new()),
            Family::Cluster(d) => (stratified_sample_1d(&d.spec, self.config.n, seed)?, Vec::new()),
            Family::Ccd2d(d) => sample_ccd2d(&d.spec, seed),
            Family::CcdK(d) => (sample_ccdk(&d.spec, seed), Vec::new()),
        })
    }

    /// Family-specific description of the construction.
    pub fn metadata(&self) -> Value {
        match &self.family {
            Family::Jitter(d, mode) => json!({
                "quantiles": d.quantiles,
                "half_width": d.half_width(),
                "mode": mode,
                "gamma0": self.gamma0,
            }),
            Family::Huber(d) => json!({ "alpha": d.alpha, "d_alpha": d.d_alpha }),
            Family::Cluster(d) => json!({
                "support": d.spec.support,
                "midpoints": d.spec.midpoints,
                "components": d.spec.components,
                "counts": largest_remainder(&d.spec.weights(), self.config.n),
            }),
            Family::Ccd2d(d) => {
                let s = &d.spec;
                json!({
                    "sites": s.tessellation.generators,
                    "tile_areas": s.tessellation.areas,
                    "weights": s.tessellation.weights,
                    "subtiles": s.subtiles.iter().map(|j| &j.vertices).collect::<Vec<_>>(),
                    "disc_radii": s.discs.iter().map(|sb| sb.radius).collect::<Vec<_>>(),
                    "enclosing_circles": s.enclosing,
                    "q": s.q,
                    "b": s.b,
                    "counts": s.counts,
                })
            }
            Family::CcdK(d) => {
                let s = &d.spec;
                json!({
                    "k": s.k,
                    "sites": s.spheres.iter().map(|sb| &sb.center).collect::<Vec<_>>(),
                    "r0": s.r0,
                    "radius": s.radius,
                    "b": s.b,
                    "weights": s.weights,
                    "counts": s.counts,
                    "half_width": s.default_half_width(),
                })
            }
        }
    }

    /// Per-site counts for the clustered families.
    pub fn counts(&self) -> Option<Vec<usize>> {
        match &self.family {
            Family::Cluster(d) => Some(largest_remainder(&d.spec.weights(), self.config.n)),
            Family::Ccd2d(d) => Some(d.spec.counts.clone()),
            Family::CcdK(d) => Some(d.spec.counts.clone()),
            _ => None,
        }
    }

    pub fn ccd2d_spec(&self) -> Option<&crate::ccd::Ccd2dSpec> {
        match &self.family {
            Family::Ccd2d(d) => Some(&d.spec),
            _ => None,
        }
    }

    pub fn ccdk_spec(&self) -> Option<&crate::ccd::CcdKSpec> {
        match &self.family {
            Family::CcdK(d) => Some(&d.spec),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub family: FamilyConfig,
    pub reps: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Stats {
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    pub finite: usize,
    pub histogram: Histogram,
}

pub const DEFAULT_BINS: usize = 30;

/// Statistics over the finite values; `bins` equal-width bins on [min, max]
/// (a single bin when every value is equal).
pub fn summarize(values: &[f64], bins: usize) -> Result<Stats> {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return Err(DesignError::Numerical("no finite values to summarize".into()));
    }
    if bins == 0 {
        return Err(invalid("need at least one histogram bin"));
    }
    let (mean, sd) = mean_sd(&finite);
    let min = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let max = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let histogram = if max > min {
        let width = (max - min) / bins as f64;
        let edges = (0..=bins).map(|i| if i == bins { max } else { min + width * i as f64 }).collect();
        let mut counts = vec![0; bins];
        for v in &finite {
            counts[(((v - min) / width) as usize).min(bins - 1)] += 1;
        }
        Histogram { edges, counts }
    } else {
        Histogram {
            edges: vec![min, max],
            counts: vec![finite.len()],
        }
    };
    Ok(Stats {
        mean,
        sd,
        min,
        max,
        finite: finite.len(),
        histogram,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    pub schema_version: u32,
    pub strategy: Strategy,
    pub nu: f64,
    pub c: f64,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    pub singular: usize,
    pub histogram: Histogram,
    /// I_ν(Φ) of the strategy's density.
    pub reference: LossReport,
    pub i_nu_xi: Option<f64>,
    pub values: Vec<RepValue>,
}

/// Tolerance of the γ_δ = γ₀ guard for jitter designs.
pub const GAMMA_GUARD_TOL: f64 = 1e-8;

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    let prepared = prepare(&cfg.family)?;
    run_prepared(&prepared, cfg.reps, cfg.seed)
}

pub fn run_prepared(prepared: &Prepared, reps: usize, seed: u64) -> Result<ExperimentSummary> {
    let nu = prepared.config.nu;
    let est = estimate_j_mc(&prepared.ctx, nu, reps, seed, |s| prepared.sample(s))?;
    if let Some(g0) = prepared.gamma0 {
        if let Some(bad) = est
            .values
            .iter()
            .find(|v| v.gamma.is_finite() && (v.gamma - g0).abs() > GAMMA_GUARD_TOL * g0.max(1.0))
        {
            return Err(DesignError::Numerical(format!(
                "replicate {}: gamma_delta = {} differs from gamma_0 = {g0}",
                bad.rep, bad.gamma
            )));
        }
    }
    let j: Vec<f64> = est.values.iter().map(|v| v.j_nu).collect();
    let stats = summarize(&j, DEFAULT_BINS)?;
    Ok(ExperimentSummary {
        schema_version: SCHEMA_VERSION,
        strategy: prepared.strategy(),
        nu,
        c: prepared.c,
        n: prepared.config.n,
        reps,
        seed,
        mean: stats.mean,
        sd: stats.sd,
        min: stats.min,
        max: stats.max,
        singular: est.singular,
        histogram: stats.histogram,
        reference: prepared.reference.clone(),
        i_nu_xi: prepared.i_nu_xi,
        values: est.values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest};

    #[test]
    fn constant_values() {
        let s = summarize(&[2.5; 7], DEFAULT_BINS).unwrap();
        assert_eq!(s.sd, 0.0);
        assert_eq!(s.histogram.counts, vec![7]);
    }

    #[test]
    fn all_infinite_is_an_error() {
        assert!(summarize(&[f64::INFINITY, f64::INFINITY], DEFAULT_BINS).is_err());
    }

    proptest! {
        #[test]
        fn summary_matches_two_pass(values in proptest::collection::vec(-1e3f64..1e3, 1..200), inf in 0usize..5) {
            let mut v = values.clone();
            v.extend(std::iter::repeat_n(f64::INFINITY, inf));
            let s = summarize(&v, DEFAULT_BINS).unwrap();
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            prop_assert!((s.mean - mean).abs() <= 1e-12 * mean.abs().max(1.0));
            if values.len() > 1 {
                let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
                prop_assert!((s.sd - var.sqrt()).abs() <= 1e-12 * var.sqrt().max(1.0));
            }
            prop_assert_eq!(s.histogram.counts.iter().sum::<usize>(), values.len());
            prop_assert_eq!(s.finite, values.len());
        }
    }

    #[test]
    fn single_replicate() {
        let cfg = ExperimentConfig {
            family: FamilyConfig::new(Strategy::JitterStratified, 0.5, 10).with_c(0.5),
            reps: 1,
            seed: 4,
        };
        let s = run_experiment(&cfg).unwrap();
        assert_eq!(s.mean, s.values[0].j_nu);
        assert_eq!(s.sd, 0.0);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let cfg = ExperimentConfig {
            family: FamilyConfig::new(Strategy::Cluster1d, 0.5, 10),
            reps: 40,
            seed: 11,
        };
        let a = run_experiment(&cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| run_experiment(&cfg).unwrap());
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.sd.to_bits(), b.sd.to_bits());
        assert_eq!(a.histogram, b.histogram);
    }

    #[test]
    fn construction_failures_abort() {
        let cfg = ExperimentConfig {
            family: FamilyConfig::new(Strategy::JitterComplete, 0.5, 10).with_c(1.0),
            reps: 10,
            seed: 1,
        };
        assert!(matches!(run_experiment(&cfg), Err(DesignError::Infeasible(_))));
        let cfg = FamilyConfig::new(Strategy::Ccd2d, 0.5, 50).with_c(0.3);
        assert!(matches!(prepare(&cfg), Err(DesignError::InvalidParameter(_))));
    }
}
