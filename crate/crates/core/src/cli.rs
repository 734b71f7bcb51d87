//! Command-line front end.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::ccd::SiteLog;
use crate::error::{invalid, DesignError, Result};
use crate::harness::{prepare, run_prepared, FamilyConfig, Prepared, Strategy};
use crate::huber::{HuberDensity, SampleMode};
use crate::io::{design_csv, fmt_f64, read_design_csv, reps_csv, to_json, with_ext, write_atomic, SCHEMA_VERSION};
use crate::linalg::null_directions;
use crate::loss::{j_nu, LossReport};
use crate::model::{design_moments, Design};
use crate::plot;

#[derive(Debug, Parser)]
#[command(name = "robust-design", version, about = "Minimax robust random designs: construction, loss, simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// Bias weight ν in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    nu: f64,
    /// Size parameter c; defaults to ν^k.
    #[arg(long)]
    c: Option<f64>,
    /// Number of design points.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Jitter sampling mode.
    #[arg(long, value_enum)]
    mode: Option<SampleMode>,
    /// Output prefix: writes PREFIX.csv, PREFIX.json and, with --plot, PREFIX.svg.
    #[arg(long)]
    out: Option<PathBuf>,
    /// What to print on stdout when --out is absent.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    plot: bool,
    /// Error variance; only enters the reported scale (σ² + τ²)/n.
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    /// Contamination bound; only enters the reported scale.
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
}

#[derive(Debug, Clone, Args)]
struct FamilyArgs {
    /// Polynomial degree (cluster1d).
    #[arg(long, default_value_t = 1)]
    degree: usize,
    /// Dimension (ccdk).
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Comma-separated per-site counts (ccdk).
    #[arg(long, value_delimiter = ',')]
    counts: Option<Vec<usize>>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Continuous minimax density m for straight line regression.
    Huber {
        #[command(flatten)]
        common: Common,
    },
    /// Jittered design around the quantiles of m.
    Jitter {
        #[command(flatten)]
        common: Common,
    },
    /// Clustered design around the I-optimal support for polynomial regression.
    Cluster1d {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        degree: usize,
    },
    /// Clustered central composite design in the plane.
    Ccd2d {
        #[command(flatten)]
        common: Common,
    },
    /// Clustered central composite design on spheres, k >= 3.
    Ccdk {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, value_delimiter = ',')]
        counts: Option<Vec<usize>>,
    },
    /// Evaluate a design CSV against a strategy's density.
    Loss {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        design: PathBuf,
        #[arg(long, value_enum)]
        strategy: Strategy,
    },
    /// Replicated experiment.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_enum)]
        strategy: Strategy,
        #[arg(long, default_value_t = 1000)]
        reps: usize,
    },
}

/// Parse `argv`, run, and return the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Huber { common } => huber(&common),
        Command::Jitter { common } => {
            let strategy = jitter_strategy(common.mode.unwrap_or(SampleMode::Stratified));
            emit_design(&common, family_config(strategy, &common, None, 10)?)
        }
        Command::Cluster1d { common, degree } => {
            let fam = FamilyArgs { degree, k: 1, counts: None };
            emit_design(&common, family_config(Strategy::Cluster1d, &common, Some(&fam), 10)?)
        }
        Command::Ccd2d { common } => emit_design(&common, family_config(Strategy::Ccd2d, &common, None, 50)?),
        Command::Ccdk { common, k, counts } => {
            let fam = FamilyArgs { degree: 1, k, counts };
            let n = ccdk_default_n(&fam);
            emit_design(&common, family_config(Strategy::Ccdk, &common, Some(&fam), n)?)
        }
        Command::Loss {
            common,
            family,
            design,
            strategy,
        } => loss(&common, &family, &design, strategy),
        Command::Simulate {
            common,
            family,
            strategy,
            reps,
        } => simulate(&common, &family, strategy, reps),
    }
}

fn jitter_strategy(mode: SampleMode) -> Strategy {
    match mode {
        SampleMode::Complete => Strategy::JitterComplete,
        SampleMode::Stratified => Strategy::JitterStratified,
    }
}

/// Five points per site with the centre doubled, or the sum of explicit counts.
fn ccdk_default_n(fam: &FamilyArgs) -> usize {
    match &fam.counts {
        Some(c) => c.iter().sum(),
        None => 5 * ((1usize << fam.k.min(20)) + 2 * fam.k + 2),
    }
}

fn default_n(strategy: Strategy, fam: &FamilyArgs) -> usize {
    match strategy {
        Strategy::Ccd2d => 50,
        Strategy::Ccdk => ccdk_default_n(fam),
        _ => 10,
    }
}

fn family_config(strategy: Strategy, common: &Common, fam: Option<&FamilyArgs>, default_n: usize) -> Result<FamilyConfig> {
    let strategy = match (strategy, common.mode) {
        (Strategy::JitterComplete | Strategy::JitterStratified, Some(m)) => jitter_strategy(m),
        (s, Some(_)) => {
            return Err(invalid(format!("--mode applies to the jitter family, not {}", s.name())));
        }
        (s, None) => s,
    };
    let mut cfg = FamilyConfig::new(strategy, common.nu, common.n.unwrap_or(default_n));
    cfg.c = common.c;
    if let Some(f) = fam {
        cfg.degree = f.degree;
        cfg.k = f.k;
        cfg.counts = f.counts.clone();
    }
    Ok(cfg)
}

#[derive(Serialize)]
struct LossDoc {
    schema_version: u32,
    nu: f64,
    c: f64,
    n: usize,
    seed: u64,
    strategy: String,
    variance_term: f64,
    bias_term: f64,
    combined: f64,
    scale_note: String,
    scale: f64,
    sigma2: f64,
    tau: f64,
    /// I_ν(Φ) of the density the design was evaluated against.
    reference: LossReport,
    i_nu_xi: Option<f64>,
    metadata: Value,
    points: Vec<Vec<f64>>,
}

fn loss_doc(common: &Common, prepared: &Prepared, design: &Design, report: &LossReport) -> Result<LossDoc> {
    if !(common.sigma2 >= 0.0) || !(common.tau > 0.0) {
        return Err(invalid("need sigma2 >= 0 and tau > 0"));
    }
    let n = design.n();
    let scale = (common.sigma2 + common.tau * common.tau) / n as f64;
    Ok(LossDoc {
        schema_version: SCHEMA_VERSION,
        nu: prepared.config.nu,
        c: prepared.c,
        n,
        seed: design.seed,
        strategy: design.strategy.clone(),
        variance_term: report.variance_term,
        bias_term: report.bias_term,
        combined: report.combined,
        scale_note: format!(
            "losses are in units of (sigma2 + tau^2)/n = {}; expected imse = scale * combined",
            fmt_f64(scale)
        ),
        scale,
        sigma2: common.sigma2,
        tau: common.tau,
        reference: prepared.reference.clone(),
        i_nu_xi: prepared.i_nu_xi,
        metadata: prepared.metadata(),
        points: design.points.clone(),
    })
}

/// j_ν of `design` against the prepared density; a singular M_δ is an error.
fn evaluate(prepared: &Prepared, design: &Design) -> Result<LossReport> {
    let report = j_nu(&prepared.ctx, design, prepared.config.nu)?;
    if !report.is_finite() {
        let (md, _) = design_moments(&prepared.ctx.basis, design, None)?;
        return Err(DesignError::Singular {
            what: "design information matrix",
            directions: null_directions(&md, 1e-12),
        });
    }
    Ok(report)
}

fn emit_design(common: &Common, cfg: FamilyConfig) -> Result<()> {
    let prepared = prepare(&cfg)?;
    let (design, logs) = prepared.sample_with_log(common.seed)?;
    let report = evaluate(&prepared, &design)?;
    let doc = loss_doc(common, &prepared, &design, &report)?;
    let csv = design_csv(&design)?;
    let json = to_json(&doc)?;
    match &common.out {
        Some(prefix) => {
            write_atomic(&with_ext(prefix, "csv"), csv.as_bytes())?;
            write_atomic(&with_ext(prefix, "json"), json.as_bytes())?;
            if common.plot {
                write_atomic(&with_ext(prefix, "svg"), design_plot(&prepared, &design, &logs).as_bytes())?;
            }
        }
        None => print!("{}", if common.format == Format::Csv { csv } else { json }),
    }
    Ok(())
}

fn design_plot(prepared: &Prepared, design: &Design, logs: &[SiteLog]) -> String {
    let title = format!("{} design, nu = {}, n = {}", prepared.strategy().name(), prepared.config.nu, design.n());
    if let Some(spec) = prepared.ccd2d_spec() {
        let mut polys: Vec<Vec<[f64; 2]>> = spec.tessellation.tiles.iter().map(|t| t.vertices.clone()).collect();
        polys.extend(spec.subtiles.iter().map(|j| j.vertices.clone()));
        let circles: Vec<([f64; 2], f64)> = spec.discs.iter().map(|d| ([d.center[0], d.center[1]], d.radius)).collect();
        let rejected: Vec<Vec<f64>> = logs.iter().flat_map(|l| l.rejected.iter().cloned()).collect();
        return plot::scatter(&title, (spec.lower, spec.upper), &design.points, &rejected, &polys, &circles);
    }
    if let Some(spec) = prepared.ccdk_spec() {
        let l = spec.default_half_width();
        let circles: Vec<([f64; 2], f64)> = spec
            .spheres
            .iter()
            .map(|s| ([s.center[0], s.center[1]], s.radius))
            .collect();
        return plot::scatter(&format!("{title} (x1, x2)"), ([-l, -l], [l, l]), &design.points, &[], &[], &circles);
    }
    let density = prepared.ctx.density.clone();
    let curve: Vec<(f64, f64)> = (0..=800)
        .map(|i| {
            let x = -1.0 + 2.0 * i as f64 / 800.0;
            (x, density.pdf(&[x]))
        })
        .collect();
    let xs: Vec<f64> = design.points.iter().map(|p| p[0]).collect();
    plot::density_curve(&title, &curve, &xs)
}

#[derive(Serialize)]
struct HuberDoc {
    schema_version: u32,
    nu: f64,
    alpha: f64,
    d_alpha: f64,
    density: String,
    i_nu_xi: f64,
    k_nu: f64,
}

fn huber(common: &Common) -> Result<()> {
    let m = HuberDensity::from_nu(common.nu)?;
    let doc = HuberDoc {
        schema_version: SCHEMA_VERSION,
        nu: common.nu,
        alpha: m.alpha,
        d_alpha: m.d_alpha,
        density: format!("m(x) = 3 (x^2 - alpha)^+ / d_alpha on [-1, 1]; alpha = {}", fmt_f64(m.alpha)),
        i_nu_xi: m.i_nu_xi(common.nu),
        k_nu: m.k_nu(common.nu),
    };
    let curve: Vec<(f64, f64)> = (0..=200)
        .map(|i| {
            let x = -1.0 + i as f64 / 100.0;
            (x, m.m(x))
        })
        .collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "m"])?;
    for (x, y) in &curve {
        w.write_record([fmt_f64(*x), fmt_f64(*y)])?;
    }
    let csv = String::from_utf8(w.into_inner().map_err(|e| DesignError::Io(e.into_error()))?).expect("utf-8");
    let json = to_json(&doc)?;
    match &common.out {
        Some(prefix) => {
            write_atomic(&with_ext(prefix, "csv"), csv.as_bytes())?;
            write_atomic(&with_ext(prefix, "json"), json.as_bytes())?;
            if common.plot {
                let svg = plot::density_curve(&format!("m, nu = {}", common.nu), &curve, &[]);
                write_atomic(&with_ext(prefix, "svg"), svg.as_bytes())?;
            }
        }
        None => print!("{}", if common.format == Format::Csv { csv } else { json }),
    }
    Ok(())
}

fn loss(common: &Common, fam: &FamilyArgs, path: &Path, strategy: Strategy) -> Result<()> {
    let probe = read_design_csv(path, common.seed, strategy.name())?;
    let cfg = family_config(strategy, common, Some(fam), probe.n())?;
    let prepared = prepare(&cfg)?;
    let design = read_design_csv(path, common.seed, prepared.strategy().name())?;
    let report = evaluate(&prepared, &design)?;
    let doc = loss_doc(common, &prepared, &design, &report)?;
    let json = to_json(&doc)?;
    match &common.out {
        Some(prefix) => {
            write_atomic(&with_ext(prefix, "json"), json.as_bytes())?;
            if common.plot {
                write_atomic(&with_ext(prefix, "svg"), design_plot(&prepared, &design, &[]).as_bytes())?;
            }
        }
        None if common.format == Format::Csv => {
            println!("variance_term,bias_term,combined");
            println!("{},{},{}", fmt_f64(report.variance_term), fmt_f64(report.bias_term), fmt_f64(report.combined));
        }
        None => print!("{json}"),
    }
    Ok(())
}

fn simulate(common: &Common, fam: &FamilyArgs, strategy: Strategy, reps: usize) -> Result<()> {
    let cfg = family_config(strategy, common, Some(fam), default_n(strategy, fam))?;
    let prepared = prepare(&cfg)?;
    let summary = run_prepared(&prepared, reps, common.seed)?;
    let json = to_json(&summary)?;
    let csv = reps_csv(&summary.values)?;
    match &common.out {
        Some(prefix) => {
            write_atomic(&with_ext(prefix, "csv"), csv.as_bytes())?;
            write_atomic(&with_ext(prefix, "json"), json.as_bytes())?;
            if common.plot {
                let svg = plot::histogram(
                    &format!("j_nu over {reps} {} designs", strategy.name()),
                    &summary.histogram.edges,
                    &summary.histogram.counts,
                    Some(summary.reference.combined),
                );
                write_atomic(&with_ext(prefix, "svg"), svg.as_bytes())?;
            }
        }
        None => print!("{}", if common.format == Format::Csv { csv } else { json }),
    }
    Ok(())
}
