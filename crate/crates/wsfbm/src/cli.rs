//! Command-line entry point.

use crate::config::{self, FluctuationConfig, FluctuationMethod, SimulateConfig};
use crate::manifest::RunManifest;
use crate::output::{self, fmt_float};
use crate::parallel::{map_indexed, pool};
use crate::verify::{self, Level, VerifyOptions};
use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use wsfbm_core::analysis::{
    default_scan_grid, lrd_check, markov_test, pd_scan, rescaled_limit_check, LimitCheckReport, DEFAULT_A, DEFAULT_B,
};
use wsfbm_core::gp::{build_gram, sample_paths, CovMatrix, FactorState, TimeGrid};
use wsfbm_core::kernels::{eval_k_log, eval_qab, Kernel, KernelParams, LogKernel, Qab, SubFbm, WeightedFbm};
use wsfbm_core::simulate::{
    renewal_function_mc, renewal_scaling_check, simulate_replicate, FamilyPlan, FluctuationPlan, LifetimeLaw,
    Observation, PopulationRun,
};
use wsfbm_core::{Error, QuadratureSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_ACCEPTANCE: i32 = 3;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "WSFBM_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "wsfbm", version, about = "Weighted sub-fractional kernels, Gaussian sampling and branching particle simulation")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON configuration file (simulate, fluctuations).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the configuration file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Acceptance tolerance of the check being run.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelKind {
    /// Q_{a,b}
    Qab,
    /// Sub-fractional Brownian motion with exponent h.
    Subfbm,
    /// Weighted fractional Brownian motion.
    WeightedFbm,
    /// Logarithmic kernel with exponent gamma.
    Log,
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    #[arg(long, value_enum, default_value_t = KernelKind::Qab)]
    pub kernel: KernelKind,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Last grid time.
    #[arg(long, default_value_t = 2.0)]
    pub grid_end: f64,
    /// Number of grid points `end/n, ..., end`.
    #[arg(long, default_value_t = 8)]
    pub grid_n: usize,
    /// Explicit comma-separated grid; overrides the uniform grid.
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanPreset {
    /// The default lattice of `a` and `b` values.
    #[value(name = "paper-regions")]
    DefaultLattice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LawKind {
    Exponential,
    Gamma,
    MittagLeffler,
    Pareto,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a covariance kernel at one pair of times.
    KernelEval {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        t: f64,
        /// Significant digits printed; files keep full precision.
        #[arg(long, default_value_t = 6)]
        digits: usize,
    },
    /// Gram matrix of a kernel on a time grid, with its spectrum.
    Gram {
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Sample Gaussian paths with the given covariance.
    Sample {
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 1000)]
        paths: usize,
        /// Largest jitter, relative to the largest variance, before giving up.
        #[arg(long, default_value_t = 1e-8)]
        max_jitter: f64,
    },
    /// Gram-matrix definiteness scan over a lattice of (a, b).
    PdScan {
        #[arg(long, value_enum)]
        preset: Option<ScanPreset>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        a_values: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        b_values: Option<Vec<f64>>,
    },
    /// Long-range dependence of increments over [r,v] and [s+T,t+T].
    Lrd {
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        v: f64,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        t: f64,
        #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
        horizons: Vec<f64>,
    },
    /// Markov triplet identity Q(s,t) Q(r,r) = Q(s,r) Q(r,t).
    Markov {
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        t: f64,
    },
    /// Rescaled increment covariance from a late start T against its limit.
    RescaleLimit {
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        t: f64,
        #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
        horizons: Vec<f64>,
    },
    /// Monte Carlo renewal function and, with --horizons, renewal-measure scaling.
    Renewal {
        #[arg(long, value_enum)]
        law: LawKind,
        #[arg(long)]
        rate: Option<f64>,
        #[arg(long)]
        shape: Option<f64>,
        #[arg(long)]
        scale: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 10_000)]
        replicates: usize,
        #[arg(long, value_delimiter = ',')]
        horizons: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,0.75")]
        u_grid: Vec<f64>,
    },
    /// Branching particle system replicates (configuration from --config).
    Simulate {
        #[arg(long)]
        replicates: Option<usize>,
    },
    /// Rescaled occupation-time fluctuations (configuration from --config).
    Fluctuations {
        #[arg(long)]
        replicates: Option<usize>,
    },
    /// Run the acceptance criteria.
    VerifyAll {
        #[arg(long, value_enum, default_value_t = Level::Quick)]
        level: Level,
        /// Replaces every Monte Carlo sample size.
        #[arg(long)]
        replicates: Option<usize>,
        /// Run only these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<u8>>,
    },
}

/// Failure of an acceptance or convergence check rather than of the computation.
#[derive(Debug)]
struct CheckFailed(String);

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CheckFailed {}

/// Numerical failure that is not a core error, such as a limit check that misses.
#[derive(Debug)]
struct NotConverged(String);

impl std::fmt::Display for NotConverged {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for NotConverged {}

pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<CheckFailed>() {
            return EXIT_ACCEPTANCE;
        }
        if cause.is::<NotConverged>() {
            return EXIT_NUMERICAL;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return if e.is_validation() { EXIT_VALIDATION } else { EXIT_NUMERICAL };
        }
    }
    EXIT_VALIDATION
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

fn out_dir(global: &GlobalArgs) -> Result<PathBuf> {
    let dir = global.out.clone().unwrap_or_else(|| PathBuf::from("wsfbm-out"));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

struct Outputs {
    dir: PathBuf,
    manifest: RunManifest,
}

impl Outputs {
    fn new(global: &GlobalArgs, subcommand: &str, config: serde_json::Value, seed: u64) -> Result<Self> {
        Ok(Outputs {
            dir: out_dir(global)?,
            manifest: RunManifest::new(subcommand, &config, seed),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.manifest.outputs.push(PathBuf::from(name));
        p
    }

    fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let p = self.path(name);
        output::write_json(&p, value)
    }

    fn finish(self) -> Result<()> {
        self.manifest.write(&self.dir)?;
        Ok(())
    }
}

fn quadrature() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn require(value: Option<f64>, name: &'static str, kernel: &str) -> Result<f64> {
    value.ok_or_else(|| anyhow!("--{name} is required for the {kernel} kernel"))
}

fn make_kernel(k: &KernelArgs) -> Result<Box<dyn Kernel + Sync>> {
    let q = quadrature();
    Ok(match k.kernel {
        KernelKind::Qab => Box::new(Qab::new(require(k.a, "a", "qab")?, require(k.b, "b", "qab")?)?),
        KernelKind::Subfbm => Box::new(SubFbm::with_extended_range(require(k.h, "h", "subfbm")?)?),
        KernelKind::WeightedFbm => Box::new(WeightedFbm::new(
            require(k.a, "a", "weighted-fbm")?,
            require(k.b, "b", "weighted-fbm")?,
        )?),
        KernelKind::Log => {
            let gamma = require(k.gamma, "gamma", "log")?;
            eval_k_log(gamma, 1.0, 1.0, &q)?;
            Box::new(LogKernel { gamma, quadrature: q })
        }
    })
}

fn kernel_json(k: &KernelArgs) -> serde_json::Value {
    json!({
        "kernel": format!("{:?}", k.kernel),
        "a": k.a, "b": k.b, "h": k.h, "gamma": k.gamma,
    })
}

fn grid_from(args: &GridArgs) -> Result<TimeGrid> {
    Ok(match &args.times {
        Some(times) => TimeGrid::new(times.clone())?,
        None => TimeGrid::uniform(args.grid_end, args.grid_n)?,
    })
}

fn limit_outcome(report: &LimitCheckReport) -> Result<()> {
    for row in output::limit_rows(report) {
        println!(
            "T={} statistic={} target={} abs_err={}",
            fmt_float(row.horizon),
            fmt_float(row.statistic),
            fmt_float(row.target),
            fmt_float(row.abs_err)
        );
    }
    if report.converged {
        Ok(())
    } else {
        Err(NotConverged(format!(
            "{} check did not converge: final relative error {} (tolerance {})",
            report.name,
            fmt_float(report.final_error()),
            fmt_float(report.tolerance)
        ))
        .into())
    }
}

fn law_from(
    law: LawKind,
    rate: Option<f64>,
    shape: Option<f64>,
    scale: Option<f64>,
    gamma: Option<f64>,
) -> Result<LifetimeLaw> {
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| anyhow!("--{name} is required for this lifetime law"));
    let law = match law {
        LawKind::Exponential => LifetimeLaw::Exponential { rate: need(rate, "rate")? },
        LawKind::Gamma => LifetimeLaw::Gamma {
            shape: need(shape, "shape")?,
            scale: need(scale, "scale")?,
        },
        LawKind::MittagLeffler => LifetimeLaw::MittagLeffler { gamma: need(gamma, "gamma")? },
        LawKind::Pareto => LifetimeLaw::Pareto { gamma: need(gamma, "gamma")? },
    };
    law.validate()?;
    Ok(law)
}

fn execute(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    if let Some(t) = g.tolerance {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Parameter {
                name: "tolerance",
                value: t,
                requirement: "0 < tolerance < inf",
            }
            .into());
        }
    }
    if g.threads == Some(0) {
        return Err(Error::Parameter {
            name: "threads",
            value: 0.0,
            requirement: "threads >= 1",
        }
        .into());
    }
    let seed = g.seed.unwrap_or(0);
    match &cli.command {
        Command::KernelEval { kernel, s, t, digits } => {
            let value = match kernel.kernel {
                KernelKind::Qab => {
                    let p = KernelParams::new(require(kernel.a, "a", "qab")?, require(kernel.b, "b", "qab")?)?;
                    eval_qab(&p, *s, *t, &quadrature())?
                }
                _ => make_kernel(kernel)?.covariance(*s, *t)?,
            };
            println!("{}", output::fmt_significant(value, *digits));
            if g.out.is_some() {
                let mut config = kernel_json(kernel);
                config["s"] = json!(s);
                config["t"] = json!(t);
                let mut out = Outputs::new(g, "kernel-eval", config, seed)?;
                out.json("kernel.json", &json!({ "s": s, "t": t, "value": value }))?;
                out.finish()?;
            }
            Ok(())
        }
        Command::Gram { kernel, grid } => {
            let k = make_kernel(kernel)?;
            let grid = grid_from(grid)?;
            let gram = build_gram(k.as_ref(), &grid)?;
            let eig = gram.eigenvalues();
            println!(
                "n={} min_eig={} max_diag={}",
                grid.len(),
                fmt_float(eig[0]),
                fmt_float(gram.max_diagonal())
            );
            let mut config = kernel_json(kernel);
            config["times"] = json!(grid.times());
            let mut out = Outputs::new(g, "gram", config, seed)?;
            write_gram(&out.path("gram.csv"), &gram)?;
            out.json("spectrum.json", &json!({ "eigenvalues": eig, "max_diagonal": gram.max_diagonal() }))?;
            out.finish()
        }
        Command::Sample { kernel, grid, paths, max_jitter } => {
            let k = make_kernel(kernel)?;
            let grid = grid_from(grid)?;
            if *paths < 2 {
                return Err(Error::Parameter {
                    name: "paths",
                    value: *paths as f64,
                    requirement: "paths >= 2",
                }
                .into());
            }
            let gram = build_gram(k.as_ref(), &grid)?.factorize(*max_jitter);
            if let FactorState::Indefinite { min_eigenvalue } = gram.state() {
                return Err(Error::Indefinite { min_eigenvalue }.into());
            }
            let ensemble = sample_paths(&gram, *paths, seed)?;
            let stats = ensemble.stats()?;
            let mut config = kernel_json(kernel);
            config["times"] = json!(grid.times());
            config["paths"] = json!(paths);
            config["max_jitter"] = json!(max_jitter);
            let mut out = Outputs::new(g, "sample", config, seed)?;
            output::write_paths(&out.path("paths.csv"), &ensemble)?;
            out.json("stats.json", &json!({ "factor": format!("{:?}", gram.state()), "stats": stats }))?;
            println!("{} paths on {} times, factor {:?}", paths, grid.len(), gram.state());
            out.finish()
        }
        Command::PdScan { preset, a_values, b_values } => {
            let (a, b) = match (preset, a_values, b_values) {
                (_, Some(a), Some(b)) => (a.clone(), b.clone()),
                (Some(ScanPreset::DefaultLattice), None, None) | (None, None, None) => (DEFAULT_A.to_vec(), DEFAULT_B.to_vec()),
                _ => return Err(anyhow!("give both --a-values and --b-values, or a preset")),
            };
            let tol = g.tolerance.unwrap_or(1e-8);
            let results = pd_scan(&a, &b, &default_scan_grid(), tol, &quadrature())?;
            for r in &results {
                println!(
                    "a={} b={} region={} min_eig={} verdict={}",
                    fmt_float(r.a),
                    fmt_float(r.b),
                    r.claimed_region.label(),
                    fmt_float(r.min_eigenvalue),
                    r.verdict.label()
                );
            }
            let config = json!({ "a": a, "b": b, "tolerance": tol, "times": default_scan_grid().times() });
            let mut out = Outputs::new(g, "pd-scan", config, seed)?;
            output::write_scan(&out.path("scan.csv"), &results)?;
            out.json("scan.json", &results)?;
            out.finish()
        }
        Command::Lrd { a, b, r, v, s, t, horizons } => {
            let p = KernelParams::new(*a, *b)?;
            let tol = g.tolerance.unwrap_or(0.02);
            let report = lrd_check(&p, *r, *v, *s, *t, horizons, tol, &quadrature())?;
            let config = json!({ "a": a, "b": b, "r": r, "v": v, "s": s, "t": t, "horizons": horizons, "tolerance": tol });
            let mut out = Outputs::new(g, "lrd", config, seed)?;
            out.json("lrd.json", &output::limit_rows(&report))?;
            out.finish()?;
            limit_outcome(&report)
        }
        Command::Markov { a, b, s, r, t } => {
            let p = KernelParams::new(*a, *b)?;
            let m = markov_test(&p, *s, *r, *t, &quadrature())?;
            println!(
                "lhs={} rhs={} gap={} tolerance={}",
                fmt_float(m.lhs),
                fmt_float(m.rhs),
                fmt_float(m.gap),
                fmt_float(m.tolerance)
            );
            let config = json!({ "a": a, "b": b, "s": s, "r": r, "t": t });
            let mut out = Outputs::new(g, "markov", config, seed)?;
            out.json("markov.json", &m)?;
            out.finish()
        }
        Command::RescaleLimit { a, b, s, t, horizons } => {
            let p = KernelParams::new(*a, *b)?;
            let tol = g.tolerance.unwrap_or(0.02);
            let report = rescaled_limit_check(&p, *s, *t, horizons, tol, &quadrature())?;
            let config = json!({ "a": a, "b": b, "s": s, "t": t, "horizons": horizons, "tolerance": tol });
            let mut out = Outputs::new(g, "rescale-limit", config, seed)?;
            out.json("rescale_limit.json", &output::limit_rows(&report))?;
            out.finish()?;
            limit_outcome(&report)
        }
        Command::Renewal { law, rate, shape, scale, gamma, t, replicates, horizons, u_grid } => {
            let law = law_from(*law, *rate, *shape, *scale, *gamma)?;
            let est = renewal_function_mc(&law, *t, *replicates, seed)?;
            let exact = law.renewal_function(*t);
            println!(
                "U({})={} se={} exact={}",
                fmt_float(*t),
                fmt_float(est.mean),
                fmt_float(est.standard_error),
                exact.map(fmt_float).unwrap_or_else(|| "unknown".into())
            );
            let scaling = match horizons {
                Some(h) => Some(renewal_scaling_check(&law, h, u_grid, *replicates, seed)?),
                None => None,
            };
            let config = json!({ "law": law, "t": t, "replicates": replicates, "horizons": horizons, "u_grid": u_grid });
            let mut out = Outputs::new(g, "renewal", config, seed)?;
            out.json("renewal.json", &json!({ "estimate": est, "exact": exact, "scaling": scaling }))?;
            out.finish()
        }
        Command::Simulate { replicates } => {
            let mut cfg: SimulateConfig = match &g.config {
                Some(path) => config::load(path)?,
                None => SimulateConfig::default(),
            };
            if let Some(seed) = g.seed {
                cfg.system.seed = seed;
            }
            if let Some(n) = replicates {
                cfg.replicates = *n;
            }
            if cfg.times.is_empty() {
                cfg.times = vec![cfg.system.horizon];
            }
            let obs = Observation {
                times: cfg.times.clone(),
                functions: cfg.functions.clone(),
                occupation: cfg.occupation,
            };
            cfg.system.validate()?;
            obs.validate(&cfg.system)?;
            for w in cfg.system.warnings(&obs) {
                eprintln!("warning: {w:?}");
            }
            let threads = pool(g.threads)?;
            let outcomes = map_indexed(&threads, cfg.replicates, |i| simulate_replicate(&cfg.system, &obs, i));
            let run = PopulationRun::from_outcomes(outcomes.into_iter().collect::<wsfbm_core::Result<Vec<_>>>()?);
            let mut out = Outputs::new(g, "simulate", serde_json::to_value(&cfg)?, cfg.system.seed)?;
            output::write_replicates(&out.path("replicates.csv"), &run, &obs.times, obs.functions.len())?;
            let mut summaries = Vec::new();
            for j in 0..obs.functions.len() {
                let state = wsfbm_core::gp::empirical_cov(&obs.times, &run.state_rows(j)).ok();
                let occupation = if obs.occupation {
                    wsfbm_core::gp::empirical_cov(&obs.times, &run.occupation_rows(j)).ok()
                } else {
                    None
                };
                summaries.push(json!({ "function": j, "state": state, "occupation": occupation }));
            }
            out.json("summary.json", &json!({ "completed": run.replicates.len(), "exploded": run.exploded, "functions": summaries }))?;
            println!("{} replicates completed, {} exploded", run.replicates.len(), run.exploded.len());
            out.finish()
        }
        Command::Fluctuations { replicates } => {
            let path = g.config.as_ref().ok_or_else(|| anyhow!("fluctuations needs --config"))?;
            let mut cfg: FluctuationConfig = config::load(path)?;
            if let Some(seed) = g.seed {
                cfg.system.seed = seed;
            }
            if let Some(n) = replicates {
                cfg.replicates = *n;
            }
            let threads = pool(g.threads)?;
            let (values, stats) = match cfg.method {
                FluctuationMethod::Field => {
                    let plan = FluctuationPlan::new(&cfg.system, cfg.time_scale, &cfg.fractions, &cfg.phi)?;
                    for w in plan.cfg.warnings(&plan.observation) {
                        eprintln!("warning: {w:?}");
                    }
                    let outcomes = map_indexed(&threads, cfg.replicates, |i| plan.replicate(i));
                    let run = plan.summarize(outcomes.into_iter().collect::<wsfbm_core::Result<Vec<_>>>()?)?;
                    let stats = json!({ "stats": run.stats, "exploded": run.exploded, "normalization": run.normalization });
                    (run.values, stats)
                }
                FluctuationMethod::Families => {
                    let plan = FamilyPlan::new(&cfg.system, cfg.time_scale, &cfg.fractions, &cfg.phi)?;
                    let outcomes = map_indexed(&threads, cfg.replicates, |i| plan.family(i));
                    let run = plan.summarize(outcomes.into_iter().collect::<wsfbm_core::Result<Vec<_>>>()?)?;
                    let stats = json!({
                        "cov": run.cov,
                        "cov_standard_error": run.cov_standard_error,
                        "exploded": run.exploded,
                        "normalization": run.normalization,
                    });
                    (run.rows, stats)
                }
            };
            let times: Vec<f64> = cfg.fractions.iter().map(|f| f * cfg.time_scale).collect();
            let mut out = Outputs::new(g, "fluctuations", serde_json::to_value(&cfg)?, cfg.system.seed)?;
            match cfg.method {
                FluctuationMethod::Field => output::write_fluctuations(&out.path("fluctuations.csv"), &values, &times, "occupation:0")?,
                FluctuationMethod::Families => {
                    // one pair moment per (fraction_i, fraction_j); the diagonal is written
                    let k = times.len();
                    let diagonal: Vec<Vec<f64>> = values.iter().map(|r| (0..k).map(|i| r[i * k + i]).collect()).collect();
                    output::write_fluctuations(&out.path("family_moments.csv"), &diagonal, &times, "pair_moment:0")?
                }
            }
            out.json("stats.json", &stats)?;
            println!("{} replicates written", values.len());
            out.finish()
        }
        Command::VerifyAll { level, replicates, only } => {
            let opts = VerifyOptions {
                level: *level,
                seed: g.seed.unwrap_or(VerifyOptions::default().seed),
                threads: g.threads,
                replicates: *replicates,
                ..Default::default()
            };
            opts.validate()?;
            let report = match only {
                Some(ids) => {
                    let mut criteria = Vec::new();
                    for &id in ids {
                        let r = verify::run_criterion(id, &opts)?;
                        println!("{}", r.line());
                        criteria.push(r);
                    }
                    verify::VerifyReport {
                        level: *level,
                        seed: opts.seed,
                        passed: criteria.iter().all(|c| c.passed),
                        criteria,
                    }
                }
                None => verify::verify_all(&opts, |r| println!("{}", r.line()))?,
            };
            let config = json!({ "level": level, "replicates": replicates, "only": only });
            let mut out = Outputs::new(g, "verify-all", config, opts.seed)?;
            out.json("verify_report.json", &report)?;
            out.finish()?;
            if report.passed {
                Ok(())
            } else {
                Err(CheckFailed("one or more acceptance criteria failed".into()).into())
            }
        }
    }
}

fn write_gram(path: &Path, gram: &CovMatrix) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["s", "t", "value"])?;
    let times = gram.grid().times();
    for (i, s) in times.iter().enumerate() {
        for (j, t) in times.iter().enumerate() {
            w.write_record([fmt_float(*s), fmt_float(*t), fmt_float(gram.entry(i, j))])?;
        }
    }
    w.flush()?;
    Ok(())
}
