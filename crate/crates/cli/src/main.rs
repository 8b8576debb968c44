use std::fs;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use toepcov::bench::{run_sweep, write_csv, Generator, SweepConfig};
use toepcov::estimators::{Method, SftParams, SftPlan};
use toepcov::leverage::fourier_leverage_bound;
use toepcov::rulers::{alpha_coverage_bound, full_coverage_bound};
use toepcov::sampling::{observe, write_batch, Sampler};
use toepcov::toeplitz::relative_error;
use toepcov::{alpha_ruler, coverage_coefficient, full_ruler, sqrt_ruler, MatrixSpec};

#[derive(Parser)]
#[command(name = "toepcov", version, about = "Toeplitz covariance estimation from partial samples")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print a ruler, its coverage coefficient and the coverage bound.
    Ruler {
        #[arg(long)]
        d: usize,
        #[arg(long, value_enum)]
        kind: RulerKind,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Draw samples from a matrix spec and run one estimator.
    Estimate(EstimateArgs),
    /// Run a parameter sweep and write per-trial records as CSV.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Write a generated matrix spec.
    Gen {
        #[arg(long, value_enum)]
        kind: GenKind,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RulerKind {
    Full,
    Sqrt,
    Alpha,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Identity,
    RandomFull,
    Lowrank,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodName {
    Full,
    SqrtRuler,
    AlphaRuler,
    Circulant,
    Prony,
    PronyDenoise,
    PronyCond,
    Sft,
}

#[derive(clap::Args)]
struct EstimateArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_enum)]
    method: MethodName,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Ruler exponent for alpha-ruler.
    #[arg(long)]
    alpha: Option<f64>,
    /// Rank for the Prony family, frequencies per candidate for sft.
    #[arg(long)]
    k: Option<usize>,
    /// Grid accuracy for prony-denoise.
    #[arg(long)]
    beta: Option<f64>,
    /// Condition-number bound for prony-cond.
    #[arg(long)]
    kappa: Option<f64>,
    /// Target accuracy for prony-cond.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    net_step: Option<f64>,
    #[arg(long)]
    sketch_seed: Option<u64>,
    #[arg(long)]
    candidate_cap: Option<u64>,
    /// Evaluate this many random candidates when the net exceeds the cap.
    #[arg(long)]
    random_search: Option<u64>,
    /// Write the leverage profile and both sketches (sft only) as JSON.
    #[arg(long)]
    dump_leverage: Option<PathBuf>,
    /// Write the observed sample batch in binary form.
    #[arg(long)]
    dump_batch: Option<PathBuf>,
}

impl EstimateArgs {
    fn method(&self) -> Result<Method> {
        let need_k = || self.k.context("--k is required for this method");
        Ok(match self.method {
            MethodName::Full => Method::Full,
            MethodName::SqrtRuler => Method::SqrtRuler,
            MethodName::AlphaRuler => Method::AlphaRuler {
                alpha: self.alpha.context("--alpha is required for alpha-ruler")?,
            },
            MethodName::Circulant => Method::Circulant,
            MethodName::Prony => Method::Prony { k: need_k()? },
            MethodName::PronyDenoise => Method::PronyDenoise { k: need_k()?, beta: self.beta },
            MethodName::PronyCond => Method::PronyCond {
                k: need_k()?,
                kappa: self.kappa.context("--kappa is required for prony-cond")?,
                eps: self.eps.unwrap_or(0.1),
            },
            MethodName::Sft => {
                let mut p = SftParams { m: self.k.unwrap_or(1), net_step: self.net_step, ..Default::default() };
                if let Some(s) = self.sketch_seed {
                    p.sketch_seed = s;
                }
                if let Some(c) = self.candidate_cap {
                    p.candidate_cap = c;
                }
                p.random_search = self.random_search;
                Method::Sft(p)
            }
        })
    }
}

fn ruler_cmd(d: usize, kind: RulerKind, alpha: Option<f64>) -> Result<()> {
    let (ruler, alpha) = match kind {
        RulerKind::Full => (full_ruler(d)?, 1.0),
        RulerKind::Sqrt => (sqrt_ruler(d)?, 0.5),
        RulerKind::Alpha => {
            let a = alpha.context("--alpha is required for --kind alpha")?;
            (alpha_ruler(d, a)?, a)
        }
    };
    let coverage = coverage_coefficient(&ruler)?;
    let bound = alpha_coverage_bound(d, alpha);
    let indices = ruler.indices().iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ");
    println!("{:<10} {}", "d", d);
    println!("{:<10} {}", "size", ruler.len());
    println!("{:<10} {:.6}", "coverage", coverage);
    println!("{:<10} {:.6}", "bound", bound);
    if matches!(kind, RulerKind::Full) {
        println!("{:<10} {:.6}", "harmonic", full_coverage_bound(d));
    }
    println!("{:<10} {}", "repairs", ruler.repairs());
    println!("{:<10} {}", "indices", indices);
    let out = json!({
        "d": d,
        "alpha": alpha,
        "indices": ruler.indices(),
        "size": ruler.len(),
        "coverage": coverage,
        "bound": bound,
        "repairs": ruler.repairs(),
    });
    println!("{}", serde_json::to_string(&out)?);
    Ok(())
}

fn estimate_cmd(args: &EstimateArgs) -> Result<()> {
    let text = fs::read_to_string(&args.spec).with_context(|| format!("reading {}", args.spec.display()))?;
    let spec = MatrixSpec::from_json(&text)?;
    let truth = spec.truth()?;
    let d = truth.d();
    let method = args.method()?;

    if let Some(path) = &args.dump_leverage {
        let Method::Sft(p) = &method else {
            bail!("--dump-leverage applies to --method sft only");
        };
        let plan = SftPlan::new(d, p)?;
        let profile = fourier_leverage_bound(d, (2 * p.m).min(d))?;
        let dump = json!({ "profile": profile, "s1": plan.s1, "s2": plan.s2 });
        fs::write(path, serde_json::to_string_pretty(&dump)?)?;
    }

    let start = Instant::now();
    let pattern = method.pattern(d).with_context(|| format!("method `{}`", method.tag()))?;
    let rows = pattern.indices(d)?;
    let batch = Sampler::new(&truth)?.draw_rows(&rows, args.n, args.seed)?;
    if let Some(path) = &args.dump_batch {
        write_batch(&batch, BufWriter::new(fs::File::create(path)?))?;
    }
    let obs = observe(&batch, pattern)?;
    let report = method.estimate(&obs)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let rel_err = relative_error(&truth, &report.t_hat)?;
    let out = json!({
        "method": report.method,
        "d": d,
        "n": args.n,
        "seed": args.seed,
        "t_hat": report.t_hat,
        "rel_err": rel_err,
        "esc": report.counters.esc,
        "vsc": report.counters.vsc,
        "tsc": report.counters.tsc,
        "wall_ms": wall_ms,
        "model": report.model,
        "diagnostics": report.diagnostics,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn bench_cmd(config: &PathBuf, out: &PathBuf, workers: Option<usize>) -> Result<()> {
    let text = fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let cfg = SweepConfig::from_json(&text)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.unwrap_or(0)).build()?;
    let result = pool.install(|| run_sweep(&cfg))?;
    write_csv(&result.records, BufWriter::new(fs::File::create(out)?))?;
    if !result.targets.is_empty() {
        println!("{}", serde_json::to_string_pretty(&result.targets)?);
    }
    eprintln!("wrote {} records to {}", result.records.len(), out.display());
    Ok(())
}

fn gen_cmd(kind: GenKind, d: usize, k: Option<usize>, seed: u64, out: &PathBuf) -> Result<()> {
    let g = match kind {
        GenKind::Identity => Generator::Identity,
        GenKind::RandomFull => Generator::RandomFull,
        GenKind::Lowrank => Generator::Lowrank { k: k.context("--k is required for lowrank")? },
    };
    let spec = g.generate(d, seed)?;
    fs::write(out, spec.to_json()?)?;
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.cmd {
        Cmd::Ruler { d, kind, alpha } => ruler_cmd(*d, *kind, *alpha),
        Cmd::Estimate(args) => estimate_cmd(args),
        Cmd::Bench { config, out, workers } => bench_cmd(config, out, *workers),
        Cmd::Gen { kind, d, k, seed, out } => gen_cmd(*kind, *d, *k, *seed, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
