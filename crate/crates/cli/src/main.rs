//! `rmcds`: experiments for robust matrix completion under deterministic
//! sampling.
//!
//! Exit codes: 0 when the run completed, 1 on a usage error or rejected
//! input, 2 when a file could not be read, parsed or written.

use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rmcds_core::certificate::{certify, CertificateOptions, GolfingOptions};
use rmcds_core::conditions::{check_conditions, ConditionConfig, PowerOptions, RaiipOptions};
use rmcds_core::harness::record::{to_csv, Record};
use rmcds_core::harness::{
    generate_instance, run_sweep, verify_pipeline, ExperimentSpec, LambdaMode, MaskSpec, PipelineReport, SweepGrid,
};
use rmcds_core::model::{format_f64, format_mask, generate_mask, read_matrix, write_matrix, ModelKind};
use rmcds_core::par::{map_slice, Execution};
use rmcds_core::rng::{derive_seed, streams};
use rmcds_core::solver::{optimality_gap, solve_rmc, SolverConfig};
use rmcds_core::Error;

#[derive(Parser)]
#[command(name = "rmcds", version, about = "Robust matrix completion under deterministic sampling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the observation mask of trial `--seed`.
    GenMask(Common),
    /// Measure the recovery conditions on one instance.
    Check(Common),
    /// Solve one instance, synthetic or read from `--y`.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Observed matrix (CSV); entries off the mask are ignored.
        #[arg(long)]
        y: Option<PathBuf>,
        /// Write the recovered low-rank part here.
        #[arg(long)]
        l_out: Option<PathBuf>,
        /// Write the recovered sparse part here.
        #[arg(long)]
        s_out: Option<PathBuf>,
    },
    /// Build the golfing and least-squares certificates and verify them.
    Certify {
        #[command(flatten)]
        common: Common,
        /// Write the combined dual matrix here.
        #[arg(long)]
        dual_out: Option<PathBuf>,
    },
    /// Run every (rho, rate, rank) cell over `--trials` seeds.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        trials: Trials,
        /// Per-cell summary CSV; printed to stderr when omitted.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[arg(long)]
        no_conditions: bool,
        #[arg(long)]
        no_certificate: bool,
    },
    /// Certificate, recovery and their cross-check on `--trials` seeds.
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        trials: Trials,
    },
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value_t = 60)]
    n: usize,
    /// Comma-separated list for `sweep`.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    rank: Vec<usize>,
    /// Corruption probability; comma-separated list for `sweep`.
    #[arg(long, value_delimiter = ',', default_value = "0.02")]
    rho: Vec<f64>,
    /// full, decimation:M, block:B, bernoulli or file:PATH.
    #[arg(long, default_value = "bernoulli")]
    mask: String,
    /// Bernoulli sampling rate; comma-separated list for `sweep`.
    #[arg(long, value_delimiter = ',', default_value = "0.6")]
    rate: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `theorem` for 1/sqrt(n ln n), or a positive value.
    #[arg(long, default_value = "theorem")]
    lambda: String,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "RMCDS_THREADS")]
    threads: Option<usize>,
    /// Relative Frobenius error counted as exact recovery.
    #[arg(long, default_value_t = 1e-4)]
    success_tol: f64,
    #[arg(long, value_enum, default_value_t = Model::Gaussian)]
    model: Model,
    /// Solver iteration cap.
    #[arg(long)]
    max_iters: Option<usize>,
}

#[derive(Args, Clone)]
struct Trials {
    /// Trial seeds are derived from `--seed` and the trial index.
    #[arg(long, default_value_t = 10)]
    trials: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Gaussian,
    Rademacher,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Core(Error::Io(e))
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) | Error::Parse { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::GenMask(c) => gen_mask(&c),
        Command::Check(c) => check(&c),
        Command::Solve { common, y, l_out, s_out } => solve(&common, y.as_deref(), l_out.as_deref(), s_out.as_deref()),
        Command::Certify { common, dual_out } => certificate(&common, dual_out.as_deref()),
        Command::Sweep {
            common,
            trials,
            summary,
            no_conditions,
            no_certificate,
        } => sweep(&common, &trials, summary.as_deref(), !no_conditions, !no_certificate),
        Command::Verify { common, trials } => verify(&common, &trials),
    }
}

fn setup_threads(threads: Option<usize>) -> Outcome {
    let Some(t) = threads else { return Ok(()) };
    if t == 0 {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(t)
        .build_global()
        .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
    Ok(())
}

fn single<T: Copy>(values: &[T], flag: &str) -> Result<T, Failure> {
    match values {
        [v] => Ok(*v),
        _ => Err(Failure::Usage(format!("--{flag} takes a single value here"))),
    }
}

fn parse_mask(text: &str, rate: f64) -> Result<MaskSpec, Failure> {
    let bad = || Failure::Usage(format!("unrecognized mask {text:?}"));
    let (kind, arg) = text.split_once(':').unwrap_or((text, ""));
    let number = || arg.parse::<usize>().map_err(|_| bad());
    Ok(match kind {
        "full" if arg.is_empty() => MaskSpec::Full,
        "decimation" => MaskSpec::Decimation(number()?),
        "block" => MaskSpec::Block(number()?),
        "bernoulli" if arg.is_empty() => MaskSpec::Bernoulli(rate),
        "file" if !arg.is_empty() => MaskSpec::File(arg.into()),
        _ => return Err(bad()),
    })
}

fn parse_lambda(text: &str) -> Result<LambdaMode, Failure> {
    if text == "theorem" {
        return Ok(LambdaMode::Theorem);
    }
    match text.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(LambdaMode::Explicit(v)),
        _ => Err(Failure::Usage(format!("--lambda must be `theorem` or positive, got {text:?}"))),
    }
}

/// Spec for one instance; list flags must hold a single value.
fn spec_for(c: &Common, seeds: Vec<u64>) -> Result<ExperimentSpec, Failure> {
    let rate = single(&c.rate, "rate")?;
    let mut spec = ExperimentSpec::new(
        c.n,
        single(&c.rank, "rank")?,
        single(&c.rho, "rho")?,
        parse_mask(&c.mask, rate)?,
        seeds,
    );
    configure(&mut spec, c)?;
    spec.validate()?;
    Ok(spec)
}

fn configure(spec: &mut ExperimentSpec, c: &Common) -> Outcome {
    spec.model_kind = match c.model {
        Model::Gaussian => ModelKind::Gaussian,
        Model::Rademacher => ModelKind::Rademacher,
    };
    spec.lambda_mode = parse_lambda(&c.lambda)?;
    spec.success_tol = c.success_tol;
    spec.exec = Execution::Parallel;
    if let Some(m) = c.max_iters {
        spec.solver.max_iters = m;
    }
    Ok(())
}

fn trial_seeds(c: &Common, t: &Trials) -> Result<Vec<u64>, Failure> {
    if t.trials == 0 {
        return Err(Failure::Usage("--trials must be at least 1".into()));
    }
    Ok((0..t.trials as u64).map(|i| derive_seed(c.seed, i)).collect())
}

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn gen_mask(c: &Common) -> Outcome {
    setup_threads(c.threads)?;
    let mask = parse_mask(&c.mask, single(&c.rate, "rate")?)?;
    let generated = generate_mask(c.n, &mask.kind(derive_seed(c.seed, streams::MASK)))?;
    emit(c.out.as_deref(), &format_mask(&generated))
}

fn check(c: &Common) -> Outcome {
    setup_threads(c.threads)?;
    let spec = spec_for(c, vec![c.seed])?;
    let (model, mask, corruption) = generate_instance(&spec, c.seed)?;
    let stream = derive_seed(c.seed, streams::CONDITIONS);
    let config = ConditionConfig {
        power: PowerOptions::default().with_seed(stream),
        raiip: RaiipOptions {
            seed: stream,
            exec: Execution::Parallel,
            ..Default::default()
        },
        ..Default::default()
    };
    let report = check_conditions(&model, &mask, &corruption, &config)?;
    emit(c.out.as_deref(), &report.to_key_value())
}

fn solve(c: &Common, y: Option<&Path>, l_out: Option<&Path>, s_out: Option<&Path>) -> Outcome {
    setup_threads(c.threads)?;
    let mut text = String::new();
    let result = match y {
        Some(path) => {
            let y = read_matrix(path)?;
            let n = y.nrows();
            let kind = parse_mask(&c.mask, single(&c.rate, "rate")?)?.kind(derive_seed(c.seed, streams::MASK));
            let mask = generate_mask(n, &kind)?;
            let mut config = SolverConfig::for_size(n.max(2)).with_lambda(parse_lambda(&c.lambda)?.value(n));
            if let Some(m) = c.max_iters {
                config.max_iters = m;
            }
            let res = solve_rmc(&y, &mask, &config)?;
            text.push_str(&res.to_key_value());
            res
        }
        None => {
            let spec = spec_for(c, vec![c.seed])?;
            let (model, mask, corruption) = generate_instance(&spec, c.seed)?;
            let l0 = model.matrix();
            let s0 = corruption.observed(&mask)?;
            let lambda = spec.lambda();
            let config = spec.solver.with_lambda(lambda);
            let res = solve_rmc(&(&l0 + corruption.matrix()), &mask, &config)?;
            let rel = (&res.l - &l0).norm() / l0.norm();
            text.push_str(&res.to_key_value());
            text.push_str(&format!("lambda={}\n", format_f64(lambda)));
            text.push_str(&format!("rel_error={}\n", format_f64(rel)));
            text.push_str(&format!(
                "sparse_error={}\n",
                format_f64((&res.s - &s0).norm() / (1.0 + s0.norm()))
            ));
            text.push_str(&format!(
                "gap={}\n",
                format_f64(optimality_gap(&res, &l0, &s0, lambda))
            ));
            text.push_str(&format!("success={}\n", res.converged && rel <= spec.success_tol));
            res
        }
    };
    if let Some(p) = l_out {
        write_matrix(p, &result.l)?;
    }
    if let Some(p) = s_out {
        write_matrix(p, &result.s)?;
    }
    emit(c.out.as_deref(), &text)
}

fn certificate(c: &Common, dual_out: Option<&Path>) -> Outcome {
    setup_threads(c.threads)?;
    let spec = spec_for(c, vec![c.seed])?;
    let (model, mask, corruption) = generate_instance(&spec, c.seed)?;
    let opts = CertificateOptions {
        golfing: GolfingOptions {
            seed: derive_seed(c.seed, streams::CERTIFICATE),
            measure_deviation: true,
            power: PowerOptions::default().with_seed(derive_seed(c.seed, streams::CONDITIONS)),
            ..Default::default()
        },
        ..Default::default()
    };
    let run = certify(&model, &mask, &corruption, spec.lambda(), &opts)?;
    if let Some(p) = dual_out {
        write_matrix(p, &run.pair.total())?;
    }
    let mut text = run.golfing.to_key_value();
    text.push_str(&run.least_squares.to_key_value());
    text.push_str(&run.kkt.to_key_value());
    text.push_str(&format!("failed={}\n", run.kkt.failures().join(" ")));
    emit(c.out.as_deref(), &text)
}

fn sweep(c: &Common, t: &Trials, summary: Option<&Path>, conditions: bool, certificate: bool) -> Outcome {
    setup_threads(c.threads)?;
    let rate = *c.rate.first().ok_or_else(|| Failure::Usage("--rate is empty".into()))?;
    let mask = parse_mask(&c.mask, rate)?;
    if !matches!(mask, MaskSpec::Bernoulli(_)) {
        return Err(Failure::Usage("sweep draws Bernoulli masks; use --mask bernoulli".into()));
    }
    let rank = *c.rank.first().ok_or_else(|| Failure::Usage("--rank is empty".into()))?;
    let rho = *c.rho.first().ok_or_else(|| Failure::Usage("--rho is empty".into()))?;
    let mut spec = ExperimentSpec::new(c.n, rank, rho, mask, trial_seeds(c, t)?);
    configure(&mut spec, c)?;
    spec.stages.conditions = conditions;
    spec.stages.certificate = certificate;
    let grid = SweepGrid {
        rhos: c.rho.clone(),
        rates: c.rate.clone(),
        ranks: c.rank.clone(),
    };
    let result = run_sweep(&spec, &grid)?;
    emit(c.out.as_deref(), &result.records_csv())?;
    match summary {
        Some(p) => fs::write(p, result.summary_csv())?,
        None => eprint!("{}", result.summary_csv()),
    }
    eprint!("{}", result.trend.to_key_value());
    Ok(())
}

fn verify(c: &Common, t: &Trials) -> Outcome {
    setup_threads(c.threads)?;
    let spec = spec_for(c, trial_seeds(c, t)?)?;
    let reports = map_slice(Execution::Parallel, &spec.seeds, |&s| verify_pipeline(&spec, s))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    emit(c.out.as_deref(), &to_csv(&reports))?;
    let count = |f: &dyn Fn(&PipelineReport) -> bool| reports.iter().filter(|r| f(r)).count();
    eprintln!("instances={}", reports.len());
    eprintln!("certificate_passes={}", count(&|r| r.record.kkt.as_ref().is_some_and(|k| k.pass)));
    eprintln!("recoveries={}", count(&|r| r.record.success));
    eprintln!("implication_holds={}", count(&|r| r.implication == Some(true)));
    eprintln!("counterexamples={}", count(&|r| r.is_counterexample()));
    Ok(())
}
