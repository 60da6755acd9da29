//! Command line entry points.
//!
//! Four subcommands cover the workflow: `generate` simulates a series and
//! writes it as a trace, `estimate` analyzes a trace against both
//! estimators, `theory` prints the closed-form values for a stationary
//! configuration, and `table` runs a whole benchmark grid.
//!
//! Exit codes: 0 on success, 1 for command line usage errors, 2 for
//! invalid parameters or malformed inputs, 3 for I/O failures.

pub mod table;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{ArgGroup, Args, Parser, Subcommand};

use crate::channel::{generate, FailureProfile, DEFAULT_TS_SECONDS};
use crate::error::{Error, Result};
use crate::stats::{
    analyze, grade_against_theory, AnalysisConfig, ApproximationGrade, ErrorSummary, DEFAULT_SKIP,
};
use crate::theory::{
    matched_alpha, stationary_ema_error_variance, stationary_sma_error_variance, var_x,
    TheoryReport,
};
use crate::tracefile::{load_trace, save_trace, write_report, ReportFormat, ReportRow};
use table::{load_spec, run_table, TableSpec};

#[derive(Parser, Debug)]
#[command(
    name = "fdrlab",
    version,
    about = "Simulate wireless frame outcomes and benchmark delivery ratio estimators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate an outcome series and write it as a trace file.
    Generate(GenerateArgs),
    /// Analyze a trace: run both estimators and summarize their errors.
    Estimate(EstimateArgs),
    /// Print closed-form variances for a stationary configuration.
    Theory(TheoryArgs),
    /// Run a benchmark grid and emit a report.
    Table(TableArgs),
}

#[derive(Args, Debug)]
#[command(group = ArgGroup::new("profile_shape").required(true).args(["eps", "eps0"]))]
struct GenerateArgs {
    /// Constant failure probability.
    #[arg(long)]
    eps: Option<f64>,
    /// Baseline failure probability of a sinusoidal profile.
    #[arg(long, requires = "delta", requires = "freq")]
    eps0: Option<f64>,
    /// Oscillation amplitude around eps0.
    #[arg(long, requires = "eps0")]
    delta: Option<f64>,
    /// Oscillation frequency in Hz.
    #[arg(long, requires = "eps0")]
    freq: Option<f64>,
    /// Seconds per transmission attempt.
    #[arg(long, default_value_t = DEFAULT_TS_SECONDS)]
    ts: f64,
    /// Number of outcomes to simulate.
    #[arg(long)]
    n: usize,
    /// Generator seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Trace file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// Trace file to analyze.
    #[arg(long)]
    trace: PathBuf,
    /// SMA window length.
    #[arg(long)]
    m: usize,
    /// EMA smoothing factor, or "auto" for the matched value 2/m.
    #[arg(long, default_value = "auto", value_parser = parse_alpha)]
    alpha: AlphaArg,
    /// EMA starting state.
    #[arg(long, default_value_t = 1.0)]
    y0: f64,
    /// Steps dropped at the start of the series.
    #[arg(long, default_value_t = DEFAULT_SKIP)]
    skip_prefix: usize,
    /// Steps dropped at the end of the series.
    #[arg(long, default_value_t = DEFAULT_SKIP)]
    skip_postfix: usize,
    /// Nominal failure probability for the theory columns; defaults to
    /// the empirical rate of the trace.
    #[arg(long)]
    eps: Option<f64>,
    /// Also write a single-row report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format for --out.
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: ReportFormat,
}

#[derive(Args, Debug)]
struct TheoryArgs {
    /// Constant failure probability.
    #[arg(long)]
    eps: f64,
    /// SMA window length.
    #[arg(long)]
    m: usize,
    /// EMA smoothing factor, or "auto" for the matched value 2/m.
    #[arg(long, default_value = "auto", value_parser = parse_alpha)]
    alpha: AlphaArg,
    /// EMA starting state.
    #[arg(long, default_value_t = 1.0)]
    y0: f64,
}

#[derive(Args, Debug)]
#[command(group = ArgGroup::new("grid_source").required(true).args(["spec", "preset"]))]
struct TableArgs {
    /// JSON grid description.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Built-in grid: "stationary" or "sinusoidal".
    #[arg(long, value_parser = parse_preset)]
    preset: Option<Preset>,
    /// Override the number of scored steps per cell.
    #[arg(long)]
    n_stats: Option<usize>,
    /// Override the steps dropped at each end of every cell.
    #[arg(long)]
    skip: Option<usize>,
    /// Override the base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Report file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: ReportFormat,
    /// Worker thread count; FDRLAB_THREADS is consulted when omitted.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy)]
enum AlphaArg {
    Auto,
    Value(f64),
}

impl AlphaArg {
    fn resolve(self, m: usize) -> Result<f64> {
        match self {
            AlphaArg::Auto => matched_alpha(m),
            AlphaArg::Value(a) => Ok(a),
        }
    }
}

fn parse_alpha(s: &str) -> std::result::Result<AlphaArg, String> {
    if s == "auto" {
        Ok(AlphaArg::Auto)
    } else {
        s.parse::<f64>()
            .map(AlphaArg::Value)
            .map_err(|_| format!("expected a number or \"auto\", found {s:?}"))
    }
}

fn parse_format(s: &str) -> std::result::Result<ReportFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Preset {
    Stationary,
    Sinusoidal,
}

fn parse_preset(s: &str) -> std::result::Result<Preset, String> {
    match s {
        "stationary" => Ok(Preset::Stationary),
        "sinusoidal" => Ok(Preset::Sinusoidal),
        other => Err(format!(
            "unknown preset {other:?} (expected stationary or sinusoidal)"
        )),
    }
}

/// Parse `args` and execute; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Theory(args) => cmd_theory(args),
        Command::Table(args) => cmd_table(args),
    };
    match result {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let profile = if let Some(eps) = args.eps {
        FailureProfile::stationary_with_ts(eps, args.ts)?
    } else {
        let eps0 = args
            .eps0
            .expect("clap group provides eps0 when eps is absent");
        let delta = args.delta.expect("clap requires delta alongside eps0");
        let freq = args.freq.expect("clap requires freq alongside eps0");
        FailureProfile::sinusoidal(eps0, delta, freq, args.ts)?
    };
    let series = generate(&profile, args.n, args.seed)?;
    save_trace(&series, &args.out)?;
    println!(
        "wrote {} outcomes to {} (profile {}, seed {}, empirical failure rate {})",
        series.len(),
        args.out.display(),
        profile.kind_name(),
        args.seed,
        series.empirical_failure_rate()
    );
    Ok(())
}

fn print_error_summary(name: &str, s: &ErrorSummary, theory_var: f64, grade: ApproximationGrade) {
    println!(
        "{name}: mean {}  var {}  mse {}  mae {}  theory var {}  ratio {}  grade {}",
        s.mean, s.var, s.mse, s.mae, theory_var, grade.ratio, grade.grade
    );
}

fn cmd_estimate(args: EstimateArgs) -> Result<()> {
    let series = load_trace(&args.trace)?;
    let alpha = args.alpha.resolve(args.m)?;
    let config = AnalysisConfig {
        m: args.m,
        alpha,
        y0: args.y0,
        skip_prefix: args.skip_prefix,
        skip_postfix: args.skip_postfix,
    };
    let analysis = analyze(&series, &config)?;
    let empirical = analysis.empirical_failure_rate;
    let theory_eps = match args.eps {
        Some(eps) => {
            var_x(eps)?;
            eps
        }
        None => empirical,
    };
    let theory_var_d = stationary_sma_error_variance(theory_eps, args.m)?;
    let theory_var_e = stationary_ema_error_variance(theory_eps, args.m, alpha)?;
    let grade_d = grade_against_theory(analysis.d.mse, theory_var_d)?;
    let grade_e = grade_against_theory(analysis.e.mse, theory_var_e)?;

    println!(
        "trace: {} ({} outcomes, ts {} s, source {})",
        args.trace.display(),
        series.len(),
        series.ts_seconds(),
        series.source_label()
    );
    println!("m: {}  alpha: {}  y0: {}", args.m, alpha, args.y0);
    println!(
        "steps summarized: {} (skip prefix {}, postfix {})",
        analysis.n_stats, args.skip_prefix, args.skip_postfix
    );
    println!("empirical failure rate: {empirical}");
    if args.eps.is_some() {
        println!("theory eps: {theory_eps} (nominal; empirical rate {empirical})");
    } else {
        println!("theory eps: {theory_eps} (empirical)");
    }
    print_error_summary("d = z - u", &analysis.d, theory_var_d, grade_d);
    print_error_summary("e = z - y", &analysis.e, theory_var_e, grade_e);

    if let Some(out) = &args.out {
        let row = ReportRow {
            profile: "external".to_string(),
            eps0: theory_eps,
            delta_eps: 0.0,
            freq_hz: 0.0,
            ts: series.ts_seconds(),
            m: args.m,
            alpha,
            n_stats: analysis.n_stats,
            mu_e: analysis.e.mean,
            var_e: analysis.e.var,
            mse_e: analysis.e.mse,
            theory_var_e,
            mae_e: analysis.e.mae,
            grade_e: grade_e.grade,
            mu_d: analysis.d.mean,
            var_d: analysis.d.var,
            mse_d: analysis.d.mse,
            theory_var_d,
            mae_d: analysis.d.mae,
            grade_d: grade_d.grade,
        };
        let mut w = std::io::BufWriter::new(std::fs::File::create(out)?);
        write_report(&[row], args.format, &mut w)?;
        w.flush()?;
        println!("wrote report to {}", out.display());
    }
    Ok(())
}

fn cmd_theory(args: TheoryArgs) -> Result<()> {
    let alpha = args.alpha.resolve(args.m)?;
    let report = TheoryReport::stationary(args.eps, args.m, alpha, args.y0)?;
    println!("eps: {}", report.eps);
    println!("m: {}", report.m);
    println!("alpha: {}", report.alpha);
    println!("y0: {}", report.y0);
    println!("var_x: {}", report.var_x);
    println!("e_z: {}", report.e_z);
    println!("var_u: {}", report.var_u);
    println!("var_z: {}", report.var_z);
    println!("var_y_steady: {}", report.var_y_steady);
    println!("var_d: {}", report.var_d);
    println!("var_e: {}", report.var_e);
    Ok(())
}

fn resolve_threads(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("FDRLAB_THREADS") {
        Ok(v) => {
            let t: usize = v.trim().parse().map_err(|_| {
                Error::Config(format!(
                    "FDRLAB_THREADS must be a positive integer, found {v:?}"
                ))
            })?;
            if t == 0 {
                return Err(Error::Config(
                    "FDRLAB_THREADS must be a positive integer".to_string(),
                ));
            }
            Ok(Some(t))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Error::Config(format!("FDRLAB_THREADS: {e}"))),
    }
}

fn cmd_table(args: TableArgs) -> Result<()> {
    let mut spec = match (&args.spec, args.preset) {
        (Some(path), None) => load_spec(path)?,
        (None, Some(Preset::Stationary)) => TableSpec::stationary_grid(),
        (None, Some(Preset::Sinusoidal)) => TableSpec::sinusoidal_grid(),
        _ => unreachable!("clap enforces exactly one grid source"),
    };
    if let Some(n) = args.n_stats {
        spec.n_stats = n;
    }
    if let Some(skip) = args.skip {
        spec.skip = skip;
    }
    if let Some(seed) = args.seed {
        spec.base_seed = seed;
    }
    let threads = resolve_threads(args.threads)?;
    eprintln!(
        "running {} cells ({} threads, base seed {})",
        spec.cell_count(),
        threads.map_or_else(|| "default".to_string(), |t| t.to_string()),
        spec.base_seed
    );
    let start = std::time::Instant::now();
    let rows = run_table(&spec, threads)?;
    let elapsed = start.elapsed().as_secs_f64();
    match &args.out {
        Some(path) => {
            let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
            write_report(&rows, args.format, &mut w)?;
            w.flush()?;
            eprintln!(
                "wrote {} rows to {} in {elapsed:.1}s",
                rows.len(),
                path.display()
            );
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            write_report(&rows, args.format, &mut w)?;
            eprintln!("completed {} rows in {elapsed:.1}s", rows.len());
        }
    }
    Ok(())
}
