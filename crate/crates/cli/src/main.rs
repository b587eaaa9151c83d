//! Command-line surface: simulate, fit, evaluate, bound, experiment,
//! summarize. Exit codes: 0 success, 2 validation error, 3 I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use blockgaps::bounds::{prop1_col_bound, prop1_row_bound, theorem1_bound, BoundInputs};
use blockgaps::evaluation::joint_success;
use blockgaps::experiments::{run_grid, summarize, ExperimentConfig};
use blockgaps::io;
use blockgaps::lg::{largest_gaps_fit, threshold_value, ThresholdStrategy};
use blockgaps::model::{compute_key_parameters, sample, Axis};
use blockgaps::{Error, FitResult, LabelAssignment, GENERATOR_NAME, VERSION};

#[derive(Parser)]
#[command(name = "blockgaps", version = VERSION, about = "Gap-based co-clustering of binary matrices")]
struct Cli {
    /// Default seed for subcommands that simulate data.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Suppress progress lines on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a matrix and its labels from given parameters.
    Simulate(SimulateArgs),
    /// Cluster a binary matrix and estimate the block parameters.
    Fit(FitArgs),
    /// Compare a fit document with the simulation truth.
    Evaluate(EvaluateArgs),
    /// Print the concentration bound term by term.
    Bound(BoundArgs),
    /// Run a simulation grid and write records and summary CSVs.
    Experiment(ExperimentArgs),
    /// Aggregate a records CSV into a summary CSV.
    Summarize(SummarizeArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Parameter document (JSON with g, m, pi, rho, alpha).
    #[arg(long)]
    params: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    /// Seed for this run; falls back to the global --seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output prefix; writes <prefix>_x.csv, _z.csv, _w.csv, _meta.json.
    #[arg(long)]
    out_prefix: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// Matrix file; CSV if the first line contains commas, contiguous
    /// 0/1 text otherwise.
    #[arg(long)]
    matrix: PathBuf,
    /// Row threshold. Mutually exclusive with --strategy.
    #[arg(long, requires = "sm", conflicts_with = "strategy")]
    sg: Option<f64>,
    /// Column threshold.
    #[arg(long, requires = "sg")]
    sm: Option<f64>,
    /// Threshold schedule S1-S4; S1 needs --params for the oracle deltas.
    #[arg(long)]
    strategy: Option<String>,
    /// True parameters, required by --strategy S1.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Output file for the fit document; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Fit document produced by the fit subcommand.
    #[arg(long)]
    fit: PathBuf,
    /// True row labels (single-column CSV).
    #[arg(long)]
    truth_z: PathBuf,
    /// True column labels.
    #[arg(long)]
    truth_w: PathBuf,
    /// True parameter document.
    #[arg(long)]
    params: PathBuf,
    /// Parameter accuracy level for the compound event.
    #[arg(long, default_value_t = 0.1)]
    t: f64,
}

#[derive(Args)]
struct BoundArgs {
    /// True parameter document; supplies the key parameters and the true
    /// class counts.
    #[arg(long)]
    params: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    /// Row threshold; defaults to delta_pi/2.
    #[arg(long)]
    sg: Option<f64>,
    /// Column threshold; defaults to delta_rho/2.
    #[arg(long)]
    sm: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    t: f64,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for records.csv, summary.csv, manifest.json.
    #[arg(long)]
    out_dir: PathBuf,
    /// Worker threads for replicates; rayon default when absent.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct SummarizeArgs {
    /// Records CSV produced by the experiment subcommand.
    #[arg(long)]
    records: PathBuf,
    /// Output file for the summary CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct SimulateMeta<'a> {
    params: &'a blockgaps::LBMParameters,
    n: usize,
    d: usize,
    seed: u64,
    generator: &'static str,
    version: &'static str,
}

#[derive(Serialize)]
struct FitDocument {
    g_hat: usize,
    m_hat: usize,
    z_hat: Vec<usize>,
    w_hat: Vec<usize>,
    pi_hat: Vec<f64>,
    rho_hat: Vec<f64>,
    alpha_hat: Vec<Vec<f64>>,
    s_g: f64,
    s_m: f64,
    cut_positions_rows: Vec<usize>,
    cut_positions_cols: Vec<usize>,
    fit_millis: f64,
}

#[derive(Serialize)]
struct ExperimentManifest<'a> {
    config: &'a ExperimentConfig,
    records: usize,
    wall_seconds: f64,
    generator: &'static str,
    version: &'static str,
}

fn write_text(path: &Path, text: &str) -> blockgaps::Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

fn write_or_print(out: Option<&Path>, text: &str) -> blockgaps::Result<()> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    prefix.with_file_name(name)
}

fn run_simulate(global_seed: u64, args: &SimulateArgs) -> blockgaps::Result<()> {
    let params = io::read_params(&args.params)?;
    let seed = args.seed.unwrap_or(global_seed);
    let (z, w, x) = sample(&params, args.n, args.d, seed)?;
    write_text(&suffixed(&args.out_prefix, "_x.csv"), &io::matrix_to_csv(&x))?;
    write_text(&suffixed(&args.out_prefix, "_z.csv"), &io::labels_to_csv(&z))?;
    write_text(&suffixed(&args.out_prefix, "_w.csv"), &io::labels_to_csv(&w))?;
    let meta = SimulateMeta {
        params: &params,
        n: args.n,
        d: args.d,
        seed,
        generator: GENERATOR_NAME,
        version: VERSION,
    };
    let mut text = serde_json::to_string_pretty(&meta)?;
    text.push('\n');
    write_text(&suffixed(&args.out_prefix, "_meta.json"), &text)
}

fn resolve_thresholds(args: &FitArgs, n: usize, d: usize) -> blockgaps::Result<(f64, f64)> {
    if let (Some(sg), Some(sm)) = (args.sg, args.sm) {
        return Ok((sg, sm));
    }
    let name = args.strategy.as_deref().ok_or_else(|| {
        Error::Threshold("provide either --sg/--sm or --strategy".to_string())
    })?;
    let id: blockgaps::experiments::StrategyId = name.parse()?;
    let key = match (&id.strategy(), &args.params) {
        (ThresholdStrategy::Constant, Some(path)) => {
            Some(compute_key_parameters(&io::read_params(path)?))
        }
        (ThresholdStrategy::Constant, None) => {
            return Err(Error::Threshold(
                "strategy S1 requires --params for the oracle deltas".to_string(),
            ))
        }
        _ => None,
    };
    let s_g = threshold_value(id.strategy(), Axis::Row, n, d, key.as_ref())?;
    let s_m = threshold_value(id.strategy(), Axis::Column, n, d, key.as_ref())?;
    Ok((s_g, s_m))
}

fn run_fit(args: &FitArgs, quiet: bool) -> blockgaps::Result<()> {
    let x = io::read_matrix(&args.matrix)?;
    let (s_g, s_m) = resolve_thresholds(args, x.n(), x.d())?;
    let start = Instant::now();
    let fit = largest_gaps_fit(&x, s_g, s_m)?;
    let fit_millis = start.elapsed().as_secs_f64() * 1e3;
    if !quiet {
        eprintln!(
            "fit {}x{}: g_hat={} m_hat={} in {:.1} ms",
            x.n(),
            x.d(),
            fit.g_hat,
            fit.m_hat,
            fit_millis
        );
    }
    let doc = FitDocument {
        g_hat: fit.g_hat,
        m_hat: fit.m_hat,
        z_hat: fit.z_hat.labels,
        w_hat: fit.w_hat.labels,
        pi_hat: fit.theta_hat.pi,
        rho_hat: fit.theta_hat.rho,
        alpha_hat: fit.theta_hat.alpha,
        s_g,
        s_m,
        cut_positions_rows: fit.cut_positions_rows,
        cut_positions_cols: fit.cut_positions_cols,
        fit_millis,
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    write_or_print(args.out.as_deref(), text.trim_end())
}

fn run_evaluate(args: &EvaluateArgs) -> blockgaps::Result<()> {
    let text = std::fs::read_to_string(&args.fit)?;
    let fit: serde_json::Value = serde_json::from_str(&text)?;
    let field = |name: &str| -> blockgaps::Result<serde_json::Value> {
        fit.get(name)
            .cloned()
            .ok_or_else(|| Error::Parse(format!("fit document lacks field {name:?}")))
    };
    let z_hat: Vec<usize> = serde_json::from_value(field("z_hat")?)?;
    let w_hat: Vec<usize> = serde_json::from_value(field("w_hat")?)?;
    let g_hat: usize = serde_json::from_value(field("g_hat")?)?;
    let m_hat: usize = serde_json::from_value(field("m_hat")?)?;
    let pi_hat: Vec<f64> = serde_json::from_value(field("pi_hat")?)?;
    let rho_hat: Vec<f64> = serde_json::from_value(field("rho_hat")?)?;
    let alpha_hat: Vec<Vec<f64>> = serde_json::from_value(field("alpha_hat")?)?;
    let s_g: f64 = serde_json::from_value(field("s_g")?)?;
    let s_m: f64 = serde_json::from_value(field("s_m")?)?;
    let fit = FitResult {
        g_hat,
        m_hat,
        z_hat: LabelAssignment::new(z_hat, g_hat)?,
        w_hat: LabelAssignment::new(w_hat, m_hat)?,
        theta_hat: blockgaps::LBMParameters {
            g: g_hat,
            m: m_hat,
            pi: pi_hat,
            rho: rho_hat,
            alpha: alpha_hat,
        },
        s_g,
        s_m,
        cut_positions_rows: Vec::new(),
        cut_positions_cols: Vec::new(),
    };
    let truth_z = io::read_labels(&args.truth_z)?;
    let truth_w = io::read_labels(&args.truth_w)?;
    let params = io::read_params(&args.params)?;
    let event = joint_success(&fit, &truth_z, &truth_w, &params, args.t)?;
    println!("{}", serde_json::to_string_pretty(&event)?);
    Ok(())
}

fn run_bound(args: &BoundArgs) -> blockgaps::Result<()> {
    let params = io::read_params(&args.params)?;
    let key = compute_key_parameters(&params);
    let inputs = BoundInputs {
        s_g: args.sg.unwrap_or(key.delta_pi / 2.0),
        s_m: args.sm.unwrap_or(key.delta_rho / 2.0),
        key,
        g_star: params.g,
        m_star: params.m,
        n: args.n,
        d: args.d,
        t: args.t,
    };
    let row = prop1_row_bound(&inputs)?;
    let col = prop1_col_bound(&inputs)?;
    let theorem = theorem1_bound(&inputs)?;
    println!(
        "prop1_row         raw {:>14.6e}  clipped {:.6}",
        row.raw, row.clipped
    );
    println!(
        "prop1_col         raw {:>14.6e}  clipped {:.6}",
        col.raw, col.clipped
    );
    for term in &theorem.terms {
        println!(
            "{:<17} raw {:>14.6e}  = {} * exp({:.6})",
            term.name, term.value, term.coefficient, term.exponent
        );
    }
    println!(
        "theorem1          raw {:>14.6e}  clipped {:.6}  ln_total {:.6}",
        theorem.raw_total, theorem.clipped_total, theorem.ln_total
    );
    Ok(())
}

fn run_experiment(args: &ExperimentArgs, quiet: bool) -> blockgaps::Result<()> {
    let text = std::fs::read_to_string(&args.config)?;
    let config: ExperimentConfig = serde_json::from_str(&text)?;
    config.validate()?;
    std::fs::create_dir_all(&args.out_dir)?;
    let start = Instant::now();
    let records = match args.threads {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::InvalidConfig(e.to_string()))?;
            pool.install(|| run_grid(&config))?
        }
        None => run_grid(&config)?,
    };
    let wall_seconds = start.elapsed().as_secs_f64();
    if !quiet {
        eprintln!("{} records in {wall_seconds:.1} s", records.len());
    }
    let summary = summarize(&records);
    write_text(&args.out_dir.join("records.csv"), &io::records_to_csv(&records))?;
    write_text(&args.out_dir.join("summary.csv"), &io::summary_to_csv(&summary))?;
    let manifest = ExperimentManifest {
        config: &config,
        records: records.len(),
        wall_seconds,
        generator: GENERATOR_NAME,
        version: VERSION,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write_text(&args.out_dir.join("manifest.json"), &text)
}

fn run_summarize(args: &SummarizeArgs) -> blockgaps::Result<()> {
    let text = std::fs::read_to_string(&args.records)?;
    let records = io::parse_records(&text)?;
    let summary = summarize(&records);
    write_or_print(args.out.as_deref(), io::summary_to_csv(&summary).trim_end())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => run_simulate(cli.seed, args),
        Command::Fit(args) => run_fit(args, cli.quiet),
        Command::Evaluate(args) => run_evaluate(args),
        Command::Bound(args) => run_bound(args),
        Command::Experiment(args) => run_experiment(args, cli.quiet),
        Command::Summarize(args) => run_summarize(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(if err.is_validation() { 2 } else { 3 })
        }
    }
}
