//! Command-line front end.
//!
//! Exit status: 0 on success (diverged trials still count as completed),
//! 1 for failed report assertions or other runtime errors, 2 for config
//! errors, 3 for missing or invalid data.

pub mod dataset;
pub mod records;
pub mod report;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::data::load_mnist;
use crate::error::Error;
use crate::harness::{self, run_all, ExperimentConfig, ExperimentResult, RunOptions, TrialRecord};
use crate::rng::derive_seed;
use records::{RunManifest, SeedEntry};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;

/// Environment variable that overrides the default MNIST directory.
pub const DATA_DIR_ENV: &str = "SPARSITY_LAB_DATA";
pub const DEFAULT_DATA_DIR: &str = "data/mnist";

#[derive(Debug, Parser)]
#[command(name = "sparsity-lab", version, about = "Train MLPs on MNIST and measure hidden-layer sparsity and selectivity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment config (a TOML file or a preset name).
    Run(RunArgs),
    /// Check trend assertions against finished runs.
    Report(ReportArgs),
    /// Download or check the MNIST files.
    Data(DataArgs),
    /// List the built-in presets, or write them out as TOML files.
    Presets(PresetArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Config file or preset name.
    pub config: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Use seed indices 0..N instead of the config's seeds.
    #[arg(long)]
    pub seeds: Option<u64>,
    /// Train on a stratified subsample of this many images.
    #[arg(long)]
    pub subsample: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Keep only the first N sweep values.
    #[arg(long)]
    pub sweep_limit: Option<usize>,
    #[arg(long, env = DATA_DIR_ENV, default_value = DEFAULT_DATA_DIR)]
    pub data_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// `epochs.csv` files or run directories containing one.
    #[arg(required = true)]
    pub results: Vec<PathBuf>,
    #[arg(long)]
    pub asserts: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DataAction {
    Fetch,
    Verify,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    pub action: DataAction,
    #[arg(long, env = DATA_DIR_ENV, default_value = DEFAULT_DATA_DIR)]
    pub dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct PresetArgs {
    /// Write every preset as `<name>.toml` into this directory.
    #[arg(long)]
    pub write: Option<PathBuf>,
}

/// An error paired with the exit status it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub error: Error,
}

impl CliError {
    fn config(error: Error) -> Self {
        CliError { code: EXIT_CONFIG, error }
    }

    fn data(error: Error) -> Self {
        CliError { code: EXIT_DATA, error }
    }

    fn other(error: Error) -> Self {
        let code = match error {
            Error::Config(_) => EXIT_CONFIG,
            _ => EXIT_FAILURE,
        };
        CliError { code, error }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Resolves a config argument: an existing file is parsed, anything else is
/// looked up as a preset name.
pub fn resolve_config(arg: &str) -> crate::error::Result<ExperimentConfig> {
    let path = Path::new(arg);
    if path.is_file() {
        return ExperimentConfig::from_path(path);
    }
    harness::preset(arg).ok_or_else(|| {
        Error::Config(format!(
            "{arg:?} is neither a config file nor a preset (see `sparsity-lab presets`)"
        ))
    })
}

/// Applies command-line overrides and expands the sweep.
pub fn prepare_run(args: &RunArgs) -> crate::error::Result<(ExperimentConfig, Vec<ExperimentConfig>)> {
    let mut cfg = resolve_config(&args.config)?;
    if let Some(n) = args.seeds {
        cfg.seeds = (0..n).collect();
    }
    if let Some(n) = args.subsample {
        cfg.train_subsample = Some(n);
    }
    if let Some(n) = args.epochs {
        cfg.epochs = n;
    }
    if let (Some(limit), Some(sweep)) = (args.sweep_limit, cfg.sweep.as_mut()) {
        sweep.values.truncate(limit);
    }
    cfg.validate()?;
    let points = harness::expand(&cfg)?;
    Ok((cfg, points))
}

pub struct RunOutcome {
    pub results: Vec<ExperimentResult>,
    pub manifest: RunManifest,
}

pub fn cmd_run(args: &RunArgs) -> CliResult<RunOutcome> {
    let started_at = chrono::Utc::now().to_rfc3339();
    let (cfg, points) = prepare_run(args).map_err(CliError::config)?;
    let mnist = load_mnist(&args.data_dir).map_err(CliError::data)?;

    std::fs::create_dir_all(&args.out).map_err(|e| CliError::other(Error::io(&args.out, e)))?;
    let trace_root = args.out.join("traces");
    let opts = RunOptions {
        trace_root: cfg.export_traces.then_some(trace_root.as_path()),
    };
    log::info!("running {} experiment(s) of {}", points.len(), cfg.name);
    let results = run_all(&points, &mnist, &opts).map_err(CliError::other)?;

    let out = &args.out;
    let trials: Vec<&TrialRecord> = results.iter().flat_map(|r| &r.trials).collect();
    let write_csv = |name: &str, f: &dyn Fn(BufWriter<File>) -> crate::error::Result<()>| -> CliResult<PathBuf> {
        let path = out.join(name);
        let file = File::create(&path).map_err(|e| CliError::other(Error::io(&path, e)))?;
        f(BufWriter::new(file)).map_err(CliError::other)?;
        Ok(path)
    };
    let mut outputs = vec![
        write_csv(records::EPOCHS_CSV, &|w| records::write_epochs_csv(&trials, w))?,
        write_csv(records::PRODUCTS_CSV, &|w| records::write_products_csv(&trials, w))?,
    ];

    let summary_path = out.join(records::SUMMARY_JSON);
    let summaries: Vec<_> = results.iter().map(records::summarize).collect();
    records::write_json(&summaries, &summary_path).map_err(CliError::other)?;
    outputs.push(summary_path);

    let config_path = out.join(records::CONFIG_TOML);
    let text = cfg.to_toml_string().map_err(CliError::other)?;
    std::fs::write(&config_path, text).map_err(|e| CliError::other(Error::io(&config_path, e)))?;
    outputs.push(config_path);
    if cfg.export_traces {
        outputs.push(trace_root);
    }

    let manifest = RunManifest {
        config_name: cfg.name.clone(),
        config_hash: cfg.config_hash(),
        seed_group: cfg.seed_name().to_string(),
        seeds: cfg
            .seeds
            .iter()
            .map(|&index| SeedEntry {
                index,
                seed: derive_seed(cfg.seed_name(), index),
            })
            .collect(),
        software_version: env!("CARGO_PKG_VERSION").to_string(),
        started_at,
        finished_at: chrono::Utc::now().to_rfc3339(),
        outputs,
    };
    records::write_json(&manifest, &out.join(records::MANIFEST_JSON)).map_err(CliError::other)?;
    Ok(RunOutcome { results, manifest })
}

fn print_final(results: &[ExperimentResult]) {
    println!(
        "{:<48} {:>16} {:>16} {:>16}",
        "experiment", "accuracy", "sparsity", "selectivity"
    );
    for r in results {
        let cells = match r.final_test().and_then(|e| e.stats.as_ref()) {
            Some(s) => [
                format!("{:.4}±{:.4}", s.accuracy.mean, s.accuracy.stderr),
                format!("{:.4}±{:.4}", s.uniform.sparsity.mean, s.uniform.sparsity.stderr),
                format!(
                    "{:.4}±{:.4}",
                    s.uniform.selectivity_mean.mean, s.uniform.selectivity_mean.stderr
                ),
            ],
            None => ["diverged".into(), "-".into(), "-".into()],
        };
        println!("{:<48} {:>16} {:>16} {:>16}", r.experiment, cells[0], cells[1], cells[2]);
    }
}

fn result_csv(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join(records::EPOCHS_CSV)
    } else {
        path.to_path_buf()
    }
}

/// Prints the product table and every assertion's verdict; fails if any
/// assertion fails.
pub fn cmd_report(args: &ReportArgs) -> CliResult<Vec<report::Outcome>> {
    let mut trials = Vec::new();
    for p in &args.results {
        trials.extend(records::load_epochs_csv(&result_csv(p)).map_err(CliError::other)?);
    }
    println!("{:<48} {:>10} {:>14} {:>14}", "experiment", "accuracy", "acc×sparsity", "acc×selectivity");
    for (name, acc, xs, xsel) in report::final_products(&trials) {
        println!("{name:<48} {acc:>10.4} {xs:>14.4} {xsel:>14.4}");
    }
    let outcomes = match &args.asserts {
        Some(path) => {
            let asserts = report::load_assertions(path).map_err(CliError::config)?;
            report::evaluate_all(&trials, &asserts)
        }
        None => Vec::new(),
    };
    for o in &outcomes {
        println!("{:<4} {}: {}", o.verdict.to_string().to_uppercase(), o.name, o.detail);
    }
    if outcomes.iter().any(|o| o.verdict == report::Verdict::Fail) {
        return Err(CliError {
            code: EXIT_FAILURE,
            error: Error::Input("one or more assertions failed".into()),
        });
    }
    Ok(outcomes)
}

pub fn cmd_data(args: &DataArgs) -> CliResult<()> {
    if args.action == DataAction::Fetch {
        for path in dataset::fetch(&args.dir).map_err(CliError::data)? {
            println!("wrote {}", path.display());
        }
    }
    let (train, test) = dataset::verify_dir(&args.dir).map_err(CliError::data)?;
    for (name, s) in [("train", train), ("test", test)] {
        println!(
            "{name}: {} images of {}x{}, {} labels, checksums ok",
            s.images, s.rows, s.cols, s.labels
        );
    }
    Ok(())
}

pub fn cmd_presets(args: &PresetArgs) -> CliResult<()> {
    let presets = harness::all_presets();
    if let Some(dir) = &args.write {
        std::fs::create_dir_all(dir).map_err(|e| CliError::other(Error::io(dir, e)))?;
        for p in &presets {
            let path = dir.join(format!("{}.toml", p.name));
            let text = p.to_toml_string().map_err(CliError::other)?;
            std::fs::write(&path, text).map_err(|e| CliError::other(Error::io(&path, e)))?;
        }
    }
    for p in &presets {
        let points = p.sweep.as_ref().map_or(1, |s| s.values.len());
        println!("{:<28} {} point(s), {} epochs", p.name, points, p.epochs);
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let outcome = match &cli.command {
        Command::Run(a) => cmd_run(a).map(|o| print_final(&o.results)),
        Command::Report(a) => cmd_report(a).map(drop),
        Command::Data(a) => cmd_data(a),
        Command::Presets(a) => cmd_presets(a),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.error);
            e.code
        }
    }
}

pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    run_with_args(std::env::args_os())
}
