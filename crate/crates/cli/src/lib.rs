//! Command-line frontend: configuration, experiment execution and CSV output.

pub mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use nonlocal_nt::harness::{
    compare, comparison_csv, convergence_study, monitor_csv, report_csv, run_simulation, run_summary, snapshot_csv,
    write_atomic, Experiment, Preset, PresetKind, ReferenceCache,
};
use nonlocal_nt::models::ModelKind;
use nonlocal_nt::schemes::SchemeId;

use config::{read_config, ConfigError, Job, RunConfig, Verbosity};

#[derive(Debug, Parser)]
#[command(name = "nonlocal-nt", version, about = "Central schemes for nonlocal balance laws")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,

    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Shipped experiment set; see `list-presets`.
    #[arg(long, global = true, value_name = "NAME", conflicts_with = "config")]
    pub preset: Option<String>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Abort when the CFL number exceeds its bound.
    #[arg(long, global = true)]
    pub strict_cfl: bool,

    /// Worker threads; all cores by default.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    /// Overrides the reference refinement level.
    #[arg(long, global = true, value_name = "N")]
    pub reference_level: Option<u32>,

    /// Overrides the level of `run` and `compare`.
    #[arg(long, global = true, value_name = "N")]
    pub level: Option<u32>,

    /// Directory of cached reference solutions; `<out>/references` by default.
    #[arg(long, global = true, value_name = "DIR")]
    pub cache_dir: Option<PathBuf>,

    /// Recompute references instead of reading or writing the cache.
    #[arg(long, global = true)]
    pub no_cache: bool,

    /// More log output; repeat for debug output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    /// Only errors.
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run each scheme once and write snapshot and monitor CSVs.
    Run {
        /// Restrict to these schemes.
        #[arg(long, value_delimiter = ',')]
        schemes: Vec<SchemeId>,
    },
    /// Convergence study against a fine reference.
    Converge,
    /// All schemes on one level next to the reference.
    Compare,
    /// Available models with their default kernel and range.
    ListModels,
    /// Shipped presets.
    ListPresets,
    /// JSON schema of run configurations.
    Schema,
}

/// Exit status: 2 for invalid input, 3 for numerical failure, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<nonlocal_nt::Error>() {
            return match e {
                e if e.is_numerical() => 3,
                nonlocal_nt::Error::Io(_) => 1,
                _ => 2,
            };
        }
    }
    1
}

/// Parses the arguments, runs the command and maps failures to exit codes.
pub fn main_with(args: impl IntoIterator<Item = std::ffi::OsString>) -> ExitCode {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn init_logging(cli: &Cli, from_config: Verbosity) {
    let level = if cli.quiet {
        log::LevelFilter::Error
    } else {
        match (cli.verbose, from_config) {
            (0, Verbosity::Quiet) => log::LevelFilter::Error,
            (0, Verbosity::Normal) => log::LevelFilter::Info,
            (0, Verbosity::Verbose) | (1, _) => log::LevelFilter::Debug,
            _ => log::LevelFilter::Trace,
        }
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .parse_default_env()
        .try_init();
}

pub fn execute(cli: &Cli) -> Result<()> {
    match cli.command {
        Some(Command::ListModels) => return list_models(),
        Some(Command::ListPresets) => return list_presets(),
        Some(Command::Schema) => return emit(&format!("{}\n", config_schema())),
        _ => {}
    }
    let mut job = load_job(cli)?;
    init_logging(cli, job.verbosity);
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(ConfigError("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    apply_overrides(cli, &mut job)?;
    let out = cli
        .out
        .clone()
        .or_else(|| job.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let cache = if cli.no_cache {
        ReferenceCache::disabled()
    } else {
        ReferenceCache::at(cli.cache_dir.clone().unwrap_or_else(|| out.join("references")))
    };
    match &cli.command {
        Some(Command::Run { schemes }) => cmd_run(&job, schemes, &out),
        Some(Command::Converge) => cmd_converge(&job, &cache, &out),
        Some(Command::Compare) => cmd_compare(&job, &cache, &out),
        None => match job.kind {
            Some(PresetKind::Table) => cmd_converge(&job, &cache, &out),
            Some(PresetKind::Figure) => cmd_compare(&job, &cache, &out),
            None => bail!(ConfigError("a subcommand is required with --config".into())),
        },
        Some(_) => unreachable!(),
    }
}

fn load_job(cli: &Cli) -> Result<Job> {
    match (&cli.config, &cli.preset) {
        (Some(path), None) => {
            let cfg: RunConfig = read_config(path)?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "run".into());
            Ok(Job::from_config(&name, &cfg)?)
        }
        (None, Some(name)) => Ok(Job::from_preset(name)?),
        _ => bail!(ConfigError("give exactly one of --config PATH or --preset NAME".into())),
    }
}

fn apply_overrides(cli: &Cli, job: &mut Job) -> Result<()> {
    if cli.level.is_some() {
        job.level = cli.level;
    }
    for exp in &mut job.experiments {
        if let Some(r) = cli.reference_level {
            exp.reference_level = r;
            exp.levels.retain(|&l| l < r);
        }
        if cli.strict_cfl {
            exp.strict_cfl = true;
        }
        if cli.reference_level.is_some() {
            exp.validate().map_err(|e| ConfigError(e.to_string()))?;
        }
    }
    Ok(())
}

/// Writes to stdout; a closed pipe ends output quietly.
fn emit(text: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    write_atomic(path, contents).with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn schemes_for(exp: &Experiment, only: &[SchemeId]) -> Result<Vec<SchemeId>> {
    let all = exp.schemes()?;
    if only.is_empty() {
        return Ok(all);
    }
    let mut picked = Vec::new();
    for s in only {
        if !all.contains(s) {
            bail!(ConfigError(format!("scheme '{s}' is not configured for {}", exp.model)));
        }
        picked.push(*s);
    }
    Ok(picked)
}

/// Writes `<stem>_<scheme>_n<level>.csv` and the matching `_monitor.csv`.
pub fn cmd_run(job: &Job, only: &[SchemeId], out: &Path) -> Result<()> {
    for exp in &job.experiments {
        let level = job.level_of(exp);
        let model = exp.build_model()?;
        for scheme in schemes_for(exp, only)? {
            let run = run_simulation(exp, scheme, level)?;
            let base = format!("{}_{}_n{level}", job.stem(exp), scheme);
            write(
                &out.join(format!("{base}.csv")),
                &snapshot_csv(model.as_ref(), &run.grid, &run.state),
            )?;
            write(
                &out.join(format!("{base}_monitor.csv")),
                &monitor_csv(model.as_ref(), &run.log),
            )?;
            if run.log.cfl_violations > 0 {
                log::warn!("{}: {} steps exceeded the CFL bound", base, run.log.cfl_violations);
            }
            emit(&format!("{}\n", run_summary(&run)))?;
        }
    }
    Ok(())
}

/// Writes `<name>_convergence.csv` with a `kernel` column ahead of the
/// per-level rows.
pub fn cmd_converge(job: &Job, cache: &ReferenceCache, out: &Path) -> Result<()> {
    let mut csv = String::from("kernel,scheme,n,dx,l1_error,rate\n");
    for exp in &job.experiments {
        log::info!(
            "{}: {} with kernel {} on levels {:?}, reference level {}",
            job.name,
            exp.model,
            exp.kernel(),
            exp.levels,
            exp.reference_level
        );
        let report = convergence_study(exp, cache)?;
        let body = report_csv(&report);
        for line in body.lines().skip(1) {
            csv.push_str(&format!("{},{line}\n", exp.kernel()));
        }
        emit(&format_report(exp, &report))?;
    }
    write(&out.join(format!("{}_convergence.csv", job.name)), &csv)
}

fn format_report(exp: &Experiment, report: &nonlocal_nt::harness::ConvergenceReport) -> String {
    let mut s = format!("{} / {} (lambda = {:.6})\n", exp.model, exp.kernel(), report.lambda);
    for r in &report.rows {
        let rate = r.rate.map(|x| format!("{x:.2}")).unwrap_or_default();
        s.push_str(&format!(
            "  {:<6} n={} dx={:<10} {:.3e} {rate}\n",
            r.scheme.name(),
            r.level,
            r.dx,
            r.l1_error
        ));
    }
    s
}

/// Writes `<stem>_compare_n<level>.csv` and `<stem>_compare_n<level>_errors.csv`.
pub fn cmd_compare(job: &Job, cache: &ReferenceCache, out: &Path) -> Result<()> {
    for exp in &job.experiments {
        let level = job.level_of(exp);
        let model = exp.build_model()?;
        let cmp = compare(exp, level, cache)?;
        let base = format!("{}_compare_n{level}", job.stem(exp));
        write(&out.join(format!("{base}.csv")), &comparison_csv(model.as_ref(), &cmp))?;
        let mut errors = String::from("scheme,l1_error\n");
        for (run, err) in cmp.runs.iter().zip(&cmp.errors) {
            errors.push_str(&format!("{},{err}\n", run.scheme));
            emit(&format!("{} {:<6} {:.6e}\n", job.stem(exp), run.scheme.name(), err))?;
        }
        write(&out.join(format!("{base}_errors.csv")), &errors)?;
    }
    Ok(())
}

fn list_models() -> Result<()> {
    for m in ModelKind::ALL {
        emit(&format!(
            "{:<16} kernel {:<20} eta {:<6} {}\n",
            m.name(),
            m.default_kernel().name(),
            m.default_eta(),
            m.description()
        ))?;
    }
    Ok(())
}

fn list_presets() -> Result<()> {
    for p in Preset::all()? {
        let kind = match p.kind {
            PresetKind::Table => "table",
            PresetKind::Figure => "figure",
        };
        emit(&format!("{:<18} {:<7} {}\n", p.name, kind, p.description))?;
    }
    Ok(())
}

/// Pretty-printed JSON schema of [`RunConfig`].
pub fn config_schema() -> String {
    let schema = schemars::schema_for!(RunConfig);
    serde_json::to_string_pretty(&schema).expect("schema serializes")
}
