//! `feupdate`: run model-updating scenarios from a TOML configuration.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use feupdate::config::{ConfigError, MethodSelection, RunConfig};
use feupdate::model::{assemble, solve_modes, ModalData};
use feupdate::optim::EvalBudget;
use feupdate::scenario::Scenario;
use feupdate::updating::{
    comparison_table, full_objective, sample_design, write_design_csv, write_history_csv, UpdateReport,
};
use thiserror::Error;

#[derive(Parser)]
#[command(name = "feupdate", version, about = "Finite element model updating from modal data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Update the model with one or all methods and write reports.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `method` in the config.
        #[arg(long)]
        method: Option<MethodSelection>,
        /// Output directory; overrides `out_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Global seed; overrides `seed` in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate the initial response-surface design and write it as CSV.
    Sample {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print natural frequencies and mode shapes of the initial and ground-truth models.
    Modes {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn runtime(e: impl std::fmt::Display) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            method,
            out,
            seed,
        } => cmd_run(&config, method, out, seed),
        Command::Sample { config, out } => cmd_sample(&config, &out),
        Command::Modes { config } => cmd_modes(&config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn load(path: &Path) -> Result<(RunConfig, Scenario), CliError> {
    let cfg = RunConfig::load(path)?;
    let scenario = cfg.build()?;
    Ok((cfg, scenario))
}

fn cmd_run(
    config: &Path,
    method: Option<MethodSelection>,
    out: Option<PathBuf>,
    seed: Option<u64>,
) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(s) = seed {
        cfg.reseed(s);
    }
    if let Some(m) = method {
        cfg.method = m;
    }
    if let Some(o) = out {
        cfg.out_dir = o;
    }
    let scenario = cfg.build()?;

    let out_dir = cfg.out_dir.clone();
    fs::create_dir_all(&out_dir).map_err(CliError::runtime)?;
    let mut reports = Vec::new();
    let mut failure = None;
    for m in cfg.method.methods() {
        log::info!("running {}", m.as_str());
        match cfg.run(&scenario, m) {
            Ok(r) => {
                write_report(&out_dir, &r)?;
                reports.push(r);
            }
            Err(e) => {
                failure = Some(format!("{} failed: {e}", m.as_str()));
                break;
            }
        }
    }
    if !reports.is_empty() {
        let table = comparison_table(&reports).map_err(CliError::runtime)?;
        fs::write(out_dir.join("comparison.csv"), &table).map_err(CliError::runtime)?;
        print!("{table}");
    }
    match failure {
        Some(msg) => Err(CliError::Runtime(msg)),
        None => Ok(()),
    }
}

fn write_report(dir: &Path, report: &UpdateReport) -> Result<(), CliError> {
    let name = report.method.as_str();
    let json = serde_json::to_string_pretty(report).map_err(CliError::runtime)?;
    fs::write(dir.join(format!("{name}_report.json")), json + "\n").map_err(CliError::runtime)?;
    let file = fs::File::create(dir.join(format!("{name}_history.csv"))).map_err(CliError::runtime)?;
    write_history_csv(&report.history, file).map_err(CliError::runtime)?;
    Ok(())
}

fn cmd_sample(config: &Path, out: &Path) -> Result<(), CliError> {
    let (cfg, scenario) = load(config)?;
    let problem = &scenario.problem;
    let design = sample_design(
        &problem.bounds,
        cfg.rsm.n_samples,
        cfg.rsm.sampling,
        cfg.rsm.sampler_seed,
    );
    let budget = EvalBudget::unlimited();
    let costs: Vec<f64> = design.iter().map(|x| full_objective(problem, x, &budget)).collect();
    let file = fs::File::create(out).map_err(CliError::runtime)?;
    write_design_csv(&design, &costs, file).map_err(CliError::runtime)?;
    eprintln!("wrote {} samples to {}", design.len(), out.display());
    Ok(())
}

fn cmd_modes(config: &Path) -> Result<(), CliError> {
    let (cfg, scenario) = load(config)?;
    let problem = &scenario.problem;
    let wanted = cfg.scenario.n_modes + problem.structure.layout.rigid_body_modes();
    let mut stdout = std::io::stdout().lock();
    for (label, moduli) in [("initial", &problem.initial), ("ground_truth", &scenario.ground_truth)] {
        let modes = assemble(&problem.structure, moduli)
            .and_then(|m| solve_modes(&m, wanted))
            .and_then(|m| m.restrict(&problem.measured.coordinates))
            .map_err(CliError::runtime)?;
        print_modes(&mut stdout, label, &modes).map_err(CliError::runtime)?;
    }
    Ok(())
}

fn print_modes(out: &mut impl Write, label: &str, modes: &ModalData) -> std::io::Result<()> {
    writeln!(out, "# {label} model")?;
    write!(out, "mode,frequency_hz,rigid_body")?;
    for c in &modes.coordinates {
        write!(out, ",dof_{c}")?;
    }
    writeln!(out)?;
    for (i, (hz, rigid)) in modes.frequencies_hz().iter().zip(&modes.rigid_body).enumerate() {
        write!(out, "{},{hz},{rigid}", i + 1)?;
        for v in modes.shapes.column(i).iter() {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    writeln!(out)
}
