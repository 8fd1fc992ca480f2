use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use morphfab_core::fixtures;
use morphfab_core::pipeline::{
    batch_run, export_run, load_design_dir, run_pipeline, write_batch_outputs, PipelineConfig, PipelineError,
    PipelineRun,
};
use morphfab_core::score::render_stage_table;
use morphfab_core::voxel::{parse_morphology, serialize_morphology, MorphologySpec};

use crate::server;

#[derive(Debug, Parser)]
#[command(name = "morphfab", version, about = "Compile voxel robot morphologies into printable blueprints")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the pipeline on one morphology and export the blueprint.
    Run {
        spec: PathBuf,
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(short, long, default_value = "out")]
        out: PathBuf,
    },
    /// Run every morphology in a directory and write batch statistics.
    Batch {
        dir: PathBuf,
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(short, long, default_value_t = 1)]
        jobs: usize,
        #[arg(short, long, default_value = "batch_out")]
        out: PathBuf,
    },
    /// Print the score bundle of one morphology as JSON.
    Score {
        spec: PathBuf,
        #[arg(short, long)]
        config: Option<PathBuf>,
    },
    /// Configuration helpers.
    Config {
        #[command(subcommand)]
        action: ConfigAction,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        #[arg(short, long)]
        config: Option<PathBuf>,
    },
    /// Write a built-in fixture or a set of seeded procedural morphologies.
    Generate {
        #[arg(value_enum)]
        kind: GenerateKind,
        #[arg(short, long, default_value = ".")]
        out: PathBuf,
        /// Number of procedural designs.
        #[arg(long, default_value_t = 50)]
        count: u64,
        /// First seed of the procedural designs.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Grid size of the procedural designs.
        #[arg(long, default_value_t = 64)]
        dim: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum ConfigAction {
    /// Print the default configuration with every field spelled out.
    Init {
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenerateKind {
    Tripod,
    Quadruped,
    Ring,
    ThinLimb,
    BlockAndBar,
    Chain,
    SingleBlock,
    Procedural,
}

/// Failures mapped to process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad morphology, config or arguments (exit 3).
    InvalidInput(String),
    /// The design failed a pipeline stage (exit 2).
    StageFailure(String),
    /// Anything else, such as an unwritable output directory (exit 1).
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Other(_) => 1,
            CliError::StageFailure(_) => 2,
            CliError::InvalidInput(_) => 3,
        })
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::InvalidInput(m) | CliError::StageFailure(m) | CliError::Other(m) => m,
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Io { .. } => CliError::Other(e.to_string()),
            _ => CliError::InvalidInput(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::InvalidInput(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Other(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::Other(format!("cannot write {}: {e}", path.display())))
}

pub fn load_config(path: Option<&Path>) -> Result<PipelineConfig, CliError> {
    match path {
        None => Ok(PipelineConfig::default()),
        Some(p) => PipelineConfig::from_json(&read(p)?)
            .map_err(|e| CliError::InvalidInput(format!("{}: {e}", p.display()))),
    }
}

fn load_spec(path: &Path) -> Result<MorphologySpec, CliError> {
    let mut spec =
        parse_morphology(&read(path)?).map_err(|e| CliError::InvalidInput(format!("{}: {e}", path.display())))?;
    if !spec.meta.contains_key("name") {
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            spec = spec.with_meta("name", stem);
        }
    }
    Ok(spec)
}

fn stage_result(run: &PipelineRun) -> Result<(), CliError> {
    match run.failure() {
        None => Ok(()),
        Some((report, reason)) => Err(CliError::StageFailure(format!(
            "{}: failed at stage {} ({})",
            run.design,
            report.stage,
            reason.as_str()
        ))),
    }
}

fn run(spec: &Path, config: Option<&Path>, out: &Path) -> Result<(), CliError> {
    let config = load_config(config)?;
    let spec = load_spec(spec)?;
    let result = run_pipeline(&spec, &config)?;
    export_run(&result, &config, out)?;
    for (report, (_, elapsed)) in result.reports.iter().zip(&result.timings) {
        let status = if report.is_success() { "ok" } else { "FAILED" };
        println!("{:<12} {:<7} {:>9.1?}", report.stage.as_str(), status, elapsed);
    }
    println!("s_mfg = {:.4}; outputs in {}", result.scores.s_mfg, out.display());
    stage_result(&result)
}

fn batch(dir: &Path, config: Option<&Path>, jobs: usize, out: &Path) -> Result<(), CliError> {
    let config = load_config(config)?;
    let designs = load_design_dir(dir)?;
    let result = batch_run(&designs, &config, jobs)?;
    write_batch_outputs(&result, out)?;
    print!("{}", render_stage_table(&result.stats));
    println!("outputs in {}", out.display());
    Ok(())
}

fn score(spec: &Path, config: Option<&Path>) -> Result<(), CliError> {
    let config = load_config(config)?;
    let result = run_pipeline(&load_spec(spec)?, &config)?;
    println!("{}", serde_json::to_string_pretty(&result.scores).expect("scores serialize"));
    stage_result(&result)
}

fn generate(kind: GenerateKind, out: &Path, count: u64, seed: u64, dim: usize) -> Result<(), CliError> {
    let fixture = match kind {
        GenerateKind::Tripod => fixtures::tripod(),
        GenerateKind::Quadruped => fixtures::quadruped(),
        GenerateKind::Ring => fixtures::ring(),
        GenerateKind::ThinLimb => fixtures::thin_limb(),
        GenerateKind::BlockAndBar => fixtures::block_and_bar(),
        GenerateKind::Chain => fixtures::chain(),
        GenerateKind::SingleBlock => fixtures::single_block(),
        GenerateKind::Procedural => {
            if !(4..=256).contains(&dim) {
                return Err(CliError::InvalidInput("--dim must lie in [4, 256]".into()));
            }
            for s in seed..seed + count {
                write(&out.join(format!("gen_{s:05}.vmorph")), &serialize_morphology(&fixtures::generate(s, dim)))?;
            }
            println!("wrote {count} designs to {}", out.display());
            return Ok(());
        }
    };
    let path = if out.extension().is_some() {
        out.to_path_buf()
    } else {
        out.join(format!("{}.vmorph", fixture.meta["name"]))
    };
    write(&path, &serialize_morphology(&fixture))?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { spec, config, out } => run(&spec, config.as_deref(), &out),
        Command::Batch { dir, config, jobs, out } => batch(&dir, config.as_deref(), jobs, &out),
        Command::Score { spec, config } => score(&spec, config.as_deref()),
        Command::Config { action: ConfigAction::Init { out } } => {
            let text = PipelineConfig::default().to_json() + "\n";
            match out {
                Some(path) => write(&path, text.as_bytes()),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
        Command::Serve { bind, config } => {
            let config = load_config(config.as_deref())?;
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Other(e.to_string()))?;
            rt.block_on(server::serve(config, bind)).map_err(|e| CliError::Other(format!("serve on {bind}: {e}")))
        }
        Command::Generate { kind, out, count, seed, dim } => generate(kind, &out, count, seed, dim),
    }
}
