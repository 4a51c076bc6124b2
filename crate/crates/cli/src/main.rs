use std::fs;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use citefid_core::corpus::{write_corpus, SchemaMode};
use citefid_core::pipeline::{
    run_stage, ConfigBuilder, PipelineConfig, PipelineError, ScorerKind, Stage, StageOutcome,
};
use citefid_core::synth::generate_corpus;
use clap::{Args, Parser, Subcommand};
use tracing::Level;

#[derive(Parser)]
#[command(name = "citefid", version, about = "Measure citation fidelity over a scholarly corpus")]
struct Cli {
    /// Log verbosity (error, warn, info, debug, trace).
    #[arg(long, global = true, default_value = "info")]
    log_level: Level,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find single-source reporting citations.
    Extract(RunArgs),
    /// Select claim sentences (results and conclusions).
    Claims(RunArgs),
    /// Score each citation against its best-matching claim.
    Pairs(RunArgs),
    /// Regress fidelity on paper, team and proximity factors.
    Regress(RunArgs),
    /// Intermediary-citation comparison with matched controls.
    Telephone(RunArgs),
    /// Fidelity histogram plus copies of the coefficient and effect tables.
    Report(RunArgs),
    /// Run every stage in order.
    Run(RunArgs),
    /// Write a seeded synthetic corpus to the corpus path.
    GenSynthetic(GenArgs),
}

#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// key = value configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Line-delimited corpus file.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// baseline or remote.
    #[arg(long)]
    scorer: Option<ScorerKind>,
    /// Base URL of the model service (with --scorer remote).
    #[arg(long)]
    remote_url: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    /// Items per model-service request, 1 to 256.
    #[arg(long)]
    batch_size: Option<usize>,
    /// sentences or raw_text.
    #[arg(long)]
    schema_mode: Option<SchemaMode>,
    /// Regression specification file (defaults to the main model).
    #[arg(long)]
    regression_spec: Option<PathBuf>,
    /// Re-run even when inputs are unchanged.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, default_value_t = 200)]
    papers: usize,
}

fn builder(common: &CommonArgs) -> Result<ConfigBuilder, PipelineError> {
    let file = match &common.config {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| PipelineError::Config(format!("cannot read config {}: {e}", p.display())))?;
            ConfigBuilder::from_config_text(&text)?
        }
        None => ConfigBuilder::default(),
    };
    Ok(file.overlay(ConfigBuilder { corpus_path: common.corpus.clone(), seed: common.seed, ..Default::default() }))
}

fn config(args: &RunArgs) -> Result<PipelineConfig, PipelineError> {
    let flags = ConfigBuilder {
        output_dir: args.out.clone(),
        scorer: args.scorer,
        remote_url: args.remote_url.clone(),
        workers: args.workers,
        batch_size: args.batch_size,
        schema_mode: args.schema_mode,
        regression_spec_path: args.regression_spec.clone(),
        force: args.force,
        ..Default::default()
    };
    builder(&args.common)?.overlay(flags).build()
}

fn print_outcome(o: &StageOutcome) {
    let counts: Vec<String> = o.manifest.record_counts.iter().map(|(k, v)| format!("{k}={v}")).collect();
    let status = if o.reused { "up to date" } else { "done" };
    println!("{}: {status} ({})", o.manifest.stage, counts.join(", "));
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let stages = |c: &Command| -> Vec<Stage> {
        match c {
            Command::Extract(_) => vec![Stage::Extract],
            Command::Claims(_) => vec![Stage::Claims],
            Command::Pairs(_) => vec![Stage::Pairs],
            Command::Regress(_) => vec![Stage::Regress],
            Command::Telephone(_) => vec![Stage::Telephone],
            Command::Report(_) => vec![Stage::Report],
            Command::Run(_) | Command::GenSynthetic(_) => Stage::ALL.to_vec(),
        }
    };
    match &cli.command {
        Command::GenSynthetic(g) => {
            let b = builder(&g.common)?;
            let path = b
                .corpus_path
                .ok_or_else(|| PipelineError::Config("gen-synthetic needs --corpus (the file to write)".into()))?;
            let papers = generate_corpus(g.papers, b.seed.unwrap_or(0));
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            let f = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            write_corpus(BufWriter::new(f), &papers).with_context(|| format!("writing {}", path.display()))?;
            println!("wrote {} papers to {}", papers.len(), path.display());
        }
        Command::Extract(a)
        | Command::Claims(a)
        | Command::Pairs(a)
        | Command::Regress(a)
        | Command::Telephone(a)
        | Command::Report(a)
        | Command::Run(a) => {
            let cfg = config(a)?;
            for stage in stages(&cli.command) {
                print_outcome(&run_stage(stage, &cfg)?);
            }
        }
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<PipelineError>() {
        Some(PipelineError::Config(_)) => 2,
        Some(PipelineError::Dependency { .. }) => 3,
        Some(PipelineError::Transport(_)) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt().with_max_level(cli.log_level).with_writer(std::io::stderr).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
