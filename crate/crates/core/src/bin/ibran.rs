use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use ibran::config::{load_config, parse_override, ScenarioConfig, Strategy};
use ibran::engine::{run_sweep, ProviderSpec};
use ibran::media::dataset::{generate_synthetic, LabelLayout, SynthSpec};

#[derive(Parser)]
#[command(name = "ibran", version, about = "Intent-based RRM simulator for a single Open RAN cell")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a batch of episodes and write episodes.csv, summary.json and messages.csv.
    Run(RunArgs),
    /// Write a synthetic labelled PNG dataset.
    GenDataset(GenArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML scenario file; absent keys take reference defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// First seed; `--episodes K` runs seeds seed..seed+K.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    strategy: Option<Strategy>,
    #[arg(long)]
    intent_based: bool,
    /// One or more dApp periods, comma separated.
    #[arg(long, value_delimiter = ',')]
    delta_dapp: Vec<u32>,
    #[arg(long, default_value_t = 1)]
    episodes: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Shell command of an external embedding provider.
    #[arg(long)]
    embedding_cmd: Option<String>,
    /// Override a config key, e.g. `--set episode_s=1`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Run every strategy, with and without intent awareness.
    #[arg(long)]
    sweep: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Layout {
    Random,
    Alternating,
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Object IDs are drawn from 1..=vocab.
    #[arg(long, default_value_t = 4)]
    vocab: u32,
    #[arg(long, value_enum, default_value_t = Layout::Random)]
    layout: Layout,
    #[arg(long, default_value_t = 160)]
    min_side: u32,
    #[arg(long, default_value_t = 256)]
    max_side: u32,
    /// Per-pixel noise amplitude; larger values give larger files.
    #[arg(long, default_value_t = 10)]
    noise: u8,
    #[arg(long, default_value_t = 8192)]
    idat_chunk_bytes: usize,
}

fn run(args: RunArgs) -> ibran::Result<()> {
    let overrides = args.overrides.iter().map(|s| parse_override(s)).collect::<ibran::Result<Vec<_>>>()?;
    let mut cfg = match &args.config {
        Some(p) => load_config(p, &overrides)?,
        None => ScenarioConfig::from_toml_str("", &overrides)?,
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(s) = args.strategy {
        cfg.strategy = s;
    }
    if args.intent_based {
        cfg.intent_based = true;
    }
    let deltas = if args.delta_dapp.is_empty() { vec![cfg.delta_dapp] } else { args.delta_dapp.clone() };
    cfg.delta_dapp = deltas[0];
    cfg.validate()?;

    let seeds: Vec<u64> = (0..args.episodes).map(|k| cfg.seed.wrapping_add(k)).collect();
    let (strategies, modes) = if args.sweep {
        (Strategy::ALL.to_vec(), vec![false, true])
    } else {
        (vec![cfg.strategy], vec![cfg.intent_based])
    };
    let provider = match args.embedding_cmd {
        Some(cmd) => ProviderSpec::Command(cmd),
        None => ProviderSpec::Surrogate,
    };
    info!(
        "running {} seeds x {} periods x {} strategies x {} modes",
        seeds.len(),
        deltas.len(),
        strategies.len(),
        modes.len()
    );
    let batch = run_sweep(&cfg, &seeds, &deltas, &strategies, &modes, &provider)?;
    batch.write_reports(&args.out)?;
    info!("wrote {} episodes to {}", batch.episodes.len(), args.out.display());
    Ok(())
}

fn gen(args: GenArgs) -> ibran::Result<()> {
    let spec = SynthSpec {
        count: args.count,
        seed: args.seed,
        vocab: args.vocab,
        min_side: args.min_side,
        max_side: args.max_side,
        noise: args.noise,
        idat_chunk_bytes: args.idat_chunk_bytes,
        layout: match args.layout {
            Layout::Random => LabelLayout::Random,
            Layout::Alternating => LabelLayout::Alternating,
        },
    };
    generate_synthetic(&args.out, &spec)?;
    info!("wrote {} images to {}", args.count, args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::GenDataset(a) => gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
