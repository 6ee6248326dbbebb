use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use waynav::harness::{
    run_ablation, run_sequencer_study, trajectory_svg, write_file, ExperimentConfig,
    HarnessError, MetricsReport,
};
use waynav::simulator::{read_log, run_episode, write_log, SimError};
use waynav::world::{load_map, save_map, WorldMap};

#[derive(Parser)]
#[command(name = "waynav", version, about = "Multi-waypoint grid navigation benchmark")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Map seed for single-map commands, base decision seed for experiments.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for experiments (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random map and write it as JSON.
    GenMap,
    /// Run one closed-loop episode and write its log.
    RunEpisode {
        /// Map document; generated from --seed when absent.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Run the eight-combination feature ablation.
    Ablation,
    /// Run the sequencer accuracy study.
    SequencerStudy,
    /// Recompute metrics from a saved episode log.
    Metrics {
        #[arg(long)]
        log: PathBuf,
    },
    /// Draw an episode's trajectory over its map as SVG.
    Plot {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        map: PathBuf,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(_) => Failure::Config(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(_) => Failure::Config(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn load_config(global: &Global) -> Result<ExperimentConfig, Failure> {
    let mut config = match &global.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &global.out {
        config.output_directory = out.clone();
    }
    config.validate()?;
    Ok(config)
}

fn read_map(path: &Path) -> Result<WorldMap, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Runtime(format!("cannot read {}: {e}", path.display())))?;
    load_map(&text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut config = load_config(&cli.global)?;
    let out = config.output_directory.clone();
    let map_seed = cli.global.seed.unwrap_or(config.map_seeds[0]);
    match cli.command {
        Command::GenMap => {
            let map = config
                .scenario(config.waypoint_counts[0])
                .generate(map_seed)
                .map_err(|e| Failure::Runtime(e.to_string()))?;
            let path = out.join(format!("map_{map_seed}.json"));
            write_file(&path, &save_map(&map))?;
            println!("{}", path.display());
        }
        Command::RunEpisode { map } => {
            let map = match map {
                Some(path) => read_map(&path)?,
                None => config
                    .scenario(config.waypoint_counts[0])
                    .generate(map_seed)
                    .map_err(|e| Failure::Runtime(e.to_string()))?,
            };
            let log = run_episode(&map, &config.episode, config.seed)?;
            let path = out.join(format!("episode_{}.csv", map.seed));
            std::fs::create_dir_all(&out)
                .map_err(|e| Failure::Runtime(format!("{}: {e}", out.display())))?;
            write_log(&log, &path)?;
            write_file(&out.join(format!("map_{}.json", map.seed)), &save_map(&map))?;
            print!("{}", MetricsReport::from_log(&log)?.to_text());
            println!("log: {}", path.display());
        }
        Command::Ablation => {
            if let Some(seed) = cli.global.seed {
                config.seed = seed;
            }
            let report = run_ablation(&config, cli.global.jobs)?;
            report.write(&out)?;
            print!("{}", report.to_text());
        }
        Command::SequencerStudy => {
            if let Some(seed) = cli.global.seed {
                config.seed = seed;
            }
            let study = run_sequencer_study(&config)?;
            study.write(&out)?;
            print!("{}", study.to_text());
        }
        Command::Metrics { log } => {
            let log = read_log(&log).map_err(|e| Failure::Runtime(e.to_string()))?;
            print!("{}", MetricsReport::from_log(&log)?.to_text());
        }
        Command::Plot { log, map } => {
            let name = log
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "episode".into());
            let log = read_log(&log).map_err(|e| Failure::Runtime(e.to_string()))?;
            let map = read_map(&map)?;
            let path = out.join(format!("{name}.svg"));
            write_file(&path, &trajectory_svg(&map, &log))?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
