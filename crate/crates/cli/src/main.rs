use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use movplane_cli::config::{ExperimentConfig, EXPERIMENT_PRESETS};
use movplane_cli::pipeline::run_experiment;

#[derive(Parser)]
#[command(
    name = "movplane",
    about = "Numerical laboratory for fractional reaction-diffusion dynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment preset and write its report and artifacts.
    Run {
        /// Preset name (see `list-presets`); ignored when --config is given.
        #[arg(long, conflicts_with = "config")]
        preset: Option<String>,
        /// RON config file; overrides the preset defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Base RNG seed (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; falls back to MPL_THREADS, then all cores.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List the built-in experiment presets with their default configs.
    ListPresets,
    /// Validate a config file and report every problem found.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load_config(
    preset: Option<String>,
    config: Option<PathBuf>,
) -> Result<ExperimentConfig, String> {
    match (preset, config) {
        (_, Some(path)) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            ExperimentConfig::from_ron(&text).map_err(|e| format!("config parse error: {e}"))
        }
        (Some(name), None) => ExperimentConfig::preset_default(&name)
            .ok_or_else(|| format!("unknown preset '{name}'")),
        (None, None) => Err("pass --preset <name> or --config <path>".into()),
    }
}

fn init_threads(cli_threads: Option<usize>) {
    let n = cli_threads.or_else(|| {
        std::env::var("MPL_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = n {
        // ignore the error if a global pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            preset,
            config,
            out,
            seed,
            threads,
        } => {
            init_threads(threads);
            let mut cfg = match load_config(preset, config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            if let Some(out) = out {
                cfg.out = out.display().to_string();
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let errs = cfg.validate();
            if !errs.is_empty() {
                for e in &errs {
                    eprintln!("config error: {e}");
                }
                return ExitCode::from(2);
            }
            match run_experiment(&cfg) {
                Ok(report) => {
                    for c in &report.checks {
                        println!("{}: {} (stat {:.3e})", c.id, c.status, c.stat);
                    }
                    println!("report: {}/report.ron", cfg.out);
                    ExitCode::from(report.exit_code() as u8)
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(1)
                }
            }
        }
        Command::ListPresets => {
            for name in EXPERIMENT_PRESETS {
                let cfg = ExperimentConfig::preset_default(name).unwrap();
                println!("{name}:");
                for line in cfg.to_ron().lines() {
                    println!("    {line}");
                }
            }
            ExitCode::SUCCESS
        }
        Command::ValidateConfig { config } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("cannot read {}: {e}", config.display());
                    return ExitCode::from(2);
                }
            };
            let cfg = match ExperimentConfig::from_ron(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("parse error: {e}");
                    return ExitCode::from(2);
                }
            };
            let errs = cfg.validate();
            if errs.is_empty() {
                println!("config ok");
                ExitCode::SUCCESS
            } else {
                for e in &errs {
                    eprintln!("config error: {e}");
                }
                ExitCode::from(2)
            }
        }
    }
}
