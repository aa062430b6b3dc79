use std::path::PathBuf;
use std::process::ExitCode;

use aqrm_cli::config::{self, ExperimentConfig};
use aqrm_cli::presets::{self, PRESETS};
use aqrm_cli::{run_experiment, Origin, RunRequest, EXIT_INVALID, EXIT_NUMERIC};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "aqrm", version, about = "Criticality and dynamics experiments for the anisotropic quantum Rabi model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Config file (TOML).
    #[arg(required_unless_present = "preset", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Use a bundled preset instead of a file.
    #[arg(long)]
    preset: Option<String>,
    /// Override a config value, e.g. `--set scaling.etas=[32,64]`. Repeatable;
    /// wins over the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its artifacts.
    Run {
        #[command(flatten)]
        source: ConfigArgs,
        /// Output directory (default: the config's `output`, else `aqrm-out/<kind>`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads.
        #[arg(long, env = "AQRM_JOBS")]
        jobs: Option<usize>,
    },
    /// Check a config without running it.
    Validate {
        #[command(flatten)]
        source: ConfigArgs,
    },
    /// List bundled presets, or show one in full.
    ListPresets { name: Option<String> },
}

fn load(src: &ConfigArgs) -> Result<(ExperimentConfig, Origin), String> {
    let (name, text, origin) = match (&src.config, &src.preset) {
        (_, Some(p)) => {
            let preset = presets::find(p).ok_or_else(|| {
                let names: Vec<_> = PRESETS.iter().map(|p| p.name).collect();
                format!("error: unknown preset `{p}` (available: {})", names.join(", "))
            })?;
            (format!("preset:{}", preset.name), preset.toml.to_string(), Origin::Preset(preset.name))
        }
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("error: cannot read {}: {e}", path.display()))?;
            (path.display().to_string(), text, Origin::File(path.clone()))
        }
        (None, None) => unreachable!("clap requires a source"),
    };
    config::load(&name, &text, &src.overrides).map(|c| (c, origin)).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::ListPresets { name: None } => {
            for p in PRESETS {
                print!("{}", p.describe(false));
            }
            ExitCode::SUCCESS
        }
        Command::ListPresets { name: Some(n) } => match presets::find(&n) {
            Some(p) => {
                print!("{}", p.describe(true));
                ExitCode::SUCCESS
            }
            None => {
                eprintln!("error: unknown preset `{n}`");
                ExitCode::from(EXIT_INVALID as u8)
            }
        },
        Command::Validate { source } => match load(&source) {
            Ok((cfg, _)) => {
                println!("ok: {} experiment", cfg.kind);
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(EXIT_INVALID as u8)
            }
        },
        Command::Run { source, out, jobs } => {
            let (cfg, origin) = match load(&source) {
                Ok(v) => v,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(EXIT_INVALID as u8);
                }
            };
            let jobs = jobs.or(cfg.jobs).unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
                log::warn!("thread pool: {e}");
            }
            let out_dir = out
                .or_else(|| cfg.output.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("aqrm-out").join(cfg.kind.to_string()));
            let req = RunRequest { config: &cfg, origin, overrides: &source.overrides, out_dir: &out_dir, jobs };
            match run_experiment(&req) {
                Ok(o) => {
                    if let Some(e) = &o.error {
                        eprintln!("error: {e}");
                        eprintln!("partial artifacts in {} (flagged incomplete in report.json)", out_dir.display());
                    } else {
                        println!("wrote {} files to {}", o.files.len(), out_dir.display());
                    }
                    ExitCode::from(o.exit_code as u8)
                }
                Err(e) => {
                    eprintln!("error: cannot write artifacts to {}: {e}", out_dir.display());
                    ExitCode::from(EXIT_NUMERIC as u8)
                }
            }
        }
    }
}
