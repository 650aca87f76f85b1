use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pinn_bench::checkpoint::Checkpoint;
use pinn_bench::run::{run_config, RunOptions};
use pinn_bench::{heatmap, presets, report, verify, BenchError, ExperimentConfig, Result};

/// Train and compare PINN predictors on the benchmark problems.
///
/// Outputs go under $PINN_OUTPUT_ROOT (default ./runs).
#[derive(Parser)]
#[command(name = "pinn-bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset by name, or a TOML config file.
    Run {
        target: String,
        /// Exit with code 3 if any repeat diverged.
        #[arg(long)]
        strict: bool,
        /// Repeats trained concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        repeats: Option<usize>,
    },
    /// List built-in presets.
    ListPresets {
        /// Write every preset as `<dir>/<name>.toml`.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Summarise `<dir>/results.csv` into report.md and report.csv.
    Report { dir: PathBuf },
    /// Write predicted, exact and error grids for a checkpoint.
    ExportHeatmap {
        checkpoint: PathBuf,
        /// Grid points per plane axis, e.g. `--res 320,200`.
        #[arg(long, value_delimiter = ',', default_value = "101")]
        res: Vec<usize>,
        /// Time slices for problems with two or more spatial axes.
        #[arg(long, value_delimiter = ',')]
        times: Vec<f64>,
        #[arg(long, default_value = "heatmaps")]
        out: PathBuf,
        #[arg(long)]
        svg: bool,
    },
    /// Run the invariant suites.
    Verify,
}

fn load_target(target: &str) -> Result<ExperimentConfig> {
    let path = PathBuf::from(target);
    if path.extension().is_some_and(|e| e == "toml") || path.exists() {
        ExperimentConfig::load(&path)
    } else {
        presets::find(target)
    }
}

fn main_inner(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            target,
            strict,
            jobs,
            epochs,
            repeats,
        } => {
            let mut cfg = load_target(&target)?;
            if let Some(e) = epochs {
                cfg.train.epochs = e;
            }
            if let Some(r) = repeats {
                cfg.train.repeats = r;
            }
            let opts = RunOptions {
                strict,
                jobs,
                ..RunOptions::default()
            };
            for row in run_config(&cfg, &opts)? {
                println!(
                    "{} repeat {}: final risk {} min fractional error {}{}",
                    row.preset,
                    row.repeat,
                    row.final_risk,
                    row.min_fractional_error,
                    if row.diverged { " (diverged)" } else { "" }
                );
            }
        }
        Command::ListPresets { export } => {
            for cfg in presets::all() {
                let name = cfg.name();
                if let Some(dir) = &export {
                    std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
                    let path = dir.join(format!("{name}.toml"));
                    std::fs::write(&path, cfg.to_toml()?).map_err(|e| BenchError::io(&path, e))?;
                }
                println!("{name}");
            }
        }
        Command::Report { dir } => {
            let rows = report::write_report(&dir)?;
            print!("{}", report::to_markdown(&rows));
        }
        Command::ExportHeatmap {
            checkpoint,
            res,
            times,
            out,
            svg,
        } => {
            let ckpt = Checkpoint::load(&checkpoint)?;
            for p in heatmap::export(&ckpt, &res, &times, &out, svg)? {
                println!("{}", p.display());
            }
        }
        Command::Verify => {
            let mut failed = 0;
            for o in verify::quick_suite()? {
                println!("{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
                failed += usize::from(!o.passed);
            }
            if failed > 0 {
                return Err(BenchError::Verify(failed));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
