//! Command-line interface: `explore`, `oracle`, `replay`, `heatmap`.
//!
//! Exit codes: 0 on success, 2 on configuration errors (unknown names,
//! off-lattice values, malformed files), 3 on a surrogate fit failure.

use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::Result;
use crate::explore::{
    explore, export_heatmap, grid_oracle, parse_config, replay, ORACLE_RECORDS_FILE, RECORDS_FILE,
    REPORT_FILE,
};

#[derive(Parser)]
#[command(
    name = "scenario-explorer",
    version,
    about = "Search urban intersection scenarios for critical parameter sets"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a surrogate-driven exploration described by a run configuration
    Explore {
        /// Run configuration (TOML)
        config: PathBuf,
    },
    /// Exhaustively simulate a strided sub-lattice of the search grid
    Oracle {
        /// Run configuration (TOML)
        config: PathBuf,
        /// Per-dimension index strides, comma-separated, in grid order
        #[arg(long, value_delimiter = ',', required = true)]
        stride: Vec<usize>,
    },
    /// Simulate one parameter set; dump its trace CSV and metric breakdown
    Replay {
        /// Run configuration (TOML)
        config: PathBuf,
        /// One value per free dimension, comma-separated, in grid order
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 0..)]
        at: Vec<f64>,
    },
    /// Pivot a records file into a 2-D CSV matrix (min over other dims)
    Heatmap {
        /// records.jsonl produced by explore or oracle
        records: PathBuf,
        /// Dimension on the columns
        #[arg(long)]
        x: String,
        /// Dimension on the rows
        #[arg(long)]
        y: String,
        /// Write the CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Explore { config } => {
            let cfg = parse_config(&config)?;
            let report = explore(&cfg)?;
            println!(
                "explored {} of {} cells (scenario {}, metric {})",
                report.totals.evaluations,
                cfg.search_grid().map_or(0, |g| g.cardinality()),
                report.config.scenario,
                report.config.metric,
            );
            println!(
                "incumbent: value {:.6}{} at {:?} (iteration {})",
                report.incumbent.value,
                if report.incumbent.capped {
                    " (capped)"
                } else {
                    ""
                },
                report.incumbent.values,
                report.incumbent.iteration,
            );
            println!(
                "wrote {} and {}",
                cfg.output_dir.join(REPORT_FILE).display(),
                cfg.output_dir.join(RECORDS_FILE).display()
            );
        }
        Command::Oracle { config, stride } => {
            let cfg = parse_config(&config)?;
            let records = grid_oracle(&cfg, &stride)?;
            let best = records
                .iter()
                .min_by(|a, b| a.value.total_cmp(&b.value))
                .expect("at least one cell");
            println!("simulated {} cells", records.len());
            println!("minimum: value {:.6} at {:?}", best.value, best.values);
            println!(
                "wrote {}",
                cfg.output_dir.join(ORACLE_RECORDS_FILE).display()
            );
        }
        Command::Replay { config, at } => {
            let cfg = parse_config(&config)?;
            let summary = replay(&cfg, &at)?;
            println!(
                "scenario {} at {:?} -> {}",
                summary.scenario, summary.values, summary.termination
            );
            for (kind, r) in &summary.metrics {
                println!(
                    "  {kind:<11} {:>10.4}{}",
                    r.value,
                    if r.capped { "  (capped)" } else { "" }
                );
            }
            println!(
                "wrote {} and {}",
                cfg.output_dir.join(crate::explore::TRACE_FILE).display(),
                cfg.output_dir.join(crate::explore::METRICS_FILE).display()
            );
        }
        Command::Heatmap { records, x, y, out } => {
            let csv = export_heatmap(&records, &x, &y)?;
            match out {
                Some(path) => {
                    fs::write(&path, csv)?;
                    println!("wrote {}", path.display());
                }
                None => print!("{csv}"),
            }
        }
    }
    Ok(())
}

/// Parse arguments, run, and map errors onto the documented exit codes.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
