//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::bench::bench;
use crate::error::{HarnessError, Result};
use crate::report::{csv_path, write_file};
use crate::run::{run, VerifyMode};
use crate::structure::{StructureKind, StructureParams};
use crate::workload::{generate, parse_workload, to_jsonl, GenParams, ObjectKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "cfcolor", version, about = "Dynamic conflict-free coloring workloads and verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a JSONL workload.
    Gen {
        #[arg(long)]
        kind: ObjectKind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        delete_ratio: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Side-length bound for bounded_rect.
        #[arg(long)]
        c: Option<f64>,
        /// Universe size for universe_rect.
        #[arg(long)]
        universe: Option<u64>,
        /// Coordinate range.
        #[arg(long)]
        extent: Option<f64>,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a workload and write a JSON report plus a CSV step table.
    Run {
        #[arg(long)]
        structure: StructureKind,
        #[arg(long)]
        workload: PathBuf,
        #[arg(long, default_value = "oracle-sampled")]
        verify: VerifyMode,
        #[arg(long)]
        report: PathBuf,
        /// Defaults to the longest side in the workload.
        #[arg(long)]
        c: Option<f64>,
        /// Defaults to one past the largest coordinate in the workload.
        #[arg(long)]
        universe: Option<u64>,
    },
    /// Unverified trials over sizes and seeds.
    Bench {
        #[arg(long)]
        structure: StructureKind,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        seeds: Vec<u64>,
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value_t = 0.3)]
        delete_ratio: f64,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        universe: Option<u64>,
    },
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Gen {
            kind,
            n,
            delete_ratio,
            seed,
            c,
            universe,
            extent,
            out,
        } => {
            let params = GenParams {
                c,
                universe,
                extent,
                ..GenParams::new(kind, n, delete_ratio, seed)
            };
            let text = to_jsonl(&generate(&params)?);
            match out {
                Some(path) => write_file(&path, &text)?,
                None => std::io::stdout()
                    .write_all(text.as_bytes())
                    .map_err(|e| HarnessError::io("stdout", e))?,
            }
            Ok(EXIT_OK)
        }
        Command::Run {
            structure,
            workload,
            verify,
            report,
            c,
            universe,
        } => {
            let label = workload.display().to_string();
            let text = std::fs::read_to_string(&workload).map_err(|e| HarnessError::io(&label, e))?;
            let events = parse_workload(&text)?;
            let r = run(structure, &events, verify, StructureParams { c, universe }, &label)?;
            write_file(&report, &r.to_json()?)?;
            write_file(&csv_path(&report), &r.to_csv()?)?;
            for v in &r.summary.violations {
                eprintln!("violation at step {} ({}): {}", v.step, v.check, v.message);
            }
            Ok(r.exit_code())
        }
        Command::Bench {
            structure,
            sizes,
            seeds,
            report,
            delete_ratio,
            c,
            universe,
        } => {
            let b = bench(structure, &sizes, &seeds, delete_ratio, StructureParams { c, universe })?;
            write_file(&report, &b.to_json()?)?;
            write_file(&csv_path(&report), &b.to_csv()?)?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}
