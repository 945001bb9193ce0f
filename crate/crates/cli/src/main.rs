use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Parser, Subcommand};

use polydisc_cli::{list_checks, run_scenario, Report};

/// Seeded verification scenarios for doubly commuting contraction tuples.
///
/// The basis-size cap can be raised with POLYDISC_BASIS_CAP.
#[derive(Parser)]
#[command(name = "polydisc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Run {
        scenario: PathBuf,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Suppress the table on standard output.
        #[arg(long)]
        quiet: bool,
    },
    /// List registered checks.
    ListChecks,
    /// Run every *.json scenario in a directory, in name order.
    Suite {
        dir: PathBuf,
        /// Directory for per-scenario JSON reports.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
}

fn run_one(path: &Path, out: Option<&Path>, quiet: bool) -> anyhow::Result<u8> {
    let report: Report = match run_scenario(path) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            return Ok(2);
        }
    };
    if let Some(out) = out {
        std::fs::write(out, report.to_json())
            .with_context(|| format!("writing {}", out.display()))?;
    }
    if !quiet {
        print!("{}", report.table());
    }
    Ok(report.exit_code() as u8)
}

fn suite(dir: &Path, out_dir: Option<&Path>, quiet: bool) -> anyhow::Result<u8> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if let Some(o) = out_dir {
        std::fs::create_dir_all(o).with_context(|| format!("creating {}", o.display()))?;
    }
    let mut code = 0u8;
    for f in &files {
        let out = out_dir.map(|o| o.join(f.file_name().expect("file name")));
        let c = run_one(f, out.as_deref(), quiet)?;
        if !quiet {
            println!();
        }
        code = code.max(c);
    }
    println!("{} scenarios, exit code {code}", files.len());
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            scenario,
            out,
            quiet,
        } => run_one(&scenario, out.as_deref(), quiet),
        Command::ListChecks => {
            for line in list_checks() {
                println!("{line}");
            }
            Ok(0)
        }
        Command::Suite {
            dir,
            out_dir,
            quiet,
        } => suite(&dir, out_dir.as_deref(), quiet),
    };
    match result {
        Ok(c) => ExitCode::from(c),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
