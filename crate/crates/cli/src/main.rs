//! `lps`: verification reports for LPS rotations, tree spectra and torus
//! automorphism actions.

mod commands;
mod envelope;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use lps_core::spectral::Shape;
use lps_core::torus::{DEFAULT_SEED, DEFAULT_TOL};
use lps_core::words::DEFAULT_WORD_BUDGET;

use commands::{CliError, TorusArgs};
use envelope::{Envelope, Format};
use report::ReportConfig;

#[derive(Parser, Debug)]
#[command(name = "lps", version, about = "Exact and numerical checks of spherical and toral discrepancy bounds")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Write output to this file (a directory for `report`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Record wall-clock time in `elapsed_ms` (otherwise 0, keeping output byte-stable).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the p+1 generating rotations for a prime p ≡ 1 mod 4.
    Generators {
        #[arg(long)]
        prime: u64,
    },
    /// Tabulate closed-form norms of sphere and ball averages on the (q+1)-regular tree.
    Norms {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 10)]
        n_max: u32,
        #[arg(long)]
        shape: Option<Shape>,
    },
    /// Run a verification and exit 1 if any check fails.
    #[command(subcommand)]
    Verify(Verify),
    /// Finite-degree estimate of the discrepancy of the LPS sphere or ball average.
    SphereDiscrepancy {
        #[arg(long)]
        prime: u64,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long, default_value = "sphere")]
        shape: Shape,
        #[arg(long, default_value_t = 24)]
        l_max: u32,
    },
    /// Run every acceptance criterion and emit one envelope per criterion.
    Report(ReportArgs),
}

#[derive(Subcommand, Debug)]
enum Verify {
    /// Spectra of the Koopman blocks lie in [−2√p, 2√p].
    Ramanujan {
        #[arg(long)]
        prime: u64,
        #[arg(long, default_value_t = 24)]
        l_max: u32,
    },
    /// Exhaustive ball enumeration certifying freeness to a radius.
    Freeness {
        #[arg(long, conflicts_with = "generators")]
        prime: Option<u64>,
        /// Torus preset (`sanov`, `rank1`) or a JSON file of 2×2 integer matrices.
        #[arg(long)]
        generators: Option<String>,
        #[arg(long, default_value_t = 5)]
        radius: u32,
        #[arg(long, default_value_t = DEFAULT_WORD_BUDGET)]
        budget: u64,
    },
    /// Closed forms of the tree formulas against independent evaluations.
    Identities {
        #[arg(long, value_delimiter = ',', default_values_t = [2u64, 3, 5, 9, 13])]
        q: Vec<u64>,
        #[arg(long, default_value_t = 12)]
        n_max: u32,
    },
    /// Windowed norm estimates of the torus average against the free-group value.
    Torus {
        #[arg(long, default_value = "sanov")]
        generators: String,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long, default_value = "sphere")]
        shape: Shape,
        #[arg(long, value_delimiter = ',', default_values_t = [64u32, 128, 256])]
        windows: Vec<u32>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_WORD_BUDGET)]
        budget: u64,
    },
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[arg(long, default_value_t = 24)]
    l_max: u32,
    #[arg(long, value_delimiter = ',', default_values_t = report::default_windows())]
    windows: Vec<u32>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_WORD_BUDGET)]
    budget: u64,
}

fn run_single(command: Command) -> Result<Envelope, CliError> {
    match command {
        Command::Generators { prime } => commands::generators(prime),
        Command::Norms { q, n_max, shape } => commands::norms(q, n_max, shape),
        Command::SphereDiscrepancy { prime, n, shape, l_max } => commands::sphere_discrepancy(prime, n, shape, l_max),
        Command::Verify(Verify::Ramanujan { prime, l_max }) => commands::verify_ramanujan(prime, l_max),
        Command::Verify(Verify::Freeness { prime, generators, radius, budget }) => {
            commands::verify_freeness(prime, generators.as_deref(), radius, budget)
        }
        Command::Verify(Verify::Identities { q, n_max }) => commands::verify_identities(&q, n_max),
        Command::Verify(Verify::Torus { generators, n, shape, windows, seed, tol, budget }) => {
            commands::verify_torus(&TorusArgs { generators: &generators, n, shape, windows: &windows, seed, tol, budget })
        }
        Command::Report(_) => unreachable!("handled by run_report"),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn emit_report(envelopes: &[Envelope], format: Format, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
            let ext = match format {
                Format::Json => "json",
                Format::Csv => "csv",
            };
            for (i, e) in envelopes.iter().enumerate() {
                write_file(&dir.join(format!("criterion-{}.{ext}", i + 1)), &e.render(format))?;
                println!("criterion {}: {}", i + 1, if e.passed() { "PASS" } else { "FAIL" });
            }
        }
        None => match format {
            Format::Json => {
                let values: Vec<_> = envelopes.iter().map(Envelope::to_value).collect();
                println!("{}", serde_json::to_string_pretty(&values).expect("serializable"));
            }
            Format::Csv => {
                let blocks: Vec<String> = envelopes.iter().map(|e| format!("# {}\n{}", e.command, e.render(format))).collect();
                print!("{}", blocks.join("\n"));
            }
        },
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let start = Instant::now();
    let elapsed = |timing: bool| if timing { start.elapsed().as_millis() as u64 } else { 0 };
    match cli.command {
        Command::Report(args) => {
            let cfg = ReportConfig { l_max: args.l_max, windows: args.windows, seed: args.seed, tol: args.tol, budget: args.budget };
            let mut envelopes = report::run(&cfg)?;
            let ms = elapsed(cli.timing);
            for e in &mut envelopes {
                e.elapsed_ms = ms;
            }
            emit_report(&envelopes, cli.format, cli.out.as_deref())?;
            Ok(envelopes.iter().all(Envelope::passed))
        }
        command => {
            let mut e = run_single(command)?;
            e.elapsed_ms = elapsed(cli.timing);
            let text = e.render(cli.format);
            match &cli.out {
                Some(path) => write_file(path, &text)?,
                None => print!("{text}"),
            }
            Ok(e.passed())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
