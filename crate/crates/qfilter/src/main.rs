use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use qfilter::config::{Overrides, Scenario};
use qfilter::error::{CliError, CliResult};
use qfilter::output::write_outcome;
use qfilter::scenarios::execute;
use qfilter_core::ito::Basis;

/// Quantum stochastic simulation and filtering scenarios.
///
/// Exit codes: 0 pass, 1 invariant failure, 2 validation, 3 I/O.
#[derive(Debug, Parser)]
#[command(name = "qfilter", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and write its data files with manifests.
    #[command(allow_negative_numbers = true)]
    Run {
        #[arg(id = "scenario_name", value_name = "SCENARIO", value_enum)]
        scenario: Option<Scenario>,
        #[command(flatten)]
        flags: Overrides,
    },
    /// Run a scenario's invariant suite and report each check.
    #[command(allow_negative_numbers = true)]
    Verify {
        #[arg(id = "scenario_name", value_name = "SCENARIO", value_enum)]
        scenario: Option<Scenario>,
        #[command(flatten)]
        flags: Overrides,
    },
    /// Multiply basis differentials left to right and print the expansion,
    /// e.g. `qfilter ito dw dm`.
    Ito {
        /// Names among dt, dw, dm, e_minus, e_plus, e.
        #[arg(required = true)]
        factors: Vec<String>,
        /// Print the adjoint of the product instead.
        #[arg(long)]
        star: bool,
    },
}

fn run(scenario: Option<Scenario>, flags: &Overrides) -> CliResult<()> {
    let cfg = flags.resolve(scenario)?;
    let start = Instant::now();
    let outcome = execute(&cfg)?;
    let wall = start.elapsed().as_secs_f64();
    let command: Vec<String> = std::env::args().collect();
    let files = write_outcome(&outcome, &cfg, &command, wall)?;
    for line in &outcome.summary {
        println!("{line}");
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn verify(scenario: Option<Scenario>, flags: &Overrides) -> CliResult<()> {
    let cfg = flags.resolve(scenario)?;
    let outcome = execute(&cfg)?;
    for c in &outcome.checks {
        println!("{c}");
    }
    let failed = outcome.checks.iter().filter(|c| !c.pass).count();
    if failed > 0 {
        return Err(CliError::Invariant(format!("{failed} of {} checks failed", outcome.checks.len())));
    }
    println!("all {} checks passed", outcome.checks.len());
    Ok(())
}

fn ito(factors: &[String], star: bool) -> CliResult<()> {
    let mut product = None;
    for name in factors {
        let b: Basis = name.parse().map_err(|e: qfilter_core::Error| CliError::Validation(e.to_string()))?;
        product = Some(match product {
            None => b.element(),
            Some(p) => qfilter_core::ito::ItoElement::multiply(&p, &b.element())?,
        });
    }
    let p = product.expect("clap requires one factor");
    let p = if star { p.star() } else { p };
    println!("{}", p.expansion());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { scenario, flags } => run(*scenario, flags),
        Command::Verify { scenario, flags } => verify(*scenario, flags),
        Command::Ito { factors, star } => ito(factors, *star),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qfilter: {e}");
            e.to_exit()
        }
    }
}
