use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use consensus_complexity::report::{
    analyze_dataset, cross_table_duplicates, load_currency_dataset, render_simulation,
    render_table, table1, table2, CurrencyDataset, Format,
};
use consensus_complexity::scenario::ScenarioFile;
use consensus_complexity::sim::{
    simulate_coinage_kernel, simulate_nxt_forging, simulate_pow, SimulationReport,
};

const DEFAULT_SEED: u64 = 1;
const DEFAULT_DURATION: u64 = 86_400;

#[derive(Parser)]
#[command(name = "cmu", version, about = "Statistical complexity of consensus protocols")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Csv,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Text => Format::Text,
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute C_mu for every currency in a CSV dataset.
    Analyze {
        dataset: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
        /// Exit with status 1 when a printed value disagrees beyond three figures.
        #[arg(long)]
        golden: bool,
    },
    /// Reproduce the bundled PoW table.
    Table1 {
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
    },
    /// Reproduce the bundled PoS and hybrid table.
    Table2 {
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
    },
    /// Run a seeded block-production simulation.
    Simulate {
        #[arg(value_enum)]
        kind: SimKindArg,
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the scenario file.
        #[arg(long)]
        seed: Option<u64>,
        /// Simulated seconds; overrides the scenario file.
        #[arg(long)]
        duration: Option<u64>,
        /// Also write the full JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SimKindArg {
    Pow,
    Nxt,
    Coinage,
}

/// Input problems exit with 2, disagreements with 1.
enum Outcome {
    Ok,
    Mismatch,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Mismatch) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Analyze {
            dataset,
            format,
            golden,
        } => {
            let ds = load_currency_dataset(&dataset)?;
            Ok(print_table(&ds, format.into(), golden))
        }
        Command::Table1 { format } => {
            let outcome = print_table(&table1(), format.into(), true);
            duplicate_note();
            Ok(outcome)
        }
        Command::Table2 { format } => {
            let outcome = print_table(&table2(), format.into(), true);
            duplicate_note();
            Ok(outcome)
        }
        Command::Simulate {
            kind,
            config,
            seed,
            duration,
            report,
            format,
        } => {
            let file = ScenarioFile::load(&config)?;
            let seed = seed.or(file.seed).unwrap_or(DEFAULT_SEED);
            let duration = duration.or(file.duration).unwrap_or(DEFAULT_DURATION);
            let result = simulate(kind, &file, duration, seed)?;
            if let Some(path) = report {
                std::fs::write(&path, render_simulation(&result, Format::Json))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            print!("{}", render_simulation(&result, format.into()));
            Ok(Outcome::Ok)
        }
    }
}

fn simulate(
    kind: SimKindArg,
    file: &ScenarioFile,
    duration: u64,
    seed: u64,
) -> Result<SimulationReport> {
    Ok(match kind {
        SimKindArg::Pow => simulate_pow(&file.pow_scenario()?, duration, seed)?,
        SimKindArg::Nxt => simulate_nxt_forging(&file.nxt_scenario()?, duration, seed)?,
        SimKindArg::Coinage => simulate_coinage_kernel(&file.coinage_scenario()?, duration, seed)?,
    })
}

fn print_table(ds: &CurrencyDataset, format: Format, golden: bool) -> Outcome {
    let rows = analyze_dataset(ds);
    print!("{}", render_table(&rows, format));
    if format == Format::Text {
        if let Some(date) = &ds.source_date {
            println!("source date: {date}");
        }
    }
    let errors = rows.iter().any(|r| r.error.is_some());
    let mismatches = golden && rows.iter().any(|r| r.golden_pass == Some(false));
    if errors || mismatches {
        Outcome::Mismatch
    } else {
        Outcome::Ok
    }
}

fn duplicate_note() {
    for name in cross_table_duplicates(&table1(), &table2()) {
        eprintln!(
            "note: {name} appears in both bundled tables with different hashrates; each row is computed from its own table"
        );
    }
}
