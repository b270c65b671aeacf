use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use transmon_lindblad::runner::{self, OutputFormat, Overrides, RunOptions};
use transmon_lindblad::Error;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

/// Simulate a catalog scenario or a JSON-configured experiment.
#[derive(Debug, Parser)]
#[command(name = "simulate", version)]
struct Cli {
    /// Catalog scenario name (fig2a … fig2g, fig4a … fig4f).
    #[arg(required_unless_present_any = ["config", "list"])]
    scenario: Option<String>,

    /// JSON scenario file; a catalog `name` inside it supplies missing fields.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    #[arg(long, value_name = "U64")]
    seed: Option<u64>,

    #[arg(long, value_name = "N")]
    realizations: Option<usize>,

    #[arg(long, value_name = "F")]
    t_max: Option<f64>,

    #[arg(long, value_name = "K")]
    points: Option<usize>,

    /// Worker threads for ensembles; results do not depend on it.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,

    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    #[arg(long, value_enum, default_value_t = Format::Both)]
    format: Format,

    /// Also write an SVG plot of the populations.
    #[arg(long)]
    plot: bool,

    /// Print catalog scenario names and exit.
    #[arg(long)]
    list: bool,
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        3
    } else if matches!(e, Error::Io(_)) {
        1
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list {
        for s in runner::catalog() {
            let note = if s.has_reference_values {
                ""
            } else {
                " (no reference values)"
            };
            println!("{}{note}", s.name);
        }
        return ExitCode::SUCCESS;
    }
    let overrides = Overrides {
        seed: cli.seed,
        realizations: cli.realizations,
        t_max: cli.t_max,
        points: cli.points,
        threads: cli.threads,
    };
    let result = runner::resolve(cli.scenario.as_deref(), cli.config.as_deref(), &overrides)
        .and_then(|spec| {
            let opts = RunOptions {
                out_dir: cli.out.clone(),
                format: match cli.format {
                    Format::Csv => OutputFormat::Csv,
                    Format::Json => OutputFormat::Json,
                    Format::Both => OutputFormat::Both,
                },
                plot: cli.plot,
            };
            runner::run(&spec, &opts)
        });
    match result {
        Ok((summary, files)) => {
            eprintln!(
                "{}: gate t = {:.4}, peak = {:.4}, {} realization(s), {:.2} s",
                summary.scenario,
                summary.gate.gate_time,
                summary.gate.peak_probability,
                summary.realizations,
                summary.runtime_seconds
            );
            for p in [files.csv, files.json, files.svg].into_iter().flatten() {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
