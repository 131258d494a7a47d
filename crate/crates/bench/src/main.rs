use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bdris::riscore::MaskKind;
use bdris_bench::{
    compare_architectures, parse_seed_list, run, write_outputs, BenchError, Comparison, ExperimentSpec, Mode, RunOutput,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Seeded sweeps of the BD-RIS sum-rate and power-minimization solvers.
///
/// Exit status: 0 on success, 2 when any run ends with status
/// `infeasible_solution` (outputs are still written), 1 on errors.
/// `BDRIS_THREADS` caps the worker pool.
#[derive(Parser)]
#[command(name = "bdris", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sum-rate maximization under a transmit power budget.
    Sumrate(RunArgs),
    /// Transmit-power minimization under SINR targets.
    Powermin(RunArgs),
    /// Same seeds across several architectures, with paired sign counts.
    Compare(CompareArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment spec or bare scenario (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Seeds overriding the config, e.g. `1,2,3` or `1..21`.
    #[arg(long)]
    seed_list: Option<String>,
    /// CSV output path; the provenance JSON gets the same basename.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Sumrate,
    Powermin,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated masks: single, group, tree_tridiagonal (or tree), fully.
    #[arg(long, value_delimiter = ',', required = true)]
    masks: Vec<String>,
    #[arg(long, value_enum, default_value = "sumrate")]
    mode: ModeArg,
}

fn load(args: &RunArgs, mode: Mode) -> Result<(ExperimentSpec, PathBuf), BenchError> {
    let text = std::fs::read_to_string(&args.config).map_err(|source| BenchError::Io {
        path: args.config.clone(),
        source,
    })?;
    let mut spec = ExperimentSpec::from_json(&text)?;
    spec.mode = mode;
    if let Some(list) = &args.seed_list {
        spec.seeds = parse_seed_list(list)?;
    }
    let out = args
        .out
        .clone()
        .or_else(|| spec.output_path.clone())
        .unwrap_or_else(|| PathBuf::from(format!("{mode}.csv")));
    spec.output_path = Some(out.clone());
    Ok((spec, out))
}

fn report(out: &RunOutput, csv: &Path, json: &Path) {
    let unit = match out.spec.mode {
        Mode::Sumrate => ("nats/s/Hz", "bits/s/Hz"),
        Mode::Powermin => ("W", "dBm"),
    };
    println!("{:<18} {:>4} {:>14} {:>12} {:>14} {:>12} {:>10}", "axis", "n", "mean", "std", "mean_alt", "std_alt", "infeasible");
    for s in &out.summary {
        println!(
            "{:<18} {:>4} {:>14.6e} {:>12.4e} {:>14.6} {:>12.4} {:>10}",
            s.axis, s.n, s.mean, s.std, s.mean_alt, s.std_alt, s.infeasible
        );
    }
    println!("units: {} ({})", unit.0, unit.1);
    println!("wrote {} and {}", csv.display(), json.display());
}

fn report_comparison(c: &Comparison) {
    println!("ranking:");
    for (i, e) in c.ranking.iter().enumerate() {
        println!(
            "  {}. {:<18} mean {:.6e}  free parameters {:>5}  interconnections {:>5}",
            i + 1,
            e.mask.to_string(),
            e.mean,
            e.free_parameters,
            e.interconnections
        );
    }
    for p in &c.pairs {
        println!(
            "  {} vs {}: {} wins, {} losses, {} ties, mean diff {:.4e}, sign-test p {:.3e}",
            p.a, p.b, p.wins, p.losses, p.ties, p.mean_diff, p.p_value
        );
    }
}

fn execute(cli: Cli) -> Result<bool, BenchError> {
    let (out, csv, comparison) = match cli.command {
        Command::Sumrate(args) => {
            let (spec, csv) = load(&args, Mode::Sumrate)?;
            (run(&spec)?, csv, None)
        }
        Command::Powermin(args) => {
            let (spec, csv) = load(&args, Mode::Powermin)?;
            (run(&spec)?, csv, None)
        }
        Command::Compare(args) => {
            let mode = match args.mode {
                ModeArg::Sumrate => Mode::Sumrate,
                ModeArg::Powermin => Mode::Powermin,
            };
            let (spec, csv) = load(&args.run, mode)?;
            let masks = args
                .masks
                .iter()
                .map(|m| {
                    m.parse::<MaskKind>().map_err(|e| BenchError::Spec {
                        path: "--masks".into(),
                        reason: e.to_string(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let (out, cmp) = compare_architectures(&spec, &masks)?;
            (out, csv, Some(cmp))
        }
    };
    let json = write_outputs(&out, &csv, comparison.as_ref())?;
    report(&out, &csv, &json);
    if let Some(c) = &comparison {
        report_comparison(c);
    }
    Ok(out.any_infeasible())
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which is reserved for infeasible runs.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("warning: at least one run ended with status infeasible_solution");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
