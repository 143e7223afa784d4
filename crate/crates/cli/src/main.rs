use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use hexotoc_core::experiment::{self, EntropyUnits, ExperimentConfig};
use hexotoc_core::fitting::{fit_series, FitOptions, ModelRegistry, Quantity, TimeAxis};
use hexotoc_core::observables::read_otoc_csv;
use hexotoc_core::oracle::run_oracle_checks;
use hexotoc_core::PresetRegistry;

#[derive(Parser)]
#[command(name = "hexotoc", version, about = "Bose-Hubbard OTOC and scrambling experiments")]
struct Cli {
    /// Worker threads (default: all cores). HEXOTOC_THREADS takes precedence.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the tasks of an experiment config.
    Simulate {
        config: PathBuf,
        /// Permit sector dimensions above the budget.
        #[arg(long)]
        allow_heavy: bool,
        /// Exit nonzero on any OTOC/MI bound violation.
        #[arg(long)]
        strict: bool,
        /// Overrides the config's output_dir.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Overrides the config's occupation cap.
        #[arg(long)]
        n_max: Option<usize>,
        /// Report entropies in bits instead of nats.
        #[arg(long)]
        bits: bool,
    },
    /// Fit decay models to an otoc.csv.
    Fit {
        otoc: PathBuf,
        /// Comma-separated model names.
        #[arg(long, value_delimiter = ',', default_value = "exponential,gaussian,convolution")]
        models: Vec<String>,
        /// Window end on the fitted time axis (default: first drop below 0.1 or first minimum).
        #[arg(long)]
        window: Option<f64>,
        /// Window start on the fitted time axis (default: first point).
        #[arg(long, conflicts_with = "onset")]
        window_start: Option<f64>,
        /// Start the window where the OTOC first drops below this level.
        #[arg(long)]
        onset: Option<f64>,
        #[arg(long, value_enum, default_value_t = QuantityArg::Re)]
        quantity: QuantityArg,
        /// Graph distance between the operator sites.
        #[arg(long, default_value_t = 1.0)]
        distance: f64,
        #[arg(long, value_enum, default_value_t = AxisArg::Physical)]
        time_axis: AxisArg,
        /// Hopping J converting Jt to t.
        #[arg(long, default_value_t = 4.0)]
        hopping: f64,
        /// Write the report here instead of stdout.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Lattice presets.
    Presets {
        #[command(subcommand)]
        action: PresetsAction,
    },
    /// Compare fast paths against the dense oracle on small systems.
    OracleCheck,
}

#[derive(Subcommand)]
enum PresetsAction {
    List {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum QuantityArg {
    Re,
    Abs,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Jt,
    Physical,
}

fn configure_threads(flag: Option<usize>) -> Result<()> {
    let threads = match std::env::var("HEXOTOC_THREADS") {
        Ok(v) => Some(v.trim().parse::<usize>().with_context(|| format!("HEXOTOC_THREADS={v:?} is not a thread count"))?),
        Err(_) => flag,
    };
    if let Some(n) = threads {
        if n == 0 {
            bail!("thread count must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn simulate(
    path: PathBuf,
    allow_heavy: bool,
    strict: bool,
    output: Option<PathBuf>,
    n_max: Option<usize>,
    bits: bool,
) -> Result<ExitCode> {
    let mut config = ExperimentConfig::load(&path).with_context(|| format!("loading {}", path.display()))?;
    config.allow_heavy |= allow_heavy;
    config.strict |= strict;
    if let Some(dir) = output {
        config.output_dir = dir;
    }
    if n_max.is_some() {
        config.n_max = n_max;
    }
    if bits {
        config.entropy.units = EntropyUnits::Bits;
    }
    let summary = experiment::run(&config)?;
    eprintln!("wrote {} to {}", summary.outputs.join(", "), config.output_dir.display());
    if summary.truncated {
        eprintln!("note: occupations were truncated; results are approximate");
    }
    if summary.bound_violations > 0 {
        eprintln!("bound check: {} violation(s) of delta OTOC <= delta I(A:B)", summary.bound_violations);
    }
    if summary.oracle_failures > 0 {
        eprintln!("oracle check: {} failure(s)", summary.oracle_failures);
    }
    Ok(if summary.success(config.strict) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

#[allow(clippy::too_many_arguments)]
fn fit(
    path: PathBuf,
    models: Vec<String>,
    window: Option<f64>,
    window_start: Option<f64>,
    onset: Option<f64>,
    quantity: QuantityArg,
    distance: f64,
    time_axis: AxisArg,
    hopping: f64,
    output: Option<PathBuf>,
) -> Result<ExitCode> {
    let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
    let series = read_otoc_csv(BufReader::new(file))?;
    let registry = ModelRegistry::builtin();
    for m in &models {
        registry.get(m)?;
    }
    let options = FitOptions {
        quantity: match quantity {
            QuantityArg::Re => Quantity::Re,
            QuantityArg::Abs => Quantity::Abs,
        },
        time_axis: match time_axis {
            AxisArg::Jt => TimeAxis::Jt,
            AxisArg::Physical => TimeAxis::Physical,
        },
        hopping,
        window_start,
        onset_level: onset,
        window_end: window,
        ..FitOptions::default()
    };
    let names: Vec<&str> = models.iter().map(String::as_str).collect();
    let report = fit_series(&series, &names, distance, &options)?;
    let text = serde_json::to_string_pretty(&report.to_json())?;
    match output {
        Some(p) => std::fs::write(&p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => println!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn presets_list(json: bool) -> Result<ExitCode> {
    let rows = PresetRegistry::builtin().list();
    let mut out = io::stdout().lock();
    if json {
        let value: Vec<_> = rows
            .iter()
            .map(|r| {
                serde_json::json!({
                    "name": r.name,
                    "variant": r.variant,
                    "sites": r.sites,
                    "edges": r.edges,
                    "placements": r.placements.iter().map(|(n, p)| serde_json::json!({"name": n, "i": p.i, "j": p.j})).collect::<Vec<_>>(),
                    "description": r.description,
                })
            })
            .collect();
        writeln!(out, "{}", serde_json::to_string_pretty(&value)?)?;
        return Ok(ExitCode::SUCCESS);
    }
    writeln!(out, "{:<14} {:>7} {:>5} {:>5}  placements", "preset", "variant", "sites", "edges")?;
    for r in rows {
        let placements: Vec<String> = r.placements.iter().map(|(n, p)| format!("{n}=({},{})", p.i, p.j)).collect();
        writeln!(out, "{:<14} {:>7} {:>5} {:>5}  {}", r.name, r.variant, r.sites, r.edges, placements.join(" "))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn oracle_check() -> Result<ExitCode> {
    let checks = run_oracle_checks()?;
    println!("{}", serde_json::to_string_pretty(&checks)?);
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        eprintln!("{failed} oracle check(s) failed");
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Simulate {
            config,
            allow_heavy,
            strict,
            output,
            n_max,
            bits,
        } => simulate(config, allow_heavy, strict, output, n_max, bits),
        Command::Fit {
            otoc,
            models,
            window,
            window_start,
            onset,
            quantity,
            distance,
            time_axis,
            hopping,
            output,
        } => fit(otoc, models, window, window_start, onset, quantity, distance, time_axis, hopping, output),
        Command::Presets {
            action: PresetsAction::List { json },
        } => presets_list(json),
        Command::OracleCheck => oracle_check(),
    }
}
