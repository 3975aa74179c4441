use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hardrods_cli::config::{EnsembleSpec, ExperimentKind, GeometrySpec, InitialSpec, RunConfig, TimeSpec};
use hardrods_cli::runner;

/// Simulation and analysis runner for quantum hard rods on a ring.
#[derive(Parser)]
#[command(name = "hardrods", version)]
struct Cli {
    /// TOML run configuration; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Root directory for run outputs (default: HARDRODS_OUTPUT_ROOT or ".").
    #[arg(long, global = true, env = "HARDRODS_OUTPUT_ROOT")]
    output_root: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Overrides {
    /// Number of lattice sites.
    #[arg(long)]
    sites: Option<usize>,
    /// Blockade radius in lattice sites.
    #[arg(long)]
    lambda: Option<usize>,
    /// Length over critical radius; sets sites = l_over_rc * lambda.
    #[arg(long)]
    l_over_rc: Option<f64>,
    /// Rabi frequency.
    #[arg(long)]
    omega: Option<f64>,
    /// Final sample time, in units of 1/omega.
    #[arg(long)]
    t_max: Option<f64>,
    /// Number of sample times (evolutions) or window samples (histogram).
    #[arg(long)]
    samples: Option<usize>,
    /// Averaging window, two values lo hi.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    window: Option<Vec<f64>>,
    /// Initial rod number; the initial state is drawn from this column.
    #[arg(long)]
    n0: Option<usize>,
    /// Seed for the initial-state draw.
    #[arg(long)]
    seed: Option<u64>,
    /// Ensemble size.
    #[arg(long)]
    count: Option<usize>,
    /// First seed of the ensemble.
    #[arg(long)]
    base_seed: Option<u64>,
    /// Run directory, relative to the output root.
    #[arg(long)]
    output_dir: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce the reference table of two-flip connection averages.
    Table1(Overrides),
    /// Enumerate a configuration network and tabulate per-column statistics.
    NetworkStats(Overrides),
    /// Integrate the rod-number rate equation.
    MasterEvolve(Overrides),
    /// Propagate the Schroedinger equation on the configuration network.
    QuantumEvolve(Overrides),
    /// Quantum runs for several seeds with the rate-equation overlay.
    Compare(Overrides),
    /// Overlap histogram over an ensemble of random initial states.
    Histogram(Overrides),
    /// Write the network edge list and column table.
    ExportNetwork(Overrides),
    /// Check a configuration file and report every violation.
    Validate,
}

fn kind_and_overrides(cmd: &Command) -> (Option<ExperimentKind>, Option<&Overrides>) {
    match cmd {
        Command::Table1(o) => (Some(ExperimentKind::Table1), Some(o)),
        Command::NetworkStats(o) => (Some(ExperimentKind::NetworkStats), Some(o)),
        Command::MasterEvolve(o) => (Some(ExperimentKind::MasterEvolve), Some(o)),
        Command::QuantumEvolve(o) => (Some(ExperimentKind::QuantumEvolve), Some(o)),
        Command::Compare(o) => (Some(ExperimentKind::Compare), Some(o)),
        Command::Histogram(o) => (Some(ExperimentKind::Histogram), Some(o)),
        Command::ExportNetwork(o) => (Some(ExperimentKind::ExportNetwork), Some(o)),
        Command::Validate => (None, None),
    }
}

fn apply_overrides(config: &mut RunConfig, o: &Overrides) {
    let GeometrySpec { sites, l_over_rc, lambda } = &mut config.geometry;
    if o.sites.is_some() {
        *sites = o.sites;
        *l_over_rc = None;
    }
    if o.l_over_rc.is_some() {
        *l_over_rc = o.l_over_rc;
        *sites = None;
    }
    if o.lambda.is_some() {
        *lambda = o.lambda;
    }
    let set = |dst: &mut Option<f64>, src: Option<f64>| {
        if src.is_some() {
            *dst = src;
        }
    };
    set(&mut config.omega, o.omega);
    let TimeSpec { t_max, samples, window, .. } = &mut config.time;
    set(t_max, o.t_max);
    if o.samples.is_some() {
        *samples = o.samples;
    }
    if let Some(w) = &o.window {
        *window = Some([w[0], w[1]]);
    }
    let InitialSpec { n0, seed } = &mut config.initial;
    if o.n0.is_some() {
        *n0 = o.n0;
    }
    if o.seed.is_some() {
        *seed = o.seed;
    }
    let EnsembleSpec { count, base_seed } = &mut config.ensemble;
    if o.count.is_some() {
        *count = o.count;
    }
    if o.base_seed.is_some() {
        *base_seed = o.base_seed;
    }
    if o.output_dir.is_some() {
        config.output_dir = o.output_dir.clone();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, overrides) = kind_and_overrides(&cli.command);

    let mut config = match &cli.config {
        Some(path) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", path.display());
                    return ExitCode::from(1);
                }
            };
            match RunConfig::from_toml(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
        }
        None => {
            let Some(kind) = kind else {
                eprintln!("error: validate requires --config");
                return ExitCode::from(2);
            };
            RunConfig::new(kind)
        }
    };
    if let Some(kind) = kind {
        config.experiment = kind;
    }
    if let Some(o) = overrides {
        apply_overrides(&mut config, o);
    }

    let resolved = match config.validate() {
        Ok(r) => r,
        Err(errs) => {
            for e in &errs {
                eprintln!("error: {e}");
            }
            return ExitCode::from(2);
        }
    };

    if matches!(cli.command, Command::Validate) {
        println!("configuration valid: {}", resolved.kind.name());
        return ExitCode::SUCCESS;
    }

    let output_root = cli.output_root.unwrap_or_else(|| PathBuf::from("."));
    match runner::run(&resolved, &output_root) {
        Ok(manifest) => {
            let dir = runner::run_dir(&resolved, &output_root);
            println!(
                "{}: wrote {} artifacts to {}",
                manifest.experiment,
                manifest.artifacts.len(),
                dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
