//! Experiment execution: turns a validated config into CSV artifacts, plot
//! scripts and a manifest.

use std::error::Error;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use hardrods::combinatorics::{self, equilibrium_distribution};
use hardrods::confignet;
use hardrods::master::build_generator;
use hardrods::quantum::{
    build_hamiltonian, evolve_state, histogram_run, overlap_d, time_averaged_distribution,
    InitialSpec, Propagator, QuantumState,
};
use hardrods::{NumberDistribution, RodGeometry};

use crate::config::{ExperimentKind, ResolvedRun};
use crate::manifest::{fmt_f64, ArtifactWriter, RunManifest};
use crate::plot::{emit_plot_script, FigureStyle};

pub type RunResult<T> = Result<T, Box<dyn Error>>;

/// Execute the experiment and write all artifacts under
/// `output_root / output_dir` (the experiment name when no directory is
/// configured).
pub fn run(resolved: &ResolvedRun, output_root: &Path) -> RunResult<RunManifest> {
    let start = Instant::now();
    let dir = run_dir(resolved, output_root);
    let mut writer = ArtifactWriter::new(&dir)?;
    match resolved.kind {
        ExperimentKind::Table1 => table1(&mut writer)?,
        ExperimentKind::NetworkStats => network_stats(resolved, &mut writer)?,
        ExperimentKind::MasterEvolve => master_evolve(resolved, &mut writer)?,
        ExperimentKind::QuantumEvolve => quantum_evolve(resolved, &mut writer)?,
        ExperimentKind::Compare => compare(resolved, &mut writer)?,
        ExperimentKind::Histogram => histogram(resolved, &mut writer)?,
        ExperimentKind::ExportNetwork => export_network(resolved, &mut writer)?,
    }
    let manifest = RunManifest {
        experiment: resolved.kind.name().to_string(),
        config: resolved.config.clone(),
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        duration_seconds: start.elapsed().as_secs_f64(),
        artifacts: writer.into_artifacts(),
    };
    manifest.write(&dir)?;
    Ok(manifest)
}

pub fn run_dir(resolved: &ResolvedRun, output_root: &Path) -> PathBuf {
    match &resolved.config.output_dir {
        Some(d) if Path::new(d).is_absolute() => PathBuf::from(d),
        Some(d) => output_root.join(d),
        None => output_root.join(resolved.kind.name()),
    }
}

fn geometry(resolved: &ResolvedRun) -> RodGeometry {
    resolved.geometry.expect("validated experiment carries a geometry")
}

// --- experiments -----------------------------------------------------------

/// The published reference rows: analytic two-flip connection averages, with
/// graph-counted values alongside where the lattice is small enough to
/// enumerate.
fn table1(writer: &mut ArtifactWriter) -> RunResult<()> {
    let rows: &[(usize, usize, usize)] = &[
        (12, 1, 2),
        (12, 1, 4),
        (300, 1, 2),
        (300, 1, 75),
        (300, 5, 2),
        (300, 5, 25),
        (300, 14, 2),
        (300, 14, 10),
    ];
    let mut csv = String::from(
        "L,lambda,n,loop_analytic,refl_analytic,trans_analytic,\
         loop_empirical,refl_empirical,trans_empirical\n",
    );
    for &(l, lambda, n) in rows {
        let g = RodGeometry::new(l, lambda)?;
        let lp = combinatorics::loop_avg(&g, n)?;
        let rf = combinatorics::refl_avg(&g, n)?;
        let tr = combinatorics::trans_avg(&g, n)?;
        let emp = if l <= 24 {
            let net = confignet::enumerate(&g)?;
            let s = net.empirical_stats(n)?;
            format!("{},{},{}", fmt_f64(s.mean_loop), fmt_f64(s.mean_refl), fmt_f64(s.mean_trans))
        } else {
            ",,".to_string()
        };
        writeln!(csv, "{l},{lambda},{n},{},{},{},{emp}", fmt_f64(lp), fmt_f64(rf), fmt_f64(tr))?;
    }
    writer.write("table1.csv", &csv)?;
    Ok(())
}

fn network_stats(resolved: &ResolvedRun, writer: &mut ArtifactWriter) -> RunResult<()> {
    let g = geometry(resolved);
    let net = confignet::enumerate(&g)?;
    let mut csv = String::from(
        "n,density,nu,mean_degree,loop_analytic,refl_empirical,refl_analytic,\
         trans_empirical,trans_analytic\n",
    );
    for n in 0..=g.max_rods() {
        let s = net.empirical_stats(n)?;
        let nu = combinatorics::nu(&g, n)?;
        let exact = nu.exact().map(|x| x.to_string()).unwrap_or_else(|| fmt_f64(nu.value()));
        writeln!(
            csv,
            "{n},{},{exact},{},{},{},{},{},{}",
            fmt_f64(g.density(n)),
            fmt_f64(s.mean_loop),
            fmt_f64(combinatorics::loop_avg(&g, n)?),
            fmt_f64(s.mean_refl),
            fmt_f64(combinatorics::refl_avg(&g, n)?),
            fmt_f64(s.mean_trans),
            fmt_f64(combinatorics::trans_avg(&g, n)?),
        )?;
    }
    writer.write("network_stats.csv", &csv)?;

    let mut summary = String::from("sites,lambda,states,edges,h2_offdiag_ratio\n");
    writeln!(
        summary,
        "{},{},{},{},{}",
        g.sites(),
        g.lambda(),
        net.num_states(),
        net.num_edges(),
        fmt_f64(net.h2_offdiag_ratio()),
    )?;
    writer.write("network_summary.csv", &summary)?;
    Ok(())
}

fn trace_csv(g: &RodGeometry, times: &[f64], dists: &[&NumberDistribution]) -> String {
    let mut csv = String::from("omega_t,n,density,p_n\n");
    for (t, dist) in times.iter().zip(dists) {
        for (n, p) in dist.probabilities().iter().enumerate() {
            writeln!(csv, "{},{n},{},{}", fmt_f64(*t), fmt_f64(g.density(n)), fmt_f64(*p))
                .unwrap();
        }
    }
    csv
}

fn observables_csv(times: &[f64], dists: &[&NumberDistribution], energies: Option<&[f64]>) -> String {
    let mut csv = match energies {
        Some(_) => String::from("omega_t,mean_density,q_ratio,energy\n"),
        None => String::from("omega_t,mean_density,q_ratio\n"),
    };
    for (i, (t, dist)) in times.iter().zip(dists).enumerate() {
        let obs = dist.observables();
        match energies {
            Some(es) => writeln!(
                csv,
                "{},{},{},{}",
                fmt_f64(*t),
                fmt_f64(obs.mean_density),
                fmt_f64(obs.q_ratio),
                fmt_f64(es[i])
            )
            .unwrap(),
            None => {
                writeln!(csv, "{},{},{}", fmt_f64(*t), fmt_f64(obs.mean_density), fmt_f64(obs.q_ratio))
                    .unwrap()
            }
        }
    }
    csv
}

fn steady_csvs(g: &RodGeometry, writer: &mut ArtifactWriter) -> RunResult<NumberDistribution> {
    let eq = equilibrium_distribution(g);
    let mut csv = String::from("n,density,p_eq\n");
    for (n, p) in eq.probabilities().iter().enumerate() {
        writeln!(csv, "{n},{},{}", fmt_f64(g.density(n)), fmt_f64(*p))?;
    }
    writer.write("steady_state.csv", &csv)?;

    let obs = eq.observables();
    let mut summary = String::from("lambda,mean_density,q_ratio\n");
    writeln!(summary, "{},{},{}", g.lambda(), fmt_f64(obs.mean_density), fmt_f64(obs.q_ratio))?;
    writer.write("steady_observables.csv", &summary)?;
    Ok(eq)
}

fn master_evolve(resolved: &ResolvedRun, writer: &mut ArtifactWriter) -> RunResult<()> {
    let g = geometry(resolved);
    let gen = build_generator(&g);
    let p0 = NumberDistribution::point_mass(g, resolved.config.initial.n0.unwrap_or(0))?;
    let samples = gen.evolve(&p0, &resolved.t_grid, resolved.omega)?;
    let refs: Vec<&NumberDistribution> = samples.iter().collect();
    writer.write("trace.csv", &trace_csv(&g, &resolved.t_grid, &refs))?;
    writer.write("observables.csv", &observables_csv(&resolved.t_grid, &refs, None))?;
    steady_csvs(&g, writer)?;
    let script = emit_plot_script(writer.dir(), FigureStyle::DistributionSnapshots, &["trace.csv"])?;
    writer.record(&script)?;
    Ok(())
}

fn initial_state(
    resolved: &ResolvedRun,
    net: &confignet::ConfigurationNetwork,
    seed: u64,
) -> RunResult<QuantumState> {
    let id = match resolved.config.initial.n0 {
        Some(n0) => {
            let cfg = net.sample_microstate(n0, seed)?;
            net.index_of(cfg.bits()).expect("sampled state is enumerated")
        }
        None => net.index_of(0).expect("the empty lattice is always a state"),
    };
    Ok(QuantumState::basis_state(net.num_states(), id))
}

fn quantum_evolve(resolved: &ResolvedRun, writer: &mut ArtifactWriter) -> RunResult<()> {
    let g = geometry(resolved);
    let net = confignet::enumerate(&g)?;
    let h = build_hamiltonian(&net, resolved.omega)?;
    let psi0 = initial_state(resolved, &net, resolved.config.initial.seed.unwrap_or(0))?;
    let trace = evolve_state(&h, &psi0, &resolved.t_grid, Propagator::default())?;
    let refs: Vec<&NumberDistribution> = trace.distributions.iter().collect();
    writer.write("trace.csv", &trace_csv(&g, &trace.times, &refs))?;
    writer.write("observables.csv", &observables_csv(&trace.times, &refs, Some(&trace.energies)))?;
    steady_csvs(&g, writer)?;
    let script = emit_plot_script(writer.dir(), FigureStyle::DistributionSnapshots, &["trace.csv"])?;
    writer.record(&script)?;
    Ok(())
}

/// Quantum traces for several seeds with the rate-equation curve overlaid,
/// plus the windowed overlap of each run against the steady state when the
/// grid covers the averaging window.
fn compare(resolved: &ResolvedRun, writer: &mut ArtifactWriter) -> RunResult<()> {
    let g = geometry(resolved);
    let net = confignet::enumerate(&g)?;
    let h = build_hamiltonian(&net, resolved.omega)?;
    let eq = steady_csvs(&g, writer)?;
    let grid = &resolved.t_grid;
    let (lo, hi) = resolved.window;
    let window_covered = grid.first().is_some_and(|&t| t <= lo) && grid.last().is_some_and(|&t| t >= hi);

    let mut obs_files = Vec::new();
    let mut overlap = String::from("seed,n0,D\n");
    for k in 0..resolved.ensemble_count {
        let seed = resolved.base_seed + k as u64;
        let psi0 = initial_state(resolved, &net, seed)?;
        let trace = evolve_state(&h, &psi0, grid, Propagator::default())?;
        let refs: Vec<&NumberDistribution> = trace.distributions.iter().collect();
        let name = format!("quantum_obs_seed{seed}.csv");
        writer.write(&name, &observables_csv(&trace.times, &refs, Some(&trace.energies)))?;
        obs_files.push(name);
        if window_covered {
            let p_bar = time_averaged_distribution(&trace, resolved.window)?;
            let d = overlap_d(&p_bar, &eq)?;
            writeln!(overlap, "{seed},{},{}", resolved.config.initial.n0.unwrap_or(0), fmt_f64(d))?;
        }
    }

    let gen = build_generator(&g);
    let p0 = NumberDistribution::point_mass(g, resolved.config.initial.n0.unwrap_or(0))?;
    let samples = gen.evolve(&p0, grid, resolved.omega)?;
    let refs: Vec<&NumberDistribution> = samples.iter().collect();
    writer.write("master_observables.csv", &observables_csv(grid, &refs, None))?;

    if window_covered {
        writer.write("overlap.csv", &overlap)?;
    }
    let mut csvs: Vec<&str> = obs_files.iter().map(String::as_str).collect();
    csvs.push("master_observables.csv");
    let script = emit_plot_script(writer.dir(), FigureStyle::CompareTraces, &csvs)?;
    writer.record(&script)?;
    Ok(())
}

fn histogram(resolved: &ResolvedRun, writer: &mut ArtifactWriter) -> RunResult<()> {
    let g = geometry(resolved);
    let net = confignet::enumerate(&g)?;
    let h = build_hamiltonian(&net, resolved.omega)?;
    let eq = steady_csvs(&g, writer)?;
    let specs: Vec<InitialSpec> = (0..resolved.ensemble_count)
        .map(|k| InitialSpec {
            n0: resolved.config.initial.n0,
            seed: resolved.base_seed + k as u64,
        })
        .collect();
    let samples = resolved.config.time.samples.unwrap_or(401);
    let result = histogram_run(&h, &specs, resolved.window, samples, &eq, Propagator::default())?;

    let mut csv = String::from("n0,seed,D\n");
    for e in &result.entries {
        writeln!(csv, "{},{},{}", e.n0, e.seed, fmt_f64(e.d))?;
    }
    writer.write("histogram.csv", &csv)?;

    let mut counts = String::from("n,count,p_eq\n");
    for (n, c) in result.initial_counts.iter().enumerate() {
        writeln!(counts, "{n},{c},{}", fmt_f64(eq.probabilities()[n]))?;
    }
    writer.write("initial_counts.csv", &counts)?;
    let script = emit_plot_script(
        writer.dir(),
        FigureStyle::OverlapHistogram,
        &["histogram.csv", "initial_counts.csv"],
    )?;
    writer.record(&script)?;
    Ok(())
}

fn export_network(resolved: &ResolvedRun, writer: &mut ArtifactWriter) -> RunResult<()> {
    let g = geometry(resolved);
    let net = confignet::enumerate(&g)?;
    let mut edges = Vec::new();
    net.write_edge_list(&mut edges)?;
    writer.write("edges.txt", &String::from_utf8(edges)?)?;
    let mut columns = Vec::new();
    net.write_columns(&mut columns)?;
    writer.write("columns.txt", &String::from_utf8(columns)?)?;
    Ok(())
}
