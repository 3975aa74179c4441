//! Standalone plot-script generation. Scripts reference the CSVs by relative
//! path and never embed data, so they can be re-run after the fact.

use std::fs;
use std::io;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureStyle {
    /// `p_n` vs rod density, one curve per sample time.
    DistributionSnapshots,
    /// Steady-state `Q` vs blockade radius.
    QDecay,
    /// Histogram of the overlap `D` with an inset of the initial rod-number
    /// distribution.
    OverlapHistogram,
    /// Mean-density traces of several quantum runs against the rate-equation
    /// steady state.
    CompareTraces,
}

impl FigureStyle {
    /// Columns each referenced CSV must provide, keyed by position.
    fn required_columns(&self) -> &'static [&'static [&'static str]] {
        match self {
            FigureStyle::DistributionSnapshots => &[&["omega_t", "n", "p_n"]],
            FigureStyle::QDecay => &[&["lambda", "mean_density", "q_ratio"]],
            FigureStyle::OverlapHistogram => &[&["n0", "seed", "D"], &["n", "count", "p_eq"]],
            FigureStyle::CompareTraces => &[&["omega_t", "mean_density"]],
        }
    }

    fn script_name(&self) -> &'static str {
        match self {
            FigureStyle::DistributionSnapshots => "plot_snapshots.py",
            FigureStyle::QDecay => "plot_q_decay.py",
            FigureStyle::OverlapHistogram => "plot_histogram.py",
            FigureStyle::CompareTraces => "plot_compare.py",
        }
    }
}

/// Check the header of `csv` (relative to `dir`) against the required column
/// names. Extra columns are fine; missing ones are an error naming them.
fn check_schema(dir: &Path, csv: &str, required: &[&str]) -> io::Result<()> {
    let text = fs::read_to_string(dir.join(csv))?;
    let header: Vec<&str> = text.lines().next().unwrap_or("").split(',').map(str::trim).collect();
    let missing: Vec<&str> =
        required.iter().filter(|c| !header.contains(*c)).copied().collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("{csv} is missing columns: {}", missing.join(", ")),
        ))
    }
}

/// Write a plotting script for `style` into `dir`, referencing `csvs` by
/// relative path. The last required-column set applies to any trailing CSVs,
/// so trace styles accept one file per curve. Returns the script file name.
pub fn emit_plot_script(dir: &Path, style: FigureStyle, csvs: &[&str]) -> io::Result<String> {
    if csvs.is_empty() {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "no CSV files given"));
    }
    let schemas = style.required_columns();
    for (i, csv) in csvs.iter().enumerate() {
        let required = schemas[i.min(schemas.len() - 1)];
        check_schema(dir, csv, required)?;
    }
    let body = match style {
        FigureStyle::DistributionSnapshots => snapshots_script(csvs[0]),
        FigureStyle::QDecay => q_decay_script(csvs),
        FigureStyle::OverlapHistogram => histogram_script(csvs[0], csvs.get(1).copied()),
        FigureStyle::CompareTraces => compare_script(csvs),
    };
    let name = style.script_name();
    fs::write(dir.join(name), body)?;
    Ok(name.to_string())
}

const PREAMBLE: &str = "#!/usr/bin/env python3\n\
    import csv\n\
    import collections\n\
    import matplotlib.pyplot as plt\n\n\
    def read(path):\n\
    \x20   with open(path) as f:\n\
    \x20       rows = list(csv.DictReader(f))\n\
    \x20   return rows\n\n";

fn snapshots_script(trace: &str) -> String {
    format!(
        "{PREAMBLE}\
        rows = read('{trace}')\n\
        by_time = collections.defaultdict(list)\n\
        for r in rows:\n\
        \x20   x = float(r['density']) if 'density' in r else int(r['n'])\n\
        \x20   by_time[float(r['omega_t'])].append((x, float(r['p_n'])))\n\
        for t in sorted(by_time):\n\
        \x20   pts = sorted(by_time[t])\n\
        \x20   plt.plot([x for x, _ in pts], [p for _, p in pts], marker='o', ms=3,\n\
        \x20            label=f'$\\\\Omega t = {{t:g}}$')\n\
        plt.xlabel('hard rod density $n \\\\lambda / L$')\n\
        plt.ylabel('$p_n$')\n\
        plt.legend(fontsize=8)\n\
        plt.tight_layout()\n\
        plt.savefig('snapshots.pdf')\n"
    )
}

fn q_decay_script(csvs: &[&str]) -> String {
    let files = csvs.iter().map(|c| format!("'{c}'")).collect::<Vec<_>>().join(", ");
    format!(
        "{PREAMBLE}\
        points = []\n\
        for path in [{files}]:\n\
        \x20   for r in read(path):\n\
        \x20       points.append((float(r['lambda']), float(r['q_ratio'])))\n\
        points.sort()\n\
        plt.plot([l for l, _ in points], [q for _, q in points], marker='s')\n\
        plt.xlabel('$\\\\lambda$')\n\
        plt.ylabel('$Q$')\n\
        plt.tight_layout()\n\
        plt.savefig('q_decay.pdf')\n"
    )
}

fn histogram_script(hist: &str, initial: Option<&str>) -> String {
    let inset = match initial {
        Some(path) => format!(
            "rows = read('{path}')\n\
            ax_in = ax.inset_axes([0.15, 0.55, 0.35, 0.4])\n\
            ns = [int(r['n']) for r in rows]\n\
            ax_in.bar(ns, [int(r['count']) for r in rows], alpha=0.6, label='sampled')\n\
            total = sum(int(r['count']) for r in rows)\n\
            ax_in.plot(ns, [total * float(r['p_eq']) for r in rows], 'k.-', label='$p^{{eq}}$')\n\
            ax_in.set_xlabel('$n_0$', fontsize=8)\n\
            ax_in.legend(fontsize=6)\n"
        ),
        None => String::new(),
    };
    format!(
        "{PREAMBLE}\
        ds = [float(r['D']) for r in read('{hist}')]\n\
        fig, ax = plt.subplots()\n\
        ax.hist(ds, bins=40)\n\
        ax.set_xlabel('$\\\\mathcal{{D}}$')\n\
        ax.set_ylabel('count')\n\
        {inset}\
        plt.tight_layout()\n\
        plt.savefig('histogram.pdf')\n"
    )
}

fn compare_script(csvs: &[&str]) -> String {
    let files = csvs.iter().map(|c| format!("'{c}'")).collect::<Vec<_>>().join(", ");
    format!(
        "{PREAMBLE}\
        for path in [{files}]:\n\
        \x20   rows = read(path)\n\
        \x20   ts = [float(r['omega_t']) for r in rows]\n\
        \x20   ys = [float(r['mean_density']) for r in rows]\n\
        \x20   style = '--k' if 'master' in path else '-'\n\
        \x20   plt.plot(ts, ys, style, label=path)\n\
        plt.xlabel('$\\\\Omega t$')\n\
        plt.ylabel('mean rod density')\n\
        plt.legend(fontsize=8)\n\
        plt.tight_layout()\n\
        plt.savefig('compare.pdf')\n"
    )
}
