//! Run configuration: a TOML file plus command-line overrides.

use hardrods::RodGeometry;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Table1,
    NetworkStats,
    MasterEvolve,
    QuantumEvolve,
    Compare,
    Histogram,
    ExportNetwork,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Table1 => "table1",
            ExperimentKind::NetworkStats => "network-stats",
            ExperimentKind::MasterEvolve => "master-evolve",
            ExperimentKind::QuantumEvolve => "quantum-evolve",
            ExperimentKind::Compare => "compare",
            ExperimentKind::Histogram => "histogram",
            ExperimentKind::ExportNetwork => "export-network",
        }
    }

    fn needs_time_grid(&self) -> bool {
        matches!(
            self,
            ExperimentKind::MasterEvolve | ExperimentKind::QuantumEvolve | ExperimentKind::Compare
        )
    }

    fn needs_geometry(&self) -> bool {
        !matches!(self, ExperimentKind::Table1)
    }

    pub fn is_ensemble(&self) -> bool {
        matches!(self, ExperimentKind::Histogram | ExperimentKind::Compare)
    }

    fn enumerates(&self) -> bool {
        matches!(
            self,
            ExperimentKind::NetworkStats
                | ExperimentKind::QuantumEvolve
                | ExperimentKind::Compare
                | ExperimentKind::Histogram
                | ExperimentKind::ExportNetwork
        )
    }
}

/// Either `(sites, lambda)` directly or `(l_over_rc, lambda)` with
/// `sites = l_over_rc * lambda`.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub sites: Option<usize>,
    pub l_over_rc: Option<f64>,
    pub lambda: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    /// Explicit sample times; wins over `t_max`/`samples`.
    pub grid: Option<Vec<f64>>,
    pub t_max: Option<f64>,
    pub samples: Option<usize>,
    /// Averaging window `[lo, hi]` in units of `Omega t`.
    pub window: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    /// Rod-number column of the initial basis state; omitted means the empty
    /// lattice.
    pub n0: Option<usize>,
    /// Seed for the microstate draw within the column.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub count: Option<usize>,
    pub base_seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub geometry: GeometrySpec,
    pub omega: Option<f64>,
    #[serde(default)]
    pub time: TimeSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub ensemble: EnsembleSpec,
    /// Output directory, relative to the output root unless absolute.
    pub output_dir: Option<String>,
}

impl RunConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        RunConfig {
            experiment,
            geometry: GeometrySpec::default(),
            omega: None,
            time: TimeSpec::default(),
            initial: InitialSpec::default(),
            ensemble: EnsembleSpec::default(),
            output_dir: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Check every cross-field constraint and return the complete list of
    /// violations.
    pub fn validate(&self) -> Result<ResolvedRun, Vec<String>> {
        let mut errs = Vec::new();
        let kind = self.experiment;

        let geometry = if kind.needs_geometry() {
            match self.resolve_geometry() {
                Ok(g) => Some(g),
                Err(mut e) => {
                    errs.append(&mut e);
                    None
                }
            }
        } else {
            None
        };
        if let Some(g) = geometry {
            if kind.enumerates() && g.sites() > 64 {
                errs.push(format!(
                    "geometry: L = {} exceeds the enumeration limit of 64 sites for {}",
                    g.sites(),
                    kind.name()
                ));
            }
            if let Some(n0) = self.initial.n0 {
                if n0 > g.max_rods() {
                    errs.push(format!(
                        "initial.n0 = {n0} exceeds the maximum rod number {}",
                        g.max_rods()
                    ));
                }
            }
        }

        let omega = self.omega.unwrap_or(1.0);
        if !(omega.is_finite() && omega > 0.0) {
            errs.push(format!("omega must be positive and finite, got {omega}"));
        }

        let t_grid = if kind.needs_time_grid() {
            match self.resolve_grid() {
                Ok(g) => g,
                Err(mut e) => {
                    errs.append(&mut e);
                    Vec::new()
                }
            }
        } else {
            Vec::new()
        };

        let window = self.time.window.unwrap_or([20.0, 40.0]);
        if !(window[0] >= 0.0 && window[0] < window[1]) {
            errs.push(format!("time.window [{}, {}] must satisfy 0 <= lo < hi", window[0], window[1]));
        }

        let mut count = self.ensemble.count.unwrap_or(0);
        let mut base_seed = self.ensemble.base_seed;
        if kind.is_ensemble() {
            if count == 0 {
                count = if kind == ExperimentKind::Compare { 3 } else { 0 };
            }
            if count == 0 {
                errs.push("ensemble.count is required for this experiment".into());
            }
            if base_seed.is_none() {
                errs.push("ensemble.base_seed is required for ensemble experiments".into());
            }
        } else {
            count = 0;
            base_seed = None;
        }

        if errs.is_empty() {
            Ok(ResolvedRun {
                config: self.clone(),
                kind,
                geometry,
                omega,
                t_grid,
                window: (window[0], window[1]),
                ensemble_count: count,
                base_seed: base_seed.unwrap_or(0),
            })
        } else {
            Err(errs)
        }
    }

    fn resolve_geometry(&self) -> Result<RodGeometry, Vec<String>> {
        let g = &self.geometry;
        let Some(lambda) = g.lambda else {
            return Err(vec!["geometry.lambda is required".into()]);
        };
        match (g.sites, g.l_over_rc) {
            (Some(_), Some(_)) => {
                Err(vec!["geometry: give either sites or l_over_rc, not both".into()])
            }
            (None, None) => Err(vec!["geometry: one of sites or l_over_rc is required".into()]),
            (Some(l), None) => RodGeometry::new(l, lambda).map_err(|e| vec![format!("geometry: {e}")]),
            (None, Some(r)) => {
                RodGeometry::from_ratio(r, lambda).map_err(|e| vec![format!("geometry: {e}")])
            }
        }
    }

    fn resolve_grid(&self) -> Result<Vec<f64>, Vec<String>> {
        if let Some(grid) = &self.time.grid {
            if grid.is_empty()
                || grid[0] < 0.0
                || grid.windows(2).any(|w| w[1] < w[0])
                || grid.iter().any(|t| !t.is_finite())
            {
                return Err(vec!["time.grid must be ascending, finite and nonnegative".into()]);
            }
            return Ok(grid.clone());
        }
        let mut errs = Vec::new();
        let t_max = self.time.t_max.unwrap_or(0.0);
        if !(t_max.is_finite() && t_max > 0.0) {
            errs.push("time.t_max (or an explicit time.grid) is required".into());
        }
        let samples = self.time.samples.unwrap_or(201);
        if samples < 2 {
            errs.push(format!("time.samples must be at least 2, got {samples}"));
        }
        if !errs.is_empty() {
            return Err(errs);
        }
        Ok((0..samples).map(|k| t_max * k as f64 / (samples - 1) as f64).collect())
    }
}

/// A validated configuration with every derived quantity resolved.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub config: RunConfig,
    pub kind: ExperimentKind,
    pub geometry: Option<RodGeometry>,
    pub omega: f64,
    pub t_grid: Vec<f64>,
    pub window: (f64, f64),
    pub ensemble_count: usize,
    pub base_seed: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_master_config() {
        let cfg = RunConfig::from_toml(
            r#"
            experiment = "master-evolve"
            [geometry]
            l_over_rc = 120.0
            lambda = 1
            [time]
            t_max = 2.0
            "#,
        )
        .unwrap();
        let run = cfg.validate().unwrap();
        assert_eq!(run.geometry.unwrap().sites(), 120);
        assert_eq!(run.t_grid.len(), 201);
        assert_eq!(run.omega, 1.0);
    }

    #[test]
    fn ratio_protocol_examples() {
        for (r, lambda, l) in [(10.0, 3usize, 30usize), (9.0, 4, 36), (120.0, 9, 1080)] {
            let mut cfg = RunConfig::new(ExperimentKind::MasterEvolve);
            cfg.geometry = GeometrySpec { sites: None, l_over_rc: Some(r), lambda: Some(lambda) };
            cfg.time.t_max = Some(1.0);
            assert_eq!(cfg.validate().unwrap().geometry.unwrap().sites(), l);
        }
        // non-integer L
        let mut cfg = RunConfig::new(ExperimentKind::MasterEvolve);
        cfg.geometry = GeometrySpec { sites: None, l_over_rc: Some(10.5), lambda: Some(3) };
        cfg.time.t_max = Some(1.0);
        let errs = cfg.validate().unwrap_err();
        assert!(errs.iter().any(|e| e.contains("non-integer")), "{errs:?}");
    }

    #[test]
    fn collects_all_violations() {
        let cfg = RunConfig::from_toml(
            r#"
            experiment = "histogram"
            omega = -1.0
            [geometry]
            lambda = 2
            "#,
        )
        .unwrap();
        let errs = cfg.validate().unwrap_err();
        assert!(errs.len() >= 4, "{errs:?}");
        assert!(errs.iter().any(|e| e.contains("omega")));
        assert!(errs.iter().any(|e| e.contains("base_seed")));
        assert!(errs.iter().any(|e| e.contains("count")));
        assert!(errs.iter().any(|e| e.contains("sites or l_over_rc")));
    }

    #[test]
    fn missing_seed_is_an_error_for_ensembles() {
        let cfg = RunConfig::from_toml(
            r#"
            experiment = "histogram"
            [geometry]
            sites = 10
            lambda = 1
            [ensemble]
            count = 10
            "#,
        )
        .unwrap();
        let errs = cfg.validate().unwrap_err();
        assert_eq!(errs, vec!["ensemble.base_seed is required for ensemble experiments".to_string()]);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(RunConfig::from_toml("experiment = \"table1\"\nfoo = 1\n").is_err());
    }

    #[test]
    fn enumeration_limit_checked() {
        let cfg = RunConfig::from_toml(
            r#"
            experiment = "quantum-evolve"
            [geometry]
            sites = 240
            lambda = 1
            [time]
            t_max = 1.0
            "#,
        )
        .unwrap();
        let errs = cfg.validate().unwrap_err();
        assert!(errs.iter().any(|e| e.contains("enumeration limit")), "{errs:?}");
    }
}
