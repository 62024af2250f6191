//! Run configuration: one JSON file describes a reproducible experiment.

use std::path::{Path, PathBuf};

use halfspace::continuation::ContinuationOptions;
use halfspace::discretization::GridSpec;
use halfspace::kernels::Dimension;
use halfspace::operators::MuSpec;
use halfspace::solver::{IterationOptions, StartRule};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "HALFSPACE_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "halfspace-output";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub exponents: Option<ExponentConfig>,
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub continuation: ContinuationConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub p: f64,
    pub mu: MuSpec,
    /// Forcing level for `solve` and `eigen`.
    #[serde(default)]
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentConfig {
    pub q: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "R", default = "default_extent")]
    pub r: f64,
    #[serde(rename = "H", default = "default_extent")]
    pub h: f64,
    #[serde(default = "default_nodes_lateral")]
    pub nodes_lateral: usize,
    pub nodes_height: usize,
    #[serde(default = "default_grading")]
    pub grading: f64,
}

fn default_extent() -> f64 {
    20.0
}

fn default_nodes_lateral() -> usize {
    40
}

fn default_grading() -> f64 {
    2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub blowup_cap: f64,
    pub start: StartRule,
    /// Initial bracket for `kappa-star`.
    pub bracket: [f64; 2],
    pub bracket_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let it = IterationOptions::default();
        SolverConfig {
            tol: it.tolerance,
            max_iter: it.max_iterations,
            blowup_cap: it.blowup_cap,
            start: it.start,
            bracket: [0.05, 10.0],
            bracket_tol: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinuationConfig {
    pub start_kappa: f64,
    pub step: f64,
    pub max_points: usize,
    pub stop_kappa: Option<f64>,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        let c = ContinuationOptions::default();
        ContinuationConfig {
            start_kappa: c.start_kappa,
            step: c.step,
            max_points: c.max_points,
            stop_kappa: c.stop_kappa,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let dim = self.dimension()?;
        let pr = &self.problem;
        if !(pr.p > 1.0 && pr.p.is_finite()) {
            return Err(CliError::Config(format!("problem.p must exceed 1, got {}", pr.p)));
        }
        pr.mu.validate(dim).map_err(|e| CliError::Config(format!("problem.mu: {e}")))?;
        if let Some(k) = pr.kappa {
            positive("problem.kappa", k)?;
        }
        if let Some(e) = &self.exponents {
            if !(e.q > 1.0) || !(e.alpha >= 0.0) || !e.q.is_finite() || !e.alpha.is_finite() {
                return Err(CliError::Config(format!("exponents need q > 1 and alpha ≥ 0, got ({}, {})", e.q, e.alpha)));
            }
        }
        let g = &self.grid;
        positive("grid.R", g.r)?;
        positive("grid.H", g.h)?;
        if g.nodes_height < 2 || (dim != Dimension::One && g.nodes_lateral < 2) {
            return Err(CliError::Config("grid node counts must be at least 2".into()));
        }
        if !(g.grading >= 1.0 && g.grading.is_finite()) {
            return Err(CliError::Config(format!("grid.grading must be ≥ 1, got {}", g.grading)));
        }
        let s = &self.solver;
        positive("solver.tol", s.tol)?;
        positive("solver.blowup_cap", s.blowup_cap)?;
        positive("solver.bracket_tol", s.bracket_tol)?;
        if s.max_iter == 0 {
            return Err(CliError::Config("solver.max_iter must be positive".into()));
        }
        if !(s.bracket[0] > 0.0 && s.bracket[1] > s.bracket[0] && s.bracket[1].is_finite()) {
            return Err(CliError::Config(format!("solver.bracket must satisfy 0 < lo < hi, got {:?}", s.bracket)));
        }
        let c = &self.continuation;
        positive("continuation.start_kappa", c.start_kappa)?;
        positive("continuation.step", c.step)?;
        if c.max_points < 2 {
            return Err(CliError::Config("continuation.max_points must be at least 2".into()));
        }
        if let Some(k) = c.stop_kappa {
            positive("continuation.stop_kappa", k)?;
        }
        Ok(())
    }

    pub fn dimension(&self) -> Result<Dimension, CliError> {
        Dimension::try_from(self.problem.n).map_err(|_| CliError::Config(format!("problem.N must be 1, 2 or 3, got {}", self.problem.n)))
    }

    pub fn grid_spec(&self) -> Result<GridSpec, CliError> {
        Ok(GridSpec {
            dimension: self.dimension()?,
            lateral_extent: self.grid.r,
            height_extent: self.grid.h,
            nodes_lateral: self.grid.nodes_lateral,
            nodes_height: self.grid.nodes_height,
            grading: self.grid.grading,
        })
    }

    pub fn iteration_options(&self) -> IterationOptions {
        IterationOptions {
            tolerance: self.solver.tol,
            max_iterations: self.solver.max_iter,
            blowup_cap: self.solver.blowup_cap,
            start: self.solver.start,
            ..IterationOptions::default()
        }
    }

    pub fn continuation_options(&self) -> ContinuationOptions {
        let (q, alpha) = self.norm_exponents();
        ContinuationOptions {
            start_kappa: self.continuation.start_kappa,
            step: self.continuation.step,
            max_points: self.continuation.max_points,
            stop_kappa: self.continuation.stop_kappa,
            norm_q: q,
            norm_alpha: alpha,
            ..ContinuationOptions::default()
        }
    }

    /// `(q, α)` of the reported `L^q_α` norm.
    pub fn norm_exponents(&self) -> (f64, f64) {
        self.exponents.map_or((4.0, 0.0), |e| (e.q, e.alpha))
    }

    /// Flag, then config, then environment, then the built-in default.
    pub fn resolve_output_dir(&self, flag: Option<&Path>) -> PathBuf {
        flag.map(Path::to_path_buf)
            .or_else(|| self.output_dir.clone())
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "problem": {"N": 1, "p": 3, "mu": {"kind": "point_mass", "mass": 1}},
        "grid": {"H": 20, "nodes_height": 200}
    }"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.grid.grading, 2.0);
        assert_eq!(cfg.solver, SolverConfig::default());
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn echo_round_trips() {
        let cfg = RunConfig::from_json(MINIMAL).unwrap();
        let echo = serde_json::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_json(&echo).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_and_bad_ranges_are_rejected() {
        let extra = MINIMAL.replace("\"nodes_height\": 200", "\"nodes_height\": 200, \"spacing\": 1");
        assert!(matches!(RunConfig::from_json(&extra), Err(CliError::Config(m)) if m.contains("spacing")));
        let bad_n = MINIMAL.replace("\"N\": 1", "\"N\": 4");
        assert!(matches!(RunConfig::from_json(&bad_n), Err(CliError::Config(_))));
        let bad_p = MINIMAL.replace("\"p\": 3", "\"p\": 0.5");
        assert!(matches!(RunConfig::from_json(&bad_p), Err(CliError::Config(_))));
        let bad_mass = MINIMAL.replace("\"mass\": 1", "\"mass\": -1");
        assert!(matches!(RunConfig::from_json(&bad_mass), Err(CliError::Config(_))));
    }

    #[test]
    fn malformed_json_reports_the_line() {
        let err = RunConfig::from_json("{\n  \"problem\": \n}").unwrap_err();
        assert!(matches!(err, CliError::Config(m) if m.contains("line 3")));
    }
}
