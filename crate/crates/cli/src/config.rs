//! Tolerance and budget settings: built-in defaults, overridden by the
//! optional key=value file named by `ESL_CONFIG`, overridden in turn by
//! command-line flags.

use esl_core::info::CapacityOptions;
use esl_core::psdrank::{CertifyConfig, SolverConfig};

#[derive(Debug, Clone)]
pub struct Settings {
    pub solver_restarts: usize,
    pub solver_max_iters: usize,
    pub solver_success_threshold: f64,
    pub capacity_tol: f64,
    pub capacity_max_iter: usize,
    pub extraction_tolerance: f64,
}

impl Default for Settings {
    fn default() -> Self {
        let solver = SolverConfig::default();
        let capacity = CapacityOptions::default();
        let certify = CertifyConfig::default();
        Self {
            solver_restarts: solver.restarts,
            solver_max_iters: solver.max_iters,
            solver_success_threshold: solver.success_threshold,
            capacity_tol: capacity.tol,
            capacity_max_iter: capacity.max_iter,
            extraction_tolerance: certify.extraction_tolerance,
        }
    }
}

pub enum ConfigError {
    Io(String),
    Parse(String),
}

impl Settings {
    /// Defaults plus the `ESL_CONFIG` file, when the variable is set.
    pub fn load() -> Result<Self, ConfigError> {
        let mut settings = Settings::default();
        let Some(path) = std::env::var_os("ESL_CONFIG") else {
            return Ok(settings);
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| ConfigError::Io(format!("{}: {e}", path.to_string_lossy())))?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Parse(format!(
                    "line {}: expected key=value",
                    lineno + 1
                )));
            };
            let key = key.trim();
            let value = value.trim();
            let bad = |e: String| ConfigError::Parse(format!("line {}: {e}", lineno + 1));
            match key {
                "solver.restarts" => {
                    settings.solver_restarts = value.parse().map_err(|e| bad(format!("{e}")))?
                }
                "solver.max_iters" => {
                    settings.solver_max_iters = value.parse().map_err(|e| bad(format!("{e}")))?
                }
                "solver.success_threshold" => {
                    settings.solver_success_threshold =
                        value.parse().map_err(|e| bad(format!("{e}")))?
                }
                "capacity.tol" => {
                    settings.capacity_tol = value.parse().map_err(|e| bad(format!("{e}")))?
                }
                "capacity.max_iter" => {
                    settings.capacity_max_iter = value.parse().map_err(|e| bad(format!("{e}")))?
                }
                "certify.extraction_tolerance" => {
                    settings.extraction_tolerance =
                        value.parse().map_err(|e| bad(format!("{e}")))?
                }
                other => {
                    return Err(ConfigError::Parse(format!(
                        "line {}: unknown key {other}",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(settings)
    }

    pub fn solver_config(&self, seed: u64, parallel: bool) -> SolverConfig {
        SolverConfig {
            seed,
            restarts: self.solver_restarts,
            max_iters: self.solver_max_iters,
            success_threshold: self.solver_success_threshold,
            parallel,
        }
    }

    pub fn certify_config(&self, seed: u64, parallel: bool) -> CertifyConfig {
        CertifyConfig {
            extraction_tolerance: self.extraction_tolerance,
            use_solver: true,
            solver: self.solver_config(seed, parallel),
        }
    }

    pub fn capacity_options(&self, support: Option<Vec<usize>>) -> CapacityOptions {
        CapacityOptions { tol: self.capacity_tol, max_iter: self.capacity_max_iter, support }
    }
}
