//! Run configuration: parameter blocks plus grid, tolerances, and output
//! settings, ingested from a single JSON file. Every field is optional and
//! defaults to the baseline calibration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::GridSpec;
use crate::equilibrium::SolverOptions;
use crate::error::{Error, Result};
use crate::params::{EnvParams, EnvPatch, ModelParams, SharedParams};

/// Solver and refinement tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Inner fixed-point residual.
    pub inner: f64,
    /// Outer participation-residual tolerance.
    pub outer: f64,
    /// Steady-state refinement width in K.
    pub refine: f64,
    /// Trajectory convergence tolerance.
    pub convergence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            inner: 1e-10,
            outer: 1e-9,
            refine: 1e-9,
            convergence: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tolerances.inner", self.inner),
            ("tolerances.outer", self.outer),
            ("tolerances.refine", self.refine),
            ("tolerances.convergence", self.convergence),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::config(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Output format for emitted tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
}

#[derive(Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawRunConfig {
    shared: SharedParams,
    ho: EnvPatch,
    ai: EnvPatch,
    grid: GridSpec,
    tolerances: Tolerances,
    output_dir: Option<PathBuf>,
    format: OutputFormat,
}

/// Full run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub shared: SharedParams,
    pub ho: EnvParams,
    pub ai: EnvParams,
    pub grid: GridSpec,
    pub tolerances: Tolerances,
    pub output_dir: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            shared: SharedParams::default(),
            ho: EnvParams::baseline_ho(),
            ai: EnvParams::baseline_ai(),
            grid: GridSpec::default(),
            tolerances: Tolerances::default(),
            output_dir: None,
            format: OutputFormat::Csv,
        }
    }
}

impl RunConfig {
    /// Parse and validate a configuration from JSON text.
    pub fn from_json_str(json: &str) -> Result<Self> {
        let raw: RawRunConfig =
            serde_json::from_str(json).map_err(|e| Error::config(e.to_string()))?;
        let cfg = RunConfig {
            shared: raw.shared,
            ho: raw.ho.apply(EnvParams::baseline_ho()),
            ai: raw.ai.apply(EnvParams::baseline_ai()),
            grid: raw.grid,
            tolerances: raw.tolerances,
            output_dir: raw.output_dir,
            format: raw.format,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Load and validate a configuration file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// Look up a named built-in preset. `appendix-d` is the bundled baseline
    /// calibration.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "appendix-d" => Ok(RunConfig::default()),
            other => Err(Error::config(format!("unknown preset {other:?}"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params().validate()?;
        self.grid.validate()?;
        self.tolerances.validate()?;
        Ok(())
    }

    /// Assemble the model parameter set from the config blocks.
    pub fn params(&self) -> ModelParams {
        ModelParams {
            shared: self.shared.clone(),
            ho: self.ho,
            ai: self.ai,
        }
    }

    /// Solver options implied by the configured tolerances.
    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            inner_tol: self.tolerances.inner,
            outer_tol: self.tolerances.outer,
            ..SolverOptions::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_roundtrip() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        let json = serde_json::to_string(&cfg).unwrap();
        let back = RunConfig::from_json_str(&json).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn empty_config_is_baseline() {
        let cfg = RunConfig::from_json_str("{}").unwrap();
        assert_eq!(cfg.params(), ModelParams::baseline());
        assert_eq!(cfg.grid, GridSpec::default());
    }

    #[test]
    fn partial_override() {
        let cfg = RunConfig::from_json_str(
            r#"{"shared": {"kappa": 3.0}, "ai": {"rho_h": 0.7}, "grid": {"k_max": 5.0}, "tolerances": {"outer": 1e-8}}"#,
        )
        .unwrap();
        assert_eq!(cfg.shared.kappa, 3.0);
        assert_eq!(cfg.shared.lambda, 0.15);
        assert_eq!(cfg.ai.rho_h, 0.7);
        assert_eq!(cfg.ai.gamma_w, 0.5);
        assert_eq!(cfg.grid.k_max, 5.0);
        assert_eq!(cfg.grid.n, 400);
        assert_eq!(cfg.tolerances.outer, 1e-8);
    }

    #[test]
    fn malformed_config_names_the_field() {
        let err = RunConfig::from_json_str(r#"{"grid": {"k_mim": 0.1}}"#).unwrap_err();
        assert!(err.to_string().contains("k_mim"));
        let err = RunConfig::from_json_str(r#"{"tolerances": {"outer": -1.0}}"#).unwrap_err();
        assert!(err.to_string().contains("tolerances.outer"));
    }

    #[test]
    fn unknown_preset_is_rejected() {
        assert!(RunConfig::preset("appendix-d").is_ok());
        assert!(RunConfig::preset("nope").is_err());
    }

    #[test]
    fn invalid_params_rejected_via_config() {
        let err = RunConfig::from_json_str(r#"{"ai": {"rho_l": 0.1}}"#).unwrap_err();
        assert!(err.to_string().contains("rho_l"));
    }
}
