//! Model parameters.
//!
//! The model compares two environments of one platform economy: a human-only
//! baseline (`Ho`) in which agents resolve problems with conventional
//! off-platform resources, and an AI environment (`Ai`) in which a stronger
//! assistant raises both private resolution rates and outside options.
//! Everything else (cost distributions, posting values, the ability
//! distribution) is shared between environments.
//!
//! Defaults reproduce the library's baseline calibration; any field can be
//! overridden through the JSON config (see [`crate::config`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Platform environment: human-only baseline or AI-augmented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Environment {
    Ho,
    Ai,
}

impl Environment {
    pub fn as_str(self) -> &'static str {
        match self {
            Environment::Ho => "ho",
            Environment::Ai => "ai",
        }
    }
}

impl std::str::FromStr for Environment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ho" => Ok(Environment::Ho),
            "ai" => Ok(Environment::Ai),
            other => Err(Error::config(format!(
                "unknown environment {other:?} (expected \"ho\" or \"ai\")"
            ))),
        }
    }
}

impl std::fmt::Display for Environment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Query type: routine lookups (`L`) or knowledge-enhancing problems (`H`).
/// Only resolved `H` queries expand the public archive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueryType {
    L,
    H,
}

/// Parameters shared by both environments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SharedParams {
    /// Archive depreciation rate per period, in (0,1).
    pub lambda: f64,
    /// Routine-task share of the domain, in (0,1).
    pub pi: f64,
    /// Knowledge increment per resolved H-query.
    pub delta_inc: f64,
    /// Archive-concern weight of answerers (>= 0).
    pub beta: f64,
    /// Private benefit from answering (>= 0).
    pub u: f64,
    /// Answering cost shifter at an empty archive.
    pub c_bar_cost: f64,
    /// Decay rate of the answering cost in the archive stock.
    pub kappa: f64,
    /// Upper support of the idiosyncratic answering-cost distribution.
    pub c_bar_support: f64,
    /// Private value of a public answer to an H-type query.
    pub v_h: f64,
    /// Private value of a public answer to an L-type query.
    pub v_l: f64,
    /// Mean posting cost (exponential posting-cost distribution).
    pub d_bar: f64,
    /// Lower bound of the uniform ability support.
    pub alpha_lo: f64,
    /// Upper bound of the uniform ability support.
    pub alpha_hi: f64,
    /// Ability slope of the private-resolution rate used by the
    /// ability-averaged failure integral. Zero collapses that integral to the
    /// baseline ability-independent rates.
    pub rho_slope: f64,
}

impl Default for SharedParams {
    fn default() -> Self {
        SharedParams {
            lambda: 0.15,
            pi: 0.4,
            delta_inc: 1.0,
            beta: 0.9,
            u: 0.3,
            c_bar_cost: 1.25,
            kappa: 5.0,
            c_bar_support: 1.0,
            v_h: 2.0,
            v_l: 1.0,
            d_bar: 0.5,
            alpha_lo: 0.001,
            alpha_hi: 0.2,
            rho_slope: 0.0,
        }
    }
}

/// Environment-specific parameters: outside-option sensitivities and private
/// resolution rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvParams {
    /// Outside-option sensitivity to the archive stock (>= 0).
    pub gamma_w: f64,
    /// Outside-option sensitivity to the routine-task share (>= 0).
    pub delta_w: f64,
    /// Private resolution rate for H-type queries (>= 0).
    pub rho_h: f64,
    /// Private resolution rate for L-type queries (>= rho_h).
    pub rho_l: f64,
}

impl EnvParams {
    /// Human-only baseline: outside options flat in the archive, slow private
    /// resolution.
    pub fn baseline_ho() -> Self {
        EnvParams {
            gamma_w: 0.0,
            delta_w: 0.0,
            rho_h: 0.1,
            rho_l: 0.3,
        }
    }

    /// AI environment: archive-sensitive outside options, fast private
    /// resolution with routine queries diverted at twice the H rate.
    pub fn baseline_ai() -> Self {
        EnvParams {
            gamma_w: 0.5,
            delta_w: 0.5,
            rho_h: 0.5,
            rho_l: 1.0,
        }
    }
}

/// Partial environment block as it appears in config files: any subset of
/// fields, merged onto the environment's baseline.
#[derive(Debug, Default, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub(crate) struct EnvPatch {
    gamma_w: Option<f64>,
    delta_w: Option<f64>,
    rho_h: Option<f64>,
    rho_l: Option<f64>,
}

impl EnvPatch {
    pub(crate) fn apply(self, mut base: EnvParams) -> EnvParams {
        if let Some(v) = self.gamma_w {
            base.gamma_w = v;
        }
        if let Some(v) = self.delta_w {
            base.delta_w = v;
        }
        if let Some(v) = self.rho_h {
            base.rho_h = v;
        }
        if let Some(v) = self.rho_l {
            base.rho_l = v;
        }
        base
    }
}

#[derive(Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawModelParams {
    shared: SharedParams,
    ho: EnvPatch,
    ai: EnvPatch,
}

/// Full parameter set: shared block plus one block per environment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelParams {
    pub shared: SharedParams,
    pub ho: EnvParams,
    pub ai: EnvParams,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            shared: SharedParams::default(),
            ho: EnvParams::baseline_ho(),
            ai: EnvParams::baseline_ai(),
        }
    }
}

impl ModelParams {
    /// The baseline calibration (same as `Default`).
    pub fn baseline() -> Self {
        Self::default()
    }

    pub fn env(&self, env: Environment) -> &EnvParams {
        match env {
            Environment::Ho => &self.ho,
            Environment::Ai => &self.ai,
        }
    }

    /// Parse parameters from a JSON string with blocks `shared`, `ho`, `ai`.
    /// Missing fields (or whole blocks) fall back to baseline values.
    pub fn from_json_str(json: &str) -> Result<Self> {
        let raw: RawModelParams =
            serde_json::from_str(json).map_err(|e| Error::config(e.to_string()))?;
        let p = ModelParams {
            shared: raw.shared,
            ho: raw.ho.apply(EnvParams::baseline_ho()),
            ai: raw.ai.apply(EnvParams::baseline_ai()),
        };
        p.validate()?;
        Ok(p)
    }

    /// Check every maintained parameter restriction. Returns the first
    /// violation as an [`Error::Params`] with the offending field named.
    pub fn validate(&self) -> Result<()> {
        let s = &self.shared;
        let unit_open = |name: &str, v: f64| -> Result<()> {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::params(format!("{name} must lie in (0,1), got {v}")))
            }
        };
        let positive = |name: &str, v: f64| -> Result<()> {
            if v > 0.0 {
                Ok(())
            } else {
                Err(Error::params(format!("{name} must be > 0, got {v}")))
            }
        };
        let nonneg = |name: &str, v: f64| -> Result<()> {
            if v >= 0.0 {
                Ok(())
            } else {
                Err(Error::params(format!("{name} must be >= 0, got {v}")))
            }
        };

        unit_open("shared.lambda", s.lambda)?;
        unit_open("shared.pi", s.pi)?;
        positive("shared.delta_inc", s.delta_inc)?;
        nonneg("shared.beta", s.beta)?;
        nonneg("shared.u", s.u)?;
        positive("shared.c_bar_cost", s.c_bar_cost)?;
        positive("shared.kappa", s.kappa)?;
        positive("shared.c_bar_support", s.c_bar_support)?;
        positive("shared.v_l", s.v_l)?;
        positive("shared.v_h", s.v_h)?;
        if s.v_h < s.v_l {
            return Err(Error::params(format!(
                "shared.v_h ({}) must be >= shared.v_l ({})",
                s.v_h, s.v_l
            )));
        }
        positive("shared.d_bar", s.d_bar)?;
        positive("shared.alpha_lo", s.alpha_lo)?;
        if s.alpha_lo >= s.alpha_hi {
            return Err(Error::params(format!(
                "ability bounds must satisfy alpha_lo < alpha_hi, got [{}, {}]",
                s.alpha_lo, s.alpha_hi
            )));
        }
        nonneg("shared.rho_slope", s.rho_slope)?;

        for (name, e) in [("ho", &self.ho), ("ai", &self.ai)] {
            nonneg(&format!("{name}.gamma_w"), e.gamma_w)?;
            nonneg(&format!("{name}.delta_w"), e.delta_w)?;
            nonneg(&format!("{name}.rho_h"), e.rho_h)?;
            nonneg(&format!("{name}.rho_l"), e.rho_l)?;
            if e.rho_l < e.rho_h {
                return Err(Error::params(format!(
                    "{name}.rho_l ({}) must be >= {name}.rho_h ({}): routine queries resolve privately at a weakly higher rate",
                    e.rho_l, e.rho_h
                )));
            }
        }

        // Dominance: the AI environment weakly improves outside options and
        // private resolution everywhere.
        let pairs = [
            ("gamma_w", self.ai.gamma_w, self.ho.gamma_w),
            ("delta_w", self.ai.delta_w, self.ho.delta_w),
            ("rho_h", self.ai.rho_h, self.ho.rho_h),
            ("rho_l", self.ai.rho_l, self.ho.rho_l),
        ];
        for (name, ai, ho) in pairs {
            if ai < ho {
                return Err(Error::params(format!(
                    "ai.{name} ({ai}) must weakly dominate ho.{name} ({ho})"
                )));
            }
        }
        Ok(())
    }

    /// Set a parameter by path, e.g. `"shared.kappa"` or `"ai.gamma_w"`.
    /// The short names `"gamma_w"`, `"kappa"`, and `"rho"` are accepted as
    /// aliases for the sweep presets. Unknown names are rejected without
    /// touching the parameter set.
    pub fn set_by_path(&mut self, path: &str, value: f64) -> Result<()> {
        let slot: &mut f64 = match path {
            "shared.lambda" => &mut self.shared.lambda,
            "shared.pi" => &mut self.shared.pi,
            "shared.delta_inc" => &mut self.shared.delta_inc,
            "shared.beta" => &mut self.shared.beta,
            "shared.u" => &mut self.shared.u,
            "shared.c_bar_cost" => &mut self.shared.c_bar_cost,
            "shared.kappa" | "kappa" => &mut self.shared.kappa,
            "shared.c_bar_support" => &mut self.shared.c_bar_support,
            "shared.v_h" => &mut self.shared.v_h,
            "shared.v_l" => &mut self.shared.v_l,
            "shared.d_bar" => &mut self.shared.d_bar,
            "shared.alpha_lo" => &mut self.shared.alpha_lo,
            "shared.alpha_hi" => &mut self.shared.alpha_hi,
            "shared.rho_slope" => &mut self.shared.rho_slope,
            "ho.gamma_w" => &mut self.ho.gamma_w,
            "ho.delta_w" => &mut self.ho.delta_w,
            "ho.rho_h" => &mut self.ho.rho_h,
            "ho.rho_l" => &mut self.ho.rho_l,
            "ai.gamma_w" | "gamma_w" => &mut self.ai.gamma_w,
            "ai.delta_w" => &mut self.ai.delta_w,
            "ai.rho_h" | "rho" => &mut self.ai.rho_h,
            "ai.rho_l" => &mut self.ai.rho_l,
            other => {
                return Err(Error::config(format!("unknown parameter path {other:?}")));
            }
        };
        *slot = value;
        Ok(())
    }
}
