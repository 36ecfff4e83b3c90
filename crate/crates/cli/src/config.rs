//! Declarative experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub models: Vec<ModelConfig>,
    /// Training samples per stage.
    pub n: usize,
    /// Out-of-sample evaluation paths, shared by every model.
    pub eval_paths: usize,
    pub epsilon: f64,
    pub max_iters: usize,
    #[serde(default)]
    pub time_cap: Option<f64>,
    /// Draw forward outcomes from the data instead of following the largest gap.
    #[serde(default)]
    pub sampled_forward: bool,
    #[serde(default)]
    pub radius_basis: RadiusBasis,
    /// SAA atoms per stage, required when `radius_basis` is `saa`.
    #[serde(default)]
    pub saa_atoms: Option<usize>,
    pub seeds: Seeds,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    InventoryDemand {
        #[serde(default)]
        overrides: Map<String, Value>,
    },
    InventoryPrice {
        #[serde(default)]
        overrides: Map<String, Value>,
    },
    Hydro {
        #[serde(default)]
        overrides: Map<String, Value>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Nominal,
    Robust,
    Cvar { alpha: f64, betas: Vec<f64> },
    /// Radii `γ·d_t` for each listed `γ` and the chosen radius basis `d_t`.
    Wasserstein { gammas: Vec<f64> },
}

/// Per-stage radius unit: the spread of the empirical measure, or its
/// transport distance to a fitted lognormal SAA measure. With `saa` every
/// model uses the SAA measure as its nominal distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RadiusBasis {
    #[default]
    Empirical,
    Saa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    /// Training paths.
    pub data: u64,
    /// SAA resampling and sampled forward passes.
    pub algorithm: u64,
    /// Evaluation paths.
    pub evaluation: u64,
}

/// One concrete model of the experiment after expanding parameter grids.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Nominal,
    Robust,
    Cvar { alpha: f64, beta: f64 },
    Wasserstein { gamma: f64 },
}

impl ModelSpec {
    /// Label used for directories and summary rows.
    pub fn label(&self) -> String {
        match self {
            ModelSpec::Nominal => "nominal".into(),
            ModelSpec::Robust => "robust".into(),
            ModelSpec::Cvar { alpha, beta } => format!("cvar_a{alpha}_b{beta}"),
            ModelSpec::Wasserstein { gamma } => format!("wasserstein_g{gamma}"),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ModelSpec::Nominal => "nominal",
            ModelSpec::Robust => "robust",
            ModelSpec::Cvar { .. } => "cvar",
            ModelSpec::Wasserstein { .. } => "wasserstein",
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display()), None))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            let field = field_in_message(&msg);
            CliError::config(msg, field)
        })?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), CliError> {
        let bad = |field: &str, msg: String| Err(CliError::config(msg, Some(field.to_string())));
        if self.models.is_empty() {
            return bad("models", "model list is empty".into());
        }
        for (i, m) in self.models.iter().enumerate() {
            match m {
                ModelConfig::Cvar { alpha, betas } => {
                    if !(*alpha > 0.0 && *alpha < 1.0) {
                        return bad(&format!("models[{i}].alpha"), format!("alpha must lie in (0, 1), got {alpha}"));
                    }
                    if betas.is_empty() || betas.iter().any(|b| !(0.0..=1.0).contains(b)) {
                        return bad(&format!("models[{i}].betas"), "betas must be a nonempty list in [0, 1]".into());
                    }
                }
                ModelConfig::Wasserstein { gammas } => {
                    if gammas.is_empty() || gammas.iter().any(|g| !g.is_finite() || *g < 0.0) {
                        return bad(&format!("models[{i}].gammas"), "gammas must be a nonempty list of finite nonnegative values".into());
                    }
                }
                ModelConfig::Nominal | ModelConfig::Robust => {}
            }
        }
        if self.n == 0 {
            return bad("n", "at least one training sample per stage is needed".into());
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon", format!("must be positive, got {}", self.epsilon));
        }
        if self.max_iters == 0 {
            return bad("max_iters", "must be positive".into());
        }
        if let Some(cap) = self.time_cap {
            if !(cap > 0.0) {
                return bad("time_cap", format!("must be positive, got {cap}"));
            }
        }
        if self.radius_basis == RadiusBasis::Saa && self.saa_atoms.is_none_or(|k| k == 0) {
            return bad("saa_atoms", "a positive atom count is required with the saa radius basis".into());
        }
        Ok(())
    }

    pub fn expand_models(&self) -> Vec<ModelSpec> {
        let mut out = Vec::new();
        for m in &self.models {
            match m {
                ModelConfig::Nominal => out.push(ModelSpec::Nominal),
                ModelConfig::Robust => out.push(ModelSpec::Robust),
                ModelConfig::Cvar { alpha, betas } => out.extend(betas.iter().map(|&beta| ModelSpec::Cvar { alpha: *alpha, beta })),
                ModelConfig::Wasserstein { gammas } => out.extend(gammas.iter().map(|&gamma| ModelSpec::Wasserstein { gamma })),
            }
        }
        out
    }
}

/// Pulls the field name out of serde's "missing field `x`" style messages.
fn field_in_message(msg: &str) -> Option<String> {
    ["missing field `", "unknown field `", "duplicate field `"].iter().find_map(|p| {
        let start = msg.find(p)? + p.len();
        let end = msg[start..].find('`')?;
        Some(msg[start..start + end].to_string())
    })
}

/// Applies `overrides` key by key on top of the serialized `defaults`.
pub fn merge_overrides<T: Serialize + for<'de> Deserialize<'de>>(defaults: &T, overrides: &Map<String, Value>) -> Result<T, CliError> {
    let mut value = serde_json::to_value(defaults).map_err(|e| CliError::config(e.to_string(), None))?;
    let obj = value.as_object_mut().expect("parameter sets serialize to objects");
    for (k, v) in overrides {
        if !obj.contains_key(k) {
            return Err(CliError::config(format!("unknown problem parameter `{k}`"), Some(format!("problem.overrides.{k}"))));
        }
        obj.insert(k.clone(), v.clone());
    }
    serde_json::from_value(value).map_err(|e| CliError::config(format!("invalid problem override: {e}"), Some("problem.overrides".into())))
}
