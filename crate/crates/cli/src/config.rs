//! Scenario and sweep configuration: JSON with strict field checking, so a
//! config round-trips byte-identically and typos fail loudly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use nhqfi_core::linalg::tol;
use nhqfi_core::models::DEFAULT_ME_RATE_SCALE;

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum ModelConfig {
    #[serde(rename = "general2x2")]
    General2x2 { r: f64, s: f64, tau: f64, phi: f64 },
    #[serde(rename = "gain_loss")]
    GainLoss { omega0: f64, g: f64, gamma: f64 },
    #[serde(rename = "decaying_qubit")]
    DecayingQubit { omega: f64, gamma: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub theta: f64,
    pub x: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FormalismId {
    #[serde(rename = "metric")]
    Metric,
    #[serde(rename = "norm")]
    Norm,
    #[serde(rename = "nj")]
    Nj,
    #[serde(rename = "me")]
    Me,
}

impl FormalismId {
    pub fn label(&self) -> &'static str {
        match self {
            FormalismId::Metric => "metric",
            FormalismId::Norm => "norm",
            FormalismId::Nj => "nj",
            FormalismId::Me => "me",
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    /// Relative tolerance of the region classifier.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelConfig,
    pub state: StateConfig,
    pub grid: GridConfig,
    pub formalisms: Vec<FormalismId>,
    /// Output directory; overridden by --out-dir and NHQFI_OUT_DIR.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceConfig>,
    /// Gain-loss dissipator scale relative to a 2 gamma prefactor.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub me_rate_scale: Option<f64>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: ScenarioConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.formalisms.is_empty() {
            return Err(CliError::Config("formalisms list must not be empty".into()));
        }
        let mut seen = self.formalisms.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.formalisms.len() {
            return Err(CliError::Config("formalisms list has duplicates".into()));
        }
        if self.grid.points < 2 {
            return Err(CliError::Config("grid needs at least 2 points".into()));
        }
        if self.grid.t_max <= 0.0 || !self.grid.t_max.is_finite() {
            return Err(CliError::Config("t_max must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.state.theta)
            || self.state.x * self.state.x > self.state.theta * (1.0 - self.state.theta) + 1e-15
        {
            return Err(CliError::Config(format!(
                "state (theta = {}, x = {}) violates positivity",
                self.state.theta, self.state.x
            )));
        }
        let me_requested = self
            .formalisms
            .iter()
            .any(|f| matches!(f, FormalismId::Me | FormalismId::Nj));
        match self.model {
            ModelConfig::General2x2 { .. } => {
                if me_requested {
                    return Err(CliError::Config(
                        "the general2x2 model defines no jump operators; formalisms 'me' and 'nj' are unavailable"
                            .into(),
                    ));
                }
                if self.me_rate_scale.is_some() {
                    return Err(CliError::Config(
                        "me_rate_scale applies to the gain_loss model only".into(),
                    ));
                }
            }
            ModelConfig::DecayingQubit { gamma, .. } => {
                if gamma < 0.0 {
                    return Err(CliError::Config("gamma must be non-negative".into()));
                }
                if let Some(scale) = self.me_rate_scale {
                    if (scale - DEFAULT_ME_RATE_SCALE).abs() > 1e-12 {
                        return Err(CliError::Config(
                            "me_rate_scale overrides apply to the gain_loss model only; the decaying qubit rate is fixed at 4 gamma"
                                .into(),
                        ));
                    }
                }
            }
            ModelConfig::GainLoss { gamma, .. } => {
                if gamma < 0.0 {
                    return Err(CliError::Config("gamma must be non-negative".into()));
                }
                if let Some(scale) = self.me_rate_scale {
                    if scale < 0.0 {
                        return Err(CliError::Config(
                            "me_rate_scale must be non-negative".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn me_rate_scale(&self) -> f64 {
        self.me_rate_scale.unwrap_or(DEFAULT_ME_RATE_SCALE)
    }

    pub fn region_tolerance(&self) -> f64 {
        self.tolerances
            .as_ref()
            .and_then(|t| t.region)
            .unwrap_or(tol::EIGEN_DEGENERACY)
    }

    pub fn wants(&self, id: FormalismId) -> bool {
        self.formalisms.contains(&id)
    }
}

/// Cartesian sweep over numeric parameters of a base scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: ScenarioConfig,
    /// Parameter paths ("model.g", "state.theta", ...) to value lists.
    pub sweep: BTreeMap<String, Vec<f64>>,
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: SweepConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if config.sweep.is_empty() {
            return Err(CliError::Config("sweep section must not be empty".into()));
        }
        for (key, values) in &config.sweep {
            if values.is_empty() {
                return Err(CliError::Config(format!("sweep key {key:?} has no values")));
            }
            // check the key is applicable before running anything
            let mut probe = config.base.clone();
            apply_override(&mut probe, key, values[0])?;
        }
        Ok(config)
    }

    /// All cartesian points in deterministic (BTreeMap key, value index) order.
    pub fn points(&self) -> Vec<Vec<(String, f64)>> {
        let mut out: Vec<Vec<(String, f64)>> = vec![Vec::new()];
        for (key, values) in &self.sweep {
            let mut next = Vec::with_capacity(out.len() * values.len());
            for assignment in &out {
                for &v in values {
                    let mut a = assignment.clone();
                    a.push((key.clone(), v));
                    next.push(a);
                }
            }
            out = next;
        }
        out
    }
}

/// Set one parameter of a scenario by dotted path.
pub fn apply_override(config: &mut ScenarioConfig, key: &str, value: f64) -> Result<(), CliError> {
    let unknown = || CliError::Config(format!("unknown sweep key {key:?} for this model"));
    match key {
        "state.theta" => config.state.theta = value,
        "state.x" => config.state.x = value,
        "grid.t_max" => config.grid.t_max = value,
        "me_rate_scale" => config.me_rate_scale = Some(value),
        _ => match (&mut config.model, key) {
            (ModelConfig::General2x2 { r, .. }, "model.r") => *r = value,
            (ModelConfig::General2x2 { s, .. }, "model.s") => *s = value,
            (ModelConfig::General2x2 { tau, .. }, "model.tau") => *tau = value,
            (ModelConfig::General2x2 { phi, .. }, "model.phi") => *phi = value,
            (ModelConfig::GainLoss { omega0, .. }, "model.omega0") => *omega0 = value,
            (ModelConfig::GainLoss { g, .. }, "model.g") => *g = value,
            (ModelConfig::GainLoss { gamma, .. }, "model.gamma") => *gamma = value,
            (ModelConfig::DecayingQubit { omega, .. }, "model.omega") => *omega = value,
            (ModelConfig::DecayingQubit { gamma, .. }, "model.gamma") => *gamma = value,
            _ => return Err(unknown()),
        },
    }
    Ok(())
}
