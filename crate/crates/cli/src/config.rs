//! JSON run configuration.

use std::path::PathBuf;

use gfb_core::cartan::{ANALYTIC_TOL, DEFAULT_FLOW_EPS};
use gfb_core::flow::{PathSegment, CLOSURE_TOL, MIN_STEPS};
use gfb_core::klein::IsotropySearch;
use gfb_core::DEFAULT_STEP;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub example: String,
    #[serde(default)]
    pub params: Value,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub validate: ValidateConfig,
    #[serde(default)]
    pub flow: FlowConfig,
    #[serde(default)]
    pub curvature: CurvatureConfig,
    #[serde(default)]
    pub isotropy: IsotropyConfig,
}

fn default_h() -> f64 {
    DEFAULT_STEP
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateConfig {
    pub samples: usize,
    /// Defaults to the analytic tolerance scaled by `(h / 1e-4)²`.
    pub tol: Option<f64>,
    /// Fundamental directions probed with the equivariance and horizontality checks.
    pub equivariance_points: usize,
    pub flow_eps: f64,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self {
            samples: 100,
            tol: None,
            equivariance_points: 0,
            flow_eps: DEFAULT_FLOW_EPS,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfig {
    pub p0: Vec<f64>,
    pub segments: Vec<PathSegment>,
    #[serde(default = "default_path_steps")]
    pub steps: usize,
}

fn default_path_steps() -> usize {
    400
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    /// Generator; defaults to the first basis element of 𝔤.
    pub xi: Option<Vec<f64>>,
    pub points: Vec<Vec<f64>>,
    #[serde(rename = "T")]
    pub t: f64,
    pub steps: usize,
    pub closure_tol: f64,
    pub paths: Vec<PathConfig>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            xi: None,
            points: Vec::new(),
            t: 4.0 * std::f64::consts::PI,
            steps: 2000,
            closure_tol: CLOSURE_TOL,
            paths: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurvatureConfig {
    pub points: Vec<Vec<f64>>,
    /// Extra seeded uniform points.
    pub samples: usize,
    /// Overrides the catalog metric.
    pub eta: Option<Vec<Vec<f64>>>,
    /// Also evaluate the Bianchi residual (nested differences, step 1e-3).
    pub bianchi: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IsotropyConfig {
    pub points: Vec<Vec<f64>>,
    pub random_points: usize,
    pub search: IsotropySearch,
}

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> CliResult<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("h", self.h)?;
        if let Some(t) = self.validate.tol {
            positive("validate.tol", t)?;
        }
        positive("validate.flow_eps", self.validate.flow_eps)?;
        positive("flow.closure_tol", self.flow.closure_tol)?;
        positive("flow.T", self.flow.t)?;
        positive("isotropy.search.tol", self.isotropy.search.tol)?;
        positive("isotropy.search.cluster", self.isotropy.search.cluster)?;
        positive("isotropy.search.coarse", self.isotropy.search.coarse)?;
        if self.validate.samples == 0 {
            return Err(CliError::Config("validate.samples must be at least 1".into()));
        }
        if self.flow.steps < MIN_STEPS {
            return Err(CliError::Config(format!("flow.steps must be at least {MIN_STEPS}")));
        }
        Ok(())
    }

    pub fn validate_tol(&self) -> f64 {
        self.validate
            .tol
            .unwrap_or_else(|| gfb_core::cartan::scaled_tol(ANALYTIC_TOL, self.h))
    }
}
