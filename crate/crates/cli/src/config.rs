//! Per-command run configurations.
//!
//! Each is read from an optional JSON file with unknown keys rejected, then
//! overridden by command-line flags and validated before any computation.

use std::fmt;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use spincert::sets::Branch;
use spincert::{ErrorBudget, ScenarioParams};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Infeasible(String),
    VerificationFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::VerificationFailed(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
            CliError::Io(m) => write!(f, "{m}"),
            CliError::Infeasible(m) => write!(f, "infeasible: {m}"),
            CliError::VerificationFailed(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<spincert::Error> for CliError {
    fn from(e: spincert::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn scenario(two_j: u32, alpha: f64) -> Result<ScenarioParams, CliError> {
    Ok(ScenarioParams::from_raw(two_j, alpha)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundaryConfig {
    pub two_j: u32,
    pub alpha: f64,
    pub deltas: Vec<f64>,
    pub grid: usize,
    pub seed: u64,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        Self { two_j: 2, alpha: 0.66, deltas: vec![0.15, 0.3], grid: 1000, seed: 0 }
    }
}

impl BoundaryConfig {
    pub fn params(&self) -> Result<ScenarioParams, CliError> {
        if self.grid < 2 {
            return Err(CliError::Config(format!("grid = {} must be at least 2", self.grid)));
        }
        if let Some(d) = self.deltas.iter().find(|d| !(0.0..1.0).contains(*d)) {
            return Err(CliError::Config(format!("delta = {d} outside [0, 1)")));
        }
        scenario(self.two_j, self.alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub tau: f64,
    pub branch: Branch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertifyConfig {
    pub two_j: u32,
    pub alpha: f64,
    pub e1: Option<f64>,
    pub e2: Option<f64>,
    /// Used when no target is given: the target is estimated from samples.
    pub model: Option<ModelSpec>,
    pub samples: u64,
    pub epsilon: f64,
    pub omega: f64,
    pub grid: usize,
    pub seed: u64,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self {
            two_j: 2,
            alpha: 0.66,
            e1: None,
            e2: None,
            model: None,
            samples: 1_000_000,
            epsilon: 0.0,
            omega: 0.0,
            grid: 512,
            seed: 0,
        }
    }
}

impl CertifyConfig {
    pub fn validate(&self) -> Result<(ScenarioParams, ErrorBudget), CliError> {
        match (self.e1, self.e2, self.model) {
            (Some(_), Some(_), None) => {}
            (None, None, Some(_)) if self.samples > 0 => {}
            (None, None, Some(_)) => return Err(CliError::Config("samples must be positive".into())),
            _ => {
                return Err(CliError::Config(
                    "give either both e1 and e2, or a model (tau and branch) to sample from".into(),
                ))
            }
        }
        if self.grid < spincert::certify::MIN_GRID {
            return Err(CliError::Config(format!("grid = {} below {}", self.grid, spincert::certify::MIN_GRID)));
        }
        Ok((scenario(self.two_j, self.alpha)?, ErrorBudget::new(self.epsilon, self.omega)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoherentConfig {
    pub beta_abs_sq: f64,
    pub n_max: u32,
    pub two_j: u32,
    pub alpha: f64,
    pub grid: usize,
    pub seed: u64,
}

impl Default for CoherentConfig {
    fn default() -> Self {
        Self { beta_abs_sq: 1.0, n_max: 20, two_j: 2, alpha: 0.66, grid: 201, seed: 0 }
    }
}

impl CoherentConfig {
    pub fn params(&self) -> Result<ScenarioParams, CliError> {
        let p = scenario(self.two_j, self.alpha)?;
        let x = p.j_alpha();
        if !(x > 0.0 && x < std::f64::consts::FRAC_PI_2) {
            return Err(CliError::Config(format!("J·alpha = {x} outside (0, π/2)")));
        }
        if self.grid < 2 {
            return Err(CliError::Config(format!("grid = {} must be at least 2", self.grid)));
        }
        spincert::coherent::CoherentParams::new(self.beta_abs_sq, 0)?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub two_j: u32,
    pub alpha: f64,
    pub tau: f64,
    pub branch: Branch,
    pub samples: u64,
    pub seed: u64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self { two_j: 2, alpha: 0.66, tau: 0.0, branch: Branch::Lower, samples: 1_000_000, seed: 0 }
    }
}

impl SimulateConfig {
    pub fn params(&self) -> Result<ScenarioParams, CliError> {
        if self.samples == 0 {
            return Err(CliError::Config("samples must be positive".into()));
        }
        scenario(self.two_j, self.alpha)
    }
}
