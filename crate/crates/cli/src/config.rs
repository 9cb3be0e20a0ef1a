//! Experiment configuration: one versioned JSON file per experiment.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use lipfit::layers::{Activation, Family};
use lipfit::training::{EmpiricalSettings, FormulationKind, TrainConfig};
use lipfit::Domain64;

use crate::Failure;

pub const SCHEMA: &str = "lipfit-experiment/1";

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    #[serde(default)]
    pub domain: DomainSpec,
    #[serde(default)]
    pub dataset: DatasetSpec,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default)]
    pub formulation: FormulationSpec,
    #[serde(default)]
    pub training: TrainConfig,
    #[serde(default)]
    pub evaluation: EmpiricalSettings,
    #[serde(default)]
    pub simulation: SimulationSpec,
    /// Relative paths resolve against the config file's directory.
    pub output_dir: PathBuf,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Default for DomainSpec {
    fn default() -> Self {
        Self {
            lower: vec![-2.0, -10.0, -2.0],
            upper: vec![2.0, 10.0, 2.0],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSpec {
    pub grid_per_dim: usize,
    pub uniform_count: usize,
    pub test_count: usize,
    pub noise_bound: f64,
    pub seed: u64,
    /// Probes per axis for the initial branch-and-bound cells of the covering radius.
    pub cover_resolution: usize,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            grid_per_dim: 3,
            uniform_count: 500,
            test_count: 10_000,
            noise_bound: 0.0,
            seed: 1,
            cover_resolution: 8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lipnet,
    Mlp,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub width: usize,
    pub depth: usize,
    pub family: Family,
    pub activation: Activation,
    pub seed: u64,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self {
            kind: ModelKind::Lipnet,
            width: 128,
            depth: 6,
            family: Family::Sandwich,
            activation: Activation::Relu,
            seed: 11,
        }
    }
}

/// `rho` is absolute; `rho_rel` is a multiple of `L_data`. At most one may be set.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FormulationSpec {
    pub kind: FormulationKind,
    pub rho: Option<f64>,
    pub rho_rel: Option<f64>,
}

impl Default for FormulationSpec {
    fn default() -> Self {
        Self {
            kind: FormulationKind::P1,
            rho: None,
            rho_rel: None,
        }
    }
}

impl FormulationSpec {
    pub fn resolve_rho(&self, l_data: f64) -> Result<f64, Failure> {
        match (self.rho, self.rho_rel) {
            (Some(_), Some(_)) => Err(Failure::config("set either rho or rho_rel, not both")),
            (Some(r), None) => Ok(r),
            (None, Some(r)) => Ok(r * l_data),
            (None, None) => Ok(0.0),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSpec {
    pub dt: f64,
    pub horizon: f64,
    pub initial_conditions: usize,
    pub seed: u64,
}

impl Default for SimulationSpec {
    fn default() -> Self {
        Self {
            dt: lipfit::dynamics::DEFAULT_DT,
            horizon: lipfit::dynamics::DEFAULT_HORIZON,
            initial_conditions: 500,
            seed: 3,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|e| {
            Failure::config(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))
        })?;
        if cfg.output_dir.is_relative() {
            let base = path.parent().unwrap_or(Path::new("."));
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        if self.schema != SCHEMA {
            return Err(Failure::config(format!("unsupported schema '{}' (expected {SCHEMA})", self.schema)));
        }
        let d = self.domain()?;
        if d.dim() != 3 {
            return Err(Failure::config("the benchmark system is 3-dimensional; domain must have 3 axes"));
        }
        if self.dataset.grid_per_dim == 1 {
            return Err(Failure::config("dataset.grid_per_dim must be 0 or ≥ 2"));
        }
        if self.dataset.test_count == 0 || self.dataset.cover_resolution == 0 {
            return Err(Failure::config("dataset.test_count and dataset.cover_resolution must be ≥ 1"));
        }
        if self.model.width == 0 {
            return Err(Failure::config("model.width must be ≥ 1"));
        }
        self.training.validate().map_err(|e| Failure::config(format!("training: {e}")))?;
        if self.evaluation.pairs == 0 {
            return Err(Failure::config("evaluation.pairs must be ≥ 1"));
        }
        if self.simulation.initial_conditions == 0 || !(self.simulation.dt > 0.0) || !(self.simulation.horizon >= self.simulation.dt) {
            return Err(Failure::config("simulation needs initial_conditions ≥ 1 and 0 < dt ≤ horizon"));
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<Domain64, Failure> {
        Domain64::new(self.domain.lower.clone(), self.domain.upper.clone()).map_err(|e| Failure::config(format!("domain: {e}")))
    }

    pub fn data_dir(&self) -> PathBuf {
        self.output_dir.join("data")
    }

    pub fn runs_dir(&self) -> PathBuf {
        self.output_dir.join("runs")
    }

    pub fn sim_dir(&self) -> PathBuf {
        self.output_dir.join("sim")
    }

    /// Example configuration with every field spelled out.
    pub fn example() -> Self {
        Self {
            schema: SCHEMA.into(),
            domain: DomainSpec::default(),
            dataset: DatasetSpec::default(),
            model: ModelSpec::default(),
            formulation: FormulationSpec::default(),
            training: TrainConfig::default(),
            evaluation: EmpiricalSettings::default(),
            simulation: SimulationSpec::default(),
            output_dir: "out".into(),
        }
    }
}
