use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{BatchSchedule, ScheduleMode, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::mlp::MAX_HIDDEN_LAYERS;
use crate::optim::OptimizerConfig;

pub const DEFAULT_EPOCHS: usize = 30;
pub const DEFAULT_SEED_COUNT: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub hidden_layers: usize,
    /// Width of every hidden layer.
    pub neurons: usize,
}

impl ModelConfig {
    pub fn baseline() -> Self {
        ModelConfig {
            hidden_layers: 1,
            neurons: 256,
        }
    }

    pub fn layer_sizes(&self, input_width: usize) -> Vec<usize> {
        let mut sizes = vec![input_width];
        sizes.extend(std::iter::repeat(self.neurons).take(self.hidden_layers));
        sizes.push(NUM_CLASSES);
        sizes
    }
}

/// Config fields a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    LearningRate,
    WeightDecay,
    Momentum,
    Rho,
    /// Sets β₁ = β₂ to the same value.
    BetasJoint,
    Beta1,
    Beta2,
    BatchSize,
    HiddenLayers,
    Neurons,
    ScheduleMode,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::LearningRate => "learning_rate",
            SweepAxis::WeightDecay => "weight_decay",
            SweepAxis::Momentum => "momentum",
            SweepAxis::Rho => "rho",
            SweepAxis::BetasJoint => "betas_joint",
            SweepAxis::Beta1 => "beta1",
            SweepAxis::Beta2 => "beta2",
            SweepAxis::BatchSize => "batch_size",
            SweepAxis::HiddenLayers => "hidden_layers",
            SweepAxis::Neurons => "neurons",
            SweepAxis::ScheduleMode => "schedule_mode",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepAxis::deserialize(serde::de::value::StrDeserializer::<serde::de::value::Error>::new(s))
            .map_err(|_| Error::Config(format!("unknown sweep axis {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValue {
    Integer(i64),
    Number(f64),
    Text(String),
}

impl SweepValue {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            SweepValue::Integer(i) => Some(i as f64),
            SweepValue::Number(x) => Some(x),
            SweepValue::Text(_) => None,
        }
    }

    pub fn as_count(&self) -> Option<usize> {
        match *self {
            SweepValue::Integer(i) => usize::try_from(i).ok(),
            SweepValue::Number(x) if x >= 0.0 && x.fract() == 0.0 => Some(x as usize),
            _ => None,
        }
    }
}

impl fmt::Display for SweepValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepValue::Integer(i) => write!(f, "{i}"),
            SweepValue::Number(x) => write!(f, "{x}"),
            SweepValue::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for SweepValue {
    fn from(x: f64) -> Self {
        SweepValue::Number(x)
    }
}

impl From<usize> for SweepValue {
    fn from(n: usize) -> Self {
        SweepValue::Integer(n as i64)
    }
}

impl From<&str> for SweepValue {
    fn from(s: &str) -> Self {
        SweepValue::Text(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<SweepValue>,
}

/// Everything needed to run one experiment (or one sweep of experiments).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawExperimentConfig")]
pub struct ExperimentConfig {
    pub name: String,
    /// Name trial seeds are derived from; defaults to `name`. Sweep points
    /// share their base experiment's seeds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_group: Option<String>,
    pub epochs: usize,
    /// Seed indices; each trial seed is derived from the seed group and index.
    pub seeds: Vec<u64>,
    /// Train on a stratified subsample of this many training images.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train_subsample: Option<usize>,
    pub measure_train_set: bool,
    pub export_traces: bool,
    pub model: ModelConfig,
    pub optimizer: OptimizerConfig,
    pub schedule: BatchSchedule,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SeedSpec {
    Count(u64),
    List(Vec<u64>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperimentConfig {
    name: Option<String>,
    seed_group: Option<String>,
    epochs: Option<usize>,
    seeds: Option<SeedSpec>,
    train_subsample: Option<usize>,
    measure_train_set: Option<bool>,
    export_traces: Option<bool>,
    model: Option<ModelConfig>,
    optimizer: Option<OptimizerConfig>,
    schedule: Option<BatchSchedule>,
    sweep: Option<SweepSpec>,
}

impl TryFrom<RawExperimentConfig> for ExperimentConfig {
    type Error = Error;

    fn try_from(raw: RawExperimentConfig) -> Result<Self> {
        let mut missing = Vec::new();
        if raw.name.is_none() {
            missing.push("name");
        }
        if raw.model.is_none() {
            missing.push("model");
        }
        if raw.optimizer.is_none() {
            missing.push("optimizer");
        }
        if raw.schedule.is_none() {
            missing.push("schedule");
        }
        if !missing.is_empty() {
            return Err(Error::Config(format!("missing fields: {}", missing.join(", "))));
        }
        let seeds = match raw.seeds {
            None => (0..DEFAULT_SEED_COUNT).collect(),
            Some(SeedSpec::Count(n)) => (0..n).collect(),
            Some(SeedSpec::List(list)) => list,
        };
        let cfg = ExperimentConfig {
            name: raw.name.unwrap(),
            seed_group: raw.seed_group,
            epochs: raw.epochs.unwrap_or(DEFAULT_EPOCHS),
            seeds,
            train_subsample: raw.train_subsample,
            measure_train_set: raw.measure_train_set.unwrap_or(false),
            export_traces: raw.export_traces.unwrap_or(false),
            model: raw.model.unwrap(),
            optimizer: raw.optimizer.unwrap(),
            schedule: raw.schedule.unwrap(),
            sweep: raw.sweep,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ExperimentConfig {
    /// One hidden layer of 256, batch 50 in random order, 30 epochs, 3 seeds.
    pub fn baseline(name: &str, optimizer: OptimizerConfig) -> Self {
        ExperimentConfig {
            name: name.to_string(),
            seed_group: None,
            epochs: DEFAULT_EPOCHS,
            seeds: (0..DEFAULT_SEED_COUNT).collect(),
            train_subsample: None,
            measure_train_set: false,
            export_traces: false,
            model: ModelConfig::baseline(),
            optimizer,
            schedule: BatchSchedule::new(ScheduleMode::Random, 50),
            sweep: None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            Error::Config(e.to_string().replace("config error: ", "").trim().to_string())
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialise config: {e}")))
    }

    pub fn seed_name(&self) -> &str {
        self.seed_group.as_deref().unwrap_or(&self.name)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.name.trim().is_empty() {
            return bad("name must not be empty".into());
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        if self.seeds.is_empty() {
            return bad("seeds must not be empty".into());
        }
        if self.seeds.iter().collect::<BTreeSet<_>>().len() != self.seeds.len() {
            return bad(format!("seeds contain duplicates: {:?}", self.seeds));
        }
        if !(1..=MAX_HIDDEN_LAYERS).contains(&self.model.hidden_layers) {
            return bad(format!(
                "model.hidden_layers = {} must be between 1 and {MAX_HIDDEN_LAYERS}",
                self.model.hidden_layers
            ));
        }
        if self.model.neurons == 0 {
            return bad("model.neurons must be at least 1".into());
        }
        if self.train_subsample == Some(0) {
            return bad("train_subsample must be at least 1".into());
        }
        self.optimizer.validate()?;
        self.schedule
            .validate()
            .map_err(|e| match e {
                Error::Input(msg) => Error::Config(format!("schedule: {msg}")),
                other => other,
            })?;
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return bad("sweep.values must not be empty".into());
            }
            for v in &sweep.values {
                super::sweep::apply(self, sweep.axis, v)?;
            }
        }
        Ok(())
    }

    /// SHA-256 of the config's canonical JSON form (sorted keys), so the
    /// hash ignores key order, comments and formatting of the source file.
    pub fn config_hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serialises to JSON");
        let digest = Sha256::digest(value.to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
