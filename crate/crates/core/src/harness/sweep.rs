use crate::data::Mnist;
use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, SweepAxis, SweepSpec, SweepValue};
use crate::harness::experiment::{run_all, ExperimentResult, RunOptions};

/// The config of one sweep point: `base` with `axis` set to `value`, named
/// `<base>/<axis>=<value>` and seeded like the base experiment.
pub fn apply(base: &ExperimentConfig, axis: SweepAxis, value: &SweepValue) -> Result<ExperimentConfig> {
    let mut cfg = base.clone();
    cfg.sweep = None;
    cfg.seed_group = Some(base.seed_name().to_string());
    cfg.name = format!("{}/{axis}={value}", base.name);

    let real = || {
        value
            .as_f64()
            .ok_or_else(|| Error::Config(format!("sweep axis {axis} needs numbers, got {value:?}")))
    };
    let count = || {
        value.as_count().ok_or_else(|| {
            Error::Config(format!("sweep axis {axis} needs non-negative integers, got {value:?}"))
        })
    };
    match axis {
        SweepAxis::LearningRate => cfg.optimizer.learning_rate = real()?,
        SweepAxis::WeightDecay => cfg.optimizer.weight_decay = real()?,
        SweepAxis::Momentum => cfg.optimizer.momentum = real()?,
        SweepAxis::Rho => cfg.optimizer.rho = real()?,
        SweepAxis::BetasJoint => {
            let v = real()?;
            cfg.optimizer.betas = (v, v);
        }
        SweepAxis::Beta1 => cfg.optimizer.betas.0 = real()?,
        SweepAxis::Beta2 => cfg.optimizer.betas.1 = real()?,
        SweepAxis::BatchSize => cfg.schedule.batch_size = count()?,
        SweepAxis::HiddenLayers => cfg.model.hidden_layers = count()?,
        SweepAxis::Neurons => cfg.model.neurons = count()?,
        SweepAxis::ScheduleMode => {
            let SweepValue::Text(mode) = value else {
                return Err(Error::Config(format!(
                    "sweep axis {axis} needs mode names, got {value:?}"
                )));
            };
            cfg.schedule.mode = mode.parse()?;
            cfg.schedule.class_groups = None;
        }
    }
    cfg.validate()
        .map_err(|e| Error::Config(format!("sweep point {}: {}", cfg.name, strip(e))))?;
    Ok(cfg)
}

fn strip(e: Error) -> String {
    match e {
        Error::Config(msg) => msg,
        other => other.to_string(),
    }
}

/// One config per sweep value, or the config itself when it has no sweep.
pub fn expand(cfg: &ExperimentConfig) -> Result<Vec<ExperimentConfig>> {
    match &cfg.sweep {
        None => Ok(vec![cfg.clone()]),
        Some(SweepSpec { axis, values }) => values.iter().map(|v| apply(cfg, *axis, v)).collect(),
    }
}

/// Runs `base` once per value of `axis`.
pub fn run_sweep(
    base: &ExperimentConfig,
    axis: SweepAxis,
    values: &[SweepValue],
    mnist: &Mnist,
    opts: &RunOptions,
) -> Result<Vec<ExperimentResult>> {
    if values.is_empty() {
        return Err(Error::Config("a sweep needs at least one value".into()));
    }
    let points = values
        .iter()
        .map(|v| apply(base, axis, v))
        .collect::<Result<Vec<_>>>()?;
    run_all(&points, mnist, opts)
}
