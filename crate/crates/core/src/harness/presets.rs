//! Named experiment configurations covering every studied condition.

use crate::data::ScheduleMode;
use crate::harness::config::{ExperimentConfig, SweepAxis, SweepSpec, SweepValue};
use crate::optim::{OptimizerConfig, OptimizerKind};

/// Batch sizes of the batch-size study.
pub const BATCH_SIZES: [usize; 7] = [1, 5, 10, 50, 200, 500, 1000];
/// Hidden-layer widths of the width study.
pub const NEURON_COUNTS: [usize; 7] = [64, 128, 256, 384, 512, 640, 768];
/// Momentum and ρ values; β values replace the leading 0.0 with 1e-4.
pub const DECAY_GRID: [f64; 11] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.999];

/// `n` points evenly spaced in log10 between `10^lo` and `10^hi`.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![10f64.powf(lo)];
    }
    (0..n)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (n - 1) as f64))
        .collect()
}

pub fn weight_decay_grid() -> Vec<f64> {
    logspace(-5.0, 1.0, 11)
}

pub fn learning_rate_grid() -> Vec<f64> {
    logspace(-5.0, 3.0, 15)
}

pub fn betas_grid() -> Vec<f64> {
    let mut g = DECAY_GRID.to_vec();
    g[0] = 1e-4;
    g
}

/// Most hidden layers studied per optimizer: SGD and Adagrad stop at 4.
pub fn max_hidden_layers(kind: OptimizerKind) -> usize {
    match kind {
        OptimizerKind::Sgd | OptimizerKind::Adagrad => 4,
        _ => 5,
    }
}

fn baseline(name: String, kind: OptimizerKind) -> ExperimentConfig {
    ExperimentConfig::baseline(&name, OptimizerConfig::baseline(kind))
}

fn swept<V: Into<SweepValue>>(
    mut cfg: ExperimentConfig,
    axis: SweepAxis,
    values: impl IntoIterator<Item = V>,
) -> ExperimentConfig {
    cfg.sweep = Some(SweepSpec {
        axis,
        values: values.into_iter().map(Into::into).collect(),
    });
    cfg
}

/// Every preset, in a stable order.
pub fn all_presets() -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    for kind in OptimizerKind::STUDIED {
        out.push(baseline(format!("baseline-{kind}"), kind));
    }
    for kind in OptimizerKind::STUDIED {
        let b = |what: &str| baseline(format!("{kind}-{what}"), kind);
        out.push(swept(b("weight-decay"), SweepAxis::WeightDecay, weight_decay_grid()));
        out.push(swept(b("learning-rate"), SweepAxis::LearningRate, learning_rate_grid()));
        match kind {
            OptimizerKind::Sgd => out.push(swept(b("momentum"), SweepAxis::Momentum, DECAY_GRID)),
            OptimizerKind::Adadelta => out.push(swept(b("rho"), SweepAxis::Rho, DECAY_GRID)),
            OptimizerKind::Adam => {
                out.push(swept(b("betas"), SweepAxis::BetasJoint, betas_grid()));
                out.push(swept(b("beta1"), SweepAxis::Beta1, betas_grid()));
                out.push(swept(b("beta2"), SweepAxis::Beta2, betas_grid()));
            }
            _ => {}
        }
        out.push(swept(b("batch-size"), SweepAxis::BatchSize, BATCH_SIZES));

        let mut consecutive = b("consecutive");
        consecutive.schedule.batch_size = 1;
        out.push(swept(
            consecutive,
            SweepAxis::ScheduleMode,
            ["consecutive_run:1", "consecutive_run:5", "consecutive_run:10"],
        ));

        out.push(swept(b("neurons"), SweepAxis::Neurons, NEURON_COUNTS));
        let mut neurons_b1 = b("neurons-batch1");
        neurons_b1.schedule.batch_size = 1;
        out.push(swept(neurons_b1, SweepAxis::Neurons, NEURON_COUNTS));

        out.push(swept(b("hidden-layers"), SweepAxis::HiddenLayers, 1..=max_hidden_layers(kind)));
        out.push(swept(
            b("class-diversity"),
            SweepAxis::ScheduleMode,
            ["single_class", "pair_class", "five_class", "random"],
        ));

        let mut sorted = b("sorted");
        sorted.epochs = 100;
        out.push(swept(sorted, SweepAxis::ScheduleMode, ["random", "sorted"]));
    }

    let mut sgd = baseline("sgd_combined".into(), OptimizerKind::Sgd);
    sgd.schedule.batch_size = 1;
    sgd.optimizer.momentum = 0.9;
    out.push(sgd);

    let mut adam = baseline("adam_combined".into(), OptimizerKind::Adam);
    adam.schedule.mode = ScheduleMode::SingleClass;
    adam.model.neurons = 768;
    out.push(adam);
    out
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    all_presets().into_iter().find(|c| c.name == name)
}

pub fn preset_names() -> Vec<String> {
    all_presets().into_iter().map(|c| c.name).collect()
}
