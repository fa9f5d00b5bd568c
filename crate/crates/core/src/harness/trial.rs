use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{make_epoch, Dataset};
use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::matrix::Matrix;
use crate::metrics::{aggregate_uniform, aggregate_weighted, export_trace, trace_metrics, ActivationTrace, MetricSummary};
use crate::mlp::{argmax, MlpModel, EVAL_CHUNK};
use crate::optim::Optimizer;
use crate::rng::{seeded, INIT_STREAM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Test,
    Train,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Test => "test",
            Split::Train => "train",
        })
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "test" => Ok(Split::Test),
            "train" => Ok(Split::Train),
            other => Err(Error::Input(format!("unknown split {other:?}"))),
        }
    }
}

/// Accuracy and metrics from one captured pass over a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub accuracy: f64,
    pub layers: Vec<MetricSummary>,
    pub uniform: MetricSummary,
    pub weighted: MetricSummary,
}

/// Measurements after one epoch; `metrics` is `None` once the trial has diverged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub split: Split,
    pub metrics: Option<EpochMetrics>,
}

impl EpochRecord {
    pub fn diverged(&self) -> bool {
        self.metrics.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub experiment: String,
    pub seed: u64,
    pub records: Vec<EpochRecord>,
}

impl TrialRecord {
    pub fn diverged(&self) -> bool {
        self.records.iter().any(EpochRecord::diverged)
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &EpochRecord> {
        self.records.iter().filter(move |r| r.split == split)
    }

    pub fn last_test(&self) -> Option<&EpochRecord> {
        self.split(Split::Test).last()
    }
}

/// Runs the model over `data` in chunks with activation capture and returns
/// the metrics together with the trace they were computed from.
pub fn evaluate(model: &MlpModel, data: &Dataset) -> Result<(EpochMetrics, ActivationTrace)> {
    let mut capturing;
    let model = if model.capture_enabled() {
        model
    } else {
        capturing = model.clone();
        capturing.set_capture(true);
        &capturing
    };
    let n = data.len();
    if n == 0 {
        return Err(Error::Input("cannot evaluate on an empty dataset".into()));
    }
    let mut per_layer: Vec<Vec<Matrix>> = vec![Vec::new(); model.hidden_layers()];
    let mut correct = 0usize;
    let mut start = 0;
    while start < n {
        let end = (start + EVAL_CHUNK).min(n);
        let idx: Vec<usize> = (start..end).collect();
        let out = model.forward(&data.images().select_rows(&idx), None)?;
        correct += out
            .logits
            .row_iter()
            .zip(&data.labels()[start..end])
            .filter(|(row, &l)| argmax(row) == usize::from(l))
            .count();
        for (acc, h) in per_layer.iter_mut().zip(out.hidden_activations) {
            acc.push(h);
        }
        start = end;
    }
    let layers = per_layer
        .iter()
        .map(|parts| Matrix::vstack(parts))
        .collect::<Result<Vec<_>>>()?;
    let trace = ActivationTrace::new(layers, data.labels().to_vec())?;
    let per_layer = trace_metrics(&trace)?;
    let metrics = EpochMetrics {
        accuracy: correct as f64 / n as f64,
        uniform: aggregate_uniform(&per_layer)?,
        weighted: aggregate_weighted(&per_layer, &trace)?,
        layers: per_layer.iter().map(MetricSummary::from).collect(),
    };
    Ok((metrics, trace))
}

/// One seeded training run: train for `cfg.epochs` epochs, measuring the
/// test set (and optionally the training set) after each.
///
/// A non-finite loss marks the trial diverged; training stops and every later
/// epoch is recorded without metrics.
pub fn run_trial(
    cfg: &ExperimentConfig,
    seed: u64,
    train: &Dataset,
    test: &Dataset,
    trace_dir: Option<&Path>,
) -> Result<TrialRecord> {
    if cfg.epochs == 0 {
        return Err(Error::Config("epochs must be at least 1".into()));
    }
    let sizes = cfg.model.layer_sizes(train.input_width());
    let mut model = MlpModel::init_uniform(&sizes, &mut seeded(seed, INIT_STREAM))?;
    model.set_capture(true);
    let mut optimizer = Optimizer::new(cfg.optimizer, &model);
    let schedule = cfg.schedule.clone().with_seed(seed);

    let mut records = Vec::with_capacity(cfg.epochs * 2);
    let mut diverged = false;
    for epoch in 0..cfg.epochs {
        if !diverged {
            for batch in make_epoch(&schedule, train, epoch)? {
                let (x, y) = train.gather(&batch);
                let grads = model.backward(&x, &y)?;
                if !grads.loss.is_finite() {
                    diverged = true;
                    break;
                }
                optimizer.step(&mut model, &grads)?;
            }
            if !diverged && !model.all_finite() {
                diverged = true;
            }
            if diverged {
                log::warn!("{} seed {seed}: loss became non-finite in epoch {}", cfg.name, epoch + 1);
            }
        }
        let mut measure = |data: &Dataset, split: Split| -> Result<()> {
            let metrics = if diverged {
                None
            } else {
                let (metrics, trace) = evaluate(&model, data)?;
                if let (Some(root), true, Split::Test) = (trace_dir, cfg.export_traces, split) {
                    export_trace(&trace, &root.join(format!("seed{seed}")), epoch + 1)?;
                }
                Some(metrics)
            };
            records.push(EpochRecord {
                epoch: epoch + 1,
                split,
                metrics,
            });
            Ok(())
        };
        measure(test, Split::Test)?;
        if cfg.measure_train_set {
            measure(train, Split::Train)?;
        }
        if let Some(m) = records.iter().rev().find(|r| r.split == Split::Test).and_then(|r| r.metrics.as_ref()) {
            log::debug!(
                "{} seed {seed} epoch {}: accuracy {:.4} sparsity {:.4} selectivity {:.4}",
                cfg.name,
                epoch + 1,
                m.accuracy,
                m.uniform.sparsity,
                m.uniform.selectivity_mean
            );
        }
    }
    Ok(TrialRecord {
        experiment: cfg.name.clone(),
        seed,
        records,
    })
}
