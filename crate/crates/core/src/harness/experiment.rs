use std::borrow::Cow;
use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Mnist};
use crate::error::Result;
use crate::harness::config::ExperimentConfig;
use crate::harness::sweep::expand;
use crate::harness::trial::{run_trial, EpochMetrics, Split, TrialRecord};
use crate::metrics::MetricSummary;
use crate::rng::derive_seed;

/// Seed index reserved for drawing the training subsample.
const SUBSAMPLE_SEED_INDEX: u64 = u64::MAX;

/// Mean and standard error of one quantity across seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation over √n; reported as 0 when `n = 1`.
    pub stderr: f64,
    pub n: usize,
    pub stderr_defined: bool,
}

impl Stat {
    pub fn from_values(values: &[f64]) -> Option<Stat> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Some(Stat {
                mean,
                stderr: 0.0,
                n,
                stderr_defined: false,
            });
        }
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
        Some(Stat {
            mean,
            stderr: var.sqrt() / (n as f64).sqrt(),
            n,
            stderr_defined: true,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricStats {
    pub sparsity: Stat,
    pub selectivity_mean: Stat,
    pub selectivity_std: Stat,
}

impl MetricStats {
    fn from_summaries<'a>(items: impl Iterator<Item = &'a MetricSummary> + Clone) -> Option<Self> {
        let collect = |f: fn(&MetricSummary) -> f64| items.clone().map(f).collect::<Vec<_>>();
        Some(MetricStats {
            sparsity: Stat::from_values(&collect(|m| m.sparsity))?,
            selectivity_mean: Stat::from_values(&collect(|m| m.selectivity_mean))?,
            selectivity_std: Stat::from_values(&collect(|m| m.selectivity_std))?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub accuracy: Stat,
    pub layers: Vec<MetricStats>,
    pub uniform: MetricStats,
    pub weighted: MetricStats,
}

/// Cross-seed summary of one epoch. `stats` is missing when every seed diverged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochAggregate {
    pub epoch: usize,
    pub split: Split,
    pub trials: usize,
    pub diverged_trials: usize,
    pub stats: Option<EpochStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub trials: Vec<TrialRecord>,
    pub epochs: Vec<EpochAggregate>,
}

impl ExperimentResult {
    pub fn from_trials(config: ExperimentConfig, trials: Vec<TrialRecord>) -> Self {
        ExperimentResult {
            experiment: config.name.clone(),
            epochs: aggregate(&trials),
            config,
            trials,
        }
    }

    /// Test-set summary at the final epoch.
    pub fn final_test(&self) -> Option<&EpochAggregate> {
        self.epochs.iter().rev().find(|e| e.split == Split::Test)
    }

    pub fn test_epochs(&self) -> impl Iterator<Item = &EpochAggregate> {
        self.epochs.iter().filter(|e| e.split == Split::Test)
    }
}

/// Per (epoch, split) mean and standard error over the non-diverged seeds.
pub fn aggregate(trials: &[TrialRecord]) -> Vec<EpochAggregate> {
    let mut groups: BTreeMap<(usize, u8), (Split, Vec<Option<&EpochMetrics>>)> = BTreeMap::new();
    for trial in trials {
        for rec in &trial.records {
            let key = (rec.epoch, rec.split as u8);
            groups
                .entry(key)
                .or_insert_with(|| (rec.split, Vec::new()))
                .1
                .push(rec.metrics.as_ref());
        }
    }
    groups
        .into_iter()
        .map(|((epoch, _), (split, entries))| {
            let present: Vec<&EpochMetrics> = entries.iter().flatten().copied().collect();
            EpochAggregate {
                epoch,
                split,
                trials: entries.len(),
                diverged_trials: entries.len() - present.len(),
                stats: epoch_stats(&present),
            }
        })
        .collect()
}

fn epoch_stats(present: &[&EpochMetrics]) -> Option<EpochStats> {
    let accuracy = Stat::from_values(&present.iter().map(|m| m.accuracy).collect::<Vec<_>>())?;
    let layer_count = present[0].layers.len();
    let layers = (0..layer_count)
        .map(|l| MetricStats::from_summaries(present.iter().map(move |m| &m.layers[l])))
        .collect::<Option<Vec<_>>>()?;
    Some(EpochStats {
        accuracy,
        layers,
        uniform: MetricStats::from_summaries(present.iter().map(|m| &m.uniform))?,
        weighted: MetricStats::from_summaries(present.iter().map(|m| &m.weighted))?,
    })
}

/// Training data for a config: the full training split, or its seeded
/// stratified subsample (shared by every experiment of one seed group).
pub fn training_data<'a>(cfg: &ExperimentConfig, train: &'a Dataset) -> Result<Cow<'a, Dataset>> {
    match cfg.train_subsample {
        Some(n) if n < train.len() => Ok(Cow::Owned(
            train.subsample(n, derive_seed(cfg.seed_name(), SUBSAMPLE_SEED_INDEX))?,
        )),
        _ => Ok(Cow::Borrowed(train)),
    }
}

/// Where and whether to write activation traces.
#[derive(Debug, Clone, Default)]
pub struct RunOptions<'a> {
    pub trace_root: Option<&'a Path>,
}

/// Runs every seed of one experiment in parallel and aggregates them. Any
/// sweep section is ignored; use [`run_config`] to expand it.
pub fn run_experiment(cfg: &ExperimentConfig, mnist: &Mnist, opts: &RunOptions) -> Result<ExperimentResult> {
    let mut results = run_all(std::slice::from_ref(cfg), mnist, opts)?;
    Ok(results.remove(0))
}

/// Expands a config's sweep (if any) and runs every point.
pub fn run_config(cfg: &ExperimentConfig, mnist: &Mnist, opts: &RunOptions) -> Result<Vec<ExperimentResult>> {
    run_all(&expand(cfg)?, mnist, opts)
}

/// Runs a batch of already-expanded experiments, parallel over every
/// (experiment, seed) pair. Results come back in input order.
pub fn run_all(configs: &[ExperimentConfig], mnist: &Mnist, opts: &RunOptions) -> Result<Vec<ExperimentResult>> {
    let data = configs
        .iter()
        .map(|c| {
            c.validate()?;
            training_data(c, &mnist.train)
        })
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, u64)> = configs
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.seeds.iter().map(move |&s| (i, s)))
        .collect();
    let trials = jobs
        .par_iter()
        .map(|&(i, index)| {
            let cfg = &configs[i];
            let seed = derive_seed(cfg.seed_name(), index);
            let trace_dir = opts
                .trace_root
                .map(|root| root.join(crate::harness::file_stem(&cfg.name)));
            let record = run_trial(cfg, seed, &data[i], &mnist.test, trace_dir.as_deref())?;
            log::info!(
                "finished {} seed index {index}{}",
                cfg.name,
                if record.diverged() { " (diverged)" } else { "" }
            );
            Ok((i, record))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut grouped: Vec<Vec<TrialRecord>> = vec![Vec::new(); configs.len()];
    for (i, record) in trials {
        grouped[i].push(record);
    }
    Ok(configs
        .iter()
        .zip(grouped)
        .map(|(c, t)| ExperimentResult::from_trials(c.clone(), t))
        .collect())
}
