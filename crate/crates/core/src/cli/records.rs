//! Result files: the long-format per-epoch CSV, the accuracy × metric
//! products table, the JSON summary and the run manifest.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{EpochAggregate, EpochMetrics, EpochRecord, ExperimentResult, Split, TrialRecord};
use crate::metrics::MetricSummary;

pub const EPOCHS_CSV: &str = "epochs.csv";
pub const PRODUCTS_CSV: &str = "products.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const MANIFEST_JSON: &str = "manifest.json";
pub const CONFIG_TOML: &str = "config.toml";

pub const EPOCH_COLUMNS: [&str; 16] = [
    "experiment",
    "seed",
    "epoch",
    "split",
    "accuracy",
    "layer",
    "sparsity",
    "selectivity_mean",
    "selectivity_std",
    "aggregate_uniform_sparsity",
    "aggregate_uniform_selectivity_mean",
    "aggregate_uniform_selectivity_std",
    "aggregate_weighted_sparsity",
    "aggregate_weighted_selectivity_mean",
    "aggregate_weighted_selectivity_std",
    "diverged",
];

pub const PRODUCT_COLUMNS: [&str; 10] = [
    "experiment",
    "seed",
    "epoch",
    "split",
    "aggregate",
    "accuracy",
    "sparsity",
    "selectivity_mean",
    "accuracy_x_sparsity",
    "accuracy_x_selectivity",
];

/// 17 significant digits, enough to reproduce every `f64` exactly.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::format(path, e.to_string())
}

/// One row per (trial, epoch, split, layer); a diverged epoch is a single
/// row with empty metric fields.
pub fn write_epochs_csv<W: Write>(trials: &[&TrialRecord], out: W) -> Result<()> {
    let path = Path::new(EPOCHS_CSV);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(EPOCH_COLUMNS).map_err(|e| csv_err(path, e))?;
    for trial in trials {
        for rec in &trial.records {
            let head = [
                trial.experiment.clone(),
                trial.seed.to_string(),
                rec.epoch.to_string(),
                rec.split.to_string(),
            ];
            match &rec.metrics {
                None => {
                    let mut row: Vec<String> = head.to_vec();
                    row.extend(std::iter::repeat(String::new()).take(11));
                    row.push("true".into());
                    w.write_record(&row).map_err(|e| csv_err(path, e))?;
                }
                Some(m) => {
                    for (l, layer) in m.layers.iter().enumerate() {
                        let mut row: Vec<String> = head.to_vec();
                        row.push(fmt_real(m.accuracy));
                        row.push(l.to_string());
                        for s in [layer, &m.uniform, &m.weighted] {
                            row.push(fmt_real(s.sparsity));
                            row.push(fmt_real(s.selectivity_mean));
                            row.push(fmt_real(s.selectivity_std));
                        }
                        row.push("false".into());
                        w.write_record(&row).map_err(|e| csv_err(path, e))?;
                    }
                }
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Deserialize)]
struct EpochRow {
    experiment: String,
    seed: u64,
    epoch: usize,
    split: String,
    accuracy: Option<f64>,
    layer: Option<usize>,
    sparsity: Option<f64>,
    selectivity_mean: Option<f64>,
    selectivity_std: Option<f64>,
    aggregate_uniform_sparsity: Option<f64>,
    aggregate_uniform_selectivity_mean: Option<f64>,
    aggregate_uniform_selectivity_std: Option<f64>,
    aggregate_weighted_sparsity: Option<f64>,
    aggregate_weighted_selectivity_mean: Option<f64>,
    aggregate_weighted_selectivity_std: Option<f64>,
    diverged: bool,
}

fn summary(a: Option<f64>, b: Option<f64>, c: Option<f64>) -> Option<MetricSummary> {
    Some(MetricSummary {
        sparsity: a?,
        selectivity_mean: b?,
        selectivity_std: c?,
    })
}

/// Parses a file written by [`write_epochs_csv`] back into trial records.
pub fn read_epochs_csv<R: Read>(input: R, path: &Path) -> Result<Vec<TrialRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    if headers.iter().ne(EPOCH_COLUMNS.iter().copied()) {
        return Err(Error::format(
            path,
            format!("unexpected header {:?}", headers.iter().collect::<Vec<_>>()),
        ));
    }
    let mut trials: Vec<TrialRecord> = Vec::new();
    for (i, row) in reader.deserialize::<EpochRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| csv_err(path, e))?;
        let bad = |msg: &str| Error::format(path, format!("line {line}: {msg}"));
        let split: Split = row.split.parse().map_err(|_| bad("unknown split"))?;

        let pos = match trials
            .iter()
            .position(|t| t.experiment == row.experiment && t.seed == row.seed)
        {
            Some(p) => p,
            None => {
                trials.push(TrialRecord {
                    experiment: row.experiment.clone(),
                    seed: row.seed,
                    records: Vec::new(),
                });
                trials.len() - 1
            }
        };
        let records = &mut trials[pos].records;
        let same_epoch = records
            .last()
            .is_some_and(|r: &EpochRecord| r.epoch == row.epoch && r.split == split);

        if row.diverged {
            if same_epoch {
                return Err(bad("diverged row repeats an epoch"));
            }
            records.push(EpochRecord {
                epoch: row.epoch,
                split,
                metrics: None,
            });
            continue;
        }
        let layer = summary(row.sparsity, row.selectivity_mean, row.selectivity_std)
            .ok_or_else(|| bad("missing layer metrics"))?;
        let uniform = summary(
            row.aggregate_uniform_sparsity,
            row.aggregate_uniform_selectivity_mean,
            row.aggregate_uniform_selectivity_std,
        )
        .ok_or_else(|| bad("missing uniform aggregate"))?;
        let weighted = summary(
            row.aggregate_weighted_sparsity,
            row.aggregate_weighted_selectivity_mean,
            row.aggregate_weighted_selectivity_std,
        )
        .ok_or_else(|| bad("missing weighted aggregate"))?;
        let accuracy = row.accuracy.ok_or_else(|| bad("missing accuracy"))?;
        let layer_index = row.layer.ok_or_else(|| bad("missing layer index"))?;

        if !same_epoch {
            records.push(EpochRecord {
                epoch: row.epoch,
                split,
                metrics: Some(EpochMetrics {
                    accuracy,
                    layers: Vec::new(),
                    uniform,
                    weighted,
                }),
            });
        }
        let metrics = records
            .last_mut()
            .and_then(|r| r.metrics.as_mut())
            .ok_or_else(|| bad("metrics row follows a diverged row of the same epoch"))?;
        if layer_index != metrics.layers.len() {
            return Err(bad(&format!(
                "layer {layer_index} out of order (expected {})",
                metrics.layers.len()
            )));
        }
        if metrics.accuracy != accuracy || metrics.uniform != uniform || metrics.weighted != weighted {
            return Err(bad("epoch-level values differ between layer rows"));
        }
        metrics.layers.push(layer);
    }
    Ok(trials)
}

pub fn load_epochs_csv(path: &Path) -> Result<Vec<TrialRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_epochs_csv(std::io::BufReader::new(file), path)
}

/// Accuracy × metric products, one row per (trial, epoch, split, aggregate).
pub fn write_products_csv<W: Write>(trials: &[&TrialRecord], out: W) -> Result<()> {
    let path = Path::new(PRODUCTS_CSV);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PRODUCT_COLUMNS).map_err(|e| csv_err(path, e))?;
    for trial in trials {
        for rec in &trial.records {
            let Some(m) = &rec.metrics else { continue };
            for (kind, s) in [("uniform", &m.uniform), ("weighted", &m.weighted)] {
                w.write_record([
                    trial.experiment.clone(),
                    trial.seed.to_string(),
                    rec.epoch.to_string(),
                    rec.split.to_string(),
                    kind.to_string(),
                    fmt_real(m.accuracy),
                    fmt_real(s.sparsity),
                    fmt_real(s.selectivity_mean),
                    fmt_real(m.accuracy * s.sparsity),
                    fmt_real(m.accuracy * s.selectivity_mean),
                ])
                .map_err(|e| csv_err(path, e))?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub experiment: String,
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub epochs: usize,
    pub diverged_trials: usize,
    /// Test-set mean ± standard error at the final epoch.
    #[serde(rename = "final")]
    pub last: Option<EpochAggregate>,
    pub per_epoch: Vec<EpochAggregate>,
}

pub fn summarize(result: &ExperimentResult) -> ExperimentSummary {
    ExperimentSummary {
        experiment: result.experiment.clone(),
        config_hash: result.config.config_hash(),
        seeds: result.trials.iter().map(|t| t.seed).collect(),
        epochs: result.config.epochs,
        diverged_trials: result.trials.iter().filter(|t| t.diverged()).count(),
        last: result.final_test().cloned(),
        per_epoch: result.epochs.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedEntry {
    pub index: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_name: String,
    pub config_hash: String,
    pub seed_group: String,
    pub seeds: Vec<SeedEntry>,
    pub software_version: String,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<PathBuf>,
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::format(path, format!("cannot serialise: {e}")))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}
