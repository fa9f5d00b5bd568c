//! Hoyer sparsity and class-conditional mean activation selectivity over
//! captured hidden-layer activations, plus the two multi-layer aggregates.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::NUM_CLASSES;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Added to the selectivity denominator.
pub const SELECTIVITY_EPS: f64 = 1e-7;

/// Post-sigmoid activations of every hidden layer over one pass, with labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationTrace {
    layers: Vec<Matrix>,
    labels: Vec<u8>,
}

impl ActivationTrace {
    pub fn new(layers: Vec<Matrix>, labels: Vec<u8>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Input("activation trace has no layers".into()));
        }
        for (i, layer) in layers.iter().enumerate() {
            if layer.rows() != labels.len() {
                return Err(Error::Shape(format!(
                    "layer {i} has {} rows for {} labels",
                    layer.rows(),
                    labels.len()
                )));
            }
        }
        Ok(Self { layers, labels })
    }

    pub fn layers(&self) -> &[Matrix] {
        &self.layers
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn samples(&self) -> usize {
        self.labels.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerMetrics {
    pub sparsity: f64,
    pub selectivity_mean: f64,
    pub selectivity_std: f64,
    pub per_neuron_selectivity: Vec<f64>,
}

/// The three scalar metrics of one layer or one layer combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub sparsity: f64,
    pub selectivity_mean: f64,
    pub selectivity_std: f64,
}

impl From<&LayerMetrics> for MetricSummary {
    fn from(m: &LayerMetrics) -> Self {
        MetricSummary {
            sparsity: m.sparsity,
            selectivity_mean: m.selectivity_mean,
            selectivity_std: m.selectivity_std,
        }
    }
}

/// Sparsity of one activation vector; an all-zero vector counts as fully sparse.
pub fn hoyer_row(row: &[f64]) -> f64 {
    let n = row.len() as f64;
    let l1: f64 = row.iter().sum();
    let l2 = row.iter().map(|x| x * x).sum::<f64>().sqrt();
    if l2 == 0.0 {
        log::warn!("all-zero activation row; sparsity taken as 1");
        return 1.0;
    }
    let root_n = n.sqrt();
    ((root_n - l1 / l2) / (root_n - 1.0)).clamp(0.0, 1.0)
}

/// Mean over sample rows of each row's Hoyer sparsity.
pub fn hoyer_sparsity(layer: &Matrix) -> Result<f64> {
    if layer.rows() == 0 || layer.cols() == 0 {
        return Err(Error::Input("sparsity of an empty trace".into()));
    }
    if layer.cols() == 1 {
        return Err(Error::Input("sparsity needs at least two neurons".into()));
    }
    if let Some(bad) = layer.as_slice().iter().find(|&&x| !(x >= 0.0)) {
        return Err(Error::Input(format!("negative or NaN activation {bad}")));
    }
    let total: f64 = layer.row_iter().map(hoyer_row).sum();
    Ok(total / layer.rows() as f64)
}

/// Per-class mean activation of every neuron, shape `10 × neurons`.
pub fn class_means(layer: &Matrix, labels: &[u8]) -> Result<Matrix> {
    if layer.rows() != labels.len() {
        return Err(Error::Shape(format!(
            "{} activation rows for {} labels",
            layer.rows(),
            labels.len()
        )));
    }
    let mut sums = Matrix::zeros(NUM_CLASSES, layer.cols());
    let mut counts = [0usize; NUM_CLASSES];
    for (row, &label) in layer.row_iter().zip(labels) {
        let c = usize::from(label);
        if c >= NUM_CLASSES {
            return Err(Error::Input(format!("label {label} outside 0..{NUM_CLASSES}")));
        }
        counts[c] += 1;
        for (s, &a) in sums.row_mut(c).iter_mut().zip(row) {
            *s += a;
        }
    }
    for (c, &count) in counts.iter().enumerate() {
        if count == 0 {
            return Err(Error::Metric(format!(
                "class {c} has no samples; its mean activation is undefined"
            )));
        }
        for s in sums.row_mut(c) {
            *s /= count as f64;
        }
    }
    Ok(sums)
}

/// Selectivity of one neuron from its class means.
pub fn ccmas(class_means: &[f64]) -> f64 {
    let (max_idx, &u_max) = class_means
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    let rest: f64 = class_means
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != max_idx)
        .map(|(_, v)| v)
        .sum();
    let u_rest = rest / (class_means.len() - 1) as f64;
    (u_max - u_rest) / (u_max + u_rest + SELECTIVITY_EPS)
}

/// Per-neuron selectivity, with its mean and population standard deviation.
pub fn ccmas_selectivity(layer: &Matrix, labels: &[u8]) -> Result<(Vec<f64>, f64, f64)> {
    let means = class_means(layer, labels)?.transpose();
    let per_neuron: Vec<f64> = means.row_iter().map(ccmas).collect();
    let (mean, std) = mean_and_population_std(&per_neuron);
    Ok((per_neuron, mean, std))
}

fn mean_and_population_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn layer_metrics(layer: &Matrix, labels: &[u8]) -> Result<LayerMetrics> {
    let sparsity = hoyer_sparsity(layer)?;
    let (per_neuron_selectivity, selectivity_mean, selectivity_std) = ccmas_selectivity(layer, labels)?;
    Ok(LayerMetrics {
        sparsity,
        selectivity_mean,
        selectivity_std,
        per_neuron_selectivity,
    })
}

pub fn trace_metrics(trace: &ActivationTrace) -> Result<Vec<LayerMetrics>> {
    trace
        .layers()
        .iter()
        .map(|layer| layer_metrics(layer, trace.labels()))
        .collect()
}

/// Plain mean over layers.
pub fn aggregate_uniform(per_layer: &[LayerMetrics]) -> Result<MetricSummary> {
    if per_layer.is_empty() {
        return Err(Error::Input("no layers to aggregate".into()));
    }
    let w = vec![1.0 / per_layer.len() as f64; per_layer.len()];
    Ok(weighted_sum(per_layer, &w))
}

/// Share of the total activation mass carried by each layer.
pub fn activation_ratios(trace: &ActivationTrace) -> Result<Vec<f64>> {
    let totals: Vec<f64> = trace.layers().iter().map(Matrix::sum).collect();
    let grand: f64 = totals.iter().sum();
    if !(grand > 0.0) || !grand.is_finite() {
        return Err(Error::Metric(format!(
            "total activation {grand} cannot weight layers"
        )));
    }
    Ok(totals.into_iter().map(|t| t / grand).collect())
}

/// Mean over layers weighted by each layer's activation share.
pub fn aggregate_weighted(per_layer: &[LayerMetrics], trace: &ActivationTrace) -> Result<MetricSummary> {
    if per_layer.is_empty() {
        return Err(Error::Input("no layers to aggregate".into()));
    }
    if per_layer.len() != trace.layers().len() {
        return Err(Error::Shape(format!(
            "{} layer metrics for a trace of {} layers",
            per_layer.len(),
            trace.layers().len()
        )));
    }
    Ok(weighted_sum(per_layer, &activation_ratios(trace)?))
}

fn weighted_sum(per_layer: &[LayerMetrics], weights: &[f64]) -> MetricSummary {
    let mut agg = MetricSummary {
        sparsity: 0.0,
        selectivity_mean: 0.0,
        selectivity_std: 0.0,
    };
    for (m, &w) in per_layer.iter().zip(weights) {
        agg.sparsity += w * m.sparsity;
        agg.selectivity_mean += w * m.selectivity_mean;
        agg.selectivity_std += w * m.selectivity_std;
    }
    agg
}

/// Writes one CSV per layer as `epoch{E}_layer{L}.csv`.
///
/// Each file starts with a `samples,neurons` header and its values, followed
/// by a `label,n0,n1,...` header and one row per sample.
pub fn export_trace(trace: &ActivationTrace, dir: &Path, epoch: usize) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for (l, layer) in trace.layers().iter().enumerate() {
        let path = dir.join(format!("epoch{epoch}_layer{l}.csv"));
        let mut out = String::with_capacity(layer.rows() * layer.cols() * 20);
        let _ = writeln!(out, "samples,neurons\n{},{}", layer.rows(), layer.cols());
        out.push_str("label");
        for j in 0..layer.cols() {
            let _ = write!(out, ",n{j}");
        }
        out.push('\n');
        for (row, label) in layer.row_iter().zip(trace.labels()) {
            let _ = write!(out, "{label}");
            for v in row {
                let _ = write!(out, ",{v:e}");
            }
            out.push('\n');
        }
        std::fs::write(&path, out).map_err(|e| Error::io(&path, e))?;
        paths.push(path);
    }
    Ok(paths)
}

/// Reads back one file written by [`export_trace`].
pub fn import_trace_layer(path: &Path) -> Result<(Matrix, Vec<u8>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let bad = |msg: &str| Error::format(path, msg.to_string());
    if lines.next() != Some("samples,neurons") {
        return Err(bad("missing samples,neurons header"));
    }
    let dims = lines.next().ok_or_else(|| bad("missing dimensions"))?;
    let (samples, neurons) = dims
        .split_once(',')
        .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.parse::<usize>().ok()?)))
        .ok_or_else(|| bad("malformed dimensions"))?;
    lines.next().ok_or_else(|| bad("missing column header"))?;
    let mut data = Vec::with_capacity(samples * neurons);
    let mut labels = Vec::with_capacity(samples);
    for (i, line) in lines.enumerate() {
        let mut fields = line.split(',');
        let label = fields
            .next()
            .and_then(|f| f.parse::<u8>().ok())
            .ok_or_else(|| bad(&format!("bad label on data row {i}")))?;
        labels.push(label);
        let before = data.len();
        for f in fields {
            data.push(f.parse::<f64>().map_err(|_| bad(&format!("bad value {f:?} on data row {i}")))?);
        }
        if data.len() - before != neurons {
            return Err(bad(&format!("data row {i} does not have {neurons} values")));
        }
    }
    if labels.len() != samples {
        return Err(bad(&format!("expected {samples} rows, found {}", labels.len())));
    }
    Ok((Matrix::from_vec(samples, neurons, data)?, labels))
}
