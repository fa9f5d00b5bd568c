//! Trend assertions over finished runs.
//!
//! An assertions file is TOML with one `[[assert]]` table per check:
//!
//! ```toml
//! [[assert]]
//! name = "small batches are sparser"
//! kind = "greater"            # greater | less | increases | decreases
//! metric = "sparsity"
//! left = "sgd-batch-size/batch_size=1"
//! right = "sgd-batch-size/batch_size=1000"
//!
//! [[assert]]
//! kind = "decreases"
//! metric = "sparsity"
//! experiment = "baseline-adagrad"
//! from_epoch = 1
//! ```
//!
//! `greater`/`less` compare two experiments at one epoch (default: last).
//! `increases`/`decreases` compare one experiment at two epochs (default:
//! first and last). Values are means over the non-diverged seeds.

use std::fmt;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::harness::{EpochMetrics, Split, TrialRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssertKind {
    Greater,
    Less,
    Increases,
    Decreases,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Accuracy,
    Sparsity,
    SelectivityMean,
    SelectivityStd,
    AccuracyXSparsity,
    AccuracyXSelectivity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregate {
    #[default]
    Uniform,
    Weighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum EpochRef {
    Number(usize),
    Named(EpochName),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpochName {
    First,
    Last,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assertion {
    #[serde(default)]
    pub name: Option<String>,
    pub kind: AssertKind,
    pub metric: Metric,
    #[serde(default)]
    pub aggregate: Aggregate,
    /// Use this hidden layer's metric instead of an aggregate.
    #[serde(default)]
    pub layer: Option<usize>,
    #[serde(default = "default_split")]
    pub split: Split,
    pub left: Option<String>,
    pub right: Option<String>,
    pub experiment: Option<String>,
    pub epoch: Option<EpochRef>,
    pub from_epoch: Option<EpochRef>,
    pub to_epoch: Option<EpochRef>,
}

fn default_split() -> Split {
    Split::Test
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AssertFile {
    #[serde(rename = "assert", default)]
    asserts: Vec<Assertion>,
}

pub fn load_assertions(path: &Path) -> Result<Vec<Assertion>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_assertions(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_assertions(text: &str) -> Result<Vec<Assertion>> {
    let file: AssertFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    for (i, a) in file.asserts.iter().enumerate() {
        let two_sided = matches!(a.kind, AssertKind::Greater | AssertKind::Less);
        let ok = if two_sided {
            a.left.is_some() && a.right.is_some() && a.experiment.is_none()
        } else {
            a.experiment.is_some() && a.left.is_none() && a.right.is_none()
        };
        if !ok {
            return Err(Error::Config(format!(
                "assertion {}: greater/less need left and right, increases/decreases need experiment",
                i + 1
            )));
        }
    }
    Ok(file.asserts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Tie,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Tie => "tie",
            Verdict::Fail => "fail",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub name: String,
    pub verdict: Verdict,
    /// The two compared values, when both could be computed.
    pub values: Option<(f64, f64)>,
    pub detail: String,
}

fn metric_value(m: &EpochMetrics, a: &Assertion) -> Option<f64> {
    let summary = match a.layer {
        Some(l) => m.layers.get(l)?,
        None => match a.aggregate {
            Aggregate::Uniform => &m.uniform,
            Aggregate::Weighted => &m.weighted,
        },
    };
    Some(match a.metric {
        Metric::Accuracy => m.accuracy,
        Metric::Sparsity => summary.sparsity,
        Metric::SelectivityMean => summary.selectivity_mean,
        Metric::SelectivityStd => summary.selectivity_std,
        Metric::AccuracyXSparsity => m.accuracy * summary.sparsity,
        Metric::AccuracyXSelectivity => m.accuracy * summary.selectivity_mean,
    })
}

/// Mean of the metric over the experiment's seeds at one epoch.
fn value_at(trials: &[TrialRecord], experiment: &str, epoch: EpochRef, a: &Assertion) -> std::result::Result<f64, String> {
    let runs: Vec<&TrialRecord> = trials.iter().filter(|t| t.experiment == experiment).collect();
    if runs.is_empty() {
        return Err(format!("no results for experiment {experiment:?}"));
    }
    let mut values = Vec::new();
    for t in &runs {
        let recs: Vec<_> = t.split(a.split).collect();
        let rec = match epoch {
            EpochRef::Named(EpochName::First) => recs.first(),
            EpochRef::Named(EpochName::Last) => recs.last(),
            EpochRef::Number(e) => recs.iter().find(|r| r.epoch == e),
        };
        let Some(rec) = rec else {
            return Err(format!("{experiment:?} has no {} record for epoch {epoch:?}", a.split));
        };
        if let Some(m) = &rec.metrics {
            values.push(metric_value(m, a).ok_or_else(|| format!("{experiment:?} has no layer {:?}", a.layer))?);
        }
    }
    if values.is_empty() {
        return Err(format!("every seed of {experiment:?} diverged by epoch {epoch:?}"));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

pub fn evaluate_assertion(trials: &[TrialRecord], a: &Assertion) -> Outcome {
    let (lhs, rhs, label) = match a.kind {
        AssertKind::Greater | AssertKind::Less => {
            let epoch = a.epoch.unwrap_or(EpochRef::Named(EpochName::Last));
            let (l, r) = (a.left.as_deref().unwrap_or(""), a.right.as_deref().unwrap_or(""));
            (
                value_at(trials, l, epoch, a),
                value_at(trials, r, epoch, a),
                format!("{l} vs {r}"),
            )
        }
        AssertKind::Increases | AssertKind::Decreases => {
            let exp = a.experiment.as_deref().unwrap_or("");
            let from = a.from_epoch.unwrap_or(EpochRef::Named(EpochName::First));
            let to = a.to_epoch.unwrap_or(EpochRef::Named(EpochName::Last));
            (
                value_at(trials, exp, to, a),
                value_at(trials, exp, from, a),
                format!("{exp} later vs earlier"),
            )
        }
    };
    let name = a
        .name
        .clone()
        .unwrap_or_else(|| format!("{:?} {:?}: {label}", a.kind, a.metric).to_lowercase());
    match (lhs, rhs) {
        (Ok(x), Ok(y)) => {
            let wants_greater = matches!(a.kind, AssertKind::Greater | AssertKind::Increases);
            let verdict = if x == y {
                Verdict::Tie
            } else if (x > y) == wants_greater {
                Verdict::Pass
            } else {
                Verdict::Fail
            };
            Outcome {
                name,
                verdict,
                values: Some((x, y)),
                detail: format!("{x:.6} vs {y:.6}"),
            }
        }
        (Err(e), _) | (_, Err(e)) => Outcome {
            name,
            verdict: Verdict::Fail,
            values: None,
            detail: e,
        },
    }
}

pub fn evaluate_all(trials: &[TrialRecord], asserts: &[Assertion]) -> Vec<Outcome> {
    asserts.iter().map(|a| evaluate_assertion(trials, a)).collect()
}

/// Per experiment: final-epoch test accuracy and its products with the
/// uniform-aggregate sparsity and mean selectivity, averaged over seeds.
pub fn final_products(trials: &[TrialRecord]) -> Vec<(String, f64, f64, f64)> {
    let mut names: Vec<&str> = Vec::new();
    for t in trials {
        if !names.contains(&t.experiment.as_str()) {
            names.push(&t.experiment);
        }
    }
    names
        .into_iter()
        .filter_map(|name| {
            let finals: Vec<&EpochMetrics> = trials
                .iter()
                .filter(|t| t.experiment == name)
                .filter_map(|t| t.last_test()?.metrics.as_ref())
                .collect();
            if finals.is_empty() {
                return None;
            }
            let n = finals.len() as f64;
            let mean = |f: &dyn Fn(&EpochMetrics) -> f64| finals.iter().map(|m| f(m)).sum::<f64>() / n;
            Some((
                name.to_string(),
                mean(&|m| m.accuracy),
                mean(&|m| m.accuracy * m.uniform.sparsity),
                mean(&|m| m.accuracy * m.uniform.selectivity_mean),
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::EpochRecord;
    use crate::metrics::MetricSummary;

    fn trial(name: &str, seed: u64, sparsities: &[f64]) -> TrialRecord {
        TrialRecord {
            experiment: name.into(),
            seed,
            records: sparsities
                .iter()
                .enumerate()
                .map(|(i, &s)| {
                    let sum = MetricSummary {
                        sparsity: s,
                        selectivity_mean: s / 2.0,
                        selectivity_std: 0.0,
                    };
                    EpochRecord {
                        epoch: i + 1,
                        split: Split::Test,
                        metrics: Some(EpochMetrics {
                            accuracy: 0.9,
                            layers: vec![sum],
                            uniform: sum,
                            weighted: sum,
                        }),
                    }
                })
                .collect(),
        }
    }

    #[test]
    fn comparing_a_result_to_itself_is_a_tie() {
        let t = vec![trial("a", 1, &[0.2, 0.3])];
        let a = &parse_assertions("[[assert]]\nkind = \"greater\"\nmetric = \"sparsity\"\nleft = \"a\"\nright = \"a\"\n")
            .unwrap()[0];
        assert_eq!(evaluate_assertion(&t, a).verdict, Verdict::Tie);
    }

    #[test]
    fn greater_and_monotone_checks() {
        let t = vec![
            trial("small", 1, &[0.2, 0.4]),
            trial("small", 2, &[0.2, 0.6]),
            trial("large", 1, &[0.3, 0.3]),
        ];
        let asserts = parse_assertions(
            r#"
[[assert]]
kind = "greater"
metric = "sparsity"
left = "small"
right = "large"

[[assert]]
kind = "less"
metric = "sparsity"
left = "small"
right = "large"

[[assert]]
kind = "decreases"
metric = "sparsity"
experiment = "small"

[[assert]]
kind = "greater"
metric = "sparsity"
left = "small"
right = "large"
epoch = 1

[[assert]]
kind = "greater"
metric = "sparsity"
left = "small"
right = "missing"
"#,
        )
        .unwrap();
        let v: Vec<Verdict> = evaluate_all(&t, &asserts).iter().map(|o| o.verdict).collect();
        assert_eq!(v, [Verdict::Pass, Verdict::Fail, Verdict::Fail, Verdict::Fail, Verdict::Fail]);
        let o = evaluate_assertion(&t, &asserts[0]);
        assert_eq!(o.values, Some((0.5, 0.3)));
    }

    #[test]
    fn malformed_assertions_are_config_errors() {
        assert!(parse_assertions("[[assert]]\nkind = \"greater\"\nmetric = \"sparsity\"\nleft = \"a\"\n").is_err());
        assert!(parse_assertions("[[assert]]\nkind = \"sideways\"\nmetric = \"sparsity\"\n").is_err());
    }

    #[test]
    fn product_table() {
        let t = vec![trial("a", 1, &[0.2, 0.5])];
        let p = final_products(&t);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].2, 0.9 * 0.5);
        assert_eq!(p[0].3, 0.9 * 0.25);
    }
}
