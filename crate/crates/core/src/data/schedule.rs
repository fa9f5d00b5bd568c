//! Batch composition rules. An epoch is a list of batches of sample indices;
//! every training sample appears in exactly one batch.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::rng::{epoch_stream, seeded};

/// Run lengths used by the consecutive-digit experiments.
pub const STUDIED_RUN_LENGTHS: [usize; 3] = [1, 5, 10];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ScheduleMode {
    /// Fresh uniform shuffle every epoch.
    Random,
    /// Stable sort by label; the same order every epoch.
    Sorted,
    /// Every batch holds a single class.
    SingleClass,
    /// Every batch is drawn from one class pair.
    PairClass,
    /// Every batch is drawn from one five-class group.
    FiveClass,
    /// Size-1 batches arranged in runs of `k` identical labels.
    ConsecutiveRun(usize),
}

impl fmt::Display for ScheduleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleMode::Random => f.write_str("random"),
            ScheduleMode::Sorted => f.write_str("sorted"),
            ScheduleMode::SingleClass => f.write_str("single_class"),
            ScheduleMode::PairClass => f.write_str("pair_class"),
            ScheduleMode::FiveClass => f.write_str("five_class"),
            ScheduleMode::ConsecutiveRun(k) => write!(f, "consecutive_run:{k}"),
        }
    }
}

impl FromStr for ScheduleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "random" => ScheduleMode::Random,
            "sorted" => ScheduleMode::Sorted,
            "single_class" => ScheduleMode::SingleClass,
            "pair_class" => ScheduleMode::PairClass,
            "five_class" => ScheduleMode::FiveClass,
            other => match other.strip_prefix("consecutive_run:") {
                Some(k) => ScheduleMode::ConsecutiveRun(k.parse().map_err(|_| {
                    Error::Config(format!("bad run length in schedule mode {other:?}"))
                })?),
                None => {
                    return Err(Error::Config(format!(
                        "unknown schedule mode {other:?} (expected random, sorted, single_class, \
                         pair_class, five_class or consecutive_run:<k>)"
                    )))
                }
            },
        })
    }
}

impl TryFrom<String> for ScheduleMode {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ScheduleMode> for String {
    fn from(m: ScheduleMode) -> String {
        m.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSchedule {
    pub mode: ScheduleMode,
    pub batch_size: usize,
    /// Overwritten with the trial seed when a schedule runs inside a trial.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub seed: u64,
    /// Replaces the default class grouping for `PairClass` / `FiveClass`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_groups: Option<Vec<Vec<u8>>>,
}

fn is_zero(v: &u64) -> bool {
    *v == 0
}

impl BatchSchedule {
    pub fn new(mode: ScheduleMode, batch_size: usize) -> Self {
        Self {
            mode,
            batch_size,
            seed: 0,
            class_groups: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Input("batch_size must be at least 1".into()));
        }
        if let ScheduleMode::ConsecutiveRun(k) = self.mode {
            if k == 0 {
                return Err(Error::Input("consecutive run length must be at least 1".into()));
            }
            if self.batch_size != 1 {
                return Err(Error::Input(format!(
                    "consecutive_run:{k} requires batch_size 1, got {}",
                    self.batch_size
                )));
            }
        }
        if self.class_groups.is_some() {
            let size = match self.mode {
                ScheduleMode::PairClass => 2,
                ScheduleMode::FiveClass => 5,
                _ => {
                    return Err(Error::Input(format!(
                        "class_groups only applies to pair_class and five_class, not {}",
                        self.mode
                    )))
                }
            };
            let groups = self.groups();
            let mut seen = [false; NUM_CLASSES];
            for g in &groups {
                if g.len() != size {
                    return Err(Error::Input(format!(
                        "{} groups must have {size} classes, got {g:?}",
                        self.mode
                    )));
                }
                for &c in g {
                    let c = usize::from(c);
                    if c >= NUM_CLASSES || seen[c] {
                        return Err(Error::Input(format!(
                            "class_groups must partition 0..{NUM_CLASSES}: {groups:?}"
                        )));
                    }
                    seen[c] = true;
                }
            }
            if seen.iter().any(|s| !s) {
                return Err(Error::Input(format!(
                    "class_groups must cover every class: {groups:?}"
                )));
            }
        }
        Ok(())
    }

    /// Class groups for the grouped modes: contiguous `{0,1},{2,3},…` for
    /// pairs and `{0..4},{5..9}` for five-class, unless overridden.
    pub fn groups(&self) -> Vec<Vec<u8>> {
        if let Some(g) = &self.class_groups {
            return g.clone();
        }
        let size = match self.mode {
            ScheduleMode::PairClass => 2,
            ScheduleMode::FiveClass => 5,
            _ => 1,
        };
        (0..NUM_CLASSES as u8)
            .collect::<Vec<_>>()
            .chunks(size)
            .map(<[u8]>::to_vec)
            .collect()
    }

    /// Builds the batches of one epoch from the training labels alone.
    pub fn make_epoch_from_labels(&self, labels: &[u8], epoch_index: usize) -> Result<Vec<Vec<usize>>> {
        self.validate()?;
        let n = labels.len();
        if n == 0 {
            return Err(Error::Input("cannot schedule an empty dataset".into()));
        }
        if self.batch_size > n {
            return Err(Error::Input(format!(
                "batch_size {} exceeds the {n} training samples",
                self.batch_size
            )));
        }
        let mut rng = seeded(self.seed, epoch_stream(epoch_index));
        let chunk = |order: &[usize]| -> Vec<Vec<usize>> {
            order.chunks(self.batch_size).map(<[usize]>::to_vec).collect()
        };

        let batches = match self.mode {
            ScheduleMode::Random => {
                let mut order: Vec<usize> = (0..n).collect();
                order.shuffle(&mut rng);
                chunk(&order)
            }
            ScheduleMode::Sorted => {
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by_key(|&i| labels[i]);
                chunk(&order)
            }
            ScheduleMode::SingleClass | ScheduleMode::PairClass | ScheduleMode::FiveClass => {
                let mut batches = Vec::new();
                for group in self.groups() {
                    let mut pool: Vec<usize> =
                        (0..n).filter(|&i| group.contains(&labels[i])).collect();
                    pool.shuffle(&mut rng);
                    batches.extend(chunk(&pool));
                }
                batches.shuffle(&mut rng);
                batches
            }
            ScheduleMode::ConsecutiveRun(k) => {
                if !STUDIED_RUN_LENGTHS.contains(&k) {
                    log::warn!("consecutive run length {k} is outside the studied set {STUDIED_RUN_LENGTHS:?}");
                }
                let mut runs: Vec<Vec<usize>> = Vec::new();
                for class in 0..NUM_CLASSES as u8 {
                    let mut pool: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
                    pool.shuffle(&mut rng);
                    runs.extend(pool.chunks(k).map(<[usize]>::to_vec));
                }
                runs.shuffle(&mut rng);
                runs.into_iter().flatten().map(|i| vec![i]).collect()
            }
        };
        Ok(batches)
    }
}

pub fn make_epoch(schedule: &BatchSchedule, train: &Dataset, epoch_index: usize) -> Result<Vec<Vec<usize>>> {
    schedule.make_epoch_from_labels(train.labels(), epoch_index)
}
