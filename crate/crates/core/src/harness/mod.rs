//! Seeded trials, multi-seed experiments and parameter sweeps.

pub mod config;
pub mod experiment;
pub mod presets;
pub mod sweep;
pub mod trial;

pub use config::{ExperimentConfig, ModelConfig, SweepAxis, SweepSpec, SweepValue};
pub use experiment::{
    aggregate, run_all, run_config, run_experiment, training_data, EpochAggregate, EpochStats,
    ExperimentResult, MetricStats, RunOptions, Stat,
};
pub use presets::{all_presets, preset, preset_names};
pub use sweep::{expand, run_sweep};
pub use trial::{evaluate, run_trial, EpochMetrics, EpochRecord, Split, TrialRecord};

/// Turns an experiment name such as `adam/batch_size=1` into a file-name stem.
pub fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.' | '=') { c } else { '_' })
        .collect()
}
