//! MNIST ingestion and training-batch scheduling.

mod dataset;
pub mod idx;
mod schedule;

pub use dataset::{
    load_idx, load_mnist, locate, Dataset, Mnist, TEST_IMAGES, TEST_LABELS, TRAIN_IMAGES,
    TRAIN_LABELS,
};
pub use schedule::{make_epoch, BatchSchedule, ScheduleMode, STUDIED_RUN_LENGTHS};

/// Digit classes.
pub const NUM_CLASSES: usize = 10;
