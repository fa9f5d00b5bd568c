pub mod cli;
pub mod data;
pub mod error;
pub mod harness;
pub mod matrix;
pub mod metrics;
pub mod mlp;
pub mod optim;
pub mod rng;

pub use data::{Dataset, Mnist};
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use mlp::{ForwardResult, Gradients, MlpModel};
pub use optim::{Optimizer, OptimizerConfig, OptimizerKind};
