//! Trains one baseline and prints test metrics after every epoch.
//!
//!     cargo run --example train_baseline -- adam 5 10000
//!
//! Arguments: optimizer (sgd, adagrad, adadelta, adam), epochs, training
//! subsample size (0 for all 60k).

use std::path::PathBuf;

use sparsity_lab::data::load_mnist;
use sparsity_lab::harness::{preset, run_trial, training_data, Split};
use sparsity_lab::rng::derive_seed;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let optimizer = args.first().map_or("sgd", String::as_str);
    let epochs: usize = args.get(1).map_or(Ok(3), |s| s.parse())?;
    let subsample: usize = args.get(2).map_or(Ok(10_000), |s| s.parse())?;

    let mut cfg = preset(&format!("baseline-{optimizer}")).ok_or("unknown optimizer")?;
    cfg.epochs = epochs;
    cfg.train_subsample = (subsample > 0).then_some(subsample);

    let dir = std::env::var_os("SPARSITY_LAB_DATA").map_or_else(|| PathBuf::from("data/mnist"), PathBuf::from);
    let mnist = load_mnist(&dir)?;
    let train = training_data(&cfg, &mnist.train)?;
    println!("{} on {} training images, {} hidden units", cfg.name, train.len(), cfg.model.neurons);

    let trial = run_trial(&cfg, derive_seed(&cfg.name, 0), &train, &mnist.test, None)?;
    println!("epoch  accuracy  sparsity  selectivity");
    for rec in trial.split(Split::Test) {
        match &rec.metrics {
            Some(m) => println!(
                "{:>5}  {:>8.4}  {:>8.4}  {:>11.4}",
                rec.epoch, m.accuracy, m.uniform.sparsity, m.uniform.selectivity_mean
            ),
            None => println!("{:>5}  diverged", rec.epoch),
        }
    }
    Ok(())
}
