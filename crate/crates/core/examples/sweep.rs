//! Runs a preset sweep at desk scale and prints the final-epoch summary of
//! every point.
//!
//!     cargo run --example sweep -- sgd-batch-size 3

use std::path::PathBuf;

use sparsity_lab::data::load_mnist;
use sparsity_lab::harness::{preset, run_config, RunOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let name = args.first().map_or("sgd-momentum", String::as_str);
    let points: usize = args.get(1).map_or(Ok(3), |s| s.parse())?;

    let mut cfg = preset(name).ok_or_else(|| format!("no preset named {name}"))?;
    cfg.epochs = 2;
    cfg.seeds = vec![0, 1];
    cfg.train_subsample = Some(5_000);
    if let Some(s) = &mut cfg.sweep {
        s.values.truncate(points);
    }

    let dir = std::env::var_os("SPARSITY_LAB_DATA").map_or_else(|| PathBuf::from("data/mnist"), PathBuf::from);
    let mnist = load_mnist(&dir)?;
    for r in run_config(&cfg, &mnist, &RunOptions::default())? {
        match r.final_test().and_then(|e| e.stats.as_ref()) {
            Some(s) => println!(
                "{:<40} acc {:.4}±{:.4}  sparsity {:.4}±{:.4}  selectivity {:.4}±{:.4}",
                r.experiment,
                s.accuracy.mean,
                s.accuracy.stderr,
                s.uniform.sparsity.mean,
                s.uniform.sparsity.stderr,
                s.uniform.selectivity_mean.mean,
                s.uniform.selectivity_mean.stderr,
            ),
            None => println!("{:<40} every seed diverged", r.experiment),
        }
    }
    Ok(())
}
