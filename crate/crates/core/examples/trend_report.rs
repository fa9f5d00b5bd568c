//! Writes a run to CSV, reads it back and checks trend assertions against
//! it, the same way `sparsity-lab report` does.

use std::path::PathBuf;

use sparsity_lab::cli::records::{read_epochs_csv, write_epochs_csv};
use sparsity_lab::cli::report::{evaluate_all, final_products, parse_assertions};
use sparsity_lab::data::load_mnist;
use sparsity_lab::harness::{preset, run_all, RunOptions};

const ASSERTS: &str = r#"
[[assert]]
name = "adam ends sparser than sgd"
kind = "greater"
metric = "sparsity"
left = "baseline-adam"
right = "baseline-sgd"

[[assert]]
kind = "increases"
metric = "accuracy"
experiment = "baseline-sgd"
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let configs: Vec<_> = ["baseline-sgd", "baseline-adam"]
        .iter()
        .map(|n| {
            let mut c = preset(n).unwrap();
            c.epochs = 3;
            c.seeds = vec![0, 1];
            c.train_subsample = Some(5_000);
            c
        })
        .collect();
    let dir = std::env::var_os("SPARSITY_LAB_DATA").map_or_else(|| PathBuf::from("data/mnist"), PathBuf::from);
    let mnist = load_mnist(&dir)?;
    let results = run_all(&configs, &mnist, &RunOptions::default())?;

    let trials: Vec<_> = results.iter().flat_map(|r| &r.trials).collect();
    let mut csv = Vec::new();
    write_epochs_csv(&trials, &mut csv)?;
    println!("{} bytes of per-epoch CSV", csv.len());
    let reloaded = read_epochs_csv(csv.as_slice(), "memory".as_ref())?;

    for (name, acc, xs, xsel) in final_products(&reloaded) {
        println!("{name:<16} accuracy {acc:.4}  acc×sparsity {xs:.4}  acc×selectivity {xsel:.4}");
    }
    for o in evaluate_all(&reloaded, &parse_assertions(ASSERTS)?) {
        println!("{:<4} {}: {}", o.verdict.to_string().to_uppercase(), o.name, o.detail);
    }
    Ok(())
}
