//! Hoyer sparsity and class selectivity on hand-made activation traces,
//! and how the two multi-layer aggregations differ.

use sparsity_lab::metrics::{
    activation_ratios, aggregate_uniform, aggregate_weighted, ccmas, hoyer_row, trace_metrics, ActivationTrace,
};
use sparsity_lab::Matrix;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for row in [vec![1.0, 0.0, 0.0, 0.0], vec![0.5; 4], vec![0.9, 0.1, 0.1, 0.0]] {
        println!("hoyer{row:?} = {:.4}", hoyer_row(&row));
    }

    // A neuron that fires for class 3 only, and one that fires for everything.
    let mut picky = vec![0.05; 10];
    picky[3] = 0.95;
    println!("ccmas(picky) = {:.4}", ccmas(&picky));
    println!("ccmas(flat)  = {:.4}", ccmas(&[0.5; 10]));

    // Twenty samples, two per class. Layer 0 is wide and sparse, layer 1 is
    // narrow and busy.
    let labels: Vec<u8> = (0..20).map(|i| (i % 10) as u8).collect();
    let wide = Matrix::from_rows(
        &labels
            .iter()
            .map(|&c| (0..10).map(|j| if j == usize::from(c) { 0.9 } else { 0.02 }).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    )?;
    let narrow = Matrix::from_rows(
        &labels
            .iter()
            .map(|&c| vec![0.8, 0.7, 0.5 + 0.04 * f64::from(c)])
            .collect::<Vec<_>>(),
    )?;
    let trace = ActivationTrace::new(vec![wide, narrow], labels)?;
    let per_layer = trace_metrics(&trace)?;
    for (i, m) in per_layer.iter().enumerate() {
        println!(
            "layer {i}: sparsity {:.4}, selectivity {:.4} ± {:.4}",
            m.sparsity, m.selectivity_mean, m.selectivity_std
        );
    }
    println!("activation shares {:?}", activation_ratios(&trace)?);
    let u = aggregate_uniform(&per_layer)?;
    let w = aggregate_weighted(&per_layer, &trace)?;
    println!("uniform:  sparsity {:.4}, selectivity {:.4}", u.sparsity, u.selectivity_mean);
    println!("weighted: sparsity {:.4}, selectivity {:.4}", w.sparsity, w.selectivity_mean);
    Ok(())
}
