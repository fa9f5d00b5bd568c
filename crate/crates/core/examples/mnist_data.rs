//! Loads MNIST, prints class balance, and draws a stratified subsample.

use std::path::PathBuf;

use sparsity_lab::data::load_mnist;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::var_os("SPARSITY_LAB_DATA").map_or_else(|| PathBuf::from("data/mnist"), PathBuf::from);
    let mnist = load_mnist(&dir)?;
    println!("train {} images, test {} images, {} pixels each", mnist.train.len(), mnist.test.len(), mnist.train.input_width());
    println!("train class counts {:?}", mnist.train.class_counts());
    println!("test class counts  {:?}", mnist.test.class_counts());
    let sub = mnist.train.subsample(10_000, 1)?;
    println!("10k subsample      {:?}", sub.class_counts());

    let first = mnist.train.images().row(0);
    for r in 0..28 {
        let line: String = first[r * 28..(r + 1) * 28]
            .iter()
            .map(|&p| if p > 0.5 { '#' } else if p > 0.1 { '+' } else { ' ' })
            .collect();
        println!("{line}");
    }
    println!("label {}", mnist.train.labels()[0]);
    Ok(())
}
