//! Compares backpropagation against central finite differences on a
//! 784-16-10 network and reports the worst parameter per tensor.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparsity_lab::{Matrix, MlpModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let model = MlpModel::init_uniform(&[784, 16, 10], &mut rng)?;
    let x = Matrix::from_vec(10, 784, (0..7840).map(|_| rng.random_range(0.0..1.0)).collect())?;
    let y: Vec<u8> = (0..10).map(|_| rng.random_range(0..10)).collect();

    let grads = model.backward(&x, &y)?;
    let loss = |m: &MlpModel| m.forward(&x, Some(&y)).map(|r| r.loss.unwrap_or(f64::NAN));
    let names = ["W1", "b1", "W2", "b2"];
    let h = 1e-5;
    let mut probe = model.clone();
    for (t, analytic) in grads.tensors().iter().enumerate() {
        let mut worst: f64 = 0.0;
        for (i, &a) in analytic.iter().enumerate() {
            let orig = probe.parameters()[t][i];
            probe.parameters_mut()[t][i] = orig + h;
            let up = loss(&probe)?;
            probe.parameters_mut()[t][i] = orig - h;
            let down = loss(&probe)?;
            probe.parameters_mut()[t][i] = orig;
            let numeric = (up - down) / (2.0 * h);
            worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6));
        }
        println!("{:<3} {:>6} parameters, max relative error {worst:.2e}", names[t], analytic.len());
    }
    Ok(())
}
