#![allow(dead_code)]

pub mod props;

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparsity_lab::data::idx::{encode_images, encode_labels, IdxImages};
use sparsity_lab::data::{Dataset, Mnist, TEST_IMAGES, TEST_LABELS, TRAIN_IMAGES, TRAIN_LABELS};
use sparsity_lab::optim::{OptimizerConfig, OptimizerKind};
use sparsity_lab::Matrix;

/// Scalar re-derivation of every update rule, one parameter at a time.
#[derive(Debug, Clone)]
pub struct ScalarOracle {
    cfg: OptimizerConfig,
    theta: f64,
    velocity: f64,
    sq_grad: f64,
    sq_update: f64,
    first: f64,
    second: f64,
    steps: i32,
}

impl ScalarOracle {
    pub fn new(cfg: OptimizerConfig, theta: f64) -> Self {
        ScalarOracle {
            cfg,
            theta,
            velocity: 0.0,
            sq_grad: 0.0,
            sq_update: 0.0,
            first: 0.0,
            second: 0.0,
            steps: 0,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn step(&mut self, raw_grad: f64) {
        let c = self.cfg;
        let g = raw_grad + c.weight_decay * self.theta;
        match c.kind {
            OptimizerKind::Sgd | OptimizerKind::SgdMomentum => {
                if c.momentum == 0.0 {
                    self.theta -= c.learning_rate * g;
                } else {
                    self.velocity = c.momentum * self.velocity + g;
                    self.theta -= c.learning_rate * self.velocity;
                }
            }
            OptimizerKind::Adagrad => {
                self.sq_grad += g * g;
                self.theta -= c.learning_rate * g / (self.sq_grad.sqrt() + c.eps);
            }
            OptimizerKind::AdagradSq => {
                self.sq_grad += g * g;
                let scale = c.k * self.sq_grad * self.sq_grad;
                self.theta -= c.learning_rate * scale * g / (self.sq_grad.sqrt() + c.eps);
            }
            OptimizerKind::RmsProp => {
                self.sq_grad = c.rho * self.sq_grad + (1.0 - c.rho) * g * g;
                self.theta -= c.learning_rate * g / (self.sq_grad.sqrt() + c.eps);
            }
            OptimizerKind::Adadelta | OptimizerKind::AdadeltaSq => {
                self.sq_grad = c.rho * self.sq_grad + (1.0 - c.rho) * g * g;
                let rms_update = (self.sq_update + c.eps).sqrt();
                let rms_grad = (self.sq_grad + c.eps).sqrt();
                let delta = -(rms_update / rms_grad) * g;
                let scale = if c.kind == OptimizerKind::AdadeltaSq {
                    c.k * self.sq_grad * self.sq_grad
                } else {
                    1.0
                };
                self.theta += c.learning_rate * scale * delta;
                self.sq_update = c.rho * self.sq_update + (1.0 - c.rho) * delta * delta;
            }
            OptimizerKind::Adam => {
                self.steps += 1;
                let (b1, b2) = c.betas;
                self.first = b1 * self.first + (1.0 - b1) * g;
                self.second = b2 * self.second + (1.0 - b2) * g * g;
                let m_hat = self.first / (1.0 - b1.powi(self.steps));
                let v_hat = self.second / (1.0 - b2.powi(self.steps));
                self.theta -= c.learning_rate * m_hat / (v_hat.sqrt() + c.eps);
            }
        }
    }
}

/// A valid configuration of `kind` with randomised hyper-parameters.
pub fn random_config(kind: OptimizerKind, rng: &mut impl Rng) -> OptimizerConfig {
    let mut c = OptimizerConfig::baseline(kind);
    c.learning_rate = 10f64.powf(rng.random_range(-3.0..0.0));
    c.weight_decay = if rng.random_bool(0.5) { 0.0 } else { 10f64.powf(rng.random_range(-4.0..-1.0)) };
    c.momentum = match kind {
        OptimizerKind::Sgd if rng.random_bool(0.5) => 0.0,
        OptimizerKind::Sgd | OptimizerKind::SgdMomentum => rng.random_range(0.0..0.99),
        _ => c.momentum,
    };
    c.rho = rng.random_range(0.0..0.999);
    c.betas = (rng.random_range(0.0..0.99), rng.random_range(0.5..0.9999));
    c.k = rng.random_range(0.1..2.0);
    c
}

/// MNIST-shaped data whose classes are separable: each class lights a
/// different band of pixels, with noise.
pub fn synthetic_split(n: usize, seed: u64) -> (IdxImages, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<u8> = (0..n).map(|i| (i % 10) as u8).collect();
    let mut pixels = vec![0u8; n * 784];
    for (i, &label) in labels.iter().enumerate() {
        let img = &mut pixels[i * 784..(i + 1) * 784];
        let band = 100 + usize::from(label) * 56;
        for p in img.iter_mut().skip(band).take(56) {
            *p = rng.random_range(120..=255);
        }
        for _ in 0..20 {
            img[rng.random_range(0..784)] = rng.random_range(0..=255);
        }
    }
    (
        IdxImages {
            count: n,
            rows: 28,
            cols: 28,
            pixels,
        },
        labels,
    )
}

pub fn synthetic_mnist(train: usize, test: usize, seed: u64) -> Mnist {
    let (ti, tl) = synthetic_split(train, seed);
    let (vi, vl) = synthetic_split(test, seed + 1);
    Mnist {
        train: Dataset::from_idx(&ti, tl).unwrap(),
        test: Dataset::from_idx(&vi, vl).unwrap(),
    }
}

/// Writes a synthetic data set under the standard MNIST file names.
pub fn write_synthetic_mnist(dir: &Path, train: usize, test: usize, seed: u64) {
    std::fs::create_dir_all(dir).unwrap();
    for (imgs, lbls, n, s) in [
        (TRAIN_IMAGES, TRAIN_LABELS, train, seed),
        (TEST_IMAGES, TEST_LABELS, test, seed + 1),
    ] {
        let (images, labels) = synthetic_split(n, s);
        std::fs::write(dir.join(imgs), encode_images(&images)).unwrap();
        std::fs::write(dir.join(lbls), encode_labels(&labels)).unwrap();
    }
}

/// Balanced labels `0, 1, …, 9, 0, 1, …` with one-pixel images.
pub fn balanced_dataset(n: usize) -> Dataset {
    let labels: Vec<u8> = (0..n).map(|i| (i % 10) as u8).collect();
    Dataset::new(Matrix::filled(n, 1, 0.5), labels).unwrap()
}

/// Real MNIST location: `SPARSITY_LAB_DATA` or `<workspace>/data/mnist`.
pub fn mnist_dir() -> PathBuf {
    std::env::var_os("SPARSITY_LAB_DATA")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist"))
}

/// Largest relative error between `backward` and central differences over
/// every parameter. Pairs where both magnitudes are below `floor` are compared
/// against `floor` instead, so round-off on vanishing gradients does not count.
pub fn gradient_check(model: &sparsity_lab::MlpModel, x: &Matrix, y: &[u8], h: f64, floor: f64) -> f64 {
    let grads = model.backward(x, y).unwrap();
    let analytic: Vec<Vec<f64>> = grads.tensors().iter().map(|t| t.to_vec()).collect();
    let mut probe = model.clone();
    probe.set_capture(false);
    let loss = |m: &sparsity_lab::MlpModel| m.forward(x, Some(y)).unwrap().loss.unwrap();
    let mut worst: f64 = 0.0;
    for (t, tensor) in analytic.iter().enumerate() {
        for (i, &a) in tensor.iter().enumerate() {
            let orig = probe.parameters()[t][i];
            probe.parameters_mut()[t][i] = orig + h;
            let up = loss(&probe);
            probe.parameters_mut()[t][i] = orig - h;
            let down = loss(&probe);
            probe.parameters_mut()[t][i] = orig;
            let numeric = (up - down) / (2.0 * h);
            let scale = a.abs().max(numeric.abs()).max(floor);
            worst = worst.max((a - numeric).abs() / scale);
        }
    }
    worst
}

/// A seeded 784-16-10 network and a random 10-sample batch.
pub fn gradient_check_setup(seed: u64) -> (sparsity_lab::MlpModel, Matrix, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = sparsity_lab::MlpModel::init_uniform(&[784, 16, 10], &mut rng).unwrap();
    let x = Matrix::from_vec(10, 784, (0..7840).map(|_| rng.random_range(0.0..1.0)).collect()).unwrap();
    let y: Vec<u8> = (0..10).map(|_| rng.random_range(0..10)).collect();
    (model, x, y)
}
