//! Fully connected network with sigmoid hidden layers and a softmax /
//! cross-entropy output, trained by plain backpropagation.

use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::{matmul, matmul_transposed, sigmoid_scalar, Matrix};

/// Largest number of hidden layers any experiment uses.
pub const MAX_HIDDEN_LAYERS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    layer_sizes: Vec<usize>,
    /// `weights[i]` maps layer `i` to layer `i + 1` and is stored `in × out`,
    /// so a batch moves forward as `x · W` with no transpose.
    weights: Vec<Matrix>,
    biases: Vec<Vec<f64>>,
    capture_enabled: bool,
}

#[derive(Debug, Clone)]
pub struct ForwardResult {
    pub logits: Matrix,
    /// Post-sigmoid outputs of each hidden layer; empty unless capture is enabled.
    pub hidden_activations: Vec<Matrix>,
    /// Mean cross-entropy, present when labels were supplied.
    pub loss: Option<f64>,
}

/// Gradients of the mean cross-entropy, laid out like the model's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
    pub loss: f64,
}

fn validate_sizes(layer_sizes: &[usize]) -> Result<()> {
    if layer_sizes.len() < 3 {
        return Err(Error::Input(format!(
            "an MLP needs input, at least one hidden and an output layer; got sizes {layer_sizes:?}"
        )));
    }
    let hidden = layer_sizes.len() - 2;
    if hidden > MAX_HIDDEN_LAYERS {
        return Err(Error::Input(format!(
            "{hidden} hidden layers requested, at most {MAX_HIDDEN_LAYERS} supported"
        )));
    }
    if layer_sizes.contains(&0) {
        return Err(Error::Input(format!(
            "layer sizes must be positive: {layer_sizes:?}"
        )));
    }
    Ok(())
}

impl MlpModel {
    /// All weights and biases zero.
    pub fn zeros(layer_sizes: &[usize]) -> Result<Self> {
        validate_sizes(layer_sizes)?;
        let weights = layer_sizes
            .windows(2)
            .map(|w| Matrix::zeros(w[0], w[1]))
            .collect();
        let biases = layer_sizes[1..].iter().map(|&n| vec![0.0; n]).collect();
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
            capture_enabled: false,
        })
    }

    /// Weights and biases drawn from `U(-1/√fan_in, 1/√fan_in)`, layer by
    /// layer, each weight matrix in storage order followed by its bias.
    pub fn init_uniform<R: Rng + ?Sized>(layer_sizes: &[usize], rng: &mut R) -> Result<Self> {
        let mut model = Self::zeros(layer_sizes)?;
        for (w, b) in model.weights.iter_mut().zip(model.biases.iter_mut()) {
            let bound = 1.0 / (w.rows() as f64).sqrt();
            for x in w.as_mut_slice() {
                *x = rng.random_range(-bound..bound);
            }
            for x in b.iter_mut() {
                *x = rng.random_range(-bound..bound);
            }
        }
        Ok(model)
    }

    /// Builds a model from `in × out` weight matrices and bias vectors.
    pub fn from_parameters(weights: Vec<Matrix>, biases: Vec<Vec<f64>>) -> Result<Self> {
        let first = weights
            .first()
            .ok_or_else(|| Error::Input("no weight matrices".into()))?;
        let mut layer_sizes = vec![first.rows()];
        layer_sizes.extend(weights.iter().map(Matrix::cols));
        let mut model = Self::zeros(&layer_sizes)?;
        if biases.len() != weights.len() {
            return Err(Error::Shape(format!(
                "{} bias vectors for {} weight matrices",
                biases.len(),
                weights.len()
            )));
        }
        for (i, (w, b)) in weights.iter().zip(&biases).enumerate() {
            if w.shape() != model.weights[i].shape() || b.len() != model.biases[i].len() {
                return Err(Error::Shape(format!(
                    "layer {i}: weight {:?} / bias {} do not chain with sizes {layer_sizes:?}",
                    w.shape(),
                    b.len()
                )));
            }
        }
        model.weights = weights;
        model.biases = biases;
        Ok(model)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn hidden_layers(&self) -> usize {
        self.layer_sizes.len() - 2
    }

    pub fn input_width(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_width(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    /// Weight matrices in `in × out` layout.
    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub fn weights_mut(&mut self) -> &mut [Matrix] {
        &mut self.weights
    }

    pub fn biases_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.biases
    }

    pub fn capture_enabled(&self) -> bool {
        self.capture_enabled
    }

    pub fn set_capture(&mut self, enabled: bool) {
        self.capture_enabled = enabled;
    }

    pub fn parameter_count(&self) -> usize {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| w.as_slice().len() + b.len())
            .sum()
    }

    /// Every parameter tensor as a flat slice: weight 0, bias 0, weight 1, ...
    pub fn parameters(&self) -> Vec<&[f64]> {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| [w.as_slice(), b.as_slice()])
            .collect()
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut [f64]> {
        self.weights
            .iter_mut()
            .zip(self.biases.iter_mut())
            .flat_map(|(w, b)| [w.as_mut_slice(), b.as_mut_slice()])
            .collect()
    }

    pub fn all_finite(&self) -> bool {
        self.parameters()
            .iter()
            .all(|p| p.iter().all(|x| x.is_finite()))
    }

    fn check_batch(&self, batch: &Matrix) -> Result<()> {
        if batch.cols() != self.input_width() {
            return Err(Error::Shape(format!(
                "batch has {} features, model expects {}",
                batch.cols(),
                self.input_width()
            )));
        }
        Ok(())
    }

    fn check_labels(&self, batch: &Matrix, labels: &[u8]) -> Result<()> {
        if labels.len() != batch.rows() {
            return Err(Error::Input(format!(
                "{} labels for {} samples",
                labels.len(),
                batch.rows()
            )));
        }
        let classes = self.output_width();
        if let Some(&bad) = labels.iter().find(|&&l| usize::from(l) >= classes) {
            return Err(Error::Input(format!(
                "label {bad} outside 0..{classes}"
            )));
        }
        Ok(())
    }

    fn affine(&self, layer: usize, input: &Matrix) -> Matrix {
        let mut z = matmul(input, &self.weights[layer]).expect("checked widths");
        z.add_row_vector(&self.biases[layer]).expect("bias matches layer");
        z
    }

    /// Runs the network, returning the input followed by every hidden activation, and the logits.
    fn activations(&self, batch: &Matrix) -> (Vec<Matrix>, Matrix) {
        let last = self.weights.len() - 1;
        let mut acts: Vec<Matrix> = Vec::with_capacity(last + 1);
        for layer in 0..last {
            let input = acts.last().unwrap_or(batch);
            let mut z = self.affine(layer, input);
            for x in z.as_mut_slice() {
                *x = sigmoid_scalar(*x);
            }
            acts.push(z);
        }
        let logits = self.affine(last, acts.last().unwrap_or(batch));
        (acts, logits)
    }

    pub fn forward(&self, batch: &Matrix, labels: Option<&[u8]>) -> Result<ForwardResult> {
        self.check_batch(batch)?;
        if let Some(labels) = labels {
            self.check_labels(batch, labels)?;
        }
        let (hidden, logits) = self.activations(batch);
        let loss = labels.map(|l| cross_entropy(&logits, l));
        Ok(ForwardResult {
            logits,
            hidden_activations: if self.capture_enabled { hidden } else { Vec::new() },
            loss,
        })
    }

    /// Gradient of the batch-mean cross-entropy with respect to every parameter.
    pub fn backward(&self, batch: &Matrix, labels: &[u8]) -> Result<Gradients> {
        self.check_batch(batch)?;
        self.check_labels(batch, labels)?;
        let (hidden, logits) = self.activations(batch);
        let loss = cross_entropy(&logits, labels);

        let n = batch.rows() as f64;
        let mut delta = softmax(&logits);
        for (i, &label) in labels.iter().enumerate() {
            let row = delta.row_mut(i);
            row[usize::from(label)] -= 1.0;
            for x in row.iter_mut() {
                *x /= n;
            }
        }

        let layers = self.weights.len();
        let mut weight_grads = vec![Matrix::zeros(0, 0); layers];
        let mut bias_grads = vec![Vec::new(); layers];
        for layer in (0..layers).rev() {
            let input = if layer == 0 { batch } else { &hidden[layer - 1] };
            weight_grads[layer] = matmul(&input.transpose(), &delta)?;
            bias_grads[layer] = delta.column_sums();
            if layer > 0 {
                let mut upstream = matmul_transposed(&delta, &self.weights[layer])?;
                for (d, &a) in upstream.as_mut_slice().iter_mut().zip(input.as_slice()) {
                    *d *= a * (1.0 - a);
                }
                delta = upstream;
            }
        }
        Ok(Gradients {
            weights: weight_grads,
            biases: bias_grads,
            loss,
        })
    }
}

impl Gradients {
    /// Flat views in the same order as [`MlpModel::parameters`].
    pub fn tensors(&self) -> Vec<&[f64]> {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| [w.as_slice(), b.as_slice()])
            .collect()
    }
}

/// Row-wise softmax with max subtraction.
pub fn softmax(logits: &Matrix) -> Matrix {
    let mut out = logits.clone();
    for i in 0..out.rows() {
        let row = out.row_mut(i);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for x in row.iter_mut() {
            *x = (*x - max).exp();
            total += *x;
        }
        for x in row.iter_mut() {
            *x /= total;
        }
    }
    out
}

/// Batch-mean cross-entropy of softmax(logits) via log-sum-exp.
pub fn cross_entropy(logits: &Matrix, labels: &[u8]) -> f64 {
    let mut total = 0.0;
    for (row, &label) in logits.row_iter().zip(labels) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|&x| (x - max).exp()).sum::<f64>().ln();
        total += lse - row[usize::from(label)];
    }
    total / labels.len() as f64
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in row.iter().enumerate().skip(1) {
        if x > row[best] {
            best = i;
        }
    }
    best
}

/// Rows evaluated per forward chunk when scoring a whole dataset.
pub const EVAL_CHUNK: usize = 1000;

/// Fraction of samples whose arg-max logit equals the label.
pub fn accuracy(model: &MlpModel, images: &Matrix, labels: &[u8]) -> Result<f64> {
    if images.rows() == 0 {
        return Err(Error::Input("accuracy of an empty dataset".into()));
    }
    if labels.len() != images.rows() {
        return Err(Error::Input(format!(
            "{} labels for {} samples",
            labels.len(),
            images.rows()
        )));
    }
    let mut correct = 0usize;
    let mut start = 0;
    while start < images.rows() {
        let end = (start + EVAL_CHUNK).min(images.rows());
        let idx: Vec<usize> = (start..end).collect();
        let out = model.forward(&images.select_rows(&idx), None)?;
        correct += out
            .logits
            .row_iter()
            .zip(&labels[start..end])
            .filter(|(row, &l)| argmax(row) == usize::from(l))
            .count();
        start = end;
    }
    Ok(correct as f64 / images.rows() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tiny_model(seed: u64) -> MlpModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        MlpModel::init_uniform(&[4, 3, 2], &mut rng).unwrap()
    }

    fn random_batch(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
        let data = (0..rows * cols).map(|_| rng.random::<f64>()).collect();
        Matrix::from_vec(rows, cols, data).unwrap()
    }

    /// Evaluates the network one scalar at a time.
    fn scalar_logits(model: &MlpModel, x: &[f64]) -> Vec<f64> {
        let mut current = x.to_vec();
        let layers = model.weights().len();
        for l in 0..layers {
            let w = &model.weights()[l];
            let b = &model.biases()[l];
            let mut next = vec![0.0; w.cols()];
            for o in 0..w.cols() {
                let mut s = b[o];
                for i in 0..w.rows() {
                    s += w.get(i, o) * current[i];
                }
                next[o] = if l + 1 < layers { 1.0 / (1.0 + (-s).exp()) } else { s };
            }
            current = next;
        }
        current
    }

    #[test]
    fn zero_parameters_give_half_activations_and_uniform_output() {
        let mut model = MlpModel::zeros(&[784, 16, 16, 10]).unwrap();
        model.set_capture(true);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let batch = random_batch(&mut rng, 5, 784);
        let out = model.forward(&batch, None).unwrap();
        for h in &out.hidden_activations {
            assert!(h.as_slice().iter().all(|&a| a == 0.5));
        }
        let probs = softmax(&out.logits);
        assert!(probs.as_slice().iter().all(|&p| (p - 0.1).abs() < 1e-15));
    }

    #[test]
    fn forward_is_batch_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let model = MlpModel::init_uniform(&[784, 32, 10], &mut rng).unwrap();
        let batch = random_batch(&mut rng, 50, 784);
        let full = model.forward(&batch, None).unwrap();
        let single = model.forward(&batch.select_rows(&[17]), None).unwrap();
        for (a, b) in single.logits.row(0).iter().zip(full.logits.row(17)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn forward_matches_scalar_reference() {
        let model = tiny_model(9);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let batch = random_batch(&mut rng, 6, 4);
        let out = model.forward(&batch, None).unwrap();
        for i in 0..6 {
            let want = scalar_logits(&model, batch.row(i));
            for (g, w) in out.logits.row(i).iter().zip(&want) {
                assert!((g - w).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn softmax_rows_sum_to_one_and_survive_huge_logits() {
        let logits = Matrix::from_rows(&[[1e4, -1e4, 3.0], [0.1, 0.2, 0.3]]).unwrap();
        let p = softmax(&logits);
        for row in p.row_iter() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        let loss = cross_entropy(&logits, &[1, 0]);
        assert!(loss.is_finite() && loss > 1e4);
    }

    #[test]
    fn capture_disabled_returns_no_activations() {
        let model = tiny_model(1);
        let out = model.forward(&Matrix::zeros(2, 4), None).unwrap();
        assert!(out.hidden_activations.is_empty());
    }

    #[test]
    fn captured_shapes_follow_layers() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut model = MlpModel::init_uniform(&[4, 7, 5, 2], &mut rng).unwrap();
        model.set_capture(true);
        let out = model.forward(&random_batch(&mut rng, 3, 4), None).unwrap();
        let shapes: Vec<_> = out.hidden_activations.iter().map(Matrix::shape).collect();
        assert_eq!(shapes, vec![(3, 7), (3, 5)]);
        for h in &out.hidden_activations {
            assert!(h.as_slice().iter().all(|&a| a > 0.0 && a < 1.0));
        }
    }

    #[test]
    fn wrong_input_width_is_shape_error() {
        let model = tiny_model(1);
        assert!(matches!(
            model.forward(&Matrix::zeros(1, 5), None),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn out_of_range_label_is_input_error() {
        let model = tiny_model(1);
        assert!(matches!(
            model.backward(&Matrix::zeros(1, 4), &[2]),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn hidden_layer_limits() {
        assert!(MlpModel::zeros(&[4, 2]).is_err());
        assert!(MlpModel::zeros(&[4, 3, 3, 3, 3, 3, 2]).is_ok());
        assert!(MlpModel::zeros(&[4, 3, 3, 3, 3, 3, 3, 2]).is_err());
    }

    #[test]
    fn perfect_prediction_has_zero_output_gradient() {
        // The output bias alone saturates softmax to exactly one-hot in f64.
        let w0 = Matrix::zeros(2, 1);
        let w1 = Matrix::zeros(1, 2);
        let model = MlpModel::from_parameters(vec![w0, w1], vec![vec![0.0], vec![800.0, 0.0]])
            .unwrap();
        let batch = Matrix::from_rows(&[[0.3, 0.7], [0.1, 0.2]]).unwrap();
        let grads = model.backward(&batch, &[0, 0]).unwrap();
        assert!(grads.weights[1].as_slice().iter().all(|&g| g == 0.0));
        assert!(grads.biases[1].iter().all(|&g| g == 0.0));
        assert_eq!(grads.loss, 0.0);
    }

    #[test]
    fn duplicating_rows_keeps_mean_gradient() {
        let model = tiny_model(21);
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let batch = random_batch(&mut rng, 5, 4);
        let labels = [0u8, 1, 1, 0, 1];
        let doubled = Matrix::vstack(&[batch.clone(), batch.clone()]).unwrap();
        let labels2: Vec<u8> = labels.iter().chain(&labels).copied().collect();
        let a = model.backward(&batch, &labels).unwrap();
        let b = model.backward(&doubled, &labels2).unwrap();
        for (x, y) in a.tensors().iter().zip(b.tensors()) {
            for (p, q) in x.iter().zip(y) {
                assert!((p - q).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn backward_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut model = MlpModel::init_uniform(&[6, 5, 4, 3], &mut rng).unwrap();
        let batch = random_batch(&mut rng, 7, 6);
        let labels = [0u8, 1, 2, 2, 1, 0, 1];
        let grads = model.backward(&batch, &labels).unwrap();
        let analytic: Vec<Vec<f64>> = grads.tensors().iter().map(|t| t.to_vec()).collect();
        let h = 1e-5;
        for (t, tensor) in analytic.iter().enumerate() {
            for (j, &g) in tensor.iter().enumerate() {
                let orig = model.parameters()[t][j];
                model.parameters_mut()[t][j] = orig + h;
                let plus = model.forward(&batch, Some(&labels)).unwrap().loss.unwrap();
                model.parameters_mut()[t][j] = orig - h;
                let minus = model.forward(&batch, Some(&labels)).unwrap().loss.unwrap();
                model.parameters_mut()[t][j] = orig;
                let numeric = (plus - minus) / (2.0 * h);
                let rel = (g - numeric).abs() / g.abs().max(numeric.abs()).max(1e-8);
                assert!(rel < 1e-4, "tensor {t} entry {j}: {g} vs {numeric}");
            }
        }
    }

    #[test]
    fn uniform_model_ties_break_to_class_zero() {
        let model = MlpModel::zeros(&[4, 3, 10]).unwrap();
        let images = Matrix::filled(8, 4, 0.3);
        assert_eq!(accuracy(&model, &images, &[0; 8]).unwrap(), 1.0);
        assert_eq!(accuracy(&model, &images, &[1; 8]).unwrap(), 0.0);
    }

    #[test]
    fn accuracy_matches_per_sample_count() {
        let model = tiny_model(41);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let images = random_batch(&mut rng, 20, 4);
        let labels: Vec<u8> = (0..20).map(|i| (i % 2) as u8).collect();
        let mut hits = 0;
        for i in 0..20 {
            let logits = scalar_logits(&model, images.row(i));
            let pred = if logits[1] > logits[0] { 1 } else { 0 };
            hits += usize::from(pred == labels[i]);
        }
        let acc = accuracy(&model, &images, &labels).unwrap();
        assert_eq!(acc, hits as f64 / 20.0);
    }

    #[test]
    fn accuracy_rejects_empty_dataset() {
        let model = tiny_model(1);
        assert!(accuracy(&model, &Matrix::zeros(0, 4), &[]).is_err());
    }

    #[test]
    fn argmax_prefers_lowest_index_on_ties() {
        assert_eq!(argmax(&[0.2, 0.5, 0.5]), 1);
        assert_eq!(argmax(&[1.0, 1.0]), 0);
    }
}
