//! Parameter update rules, written out element by element.
//!
//! Each `step_*` function advances one parameter tensor `theta` by one step
//! given its (already weight-decayed) gradient and its persistent state.
//! [`Optimizer`] owns one [`ParamState`] per model tensor and applies the
//! configured rule to all of them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::mlp::{Gradients, MlpModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Sgd,
    SgdMomentum,
    Adagrad,
    #[serde(rename = "rmsprop")]
    RmsProp,
    Adadelta,
    Adam,
    /// Adagrad with the step scaled by `k · G²`.
    AdagradSq,
    /// Adadelta with the step scaled by `k · E[g²]²`.
    AdadeltaSq,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 8] = [
        OptimizerKind::Sgd,
        OptimizerKind::SgdMomentum,
        OptimizerKind::Adagrad,
        OptimizerKind::RmsProp,
        OptimizerKind::Adadelta,
        OptimizerKind::Adam,
        OptimizerKind::AdagradSq,
        OptimizerKind::AdadeltaSq,
    ];

    /// The four optimizers every experiment family is run with.
    pub const STUDIED: [OptimizerKind; 4] = [
        OptimizerKind::Sgd,
        OptimizerKind::Adagrad,
        OptimizerKind::Adadelta,
        OptimizerKind::Adam,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::SgdMomentum => "sgd_momentum",
            OptimizerKind::Adagrad => "adagrad",
            OptimizerKind::RmsProp => "rmsprop",
            OptimizerKind::Adadelta => "adadelta",
            OptimizerKind::Adam => "adam",
            OptimizerKind::AdagradSq => "adagrad_sq",
            OptimizerKind::AdadeltaSq => "adadelta_sq",
        }
    }

    pub fn default_eps(self) -> f64 {
        match self {
            OptimizerKind::Sgd | OptimizerKind::SgdMomentum => 0.0,
            OptimizerKind::Adagrad | OptimizerKind::AdagradSq => 1e-10,
            OptimizerKind::RmsProp | OptimizerKind::Adam => 1e-8,
            OptimizerKind::Adadelta | OptimizerKind::AdadeltaSq => 1e-6,
        }
    }

    pub fn default_learning_rate(self) -> f64 {
        match self {
            OptimizerKind::Sgd | OptimizerKind::SgdMomentum => 0.1,
            OptimizerKind::Adagrad | OptimizerKind::AdagradSq => 0.1,
            OptimizerKind::RmsProp => 0.01,
            OptimizerKind::Adadelta | OptimizerKind::AdadeltaSq => 1.0,
            OptimizerKind::Adam => 0.001,
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Hyper-parameters for one update rule. Fields a rule does not use are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOptimizerConfig")]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub weight_decay: f64,
    /// γ for SGD momentum.
    pub momentum: f64,
    /// ρ for Adadelta; also the squared-gradient decay of RMSProp.
    pub rho: f64,
    pub betas: (f64, f64),
    pub eps: f64,
    /// Scale of the squared-accumulator factor in the `*_sq` variants.
    pub k: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOptimizerConfig {
    kind: OptimizerKind,
    learning_rate: Option<f64>,
    weight_decay: Option<f64>,
    momentum: Option<f64>,
    rho: Option<f64>,
    betas: Option<(f64, f64)>,
    eps: Option<f64>,
    k: Option<f64>,
}

impl TryFrom<RawOptimizerConfig> for OptimizerConfig {
    type Error = Error;

    fn try_from(raw: RawOptimizerConfig) -> Result<Self> {
        let d = OptimizerConfig::baseline(raw.kind);
        let cfg = OptimizerConfig {
            kind: raw.kind,
            learning_rate: raw.learning_rate.unwrap_or(d.learning_rate),
            weight_decay: raw.weight_decay.unwrap_or(d.weight_decay),
            momentum: raw.momentum.unwrap_or(d.momentum),
            rho: raw.rho.unwrap_or(d.rho),
            betas: raw.betas.unwrap_or(d.betas),
            eps: raw.eps.unwrap_or(d.eps),
            k: raw.k.unwrap_or(d.k),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl OptimizerConfig {
    /// Baseline hyper-parameters: SGD η=0.1 γ=0, Adadelta η=1 ρ=0.9,
    /// Adagrad η=0.1, Adam η=0.001 β=(0.9, 0.999), no weight decay.
    pub fn baseline(kind: OptimizerKind) -> Self {
        OptimizerConfig {
            kind,
            learning_rate: kind.default_learning_rate(),
            weight_decay: 0.0,
            momentum: if kind == OptimizerKind::SgdMomentum { 0.9 } else { 0.0 },
            rho: if kind == OptimizerKind::RmsProp { 0.99 } else { 0.9 },
            betas: (0.9, 0.999),
            eps: kind.default_eps(),
            k: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::Config(format!("optimizer.{name} = {v} must lie in [0, 1)")))
            }
        };
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "optimizer.learning_rate = {} must be positive",
                self.learning_rate
            )));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::Config(format!(
                "optimizer.weight_decay = {} must be non-negative",
                self.weight_decay
            )));
        }
        unit("momentum", self.momentum)?;
        unit("rho", self.rho)?;
        unit("betas[0]", self.betas.0)?;
        unit("betas[1]", self.betas.1)?;
        let needs_eps = !matches!(self.kind, OptimizerKind::Sgd | OptimizerKind::SgdMomentum);
        if needs_eps && !(self.eps > 0.0) {
            return Err(Error::Config(format!("optimizer.eps = {} must be positive", self.eps)));
        }
        if !(self.k > 0.0) {
            return Err(Error::Config(format!("optimizer.k = {} must be positive", self.k)));
        }
        Ok(())
    }
}

/// Per-tensor optimizer buffers, zero at creation.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamState {
    /// Momentum velocity `v`.
    pub velocity: Vec<f64>,
    /// Adagrad sum / RMSProp and Adadelta EMA of squared gradients.
    pub sq_grad: Vec<f64>,
    /// Adadelta EMA of squared updates `E[Δθ²]`.
    pub sq_update: Vec<f64>,
    /// Adam first moment `p`.
    pub first_moment: Vec<f64>,
    /// Adam second moment `q`.
    pub second_moment: Vec<f64>,
    /// Number of Adam steps taken.
    pub step: u64,
}

impl ParamState {
    pub fn new(kind: OptimizerKind, len: usize) -> Self {
        let buf = |used: bool| if used { vec![0.0; len] } else { Vec::new() };
        use OptimizerKind::*;
        ParamState {
            velocity: buf(matches!(kind, Sgd | SgdMomentum)),
            sq_grad: buf(matches!(kind, Adagrad | AdagradSq | RmsProp | Adadelta | AdadeltaSq)),
            sq_update: buf(matches!(kind, Adadelta | AdadeltaSq)),
            first_moment: buf(kind == Adam),
            second_moment: buf(kind == Adam),
            step: 0,
        }
    }
}

/// Coupled L2: `g + λ·θ`.
pub fn apply_weight_decay(grad: &Matrix, theta: &Matrix, weight_decay: f64) -> Result<Matrix> {
    if grad.shape() != theta.shape() {
        return Err(Error::Shape(format!(
            "gradient {:?} vs parameter {:?}",
            grad.shape(),
            theta.shape()
        )));
    }
    let data = decayed(grad.as_slice(), theta.as_slice(), weight_decay);
    Matrix::from_vec(grad.rows(), grad.cols(), data)
}

fn decayed(grad: &[f64], theta: &[f64], weight_decay: f64) -> Vec<f64> {
    grad.iter()
        .zip(theta)
        .map(|(&g, &t)| g + weight_decay * t)
        .collect()
}

fn check_lengths(theta: &[f64], grad: &[f64]) {
    assert_eq!(theta.len(), grad.len(), "parameter and gradient lengths differ");
}

/// SGD; with γ > 0, `v ← γ·v + g` and `θ ← θ − η·v`.
pub fn step_sgd(state: &mut ParamState, theta: &mut [f64], grad: &[f64], cfg: &OptimizerConfig) {
    check_lengths(theta, grad);
    let lr = cfg.learning_rate;
    if cfg.momentum == 0.0 {
        for (t, &g) in theta.iter_mut().zip(grad) {
            *t -= lr * g;
        }
        return;
    }
    let gamma = cfg.momentum;
    for ((t, &g), v) in theta.iter_mut().zip(grad).zip(state.velocity.iter_mut()) {
        *v = gamma * *v + g;
        *t -= lr * *v;
    }
}

/// Adagrad: `G ← G + g²`, `θ ← θ − η·g / (√G + ε)`.
pub fn step_adagrad(state: &mut ParamState, theta: &mut [f64], grad: &[f64], cfg: &OptimizerConfig) {
    check_lengths(theta, grad);
    for ((t, &g), acc) in theta.iter_mut().zip(grad).zip(state.sq_grad.iter_mut()) {
        *acc += g * g;
        *t -= cfg.learning_rate * g / (acc.sqrt() + cfg.eps);
    }
}

/// RMSProp: `G ← ρ·G + (1−ρ)·g²`, `θ ← θ − η·g / (√G + ε)`.
pub fn step_rmsprop(state: &mut ParamState, theta: &mut [f64], grad: &[f64], cfg: &OptimizerConfig) {
    check_lengths(theta, grad);
    let decay = cfg.rho;
    for ((t, &g), acc) in theta.iter_mut().zip(grad).zip(state.sq_grad.iter_mut()) {
        *acc = decay * *acc + (1.0 - decay) * g * g;
        *t -= cfg.learning_rate * g / (acc.sqrt() + cfg.eps);
    }
}

/// Adadelta raw update `Δθ` for one element; refreshes `E[g²]` first.
#[inline]
fn adadelta_delta(sq_grad: &mut f64, sq_update: f64, g: f64, cfg: &OptimizerConfig) -> f64 {
    *sq_grad = cfg.rho * *sq_grad + (1.0 - cfg.rho) * g * g;
    -((sq_update + cfg.eps).sqrt() / (*sq_grad + cfg.eps).sqrt()) * g
}

/// Adadelta with a learning rate. The numerator uses the update EMA from the
/// previous step; the EMA is refreshed with the new `Δθ` afterwards.
pub fn step_adadelta(state: &mut ParamState, theta: &mut [f64], grad: &[f64], cfg: &OptimizerConfig) {
    check_lengths(theta, grad);
    let rho = cfg.rho;
    for (((t, &g), eg), ed) in theta
        .iter_mut()
        .zip(grad)
        .zip(state.sq_grad.iter_mut())
        .zip(state.sq_update.iter_mut())
    {
        let delta = adadelta_delta(eg, *ed, g, cfg);
        *t += cfg.learning_rate * delta;
        *ed = rho * *ed + (1.0 - rho) * delta * delta;
    }
}

/// Adam with bias correction; the first step uses exponent 1.
pub fn step_adam(state: &mut ParamState, theta: &mut [f64], grad: &[f64], cfg: &OptimizerConfig) {
    check_lengths(theta, grad);
    let (b1, b2) = cfg.betas;
    let t = i32::try_from(state.step + 1).unwrap_or(i32::MAX);
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    for (((th, &g), p), q) in theta
        .iter_mut()
        .zip(grad)
        .zip(state.first_moment.iter_mut())
        .zip(state.second_moment.iter_mut())
    {
        *p = b1 * *p + (1.0 - b1) * g;
        *q = b2 * *q + (1.0 - b2) * g * g;
        let p_hat = *p / c1;
        let q_hat = *q / c2;
        *th -= cfg.learning_rate * p_hat / (q_hat.sqrt() + cfg.eps);
    }
    state.step += 1;
}

/// Adagrad scaled by `k·G²` using the accumulator after this step's update.
pub fn step_adagrad_sq(state: &mut ParamState, theta: &mut [f64], grad: &[f64], cfg: &OptimizerConfig) {
    check_lengths(theta, grad);
    for ((t, &g), acc) in theta.iter_mut().zip(grad).zip(state.sq_grad.iter_mut()) {
        *acc += g * g;
        *t -= cfg.learning_rate * cfg.k * *acc * *acc * g / (acc.sqrt() + cfg.eps);
    }
}

/// Adadelta scaled by `k·E[g²]²` using the freshly updated `E[g²]`. The
/// update EMA accumulates the unscaled `Δθ`, as in plain Adadelta.
pub fn step_adadelta_sq(state: &mut ParamState, theta: &mut [f64], grad: &[f64], cfg: &OptimizerConfig) {
    check_lengths(theta, grad);
    let rho = cfg.rho;
    for (((t, &g), eg), ed) in theta
        .iter_mut()
        .zip(grad)
        .zip(state.sq_grad.iter_mut())
        .zip(state.sq_update.iter_mut())
    {
        let delta = adadelta_delta(eg, *ed, g, cfg);
        *t += cfg.learning_rate * cfg.k * *eg * *eg * delta;
        *ed = rho * *ed + (1.0 - rho) * delta * delta;
    }
}

/// Applies weight decay, then the rule selected by `cfg.kind`.
pub fn step(state: &mut ParamState, theta: &mut [f64], grad: &[f64], cfg: &OptimizerConfig) -> Result<()> {
    if theta.len() != grad.len() {
        return Err(Error::Shape(format!(
            "parameter of length {} with gradient of length {}",
            theta.len(),
            grad.len()
        )));
    }
    let decayed_grad;
    let grad = if cfg.weight_decay != 0.0 {
        decayed_grad = decayed(grad, theta, cfg.weight_decay);
        &decayed_grad[..]
    } else {
        grad
    };
    match cfg.kind {
        OptimizerKind::Sgd | OptimizerKind::SgdMomentum => step_sgd(state, theta, grad, cfg),
        OptimizerKind::Adagrad => step_adagrad(state, theta, grad, cfg),
        OptimizerKind::RmsProp => step_rmsprop(state, theta, grad, cfg),
        OptimizerKind::Adadelta => step_adadelta(state, theta, grad, cfg),
        OptimizerKind::Adam => step_adam(state, theta, grad, cfg),
        OptimizerKind::AdagradSq => step_adagrad_sq(state, theta, grad, cfg),
        OptimizerKind::AdadeltaSq => step_adadelta_sq(state, theta, grad, cfg),
    }
    Ok(())
}

/// Optimizer state for every tensor of one model, indexed like [`MlpModel::parameters`].
#[derive(Debug, Clone)]
pub struct Optimizer {
    config: OptimizerConfig,
    states: Vec<ParamState>,
}

impl Optimizer {
    pub fn new(config: OptimizerConfig, model: &MlpModel) -> Self {
        let states = model
            .parameters()
            .iter()
            .map(|p| ParamState::new(config.kind, p.len()))
            .collect();
        Self { config, states }
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.config
    }

    pub fn states(&self) -> &[ParamState] {
        &self.states
    }

    pub fn step(&mut self, model: &mut MlpModel, grads: &Gradients) -> Result<()> {
        let grads = grads.tensors();
        let mut params = model.parameters_mut();
        if grads.len() != params.len() || params.len() != self.states.len() {
            return Err(Error::Shape(format!(
                "{} gradient tensors for {} parameters",
                grads.len(),
                params.len()
            )));
        }
        for ((theta, grad), state) in params.iter_mut().zip(grads).zip(self.states.iter_mut()) {
            step(state, theta, grad, &self.config)?;
        }
        Ok(())
    }
}

/// Predicted scale of SGD-with-momentum noise, `η/(1−γ)·(N/B − 1)`.
pub fn fluctuation_scale(learning_rate: f64, momentum: f64, dataset_size: usize, batch_size: usize) -> Result<f64> {
    if batch_size == 0 {
        return Err(Error::Input("batch size must be positive".into()));
    }
    if batch_size > dataset_size {
        return Err(Error::Input(format!(
            "batch size {batch_size} exceeds dataset size {dataset_size}"
        )));
    }
    if !(momentum < 1.0) {
        return Err(Error::Input(format!("momentum {momentum} must be below 1")));
    }
    Ok(learning_rate / (1.0 - momentum) * (dataset_size as f64 / batch_size as f64 - 1.0))
}

/// Learning rate that keeps `η / B` fixed when the batch size changes.
pub fn linear_scaled_learning_rate(base_rate: f64, base_batch: usize, batch_size: usize) -> f64 {
    base_rate * batch_size as f64 / base_batch as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(kind: OptimizerKind) -> OptimizerConfig {
        OptimizerConfig::baseline(kind)
    }

    fn run(kind: OptimizerKind, c: &OptimizerConfig, theta0: f64, grads: &[f64]) -> (f64, ParamState) {
        let mut state = ParamState::new(kind, 1);
        let mut theta = [theta0];
        for &g in grads {
            step(&mut state, &mut theta, &[g], c).unwrap();
        }
        (theta[0], state)
    }

    #[test]
    fn weight_decay_cases() {
        let g = Matrix::from_rows(&[[0.3, -0.2]]).unwrap();
        let t = Matrix::from_rows(&[[1.0, 2.0]]).unwrap();
        assert_eq!(apply_weight_decay(&g, &t, 0.0).unwrap(), g);
        let pure = apply_weight_decay(
            &Matrix::zeros(1, 1),
            &Matrix::from_rows(&[[2.0]]).unwrap(),
            0.5,
        )
        .unwrap();
        assert_eq!(pure.as_slice(), &[1.0]);
        let d = apply_weight_decay(&g, &t, 0.1).unwrap();
        assert_eq!(d.as_slice(), &[0.3 + 0.1 * 1.0, -0.2 + 0.1 * 2.0]);
        assert!(apply_weight_decay(&g, &Matrix::zeros(2, 1), 0.1).is_err());
    }

    #[test]
    fn sgd_one_step() {
        let (theta, _) = run(OptimizerKind::Sgd, &cfg(OptimizerKind::Sgd), 1.0, &[0.5]);
        assert!((theta - 0.95).abs() < 1e-15);
    }

    #[test]
    fn momentum_two_steps() {
        let mut c = cfg(OptimizerKind::SgdMomentum);
        c.momentum = 0.9;
        c.learning_rate = 0.1;
        let (t1, s1) = run(c.kind, &c, 0.0, &[1.0]);
        assert!((t1 + 0.1).abs() < 1e-15);
        assert_eq!(s1.velocity, vec![1.0]);
        let (t2, s2) = run(c.kind, &c, 0.0, &[1.0, 1.0]);
        assert!((t2 + 0.29).abs() < 1e-15);
        assert!((s2.velocity[0] - 1.9).abs() < 1e-15);
    }

    #[test]
    fn adagrad_hand_recursion() {
        let c = cfg(OptimizerKind::Adagrad);
        let (t1, _) = run(c.kind, &c, 0.0, &[1.0]);
        assert!((t1 + 0.1).abs() < 1e-9);
        let (t2, s) = run(c.kind, &c, 0.0, &[1.0, 1.0]);
        assert_eq!(s.sq_grad, vec![2.0]);
        assert!((t2 - t1 + 0.070_710_678_1).abs() < 1e-9);
    }

    #[test]
    fn rmsprop_cases() {
        let mut c = cfg(OptimizerKind::RmsProp);
        c.rho = 0.9;
        c.learning_rate = 0.1;
        let (t, s) = run(c.kind, &c, 0.0, &[1.0]);
        assert!((s.sq_grad[0] - 0.1).abs() < 1e-15);
        assert!((t + 0.316_227_766).abs() < 1e-8);
        c.rho = 0.0;
        let (t, _) = run(c.kind, &c, 0.0, &[-2.0]);
        assert!((t - 0.1 * 2.0 / (2.0 + c.eps)).abs() < 1e-15);
    }

    #[test]
    fn adadelta_first_step_closed_form() {
        let c = cfg(OptimizerKind::Adadelta);
        let (t, s) = run(c.kind, &c, 0.0, &[1.0]);
        let expected = -(1e-6f64).sqrt() / (0.1f64 + 1e-6).sqrt();
        assert!((t - expected).abs() < 1e-15);
        assert!((t + 0.003_162_3).abs() < 1e-7);
        assert!((s.sq_update[0] - 0.1 * expected * expected).abs() < 1e-20);
    }

    #[test]
    fn adam_first_step_is_sign_step() {
        let c = cfg(OptimizerKind::Adam);
        let (t, s) = run(c.kind, &c, 0.0, &[0.5]);
        assert!((t + 0.001).abs() < 1e-10);
        assert_eq!(s.step, 1);
    }

    #[test]
    fn adagrad_sq_first_step_and_reduction() {
        let c = cfg(OptimizerKind::AdagradSq);
        let (t, _) = run(c.kind, &c, 0.0, &[1.0]);
        assert!((t + 0.1).abs() < 1e-9);
        // With G fixed at 4 after the step, k = 1/G² turns it into Adagrad.
        let mut sq = c;
        sq.k = 1.0 / 16.0;
        let mut plain = cfg(OptimizerKind::Adagrad);
        plain.eps = sq.eps;
        let (a, _) = run(sq.kind, &sq, 0.3, &[2.0]);
        let (b, _) = run(plain.kind, &plain, 0.3, &[2.0]);
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn adadelta_sq_first_step() {
        let c = cfg(OptimizerKind::AdadeltaSq);
        let (t, _) = run(c.kind, &c, 0.0, &[1.0]);
        assert!((t + 3.1623e-5).abs() < 1e-9, "{t}");
    }

    #[test]
    fn zero_gradient_is_fixed_point_for_every_kind() {
        for kind in OptimizerKind::ALL {
            let c = cfg(kind);
            let fresh = ParamState::new(kind, 1);
            let (t, s) = run(kind, &c, 0.7, &[0.0, 0.0, 0.0]);
            assert_eq!(t, 0.7, "{kind}");
            let mut expected = fresh;
            if kind == OptimizerKind::Adam {
                expected.step = 3;
            }
            assert_eq!(s, expected, "{kind}");
        }
    }

    #[test]
    fn decay_enters_through_gradient() {
        for kind in OptimizerKind::ALL {
            let mut c = cfg(kind);
            c.weight_decay = 0.3;
            let (a, _) = run(kind, &c, 1.5, &[0.0]);
            let mut plain = c;
            plain.weight_decay = 0.0;
            let (b, _) = run(kind, &plain, 1.5, &[0.3 * 1.5]);
            assert_eq!(a, b, "{kind}");
        }
    }

    #[test]
    fn config_defaults_and_validation() {
        let c: OptimizerConfig = toml::from_str("kind = \"adam\"").unwrap();
        assert_eq!(c, OptimizerConfig::baseline(OptimizerKind::Adam));
        let c: OptimizerConfig = toml::from_str("kind = \"sgd\"\nmomentum = 0.5").unwrap();
        assert_eq!(c.momentum, 0.5);
        assert!(toml::from_str::<OptimizerConfig>("kind = \"sgd\"\nmomentum = 1.0").is_err());
        assert!(toml::from_str::<OptimizerConfig>("kind = \"sgd\"\nlearning_rate = 0.0").is_err());
        assert!(toml::from_str::<OptimizerConfig>("kind = \"sgd\"\nlr = 0.1").is_err());
        assert!(toml::from_str::<OptimizerConfig>("kind = \"lbfgs\"").is_err());
        let back: OptimizerConfig =
            toml::from_str(&toml::to_string(&OptimizerConfig::baseline(OptimizerKind::Adadelta)).unwrap())
                .unwrap();
        assert_eq!(back, OptimizerConfig::baseline(OptimizerKind::Adadelta));
    }

    #[test]
    fn fluctuation_scale_cases() {
        assert_eq!(fluctuation_scale(0.1, 0.0, 100, 100).unwrap(), 0.0);
        assert!((fluctuation_scale(0.1, 0.0, 100, 10).unwrap() - 0.9).abs() < 1e-15);
        let base = fluctuation_scale(0.1, 0.0, 60000, 50).unwrap();
        let with = fluctuation_scale(0.1, 0.9, 60000, 50).unwrap();
        assert!((with / base - 10.0).abs() < 1e-12);
        assert!(fluctuation_scale(0.1, 0.0, 10, 0).is_err());
        assert!(fluctuation_scale(0.1, 1.0, 10, 1).is_err());
    }

    #[test]
    fn linear_scaling() {
        assert_eq!(linear_scaled_learning_rate(0.1, 50, 500), 1.0);
    }
}
