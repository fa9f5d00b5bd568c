//! Every update rule on the same ill-conditioned quadratic
//! `f(x, y) = x² / 2 + 25 y²`, starting from (3, 1).

use sparsity_lab::optim::{fluctuation_scale, step, OptimizerConfig, OptimizerKind, ParamState};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:<14} {:>12} {:>12} {:>12}", "optimizer", "x", "y", "f");
    for kind in OptimizerKind::ALL {
        let mut cfg = OptimizerConfig::baseline(kind);
        cfg.learning_rate = match kind {
            OptimizerKind::Sgd | OptimizerKind::SgdMomentum => 0.03,
            OptimizerKind::Adadelta => 1.0,
            _ => 0.1,
        };
        if matches!(kind, OptimizerKind::AdagradSq | OptimizerKind::AdadeltaSq) {
            cfg.k = 1e-7;
        }
        let mut state = ParamState::new(kind, 2);
        let mut theta = [3.0, 1.0];
        for _ in 0..200 {
            let grad = [theta[0], 50.0 * theta[1]];
            step(&mut state, &mut theta, &grad, &cfg)?;
        }
        let f = theta[0] * theta[0] / 2.0 + 25.0 * theta[1] * theta[1];
        println!("{:<14} {:>12.4e} {:>12.4e} {:>12.4e}", kind.name(), theta[0], theta[1], f);
    }

    println!();
    println!("momentum noise scale on 60k images, batch 50, lr 0.1:");
    for gamma in [0.0, 0.5, 0.9, 0.99] {
        println!("  gamma {gamma:<4} -> {:.1}", fluctuation_scale(0.1, gamma, 60_000, 50)?);
    }
    Ok(())
}
