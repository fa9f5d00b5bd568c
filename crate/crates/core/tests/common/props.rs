//! Property checks shared by the proptest suites and the acceptance runner.
//! Each returns `Err` with a description of the first violation.

use sparsity_lab::data::{BatchSchedule, ScheduleMode, NUM_CLASSES};
use sparsity_lab::metrics::{
    aggregate_uniform, aggregate_weighted, ccmas_selectivity, hoyer_row, hoyer_sparsity, layer_metrics,
    ActivationTrace,
};
use sparsity_lab::optim::{step, OptimizerConfig, ParamState};
use sparsity_lab::Matrix;

use super::ScalarOracle;

pub const TOL: f64 = 1e-12;

fn close(a: f64, b: f64, what: &str) -> Result<(), String> {
    if (a - b).abs() <= TOL {
        Ok(())
    } else {
        Err(format!("{what}: {a} vs {b}"))
    }
}

fn permute_rows(m: &Matrix, perm: &[usize]) -> Matrix {
    m.select_rows(perm)
}

/// Bounds, scale invariance, zero-column monotonicity and row-order
/// invariance of Hoyer sparsity. `m` must be non-negative with ≥ 2 columns.
pub fn check_hoyer(m: &Matrix, alpha: f64, perm: &[usize]) -> Result<(), String> {
    let s = hoyer_sparsity(m).map_err(|e| e.to_string())?;
    if !(0.0..=1.0).contains(&s) {
        return Err(format!("sparsity {s} outside [0, 1]"));
    }
    for row in m.row_iter() {
        let h = hoyer_row(row);
        if !(0.0..=1.0).contains(&h) {
            return Err(format!("row sparsity {h} outside [0, 1]"));
        }
        let scaled: Vec<f64> = row.iter().map(|x| alpha * x).collect();
        close(hoyer_row(&scaled), h, "row scale invariance")?;
        let mut padded = row.to_vec();
        padded.push(0.0);
        if hoyer_row(&padded) < h - TOL {
            return Err(format!("zero column lowered sparsity {h} to {}", hoyer_row(&padded)));
        }
    }
    let scaled = m.map(|x| alpha * x);
    close(hoyer_sparsity(&scaled).map_err(|e| e.to_string())?, s, "scale invariance")?;
    close(
        hoyer_sparsity(&permute_rows(m, perm)).map_err(|e| e.to_string())?,
        s,
        "sample-order invariance",
    )?;
    Ok(())
}

/// One-hot rows score 1 and constant rows score 0, for width `n ≥ 2`.
pub fn check_hoyer_exact(n: usize, hot: usize, value: f64) -> Result<(), String> {
    let mut one_hot = vec![0.0; n];
    one_hot[hot % n] = value;
    close(hoyer_row(&one_hot), 1.0, "one-hot row")?;
    close(hoyer_row(&vec![value; n]), 0.0, "uniform row")?;
    Ok(())
}

/// CCMAS bounds, class-relabelling invariance and sample-order invariance.
/// `layer` must be strictly positive and `labels` must cover every class.
pub fn check_ccmas(layer: &Matrix, labels: &[u8], class_perm: &[u8], perm: &[usize]) -> Result<(), String> {
    let (sel, mean, std) = ccmas_selectivity(layer, labels).map_err(|e| e.to_string())?;
    for (j, &s) in sel.iter().enumerate() {
        if !(0.0..1.0).contains(&s) {
            return Err(format!("neuron {j} selectivity {s} outside [0, 1)"));
        }
    }
    let relabelled: Vec<u8> = labels.iter().map(|&c| class_perm[usize::from(c)]).collect();
    let (sel2, _, _) = ccmas_selectivity(layer, &relabelled).map_err(|e| e.to_string())?;
    for (a, b) in sel.iter().zip(&sel2) {
        close(*a, *b, "class permutation invariance")?;
    }
    let shuffled_labels: Vec<u8> = perm.iter().map(|&i| labels[i]).collect();
    let (sel3, mean3, std3) =
        ccmas_selectivity(&permute_rows(layer, perm), &shuffled_labels).map_err(|e| e.to_string())?;
    for (a, b) in sel.iter().zip(&sel3) {
        close(*a, *b, "sample-order invariance")?;
    }
    close(mean, mean3, "sample-order invariance of the mean")?;
    close(std, std3, "sample-order invariance of the spread")?;
    Ok(())
}

/// With one hidden layer, both aggregates equal that layer's metrics.
pub fn check_single_layer_aggregates(layer: &Matrix, labels: &[u8]) -> Result<(), String> {
    let trace = ActivationTrace::new(vec![layer.clone()], labels.to_vec()).map_err(|e| e.to_string())?;
    let lm = layer_metrics(layer, labels).map_err(|e| e.to_string())?;
    let per_layer = [lm.clone()];
    let uniform = aggregate_uniform(&per_layer).map_err(|e| e.to_string())?;
    let weighted = aggregate_weighted(&per_layer, &trace).map_err(|e| e.to_string())?;
    for (agg, what) in [(uniform, "uniform"), (weighted, "weighted")] {
        close(agg.sparsity, lm.sparsity, what)?;
        close(agg.selectivity_mean, lm.selectivity_mean, what)?;
        close(agg.selectivity_std, lm.selectivity_std, what)?;
    }
    Ok(())
}

/// Largest absolute gap between the library step and the scalar oracle along
/// one trajectory, run on a one-element tensor.
pub fn oracle_gap(cfg: &OptimizerConfig, theta0: f64, grads: &[f64]) -> Result<f64, String> {
    let mut state = ParamState::new(cfg.kind, 1);
    let mut theta = [theta0];
    let mut oracle = ScalarOracle::new(*cfg, theta0);
    let mut worst: f64 = 0.0;
    for &g in grads {
        step(&mut state, &mut theta, &[g], cfg).map_err(|e| e.to_string())?;
        oracle.step(g);
        let gap = (theta[0] - oracle.theta()).abs();
        if gap.is_nan() {
            return Err(format!("non-finite trajectory for {:?}", cfg.kind));
        }
        worst = worst.max(gap);
    }
    Ok(worst)
}

/// Zero gradients from a fresh state leave parameters and buffers untouched.
pub fn check_zero_gradient_fixed_point(cfg: &OptimizerConfig, theta0: &[f64], steps: usize) -> Result<(), String> {
    let mut cfg = *cfg;
    cfg.weight_decay = 0.0;
    let mut state = ParamState::new(cfg.kind, theta0.len());
    let fresh = state.clone();
    let mut theta = theta0.to_vec();
    let zeros = vec![0.0; theta0.len()];
    for _ in 0..steps {
        step(&mut state, &mut theta, &zeros, &cfg).map_err(|e| e.to_string())?;
    }
    if theta != theta0 {
        return Err(format!("{:?} moved parameters on zero gradients", cfg.kind));
    }
    let mut counted = state.clone();
    counted.step = fresh.step;
    if counted != fresh {
        return Err(format!("{:?} changed its buffers on zero gradients", cfg.kind));
    }
    Ok(())
}

/// Every mode worth checking for a given batch size.
pub fn schedule_modes() -> Vec<ScheduleMode> {
    vec![
        ScheduleMode::Random,
        ScheduleMode::Sorted,
        ScheduleMode::SingleClass,
        ScheduleMode::PairClass,
        ScheduleMode::FiveClass,
        ScheduleMode::ConsecutiveRun(1),
        ScheduleMode::ConsecutiveRun(5),
        ScheduleMode::ConsecutiveRun(10),
    ]
}

/// Coverage, purity and determinism of one epoch.
pub fn check_schedule(schedule: &BatchSchedule, labels: &[u8], epoch: usize) -> Result<(), String> {
    let batches = schedule.make_epoch_from_labels(labels, epoch).map_err(|e| e.to_string())?;
    let again = schedule.make_epoch_from_labels(labels, epoch).map_err(|e| e.to_string())?;
    if batches != again {
        return Err(format!("{} epoch {epoch} is not reproducible", schedule.mode));
    }
    let mut seen: Vec<usize> = batches.iter().flatten().copied().collect();
    seen.sort_unstable();
    if seen != (0..labels.len()).collect::<Vec<_>>() {
        return Err(format!("{} epoch {epoch} does not cover every sample exactly once", schedule.mode));
    }
    let groups = schedule.groups();
    for batch in &batches {
        if batch.is_empty() || batch.len() > schedule.batch_size {
            return Err(format!("{} produced a batch of {}", schedule.mode, batch.len()));
        }
        let mut classes: Vec<u8> = batch.iter().map(|&i| labels[i]).collect();
        classes.sort_unstable();
        classes.dedup();
        let allowed = match schedule.mode {
            ScheduleMode::SingleClass | ScheduleMode::PairClass | ScheduleMode::FiveClass => {
                groups.iter().any(|g| classes.iter().all(|c| g.contains(c)))
            }
            ScheduleMode::ConsecutiveRun(_) => classes.len() == 1,
            _ => classes.len() <= NUM_CLASSES,
        };
        if !allowed {
            return Err(format!("{} batch mixes classes {classes:?}", schedule.mode));
        }
    }
    if let ScheduleMode::ConsecutiveRun(k) = schedule.mode {
        let stream: Vec<u8> = batches.iter().map(|b| labels[b[0]]).collect();
        let switches = stream.windows(2).filter(|w| w[0] != w[1]).count();
        let runs: usize = (0..NUM_CLASSES as u8)
            .map(|c| labels.iter().filter(|&&l| l == c).count().div_ceil(k))
            .sum();
        if switches + 1 > runs {
            return Err(format!("{switches} label switches exceed the {runs} runs of length {k}"));
        }
    }
    if schedule.mode == ScheduleMode::Sorted {
        let stream: Vec<u8> = batches.iter().flatten().map(|&i| labels[i]).collect();
        if stream.windows(2).any(|w| w[0] > w[1]) {
            return Err("sorted schedule is out of label order".into());
        }
    }
    Ok(())
}
