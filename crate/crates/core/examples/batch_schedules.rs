//! Shows what each batch composition rule does to the label stream.

use sparsity_lab::data::{BatchSchedule, ScheduleMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let labels: Vec<u8> = (0..60).map(|i| (i * 7 % 10) as u8).collect();
    let modes = [
        (ScheduleMode::Random, 6),
        (ScheduleMode::Sorted, 6),
        (ScheduleMode::SingleClass, 3),
        (ScheduleMode::PairClass, 4),
        (ScheduleMode::FiveClass, 6),
        (ScheduleMode::ConsecutiveRun(5), 1),
    ];
    for (mode, batch) in modes {
        let schedule = BatchSchedule::new(mode, batch).with_seed(1);
        let batches = schedule.make_epoch_from_labels(&labels, 0)?;
        let shown: Vec<String> = batches
            .iter()
            .take(8)
            .map(|b| b.iter().map(|&i| labels[i].to_string()).collect::<String>())
            .collect();
        println!("{:<18} {} batches: {} ...", mode.to_string(), batches.len(), shown.join(" "));
    }

    let mut custom = BatchSchedule::new(ScheduleMode::PairClass, 4).with_seed(1);
    custom.class_groups = Some(vec![vec![3, 7], vec![0, 8], vec![1, 4], vec![2, 5], vec![6, 9]]);
    let batches = custom.make_epoch_from_labels(&labels, 0)?;
    let first: Vec<u8> = batches[0].iter().map(|&i| labels[i]).collect();
    println!("custom pairs, first batch labels {first:?}");
    Ok(())
}
