//! Halve-on-plateau learning-rate schedule.

/// New learning rate after the latest epoch in `history` (dev loss per
/// completed epoch, oldest first).
///
/// The rate halves (multiplies by `factor`) when the last `patience` epochs
/// each failed to improve on the best dev loss seen before them; a halving
/// resets the plateau counter without resetting the best loss.
pub fn lr_schedule_update(
    history: &[f64],
    current_lr: f64,
    patience: usize,
    factor: f64,
) -> f64 {
    assert!(!history.is_empty());
    assert!(patience >= 1);
    let mut best = f64::INFINITY;
    let mut streak = 0usize;
    let mut fired_at_last = false;
    for (i, &loss) in history.iter().enumerate() {
        if loss < best {
            best = loss;
            streak = 0;
        } else {
            streak += 1;
            if streak == patience {
                streak = 0;
                fired_at_last = i == history.len() - 1;
            }
        }
    }
    if fired_at_last {
        current_lr * factor
    } else {
        current_lr
    }
}
