/// Brute force over the multi-hot matrices: visit every (example, label)
/// cell, then F1 = 2TP / (2TP + FP + FN), 1 when all counts are zero.
pub fn brute_force_micro_f1(gold: &[Vec<bool>], pred: &[Vec<bool>]) -> f64 {
    let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
    for (g_row, p_row) in gold.iter().zip(pred) {
        for (&g, &p) in g_row.iter().zip(p_row) {
            match (g, p) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                (false, false) => {}
            }
        }
    }
    if tp + fp + fn_ == 0 {
        1.0
    } else {
        (2 * tp) as f64 / (2 * tp + fp + fn_) as f64
    }
}
