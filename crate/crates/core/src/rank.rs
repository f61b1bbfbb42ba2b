//! Linear rank selection weights.
//!
//! Items are ranked worst-to-best and the i-th position (1-based) becomes
//! its weight, so the best item carries weight `n`. Ties share the mean of
//! the positions they span, which keeps equal-keyed items interchangeable
//! (an all-tied set degenerates to uniform selection).

/// Returns one weight per input key. With `favor_low` the lowest key ranks
/// best; otherwise the highest does.
pub fn linear_rank_weights(keys: &[f64], favor_low: bool) -> Vec<f64> {
    let n = keys.len();
    let mut order: Vec<usize> = (0..n).collect();
    // Worst-to-best: descending keys when low is favored, ascending otherwise.
    order.sort_by(|&a, &b| {
        let cmp = keys[a].partial_cmp(&keys[b]).unwrap_or(std::cmp::Ordering::Equal);
        if favor_low {
            cmp.reverse()
        } else {
            cmp
        }
    });
    let mut weights = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && keys[order[j + 1]] == keys[order[i]] {
            j += 1;
        }
        // Positions i+1 ..= j+1 share their mean.
        let mean = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            weights[idx] = mean;
        }
        i = j + 1;
    }
    weights
}
