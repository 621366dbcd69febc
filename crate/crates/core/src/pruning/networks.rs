//! Behavioural models of the threshold-tracking circuits.
//!
//! These compute order statistics the way the comparator/multiplexer
//! networks do, not by calling a general-purpose sort, so that a sort can
//! serve as an independent oracle in tests.

/// Parallel rank sorter: every element compares itself against all others
/// and is routed to the output slot equal to its rank. Ties rank by input
/// position, so the output is a stable ascending arrangement.
pub fn rank_sort(values: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    for (i, &v) in values.iter().enumerate() {
        let rank = values
            .iter()
            .enumerate()
            .filter(|&(j, &w)| w < v || (w == v && j < i))
            .count();
        out[rank] = v;
    }
    out
}

/// Upper median (0-based rank `len/2`) of a power-of-two number of values.
///
/// The two halves go through rank sorters; then each stage compares the
/// upper medians of the two sorted candidate windows and keeps half of each
/// window: the upper half of the side with the smaller median and the lower
/// half of the other. Equal medians end the search. After `log2(len) - 1`
/// such stages a final comparator returns the larger of the last pair.
pub fn median_network(values: &[f64]) -> f64 {
    let len = values.len();
    assert!(len >= 2 && len.is_power_of_two(), "median network needs 2^k ≥ 2 inputs");
    let (lo, hi) = values.split_at(len / 2);
    let a = rank_sort(lo);
    let b = rank_sort(hi);
    merge_select(&a, &b)
}

/// Rank-`a.len()` element of `a ∪ b`, both ascending with equal power-of-two length.
fn merge_select(mut a: &[f64], mut b: &[f64]) -> f64 {
    loop {
        let m = a.len();
        if m == 1 {
            return a[0].max(b[0]);
        }
        let h = m / 2;
        if a[h] == b[h] {
            return a[h];
        }
        if a[h] < b[h] {
            a = &a[h..];
            b = &b[..h];
        } else {
            a = &a[..h];
            b = &b[h..];
        }
    }
}

fn pad_pow2(values: &[f64]) -> Vec<f64> {
    let width = values.len().next_power_of_two();
    let mut v = values.to_vec();
    v.resize(width, f64::NEG_INFINITY);
    v
}

/// Binary comparator tree; inputs are padded with `-inf` to a power of two.
pub fn max_network(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut level = pad_pow2(values);
    while level.len() > 1 {
        level = level.chunks_exact(2).map(|p| p[0].max(p[1])).collect();
    }
    level[0]
}

/// Comparator tree carrying (largest, second largest) pairs.
pub fn second_max_network(values: &[f64]) -> f64 {
    assert!(values.len() >= 2);
    let mut level: Vec<(f64, f64)> = pad_pow2(values)
        .into_iter()
        .map(|v| (v, f64::NEG_INFINITY))
        .collect();
    while level.len() > 1 {
        level = level
            .chunks_exact(2)
            .map(|p| {
                let ((a1, a2), (b1, b2)) = (p[0], p[1]);
                if a1 >= b1 {
                    (a1, a2.max(b1))
                } else {
                    (b1, b2.max(a1))
                }
            })
            .collect();
    }
    level[0].1
}

/// Order statistic `k` (0-based) through the full rank sorter.
pub fn order_statistic_network(values: &[f64], k: usize) -> f64 {
    rank_sort(values)[k]
}
