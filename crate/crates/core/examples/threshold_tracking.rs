//! The comparator networks that track the two pruning thresholds, checked
//! against a plain sort.
//!
//! cargo run --example threshold_tracking

use polar_dts::pruning::networks::{max_network, median_network, rank_sort, second_max_network};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let pms = [5.0, 1.0, 7.0, 3.0, 8.0, 2.0, 6.0, 4.0];
    println!("metrics       {pms:?}");
    println!("rank sort     {:?}", rank_sort(&pms));
    println!("median        {}", median_network(&pms));
    println!("max           {}", max_network(&pms));
    println!("second max    {}", second_max_network(&pms));

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut mismatches = 0;
    for _ in 0..10_000 {
        let v: Vec<f64> = (0..16).map(|_| rng.random_range(0..20) as f64).collect();
        let mut s = v.clone();
        s.sort_by(f64::total_cmp);
        if median_network(&v) != s[8] || max_network(&v) != s[15] || second_max_network(&v) != s[14] {
            mismatches += 1;
        }
    }
    println!("\n10000 random lists of 16 with ties: {mismatches} mismatches against sorting");
}
