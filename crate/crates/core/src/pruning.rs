//! List pruning: exact selection and the double-threshold rule.
//!
//! With the `𝓛` current path metrics sorted ascending as `pm_0 ≤ … ≤ pm_{𝓛-1}`,
//! the double-threshold rule uses `AT = pm_{𝓛/2}` and `RT = pm_k`
//! (`k ≥ 𝓛/2`, default `𝓛 - 2`) and treats each of the `2𝓛` extensions
//! independently:
//!
//! 1. `pm < AT`: keep;
//! 2. `pm > RT`: discard;
//! 3. `AT ≤ pm ≤ RT`: fill the remaining slots, lowest scan position first
//!    (a priority encoder), or in random order with [`FillPolicy::Random`].
//!
//! Because every extension is compared against the same two constants the
//! rule is a single layer of comparators, unlike a sort.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub mod networks;

use networks::{max_network, median_network, order_statistic_network, second_max_network};

/// One child of a surviving path: `parent` is the path slot, `bit` the
/// hypothesised `u_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathExtension {
    pub parent: usize,
    pub bit: u8,
    pub pm: f64,
}

impl PathExtension {
    pub fn new(parent: usize, bit: u8, pm: f64) -> Self {
        PathExtension { parent, bit, pm }
    }

    /// Selection order: `(pm, parent, bit)`.
    pub fn rank_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.pm
            .total_cmp(&other.pm)
            .then(self.parent.cmp(&other.parent))
            .then(self.bit.cmp(&other.bit))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DtsThresholds {
    /// Acceptance threshold.
    pub at: f64,
    /// Rejection threshold.
    pub rt: f64,
    /// Sorted index of the path metric used as `rt`.
    pub rt_index: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PruneOutcome {
    /// Survivors in scan order.
    pub survivors: Vec<PathExtension>,
    pub kept_by_rule1: usize,
    pub pruned_by_rule2: usize,
    pub filled_by_rule3: usize,
    /// Fewer survivors than list slots even though enough extensions existed.
    pub starved: bool,
}

/// How rule 3 picks from the middle band.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FillPolicy {
    #[default]
    ScanOrder,
    Random,
}

/// `max(𝓛 - 2, 𝓛 / 2)`: the second-largest metric, or the median for `𝓛 = 2`.
pub fn default_rt_index(list_size: usize) -> usize {
    list_size.saturating_sub(2).max(list_size / 2)
}

/// The `list_size` best extensions by `(pm, parent, bit)`, best first.
pub fn lpo_sort(extensions: &[PathExtension], list_size: usize) -> Vec<PathExtension> {
    let mut v = extensions.to_vec();
    v.sort_by(PathExtension::rank_cmp);
    v.truncate(list_size);
    v
}

/// Double-threshold pruning with priority-encoder fill.
pub fn lpo_dts(extensions: &[PathExtension], th: &DtsThresholds, list_size: usize) -> PruneOutcome {
    dts(extensions, th, list_size, |_| {})
}

/// Double-threshold pruning with a uniformly random rule-3 fill.
pub fn lpo_dts_random<R: Rng + ?Sized>(
    extensions: &[PathExtension],
    th: &DtsThresholds,
    list_size: usize,
    rng: &mut R,
) -> PruneOutcome {
    dts(extensions, th, list_size, |band| band.shuffle(rng))
}

fn dts(
    extensions: &[PathExtension],
    th: &DtsThresholds,
    list_size: usize,
    order_band: impl FnOnce(&mut Vec<usize>),
) -> PruneOutcome {
    let mut keep = Vec::with_capacity(list_size);
    let mut band = Vec::with_capacity(extensions.len());
    let mut pruned = 0;
    for (idx, e) in extensions.iter().enumerate() {
        if e.pm < th.at {
            // cannot exceed 𝓛 with thresholds from the current metrics
            if keep.len() < list_size {
                keep.push(idx);
            }
        } else if e.pm > th.rt {
            pruned += 1;
        } else {
            band.push(idx);
        }
    }
    let kept = keep.len();
    let fill = (list_size - kept).min(band.len());
    order_band(&mut band);
    keep.extend_from_slice(&band[..fill]);
    keep.sort_unstable();
    let survivors: Vec<PathExtension> = keep.into_iter().map(|i| extensions[i]).collect();
    let starved = survivors.len() < list_size.min(extensions.len());
    PruneOutcome {
        survivors,
        kept_by_rule1: kept,
        pruned_by_rule2: pruned,
        filled_by_rule3: fill,
        starved,
    }
}

/// `|Ω(T)|`: extensions with metric strictly below `t`.
pub fn omega_cardinality(extensions: &[PathExtension], t: f64) -> usize {
    extensions.iter().filter(|e| e.pm < t).count()
}

/// `(AT, RT)` from the current metrics of all `𝓛` list slots (inactive
/// slots contribute `+inf`). `None` when fewer than two slots exist.
///
/// # Panics
/// If `rt_index` is outside `[𝓛/2, 𝓛)`.
pub fn track_thresholds(pms: &[f64], rt_index: usize) -> Option<DtsThresholds> {
    let len = pms.len();
    if len < 2 {
        return None;
    }
    assert!(
        (len / 2..len).contains(&rt_index),
        "rt index {rt_index} outside [{}, {len})",
        len / 2
    );
    let at = if len.is_power_of_two() {
        median_network(pms)
    } else {
        order_statistic_network(pms, len / 2)
    };
    let rt = if rt_index == len - 1 {
        max_network(pms)
    } else if rt_index == len - 2 {
        second_max_network(pms)
    } else {
        order_statistic_network(pms, rt_index)
    };
    Some(DtsThresholds { at, rt, rt_index })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Parent-major extensions of metrics `pms` under leaf magnitudes `mags`
    /// (all leaf LLRs positive, so bit 0 is free).
    fn extend(pms: &[f64], mags: &[f64]) -> Vec<PathExtension> {
        pms.iter()
            .zip(mags)
            .enumerate()
            .flat_map(|(p, (&pm, &m))| [PathExtension::new(p, 0, pm), PathExtension::new(p, 1, pm + m)])
            .collect()
    }

    fn pms_of(v: &[PathExtension]) -> Vec<f64> {
        v.iter().map(|e| e.pm).collect()
    }

    fn worked_example() -> Vec<PathExtension> {
        extend(&[1., 2., 3., 4.], &[1., 3., 1., 5.])
    }

    #[test]
    fn sort_examples() {
        let ext = worked_example();
        assert_eq!(pms_of(&ext), vec![1., 2., 2., 5., 3., 4., 4., 9.]);
        assert_eq!(pms_of(&lpo_sort(&ext, 4)), vec![1., 2., 2., 3.]);
        assert_eq!(lpo_sort(&ext[..2], 4).len(), 2);
        let flat: Vec<_> = (0..8).map(|i| PathExtension::new(i / 2, (i % 2) as u8, 7.0)).collect();
        assert_eq!(lpo_sort(&flat, 4), flat[..4].to_vec());
    }

    #[test]
    fn dts_example() {
        let ext = worked_example();
        let th = DtsThresholds { at: 3.0, rt: 4.0, rt_index: 2 };
        let out = lpo_dts(&ext, &th, 4);
        assert_eq!(out.kept_by_rule1, 3);
        assert_eq!(out.pruned_by_rule2, 2);
        assert_eq!(out.filled_by_rule3, 1);
        assert!(!out.starved);
        assert_eq!(pms_of(&out.survivors), vec![1., 2., 2., 3.]);
    }

    #[test]
    fn dts_loose_thresholds_take_scan_prefix() {
        let ext = worked_example();
        let th = DtsThresholds { at: f64::INFINITY, rt: f64::INFINITY, rt_index: 3 };
        let out = lpo_dts(&ext, &th, 4);
        assert_eq!(out.survivors, ext[..4].to_vec());
    }

    #[test]
    fn dts_starves_with_tight_rt() {
        let ext = worked_example();
        let th = DtsThresholds { at: 2.0, rt: 2.0, rt_index: 2 };
        let out = lpo_dts(&ext, &th, 4);
        assert_eq!(pms_of(&out.survivors), vec![1., 2., 2.]);
        assert!(out.starved);
        assert_eq!(out.survivors.len(), (2 * 4 - out.pruned_by_rule2).min(4));
    }

    #[test]
    fn dts_random_fill_is_seeded() {
        let ext = worked_example();
        let th = DtsThresholds { at: 2.0, rt: 9.0, rt_index: 3 };
        let a = lpo_dts_random(&ext, &th, 4, &mut ChaCha8Rng::seed_from_u64(1));
        let b = lpo_dts_random(&ext, &th, 4, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a, b);
        assert_eq!(a.survivors.len(), 4);
        assert!(a.survivors.iter().any(|e| e.pm == 1.0));
    }

    #[test]
    fn omega_limits() {
        let ext = worked_example();
        assert_eq!(omega_cardinality(&ext, 0.0), 0);
        assert_eq!(omega_cardinality(&ext, f64::INFINITY), 8);
    }

    #[test]
    fn thresholds() {
        let pms = [5., 1., 7., 3., 8., 2., 6., 4.];
        let th = track_thresholds(&pms, 7).unwrap();
        assert_eq!((th.at, th.rt), (5.0, 8.0));
        assert_eq!(track_thresholds(&pms, 6).unwrap().rt, 7.0);
        assert_eq!(track_thresholds(&pms, 5).unwrap().rt, 6.0);
        let flat = track_thresholds(&[4.0; 8], 6).unwrap();
        assert_eq!((flat.at, flat.rt), (4.0, 4.0));
        assert!(track_thresholds(&[1.0], 0).is_none());
        let sixteen: Vec<f64> = (0..16).map(|i| ((i * 7) % 16) as f64).collect();
        assert_eq!(track_thresholds(&sixteen, 14).unwrap().rt, 14.0);
        assert_eq!(default_rt_index(16), 14);
        assert_eq!(default_rt_index(2), 1);
        assert_eq!(default_rt_index(4), 2);
    }

    #[test]
    #[should_panic]
    fn rt_index_below_median_rejected() {
        track_thresholds(&[1., 2., 3., 4.], 1);
    }

    fn strictly_ascending(list: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (
            prop::collection::vec(1u32..20, list),
            prop::collection::vec(0u32..60, list),
        )
            .prop_map(|(steps, mags)| {
                let mut acc = 0.0;
                let pms = steps
                    .into_iter()
                    .map(|s| {
                        acc += f64::from(s);
                        acc
                    })
                    .collect();
                (pms, mags.into_iter().map(f64::from).collect())
            })
    }

    proptest! {
        #[test]
        fn omega_bounds((pms, mags) in strictly_ascending(8)) {
            let ext = extend(&pms, &mags);
            for (l, &t) in pms.iter().enumerate() {
                let c = omega_cardinality(&ext, t);
                prop_assert!(l <= c && c <= 2 * l);
            }
        }

        #[test]
        fn dts_counts_consistent(
            pms in prop::collection::vec(0u32..30, 8),
            mags in prop::collection::vec(0u32..30, 8),
            rt in 4usize..8,
        ) {
            let pms: Vec<f64> = pms.into_iter().map(f64::from).collect();
            let mags: Vec<f64> = mags.into_iter().map(f64::from).collect();
            let ext = extend(&pms, &mags);
            let th = track_thresholds(&pms, rt).unwrap();
            let out = lpo_dts(&ext, &th, 8);
            prop_assert!(out.survivors.len() <= 8);
            prop_assert!(omega_cardinality(&ext, th.at) <= 8);
            if rt == 7 {
                prop_assert!(out.pruned_by_rule2 <= 8);
            }
            prop_assert_eq!(out.kept_by_rule1 + out.filled_by_rule3, out.survivors.len());
            prop_assert_eq!(out.survivors.len(), (16 - out.pruned_by_rule2).min(8));
            if rt == 7 {
                prop_assert_eq!(out.survivors.len(), 8);
            }
            prop_assert_eq!(lpo_dts(&ext, &th, 8), out);
        }
    }
}
