//! Successive-cancellation kernel.
//!
//! Stage `s` of the scheduling tree holds `N / 2^s` LLRs; stage 0 is the
//! channel and stage `n` is the single leaf LLR `L_i`. Leaf `i` is reached
//! from leaf `i - 1` by recomputing stages `n - tz(i) ..= n`: one g node at
//! the top of that range, f nodes below it.

use serde::{Deserialize, Serialize};

use crate::arith::Arithmetic;
use crate::polar_code::PolarCode;

/// Check-node (f) rule.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckNode {
    /// `sign(a) sign(b) min(|a|, |b|)`, the hardware rule.
    #[default]
    MinSum,
    /// `2 atanh(tanh(a/2) tanh(b/2))`; float arithmetic only.
    Exact,
}

/// Θ: 0 for `L ≥ 0`, 1 otherwise.
#[inline]
pub fn hard_decision(llr: f64) -> u8 {
    (llr < 0.0) as u8
}

#[inline]
pub fn f_node(a: f64, b: f64) -> f64 {
    let m = a.abs().min(b.abs());
    if (a < 0.0) != (b < 0.0) {
        -m
    } else {
        m
    }
}

/// Exact check-node combination in Jacobian-logarithm form.
pub fn f_node_exact(a: f64, b: f64) -> f64 {
    let corr = (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p();
    let v = f_node(a, b) + corr;
    // the correction never flips the sign of the min-sum term
    if f_node(a, b) >= 0.0 {
        v.max(0.0)
    } else {
        v.min(0.0)
    }
}

#[inline]
pub fn g_node(a: f64, b: f64, u: u8) -> f64 {
    if u & 1 == 0 {
        b + a
    } else {
        b - a
    }
}

/// Top stage recomputed when moving to leaf `i`.
#[inline]
pub(crate) fn first_stage(i: usize, n: u32) -> u32 {
    if i == 0 {
        1
    } else {
        n - i.trailing_zeros()
    }
}

#[inline]
pub(crate) fn combine(check: CheckNode, arith: &Arithmetic, a: f64, b: f64) -> f64 {
    match check {
        CheckNode::MinSum => f_node(a, b),
        CheckNode::Exact => arith.sat_llr(f_node_exact(a, b)),
    }
}

/// Stage memories and partial sums of a single SC lane.
#[derive(Debug, Clone)]
pub struct ScEngine {
    n: u32,
    arith: Arithmetic,
    check: CheckNode,
    llr: Vec<Vec<f64>>,
    /// `ps[s][c]`: re-encoding of the last completed stage-`s` node whose
    /// index has parity `c`.
    ps: Vec<[Vec<u8>; 2]>,
}

impl ScEngine {
    pub fn new(n: u32, arith: Arithmetic, check: CheckNode) -> Self {
        let len = 1usize << n;
        let llr = (0..=n).map(|s| vec![0.0; len >> s]).collect();
        let ps = (0..=n)
            .map(|s| [vec![0u8; len >> s], vec![0u8; len >> s]])
            .collect();
        ScEngine {
            n,
            arith,
            check,
            llr,
            ps,
        }
    }

    pub fn len(&self) -> usize {
        1 << self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn load(&mut self, channel: &[f64]) {
        assert_eq!(channel.len(), self.len(), "channel LLR count");
        self.llr[0].copy_from_slice(channel);
    }

    /// Evaluates the scheduling-tree nodes on the way to leaf `i`, stopping
    /// at `last_stage`.
    pub fn descend(&mut self, i: usize, last_stage: u32) {
        let n = self.n;
        for s in first_stage(i, n)..=last_stage {
            let k = i >> (n - s);
            let s = s as usize;
            let (up, down) = self.llr.split_at_mut(s);
            let parent = &up[s - 1];
            let out = &mut down[0];
            let w = out.len();
            let (a, b) = parent.split_at(w);
            if k & 1 == 0 {
                for j in 0..w {
                    out[j] = combine(self.check, &self.arith, a[j], b[j]);
                }
            } else {
                let left = &self.ps[s][0];
                for j in 0..w {
                    out[j] = self.arith.sat_llr(g_node(a[j], b[j], left[j]));
                }
            }
        }
    }

    /// `L_i^n`, assuming leaves `0..i` have been committed in order.
    pub fn leaf_llr(&mut self, i: usize) -> f64 {
        self.descend(i, self.n);
        self.llr[self.n as usize][0]
    }

    pub fn stage(&self, s: u32) -> &[f64] {
        &self.llr[s as usize]
    }

    /// Records the decision for leaf `i` and folds completed subtrees into
    /// their parents' partial sums.
    pub fn commit(&mut self, i: usize, bit: u8) {
        let mut s = self.n as usize;
        let mut k = i;
        self.ps[s][k & 1][0] = bit & 1;
        while k & 1 == 1 && s > 0 {
            let slot = (k >> 1) & 1;
            let (up, down) = self.ps.split_at_mut(s);
            let [left, right] = &down[0];
            let dst = &mut up[s - 1][slot];
            let w = left.len();
            for j in 0..w {
                dst[j] = left[j] ^ right[j];
                dst[j + w] = right[j];
            }
            s -= 1;
            k >>= 1;
        }
    }

    /// Re-encoding of the stage-`s` node with index parity `parity`.
    pub fn partial_sums(&self, s: u32, parity: usize) -> &[u8] {
        &self.ps[s as usize][parity]
    }
}

/// `L_i^n` for `i = decided_prefix.len()` computed from scratch.
pub fn leaf_llrs(
    channel: &[f64],
    decided_prefix: &[u8],
    arith: Arithmetic,
    check: CheckNode,
) -> f64 {
    let n = channel.len().trailing_zeros();
    assert!(channel.len().is_power_of_two());
    assert!(decided_prefix.len() < channel.len());
    let mut eng = ScEngine::new(n, arith, check);
    eng.load(channel);
    for (i, &b) in decided_prefix.iter().enumerate() {
        eng.descend(i, n);
        eng.commit(i, b);
    }
    eng.leaf_llr(decided_prefix.len())
}

/// Plain SC decoder; reusable across frames.
#[derive(Debug, Clone)]
pub struct ScDecoder {
    frozen: Vec<bool>,
    engine: ScEngine,
}

impl ScDecoder {
    pub fn new(code: &PolarCode, arith: Arithmetic, check: CheckNode) -> Self {
        ScDecoder {
            frozen: code.frozen_mask().to_vec(),
            engine: ScEngine::new(code.n(), arith, check),
        }
    }

    pub fn decode(&mut self, channel: &[f64]) -> Vec<u8> {
        self.engine.load(channel);
        (0..self.frozen.len())
            .map(|i| {
                let l = self.engine.leaf_llr(i);
                let bit = if self.frozen[i] { 0 } else { hard_decision(l) };
                self.engine.commit(i, bit);
                bit
            })
            .collect()
    }

    pub fn engine(&self) -> &ScEngine {
        &self.engine
    }
}

pub fn sc_decode(channel: &[f64], code: &PolarCode, arith: Arithmetic) -> Vec<u8> {
    ScDecoder::new(code, arith, CheckNode::MinSum).decode(channel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polar_code::polar_transform;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Recursive SC leaf LLR with no memory reuse.
    fn leaf_rec(llr: &[f64], prefix: &[u8]) -> f64 {
        if llr.len() == 1 {
            return llr[0];
        }
        let half = llr.len() / 2;
        let (a, b) = llr.split_at(half);
        if prefix.len() < half {
            let up: Vec<f64> = a.iter().zip(b).map(|(&x, &y)| f_node(x, y)).collect();
            leaf_rec(&up, prefix)
        } else {
            let mut enc = prefix[..half].to_vec();
            polar_transform(&mut enc);
            let up: Vec<f64> = (0..half).map(|j| g_node(a[j], b[j], enc[j])).collect();
            leaf_rec(&up, &prefix[half..])
        }
    }

    #[test]
    fn decision_rule() {
        assert_eq!(hard_decision(0.0), 0);
        assert_eq!(hard_decision(3.5), 0);
        assert_eq!(hard_decision(-0.01), 1);
    }

    #[test]
    fn node_functions() {
        for x in [-4.0, 0.0, 2.5] {
            assert_eq!(f_node(0.0, x), 0.0);
            assert_eq!(g_node(0.0, x, 0), x);
            assert_eq!(g_node(0.0, x, 1), x);
        }
        assert_eq!(f_node(2.0, -3.0), -2.0);
        assert_eq!(f_node(-2.0, -3.0), 2.0);
        assert_eq!(g_node(2.0, 3.0, 0), 5.0);
        assert_eq!(g_node(2.0, 3.0, 1), 1.0);
    }

    #[test]
    fn exact_check_node() {
        let (a, b) = (1.3f64, -0.7f64);
        let want = 2.0 * ((a / 2.0).tanh() * (b / 2.0).tanh()).atanh();
        assert!((f_node_exact(a, b) - want).abs() < 1e-12);
        assert!(f_node_exact(40.0, 50.0) > 39.0);
    }

    #[test]
    fn depth_one_tree() {
        let ch = [1.5, -0.5];
        assert_eq!(leaf_llrs(&ch, &[], Arithmetic::Float, CheckNode::MinSum), f_node(1.5, -0.5));
        assert_eq!(leaf_llrs(&ch, &[1], Arithmetic::Float, CheckNode::MinSum), g_node(1.5, -0.5, 1));
    }

    #[test]
    fn stage_memory_matches_recursion() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=5u32 {
            let len = 1usize << n;
            for _ in 0..50 {
                let ch: Vec<f64> = (0..len).map(|_| rng.random_range(-8.0..8.0)).collect();
                let u: Vec<u8> = (0..len).map(|_| rng.random_range(0..2)).collect();
                let mut eng = ScEngine::new(n, Arithmetic::Float, CheckNode::MinSum);
                eng.load(&ch);
                for i in 0..len {
                    let got = eng.leaf_llr(i);
                    assert_eq!(got, leaf_rec(&ch, &u[..i]), "n={n} i={i}");
                    eng.commit(i, u[i]);
                }
            }
        }
    }

    #[test]
    fn partial_sums_are_reencodings() {
        let n = 4u32;
        let len = 16;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u: Vec<u8> = (0..len).map(|_| rng.random_range(0..2)).collect();
        let mut eng = ScEngine::new(n, Arithmetic::Float, CheckNode::MinSum);
        eng.load(&vec![1.0; len]);
        for i in 0..len {
            eng.leaf_llr(i);
            eng.commit(i, u[i]);
            for s in 0..=n {
                let span = len >> s;
                if (i + 1) % span == 0 {
                    let k = i / span;
                    let mut enc = u[k * span..(k + 1) * span].to_vec();
                    polar_transform(&mut enc);
                    assert_eq!(eng.partial_sums(s, k & 1), &enc[..]);
                }
            }
        }
    }

    #[test]
    fn noiseless_round_trip() {
        let code = PolarCode::construct(7, 64, 0, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let info: Vec<u8> = (0..64).map(|_| rng.random_range(0..2)).collect();
            let u = code.assemble_source_word(&info).unwrap();
            let x = code.encode(&u);
            let llr: Vec<f64> = x.iter().map(|&b| if b == 0 { 1e3 } else { -1e3 }).collect();
            assert_eq!(sc_decode(&llr, &code, Arithmetic::Float), u);
        }
        let zero = vec![5.0; 128];
        assert!(sc_decode(&zero, &code, Arithmetic::Float).iter().all(|&b| b == 0));
    }

    #[test]
    fn rate_one_sign_flip() {
        let code = PolarCode::new(4, 16, [], None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let ch: Vec<f64> = (0..16)
                .map(|_| {
                    let v: f64 = rng.random_range(0.1..5.0);
                    if rng.random() { v } else { -v }
                })
                .collect();
            let neg: Vec<f64> = ch.iter().map(|v| -v).collect();
            let a = sc_decode(&ch, &code, Arithmetic::Float);
            let b = sc_decode(&neg, &code, Arithmetic::Float);
            // negating the channel maps x to its complement, i.e. u to u ^ e_{N-1}
            let mut xa = a.clone();
            polar_transform(&mut xa);
            let mut xb = b.clone();
            polar_transform(&mut xb);
            assert!(xa.iter().zip(&xb).all(|(p, q)| p != q));
        }
    }

    proptest! {
        #[test]
        fn node_symmetries(a in -50.0f64..50.0, b in -50.0f64..50.0) {
            prop_assert_eq!(f_node(-a, b), -f_node(a, b));
            prop_assert_eq!(g_node(-a, b, 0), g_node(a, b, 1));
            prop_assert_eq!(g_node(-a, b, 1), g_node(a, b, 0));
        }
    }
}
