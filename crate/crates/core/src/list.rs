//! CRC-aided successive-cancellation list decoder.
//!
//! Each of the up to `𝓛` paths owns one reference per tree stage into a
//! shared pool of LLR banks and a shared pool of partial-sum banks. After
//! pruning, a path that forks hands its child the same references; a bank is
//! only duplicated when one of its holders is about to write it. Full-copy
//! mode duplicates every bank at fork time and exists as a reference for
//! the lazy scheme.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::Arithmetic;
use crate::error::{Error, Result};
use crate::polar_code::PolarCode;
use crate::pruning::{
    default_rt_index, lpo_dts, lpo_dts_random, lpo_sort, track_thresholds, FillPolicy,
    PathExtension,
};
use crate::sc::{combine, first_stage, g_node, hard_decision, CheckNode};

/// Path-metric update rule.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pmu {
    /// Penalty `|L|` when the bit disagrees with the hard decision.
    #[default]
    Hardware,
    /// `log(1 + e^{(2u-1)L})`; float arithmetic only.
    Exact,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrunerKind {
    #[default]
    Sort,
    Dts,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CopyPolicy {
    #[default]
    Lazy,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoderConfig {
    pub list_size: usize,
    pub pruner: PrunerKind,
    /// Sorted index used for the rejection threshold; `None` picks
    /// [`default_rt_index`].
    pub rt_index: Option<usize>,
    pub fill: FillPolicy,
    pub fill_seed: u64,
    pub arith: Arithmetic,
    pub pmu: Pmu,
    pub check: CheckNode,
    pub frozen_sibling: bool,
    pub copy: CopyPolicy,
    /// Subtract the smallest active metric after every leaf. Comparisons are
    /// unchanged; in fixed point it keeps metrics clear of saturation.
    #[serde(default)]
    pub pm_normalize: bool,
}

impl DecoderConfig {
    pub fn sort(list_size: usize) -> Self {
        DecoderConfig {
            list_size,
            pruner: PrunerKind::Sort,
            rt_index: None,
            fill: FillPolicy::ScanOrder,
            fill_seed: 0,
            arith: Arithmetic::Float,
            pmu: Pmu::Hardware,
            check: CheckNode::MinSum,
            frozen_sibling: false,
            copy: CopyPolicy::Lazy,
            pm_normalize: false,
        }
    }

    pub fn dts(list_size: usize) -> Self {
        DecoderConfig {
            pruner: PrunerKind::Dts,
            ..Self::sort(list_size)
        }
    }

    pub fn effective_rt_index(&self) -> usize {
        self.rt_index
            .unwrap_or_else(|| default_rt_index(self.list_size))
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.list_size;
        if l == 0 || !l.is_power_of_two() {
            return Err(Error::param(format!("list size {l} is not a power of two")));
        }
        if let Some(k) = self.rt_index {
            if l >= 2 && !(l / 2..l).contains(&k) {
                return Err(Error::param(format!(
                    "rt index {k} outside [{}, {}] for list size {l}",
                    l / 2,
                    l - 1
                )));
            }
        }
        self.arith.validate()?;
        if self.arith.is_fixed() && (self.pmu == Pmu::Exact || self.check == CheckNode::Exact) {
            return Err(Error::param("exact PMU / check node require float arithmetic"));
        }
        if self.frozen_sibling && self.pmu == Pmu::Exact {
            return Err(Error::param(
                "the frozen-sibling shortcut is defined for the hardware PMU only",
            ));
        }
        Ok(())
    }
}

/// `pm + log(1 + e^{(2u-1)L})`, evaluated without overflow.
pub fn pmu_exact(pm: f64, llr: f64, u: u8) -> f64 {
    let x = if u & 1 == 1 { llr } else { -llr };
    let soft = if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    };
    pm + soft
}

/// `pm` if `u = Θ(L)`, else `pm + |L|`, saturated per `arith`.
#[inline]
pub fn pmu_hw(pm: f64, llr: f64, u: u8, arith: &Arithmetic) -> f64 {
    if u & 1 == hard_decision(llr) {
        pm
    } else {
        arith.sat_pm(pm + llr.abs())
    }
}

/// Metric of the all-zero extension over a frozen pair `(2j, 2j+1)` from
/// the parent-stage LLRs `l0`, `l1`. The penalty sum is clipped like the
/// g-node output it replaces, so fixed-point results match two single steps.
#[inline]
pub fn pmu_frozen_sibling(pm: f64, l0: f64, l1: f64, arith: &Arithmetic) -> f64 {
    let pen = |l: f64| if l < 0.0 { -l } else { 0.0 };
    arith.sat_pm(pm + arith.sat_llr(pen(l0) + pen(l1)))
}

#[inline]
fn pmu(kind: Pmu, pm: f64, llr: f64, u: u8, arith: &Arithmetic) -> f64 {
    match kind {
        Pmu::Hardware => pmu_hw(pm, llr, u, arith),
        Pmu::Exact => pmu_exact(pm, llr, u),
    }
}

/// Both extensions of every slot in `active`, parent-major, bit 0 first.
pub fn extend_paths(
    active: &[usize],
    pms: &[f64],
    leaf_llrs: &[f64],
    kind: Pmu,
    arith: &Arithmetic,
) -> Vec<PathExtension> {
    let mut out = Vec::with_capacity(2 * active.len());
    extend_into(&mut out, active, pms, leaf_llrs, kind, arith);
    out
}

fn extend_into(
    out: &mut Vec<PathExtension>,
    active: &[usize],
    pms: &[f64],
    leaf_llrs: &[f64],
    kind: Pmu,
    arith: &Arithmetic,
) {
    out.clear();
    for &p in active {
        for bit in 0..2 {
            out.push(PathExtension::new(p, bit, pmu(kind, pms[p], leaf_llrs[p], bit, arith)));
        }
    }
}

#[derive(Debug, Clone)]
struct Pool<T> {
    banks: Vec<Vec<T>>,
    refs: Vec<u32>,
    free: Vec<usize>,
}

impl<T: Copy + Default> Pool<T> {
    fn new(count: usize, width: usize) -> Self {
        Pool {
            banks: vec![vec![T::default(); width]; count],
            refs: vec![0; count],
            free: (0..count).rev().collect(),
        }
    }

    fn reset(&mut self) {
        self.refs.fill(0);
        self.free.clear();
        self.free.extend((0..self.banks.len()).rev());
    }

    fn alloc(&mut self) -> usize {
        let b = self.free.pop().expect("bank pool exhausted");
        self.refs[b] = 1;
        b
    }

    fn retain(&mut self, b: usize) {
        self.refs[b] += 1;
    }

    fn release(&mut self, b: usize) {
        self.refs[b] -= 1;
        if self.refs[b] == 0 {
            self.free.push(b);
        }
    }

    fn duplicate(&mut self, b: usize) -> usize {
        let nb = self.alloc();
        let (src, dst) = if b < nb {
            let (lo, hi) = self.banks.split_at_mut(nb);
            (&lo[b], &mut hi[0])
        } else {
            let (lo, hi) = self.banks.split_at_mut(b);
            (&hi[0], &mut lo[nb])
        };
        dst.copy_from_slice(src);
        nb
    }
}

/// Per-frame counters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameDiagnostics {
    /// Metrics of the paths alive at the end, in slot order.
    pub final_pms: Vec<f64>,
    /// CRC outcome for each entry of `final_pms`.
    pub crc_pass: Vec<bool>,
    /// Pruning operations performed (list over capacity).
    pub lpo_count: usize,
    pub kept_by_rule1: usize,
    pub pruned_by_rule2: usize,
    pub filled_by_rule3: usize,
    pub survivors: usize,
    pub starved_lpos: usize,
    /// Banks duplicated or privately reallocated because of sharing.
    pub bank_copies: usize,
    /// No surviving path passed the CRC; the minimum-metric path was returned.
    pub crc_miss: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SclOutput {
    pub source_word: Vec<u8>,
    pub crc_ok: bool,
    pub pm: f64,
    pub diagnostics: FrameDiagnostics,
}

/// Reusable list decoder bound to one code.
#[derive(Debug, Clone)]
pub struct SclDecoder {
    cfg: DecoderConfig,
    code: PolarCode,
    n: u32,
    rt_index: usize,
    channel: Vec<f64>,
    llr: Vec<Pool<f64>>,
    ps: Vec<Pool<u8>>,
    llr_ref: Vec<Vec<usize>>,
    ps_ref: Vec<Vec<usize>>,
    pm: Vec<f64>,
    bits: Vec<Vec<u8>>,
    active: Vec<bool>,
    leaf: Vec<f64>,
    slots: Vec<usize>,
    ext: Vec<PathExtension>,
    survivors: Vec<PathExtension>,
    rng: ChaCha8Rng,
    next_leaf: usize,
    diag: FrameDiagnostics,
}

impl SclDecoder {
    pub fn new(code: &PolarCode, cfg: DecoderConfig) -> Result<Self> {
        cfg.validate()?;
        let n = code.n();
        let len = code.len();
        let l = cfg.list_size;
        // stage 0 (the channel) is not pooled
        let llr = (0..=n)
            .map(|s| Pool::new(if s == 0 { 0 } else { l }, len >> s))
            .collect();
        let ps = (0..=n)
            .map(|s| Pool::new(if s == 0 { 0 } else { l }, 2 * (len >> s)))
            .collect();
        Ok(SclDecoder {
            cfg,
            code: code.clone(),
            n,
            rt_index: cfg.effective_rt_index(),
            channel: vec![0.0; len],
            llr,
            ps,
            llr_ref: vec![vec![usize::MAX; n as usize + 1]; l],
            ps_ref: vec![vec![usize::MAX; n as usize + 1]; l],
            pm: vec![0.0; l],
            bits: vec![vec![0; len]; l],
            active: vec![false; l],
            leaf: vec![0.0; l],
            slots: Vec::with_capacity(l),
            ext: Vec::with_capacity(2 * l),
            survivors: Vec::with_capacity(l),
            rng: ChaCha8Rng::seed_from_u64(cfg.fill_seed),
            next_leaf: 0,
            diag: FrameDiagnostics::default(),
        })
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.cfg
    }

    pub fn code(&self) -> &PolarCode {
        &self.code
    }

    /// Reseeds the random rule-3 fill (no effect with scan-order fill).
    pub fn reseed(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    pub fn decode(&mut self, channel_llrs: &[f64]) -> SclOutput {
        self.begin(channel_llrs);
        while self.step() {}
        self.finish()
    }

    /// Starts a frame with a single empty path of metric 0.
    pub fn begin(&mut self, channel_llrs: &[f64]) {
        assert_eq!(channel_llrs.len(), self.code.len(), "channel LLR count");
        self.channel.copy_from_slice(channel_llrs);
        for pool in &mut self.llr {
            pool.reset();
        }
        for pool in &mut self.ps {
            pool.reset();
        }
        self.active.fill(false);
        self.active[0] = true;
        self.pm[0] = 0.0;
        for s in 1..=self.n as usize {
            self.llr_ref[0][s] = self.llr[s].alloc();
            self.ps_ref[0][s] = self.ps[s].alloc();
        }
        self.next_leaf = 0;
        self.diag = FrameDiagnostics::default();
        self.ext.clear();
        self.survivors.clear();
    }

    /// Index of the next undecided leaf.
    pub fn position(&self) -> usize {
        self.next_leaf
    }

    /// Decodes the next leaf, or the next frozen pair when the shortcut
    /// applies. Returns `false` once every leaf is decided.
    pub fn step(&mut self) -> bool {
        let more = self.advance();
        if self.cfg.pm_normalize {
            self.collect_slots();
            let low = self
                .slots
                .iter()
                .map(|&l| self.pm[l])
                .fold(f64::INFINITY, f64::min);
            if low > 0.0 && low.is_finite() {
                for &l in &self.slots {
                    self.pm[l] -= low;
                }
            }
        }
        more
    }

    fn advance(&mut self) -> bool {
        let len = self.code.len();
        let i = self.next_leaf;
        if i >= len {
            return false;
        }
        self.collect_slots();
        let n = self.n;
        let shortcut = self.cfg.frozen_sibling
            && i.is_multiple_of(2)
            && self.code.is_frozen(i)
            && self.code.is_frozen(i + 1);
        if shortcut {
            for idx in 0..self.slots.len() {
                let l = self.slots[idx];
                self.descend(l, i, n - 1);
                let (l0, l1) = self.parent_pair(l);
                self.pm[l] = pmu_frozen_sibling(self.pm[l], l0, l1, &self.cfg.arith);
                self.bits[l][i] = 0;
                self.bits[l][i + 1] = 0;
                self.commit(l, i, 0);
                self.commit(l, i + 1, 0);
            }
            self.next_leaf = i + 2;
            return self.next_leaf < len;
        }

        for idx in 0..self.slots.len() {
            let l = self.slots[idx];
            self.descend(l, i, n);
            self.leaf[l] = self.llr[n as usize].banks[self.llr_ref[l][n as usize]][0];
        }

        if self.code.is_frozen(i) {
            for idx in 0..self.slots.len() {
                let l = self.slots[idx];
                self.pm[l] = pmu(self.cfg.pmu, self.pm[l], self.leaf[l], 0, &self.cfg.arith);
                self.bits[l][i] = 0;
                self.commit(l, i, 0);
            }
        } else {
            extend_into(
                &mut self.ext,
                &self.slots,
                &self.pm,
                &self.leaf,
                self.cfg.pmu,
                &self.cfg.arith,
            );
            self.prune();
            self.apply_survivors(i);
            self.collect_slots();
            for idx in 0..self.slots.len() {
                let l = self.slots[idx];
                let b = self.bits[l][i];
                self.commit(l, i, b);
            }
        }
        self.next_leaf = i + 1;
        self.next_leaf < len
    }

    /// Picks the output path once all leaves are decided.
    pub fn finish(&mut self) -> SclOutput {
        assert!(self.next_leaf >= self.code.len(), "frame not fully decoded");
        self.collect_slots();
        let mut diag = std::mem::take(&mut self.diag);
        diag.final_pms = self.slots.iter().map(|&l| self.pm[l]).collect();
        diag.crc_pass = self
            .slots
            .iter()
            .map(|&l| self.code.crc_ok(&self.bits[l]))
            .collect();
        let best_of = |want_crc: bool| {
            self.slots
                .iter()
                .zip(&diag.crc_pass)
                .filter(|&(_, &ok)| ok || !want_crc)
                .map(|(&l, _)| l)
                .min_by(|&a, &b| self.pm[a].total_cmp(&self.pm[b]).then(a.cmp(&b)))
        };
        let (slot, crc_ok) = match best_of(true) {
            Some(l) => (l, true),
            None => (best_of(false).expect("at least one path survives"), false),
        };
        diag.crc_miss = !crc_ok;
        SclOutput {
            source_word: self.bits[slot].clone(),
            crc_ok,
            pm: self.pm[slot],
            diagnostics: diag,
        }
    }

    /// Active slots in ascending order.
    pub fn active_slots(&self) -> Vec<usize> {
        (0..self.cfg.list_size).filter(|&l| self.active[l]).collect()
    }

    pub fn path_metric(&self, slot: usize) -> f64 {
        self.pm[slot]
    }

    pub fn decided_bits(&self, slot: usize) -> &[u8] {
        &self.bits[slot][..self.next_leaf]
    }

    /// Extensions and survivors of the most recent information bit.
    pub fn last_lpo(&self) -> (&[PathExtension], &[PathExtension]) {
        (&self.ext, &self.survivors)
    }

    pub fn diagnostics(&self) -> &FrameDiagnostics {
        &self.diag
    }

    /// Contents of every LLR and partial-sum bank reachable from `slot`,
    /// stage 1 first.
    pub fn snapshot(&self, slot: usize) -> (Vec<Vec<f64>>, Vec<Vec<u8>>) {
        let stages = 1..=self.n as usize;
        let llr = stages
            .clone()
            .map(|s| self.llr[s].banks[self.llr_ref[slot][s]].clone())
            .collect();
        let ps = stages
            .map(|s| self.ps[s].banks[self.ps_ref[slot][s]].clone())
            .collect();
        (llr, ps)
    }

    fn collect_slots(&mut self) {
        self.slots.clear();
        self.slots
            .extend((0..self.cfg.list_size).filter(|&l| self.active[l]));
    }

    fn parent_pair(&self, l: usize) -> (f64, f64) {
        let s = self.n as usize - 1;
        let v = if s == 0 {
            &self.channel[..]
        } else {
            &self.llr[s].banks[self.llr_ref[l][s]][..]
        };
        (v[0], v[1])
    }

    fn writable_llr(&mut self, l: usize, s: usize) -> usize {
        let b = self.llr_ref[l][s];
        if self.llr[s].refs[b] == 1 {
            return b;
        }
        // the bank is overwritten in full, so no contents are carried over
        self.llr[s].release(b);
        let nb = self.llr[s].alloc();
        self.llr_ref[l][s] = nb;
        self.diag.bank_copies += 1;
        nb
    }

    fn writable_ps(&mut self, l: usize, s: usize) -> usize {
        let b = self.ps_ref[l][s];
        if self.ps[s].refs[b] == 1 {
            return b;
        }
        self.ps[s].release(b);
        let nb = self.ps[s].duplicate(b);
        self.ps_ref[l][s] = nb;
        self.diag.bank_copies += 1;
        nb
    }

    fn descend(&mut self, l: usize, i: usize, last: u32) {
        let n = self.n;
        for s in first_stage(i, n)..=last {
            let k = i >> (n - s);
            let s = s as usize;
            let dst = self.writable_llr(l, s);
            let (up, down) = self.llr.split_at_mut(s);
            let parent: &[f64] = if s == 1 {
                &self.channel
            } else {
                &up[s - 1].banks[self.llr_ref[l][s - 1]]
            };
            let out = &mut down[0].banks[dst];
            let w = out.len();
            let (a, b) = parent.split_at(w);
            let arith = &self.cfg.arith;
            if k & 1 == 0 {
                for j in 0..w {
                    out[j] = combine(self.cfg.check, arith, a[j], b[j]);
                }
            } else {
                let left = &self.ps[s].banks[self.ps_ref[l][s]][..w];
                for j in 0..w {
                    out[j] = arith.sat_llr(g_node(a[j], b[j], left[j]));
                }
            }
        }
    }

    fn commit(&mut self, l: usize, i: usize, bit: u8) {
        let mut s = self.n as usize;
        let mut k = i;
        let b = self.writable_ps(l, s);
        self.ps[s].banks[b][k & 1] = bit;
        while k & 1 == 1 && s > 1 {
            let w = self.code.len() >> s;
            let slot = (k >> 1) & 1;
            let dst_bank = self.writable_ps(l, s - 1);
            let (up, down) = self.ps.split_at_mut(s);
            let src = &down[0].banks[self.ps_ref[l][s]];
            let dst = &mut up[s - 1].banks[dst_bank][slot * 2 * w..(slot + 1) * 2 * w];
            let (left, right) = src.split_at(w);
            for j in 0..w {
                dst[j] = left[j] ^ right[j];
                dst[j + w] = right[j];
            }
            s -= 1;
            k >>= 1;
        }
    }

    fn prune(&mut self) {
        let cap = self.cfg.list_size;
        self.survivors.clear();
        if self.ext.len() <= cap {
            self.survivors.extend_from_slice(&self.ext);
            return;
        }
        self.diag.lpo_count += 1;
        let use_dts = self.cfg.pruner == PrunerKind::Dts && cap >= 2;
        if !use_dts {
            self.survivors.extend(lpo_sort(&self.ext, cap));
            self.diag.survivors += self.survivors.len();
            return;
        }
        let slot_pms: Vec<f64> = (0..cap)
            .map(|l| if self.active[l] { self.pm[l] } else { f64::INFINITY })
            .collect();
        let th = track_thresholds(&slot_pms, self.rt_index).expect("list size ≥ 2");
        let out = match self.cfg.fill {
            FillPolicy::ScanOrder => lpo_dts(&self.ext, &th, cap),
            FillPolicy::Random => lpo_dts_random(&self.ext, &th, cap, &mut self.rng),
        };
        self.diag.kept_by_rule1 += out.kept_by_rule1;
        self.diag.pruned_by_rule2 += out.pruned_by_rule2;
        self.diag.filled_by_rule3 += out.filled_by_rule3;
        self.diag.survivors += out.survivors.len();
        self.diag.starved_lpos += out.starved as usize;
        self.survivors = out.survivors;
    }

    fn apply_survivors(&mut self, i: usize) {
        let cap = self.cfg.list_size;
        let mut children = vec![[None::<f64>; 2]; cap];
        for e in &self.survivors {
            children[e.parent][e.bit as usize] = Some(e.pm);
        }
        for (l, c) in children.iter().enumerate() {
            if self.active[l] && *c == [None, None] {
                self.kill(l);
            }
        }
        let parents: Vec<usize> = (0..cap).filter(|&l| self.active[l]).collect();
        for l in parents {
            match children[l] {
                [Some(pm0), Some(pm1)] => {
                    let c = self.fork(l);
                    self.pm[l] = pm0;
                    self.bits[l][i] = 0;
                    self.pm[c] = pm1;
                    self.bits[c][i] = 1;
                }
                [Some(pm0), None] => {
                    self.pm[l] = pm0;
                    self.bits[l][i] = 0;
                }
                [None, Some(pm1)] => {
                    self.pm[l] = pm1;
                    self.bits[l][i] = 1;
                }
                [None, None] => unreachable!("killed above"),
            }
        }
    }

    fn kill(&mut self, l: usize) {
        for s in 1..=self.n as usize {
            self.llr[s].release(self.llr_ref[l][s]);
            self.ps[s].release(self.ps_ref[l][s]);
        }
        self.active[l] = false;
    }

    /// Clones path `l` into the lowest free slot and returns that slot.
    fn fork(&mut self, l: usize) -> usize {
        let c = (0..self.cfg.list_size)
            .find(|&c| !self.active[c])
            .expect("more survivors than list slots");
        for s in 1..=self.n as usize {
            let (lb, pb) = (self.llr_ref[l][s], self.ps_ref[l][s]);
            match self.cfg.copy {
                CopyPolicy::Lazy => {
                    self.llr[s].retain(lb);
                    self.ps[s].retain(pb);
                    self.llr_ref[c][s] = lb;
                    self.ps_ref[c][s] = pb;
                }
                CopyPolicy::Full => {
                    self.llr_ref[c][s] = self.llr[s].duplicate(lb);
                    self.ps_ref[c][s] = self.ps[s].duplicate(pb);
                    self.diag.bank_copies += 2;
                }
            }
        }
        let (src, dst) = if l < c {
            let (lo, hi) = self.bits.split_at_mut(c);
            (&lo[l], &mut hi[0])
        } else {
            let (lo, hi) = self.bits.split_at_mut(l);
            (&hi[0], &mut lo[c])
        };
        dst.copy_from_slice(src);
        self.active[c] = true;
        c
    }
}

/// One-shot convenience wrapper around [`SclDecoder`].
pub fn scl_decode(channel_llrs: &[f64], code: &PolarCode, cfg: DecoderConfig) -> Result<SclOutput> {
    Ok(SclDecoder::new(code, cfg)?.decode(channel_llrs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelParams;
    use crate::sc::{f_node, sc_decode};
    use crate::sim::{frame_rng, make_frame};
    use proptest::prelude::*;

    fn code(n: u32, k: usize, crc: u32) -> PolarCode {
        PolarCode::construct(n, k, crc, 2.0).unwrap()
    }

    fn noisy(code: &PolarCode, snr: f64, arith: &Arithmetic, t: u64) -> (Vec<u8>, Vec<f64>) {
        let ch = ChannelParams::from_ebn0(snr, code.rate()).unwrap();
        let f = make_frame(code, &ch, arith, &mut frame_rng(7, t));
        (f.source_word, f.llr)
    }

    #[test]
    fn exact_pmu_values() {
        assert!((pmu_exact(0.0, 0.0, 0) - std::f64::consts::LN_2).abs() < 1e-12);
        let soft = (1.0 + (-10f64).exp()).ln();
        assert!((pmu_exact(1.0, 10.0, 0) - (1.0 + soft)).abs() < 1e-12);
        assert!((pmu_exact(1.0, 10.0, 1) - (11.0 + soft)).abs() < 1e-12);
        assert!((pmu_exact(1.0, 10.0, 0) - 1.0000454).abs() < 1e-7);
        assert!(pmu_exact(0.0, -800.0, 1).is_finite());
    }

    #[test]
    fn hardware_pmu_values() {
        let f = Arithmetic::Float;
        assert_eq!(pmu_hw(3.0, -2.0, 1, &f), 3.0);
        assert_eq!(pmu_hw(3.0, -2.0, 0, &f), 5.0);
        assert_eq!(pmu_hw(3.0, 0.0, 0, &f), 3.0);
        assert_eq!(pmu_hw(3.0, 0.0, 1, &f), 3.0);
        assert_eq!(pmu_hw(254.0, 5.0, 1, &Arithmetic::hardware()), 255.0);
    }

    #[test]
    fn frozen_sibling_examples() {
        let f = Arithmetic::Float;
        assert_eq!(pmu_frozen_sibling(1.0, -2.0, 3.0, &f), 3.0);
        assert_eq!(pmu_frozen_sibling(1.0, -2.0, -3.0, &f), 6.0);
        assert_eq!(pmu_frozen_sibling(1.0, 2.0, 3.0, &f), 1.0);
    }

    /// Two single frozen-bit steps through the f and g nodes.
    fn two_steps(pm: f64, l0: f64, l1: f64, a: &Arithmetic) -> f64 {
        let pm = pmu_hw(pm, a.sat_llr(f_node(l0, l1)), 0, a);
        pmu_hw(pm, a.sat_llr(g_node(l0, l1, 0)), 0, a)
    }

    #[test]
    fn frozen_sibling_matches_two_steps_on_grid() {
        let hw = Arithmetic::hardware();
        for pm in [0.0, 100.0, 250.0] {
            for l0 in -31..=31 {
                for l1 in -31..=31 {
                    let (l0, l1) = (l0 as f64, l1 as f64);
                    assert_eq!(pmu_frozen_sibling(pm, l0, l1, &hw), two_steps(pm, l0, l1, &hw));
                    assert_eq!(
                        pmu_frozen_sibling(pm, l0, l1, &Arithmetic::Float),
                        two_steps(pm, l0, l1, &Arithmetic::Float)
                    );
                }
            }
        }
        for (l0, l1) in [(-127.0, -127.0), (-100.0, -90.0), (127.0, -127.0)] {
            assert_eq!(pmu_frozen_sibling(0.0, l0, l1, &hw), two_steps(0.0, l0, l1, &hw));
        }
    }

    #[test]
    fn extension_example() {
        let ext = extend_paths(&[0, 1], &[0.0, 2.0], &[1.5, -0.5], Pmu::Hardware, &Arithmetic::Float);
        let got: Vec<(usize, u8, f64)> = ext.iter().map(|e| (e.parent, e.bit, e.pm)).collect();
        assert_eq!(got, vec![(0, 0, 0.0), (0, 1, 1.5), (1, 0, 2.5), (1, 1, 2.0)]);
    }

    #[test]
    fn config_validation() {
        assert!(DecoderConfig::sort(6).validate().is_err());
        assert!(DecoderConfig::sort(0).validate().is_err());
        let mut c = DecoderConfig::dts(8);
        c.rt_index = Some(3);
        assert!(c.validate().is_err());
        c.rt_index = Some(4);
        assert!(c.validate().is_ok());
        let mut c = DecoderConfig::sort(4);
        c.arith = Arithmetic::hardware();
        c.pmu = Pmu::Exact;
        assert!(c.validate().is_err());
        let mut c = DecoderConfig::sort(4);
        c.pmu = Pmu::Exact;
        c.frozen_sibling = true;
        assert!(c.validate().is_err());
        assert_eq!(DecoderConfig::dts(8).effective_rt_index(), 6);
        assert_eq!(DecoderConfig::dts(2).effective_rt_index(), 1);
    }

    #[test]
    fn noiseless_round_trip_has_zero_metric() {
        let c = code(7, 64, 8);
        let ch = ChannelParams::from_ebn0(f64::INFINITY, c.rate()).unwrap();
        for (t, cfg) in [DecoderConfig::sort(1), DecoderConfig::sort(8), DecoderConfig::dts(8), DecoderConfig::dts(16)]
            .into_iter()
            .enumerate()
        {
            let f = make_frame(&c, &ch, &Arithmetic::Float, &mut frame_rng(3, t as u64));
            let out = scl_decode(&f.llr, &c, cfg).unwrap();
            assert_eq!(out.source_word, f.source_word);
            assert!(out.crc_ok);
            assert_eq!(out.pm, 0.0);
        }
    }

    #[test]
    fn list_of_one_is_sc() {
        for (n, k) in [(6, 32), (8, 128)] {
            let c = code(n, k, 0);
            let mut dec = SclDecoder::new(&c, DecoderConfig::sort(1)).unwrap();
            for t in 0..60 {
                let (_, llr) = noisy(&c, 1.0, &Arithmetic::Float, t);
                let out = dec.decode(&llr);
                assert_eq!(out.source_word, sc_decode(&llr, &c, Arithmetic::Float));
                assert_eq!(out.diagnostics.bank_copies, 0);
            }
        }
    }

    #[test]
    fn list_ramps_up_then_stays_full() {
        let c = code(7, 64, 8);
        let (_, llr) = noisy(&c, 1.5, &Arithmetic::Float, 0);
        let mut dec = SclDecoder::new(&c, DecoderConfig::sort(8)).unwrap();
        dec.begin(&llr);
        let mut info_seen = 0;
        let mut prev: Vec<f64> = vec![0.0];
        loop {
            let i = dec.position();
            let more = dec.step();
            let slots = dec.active_slots();
            if !c.is_frozen(i) {
                info_seen += 1;
                assert_eq!(slots.len(), (1usize << info_seen.min(3)).min(8));
            }
            let mut pms: Vec<f64> = slots.iter().map(|&l| dec.path_metric(l)).collect();
            pms.sort_by(f64::total_cmp);
            // every metric descends from a parent metric no larger than itself
            assert!(pms[0] >= prev[0]);
            prev = pms;
            if !more {
                break;
            }
        }
        assert_eq!(info_seen, 64);
        assert_eq!(dec.finish().diagnostics.lpo_count, 64 - 3);
    }

    #[test]
    fn sort_keeps_smallest_extensions() {
        let c = code(7, 64, 8);
        let (_, llr) = noisy(&c, 1.0, &Arithmetic::Float, 4);
        let mut dec = SclDecoder::new(&c, DecoderConfig::sort(4)).unwrap();
        dec.begin(&llr);
        while {
            let i = dec.position();
            let more = dec.step();
            if !c.is_frozen(i) {
                let (ext, surv) = dec.last_lpo();
                let mut all: Vec<f64> = ext.iter().map(|e| e.pm).collect();
                all.sort_by(f64::total_cmp);
                let mut kept: Vec<f64> = surv.iter().map(|e| e.pm).collect();
                kept.sort_by(f64::total_cmp);
                assert_eq!(kept, all[..kept.len()].to_vec());
                let mut held: Vec<f64> = dec.active_slots().iter().map(|&l| dec.path_metric(l)).collect();
                held.sort_by(f64::total_cmp);
                assert_eq!(held, kept);
            }
            more
        } {}
    }

    #[test]
    fn lazy_copy_matches_full_copy_in_lockstep() {
        let c = code(7, 64, 8);
        for (t, base) in [DecoderConfig::sort(8), DecoderConfig::dts(4)].into_iter().enumerate() {
            let (_, llr) = noisy(&c, 1.0, &Arithmetic::Float, 10 + t as u64);
            let mut lazy = SclDecoder::new(&c, base).unwrap();
            let mut full = SclDecoder::new(&c, DecoderConfig { copy: CopyPolicy::Full, ..base }).unwrap();
            lazy.begin(&llr);
            full.begin(&llr);
            loop {
                let (a, b) = (lazy.step(), full.step());
                assert_eq!(a, b);
                assert_eq!(lazy.active_slots(), full.active_slots());
                for l in lazy.active_slots() {
                    assert_eq!(lazy.path_metric(l), full.path_metric(l));
                    assert_eq!(lazy.decided_bits(l), full.decided_bits(l));
                    assert_eq!(lazy.snapshot(l).1, full.snapshot(l).1);
                }
                if !a {
                    break;
                }
            }
            let (x, y) = (lazy.finish(), full.finish());
            assert_eq!(x.source_word, y.source_word);
            assert!(x.diagnostics.bank_copies < y.diagnostics.bank_copies);
        }
    }

    #[test]
    fn frozen_sibling_shortcut_keeps_outputs() {
        let c = code(8, 128, 8);
        for arith in [Arithmetic::Float, Arithmetic::hardware()] {
            for base in [DecoderConfig::sort(8), DecoderConfig::dts(8)] {
                let base = DecoderConfig { arith, ..base };
                let mut a = SclDecoder::new(&c, base).unwrap();
                let mut b = SclDecoder::new(&c, DecoderConfig { frozen_sibling: true, ..base }).unwrap();
                for t in 0..40 {
                    let (_, llr) = noisy(&c, 1.0, &arith, t);
                    let (x, y) = (a.decode(&llr), b.decode(&llr));
                    assert_eq!(x.source_word, y.source_word);
                    let (p, q) = (&x.diagnostics.final_pms, &y.diagnostics.final_pms);
                    if arith.is_fixed() {
                        assert_eq!(p, q);
                    } else {
                        // float sums associate differently
                        assert!(p.iter().zip(q).all(|(a, b)| (a - b).abs() <= 1e-9 * a.abs().max(1.0)));
                    }
                }
            }
        }
    }

    #[test]
    fn output_selection_prefers_crc_pass() {
        let c = code(6, 24, 8);
        let mut dec = SclDecoder::new(&c, DecoderConfig::sort(8)).unwrap();
        let (mut misses, mut passes) = (0, 0);
        for t in 0..300 {
            let (_, llr) = noisy(&c, 0.0, &Arithmetic::Float, t);
            let out = dec.decode(&llr);
            let d = &out.diagnostics;
            assert_eq!(d.final_pms.len(), d.crc_pass.len());
            let best = |only_pass: bool| {
                d.final_pms
                    .iter()
                    .zip(&d.crc_pass)
                    .filter(|(_, &ok)| ok || !only_pass)
                    .map(|(&p, _)| p)
                    .fold(f64::INFINITY, f64::min)
            };
            if d.crc_pass.iter().any(|&x| x) {
                passes += 1;
                assert!(out.crc_ok && !d.crc_miss);
                assert!(c.crc_ok(&out.source_word));
                assert_eq!(out.pm, best(true));
            } else {
                misses += 1;
                assert!(!out.crc_ok && d.crc_miss);
                assert_eq!(out.pm, best(false));
            }
        }
        assert!(misses > 0 && passes > 0, "{misses} {passes}");
    }

    #[test]
    fn normalization_keeps_decisions() {
        let c = code(8, 128, 8);
        for base in [DecoderConfig::sort(8), DecoderConfig::dts(8)] {
            let mut a = SclDecoder::new(&c, base).unwrap();
            let mut b = SclDecoder::new(&c, DecoderConfig { pm_normalize: true, ..base }).unwrap();
            for t in 0..40 {
                let q = Arithmetic::Fixed { q_channel: 6, q_pm: 20, llr_scale: 2.0 };
                let (_, llr) = noisy(&c, 1.0, &q, t);
                let cfg_a = DecoderConfig { arith: q, ..base };
                let x = scl_decode(&llr, &c, cfg_a).unwrap();
                let y = scl_decode(&llr, &c, DecoderConfig { pm_normalize: true, ..cfg_a }).unwrap();
                assert_eq!(x.source_word, y.source_word);
                let low = x.diagnostics.final_pms.iter().cloned().fold(f64::INFINITY, f64::min);
                // the minimum never decreases, so the total shift is the final minimum
                let shifted: Vec<f64> = x.diagnostics.final_pms.iter().map(|p| p - low).collect();
                assert_eq!(y.diagnostics.final_pms, shifted);
                let (_, llr) = noisy(&c, 1.0, &Arithmetic::Float, t);
                assert_eq!(a.decode(&llr).source_word, b.decode(&llr).source_word);
            }
        }
    }

    #[test]
    fn random_fill_is_seeded() {
        let c = code(7, 64, 8);
        let cfg = DecoderConfig { fill: FillPolicy::Random, fill_seed: 5, ..DecoderConfig::dts(8) };
        let (_, llr) = noisy(&c, 0.5, &Arithmetic::Float, 2);
        let a = scl_decode(&llr, &c, cfg).unwrap();
        let b = scl_decode(&llr, &c, cfg).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn metrics_never_decrease(seed in any::<u64>(), l_pow in 0u32..4, dts in any::<bool>()) {
            let c = code(6, 32, 6);
            let l = 1usize << l_pow;
            let cfg = if dts { DecoderConfig::dts(l) } else { DecoderConfig::sort(l) };
            let ch = ChannelParams::from_ebn0(1.0, c.rate()).unwrap();
            let f = make_frame(&c, &ch, &Arithmetic::Float, &mut frame_rng(seed, 0));
            let mut dec = SclDecoder::new(&c, cfg).unwrap();
            dec.begin(&f.llr);
            let mut min_pm = 0.0;
            while dec.step() {
                let slots = dec.active_slots();
                prop_assert!(!slots.is_empty() && slots.len() <= l);
                let m = slots.iter().map(|&s| dec.path_metric(s)).fold(f64::INFINITY, f64::min);
                prop_assert!(m >= min_pm);
                min_pm = m;
            }
            let out = dec.finish();
            prop_assert!(out.pm >= min_pm);
        }
    }
}
