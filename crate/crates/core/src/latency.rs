//! Latency of the list-decoding schedule.
//!
//! All `𝓛` SC lanes run in lockstep, so the schedule (and hence the cycle
//! count) depends only on the code and the number `M` of processing
//! elements per lane, never on the channel data or on `𝓛`.
//!
//! A scheduling-tree node at stage `s` produces `N / 2^s` LLRs and takes
//! `ceil(N / 2^s / M)` cycles. Every leaf is followed by one pruning cycle
//! and one lazy-copy cycle. A frozen pair `(2j, 2j+1)` can instead be
//! retired by a single metric-update cycle, replacing the six cycles
//! `f, prune, copy, g, prune, copy` at the bottom of the tree.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polar_code::{count_frozen_siblings, PolarCode};
use crate::sc::first_stage;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardwareConfig {
    /// Processing elements per SC lane.
    pub pe_count: usize,
    pub clock_mhz: f64,
    pub frozen_sibling: bool,
}

impl HardwareConfig {
    pub fn validate(&self, code_len: usize) -> Result<()> {
        check_pe(code_len, self.pe_count)?;
        if !(self.clock_mhz.is_finite() && self.clock_mhz > 0.0) {
            return Err(Error::param(format!("clock {} MHz must be positive", self.clock_mhz)));
        }
        Ok(())
    }
}

fn check_pe(len: usize, pe: usize) -> Result<()> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::param(format!("code length {len} is not a power of two ≥ 2")));
    }
    if pe == 0 || !pe.is_power_of_two() || pe > len / 2 {
        return Err(Error::param(format!(
            "PE count {pe} must be a power of two in [1, N/2 = {}]",
            len / 2
        )));
    }
    Ok(())
}

/// `4N + (n - 2 - log2 M) · N / M`, frozen pairs not exploited.
pub fn cycles_closed_form(len: usize, pe: usize) -> Result<u64> {
    check_pe(len, pe)?;
    let n = len.trailing_zeros() as i64;
    let m = pe.trailing_zeros() as i64;
    let len_i = len as i64;
    let cycles = 4 * len_i + (n - 2 - m) * (len_i / pe as i64);
    Ok(cycles as u64)
}

/// Closed form minus five cycles per frozen pair.
pub fn cycles_with_fs(len: usize, pe: usize, frozen_siblings: usize) -> Result<u64> {
    if frozen_siblings > len / 2 {
        return Err(Error::param(format!(
            "{frozen_siblings} frozen pairs exceed N/2 = {}",
            len / 2
        )));
    }
    Ok(cycles_closed_form(len, pe)? - 5 * frozen_siblings as u64)
}

/// Coded throughput `N · f / cycles` in Mbps.
pub fn throughput_mbps(cycles: u64, len: usize, clock_mhz: f64) -> f64 {
    assert!(cycles > 0);
    len as f64 * clock_mhz / cycles as f64
}

/// One activity of the shared schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    F(u32),
    G(u32),
    /// List pruning (or the frozen-bit metric update) after a leaf.
    Dts,
    /// Lazy-copy control after pruning.
    Lcp,
    /// Single-cycle metric update of a frozen pair.
    Pmu,
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::F(s) => write!(f, "f{s}"),
            Op::G(s) => write!(f, "g{s}"),
            Op::Dts => f.write_str("DTS"),
            Op::Lcp => f.write_str("LCP"),
            Op::Pmu => f.write_str("PMU"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub cycles: u64,
    /// Smallest number of idle threshold-tracking cycles between a metric
    /// update and the next pruning cycle that consumes its thresholds.
    pub min_tta_slack: Option<u64>,
    /// Activity per clock cycle, when requested.
    pub trace: Option<Vec<Op>>,
}

/// Steps through the scheduling tree and counts cycles.
pub fn simulate_schedule(frozen_mask: &[bool], hw: &HardwareConfig, keep_trace: bool) -> Result<Schedule> {
    let len = frozen_mask.len();
    check_pe(len, hw.pe_count)?;
    let n = len.trailing_zeros();
    let mut sim = Stepper {
        cycle: 0,
        last_update: None,
        min_slack: None,
        trace: keep_trace.then(Vec::new),
    };
    let node_cost = |s: u32| ((len >> s) as u64).div_ceil(hw.pe_count as u64);

    let mut i = 0;
    while i < len {
        let pair = hw.frozen_sibling && i % 2 == 0 && frozen_mask[i] && frozen_mask[i + 1];
        let last = if pair { n - 1 } else { n };
        for s in first_stage(i, n)..=last {
            let op = if (i >> (n - s)) & 1 == 0 { Op::F(s) } else { Op::G(s) };
            sim.run(op, node_cost(s));
        }
        if pair {
            sim.update(Op::Pmu);
            i += 2;
        } else {
            sim.update(Op::Dts);
            sim.run(Op::Lcp, 1);
            i += 1;
        }
    }
    Ok(Schedule {
        cycles: sim.cycle,
        min_tta_slack: sim.min_slack,
        trace: sim.trace,
    })
}

struct Stepper {
    cycle: u64,
    last_update: Option<u64>,
    min_slack: Option<u64>,
    trace: Option<Vec<Op>>,
}

impl Stepper {
    fn run(&mut self, op: Op, cycles: u64) {
        if let Some(t) = &mut self.trace {
            t.extend(std::iter::repeat_n(op, cycles as usize));
        }
        self.cycle += cycles;
    }

    /// A single-cycle path-metric update.
    fn update(&mut self, op: Op) {
        if op == Op::Dts {
            if let Some(prev) = self.last_update {
                let slack = self.cycle - prev - 1;
                self.min_slack = Some(self.min_slack.map_or(slack, |m| m.min(slack)));
            }
        }
        self.last_update = Some(self.cycle);
        self.run(op, 1);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub closed_form_cycles: u64,
    pub simulated_cycles: u64,
    pub fs_count: usize,
    pub throughput_mbps: f64,
    pub min_tta_slack: Option<u64>,
}

/// Closed form and stepped schedule for `code` on `hw`.
pub fn cycle_report(code: &PolarCode, hw: &HardwareConfig) -> Result<CycleReport> {
    hw.validate(code.len())?;
    let fs = count_frozen_siblings(code.frozen_mask());
    let closed = if hw.frozen_sibling {
        cycles_with_fs(code.len(), hw.pe_count, fs)?
    } else {
        cycles_closed_form(code.len(), hw.pe_count)?
    };
    let sched = simulate_schedule(code.frozen_mask(), hw, false)?;
    Ok(CycleReport {
        closed_form_cycles: closed,
        simulated_cycles: sched.cycles,
        fs_count: fs,
        throughput_mbps: throughput_mbps(sched.cycles, code.len(), hw.clock_mhz),
        min_tta_slack: sched.min_tta_slack,
    })
}
