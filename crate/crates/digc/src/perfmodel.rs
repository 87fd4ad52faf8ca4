//! Analytical cycle and DDR traffic model for the four-stage accelerator.
//!
//! Stage formulas:
//!   DCM: ceil(N/P_row) * ceil(M/P_col) * ceil(D/P_vec)
//!   LSM: ceil(N/P_sort) * m * ceil(log2 m)      (m = 1 charges 1 per row)
//!   GMM: N * k * max(1, ceil(log2 Q))
//!   NSM: ceil(N/Q) * k
//!
//! Traffic counts each operand once: X, Y and the bias are read as 32-bit
//! floats, the output indices are written as 16-bit unsigned integers.

use std::fmt::Write as _;

use crate::error::{DigcError, Result};
use crate::types::PartitionPlan;

/// Default clock for latency reporting, in Hz.
pub const DEFAULT_CLOCK_HZ: f64 = 600.0e6;

/// Per-stage cycle counts plus DDR byte traffic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleEstimate {
    pub dcm_cycles: u64,
    pub lsm_cycles: u64,
    pub gmm_cycles: u64,
    pub nsm_cycles: u64,
    pub ddr_bytes: u64,
}

impl CycleEstimate {
    pub fn serial_total(&self) -> u64 {
        self.dcm_cycles + self.lsm_cycles + self.gmm_cycles + self.nsm_cycles
    }

    /// Lower bound under perfect stage overlap: the slowest stage dominates.
    pub fn pipelined_bound(&self) -> u64 {
        self.dcm_cycles
            .max(self.lsm_cycles)
            .max(self.gmm_cycles)
            .max(self.nsm_cycles)
    }

    /// Seconds for `cycles` at `freq_hz`.
    pub fn latency_at(&self, cycles: u64, freq_hz: f64) -> f64 {
        cycles as f64 / freq_hz
    }

    /// Flat `name=value` record, one field per line.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dcm_cycles={}", self.dcm_cycles);
        let _ = writeln!(s, "lsm_cycles={}", self.lsm_cycles);
        let _ = writeln!(s, "gmm_cycles={}", self.gmm_cycles);
        let _ = writeln!(s, "nsm_cycles={}", self.nsm_cycles);
        let _ = writeln!(s, "serial_total={}", self.serial_total());
        let _ = writeln!(s, "pipelined_bound={}", self.pipelined_bound());
        let _ = writeln!(s, "ddr_bytes={}", self.ddr_bytes);
        s
    }
}

fn ceil_log2(x: u64) -> u64 {
    if x <= 1 {
        0
    } else {
        u64::from((x - 1).ilog2()) + 1
    }
}

fn div_ceil(a: u64, b: u64) -> u64 {
    a.div_ceil(b)
}

pub fn estimate_cycles(
    n: usize,
    m_conodes: usize,
    d_feat: usize,
    k: usize,
    plan: &PartitionPlan,
) -> Result<CycleEstimate> {
    if n < 1 || m_conodes < 1 || d_feat < 1 || k < 1 {
        return Err(DigcError::InvalidPlan(
            "problem dimensions must all be >= 1".into(),
        ));
    }
    if plan.q != m_conodes.div_ceil(plan.m) {
        return Err(DigcError::InvalidPlan(format!(
            "plan Q={} inconsistent with M={} m={}",
            plan.q, m_conodes, plan.m
        )));
    }
    let (n, m_conodes, d_feat, k) = (n as u64, m_conodes as u64, d_feat as u64, k as u64);
    let (m, q) = (plan.m as u64, plan.q as u64);
    let dcm = div_ceil(n, plan.p_row as u64)
        * div_ceil(m_conodes, plan.p_col as u64)
        * div_ceil(d_feat, plan.p_vec as u64);
    let lsm = div_ceil(n, plan.p_sort as u64) * (m * ceil_log2(m)).max(1);
    let gmm = n * k * ceil_log2(q).max(1);
    let nsm = div_ceil(n, q) * k;
    Ok(CycleEstimate {
        dcm_cycles: dcm,
        lsm_cycles: lsm,
        gmm_cycles: gmm,
        nsm_cycles: nsm,
        ddr_bytes: estimate_traffic(n as usize, m_conodes as usize, d_feat as usize, k as usize),
    })
}

/// Single-pass DDR traffic: read X, Y and the N x M bias in f32, write the
/// N x k index matrix in u16.
pub fn estimate_traffic(n: usize, m_conodes: usize, d_feat: usize, k: usize) -> u64 {
    let (n, m, d, k) = (n as u64, m_conodes as u64, d_feat as u64, k as u64);
    4 * (n * d + m * d + n * m) + 2 * n * k
}
