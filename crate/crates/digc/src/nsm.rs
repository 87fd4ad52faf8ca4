//! Neighbor selection: keep every d-th entry from the top k*d merged
//! candidates (positions 0, d, 2d, ..., (k-1)*d).

use crate::error::{DigcError, Result};
use crate::gmm::MergedCandidateList;

/// Selected neighbor indices for one node. `shortfall` is how many of the k
/// requested neighbors could not be produced because the candidate list was
/// shorter than (k-1)*d + 1; it is zero whenever k*d <= M.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DilatedSelection {
    pub indices: Vec<u32>,
    pub shortfall: usize,
}

pub fn select_dilated(merged: &MergedCandidateList, k: usize, d: usize) -> Result<DilatedSelection> {
    if merged.entries.is_empty() {
        return Err(DigcError::EmptyCandidates);
    }
    let mut indices = Vec::with_capacity(k);
    for p in 0..k {
        match merged.entries.get(p * d) {
            Some(e) => indices.push(e.index),
            None => break,
        }
    }
    let shortfall = k - indices.len();
    Ok(DilatedSelection { indices, shortfall })
}
