//! Global merging: heap-based k-way merge of the Q sorted partition streams
//! of one node into a single globally ascending candidate list.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{DigcError, Result};
use crate::lsm::SortedPartitionStream;
use crate::types::DistEntry;

/// Globally sorted candidate prefix for one node.
#[derive(Debug, Clone, PartialEq)]
pub struct MergedCandidateList {
    pub node: usize,
    pub entries: Vec<DistEntry>,
}

/// Merges the sorted streams of one node, emitting at most `limit` entries.
///
/// A min-heap over stream heads is seeded with the first element of each
/// non-empty stream; each extraction refills from the source stream. Ties
/// across streams resolve by co-node index since stream index ranges are
/// disjoint.
pub fn merge_streams(streams: &[SortedPartitionStream], limit: usize) -> Result<MergedCandidateList> {
    if streams.is_empty() {
        return Err(DigcError::EmptyStreams);
    }
    let node = streams[0].node;
    // (entry, stream id, next position within stream)
    let mut heap: BinaryHeap<Reverse<(DistEntry, usize, usize)>> =
        BinaryHeap::with_capacity(streams.len());
    for (q, s) in streams.iter().enumerate() {
        if let Some(&head) = s.entries.first() {
            heap.push(Reverse((head, q, 1)));
        }
    }
    let mut merged = Vec::with_capacity(limit);
    while merged.len() < limit {
        let Some(Reverse((entry, q, next))) = heap.pop() else {
            break;
        };
        merged.push(entry);
        if let Some(&e) = streams[q].entries.get(next) {
            heap.push(Reverse((e, q, next + 1)));
        }
    }
    Ok(MergedCandidateList {
        node,
        entries: merged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(partition: usize, entries: Vec<DistEntry>) -> SortedPartitionStream {
        SortedPartitionStream {
            node: 0,
            partition,
            entries,
        }
    }

    fn e(dist: f32, index: u32) -> DistEntry {
        DistEntry::new(dist, index)
    }

    #[test]
    fn interleaved_merge() {
        let s = [
            stream(0, vec![e(1.0, 0), e(4.0, 1)]),
            stream(1, vec![e(2.0, 2), e(3.0, 3)]),
        ];
        let m = merge_streams(&s, 3).unwrap();
        assert_eq!(m.entries, vec![e(1.0, 0), e(2.0, 2), e(3.0, 3)]);
    }

    #[test]
    fn single_stream_identity() {
        let s = [stream(0, vec![e(1.0, 0), e(2.0, 1)])];
        let m = merge_streams(&s, 5).unwrap();
        assert_eq!(m.entries, s[0].entries);
    }

    #[test]
    fn cross_stream_tie_breaks_by_index() {
        let s = [stream(0, vec![e(1.0, 7)]), stream(1, vec![e(1.0, 3)])];
        let m = merge_streams(&s, 2).unwrap();
        assert_eq!(m.entries, vec![e(1.0, 3), e(1.0, 7)]);
    }

    #[test]
    fn empty_stream_set_is_an_error() {
        assert!(matches!(merge_streams(&[], 1), Err(DigcError::EmptyStreams)));
    }

    #[test]
    fn output_length_is_min_of_limit_and_total() {
        let s = [stream(0, vec![e(1.0, 0)]), stream(1, vec![e(2.0, 5)])];
        assert_eq!(merge_streams(&s, 10).unwrap().entries.len(), 2);
        assert_eq!(merge_streams(&s, 1).unwrap().entries.len(), 1);
    }
}
