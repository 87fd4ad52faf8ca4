//! Local sorting: per node and per co-node partition, keep the t smallest
//! (distance, index) entries in ascending order.

use std::cmp::Ordering;

use crate::types::DistEntry;

/// Locally sorted candidate entries for one (node, partition) pair.
/// Entries are strictly ascending and carry global co-node indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedPartitionStream {
    pub node: usize,
    pub partition: usize,
    pub entries: Vec<DistEntry>,
}

/// Returns the `t` smallest entries of `row` in ascending order; the full
/// sorted row when `t >= row.len()`.
pub fn sort_partition_row(row: &[DistEntry], t: usize) -> Vec<DistEntry> {
    sort_partition_row_by(row, t, DistEntry::cmp)
}

/// Sort with an explicit comparator. Only the natural entry order is used in
/// production; verification's fault injection passes a flipped tie-break.
pub(crate) fn sort_partition_row_by(
    row: &[DistEntry],
    t: usize,
    cmp: impl Fn(&DistEntry, &DistEntry) -> Ordering + Copy,
) -> Vec<DistEntry> {
    let t = t.min(row.len());
    if t == 0 {
        return Vec::new();
    }
    let mut v = row.to_vec();
    if t < v.len() {
        v.select_nth_unstable_by(t - 1, |a, b| cmp(a, b));
        v.truncate(t);
    }
    v.sort_unstable_by(|a, b| cmp(a, b));
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(dist: f32, index: u32) -> DistEntry {
        DistEntry::new(dist, index)
    }

    #[test]
    fn smallest_two() {
        let row = [e(3.0, 0), e(1.0, 1), e(2.0, 2)];
        assert_eq!(sort_partition_row(&row, 2), vec![e(1.0, 1), e(2.0, 2)]);
    }

    #[test]
    fn tie_broken_by_index() {
        let row = [e(1.0, 2), e(1.0, 0)];
        assert_eq!(sort_partition_row(&row, 2), vec![e(1.0, 0), e(1.0, 2)]);
    }

    #[test]
    fn t_larger_than_row_gives_full_sort() {
        let row = [e(2.0, 0), e(1.0, 1)];
        assert_eq!(sort_partition_row(&row, 10), vec![e(1.0, 1), e(2.0, 0)]);
    }

    #[test]
    fn matches_full_sort_prefix() {
        // 28-entry row, t=16, against the brute-force full sort.
        let mut row = Vec::new();
        let mut v = 17u32;
        for i in 0..28 {
            v = v.wrapping_mul(1103515245).wrapping_add(12345);
            row.push(e((v % 97) as f32 * 0.25, i));
        }
        let mut full = row.clone();
        full.sort();
        assert_eq!(sort_partition_row(&row, 16), full[..16].to_vec());
    }
}
