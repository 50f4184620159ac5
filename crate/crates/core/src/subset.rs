//! Output subsets and tables indexed by them.
//!
//! A table over an ordered output list `outputs` stores one value per subset,
//! indexed by the bitmask of positions within `outputs`.

use serde::{Deserialize, Serialize};

/// Hard cap on the size of any output set enumerated exhaustively.
pub const HARD_SUBSET_CAP: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetTable<T> {
    pub outputs: Vec<usize>,
    pub values: Vec<T>,
}

impl<T> SubsetTable<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value for the subset given by a position bitmask.
    pub fn get(&self, mask: usize) -> &T {
        &self.values[mask]
    }

    /// Translates a position bitmask back to output indices.
    pub fn subset(&self, mask: usize) -> Vec<usize> {
        mask_to_subset(&self.outputs, mask)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, &T)> + '_ {
        self.values.iter().enumerate().map(|(m, v)| (self.subset(m), v))
    }
}

pub fn mask_to_subset(outputs: &[usize], mask: usize) -> Vec<usize> {
    outputs
        .iter()
        .enumerate()
        .filter(|(pos, _)| mask >> pos & 1 == 1)
        .map(|(_, &o)| o)
        .collect()
}

/// All subsets of `0..n` with at most `max_size` elements, ordered by size then
/// lexicographically. The empty set comes first.
pub fn subsets_up_to(n: usize, max_size: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_size.min(n) {
        let mut next = Vec::new();
        for s in &frontier {
            let start = s.last().map_or(0, |&l| l + 1);
            for v in start..n {
                let mut t = s.clone();
                t.push(v);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Number of nonempty subsets of an `n`-set with at most `max_size` elements.
pub fn count_subsets_up_to(n: usize, max_size: usize) -> u128 {
    let mut total = 0u128;
    let mut binom = 1u128;
    for s in 1..=max_size.min(n) {
        binom = binom * (n - s + 1) as u128 / s as u128;
        total += binom;
    }
    total
}

/// Sorted, deduplicated copy of an output list.
pub fn normalize(outputs: &[usize]) -> Vec<usize> {
    let mut v = outputs.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_enumeration_counts() {
        let all = subsets_up_to(5, 2);
        assert_eq!(all.len(), 1 + 5 + 10);
        assert_eq!(count_subsets_up_to(5, 2), 15);
        assert_eq!(count_subsets_up_to(6, 6), 63);
        assert_eq!(all[0], Vec::<usize>::new());
        assert_eq!(all[1], vec![0]);
        assert_eq!(all[6], vec![0, 1]);
    }

    #[test]
    fn masks_map_to_positions() {
        assert_eq!(mask_to_subset(&[3, 7, 9], 0b101), vec![3, 9]);
    }
}
