//! Sparse per-edge penalty counts.

use rustc_hash::FxHashMap;

/// Penalty counts keyed by the canonical `(min, max)` city pair.
/// Edges that were never penalized are absent and read as 0.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PenaltyTable {
    counts: FxHashMap<(u32, u32), u32>,
    total: u64,
}

#[inline]
fn key(a: usize, b: usize) -> (u32, u32) {
    if a < b {
        (a as u32, b as u32)
    } else {
        (b as u32, a as u32)
    }
}

impl PenaltyTable {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> u32 {
        if self.counts.is_empty() {
            return 0;
        }
        self.counts.get(&key(a, b)).copied().unwrap_or(0)
    }

    /// Adds one to the penalty of edge {a, b}; returns the new count.
    pub fn increment(&mut self, a: usize, b: usize) -> u32 {
        let p = self.counts.entry(key(a, b)).or_insert(0);
        *p += 1;
        self.total += 1;
        *p
    }

    /// Sets an explicit count; a count of zero removes the entry.
    pub fn set(&mut self, a: usize, b: usize, count: u32) {
        let old = if count == 0 {
            self.counts.remove(&key(a, b)).unwrap_or(0)
        } else {
            self.counts.insert(key(a, b), count).unwrap_or(0)
        };
        self.total = self.total - old as u64 + count as u64;
    }

    /// Sum of all penalty counts.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of edges carrying a nonzero penalty.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Nonzero entries as `((a, b), count)` with `a < b`, in unspecified order.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), u32)> + '_ {
        self.counts
            .iter()
            .map(|(&(a, b), &p)| ((a as usize, b as usize), p))
    }

    pub fn clear(&mut self) {
        self.counts.clear();
        self.total = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_keys_and_totals() {
        let mut pen = PenaltyTable::new();
        assert_eq!(pen.get(4, 2), 0);
        assert_eq!(pen.increment(4, 2), 1);
        assert_eq!(pen.increment(2, 4), 2);
        assert_eq!(pen.get(4, 2), 2);
        pen.set(0, 1, 5);
        assert_eq!(pen.total(), 7);
        pen.set(1, 0, 0);
        assert_eq!(pen.total(), 2);
        assert_eq!(pen.len(), 1);
        assert_eq!(pen.iter().collect::<Vec<_>>(), vec![((2, 4), 2)]);
    }
}
