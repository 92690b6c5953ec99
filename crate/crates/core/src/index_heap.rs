//! Per-text min-heap of partner ranks that only keeps the end of the
//! contiguous occupied prefix and everything above it.
//!
//! For a heap rooted at rank `i`, let `O` be every rank ever inserted plus
//! `i` itself. The stored minimum `m` satisfies `[i, m] ⊆ O` and
//! `m + 1 ∉ O`, so `m + 1` is the next free partner in `O(1)`.

use alloc::collections::BinaryHeap;
use core::cmp::Reverse;

use hashbrown::HashSet;

#[derive(Debug, Clone)]
pub struct CompressedIndexHeap {
    heap: BinaryHeap<Reverse<usize>>,
    members: HashSet<usize>,
}

impl CompressedIndexHeap {
    /// Heap rooted at `base`, i.e. `{base}`.
    pub fn new(base: usize) -> Self {
        let mut h = CompressedIndexHeap {
            heap: BinaryHeap::new(),
            members: HashSet::new(),
        };
        h.push(base);
        h
    }

    /// Builds the compressed form of an arbitrary occupied set by inserting
    /// its elements above `base` in one batch.
    pub fn from_occupied(base: usize, occupied: &[usize]) -> Self {
        let mut h = Self::new(base);
        let extra: alloc::vec::Vec<usize> = occupied.iter().copied().filter(|&e| e > base).collect();
        if !extra.is_empty() {
            h.add(&extra);
        }
        h
    }

    pub fn min(&self) -> usize {
        self.heap.peek().expect("heap is never empty").0
    }

    pub fn max(&self) -> usize {
        *self.members.iter().max().expect("heap is never empty")
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn contains(&self, rank: usize) -> bool {
        self.members.contains(&rank)
    }

    /// Stored elements in ascending order.
    pub fn sorted(&self) -> alloc::vec::Vec<usize> {
        let mut v: alloc::vec::Vec<usize> = self.members.iter().copied().collect();
        v.sort_unstable();
        v
    }

    fn push(&mut self, rank: usize) {
        if self.members.insert(rank) {
            self.heap.push(Reverse(rank));
        }
    }

    fn pop(&mut self) -> Option<usize> {
        let Reverse(v) = self.heap.pop()?;
        self.members.remove(&v);
        Some(v)
    }

    /// Inserts `ranks`; if one of them extends the prefix (equals the old
    /// minimum plus one), pops the minimum while its successor is present,
    /// leaving the new prefix end on top.
    ///
    /// Ranks at or below the current minimum already belong to the prefix
    /// and ranks already stored are ignored.
    pub fn add(&mut self, ranks: &[usize]) {
        let h = self.min();
        let mut extends = false;
        for &e in ranks {
            if e <= h {
                continue;
            }
            extends |= e == h + 1;
            self.push(e);
        }
        if !extends {
            return;
        }
        while self.len() > 1 {
            let beta = self.pop().expect("len > 1");
            if self.min() != beta + 1 {
                self.push(beta);
                break;
            }
        }
    }
}

/// Smallest rank above `hy.min()` that is in neither heap, scanning no
/// further than `n`.
///
/// Both heaps must come from the selection context where every rank of
/// `hx`'s prefix lies below `hy.min() + 1`, so membership in the stored
/// elements decides admissibility.
pub fn greedy_scan(hx: &CompressedIndexHeap, hy: &CompressedIndexHeap, n: usize) -> Option<usize> {
    let first = hy.min() + 1;
    if !hx.contains(first) {
        return (first <= n).then_some(first);
    }
    // the scan may run past max(hy) + 1 when hy is a singleton
    let mut gamma = first + 1;
    while gamma <= n {
        if !hy.contains(gamma) && !hx.contains(gamma) {
            return Some(gamma);
        }
        gamma += 1;
    }
    None
}
