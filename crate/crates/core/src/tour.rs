//! Tour representation, 2-opt moves, candidate neighbor lists and
//! activation bits.

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::instance::{Cost, TspInstance};
use crate::penalty::PenaltyTable;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TourError {
    #[error("order of length {got} is not a permutation of 0..{n}")]
    NotAPermutation { got: usize, n: usize },
    #[error("positions ({i}, {j}) do not name two distinct non-adjacent tour edges (n = {n})")]
    InvalidMove { i: usize, j: usize, n: usize },
}

/// A cyclic permutation of cities with its inverse index and cached cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tour {
    order: Vec<u32>,
    pos: Vec<u32>,
    cost: Cost,
}

impl Tour {
    pub fn from_order(order: Vec<u32>, inst: &TspInstance) -> Result<Self, TourError> {
        let n = inst.len();
        let mut pos = vec![u32::MAX; n];
        if order.len() != n {
            return Err(TourError::NotAPermutation { got: order.len(), n });
        }
        for (i, &c) in order.iter().enumerate() {
            let c = c as usize;
            if c >= n || pos[c] != u32::MAX {
                return Err(TourError::NotAPermutation { got: order.len(), n });
            }
            pos[c] = i as u32;
        }
        let cost = inst.tour_length(&order);
        Ok(Self { order, pos, cost })
    }

    pub fn identity(inst: &TspInstance) -> Self {
        Self::from_order((0..inst.len() as u32).collect(), inst).expect("identity is a permutation")
    }

    pub fn random<R: Rng + ?Sized>(inst: &TspInstance, rng: &mut R) -> Self {
        let mut order: Vec<u32> = (0..inst.len() as u32).collect();
        order.shuffle(rng);
        Self::from_order(order, inst).expect("shuffle preserves the permutation")
    }

    /// Greedy nearest-neighbor construction from a random start city.
    pub fn nearest_neighbor<R: Rng + ?Sized>(inst: &TspInstance, rng: &mut R) -> Self {
        let n = inst.len();
        let mut visited = vec![false; n];
        let mut current = rng.gen_range(0..n);
        let mut order = Vec::with_capacity(n);
        visited[current] = true;
        order.push(current as u32);
        for _ in 1..n {
            let next = (0..n)
                .filter(|&c| !visited[c])
                .min_by_key(|&c| (inst.cost(current, c), c))
                .expect("unvisited city remains");
            visited[next] = true;
            order.push(next as u32);
            current = next;
        }
        Self::from_order(order, inst).expect("construction visits every city once")
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[u32] {
        &self.order
    }

    pub fn into_order(self) -> Vec<u32> {
        self.order
    }

    /// Cached g(s).
    pub fn cost(&self) -> Cost {
        self.cost
    }

    #[inline]
    pub fn city_at(&self, position: usize) -> usize {
        self.order[position] as usize
    }

    #[inline]
    pub fn position(&self, city: usize) -> usize {
        self.pos[city] as usize
    }

    #[inline]
    pub fn succ(&self, city: usize) -> usize {
        let p = self.pos[city] as usize + 1;
        self.order[if p == self.order.len() { 0 } else { p }] as usize
    }

    #[inline]
    pub fn pred(&self, city: usize) -> usize {
        let p = self.pos[city] as usize;
        self.order[if p == 0 { self.order.len() - 1 } else { p - 1 }] as usize
    }

    /// Whether the undirected edge {a, b} is part of the tour.
    #[inline]
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let n = self.order.len();
        let (pa, pb) = (self.pos[a] as usize, self.pos[b] as usize);
        let d = pa.abs_diff(pb);
        a != b && (d == 1 || d == n - 1)
    }

    /// The n cyclic edges, each as (order[i], order[i+1]).
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.order.len();
        (0..n).map(move |i| (self.order[i] as usize, self.order[(i + 1) % n] as usize))
    }

    /// Recomputes g(s) from scratch, ignoring the cache.
    pub fn evaluate(&self, inst: &TspInstance) -> Cost {
        inst.tour_length(&self.order)
    }

    /// Checks every structural invariant; used by tests and message receipt.
    pub fn is_consistent(&self, inst: &TspInstance) -> bool {
        let n = inst.len();
        self.order.len() == n
            && self.pos.len() == n
            && self
                .order
                .iter()
                .enumerate()
                .all(|(i, &c)| (c as usize) < n && self.pos[c as usize] as usize == i)
            && self.cost == self.evaluate(inst)
    }

    fn check_move(&self, i: usize, j: usize) -> Result<(usize, usize), TourError> {
        let n = self.order.len();
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        if j >= n || i == j || j == i + 1 || (i == 0 && j == n - 1) {
            return Err(TourError::InvalidMove { i, j, n });
        }
        Ok((i, j))
    }

    /// Cost deltas of the 2-opt move removing the edges that start at
    /// positions `i` and `j`, without mutating the tour.
    pub fn two_opt_delta(
        &self,
        i: usize,
        j: usize,
        inst: &TspInstance,
        pen: &PenaltyTable,
        lambda: f64,
    ) -> Result<(Cost, f64), TourError> {
        let (i, j) = self.check_move(i, j)?;
        let n = self.order.len();
        let a = self.city_at(i);
        let b = self.city_at(i + 1);
        let c = self.city_at(j);
        let d = self.city_at((j + 1) % n);
        let delta_g = inst.cost(a, c) + inst.cost(b, d) - inst.cost(a, b) - inst.cost(c, d);
        let delta_p = pen.get(a, c) as i64 + pen.get(b, d) as i64
            - pen.get(a, b) as i64
            - pen.get(c, d) as i64;
        Ok((delta_g, delta_g as f64 + lambda * delta_p as f64))
    }

    /// Applies the 2-opt move at positions `(i, j)`; `delta_g` must be the
    /// value reported by [`Tour::two_opt_delta`] for the same move.
    pub fn apply_two_opt(&mut self, i: usize, j: usize, delta_g: Cost) -> Result<(), TourError> {
        let (i, j) = self.check_move(i, j)?;
        self.reverse_between(i, j);
        self.cost += delta_g;
        Ok(())
    }

    /// Applies a 2-opt move and recomputes its g delta from the instance.
    pub fn apply_two_opt_eval(
        &mut self,
        i: usize,
        j: usize,
        inst: &TspInstance,
    ) -> Result<Cost, TourError> {
        let (i, j) = self.check_move(i, j)?;
        let n = self.order.len();
        let a = self.city_at(i);
        let b = self.city_at(i + 1);
        let c = self.city_at(j);
        let d = self.city_at((j + 1) % n);
        let delta_g = inst.cost(a, c) + inst.cost(b, d) - inst.cost(a, b) - inst.cost(c, d);
        self.reverse_between(i, j);
        self.cost += delta_g;
        Ok(delta_g)
    }

    /// Reverses positions i+1..=j, or the complementary arc when that is
    /// shorter. Both give the same cyclic tour.
    fn reverse_between(&mut self, i: usize, j: usize) {
        let n = self.order.len();
        let inner = j - i;
        let (mut lo, mut hi, len) = if inner <= n - inner {
            (i + 1, j, inner)
        } else {
            ((j + 1) % n, i, n - inner)
        };
        for _ in 0..len / 2 {
            let cl = self.order[lo];
            let ch = self.order[hi];
            self.order[lo] = ch;
            self.order[hi] = cl;
            self.pos[ch as usize] = lo as u32;
            self.pos[cl as usize] = hi as u32;
            lo = if lo + 1 == n { 0 } else { lo + 1 };
            hi = if hi == 0 { n - 1 } else { hi - 1 };
        }
    }
}

/// Per-city list of the k nearest cities, ascending by edge cost (ties by index).
#[derive(Debug, Clone)]
pub struct NeighborLists {
    k: usize,
    lists: Vec<u32>,
}

impl NeighborLists {
    pub fn new(inst: &TspInstance, k: usize) -> Self {
        let n = inst.len();
        let k = k.min(n - 1);
        let mut lists = Vec::with_capacity(n * k);
        let mut scratch: Vec<(Cost, u32)> = Vec::with_capacity(n);
        for a in 0..n {
            scratch.clear();
            scratch.extend((0..n).filter(|&b| b != a).map(|b| (inst.cost(a, b), b as u32)));
            if k < scratch.len() {
                scratch.select_nth_unstable(k);
                scratch.truncate(k);
            }
            scratch.sort_unstable();
            lists.extend(scratch.iter().map(|&(_, b)| b));
        }
        Self { k, lists }
    }

    /// Effective list length, `min(k, n - 1)`.
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn of(&self, city: usize) -> &[u32] {
        &self.lists[city * self.k..(city + 1) * self.k]
    }
}

/// Don't-look bits: one activation flag per city, stored as a bitset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivationBits {
    words: Vec<u64>,
    n: usize,
}

impl ActivationBits {
    pub fn all_active(n: usize) -> Self {
        let mut bits = Self::none_active(n);
        for c in 0..n {
            bits.set(c);
        }
        bits
    }

    pub fn none_active(n: usize) -> Self {
        Self {
            words: vec![0; n.div_ceil(64)],
            n,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn set(&mut self, city: usize) {
        self.words[city / 64] |= 1 << (city % 64);
    }

    #[inline]
    pub fn clear(&mut self, city: usize) {
        self.words[city / 64] &= !(1 << (city % 64));
    }

    #[inline]
    pub fn is_set(&self, city: usize) -> bool {
        self.words[city / 64] & (1 << (city % 64)) != 0
    }

    pub fn any(&self) -> bool {
        self.words.iter().any(|&w| w != 0)
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Smallest active city with index ≥ `from`.
    #[inline]
    pub fn next_active(&self, from: usize) -> Option<usize> {
        if from >= self.n {
            return None;
        }
        let mut w = from / 64;
        let mut word = self.words[w] & (!0u64 << (from % 64));
        loop {
            if word != 0 {
                return Some(w * 64 + word.trailing_zeros() as usize);
            }
            w += 1;
            if w == self.words.len() {
                return None;
            }
            word = self.words[w];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::EdgeWeightKind;

    fn square() -> TspInstance {
        TspInstance::new(
            "square",
            vec![(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)],
            EdgeWeightKind::Euc2d,
        )
        .unwrap()
    }

    #[test]
    fn triangle_cost() {
        let inst = TspInstance::new(
            "tri",
            vec![(0.0, 0.0), (3.0, 0.0), (0.0, 4.0)],
            EdgeWeightKind::Euc2d,
        )
        .unwrap();
        let t = Tour::from_order(vec![0, 1, 2], &inst).unwrap();
        assert_eq!(t.cost(), 12);
        let r = Tour::from_order(vec![2, 1, 0], &inst).unwrap();
        assert_eq!(r.cost(), t.cost());
    }

    #[test]
    fn rejects_non_permutations() {
        let inst = square();
        assert!(Tour::from_order(vec![0, 1, 1, 2], &inst).is_err());
        assert!(Tour::from_order(vec![0, 1, 2], &inst).is_err());
        assert!(Tour::from_order(vec![0, 1, 2, 4], &inst).is_err());
    }

    #[test]
    fn uncrossing_the_square() {
        let inst = square();
        let pen = PenaltyTable::new();
        // 0-1-3-2 crosses: edges (1,3) and (2,0) are the diagonals.
        let mut t = Tour::from_order(vec![0, 1, 3, 2], &inst).unwrap();
        assert_eq!(t.cost(), 10 + 14 + 10 + 14);
        let (dg, dh) = t.two_opt_delta(1, 3, &inst, &pen, 0.7).unwrap();
        assert_eq!(dg, -8);
        assert_eq!(dh, -8.0);
        t.apply_two_opt(1, 3, dg).unwrap();
        assert_eq!(t.cost(), 40);
        assert!(t.is_consistent(&inst));
        // applying the same move again restores the crossing tour
        let (dg2, _) = t.two_opt_delta(1, 3, &inst, &pen, 0.0).unwrap();
        t.apply_two_opt(1, 3, dg2).unwrap();
        assert_eq!(dg + dg2, 0);
        assert_eq!(t.cost(), 48);
        assert!(t.is_consistent(&inst));
    }

    #[test]
    fn adjacent_or_identical_edges_are_rejected() {
        let inst = square();
        let pen = PenaltyTable::new();
        let t = Tour::identity(&inst);
        for (i, j) in [(0, 0), (0, 1), (1, 2), (0, 3), (3, 0), (2, 7)] {
            assert!(t.two_opt_delta(i, j, &inst, &pen, 1.0).is_err(), "{i},{j}");
        }
    }

    #[test]
    fn has_edge_and_neighbors() {
        let inst = square();
        let t = Tour::from_order(vec![2, 0, 3, 1], &inst).unwrap();
        assert!(t.has_edge(2, 0) && t.has_edge(0, 2) && t.has_edge(1, 2));
        assert!(!t.has_edge(0, 1));
        assert_eq!(t.succ(1), 2);
        assert_eq!(t.pred(2), 1);
        assert_eq!(t.edges().count(), 4);
    }

    #[test]
    fn neighbor_lists_are_sorted() {
        let inst = square();
        let nl = NeighborLists::new(&inst, 10);
        assert_eq!(nl.k(), 3);
        assert_eq!(nl.of(0), &[1, 3, 2]);
        let nl2 = NeighborLists::new(&inst, 2);
        assert_eq!(nl2.of(2), &[1, 3]);
    }

    #[test]
    fn activation_bitset() {
        let mut bits = ActivationBits::none_active(130);
        assert!(!bits.any());
        bits.set(3);
        bits.set(64);
        bits.set(129);
        assert_eq!(bits.next_active(0), Some(3));
        assert_eq!(bits.next_active(4), Some(64));
        assert_eq!(bits.next_active(65), Some(129));
        bits.clear(129);
        assert_eq!(bits.next_active(65), None);
        assert_eq!(bits.count(), 2);
        assert_eq!(ActivationBits::all_active(70).count(), 70);
    }
}
