//! 2-opt descent on the augmented objective with neighbor lists and
//! don't-look bits.
//!
//! Scan order is fixed: active cities in ascending index, and for each city
//! its candidates in ascending cost, trying the successor-side move before
//! the predecessor-side move. The first move with `delta_h < 0` is applied.

use crate::instance::{Cost, TspInstance};
use crate::penalty::PenaltyTable;
use crate::tour::{ActivationBits, NeighborLists, Tour};

/// Historical best tour with respect to g, updated during descents.
#[derive(Debug, Clone)]
pub struct HistoricalBest {
    tour: Tour,
    cost: Cost,
    /// The current tour of the running descent is the best seen and has
    /// not been copied yet.
    pending: bool,
}

impl HistoricalBest {
    pub fn new(initial: Tour) -> Self {
        let cost = initial.cost();
        Self {
            tour: initial,
            cost,
            pending: false,
        }
    }

    pub fn tour(&self) -> &Tour {
        &self.tour
    }

    pub fn cost(&self) -> Cost {
        self.cost
    }

    /// Offers a complete tour; keeps it if it strictly improves g.
    pub fn offer(&mut self, tour: &Tour) -> bool {
        if tour.cost() < self.cost {
            self.tour.clone_from(tour);
            self.cost = tour.cost();
            self.pending = false;
            true
        } else {
            false
        }
    }

    #[inline]
    fn observe(&mut self, current: &Tour) -> bool {
        if current.cost() < self.cost {
            self.cost = current.cost();
            self.pending = true;
            true
        } else {
            false
        }
    }

    #[inline]
    fn flush(&mut self, current: &Tour) {
        if self.pending {
            self.tour.clone_from(current);
            self.pending = false;
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Improving moves applied.
    pub moves: u64,
    /// Whether the historical best improved during this descent.
    pub improved_best: bool,
}

/// A scanned 2-opt candidate: positions of the two removed edges plus the
/// deltas of the move.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    i: usize,
    j: usize,
    delta_g: Cost,
}

#[inline]
fn augmented_delta(
    inst: &TspInstance,
    pen: &PenaltyTable,
    lambda: f64,
    removed: [(usize, usize); 2],
    added: [(usize, usize); 2],
) -> (Cost, bool) {
    let delta_g = inst.cost(added[0].0, added[0].1) + inst.cost(added[1].0, added[1].1)
        - inst.cost(removed[0].0, removed[0].1)
        - inst.cost(removed[1].0, removed[1].1);
    if lambda == 0.0 || pen.is_empty() {
        return (delta_g, delta_g < 0);
    }
    let delta_p = pen.get(added[0].0, added[0].1) as i64 + pen.get(added[1].0, added[1].1) as i64
        - pen.get(removed[0].0, removed[0].1) as i64
        - pen.get(removed[1].0, removed[1].1) as i64;
    let delta_h = delta_g as f64 + lambda * delta_p as f64;
    (delta_g, delta_h < 0.0)
}

/// First improving move for city `a`, or `None` when `a` admits none.
#[inline]
fn find_improving(
    tour: &Tour,
    a: usize,
    inst: &TspInstance,
    pen: &PenaltyTable,
    lambda: f64,
    nl: &NeighborLists,
) -> Option<(Candidate, [usize; 4])> {
    let succ_a = tour.succ(a);
    let pred_a = tour.pred(a);
    for &c in nl.of(a) {
        let c = c as usize;
        // remove (a, succ a), (c, succ c); add (a, c), (succ a, succ c)
        let d = tour.succ(c);
        if c != succ_a && d != a {
            let (delta_g, improving) =
                augmented_delta(inst, pen, lambda, [(a, succ_a), (c, d)], [(a, c), (succ_a, d)]);
            if improving {
                let cand = Candidate {
                    i: tour.position(a),
                    j: tour.position(c),
                    delta_g,
                };
                return Some((cand, [a, succ_a, c, d]));
            }
        }
        // remove (pred a, a), (pred c, c); add (a, c), (pred a, pred c)
        let d = tour.pred(c);
        if c != pred_a && d != a {
            let (delta_g, improving) =
                augmented_delta(inst, pen, lambda, [(pred_a, a), (d, c)], [(a, c), (pred_a, d)]);
            if improving {
                let cand = Candidate {
                    i: tour.position(pred_a),
                    j: tour.position(d),
                    delta_g,
                };
                return Some((cand, [a, pred_a, c, d]));
            }
        }
    }
    None
}

/// Descends on h = g + λ·Σp until no active city admits an improving move.
/// On return every activation bit is clear and `best` is up to date.
pub fn local_search(
    tour: &mut Tour,
    inst: &TspInstance,
    pen: &PenaltyTable,
    lambda: f64,
    bits: &mut ActivationBits,
    nl: &NeighborLists,
    best: &mut HistoricalBest,
) -> SearchStats {
    let mut stats = SearchStats {
        moves: 0,
        improved_best: best.observe(tour),
    };
    let mut cursor = 0;
    loop {
        let Some(a) = bits.next_active(cursor) else {
            if bits.any() {
                cursor = 0;
                continue;
            }
            break;
        };
        match find_improving(tour, a, inst, pen, lambda, nl) {
            Some((cand, endpoints)) => {
                if cand.delta_g >= 0 {
                    best.flush(tour);
                }
                tour.apply_two_opt(cand.i, cand.j, cand.delta_g)
                    .expect("scanned candidates are valid 2-opt moves");
                stats.moves += 1;
                stats.improved_best |= best.observe(tour);
                for c in endpoints {
                    bits.set(c);
                }
                // `a` stays active and is rescanned before moving on.
                cursor = a;
            }
            None => {
                bits.clear(a);
                cursor = a + 1;
            }
        }
    }
    best.flush(tour);
    stats
}

/// Whether any city admits an improving move within its candidate list.
pub fn has_improving_move(
    tour: &Tour,
    inst: &TspInstance,
    pen: &PenaltyTable,
    lambda: f64,
    nl: &NeighborLists,
) -> bool {
    (0..inst.len()).any(|a| find_improving(tour, a, inst, pen, lambda, nl).is_some())
}
