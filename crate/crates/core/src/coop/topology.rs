//! Worker neighborhoods: bidirectional ring and 2-D torus.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TopologyKind {
    Ring,
    Torus,
    /// No links at all; used by the independent strategy.
    Isolated,
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TopologyKind::Ring => "ring",
            TopologyKind::Torus => "torus",
            TopologyKind::Isolated => "isolated",
        })
    }
}

impl FromStr for TopologyKind {
    type Err = TopologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ring" => Ok(TopologyKind::Ring),
            "torus" => Ok(TopologyKind::Torus),
            "isolated" | "none" => Ok(TopologyKind::Isolated),
            other => Err(TopologyError::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("unknown topology `{0}`")]
    UnknownKind(String),
    #[error("a ring needs at least 3 workers, got {0}")]
    RingTooSmall(usize),
    #[error("{0} workers cannot be arranged as a torus with at least 3 rows and 3 columns")]
    NoTorusShape(usize),
    #[error("at least one worker is required")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    kind: TopologyKind,
    /// (rows, cols) for a torus.
    shape: Option<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

/// Grid shape for a torus of `k` workers: rows is the largest divisor of
/// `k` with `3 ≤ rows ≤ √k`, and the columns must number at least 3.
pub fn torus_shape(k: usize) -> Option<(usize, usize)> {
    (3..=k)
        .take_while(|r| r * r <= k)
        .filter(|r| k.is_multiple_of(*r))
        .last()
        .map(|r| (r, k / r))
        .filter(|&(_, c)| c >= 3)
}

impl Topology {
    pub fn build(kind: TopologyKind, k: usize) -> Result<Self, TopologyError> {
        if k == 0 {
            return Err(TopologyError::Empty);
        }
        match kind {
            TopologyKind::Isolated => Ok(Self::isolated(k)),
            TopologyKind::Ring => {
                if k < 3 {
                    return Err(TopologyError::RingTooSmall(k));
                }
                let neighbors = (0..k)
                    .map(|i| vec![(i + 1) % k, (i + k - 1) % k])
                    .collect();
                Ok(Self {
                    kind,
                    shape: None,
                    neighbors,
                })
            }
            TopologyKind::Torus => {
                let (rows, cols) = torus_shape(k).ok_or(TopologyError::NoTorusShape(k))?;
                let neighbors = (0..k)
                    .map(|i| {
                        let (r, c) = (i / cols, i % cols);
                        vec![
                            r * cols + (c + 1) % cols,
                            ((r + 1) % rows) * cols + c,
                            r * cols + (c + cols - 1) % cols,
                            ((r + rows - 1) % rows) * cols + c,
                        ]
                    })
                    .collect();
                Ok(Self {
                    kind,
                    shape: Some((rows, cols)),
                    neighbors,
                })
            }
        }
    }

    pub fn isolated(k: usize) -> Self {
        Self {
            kind: TopologyKind::Isolated,
            shape: None,
            neighbors: vec![Vec::new(); k],
        }
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn shape(&self) -> Option<(usize, usize)> {
        self.shape
    }

    /// Number of workers.
    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    /// 0-based neighbor ids of `worker`.
    pub fn neighbors(&self, worker: usize) -> &[usize] {
        &self.neighbors[worker]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn one_based(t: &Topology, worker: usize) -> BTreeSet<usize> {
        t.neighbors(worker - 1).iter().map(|w| w + 1).collect()
    }

    #[test]
    fn ring_of_eight() {
        let t = Topology::build(TopologyKind::Ring, 8).unwrap();
        assert_eq!(one_based(&t, 1), BTreeSet::from([2, 8]));
    }

    #[test]
    fn torus_of_sixteen() {
        let t = Topology::build(TopologyKind::Torus, 16).unwrap();
        assert_eq!(t.shape(), Some((4, 4)));
        assert_eq!(one_based(&t, 1), BTreeSet::from([2, 5, 4, 13]));
    }

    #[test]
    fn torus_shapes() {
        assert_eq!(torus_shape(9), Some((3, 3)));
        assert_eq!(torus_shape(24), Some((4, 6)));
        assert_eq!(torus_shape(48), Some((6, 8)));
        assert_eq!(torus_shape(12), Some((3, 4)));
        assert_eq!(torus_shape(8), None);
        assert_eq!(torus_shape(13), None);
        assert_eq!(
            Topology::build(TopologyKind::Torus, 13).unwrap_err(),
            TopologyError::NoTorusShape(13)
        );
        assert!(Topology::build(TopologyKind::Ring, 2).is_err());
    }

    #[test]
    fn neighbor_relation_is_symmetric_and_distinct() {
        for k in 3..=64 {
            for kind in [TopologyKind::Ring, TopologyKind::Torus] {
                let Ok(t) = Topology::build(kind, k) else { continue };
                let degree = if kind == TopologyKind::Ring { 2 } else { 4 };
                for i in 0..k {
                    let ns = t.neighbors(i);
                    let distinct: BTreeSet<_> = ns.iter().collect();
                    assert_eq!(distinct.len(), degree, "{kind} k={k} i={i}");
                    assert!(!ns.contains(&i));
                    for &j in ns {
                        assert!(t.neighbors(j).contains(&i));
                    }
                }
            }
        }
    }
}
