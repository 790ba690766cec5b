//! Per-worker event logs.

use serde::{Deserialize, Serialize};

use crate::instance::Cost;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    /// The worker's historical best improved to `cost`.
    Improvement { cost: Cost },
    /// The historical best was sent to every listed neighbor.
    Send { cost: Cost, to: Vec<usize> },
    Receive { from: usize, cost: Cost },
    /// Edges penalized at the end of an iteration, as `(min, max)` pairs.
    Penalize { edges: Vec<(usize, usize)> },
    Stop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    /// Seconds since the common run start.
    pub elapsed: f64,
    /// GLS iteration counter when the event happened.
    pub iteration: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// Why a worker stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    TargetReached,
    /// Another worker reached the target and broadcast stop.
    StopReceived,
    TimeLimit,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub worker: usize,
    pub seed: u64,
    pub events: Vec<Event>,
    pub final_cost: Cost,
    pub wall_seconds: f64,
    pub iterations: u64,
    pub sends: u64,
    pub receives: u64,
    pub penalizations: u64,
    pub stop_reason: StopReason,
    /// λ in effect once resolved.
    pub lambda: f64,
    /// g of the first local optimum.
    pub first_local_optimum: Option<Cost>,
}

impl RunRecord {
    pub fn new(worker: usize, seed: u64) -> Self {
        Self {
            worker,
            seed,
            events: Vec::new(),
            final_cost: 0,
            wall_seconds: 0.0,
            iterations: 0,
            sends: 0,
            receives: 0,
            penalizations: 0,
            stop_reason: StopReason::IterationLimit,
            lambda: 0.0,
            first_local_optimum: None,
        }
    }

    pub fn push(&mut self, elapsed: f64, iteration: u64, kind: EventKind) {
        self.events.push(Event {
            elapsed,
            iteration,
            kind,
        });
    }

    pub fn improvements(&self) -> impl Iterator<Item = (f64, Cost)> + '_ {
        self.events.iter().filter_map(|e| match e.kind {
            EventKind::Improvement { cost } => Some((e.elapsed, cost)),
            _ => None,
        })
    }

    /// Penalized edge sets, one entry per logged penalization.
    pub fn penalization_trace(&self) -> Vec<Vec<(usize, usize)>> {
        self.events
            .iter()
            .filter_map(|e| match &e.kind {
                EventKind::Penalize { edges } => Some(edges.clone()),
                _ => None,
            })
            .collect()
    }

    /// Wall-clock time at which the historical best first reached `target`.
    pub fn time_to_target(&self, target: Cost) -> Option<f64> {
        self.improvements()
            .find(|&(_, cost)| cost <= target)
            .map(|(t, _)| t)
    }

    /// The record with every timing field zeroed, for comparing runs whose
    /// only differences are wall-clock measurements.
    pub fn without_timing(&self) -> RunRecord {
        let mut r = self.clone();
        r.wall_seconds = 0.0;
        for e in &mut r.events {
            e.elapsed = 0.0;
        }
        r
    }

    pub fn count_stops(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::Stop))
            .count()
    }
}
