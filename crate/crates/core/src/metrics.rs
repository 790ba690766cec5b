//! Evaluation metrics: excess, speedup, efficiency, undesirable-penalty
//! ratio and best-contributor analysis.

use std::collections::HashSet;

use thiserror::Error;

use crate::instance::Cost;
use crate::penalty::PenaltyTable;
use crate::record::RunRecord;
use crate::stats::{self, StatsError};
use crate::tour::Tour;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("optimum must be positive, got {0}")]
    NonPositiveOptimum(Cost),
    #[error("cost {cost} is below the registered optimum {optimum}")]
    BelowOptimum { cost: Cost, optimum: Cost },
    #[error("worker count must be positive")]
    ZeroWorkers,
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Percentage excess over the optimum: `100 · (cost − opt) / opt`.
pub fn excess(cost: Cost, optimum: Cost) -> Result<f64, MetricsError> {
    if optimum <= 0 {
        return Err(MetricsError::NonPositiveOptimum(optimum));
    }
    if cost < optimum {
        return Err(MetricsError::BelowOptimum { cost, optimum });
    }
    Ok(100.0 * (cost - optimum) as f64 / optimum as f64)
}

/// `E[T_1,1] / E[T_K,K]`: the K-worker run against the sequential one.
pub fn speedup_s1(seq_times: &[f64], par_times: &[f64]) -> Result<f64, MetricsError> {
    Ok(stats::mean(seq_times)? / stats::mean(par_times)?)
}

/// `E[T_K,1] / E[T_K,K]`: the same K-worker algorithm on one processor
/// against K processors.
pub fn speedup_s2(par1_times: &[f64], par_k_times: &[f64]) -> Result<f64, MetricsError> {
    Ok(stats::mean(par1_times)? / stats::mean(par_k_times)?)
}

pub fn efficiency(speedup: f64, workers: usize) -> Result<f64, MetricsError> {
    if workers == 0 {
        return Err(MetricsError::ZeroWorkers);
    }
    Ok(speedup / workers as f64)
}

/// Canonical `(min, max)` edge set of the union of the given tours.
pub fn golden_edges<'a>(tours: impl IntoIterator<Item = &'a Tour>) -> HashSet<(usize, usize)> {
    tours
        .into_iter()
        .flat_map(|t| t.edges().map(|(a, b)| (a.min(b), a.max(b))))
        .collect()
}

/// Share of the total penalty mass that sits on golden edges; 0 when no
/// penalty has been applied.
pub fn undesirable_penalty_ratio(pen: &PenaltyTable, golden: &HashSet<(usize, usize)>) -> f64 {
    let total = pen.total();
    if total == 0 {
        return 0.0;
    }
    let on_golden: u64 = pen
        .iter()
        .filter(|(e, _)| golden.contains(e))
        .map(|(_, p)| p as u64)
        .sum();
    on_golden as f64 / total as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContributorStats {
    /// Workers that held the overall best at some instant.
    pub contributors: usize,
    /// Leading ratio of every worker, sorted from largest to smallest.
    pub leading_ratios: Vec<f64>,
    /// Leading ratio indexed by worker id.
    pub by_worker: Vec<f64>,
}

/// Replays the merged improvement timeline of one run.
///
/// The worker whose improvement set the current overall best leads until
/// someone strictly beats it. Time before the first improvement has no
/// leader. Simultaneous events are ordered by worker id, then by position
/// in the worker's log. The run lasts until the latest `wall_seconds`.
pub fn best_contributor_stats(records: &[RunRecord]) -> ContributorStats {
    let workers = records.iter().map(|r| r.worker + 1).max().unwrap_or(0);
    let total_time = records
        .iter()
        .map(|r| r.wall_seconds)
        .fold(0.0_f64, f64::max);

    let mut timeline: Vec<(f64, usize, usize, Cost)> = records
        .iter()
        .flat_map(|r| {
            r.improvements()
                .enumerate()
                .map(move |(seq, (t, cost))| (t, r.worker, seq, cost))
        })
        .collect();
    timeline.sort_by(|x, y| {
        x.0.total_cmp(&y.0)
            .then(x.1.cmp(&y.1))
            .then(x.2.cmp(&y.2))
    });

    let mut leading = vec![0.0; workers];
    let mut was_leader = vec![false; workers];
    let mut leader: Option<(usize, f64, Cost)> = None;
    for &(t, worker, _, cost) in &timeline {
        match leader {
            Some((_, _, best)) if cost >= best => {}
            Some((prev, since, _)) => {
                leading[prev] += (t - since).max(0.0);
                leader = Some((worker, t, cost));
                was_leader[worker] = true;
            }
            None => {
                leader = Some((worker, t, cost));
                was_leader[worker] = true;
            }
        }
    }
    if let Some((prev, since, _)) = leader {
        leading[prev] += (total_time - since).max(0.0);
    }

    let by_worker: Vec<f64> = if total_time > 0.0 {
        leading.iter().map(|l| l / total_time).collect()
    } else {
        // Degenerate zero-length run: the first finder holds the best throughout.
        (0..workers)
            .map(|w| if leader.is_some_and(|(l, _, _)| l == w) { 1.0 } else { 0.0 })
            .collect()
    };
    let mut leading_ratios = by_worker.clone();
    leading_ratios.sort_by(|a, b| b.total_cmp(a));
    ContributorStats {
        contributors: was_leader.iter().filter(|&&b| b).count(),
        leading_ratios,
        by_worker,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::EventKind;

    fn record(worker: usize, wall: f64, improvements: &[(f64, Cost)]) -> RunRecord {
        let mut r = RunRecord::new(worker, worker as u64);
        for &(t, c) in improvements {
            r.push(t, 0, EventKind::Improvement { cost: c });
        }
        r.wall_seconds = wall;
        r
    }

    #[test]
    fn excess_examples() {
        assert_eq!(excess(100, 100).unwrap(), 0.0);
        assert!((excess(10100, 10000).unwrap() - 1.0).abs() < 1e-12);
        let e = excess(27963, 27686).unwrap();
        assert!((e - 100.0 * 277.0 / 27686.0).abs() < 1e-12);
        assert!(e > 1.0005 && e < 1.0006);
        assert!(matches!(
            excess(99, 100),
            Err(MetricsError::BelowOptimum { .. })
        ));
        assert!(excess(5, 0).is_err());
    }

    #[test]
    fn speedup_examples() {
        assert_eq!(speedup_s1(&[3.0, 5.0], &[4.0, 4.0]).unwrap(), 1.0);
        let s = speedup_s1(&[400.0], &[50.0]).unwrap();
        assert_eq!(s, 8.0);
        assert_eq!(efficiency(s, 8).unwrap(), 1.0);
        assert_eq!(speedup_s1(&[10.0, 20.0, 30.0], &[5.0, 5.0, 5.0]).unwrap(), 4.0);
        assert_eq!(speedup_s2(&[90.0], &[30.0]).unwrap(), 3.0);
        assert!(speedup_s1(&[], &[1.0]).is_err());
        assert!(efficiency(2.0, 0).is_err());
    }

    #[test]
    fn penalty_ratio_examples() {
        let golden: HashSet<_> = [(0, 1), (1, 2)].into_iter().collect();
        let mut pen = PenaltyTable::new();
        assert_eq!(undesirable_penalty_ratio(&pen, &golden), 0.0);
        pen.set(0, 1, 3);
        assert_eq!(undesirable_penalty_ratio(&pen, &golden), 1.0);
        pen.set(5, 7, 7);
        assert!((undesirable_penalty_ratio(&pen, &golden) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn single_worker_leads_after_first_improvement() {
        let s = best_contributor_stats(&[record(0, 10.0, &[(0.0, 50), (4.0, 40)])]);
        assert_eq!(s.contributors, 1);
        assert_eq!(s.leading_ratios, vec![1.0]);
    }

    #[test]
    fn worker_that_never_leads() {
        let a = record(0, 10.0, &[(0.0, 40)]);
        let b = record(1, 10.0, &[(1.0, 45), (5.0, 41)]);
        let s = best_contributor_stats(&[a, b]);
        assert_eq!(s.contributors, 1);
        assert_eq!(s.by_worker, vec![1.0, 0.0]);
    }

    #[test]
    fn hand_timeline() {
        let a = record(0, 10.0, &[(0.0, 100)]);
        let b = record(1, 10.0, &[(4.0, 90)]);
        let s = best_contributor_stats(&[a, b]);
        assert_eq!(s.contributors, 2);
        assert!((s.leading_ratios[0] - 0.6).abs() < 1e-12);
        assert!((s.leading_ratios[1] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn simultaneous_events_prefer_lower_worker_id() {
        let a = record(0, 10.0, &[(2.0, 70)]);
        let b = record(1, 10.0, &[(2.0, 70)]);
        let s = best_contributor_stats(&[b, a]);
        assert_eq!(s.contributors, 1);
        assert!((s.by_worker[0] - 0.8).abs() < 1e-12);
    }
}
