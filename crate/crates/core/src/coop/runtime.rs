//! Cooperative workers and the schedulers that drive them.

use std::collections::HashSet;
use std::thread;
use std::time::Instant;

use crate::gls::{GlsEngine, GlsError, GlsParams, StopCriterion};
use crate::instance::{Cost, TspInstance};
use crate::penalty::PenaltyTable;
use crate::record::{EventKind, RunRecord, StopReason};
use crate::tour::{NeighborLists, Tour};

use super::exchange::{apply_strategy, ChannelTransport, CoopStrategy, EliteState, Message, QueueTransport, Transport};
use super::topology::Topology;

#[derive(Debug, Clone)]
pub struct CoopConfig {
    pub params: GlsParams,
    pub strategy: CoopStrategy,
    pub topology: Topology,
    /// One seed per worker.
    pub seeds: Vec<u64>,
    pub stop: StopCriterion,
    /// Log every penalization in the worker records.
    pub trace_penalties: bool,
}

impl CoopConfig {
    pub fn workers(&self) -> usize {
        self.seeds.len()
    }

    pub fn validate(&self) -> Result<(), GlsError> {
        self.params.validate()?;
        if self.seeds.is_empty() {
            return Err(GlsError::InvalidParams("at least one worker is required".into()));
        }
        if self.topology.len() != self.seeds.len() {
            return Err(GlsError::InvalidParams(format!(
                "topology has {} workers but {} seeds were given",
                self.topology.len(),
                self.seeds.len()
            )));
        }
        let distinct: HashSet<u64> = self.seeds.iter().copied().collect();
        if distinct.len() != self.seeds.len() {
            return Err(GlsError::InvalidParams("worker seeds must be distinct".into()));
        }
        if !self.stop.is_bounded() {
            return Err(GlsError::InvalidParams("a stop criterion is required".into()));
        }
        Ok(())
    }

    fn neighbors(&self, worker: usize) -> &[usize] {
        if self.strategy.communicates() {
            self.topology.neighbors(worker)
        } else {
            &[]
        }
    }
}

/// Final state of one worker.
#[derive(Debug, Clone)]
pub struct WorkerResult {
    pub record: RunRecord,
    pub best: Tour,
    pub penalties: PenaltyTable,
}

/// One GLS process with its mailbox and elite state.
pub struct Worker<'a, T: Transport> {
    id: usize,
    engine: GlsEngine<'a>,
    state: EliteState,
    transport: T,
    strategy: CoopStrategy,
    stop: StopCriterion,
    trace: bool,
    record: RunRecord,
    finished: Option<StopReason>,
    start: Instant,
}

impl<'a, T: Transport> Worker<'a, T> {
    pub fn new(
        id: usize,
        inst: &'a TspInstance,
        nl: &'a NeighborLists,
        config: &CoopConfig,
        transport: T,
        start: Instant,
    ) -> Result<Self, GlsError> {
        let seed = config.seeds[id];
        Ok(Self {
            id,
            engine: GlsEngine::new(inst, nl, config.params, seed)?,
            state: EliteState::new(id, config.neighbors(id)),
            transport,
            strategy: config.strategy,
            stop: config.stop,
            trace: config.trace_penalties,
            record: RunRecord::new(id, seed),
            finished: None,
            start,
        })
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn engine(&self) -> &GlsEngine<'a> {
        &self.engine
    }

    pub fn state(&self) -> &EliteState {
        &self.state
    }

    pub fn record(&self) -> &RunRecord {
        &self.record
    }

    pub fn finished(&self) -> Option<StopReason> {
        self.finished
    }

    /// Runs one iteration: stop check, message exchange, strategy on the
    /// U-cycle, then one GLS iteration. Returns the stop reason once the
    /// worker has finished.
    pub fn step(&mut self) -> Option<StopReason> {
        if let Some(reason) = self.finished {
            return Some(reason);
        }
        let j = self.engine.iteration();
        let elapsed = self.start.elapsed();
        let now = elapsed.as_secs_f64();
        if let Some(reason) = self.stop.check(j, elapsed, self.engine.best_cost()) {
            if reason == StopReason::TargetReached {
                for to in (0..self.transport.workers()).filter(|&w| w != self.id) {
                    self.transport.send(to, Message::Stop { from: self.id });
                }
            }
            self.finish(reason, now);
            return Some(reason);
        }

        let u = self.engine.params().u;
        let before = self.engine.best_cost();
        let out = self.state.exchange_step(j, u, self.engine.best(), self.engine.instance(), &mut self.transport, now);
        for &(from, cost) in &out.received {
            self.record.receives += 1;
            self.record.push(now, j, EventKind::Receive { from, cost });
        }
        if let Some(cost) = out.sent {
            self.record.sends += 1;
            self.record.push(
                now,
                j,
                EventKind::Send {
                    cost,
                    to: self.state.neighbors().to_vec(),
                },
            );
        }
        if out.stop {
            self.finish(StopReason::StopReceived, now);
            return Some(StopReason::StopReceived);
        }
        if out.cycle {
            apply_strategy(self.strategy, &self.state, &mut self.engine);
        }

        let report = self.engine.iterate();
        let done = self.start.elapsed().as_secs_f64();
        self.record.penalizations += 1;
        if self.engine.best_cost() < before {
            self.state.mark_dirty();
            self.record.push(
                done,
                report.iteration,
                EventKind::Improvement { cost: report.best_cost },
            );
        }
        if self.trace {
            self.record.push(done, report.iteration, EventKind::Penalize { edges: report.penalized });
        }
        None
    }

    fn finish(&mut self, reason: StopReason, now: f64) {
        self.record.push(now, self.engine.iteration(), EventKind::Stop);
        self.record.stop_reason = reason;
        self.record.final_cost = self.engine.best_cost();
        self.record.wall_seconds = now;
        self.record.iterations = self.engine.iteration();
        self.record.lambda = self.engine.lambda().unwrap_or(0.0);
        self.record.first_local_optimum = self.engine.first_local_optimum();
        self.finished = Some(reason);
    }

    pub fn into_result(self) -> WorkerResult {
        WorkerResult {
            record: self.record,
            best: self.engine.best().clone(),
            penalties: self.engine.penalties().clone(),
        }
    }
}

/// Outcome of a cooperative run.
#[derive(Debug, Clone)]
pub struct ParallelRun {
    pub workers: Vec<WorkerResult>,
    /// Worker holding the overall best: lowest cost, then earliest time
    /// that cost was found, then lowest id.
    pub best_worker: usize,
    pub best_cost: Cost,
    /// Earliest time any worker reached the target cost.
    pub time_to_target: Option<f64>,
    pub wall_seconds: f64,
}

impl ParallelRun {
    pub fn best(&self) -> &Tour {
        &self.workers[self.best_worker].best
    }

    pub fn records(&self) -> Vec<RunRecord> {
        self.workers.iter().map(|w| w.record.clone()).collect()
    }

    fn assemble(workers: Vec<WorkerResult>, target: Option<Cost>, wall_seconds: f64) -> Self {
        let found_at = |w: &WorkerResult| {
            w.record
                .time_to_target(w.record.final_cost)
                .unwrap_or(f64::INFINITY)
        };
        let best_worker = (0..workers.len())
            .min_by(|&a, &b| {
                let (wa, wb) = (&workers[a], &workers[b]);
                wa.record
                    .final_cost
                    .cmp(&wb.record.final_cost)
                    .then(found_at(wa).total_cmp(&found_at(wb)))
                    .then(a.cmp(&b))
            })
            .unwrap_or(0);
        let best_cost = workers[best_worker].record.final_cost;
        let time_to_target = target.and_then(|t| {
            workers
                .iter()
                .filter_map(|w| w.record.time_to_target(t))
                .min_by(f64::total_cmp)
        });
        Self {
            workers,
            best_worker,
            best_cost,
            time_to_target,
            wall_seconds,
        }
    }
}

/// Runs every worker on its own thread with crossbeam mailboxes.
pub fn run_parallel(inst: &TspInstance, nl: &NeighborLists, config: &CoopConfig) -> Result<ParallelRun, GlsError> {
    config.validate()?;
    let k = config.workers();
    let start = Instant::now();
    let mut workers = Vec::with_capacity(k);
    for (id, transport) in ChannelTransport::network(k).into_iter().enumerate() {
        workers.push(Worker::new(id, inst, nl, config, transport, start)?);
    }
    let results: Vec<WorkerResult> = thread::scope(|s| {
        let handles: Vec<_> = workers
            .into_iter()
            .map(|mut w| {
                s.spawn(move || {
                    while w.step().is_none() {}
                    w.into_result()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker thread panicked"))
            .collect()
    });
    let wall = start.elapsed().as_secs_f64();
    Ok(ParallelRun::assemble(results, config.stop.target_cost, wall))
}

/// Runs all workers on the calling thread, stepping them round-robin in
/// id order. With an iteration budget the outcome is fully determined by
/// the configuration.
pub fn run_lockstep(inst: &TspInstance, nl: &NeighborLists, config: &CoopConfig) -> Result<ParallelRun, GlsError> {
    config.validate()?;
    let k = config.workers();
    let start = Instant::now();
    let mut workers = Vec::with_capacity(k);
    for (id, transport) in QueueTransport::network(k).into_iter().enumerate() {
        workers.push(Worker::new(id, inst, nl, config, transport, start)?);
    }
    while workers.iter().any(|w| w.finished().is_none()) {
        for w in workers.iter_mut() {
            w.step();
        }
    }
    let wall = start.elapsed().as_secs_f64();
    let results = workers.into_iter().map(Worker::into_result).collect();
    Ok(ParallelRun::assemble(results, config.stop.target_cost, wall))
}
