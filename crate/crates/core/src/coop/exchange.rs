//! Solution messages, mailboxes, the elite state and the cooperation
//! strategies applied on each U-cycle.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use crossbeam_channel::{Receiver, Sender, TryRecvError};

use crate::gls::GlsEngine;
use crate::instance::{Cost, TspInstance};
use crate::tour::Tour;

/// A historical best tour sent to a neighbor.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionMsg {
    pub sender: usize,
    pub tour: Arc<[u32]>,
    pub cost: Cost,
    pub send_iteration: u64,
    pub send_time: f64,
}

impl SolutionMsg {
    /// Checks that the tour is a permutation whose cost matches the
    /// declared one, and returns it as a [`Tour`].
    pub fn verify(&self, inst: &TspInstance) -> Option<Tour> {
        let tour = Tour::from_order(self.tour.to_vec(), inst).ok()?;
        (tour.cost() == self.cost).then_some(tour)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Solution(SolutionMsg),
    Stop { from: usize },
}

/// Non-blocking mailbox endpoint of one worker.
pub trait Transport {
    /// Next pending message, `Ok(None)` when the mailbox is empty and
    /// `Err(())` once it can never deliver again.
    #[allow(clippy::result_unit_err)]
    fn try_recv(&mut self) -> Result<Option<Message>, ()>;

    /// Queues a message for `to`. Messages to departed peers are dropped.
    fn send(&mut self, to: usize, msg: Message);

    /// Total number of workers reachable through this transport.
    fn workers(&self) -> usize;
}

/// Unbounded crossbeam channels, one inbox per worker.
#[derive(Debug)]
pub struct ChannelTransport {
    inbox: Receiver<Message>,
    outboxes: Vec<Sender<Message>>,
}

impl ChannelTransport {
    /// Builds one fully connected endpoint per worker.
    pub fn network(k: usize) -> Vec<ChannelTransport> {
        let (senders, receivers): (Vec<_>, Vec<_>) =
            (0..k).map(|_| crossbeam_channel::unbounded()).unzip();
        receivers
            .into_iter()
            .map(|inbox| ChannelTransport {
                inbox,
                outboxes: senders.clone(),
            })
            .collect()
    }
}

impl Transport for ChannelTransport {
    fn try_recv(&mut self) -> Result<Option<Message>, ()> {
        match self.inbox.try_recv() {
            Ok(m) => Ok(Some(m)),
            Err(TryRecvError::Empty) => Ok(None),
            Err(TryRecvError::Disconnected) => Err(()),
        }
    }

    fn send(&mut self, to: usize, msg: Message) {
        let _ = self.outboxes[to].send(msg);
    }

    fn workers(&self) -> usize {
        self.outboxes.len()
    }
}

/// In-memory queues shared by all workers of a single-threaded,
/// deterministically scheduled network.
#[derive(Debug, Clone)]
pub struct QueueTransport {
    id: usize,
    queues: Arc<Mutex<Vec<VecDeque<Message>>>>,
    closed: Arc<Mutex<Vec<bool>>>,
}

impl QueueTransport {
    pub fn network(k: usize) -> Vec<QueueTransport> {
        let queues = Arc::new(Mutex::new(vec![VecDeque::new(); k]));
        let closed = Arc::new(Mutex::new(vec![false; k]));
        (0..k)
            .map(|id| QueueTransport {
                id,
                queues: Arc::clone(&queues),
                closed: Arc::clone(&closed),
            })
            .collect()
    }

    /// Messages waiting in `worker`'s inbox.
    pub fn pending(&self, worker: usize) -> usize {
        self.queues.lock().unwrap()[worker].len()
    }

    /// Marks this worker's inbox as closed once drained.
    pub fn close(&self) {
        self.closed.lock().unwrap()[self.id] = true;
    }
}

impl Transport for QueueTransport {
    fn try_recv(&mut self) -> Result<Option<Message>, ()> {
        let msg = self.queues.lock().unwrap()[self.id].pop_front();
        match msg {
            Some(m) => Ok(Some(m)),
            None if self.closed.lock().unwrap()[self.id] => Err(()),
            None => Ok(None),
        }
    }

    fn send(&mut self, to: usize, msg: Message) {
        self.queues.lock().unwrap()[to].push_back(msg);
    }

    fn workers(&self) -> usize {
        self.queues.lock().unwrap().len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoopStrategy {
    /// No communication; s_e ← s_hb every U iterations.
    Independent,
    /// s_e ← best of S_r ∪ {s_hb}; the current tour is kept.
    EliteBiased,
    /// Current tour ← best of S_r ∪ {s_hb}; plain GLS utility.
    Restart,
    /// Current tour ← best, s_e ← second best of S_r ∪ {s_hb}.
    RestartEliteBiased,
}

impl CoopStrategy {
    pub fn communicates(self) -> bool {
        self != CoopStrategy::Independent
    }
}

impl fmt::Display for CoopStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoopStrategy::Independent => "independent",
            CoopStrategy::EliteBiased => "elite-biased",
            CoopStrategy::Restart => "restart",
            CoopStrategy::RestartEliteBiased => "restart-elite-biased",
        })
    }
}

impl FromStr for CoopStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('_', "-").as_str() {
            "independent" => Ok(CoopStrategy::Independent),
            "elite-biased" => Ok(CoopStrategy::EliteBiased),
            "restart" => Ok(CoopStrategy::Restart),
            "restart-elite-biased" => Ok(CoopStrategy::RestartEliteBiased),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

/// A member of S_r ∪ {s_hb} ranked for selection.
#[derive(Debug, Clone)]
pub struct RankedSolution {
    pub cost: Cost,
    /// Worker that found it; the worker's own id for s_hb.
    pub source: usize,
    pub tour: Tour,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExchangeOutcome {
    /// `(sender, cost)` of each accepted message, in arrival order.
    pub received: Vec<(usize, Cost)>,
    /// Messages dropped because they failed verification or came from a
    /// non-neighbor.
    pub rejected: usize,
    /// Whether this call fell on a U-cycle.
    pub cycle: bool,
    /// Cost of s_hb if it was sent.
    pub sent: Option<Cost>,
    /// Whether a stop was received or the mailbox closed.
    pub stop: bool,
}

/// Received solutions and the elite of one worker.
#[derive(Debug, Clone)]
pub struct EliteState {
    id: usize,
    neighbors: Vec<usize>,
    /// Newest message per neighbor slot.
    received: Vec<Option<SolutionMsg>>,
    /// S_r ∪ {s_hb} ranked by (cost, source) at the last U-cycle.
    ranked: Vec<RankedSolution>,
    dirty: bool,
}

impl EliteState {
    pub fn new(id: usize, neighbors: &[usize]) -> Self {
        Self {
            id,
            neighbors: neighbors.to_vec(),
            received: vec![None; neighbors.len()],
            ranked: Vec::new(),
            dirty: false,
        }
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn neighbors(&self) -> &[usize] {
        &self.neighbors
    }

    /// Newest message from each neighbor, in neighbor order.
    pub fn received(&self) -> &[Option<SolutionMsg>] {
        &self.received
    }

    /// Marks s_hb as improved since the last send.
    pub fn mark_dirty(&mut self) {
        self.dirty = true;
    }

    pub fn is_dirty(&self) -> bool {
        self.dirty
    }

    /// The elite s_e chosen at the last U-cycle.
    pub fn elite(&self) -> Option<&RankedSolution> {
        self.ranked.first()
    }

    /// S_r ∪ {s_hb} as ranked at the last U-cycle.
    pub fn ranked(&self) -> &[RankedSolution] {
        &self.ranked
    }

    /// Drains every pending message into the neighbor slots; a newer
    /// message from the same neighbor replaces the older one.
    pub fn drain<T: Transport>(&mut self, transport: &mut T, inst: &TspInstance) -> ExchangeOutcome {
        let mut out = ExchangeOutcome::default();
        loop {
            match transport.try_recv() {
                Ok(Some(Message::Solution(msg))) => {
                    let slot = self.neighbors.iter().position(|&n| n == msg.sender);
                    match slot {
                        Some(slot) if msg.verify(inst).is_some() => {
                            out.received.push((msg.sender, msg.cost));
                            self.received[slot] = Some(msg);
                        }
                        _ => out.rejected += 1,
                    }
                }
                Ok(Some(Message::Stop { .. })) => out.stop = true,
                Ok(None) => break,
                Err(()) => {
                    out.stop = true;
                    break;
                }
            }
        }
        out
    }

    /// One call per iteration: drain the mailbox, and on the U-cycle rank
    /// S_r ∪ {s_hb} (s_e is the first entry) and send s_hb to every
    /// neighbor if it improved since the previous send.
    #[allow(clippy::too_many_arguments)]
    pub fn exchange_step<T: Transport>(
        &mut self,
        iteration: u64,
        u: u64,
        own_best: &Tour,
        inst: &TspInstance,
        transport: &mut T,
        now: f64,
    ) -> ExchangeOutcome {
        let mut out = self.drain(transport, inst);
        if !iteration.is_multiple_of(u) {
            return out;
        }
        out.cycle = true;
        self.rank(own_best, inst);
        if self.dirty {
            if !self.neighbors.is_empty() {
                let order: Arc<[u32]> = own_best.order().into();
                for &to in &self.neighbors {
                    transport.send(
                        to,
                        Message::Solution(SolutionMsg {
                            sender: self.id,
                            tour: Arc::clone(&order),
                            cost: own_best.cost(),
                            send_iteration: iteration,
                            send_time: now,
                        }),
                    );
                }
                out.sent = Some(own_best.cost());
            }
            self.dirty = false;
        }
        out
    }

    fn rank(&mut self, own_best: &Tour, inst: &TspInstance) {
        self.ranked.clear();
        self.ranked.push(RankedSolution {
            cost: own_best.cost(),
            source: self.id,
            tour: own_best.clone(),
        });
        for msg in self.received.iter().flatten() {
            if let Some(tour) = msg.verify(inst) {
                self.ranked.push(RankedSolution {
                    cost: msg.cost,
                    source: msg.sender,
                    tour,
                });
            }
        }
        self.ranked
            .sort_by(|a, b| a.cost.cmp(&b.cost).then(a.source.cmp(&b.source)));
    }
}

/// Applies the strategy's use of the ranked set to the engine. Must be
/// called on the U-cycle, after [`EliteState::exchange_step`].
pub fn apply_strategy(strategy: CoopStrategy, state: &EliteState, engine: &mut GlsEngine<'_>) {
    match strategy {
        CoopStrategy::Independent => engine.elite_from_best(),
        CoopStrategy::EliteBiased => match state.ranked().first() {
            Some(best) => engine.set_elite(Some(best.tour.clone())),
            None => engine.elite_from_best(),
        },
        CoopStrategy::Restart => {
            if let Some(best) = state.ranked().first() {
                engine.restart_from(&best.tour);
            }
            engine.set_elite(None);
        }
        CoopStrategy::RestartEliteBiased => {
            let ranked = state.ranked();
            if let Some(best) = ranked.first() {
                engine.restart_from(&best.tour);
            }
            match ranked.get(1) {
                Some(second) => engine.set_elite(Some(second.tour.clone())),
                None => engine.elite_from_best(),
            }
        }
    }
}
