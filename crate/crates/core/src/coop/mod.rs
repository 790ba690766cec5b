//! Cooperative parallel GLS: topologies, solution exchange and workers.

mod exchange;
mod runtime;
mod topology;

pub use exchange::{
    apply_strategy, ChannelTransport, CoopStrategy, EliteState, ExchangeOutcome, Message, QueueTransport,
    RankedSolution, SolutionMsg, Transport,
};
pub use runtime::{run_lockstep, run_parallel, CoopConfig, ParallelRun, Worker, WorkerResult};
pub use topology::{torus_shape, Topology, TopologyError, TopologyKind};
