//! Guided Local Search for the symmetric TSP with cooperative parallel
//! variants.

pub mod coop;
pub mod gls;
pub mod instance;
pub mod metrics;
pub mod penalty;
pub mod record;
pub mod search;
pub mod stats;
pub mod tour;

pub use instance::{Cost, TspInstance};
pub use tour::{NeighborLists, Tour};
