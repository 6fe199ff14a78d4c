//! Evolutionary influence maximization on social graphs.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`], [`generators`], [`embedding`]: graph storage and inputs.
//! * [`centrality`], [`community`]: node scores feeding smart initialization.
//! * [`diffusion`]: spread evaluation (Monte Carlo, MC max-hop, two-hop, exact).
//! * [`bandit`]: sliding-window UCB1 over mutation operators.
//! * [`filter`]: search-space reduction before the evolutionary run.
//! * [`ea`]: the evolutionary optimizer itself.
//! * [`experiment`]: correlation studies, variant comparisons and reports.

pub mod bandit;
pub mod centrality;
pub mod community;
pub mod diffusion;
pub mod ea;
pub mod embedding;
pub mod error;
pub mod experiment;
pub mod filter;
pub mod generators;
pub mod graph;
pub mod stats;

pub use diffusion::{DiffusionModel, SpreadEstimate, SpreadMethod, StreamKey};
pub use error::{Error, Result};
pub use graph::{Graph, NodeId};
