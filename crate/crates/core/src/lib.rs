//! Chain recurrence, terminal chain components and their basins, computed
//! on dyadic box grids.
//!
//! The pipeline runs grid → δ-chain graph → strongly connected components
//! → condensation, and the downstream analyses all read that
//! decomposition. [`finite_oracle`] checks the same structures by brute
//! force on small finite systems.

pub mod chain_graph;
pub mod components;
pub mod error;
pub mod finite_oracle;
pub mod limits_basins;
pub mod phase_space;
pub mod report;
pub mod shadowing_lab;
pub mod systems;

pub use chain_graph::{
    build_chain_graph, decompose, reachable_set, scc_decompose, ChainDecomposition, ChainGraph,
    ChainGraphParams, ComponentId, Digraph, Direction,
};
pub use error::{ConfigError, Error, Result};
pub use phase_space::{
    neighborhood_boxes, subdivide, BoxId, BoxSet, Domain, DomainKind, Grid, Point,
};
pub use systems::{builtin, builtin_with, parse_system, SystemConfig, SystemDef};
