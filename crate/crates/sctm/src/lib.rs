//! Exact solver toolkit for the minimum seed set problem on tiered supply
//! chain networks.
//!
//! A network is a layered DAG whose tier-1-to-tier-k paths ("supply chains")
//! carry product flows. A node adopts once the summed flows of the supply
//! chains it would complete meet its adoption cost. The toolkit simulates
//! these dynamics, rewrites the problem as a weighted threshold cascade on a
//! bipartite auxiliary graph, and solves for an exact minimum seed set with a
//! dynamic program over a nice tree decomposition. Random network generation,
//! realism statistics, brute-force oracles, and PACE-format interop round out
//! the pipeline.

pub mod auxgraph;
pub mod dp;
pub mod fixtures;
pub mod gen;
pub mod ingest;
pub mod net;
pub mod oracle;
pub mod ratio;
pub mod stats;
pub mod treedec;

pub use auxgraph::{AuxGraph, AuxKind, AuxNode, SeedClass};
pub use net::{AdoptionState, CostMode, NodeId, Path, SupplyChainNetwork, ValidationReport};
pub use treedec::{Heuristic, NiceTreeDecomposition, TreeDecomposition, UndirectedGraph};
