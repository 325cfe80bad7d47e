//! Bipartite auxiliary graph construction and its weighted threshold cascade.
//!
//! Each path becomes a path-node with threshold k-1; nodes sharing an
//! identical path set are pooled into blocks and emitted as one or two
//! node-nodes. Activating the auxiliary graph under a weighted threshold
//! rule mimics the adoption process of the original network, which is what
//! lets the tree decomposition dynamic program solve the seed set problem.

use std::collections::{BTreeMap, BTreeSet};

use num::Signed;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::net::{CostMode, NodeId, SupplyChainNetwork};
use crate::ratio::rational_to_u64;
use crate::treedec::UndirectedGraph;

/// Identifier of a node in the auxiliary graph.
pub type AuxId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedClass {
    /// Ordinary node-node; a candidate for the seed set.
    Normal,
    /// Can never activate on its own; added to every seed set outside the DP.
    Forced,
    /// Supplied as already active (e.g. ingestion dummies); free to the DP.
    Preseeded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuxKind {
    /// Mirrors original path `path`.
    PathNode { path: usize },
    NodeNode { class: SeedClass },
}

#[derive(Debug, Clone)]
pub struct AuxNode {
    pub kind: AuxKind,
    /// Original node ids this auxiliary node stands for.
    pub cont: Vec<NodeId>,
    pub threshold: u64,
}

impl AuxNode {
    pub fn is_path_node(&self) -> bool {
        matches!(self.kind, AuxKind::PathNode { .. })
    }

    pub fn is_node_node(&self) -> bool {
        matches!(self.kind, AuxKind::NodeNode { .. })
    }
}

/// A cell of the path-membership partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    /// Member node ids, ascending.
    pub nodes: Vec<NodeId>,
    /// Indices of the paths every member lies on, ascending.
    pub paths: Vec<usize>,
}

impl Block {
    pub fn is_pathless(&self) -> bool {
        self.paths.is_empty()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AuxError {
    #[error("general-mode auxiliary graph needs integer costs/flows; {0} is not a non-negative integer")]
    NonIntegral(String),
    #[error("auxiliary node {0} does not exist")]
    UnknownAuxNode(AuxId),
    #[error("auxiliary node {0} is a path-node and cannot be seeded")]
    SeededPathNode(AuxId),
    #[error("unknown preseeded node {0}")]
    UnknownPreseed(NodeId),
}

/// Weighted bipartite auxiliary graph.
///
/// Edges are stored directed. The epsilon construction is an undirected
/// graph, represented here by a symmetric pair per edge with equal weights.
#[derive(Debug, Clone)]
pub struct AuxGraph {
    pub mode: CostMode,
    pub k: u32,
    nodes: Vec<AuxNode>,
    in_edges: Vec<Vec<(AuxId, u64)>>,
    out_edges: Vec<Vec<(AuxId, u64)>>,
    /// Original ids that must join every seed set (one unit of size each).
    pub forced: Vec<NodeId>,
    /// Original ids treated as already active.
    pub preseeded: Vec<NodeId>,
}

impl AuxGraph {
    /// Assemble an auxiliary graph from explicit parts. `edges` are
    /// directed `(from, to, weight)`; epsilon-mode graphs must list both
    /// directions of every undirected edge.
    pub fn from_parts(
        mode: CostMode,
        k: u32,
        nodes: Vec<AuxNode>,
        edges: impl IntoIterator<Item = (AuxId, AuxId, u64)>,
        forced: Vec<NodeId>,
        preseeded: Vec<NodeId>,
    ) -> Self {
        let mut in_edges = vec![Vec::new(); nodes.len()];
        let mut out_edges = vec![Vec::new(); nodes.len()];
        for (from, to, w) in edges {
            out_edges[from as usize].push((to, w));
            in_edges[to as usize].push((from, w));
        }
        for list in in_edges.iter_mut().chain(out_edges.iter_mut()) {
            list.sort_unstable();
        }
        AuxGraph { mode, k, nodes, in_edges, out_edges, forced, preseeded }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: AuxId) -> &AuxNode {
        &self.nodes[id as usize]
    }

    pub fn nodes(&self) -> &[AuxNode] {
        &self.nodes
    }

    pub fn in_edges(&self, id: AuxId) -> &[(AuxId, u64)] {
        &self.in_edges[id as usize]
    }

    pub fn out_edges(&self, id: AuxId) -> &[(AuxId, u64)] {
        &self.out_edges[id as usize]
    }

    pub fn cont_size(&self, id: AuxId) -> u64 {
        self.nodes[id as usize].cont.len() as u64
    }

    pub fn path_node_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_path_node()).count()
    }

    pub fn node_node_ids(&self) -> Vec<AuxId> {
        (0..self.len() as AuxId).filter(|&i| self.node(i).is_node_node()).collect()
    }

    pub fn max_threshold(&self) -> u64 {
        self.nodes.iter().map(|n| n.threshold).max().unwrap_or(0)
    }

    /// Undirected skeleton (directed pairs collapse to one edge), as the
    /// decomposer sees it. Vertex i of the skeleton is auxiliary node i.
    pub fn skeleton(&self) -> UndirectedGraph {
        let mut g = UndirectedGraph::new(self.len());
        for (to, ins) in self.in_edges.iter().enumerate() {
            for &(from, _) in ins {
                g.add_edge(from as usize, to);
            }
        }
        g
    }

    /// Undirected weighted edge list `(a, b, w)` with `a < b`, epsilon mode only.
    pub fn undirected_edges(&self) -> Vec<(AuxId, AuxId, u64)> {
        let mut out = Vec::new();
        for (to, ins) in self.in_edges.iter().enumerate() {
            for &(from, w) in ins {
                if (from as usize) < to {
                    out.push((from, to as u32, w));
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let nodes: Vec<serde_json::Value> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let cont: Vec<u64> = n.cont.iter().map(|id| id.0).collect();
                match n.kind {
                    AuxKind::PathNode { path } => serde_json::json!({
                        "id": i, "kind": "path", "path": path,
                        "cont": cont, "threshold": n.threshold,
                    }),
                    AuxKind::NodeNode { class } => serde_json::json!({
                        "id": i, "kind": "node", "class": class,
                        "cont": cont, "threshold": n.threshold,
                    }),
                }
            })
            .collect();
        let edges: Vec<serde_json::Value> = match self.mode {
            CostMode::Epsilon => self
                .undirected_edges()
                .into_iter()
                .map(|(a, b, w)| serde_json::json!([a, b, w]))
                .collect(),
            CostMode::General => {
                let mut list = Vec::new();
                for (to, ins) in self.in_edges.iter().enumerate() {
                    for &(from, w) in ins {
                        list.push(serde_json::json!([from, to, w]));
                    }
                }
                list
            }
        };
        serde_json::json!({
            "mode": self.mode,
            "k": self.k,
            "nodes": nodes,
            "edges": edges,
            "forced": self.forced.iter().map(|id| id.0).collect::<Vec<_>>(),
            "preseeded": self.preseeded.iter().map(|id| id.0).collect::<Vec<_>>(),
        })
    }
}

/// Options for auxiliary graph construction.
#[derive(Debug, Clone, Default)]
pub struct AuxBuildOptions {
    /// Original nodes treated as already active (threshold forced to zero).
    pub preseed: BTreeSet<NodeId>,
    /// Skip the per-node gcd rescaling of Algorithm 3 (general mode only);
    /// used to test that rescaling does not change the cascade.
    pub skip_gcd_rescale: bool,
}

/// Partition the nodes of `net` by identical path membership.
///
/// Nodes on no path become their own singleton blocks (they can only join
/// the cascade by being seeded). Blocks are ordered by smallest member id;
/// members within a block sit at pairwise distinct tiers.
pub fn partition_nodes(net: &SupplyChainNetwork) -> Vec<Block> {
    let all: Vec<usize> = (0..net.paths().len()).collect();
    partition_filtered(net, &all, |_| 0)
}

/// Partition by membership among `path_ids` only, further split by `class_of`.
fn partition_filtered(
    net: &SupplyChainNetwork,
    path_ids: &[usize],
    class_of: impl Fn(NodeId) -> u8,
) -> Vec<Block> {
    let retained: BTreeSet<usize> = path_ids.iter().copied().collect();
    let mut by_key: BTreeMap<(Vec<usize>, u8), Vec<NodeId>> = BTreeMap::new();
    let mut order: Vec<(Vec<usize>, u8)> = Vec::new();
    let mut node_ids: Vec<NodeId> = net.nodes().iter().map(|n| n.id).collect();
    node_ids.sort();
    let mut pathless = Vec::new();
    for id in node_ids {
        let mut membership: Vec<usize> =
            net.paths_of(id).iter().copied().filter(|r| retained.contains(r)).collect();
        membership.sort_unstable();
        if membership.is_empty() {
            pathless.push(Block { nodes: vec![id], paths: vec![] });
            continue;
        }
        let key = (membership, class_of(id));
        if !by_key.contains_key(&key) {
            order.push(key.clone());
        }
        by_key.entry(key).or_default().push(id);
    }
    let mut blocks: Vec<Block> = order
        .into_iter()
        .map(|key| {
            let nodes = by_key.remove(&key).unwrap();
            Block { nodes, paths: key.0 }
        })
        .collect();
    blocks.extend(pathless);
    blocks.sort_by_key(|b| b.nodes[0]);
    blocks
}

/// Epsilon-case auxiliary graph: one path-node per positive-flow path
/// (threshold k-1), one or two node-nodes per block with threshold equal to
/// the represented node count, and edge weights equal to that threshold.
pub fn build_aux_epsilon(net: &SupplyChainNetwork) -> Result<AuxGraph, AuxError> {
    build_aux_epsilon_with(net, &AuxBuildOptions::default())
}

pub fn build_aux_epsilon_with(
    net: &SupplyChainNetwork,
    opts: &AuxBuildOptions,
) -> Result<AuxGraph, AuxError> {
    check_preseed(net, opts)?;
    let positive: Vec<usize> = (0..net.paths().len())
        .filter(|&r| net.paths()[r].flow.is_positive())
        .collect();
    let class_of = |id: NodeId| -> SeedClass {
        if opts.preseed.contains(&id) {
            SeedClass::Preseeded
        } else if !net.on_positive_path(id) {
            SeedClass::Forced
        } else {
            SeedClass::Normal
        }
    };
    let blocks = partition_filtered(net, &positive, |id| class_of(id) as u8);

    let mut builder = Builder::new(CostMode::Epsilon, net.k, &positive);
    for block in &blocks {
        let class = class_of(block.nodes[0]);
        // lowest-id member is split off as the singleton
        let splits = split_block(block, 0);
        for part in splits {
            let weight_to_path = part.len() as u64;
            let threshold = match class {
                SeedClass::Normal => weight_to_path,
                SeedClass::Forced | SeedClass::Preseeded => 0,
            };
            let nn = builder.push_node_node(part, threshold, class);
            for &r in &block.paths {
                builder.link(nn, r, weight_to_path, weight_to_path);
            }
        }
    }
    Ok(builder.finish(net, opts))
}

/// General-case auxiliary graph (integer costs and flows required): directed
/// edges, node-node thresholds taken from costs and rescaled by the gcd of
/// the threshold with all incident path flows.
pub fn build_aux_general(net: &SupplyChainNetwork) -> Result<AuxGraph, AuxError> {
    build_aux_general_with(net, &AuxBuildOptions::default())
}

pub fn build_aux_general_with(
    net: &SupplyChainNetwork,
    opts: &AuxBuildOptions,
) -> Result<AuxGraph, AuxError> {
    check_preseed(net, opts)?;
    let cost_of = |id: NodeId| -> Result<u64, AuxError> {
        let c = &net.node(id).expect("partition yields known ids").cost;
        rational_to_u64(c).ok_or_else(|| AuxError::NonIntegral(format!("cost of node {id}")))
    };
    let mut flows = Vec::with_capacity(net.paths().len());
    for (r, p) in net.paths().iter().enumerate() {
        flows.push(
            rational_to_u64(&p.flow)
                .ok_or_else(|| AuxError::NonIntegral(format!("flow of path {r}")))?,
        );
    }
    let forced = net.forced_seed_nodes(CostMode::General);
    let class_of = |id: NodeId| -> SeedClass {
        if opts.preseed.contains(&id) {
            SeedClass::Preseeded
        } else if forced.contains(&id) {
            SeedClass::Forced
        } else {
            SeedClass::Normal
        }
    };
    let all: Vec<usize> = (0..net.paths().len()).collect();
    let blocks = partition_filtered(net, &all, |id| class_of(id) as u8);

    let mut builder = Builder::new(CostMode::General, net.k, &all);
    for block in &blocks {
        let class = class_of(block.nodes[0]);
        // the minimum-cost member is split off, lowest id among ties
        let mut costs = Vec::with_capacity(block.nodes.len());
        for &id in &block.nodes {
            costs.push(cost_of(id)?);
        }
        let min_pos = costs
            .iter()
            .enumerate()
            .min_by_key(|&(i, c)| (*c, block.nodes[i]))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let splits = split_block(block, min_pos);
        for part in splits {
            let raw = match class {
                SeedClass::Normal => {
                    if part.len() == 1 {
                        costs[block.nodes.iter().position(|&n| n == part[0]).unwrap()]
                    } else {
                        part.iter()
                            .map(|id| costs[block.nodes.iter().position(|n| n == id).unwrap()])
                            .max()
                            .unwrap()
                    }
                }
                SeedClass::Forced | SeedClass::Preseeded => 0,
            };
            let g = if opts.skip_gcd_rescale {
                1
            } else {
                let mut g = raw;
                for &r in &block.paths {
                    g = num::integer::gcd(g, flows[r]);
                }
                if g == 0 {
                    1
                } else {
                    g
                }
            };
            let weight_to_path = part.len() as u64;
            let nn = builder.push_node_node(part, raw / g, class);
            for &r in &block.paths {
                builder.link(nn, r, weight_to_path, flows[r] / g);
            }
        }
    }
    Ok(builder.finish(net, opts))
}

fn check_preseed(net: &SupplyChainNetwork, opts: &AuxBuildOptions) -> Result<(), AuxError> {
    for id in &opts.preseed {
        if !net.contains(*id) {
            return Err(AuxError::UnknownPreseed(*id));
        }
    }
    Ok(())
}

/// Split a block into its singleton member (position `single`) and the rest.
fn split_block(block: &Block, single: usize) -> Vec<Vec<NodeId>> {
    if block.nodes.len() == 1 {
        return vec![block.nodes.clone()];
    }
    let mut rest = block.nodes.clone();
    let s = rest.remove(single);
    vec![vec![s], rest]
}

struct Builder {
    mode: CostMode,
    k: u32,
    nodes: Vec<AuxNode>,
    in_edges: Vec<Vec<(AuxId, u64)>>,
    out_edges: Vec<Vec<(AuxId, u64)>>,
    path_aux: BTreeMap<usize, AuxId>,
}

impl Builder {
    fn new(mode: CostMode, k: u32, path_ids: &[usize]) -> Self {
        let mut b = Builder {
            mode,
            k,
            nodes: Vec::new(),
            in_edges: Vec::new(),
            out_edges: Vec::new(),
            path_aux: BTreeMap::new(),
        };
        for &r in path_ids {
            let id = b.nodes.len() as AuxId;
            b.nodes.push(AuxNode {
                kind: AuxKind::PathNode { path: r },
                cont: Vec::new(),
                threshold: (k - 1) as u64,
            });
            b.in_edges.push(Vec::new());
            b.out_edges.push(Vec::new());
            b.path_aux.insert(r, id);
        }
        b
    }

    fn push_node_node(&mut self, cont: Vec<NodeId>, threshold: u64, class: SeedClass) -> AuxId {
        let id = self.nodes.len() as AuxId;
        self.nodes.push(AuxNode { kind: AuxKind::NodeNode { class }, cont, threshold });
        self.in_edges.push(Vec::new());
        self.out_edges.push(Vec::new());
        id
    }

    /// Connect node-node `nn` with the path-node of path `r`:
    /// `nn -> path` carries `to_path`, `path -> nn` carries `to_node`.
    fn link(&mut self, nn: AuxId, r: usize, to_path: u64, to_node: u64) {
        let pn = self.path_aux[&r];
        self.out_edges[nn as usize].push((pn, to_path));
        self.in_edges[pn as usize].push((nn, to_path));
        self.out_edges[pn as usize].push((nn, to_node));
        self.in_edges[nn as usize].push((pn, to_node));
    }

    fn finish(mut self, net: &SupplyChainNetwork, opts: &AuxBuildOptions) -> AuxGraph {
        for list in self.in_edges.iter_mut().chain(self.out_edges.iter_mut()) {
            list.sort_unstable();
        }
        let forced_set = net.forced_seed_nodes(match self.mode {
            CostMode::Epsilon => CostMode::Epsilon,
            CostMode::General => CostMode::General,
        });
        let forced: Vec<NodeId> =
            forced_set.into_iter().filter(|id| !opts.preseed.contains(id)).collect();
        AuxGraph {
            mode: self.mode,
            k: self.k,
            nodes: self.nodes,
            in_edges: self.in_edges,
            out_edges: self.out_edges,
            forced,
            preseeded: opts.preseed.iter().copied().collect(),
        }
    }
}

/// Weighted threshold cascade on the auxiliary graph from a node-node seed
/// set, to its fixed point. A node activates once the weights on edges from
/// active in-neighbors reach its threshold.
pub fn aux_simulate(aux: &AuxGraph, seed: &BTreeSet<AuxId>) -> Result<BTreeSet<AuxId>, AuxError> {
    for &id in seed {
        if id as usize >= aux.len() {
            return Err(AuxError::UnknownAuxNode(id));
        }
        if aux.node(id).is_path_node() {
            return Err(AuxError::SeededPathNode(id));
        }
    }
    let mut active: Vec<bool> = vec![false; aux.len()];
    for &id in seed {
        active[id as usize] = true;
    }
    loop {
        let mut fresh = Vec::new();
        for id in 0..aux.len() {
            if active[id] {
                continue;
            }
            let gain: u64 = aux
                .in_edges(id as AuxId)
                .iter()
                .filter(|(from, _)| active[*from as usize])
                .map(|&(_, w)| w)
                .sum();
            if gain >= aux.node(id as AuxId).threshold {
                fresh.push(id);
            }
        }
        if fresh.is_empty() {
            break;
        }
        for id in fresh {
            active[id] = true;
        }
    }
    Ok((0..aux.len() as AuxId).filter(|&i| active[i as usize]).collect())
}
