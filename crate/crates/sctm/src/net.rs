//! Tiered supply chain network model, validation, and adoption dynamics.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ratio::{format_rational, parse_rational, RationalParseError};

/// Identifier of an original network node (a firm).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// One supply chain: a tier-1..tier-k node sequence with a product flow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub nodes: Vec<NodeId>,
    pub flow: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetNode {
    pub id: NodeId,
    pub tier: u32,
    pub cost: BigRational,
}

/// Threshold regime for the adoption dynamics.
///
/// In `Epsilon` mode every cost is a uniform epsilon no larger than any
/// positive flow, so a node adopts exactly when it is the last inactive node
/// on some positive-flow path. In `General` mode the comparison is
/// `b_i(S_t) >= c_i` with the stored costs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostMode {
    #[serde(alias = "eps")]
    Epsilon,
    General,
}

impl fmt::Display for CostMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostMode::Epsilon => write!(f, "eps"),
            CostMode::General => write!(f, "general"),
        }
    }
}

/// Active node set at a time step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdoptionState {
    pub active: BTreeSet<NodeId>,
    pub t: u32,
}

impl AdoptionState {
    pub fn new(active: BTreeSet<NodeId>) -> Self {
        AdoptionState { active, t: 0 }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetError {
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("node {0} is already active")]
    AlreadyActive(NodeId),
    #[error("cost/flow literal: {0}")]
    Rational(#[from] RationalParseError),
    #[error("bad network json: {0}")]
    Json(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warning,
    Error,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Issue {
    pub severity: Severity,
    pub message: String,
}

/// Outcome of `validate_network`: every violated invariant, plus the nodes
/// that can never adopt on their own and therefore must be seeded.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
    pub forced_seed: Vec<NodeId>,
}

impl ValidationReport {
    pub fn is_structurally_valid(&self) -> bool {
        self.issues.iter().all(|i| i.severity != Severity::Error)
    }
}

/// A tiered supply chain network: k tiers, nodes with adoption costs,
/// tier-adjacent directed edges, and flow-weighted paths.
#[derive(Debug, Clone)]
pub struct SupplyChainNetwork {
    pub k: u32,
    nodes: Vec<NetNode>,
    edges: BTreeSet<(NodeId, NodeId)>,
    paths: Vec<Path>,
    index: HashMap<NodeId, usize>,
    node_paths: Vec<Vec<usize>>,
}

impl SupplyChainNetwork {
    /// Build a network. Duplicate ids and dangling references are hard
    /// errors; structural problems (tier adjacency, path shape) are left to
    /// `validate_network` so they can be reported with context.
    pub fn new(
        k: u32,
        nodes: Vec<NetNode>,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
        paths: Vec<Path>,
    ) -> Result<Self, NetError> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            if index.insert(node.id, i).is_some() {
                return Err(NetError::DuplicateNode(node.id));
            }
        }
        let mut edge_set = BTreeSet::new();
        for (a, b) in edges {
            for id in [a, b] {
                if !index.contains_key(&id) {
                    return Err(NetError::UnknownNode(id));
                }
            }
            edge_set.insert((a, b));
        }
        let mut node_paths = vec![Vec::new(); nodes.len()];
        for (r, path) in paths.iter().enumerate() {
            for id in &path.nodes {
                let i = *index.get(id).ok_or(NetError::UnknownNode(*id))?;
                node_paths[i].push(r);
            }
        }
        Ok(SupplyChainNetwork { k, nodes, edges: edge_set, paths, index, node_paths })
    }

    pub fn nodes(&self) -> &[NetNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<(NodeId, NodeId)> {
        &self.edges
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn node(&self, id: NodeId) -> Option<&NetNode> {
        self.index.get(&id).map(|&i| &self.nodes[i])
    }

    pub fn node_ids(&self) -> BTreeSet<NodeId> {
        self.nodes.iter().map(|n| n.id).collect()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index.contains_key(&id)
    }

    /// Indices of the paths containing `id`.
    pub fn paths_of(&self, id: NodeId) -> &[usize] {
        match self.index.get(&id) {
            Some(&i) => &self.node_paths[i],
            None => &[],
        }
    }

    /// The canonical epsilon: the minimum positive path flow, if any.
    pub fn epsilon(&self) -> Option<BigRational> {
        self.paths
            .iter()
            .filter(|p| p.flow.is_positive())
            .map(|p| p.flow.clone())
            .min()
    }

    /// Whether `id` lies on at least one positive-flow path.
    pub fn on_positive_path(&self, id: NodeId) -> bool {
        self.paths_of(id).iter().any(|&r| self.paths[r].flow.is_positive())
    }

    /// Total flow incident to `id`, summed over all its paths.
    pub fn incident_flow(&self, id: NodeId) -> BigRational {
        self.paths_of(id)
            .iter()
            .map(|&r| self.paths[r].flow.clone())
            .fold(BigRational::zero(), |a, b| a + b)
    }

    /// Nodes that can never activate on their own under `mode` and so must
    /// be part of every fully activating seed set.
    ///
    /// Epsilon mode: nodes on no positive-flow path. General mode: nodes
    /// whose total incident flow falls short of their cost.
    pub fn forced_seed_nodes(&self, mode: CostMode) -> BTreeSet<NodeId> {
        self.nodes
            .iter()
            .filter(|n| match mode {
                CostMode::Epsilon => !self.on_positive_path(n.id),
                CostMode::General => self.incident_flow(n.id) < n.cost,
            })
            .map(|n| n.id)
            .collect()
    }

    /// Sum flows of paths with identical node tuples into a single path.
    pub fn merge_paths(&self) -> SupplyChainNetwork {
        let mut merged: BTreeMap<Vec<NodeId>, BigRational> = BTreeMap::new();
        let mut order: Vec<Vec<NodeId>> = Vec::new();
        for p in &self.paths {
            if !merged.contains_key(&p.nodes) {
                order.push(p.nodes.clone());
            }
            let slot = merged.entry(p.nodes.clone()).or_insert_with(BigRational::zero);
            *slot += p.flow.clone();
        }
        let paths = order
            .into_iter()
            .map(|nodes| {
                let flow = merged[&nodes].clone();
                Path { nodes, flow }
            })
            .collect();
        SupplyChainNetwork::new(self.k, self.nodes.clone(), self.edges.iter().copied(), paths)
            .expect("merging paths preserves node references")
    }
}

/// Check every structural invariant and flag the forced-seed nodes.
pub fn validate_network(net: &SupplyChainNetwork, mode: CostMode) -> ValidationReport {
    let mut issues = Vec::new();
    let err = |msg: String| Issue { severity: Severity::Error, message: msg };

    for node in net.nodes() {
        if node.tier < 1 || node.tier > net.k {
            issues.push(err(format!(
                "node {} has tier {} outside 1..={}",
                node.id, node.tier, net.k
            )));
        }
        if node.cost.is_negative() {
            issues.push(err(format!("node {} has negative cost", node.id)));
        }
    }

    for &(a, b) in net.edges() {
        let (ta, tb) = match (net.node(a), net.node(b)) {
            (Some(na), Some(nb)) => (na.tier, nb.tier),
            _ => continue,
        };
        if tb != ta + 1 {
            issues.push(err(format!(
                "edge ({a}, {b}) connects tier {ta} to tier {tb}, not adjacent tiers"
            )));
        }
    }

    for (r, path) in net.paths().iter().enumerate() {
        if path.nodes.len() != net.k as usize {
            issues.push(err(format!(
                "path {} visits {} nodes, expected {}",
                r,
                path.nodes.len(),
                net.k
            )));
            continue;
        }
        if path.flow.is_negative() {
            issues.push(err(format!("path {r} has negative flow")));
        }
        for (l, &id) in path.nodes.iter().enumerate() {
            let tier = net.node(id).map(|n| n.tier).unwrap_or(0);
            if tier != (l + 1) as u32 {
                issues.push(err(format!(
                    "path {} node {} sits at tier {}, expected tier {}",
                    r,
                    id,
                    tier,
                    l + 1
                )));
            }
        }
        for pair in path.nodes.windows(2) {
            if !net.edges().contains(&(pair[0], pair[1])) {
                issues.push(err(format!(
                    "path {} uses missing edge ({}, {})",
                    r, pair[0], pair[1]
                )));
            }
        }
    }

    let forced: Vec<NodeId> = net.forced_seed_nodes(mode).into_iter().collect();
    for id in &forced {
        let message = match mode {
            CostMode::Epsilon => format!("node {id} lies on no positive-flow path; forced seed"),
            CostMode::General => format!(
                "node {id} has incident flow below its cost; forced seed"
            ),
        };
        issues.push(Issue { severity: Severity::Warning, message });
    }

    ValidationReport { issues, forced_seed: forced }
}

/// Flows of the paths that would fully activate if `i` adopted now.
pub fn benefit(
    net: &SupplyChainNetwork,
    state: &AdoptionState,
    i: NodeId,
) -> Result<BigRational, NetError> {
    if !net.contains(i) {
        return Err(NetError::UnknownNode(i));
    }
    if state.active.contains(&i) {
        return Err(NetError::AlreadyActive(i));
    }
    let mut total = BigRational::zero();
    for &r in net.paths_of(i) {
        let path = &net.paths()[r];
        let active_others =
            path.nodes.iter().filter(|id| state.active.contains(id)).count();
        if active_others == net.k as usize - 1 {
            total += path.flow.clone();
        }
    }
    Ok(total)
}

/// One synchronous activation round.
pub fn step(net: &SupplyChainNetwork, state: &AdoptionState, mode: CostMode) -> AdoptionState {
    let mut complete_paths: HashSet<usize> = HashSet::new();
    for (r, path) in net.paths().iter().enumerate() {
        let active = path.nodes.iter().filter(|id| state.active.contains(id)).count();
        if active == net.k as usize - 1 {
            complete_paths.insert(r);
        }
    }
    let mut next = state.active.clone();
    for node in net.nodes() {
        if state.active.contains(&node.id) {
            continue;
        }
        let activates = match mode {
            CostMode::Epsilon => net.paths_of(node.id).iter().any(|r| {
                complete_paths.contains(r) && net.paths()[*r].flow.is_positive()
            }),
            CostMode::General => {
                let mut b = BigRational::zero();
                for &r in net.paths_of(node.id) {
                    if complete_paths.contains(&r) {
                        b += net.paths()[r].flow.clone();
                    }
                }
                b >= node.cost
            }
        };
        if activates {
            next.insert(node.id);
        }
    }
    AdoptionState { active: next, t: state.t + 1 }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationOutcome {
    pub final_active: BTreeSet<NodeId>,
    /// Active sets S_0, S_1, ... up to and including the fixed point.
    pub trajectory: Vec<BTreeSet<NodeId>>,
}

impl SimulationOutcome {
    pub fn fully_active(&self, net: &SupplyChainNetwork) -> bool {
        self.final_active.len() == net.nodes().len()
    }
}

/// Run the adoption process from `seed` to its fixed point.
pub fn simulate(
    net: &SupplyChainNetwork,
    seed: &BTreeSet<NodeId>,
    mode: CostMode,
) -> Result<SimulationOutcome, NetError> {
    for id in seed {
        if !net.contains(*id) {
            return Err(NetError::UnknownNode(*id));
        }
    }
    let mut state = AdoptionState::new(seed.clone());
    let mut trajectory = vec![state.active.clone()];
    // monotone, so a fixed point is reached within n rounds
    for _ in 0..net.nodes().len() {
        let next = step(net, &state, mode);
        if next.active == state.active {
            break;
        }
        trajectory.push(next.active.clone());
        state = next;
    }
    Ok(SimulationOutcome { final_active: state.active, trajectory })
}

/// Scale all costs and flows by the least common multiple of their
/// denominators. Activation trajectories are invariant under this scaling.
pub fn rescale_integral(net: &SupplyChainNetwork) -> (SupplyChainNetwork, BigInt) {
    let mut lcm = BigInt::one();
    for node in net.nodes() {
        lcm = lcm.lcm(node.cost.denom());
    }
    for path in net.paths() {
        lcm = lcm.lcm(path.flow.denom());
    }
    if lcm.is_one() {
        return (net.clone(), lcm);
    }
    let factor = BigRational::from_integer(lcm.clone());
    let nodes = net
        .nodes()
        .iter()
        .map(|n| NetNode { id: n.id, tier: n.tier, cost: &n.cost * &factor })
        .collect();
    let paths = net
        .paths()
        .iter()
        .map(|p| Path { nodes: p.nodes.clone(), flow: &p.flow * &factor })
        .collect();
    let scaled = SupplyChainNetwork::new(net.k, nodes, net.edges().iter().copied(), paths)
        .expect("rescaling preserves structure");
    (scaled, lcm)
}

// --- canonical JSON ---

#[derive(Serialize, Deserialize)]
struct NodeDto {
    id: u64,
    tier: u32,
    cost: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
struct PathDto {
    nodes: Vec<u64>,
    flow: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
struct NetworkDto {
    k: u32,
    nodes: Vec<NodeDto>,
    edges: Vec<(u64, u64)>,
    paths: Vec<PathDto>,
}

fn rational_from_value(v: &serde_json::Value) -> Result<BigRational, NetError> {
    match v {
        serde_json::Value::String(s) => Ok(parse_rational(s)?),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigRational::from_integer(i.into()))
            } else if let Some(u) = n.as_u64() {
                Ok(BigRational::from_integer(u.into()))
            } else {
                Err(NetError::Json(format!(
                    "non-integer number {n}; write fractional values as strings"
                )))
            }
        }
        other => Err(NetError::Json(format!("expected rational, got {other}"))),
    }
}

impl SupplyChainNetwork {
    pub fn to_json(&self) -> serde_json::Value {
        let dto = NetworkDto {
            k: self.k,
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeDto {
                    id: n.id.0,
                    tier: n.tier,
                    cost: serde_json::Value::String(format_rational(&n.cost)),
                })
                .collect(),
            edges: self.edges.iter().map(|&(a, b)| (a.0, b.0)).collect(),
            paths: self
                .paths
                .iter()
                .map(|p| PathDto {
                    nodes: p.nodes.iter().map(|id| id.0).collect(),
                    flow: serde_json::Value::String(format_rational(&p.flow)),
                })
                .collect(),
        };
        serde_json::to_value(dto).expect("network serializes")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("network serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self, NetError> {
        let dto: NetworkDto =
            serde_json::from_str(text).map_err(|e| NetError::Json(e.to_string()))?;
        let mut nodes = Vec::with_capacity(dto.nodes.len());
        for n in &dto.nodes {
            nodes.push(NetNode {
                id: NodeId(n.id),
                tier: n.tier,
                cost: rational_from_value(&n.cost)?,
            });
        }
        let edges = dto.edges.iter().map(|&(a, b)| (NodeId(a), NodeId(b)));
        let mut paths = Vec::with_capacity(dto.paths.len());
        for p in &dto.paths {
            paths.push(Path {
                nodes: p.nodes.iter().map(|&id| NodeId(id)).collect(),
                flow: rational_from_value(&p.flow)?,
            });
        }
        SupplyChainNetwork::new(dto.k, nodes, edges, paths)
    }
}
