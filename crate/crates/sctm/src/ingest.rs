//! Raw DAG ingestion: tier placement, dummy-node insertion so every edge
//! spans exactly one tier and every chain runs tier 1 to tier k, and path
//! enumeration with a truncation cap.

use std::collections::{BTreeMap, BTreeSet};

use num::rational::BigRational;
use num::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::net::{NetNode, NodeId, Path, SupplyChainNetwork};
use crate::ratio::{parse_rational, RationalParseError};

/// An arbitrary acyclic supplier graph before tiering.
#[derive(Debug, Clone, Default)]
pub struct RawDag {
    pub nodes: Vec<(u64, Option<BigRational>)>,
    pub edges: Vec<(u64, u64)>,
    /// Explicit supply chains; when present, enumeration is skipped.
    pub paths: Option<Vec<(Vec<u64>, BigRational)>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IngestError {
    #[error("cycle detected through node {0}")]
    Cycle(u64),
    #[error("duplicate node id {0}")]
    DuplicateNode(u64),
    #[error("edge references unknown node {0}")]
    UnknownNode(u64),
    #[error("csv problem: {0}")]
    Csv(String),
    #[error("explicit path {0:?} cannot be embedded: {1}")]
    BadExplicitPath(Vec<u64>, String),
    #[error("rational literal: {0}")]
    Rational(#[from] RationalParseError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TierAssignment {
    pub k: u32,
    pub tiers: BTreeMap<u64, u32>,
}

/// Place every node in its latest feasible tier: k is the longest chain
/// length, sinks land in tier k, and a node goes to tier l-1 once all of
/// its successors sit in tiers >= l.
pub fn place_tiers(dag: &RawDag) -> Result<TierAssignment, IngestError> {
    let mut ids = BTreeSet::new();
    for (id, _) in &dag.nodes {
        if !ids.insert(*id) {
            return Err(IngestError::DuplicateNode(*id));
        }
    }
    let mut succ: BTreeMap<u64, Vec<u64>> = ids.iter().map(|&id| (id, Vec::new())).collect();
    let mut indeg: BTreeMap<u64, usize> = ids.iter().map(|&id| (id, 0)).collect();
    for &(a, b) in &dag.edges {
        if !ids.contains(&a) {
            return Err(IngestError::UnknownNode(a));
        }
        if !ids.contains(&b) {
            return Err(IngestError::UnknownNode(b));
        }
        succ.get_mut(&a).unwrap().push(b);
        *indeg.get_mut(&b).unwrap() += 1;
    }

    // Kahn's algorithm doubles as the cycle check; process in reverse
    // topological order to get the longest distance to a sink.
    let mut queue: Vec<u64> = ids.iter().copied().filter(|id| indeg[id] == 0).collect();
    let mut topo = Vec::with_capacity(ids.len());
    let mut remaining = indeg.clone();
    while let Some(id) = queue.pop() {
        topo.push(id);
        for &next in &succ[&id] {
            let slot = remaining.get_mut(&next).unwrap();
            *slot -= 1;
            if *slot == 0 {
                queue.push(next);
            }
        }
    }
    if topo.len() != ids.len() {
        let stuck = ids.iter().find(|id| remaining[id] > 0).copied().unwrap();
        return Err(IngestError::Cycle(stuck));
    }

    let mut dist: BTreeMap<u64, u32> = ids.iter().map(|&id| (id, 0)).collect();
    for &id in topo.iter().rev() {
        let d = succ[&id].iter().map(|s| dist[s] + 1).max().unwrap_or(0);
        dist.insert(id, d);
    }
    let k = ids.iter().map(|id| dist[id]).max().unwrap_or(0) + 1;
    let tiers = ids.iter().map(|&id| (id, k - dist[&id])).collect();
    Ok(TierAssignment { k, tiers })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum DummyReason {
    /// Splits an edge that spanned more than one tier.
    EdgeSplit { from: u64, to: u64 },
    /// Feeds a source node that sits above tier 1.
    SourceLift { target: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DummyInfo {
    pub id: u64,
    pub tier: u32,
    pub reason: DummyReason,
}

/// Tiered node/edge skeleton with all dummies inserted; paths still absent.
#[derive(Debug, Clone)]
pub struct Skeleton {
    pub k: u32,
    /// (id, tier); originals first, then dummies.
    pub nodes: Vec<(u64, u32)>,
    pub edges: BTreeSet<(u64, u64)>,
    pub dummies: Vec<DummyInfo>,
    /// For every original edge, the chain of nodes now realizing it.
    pub edge_chains: BTreeMap<(u64, u64), Vec<u64>>,
    /// For every original source above tier 1, the dummy chain feeding it.
    pub source_chains: BTreeMap<u64, Vec<u64>>,
}

/// Split multi-tier edges with dummy nodes and prepend dummy chains to
/// sources above tier 1, so every maximal chain runs tier 1 to tier k.
pub fn insert_dummies(dag: &RawDag, assignment: &TierAssignment) -> Skeleton {
    let mut next_id = dag.nodes.iter().map(|&(id, _)| id).max().unwrap_or(0) + 1;
    let mut nodes: Vec<(u64, u32)> =
        dag.nodes.iter().map(|&(id, _)| (id, assignment.tiers[&id])).collect();
    let mut edges = BTreeSet::new();
    let mut dummies = Vec::new();
    let mut edge_chains = BTreeMap::new();
    let mut source_chains = BTreeMap::new();

    let mut sorted_edges: Vec<(u64, u64)> = dag.edges.clone();
    sorted_edges.sort_unstable();
    sorted_edges.dedup();
    let mut has_pred: BTreeSet<u64> = BTreeSet::new();
    for &(_, b) in &sorted_edges {
        has_pred.insert(b);
    }

    for &(a, b) in &sorted_edges {
        let (ta, tb) = (assignment.tiers[&a], assignment.tiers[&b]);
        let mut chain = vec![a];
        for tier in ta + 1..tb {
            let id = next_id;
            next_id += 1;
            nodes.push((id, tier));
            dummies.push(DummyInfo { id, tier, reason: DummyReason::EdgeSplit { from: a, to: b } });
            chain.push(id);
        }
        chain.push(b);
        for pair in chain.windows(2) {
            edges.insert((pair[0], pair[1]));
        }
        edge_chains.insert((a, b), chain);
    }

    let mut originals: Vec<u64> = dag.nodes.iter().map(|&(id, _)| id).collect();
    originals.sort_unstable();
    for id in originals {
        let tier = assignment.tiers[&id];
        if tier > 1 && !has_pred.contains(&id) {
            let mut chain = Vec::new();
            for t in 1..tier {
                let d = next_id;
                next_id += 1;
                nodes.push((d, t));
                dummies.push(DummyInfo { id: d, tier: t, reason: DummyReason::SourceLift { target: id } });
                chain.push(d);
            }
            chain.push(id);
            for pair in chain.windows(2) {
                edges.insert((pair[0], pair[1]));
            }
            source_chains.insert(id, chain);
        }
    }

    Skeleton { k: assignment.k, nodes, edges, dummies, edge_chains, source_chains }
}

/// All tier-1-to-tier-k chains of the skeleton, depth first in ascending id
/// order, stopping once `cap` paths have been collected.
pub fn enumerate_paths(skeleton: &Skeleton, cap: usize) -> (Vec<Vec<u64>>, bool) {
    let mut succ: BTreeMap<u64, Vec<u64>> =
        skeleton.nodes.iter().map(|&(id, _)| (id, Vec::new())).collect();
    for &(a, b) in &skeleton.edges {
        succ.get_mut(&a).unwrap().push(b);
    }
    let mut sources: Vec<u64> = skeleton
        .nodes
        .iter()
        .filter(|&&(_, tier)| tier == 1)
        .map(|&(id, _)| id)
        .collect();
    sources.sort_unstable();

    let mut paths = Vec::new();
    let mut truncated = false;
    let mut stack: Vec<u64> = Vec::new();
    fn dfs(
        id: u64,
        k: usize,
        succ: &BTreeMap<u64, Vec<u64>>,
        stack: &mut Vec<u64>,
        paths: &mut Vec<Vec<u64>>,
        cap: usize,
        truncated: &mut bool,
    ) {
        if *truncated {
            return;
        }
        stack.push(id);
        if stack.len() == k {
            if paths.len() == cap {
                *truncated = true;
            } else {
                paths.push(stack.clone());
            }
        } else {
            for &next in &succ[&id] {
                dfs(next, k, succ, stack, paths, cap, truncated);
            }
        }
        stack.pop();
    }
    for source in sources {
        dfs(source, skeleton.k as usize, &succ, &mut stack, &mut paths, cap, &mut truncated);
    }
    (paths, truncated)
}

#[derive(Debug, Clone, Serialize)]
pub struct IngestReport {
    pub k: u32,
    pub tiers: BTreeMap<u64, u32>,
    pub dummies: Vec<DummyInfo>,
    pub path_count: usize,
    pub truncated: bool,
    pub explicit_paths: bool,
}

impl IngestReport {
    pub fn dummy_ids(&self) -> BTreeSet<NodeId> {
        self.dummies.iter().map(|d| NodeId(d.id)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    /// Path enumeration cap; truncation is reported, never silent.
    pub cap: usize,
    /// Cost for original nodes that do not carry one. Dummies cost zero.
    pub default_cost: BigRational,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions { cap: 1_000_000, default_cost: BigRational::one() }
    }
}

/// Full ingestion: tiering, dummies, and paths (enumerated with unit flows,
/// or the explicit ones rewritten through the dummy chains).
pub fn ingest(
    dag: &RawDag,
    opts: &IngestOptions,
) -> Result<(SupplyChainNetwork, IngestReport), IngestError> {
    let assignment = place_tiers(dag)?;
    let skeleton = insert_dummies(dag, &assignment);

    let (tuples, flows, truncated, explicit) = match &dag.paths {
        None => {
            let (tuples, truncated) = enumerate_paths(&skeleton, opts.cap);
            let flows = vec![BigRational::one(); tuples.len()];
            (tuples, flows, truncated, false)
        }
        Some(declared) => {
            let mut tuples = Vec::with_capacity(declared.len());
            let mut flows = Vec::with_capacity(declared.len());
            for (raw_path, flow) in declared {
                tuples.push(embed_path(raw_path, &skeleton)?);
                flows.push(flow.clone());
            }
            (tuples, flows, false, true)
        }
    };

    let costs: BTreeMap<u64, BigRational> = dag
        .nodes
        .iter()
        .map(|(id, c)| (*id, c.clone().unwrap_or_else(|| opts.default_cost.clone())))
        .collect();
    let dummy_ids: BTreeSet<u64> = skeleton.dummies.iter().map(|d| d.id).collect();
    let nodes: Vec<NetNode> = skeleton
        .nodes
        .iter()
        .map(|&(id, tier)| NetNode {
            id: NodeId(id),
            tier,
            cost: if dummy_ids.contains(&id) {
                BigRational::zero()
            } else {
                costs[&id].clone()
            },
        })
        .collect();
    let edges = skeleton.edges.iter().map(|&(a, b)| (NodeId(a), NodeId(b)));
    let paths: Vec<Path> = tuples
        .iter()
        .zip(flows)
        .map(|(tuple, flow)| Path { nodes: tuple.iter().map(|&v| NodeId(v)).collect(), flow })
        .collect();
    let net = SupplyChainNetwork::new(skeleton.k, nodes, edges, paths)
        .map_err(|e| IngestError::Csv(e.to_string()))?;

    let report = IngestReport {
        k: skeleton.k,
        tiers: assignment.tiers,
        dummies: skeleton.dummies.clone(),
        path_count: net.paths().len(),
        truncated,
        explicit_paths: explicit,
    };
    Ok((net, report))
}

/// Rewrite an explicit path through the dummy chains so it spans tiers
/// 1..k with single-tier hops.
fn embed_path(raw: &[u64], skeleton: &Skeleton) -> Result<Vec<u64>, IngestError> {
    let tier_of: BTreeMap<u64, u32> = skeleton.nodes.iter().copied().collect();
    if raw.is_empty() {
        return Err(IngestError::BadExplicitPath(raw.to_vec(), "empty".into()));
    }
    let mut full = Vec::new();
    let first = raw[0];
    if !tier_of.contains_key(&first) {
        return Err(IngestError::UnknownNode(first));
    }
    if tier_of[&first] > 1 {
        match skeleton.source_chains.get(&first) {
            Some(chain) => full.extend(&chain[..chain.len() - 1]),
            None => {
                return Err(IngestError::BadExplicitPath(
                    raw.to_vec(),
                    format!("starts at tier {} with no dummy chain", tier_of[&first]),
                ))
            }
        }
    }
    full.push(first);
    for pair in raw.windows(2) {
        let chain = skeleton.edge_chains.get(&(pair[0], pair[1])).ok_or_else(|| {
            IngestError::BadExplicitPath(
                raw.to_vec(),
                format!("({}, {}) is not an edge", pair[0], pair[1]),
            )
        })?;
        full.extend(&chain[1..]);
    }
    let last_tier = tier_of[full.last().unwrap()];
    if last_tier != skeleton.k {
        return Err(IngestError::BadExplicitPath(
            raw.to_vec(),
            format!("ends at tier {last_tier}, expected tier {}", skeleton.k),
        ));
    }
    Ok(full)
}

/// Parse the `nodes.csv` / `edges.csv` pair (and optional `paths.csv` with
/// columns path_id, rank, node_id, flow). A non-numeric first record is
/// treated as a header and skipped.
pub fn read_raw_csv(
    nodes_text: &str,
    edges_text: &str,
    paths_text: Option<&str>,
) -> Result<RawDag, IngestError> {
    let mut nodes = Vec::new();
    for record in csv_records(nodes_text)? {
        if record.is_empty() {
            continue;
        }
        let id = match record[0].parse::<u64>() {
            Ok(id) => id,
            Err(_) if nodes.is_empty() => continue, // header
            Err(_) => return Err(IngestError::Csv(format!("bad node id {:?}", record[0]))),
        };
        let cost = match record.get(1).map(|s| s.trim()).filter(|s| !s.is_empty()) {
            Some(text) => Some(parse_rational(text)?),
            None => None,
        };
        nodes.push((id, cost));
    }

    let mut edges = Vec::new();
    for record in csv_records(edges_text)? {
        if record.is_empty() {
            continue;
        }
        let a = match record[0].parse::<u64>() {
            Ok(v) => v,
            Err(_) if edges.is_empty() => continue,
            Err(_) => return Err(IngestError::Csv(format!("bad edge source {:?}", record[0]))),
        };
        let b = record
            .get(1)
            .and_then(|s| s.trim().parse::<u64>().ok())
            .ok_or_else(|| IngestError::Csv(format!("edge row {record:?} needs src,dst")))?;
        edges.push((a, b));
    }

    let paths = match paths_text {
        None => None,
        Some(text) => {
            let mut rows: Vec<(u64, u64, u64, BigRational)> = Vec::new();
            for record in csv_records(text)? {
                if record.is_empty() {
                    continue;
                }
                let pid = match record[0].parse::<u64>() {
                    Ok(v) => v,
                    Err(_) if rows.is_empty() => continue,
                    Err(_) => {
                        return Err(IngestError::Csv(format!("bad path id {:?}", record[0])))
                    }
                };
                if record.len() < 4 {
                    return Err(IngestError::Csv(
                        "paths.csv rows need path_id,rank,node_id,flow".into(),
                    ));
                }
                let rank = record[1]
                    .trim()
                    .parse::<u64>()
                    .map_err(|_| IngestError::Csv(format!("bad rank {:?}", record[1])))?;
                let node = record[2]
                    .trim()
                    .parse::<u64>()
                    .map_err(|_| IngestError::Csv(format!("bad node {:?}", record[2])))?;
                let flow = parse_rational(record[3].trim())?;
                rows.push((pid, rank, node, flow));
            }
            let mut grouped: BTreeMap<u64, Vec<(u64, u64, BigRational)>> = BTreeMap::new();
            for (pid, rank, node, flow) in rows {
                grouped.entry(pid).or_default().push((rank, node, flow));
            }
            let mut paths = Vec::new();
            for (_, mut members) in grouped {
                members.sort_by_key(|&(rank, _, _)| rank);
                let flow = members[0].2.clone();
                paths.push((members.iter().map(|&(_, node, _)| node).collect(), flow));
            }
            Some(paths)
        }
    };
    Ok(RawDag { nodes, edges, paths })
}

fn csv_records(text: &str) -> Result<Vec<Vec<String>>, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| IngestError::Csv(e.to_string()))?;
        out.push(record.iter().map(|s| s.to_string()).collect());
    }
    Ok(out)
}

/// Convert a canonical network back into raw-DAG form (explicit paths
/// preserved), so re-ingestion reproduces it byte for byte.
pub fn raw_from_network(net: &SupplyChainNetwork) -> RawDag {
    RawDag {
        nodes: net.nodes().iter().map(|n| (n.id.0, Some(n.cost.clone()))).collect(),
        edges: net.edges().iter().map(|&(a, b)| (a.0, b.0)).collect(),
        paths: Some(
            net.paths()
                .iter()
                .map(|p| (p.nodes.iter().map(|id| id.0).collect(), p.flow.clone()))
                .collect(),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::net::{validate_network, CostMode};

    fn worked_dag() -> RawDag {
        RawDag {
            nodes: vec![(1, None), (2, None), (3, None)],
            edges: vec![(1, 2), (1, 3), (2, 3)],
            paths: None,
        }
    }

    #[test]
    fn worked_example_tiers() {
        let t = place_tiers(&worked_dag()).unwrap();
        assert_eq!(t.k, 3);
        assert_eq!(t.tiers[&1], 1);
        assert_eq!(t.tiers[&2], 2);
        assert_eq!(t.tiers[&3], 3);
    }

    #[test]
    fn chains_and_singletons_place_trivially() {
        let chain = RawDag {
            nodes: (1..=4).map(|i| (i, None)).collect(),
            edges: vec![(1, 2), (2, 3), (3, 4)],
            paths: None,
        };
        let t = place_tiers(&chain).unwrap();
        assert_eq!(t.k, 4);
        assert_eq!((1..=4).map(|i| t.tiers[&i]).collect::<Vec<_>>(), vec![1, 2, 3, 4]);

        let single = RawDag { nodes: vec![(7, None)], edges: vec![], paths: None };
        let t = place_tiers(&single).unwrap();
        assert_eq!(t.k, 1);
        assert_eq!(t.tiers[&7], 1);
    }

    #[test]
    fn cycles_are_rejected() {
        let cyclic = RawDag {
            nodes: vec![(1, None), (2, None)],
            edges: vec![(1, 2), (2, 1)],
            paths: None,
        };
        assert!(matches!(place_tiers(&cyclic), Err(IngestError::Cycle(_))));
    }

    #[test]
    fn worked_example_grows_one_dummy() {
        let dag = worked_dag();
        let t = place_tiers(&dag).unwrap();
        let skeleton = insert_dummies(&dag, &t);
        assert_eq!(skeleton.dummies.len(), 1);
        let d = &skeleton.dummies[0];
        assert_eq!(d.id, 4);
        assert_eq!(d.tier, 2);
        assert!(skeleton.edges.contains(&(1, 4)));
        assert!(skeleton.edges.contains(&(4, 3)));
        assert!(!skeleton.edges.contains(&(1, 3)));
    }

    #[test]
    fn tier_consistent_dags_need_no_dummies() {
        let chain = RawDag {
            nodes: (1..=3).map(|i| (i, None)).collect(),
            edges: vec![(1, 2), (2, 3)],
            paths: None,
        };
        let t = place_tiers(&chain).unwrap();
        let skeleton = insert_dummies(&chain, &t);
        assert!(skeleton.dummies.is_empty());
    }

    #[test]
    fn deep_source_gets_a_chain_of_dummies() {
        // node 9 sits at tier 3 of a k=4 dag with no predecessors
        let dag = RawDag {
            nodes: vec![(1, None), (2, None), (3, None), (4, None), (9, None)],
            edges: vec![(1, 2), (2, 3), (3, 4), (9, 4)],
            paths: None,
        };
        let t = place_tiers(&dag).unwrap();
        assert_eq!(t.k, 4);
        assert_eq!(t.tiers[&9], 3);
        let skeleton = insert_dummies(&dag, &t);
        let lifts: Vec<_> = skeleton
            .dummies
            .iter()
            .filter(|d| matches!(d.reason, DummyReason::SourceLift { target: 9 }))
            .collect();
        assert_eq!(lifts.len(), 2);
        assert_eq!(lifts.iter().map(|d| d.tier).collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn enumeration_collects_figure_paths() {
        let fig = fixtures::figure_network();
        let dag = RawDag {
            nodes: fig.nodes().iter().map(|n| (n.id.0, Some(n.cost.clone()))).collect(),
            edges: fig.edges().iter().map(|&(a, b)| (a.0, b.0)).collect(),
            paths: None,
        };
        let t = place_tiers(&dag).unwrap();
        let skeleton = insert_dummies(&dag, &t);
        let (paths, truncated) = enumerate_paths(&skeleton, 1000);
        assert!(!truncated);
        assert!(paths.contains(&vec![1, 3, 6, 8]));
        assert!(paths.contains(&vec![1, 3, 6, 9]));
        assert_eq!(paths.len(), 4);
    }

    #[test]
    fn chain_has_one_path_and_caps_truncate() {
        let chain = RawDag {
            nodes: (1..=3).map(|i| (i, None)).collect(),
            edges: vec![(1, 2), (2, 3)],
            paths: None,
        };
        let t = place_tiers(&chain).unwrap();
        let (paths, truncated) = enumerate_paths(&insert_dummies(&chain, &t), 10);
        assert_eq!(paths.len(), 1);
        assert!(!truncated);

        // complete 2-wide tri-layer: 2^3 = 8 paths
        let wide = RawDag {
            nodes: (1..=6).map(|i| (i, None)).collect(),
            edges: vec![
                (1, 3),
                (1, 4),
                (2, 3),
                (2, 4),
                (3, 5),
                (3, 6),
                (4, 5),
                (4, 6),
            ],
            paths: None,
        };
        let t = place_tiers(&wide).unwrap();
        let (paths, truncated) = enumerate_paths(&insert_dummies(&wide, &t), 1000);
        assert_eq!(paths.len(), 8);
        assert!(!truncated);
        let (some, truncated) = enumerate_paths(&insert_dummies(&wide, &t), 5);
        assert_eq!(some.len(), 5);
        assert!(truncated);
    }

    #[test]
    fn ingest_produces_a_valid_network() {
        let (net, report) = ingest(&worked_dag(), &IngestOptions::default()).unwrap();
        assert_eq!(report.k, 3);
        assert_eq!(report.dummies.len(), 1);
        assert!(validate_network(&net, CostMode::General).is_structurally_valid());
        assert_eq!(net.paths().len(), 2);
        // dummy 4 costs nothing
        assert!(net.node(NodeId(4)).unwrap().cost.is_zero());
    }

    #[test]
    fn ingest_is_idempotent_on_canonical_networks() {
        let (net, report) = ingest(&worked_dag(), &IngestOptions::default()).unwrap();
        let again = raw_from_network(&net);
        let (net2, report2) = ingest(&again, &IngestOptions::default()).unwrap();
        assert!(report2.dummies.is_empty());
        assert_eq!(report2.k, report.k);
        assert_eq!(net2.to_json_string(), net.to_json_string());
    }

    #[test]
    fn csv_round_trip_with_header() {
        let dag = read_raw_csv(
            "id,cost\n1,\n2,0.5\n3,2/3\n",
            "src,dst\n1,2\n1,3\n2,3\n",
            Some("path_id,rank,node_id,flow\n1,1,1,1\n1,2,2,1\n1,3,3,1\n"),
        )
        .unwrap();
        assert_eq!(dag.nodes.len(), 3);
        assert_eq!(dag.edges.len(), 3);
        let paths = dag.paths.as_ref().unwrap();
        assert_eq!(paths[0].0, vec![1, 2, 3]);
    }

    #[test]
    fn explicit_paths_are_embedded_through_dummies() {
        let mut dag = worked_dag();
        dag.paths = Some(vec![
            (vec![1, 2, 3], BigRational::one()),
            (vec![1, 3], BigRational::one()),
        ]);
        let (net, report) = ingest(&dag, &IngestOptions::default()).unwrap();
        assert!(report.explicit_paths);
        let tuples: Vec<Vec<u64>> = net
            .paths()
            .iter()
            .map(|p| p.nodes.iter().map(|id| id.0).collect())
            .collect();
        assert!(tuples.contains(&vec![1, 2, 3]));
        assert!(tuples.contains(&vec![1, 4, 3])); // rewritten through dummy 4
    }
}
