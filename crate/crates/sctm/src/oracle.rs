//! Ground truth for testing: exhaustive minimum seed search, the
//! polynomial k <= 2 special case, and the three-tier gadget networks whose
//! activation behavior is pinned by the hardness construction.

use std::collections::{BTreeMap, BTreeSet};

use num::rational::BigRational;
use num::{One, Signed};
use thiserror::Error;

use crate::net::{simulate, CostMode, NetNode, NodeId, Path, SupplyChainNetwork};
use crate::ratio::rational_from_u64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BruteForceResult {
    Found { opt_size: u64, seed: BTreeSet<NodeId> },
    /// No seed of size at most the cap fully activates the network.
    Exceeded { cap: usize },
}

/// Exhaustive minimum seed set search: subsets are enumerated by increasing
/// cardinality, colexicographically within each cardinality, and the first
/// fully activating subset wins. Deliberately independent of the auxiliary
/// graph machinery; it only relies on the simulator.
pub fn brute_force_min_seed(
    net: &SupplyChainNetwork,
    mode: CostMode,
    size_cap: usize,
) -> BruteForceResult {
    let ids: Vec<NodeId> = net.node_ids().into_iter().collect();
    let n = ids.len();
    let total = net.nodes().len();
    for cardinality in 0..=size_cap.min(n) {
        let mut found: Option<BTreeSet<NodeId>> = None;
        for_each_colex_subset(n, cardinality, |subset| {
            if found.is_some() {
                return;
            }
            let seed: BTreeSet<NodeId> = subset.iter().map(|&i| ids[i]).collect();
            let out = simulate(net, &seed, mode).expect("ids are valid");
            if out.final_active.len() == total {
                found = Some(seed);
            }
        });
        if let Some(seed) = found {
            return BruteForceResult::Found { opt_size: cardinality as u64, seed };
        }
    }
    BruteForceResult::Exceeded { cap: size_cap }
}

/// Visit all `c`-subsets of `0..n` in colexicographic order (sorted by the
/// reversed index tuple).
fn for_each_colex_subset(n: usize, c: usize, mut visit: impl FnMut(&[usize])) {
    if c > n {
        return;
    }
    let mut subset: Vec<usize> = (0..c).collect();
    loop {
        visit(&subset);
        // next colex: bump the lowest index that can grow below its successor
        let mut i = 0;
        loop {
            if i == c {
                return;
            }
            let limit = if i + 1 < c { subset[i + 1] } else { n };
            if subset[i] + 1 < limit {
                subset[i] += 1;
                for (j, slot) in subset.iter_mut().enumerate().take(i) {
                    *slot = j;
                }
                break;
            }
            i += 1;
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("closed-form solution requires k <= 2, got k = {0}")]
    TiersTooDeep(u32),
    #[error("closed-form solution covers the epsilon case only")]
    GeneralMode,
}

/// Closed-form optimum for one- and two-tier networks in epsilon mode.
///
/// k = 1: every node on a positive path is a complete path and activates by
/// itself, so only pathless nodes need seeding. k = 2: one seed per
/// connected component of the share-a-positive-path relation, plus the
/// pathless nodes.
pub fn solve_k_le_2(net: &SupplyChainNetwork, mode: CostMode) -> Result<u64, OracleError> {
    if mode != CostMode::Epsilon {
        return Err(OracleError::GeneralMode);
    }
    if net.k > 2 {
        return Err(OracleError::TiersTooDeep(net.k));
    }
    let pathless = net
        .nodes()
        .iter()
        .filter(|n| !net.on_positive_path(n.id))
        .count() as u64;
    if net.k == 1 {
        return Ok(pathless);
    }
    // union nodes sharing a positive path, count resulting components
    let ids: Vec<NodeId> = net.node_ids().into_iter().collect();
    let index: BTreeMap<NodeId, usize> =
        ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut parent: Vec<usize> = (0..ids.len()).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let r = find(parent, parent[x]);
            parent[x] = r;
        }
        parent[x]
    }
    for path in net.paths() {
        if !path.flow.is_positive() {
            continue;
        }
        let first = index[&path.nodes[0]];
        for id in &path.nodes[1..] {
            let a = find(&mut parent, first);
            let b = find(&mut parent, index[id]);
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut roots = BTreeSet::new();
    for (i, &id) in ids.iter().enumerate() {
        if net.on_positive_path(id) {
            let r = find(&mut parent, i);
            roots.insert(r);
        }
    }
    Ok(roots.len() as u64 + pathless)
}

// --- hardness gadget networks ---

/// Block kinds from the reduction: a three-node line and the five-node
/// C block with its internal diamond.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    Line,
    CBlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkageKind {
    /// Full activation transfers both ways (edges C1 -> B2, B2 -> C3).
    Bidir,
    /// Full C activates exactly node 2 of the target line block.
    L,
    /// Full C activates exactly node 3 of the target line block.
    R,
    /// Both directions of leverage: full C activates the line block; full
    /// line block activates only nodes 2 and 4 of C, which then stall.
    LR,
}

#[derive(Debug, Clone)]
pub struct GadgetSpec {
    pub blocks: Vec<(String, BlockKind)>,
    /// (kind, from label, to label); `Bidir` runs line <-> C, the others C -> line.
    pub linkages: Vec<(LinkageKind, String, String)>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GadgetError {
    #[error("unknown block label {0:?}")]
    UnknownBlock(String),
    #[error("duplicate block label {0:?}")]
    DuplicateBlock(String),
    #[error("linkage {0:?} needs a {1} block on the {2} side")]
    WrongBlockKind(String, &'static str, &'static str),
}

/// Node handles for one built gadget network: `labels["U"]["2"]` is the id
/// of node 2 in block U.
pub type GadgetLabels = BTreeMap<String, BTreeMap<&'static str, NodeId>>;

/// Realize blocks and linkages as a 3-tier epsilon-mode network. All
/// declared paths carry unit flow; the path set is chosen so that the four
/// documented linkage behaviors hold exactly under the simulator.
pub fn build_gadget_graph(
    spec: &GadgetSpec,
) -> Result<(SupplyChainNetwork, GadgetLabels), GadgetError> {
    let mut kinds: BTreeMap<&str, BlockKind> = BTreeMap::new();
    for (label, kind) in &spec.blocks {
        if kinds.insert(label, *kind).is_some() {
            return Err(GadgetError::DuplicateBlock(label.clone()));
        }
    }

    let mut next_id = 1u64;
    let mut labels: GadgetLabels = BTreeMap::new();
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut path_tuples: Vec<[NodeId; 3]> = Vec::new();

    for (label, kind) in &spec.blocks {
        let mut handles = BTreeMap::new();
        let mut add = |name: &'static str, tier: u32, nodes: &mut Vec<NetNode>| -> NodeId {
            let id = NodeId(next_id);
            next_id += 1;
            nodes.push(NetNode { id, tier, cost: BigRational::one() });
            handles.insert(name, id);
            id
        };
        match kind {
            BlockKind::Line => {
                let n1 = add("1", 1, &mut nodes);
                let n2 = add("2", 2, &mut nodes);
                let n3 = add("3", 3, &mut nodes);
                edges.extend([(n1, n2), (n2, n3)]);
                path_tuples.push([n1, n2, n3]);
            }
            BlockKind::CBlock => {
                let n1 = add("1", 1, &mut nodes);
                let n2 = add("2", 2, &mut nodes);
                let n3 = add("3", 3, &mut nodes);
                let n4 = add("4", 1, &mut nodes);
                let n5 = add("5", 2, &mut nodes);
                edges.extend([(n1, n2), (n1, n5), (n2, n3), (n4, n5), (n5, n3)]);
                path_tuples.extend([[n1, n2, n3], [n1, n5, n3], [n4, n5, n3]]);
            }
        }
        labels.insert(label.clone(), handles);
    }

    let handle = |labels: &GadgetLabels, label: &String, name: &'static str| -> Result<NodeId, GadgetError> {
        labels
            .get(label)
            .and_then(|h| h.get(name))
            .copied()
            .ok_or_else(|| GadgetError::UnknownBlock(label.clone()))
    };
    let expect_kind = |label: &String,
                       want: BlockKind,
                       side: &'static str,
                       link: &LinkageKind|
     -> Result<(), GadgetError> {
        match kinds.get(label.as_str()) {
            None => Err(GadgetError::UnknownBlock(label.clone())),
            Some(k) if *k == want => Ok(()),
            Some(_) => Err(GadgetError::WrongBlockKind(
                format!("{link:?}"),
                if want == BlockKind::Line { "line" } else { "C" },
                side,
            )),
        }
    };

    for (kind, from, to) in &spec.linkages {
        match kind {
            LinkageKind::Bidir => {
                // line block `from`, C block `to`
                expect_kind(from, BlockKind::Line, "from", kind)?;
                expect_kind(to, BlockKind::CBlock, "to", kind)?;
                let b2 = handle(&labels, from, "2")?;
                let b1 = handle(&labels, from, "1")?;
                let b3 = handle(&labels, from, "3")?;
                let c1 = handle(&labels, to, "1")?;
                let c3 = handle(&labels, to, "3")?;
                edges.extend([(c1, b2), (b2, c3)]);
                path_tuples.extend([[c1, b2, b3], [c1, b2, c3], [b1, b2, c3]]);
            }
            LinkageKind::L => {
                expect_kind(from, BlockKind::CBlock, "from", kind)?;
                expect_kind(to, BlockKind::Line, "to", kind)?;
                let c4 = handle(&labels, from, "4")?;
                let c3 = handle(&labels, from, "3")?;
                let b2 = handle(&labels, to, "2")?;
                edges.extend([(c4, b2), (b2, c3)]);
                path_tuples.push([c4, b2, c3]);
            }
            LinkageKind::R => {
                expect_kind(from, BlockKind::CBlock, "from", kind)?;
                expect_kind(to, BlockKind::Line, "to", kind)?;
                let c1 = handle(&labels, from, "1")?;
                let c2 = handle(&labels, from, "2")?;
                let b3 = handle(&labels, to, "3")?;
                edges.push((c2, b3));
                path_tuples.push([c1, c2, b3]);
            }
            LinkageKind::LR => {
                expect_kind(from, BlockKind::CBlock, "from", kind)?;
                expect_kind(to, BlockKind::Line, "to", kind)?;
                let c1 = handle(&labels, from, "1")?;
                let c2 = handle(&labels, from, "2")?;
                let c4 = handle(&labels, from, "4")?;
                let b2 = handle(&labels, to, "2")?;
                let b3 = handle(&labels, to, "3")?;
                edges.extend([(c4, b2), (c2, b3), (c4, c2)]);
                path_tuples.extend([[c4, b2, b3], [c1, c2, b3], [c4, c2, b3]]);
            }
        }
    }

    let mut seen = BTreeSet::new();
    let paths: Vec<Path> = path_tuples
        .into_iter()
        .filter(|t| seen.insert(*t))
        .map(|t| Path { nodes: t.to_vec(), flow: rational_from_u64(1) })
        .collect();
    let mut edge_set = BTreeSet::new();
    edge_set.extend(edges);
    let net = SupplyChainNetwork::new(3, nodes, edge_set, paths)
        .expect("gadget construction is well formed");
    Ok((net, labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::{min_seed_set, SolverConfig};
    use crate::fixtures;
    use crate::net::validate_network;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn ids(v: &[u64]) -> BTreeSet<NodeId> {
        v.iter().map(|&i| NodeId(i)).collect()
    }

    #[test]
    fn figure_optimum_is_five() {
        let net = fixtures::figure_network();
        match brute_force_min_seed(&net, CostMode::Epsilon, 9) {
            BruteForceResult::Found { opt_size, seed } => {
                assert_eq!(opt_size, 5);
                let out = simulate(&net, &seed, CostMode::Epsilon).unwrap();
                assert!(out.fully_active(&net));
            }
            other => panic!("unexpected {other:?}"),
        }
        // the documented size-5 witness works
        let out = simulate(&net, &ids(&[3, 6, 8, 4, 7]), CostMode::Epsilon).unwrap();
        assert!(out.fully_active(&net));
    }

    #[test]
    fn full_seed_always_activates() {
        let net = fixtures::figure_network();
        match brute_force_min_seed(&net, CostMode::General, net.nodes().len()) {
            BruteForceResult::Found { opt_size, .. } => {
                assert!(opt_size <= net.nodes().len() as u64)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn single_path_k4_needs_three_seeds() {
        let net = fixtures::single_path_network(4, rational_from_u64(1));
        assert_eq!(
            brute_force_min_seed(&net, CostMode::Epsilon, 4),
            BruteForceResult::Found {
                opt_size: 3,
                seed: ids(&[1, 2, 3]) // colex-first witness
            }
        );
        assert_eq!(
            brute_force_min_seed(&net, CostMode::Epsilon, 2),
            BruteForceResult::Exceeded { cap: 2 }
        );
    }

    #[test]
    fn colex_enumeration_is_ordered() {
        let mut seen = Vec::new();
        for_each_colex_subset(4, 2, |s| seen.push(s.to_vec()));
        assert_eq!(
            seen,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![1, 2],
                vec![0, 3],
                vec![1, 3],
                vec![2, 3]
            ]
        );
    }

    #[test]
    fn closed_form_matches_brute_force_on_small_k2() {
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..40 {
            let n = rng.gen_range(2..9);
            let m = rng.gen_range(1..5);
            let net = fixtures::random_network(&mut rng, n, 2, m, false);
            let closed = solve_k_le_2(&net, CostMode::Epsilon).unwrap();
            match brute_force_min_seed(&net, CostMode::Epsilon, n) {
                BruteForceResult::Found { opt_size, .. } => {
                    assert_eq!(closed, opt_size, "net {}", net.to_json_string())
                }
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(
            solve_k_le_2(&fixtures::disjoint_pairs_network(1), CostMode::Epsilon).unwrap(),
            1
        );
        assert_eq!(
            solve_k_le_2(&fixtures::disjoint_pairs_network(3), CostMode::Epsilon).unwrap(),
            3
        );
        // k = 1 with every node its own complete path
        let net = {
            use crate::net::{NetNode, Path};
            let nodes = (1..=3u64)
                .map(|i| NetNode { id: NodeId(i), tier: 1, cost: BigRational::one() })
                .collect();
            let paths = (1..=3u64)
                .map(|i| Path { nodes: vec![NodeId(i)], flow: rational_from_u64(1) })
                .collect();
            SupplyChainNetwork::new(1, nodes, [], paths).unwrap()
        };
        assert_eq!(solve_k_le_2(&net, CostMode::Epsilon).unwrap(), 0);
        assert!(solve_k_le_2(&fixtures::figure_network(), CostMode::Epsilon).is_err());
    }

    fn block_ids(labels: &GadgetLabels, label: &str) -> BTreeSet<NodeId> {
        labels[label].values().copied().collect()
    }

    fn bidir_spec() -> GadgetSpec {
        GadgetSpec {
            blocks: vec![("U".into(), BlockKind::Line), ("UV".into(), BlockKind::CBlock)],
            linkages: vec![(LinkageKind::Bidir, "U".into(), "UV".into())],
        }
    }

    #[test]
    fn bidir_linkage_transfers_both_ways() {
        let (net, labels) = build_gadget_graph(&bidir_spec()).unwrap();
        assert!(validate_network(&net, CostMode::Epsilon).is_structurally_valid());
        let all = net.node_ids();
        for seed_block in ["U", "UV"] {
            let out =
                simulate(&net, &block_ids(&labels, seed_block), CostMode::Epsilon).unwrap();
            assert_eq!(out.final_active, all, "seeding {seed_block}");
        }
    }

    #[test]
    fn l_linkage_activates_exactly_node_two() {
        let (net, labels) = build_gadget_graph(&GadgetSpec {
            blocks: vec![("UV".into(), BlockKind::CBlock), ("V".into(), BlockKind::Line)],
            linkages: vec![(LinkageKind::L, "UV".into(), "V".into())],
        })
        .unwrap();
        let out = simulate(&net, &block_ids(&labels, "UV"), CostMode::Epsilon).unwrap();
        let mut expected = block_ids(&labels, "UV");
        expected.insert(labels["V"]["2"]);
        assert_eq!(out.final_active, expected);
        // reverse direction gains nothing
        let back = simulate(&net, &block_ids(&labels, "V"), CostMode::Epsilon).unwrap();
        assert_eq!(back.final_active, block_ids(&labels, "V"));
    }

    #[test]
    fn r_linkage_activates_exactly_node_three() {
        let (net, labels) = build_gadget_graph(&GadgetSpec {
            blocks: vec![("UV".into(), BlockKind::CBlock), ("V".into(), BlockKind::Line)],
            linkages: vec![(LinkageKind::R, "UV".into(), "V".into())],
        })
        .unwrap();
        let out = simulate(&net, &block_ids(&labels, "UV"), CostMode::Epsilon).unwrap();
        let mut expected = block_ids(&labels, "UV");
        expected.insert(labels["V"]["3"]);
        assert_eq!(out.final_active, expected);
    }

    #[test]
    fn lr_linkage_forward_full_reverse_partial() {
        let (net, labels) = build_gadget_graph(&GadgetSpec {
            blocks: vec![("UV".into(), BlockKind::CBlock), ("V".into(), BlockKind::Line)],
            linkages: vec![(LinkageKind::LR, "UV".into(), "V".into())],
        })
        .unwrap();
        let forward = simulate(&net, &block_ids(&labels, "UV"), CostMode::Epsilon).unwrap();
        assert_eq!(forward.final_active, net.node_ids());

        let back = simulate(&net, &block_ids(&labels, "V"), CostMode::Epsilon).unwrap();
        let mut expected = block_ids(&labels, "V");
        expected.insert(labels["UV"]["2"]);
        expected.insert(labels["UV"]["4"]);
        assert_eq!(back.final_active, expected);
    }

    #[test]
    fn paired_l_and_r_linkages_activate_the_line_block() {
        let (net, labels) = build_gadget_graph(&GadgetSpec {
            blocks: vec![
                ("UV".into(), BlockKind::CBlock),
                ("TV".into(), BlockKind::CBlock),
                ("V".into(), BlockKind::Line),
            ],
            linkages: vec![
                (LinkageKind::L, "UV".into(), "V".into()),
                (LinkageKind::R, "TV".into(), "V".into()),
            ],
        })
        .unwrap();
        let mut seed = block_ids(&labels, "UV");
        seed.extend(block_ids(&labels, "TV"));
        let out = simulate(&net, &seed, CostMode::Epsilon).unwrap();
        assert_eq!(out.final_active, net.node_ids());
    }

    #[test]
    fn inconsistent_linkage_is_rejected() {
        let bad = GadgetSpec {
            blocks: vec![("A".into(), BlockKind::Line), ("B".into(), BlockKind::Line)],
            linkages: vec![(LinkageKind::L, "A".into(), "B".into())],
        };
        assert!(matches!(build_gadget_graph(&bad), Err(GadgetError::WrongBlockKind(..))));
    }

    #[test]
    fn dp_agrees_with_brute_force_on_gadgets() {
        let (net, _) = build_gadget_graph(&bidir_spec()).unwrap();
        let dp = min_seed_set(&net, &SolverConfig::new(CostMode::Epsilon)).unwrap();
        match brute_force_min_seed(&net, CostMode::Epsilon, net.nodes().len()) {
            BruteForceResult::Found { opt_size, .. } => assert_eq!(dp.opt_size, opt_size),
            other => panic!("unexpected {other:?}"),
        }
    }
}
