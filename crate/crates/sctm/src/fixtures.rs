//! Small hand-built and randomly drawn networks used across tests and
//! documentation.

use num::rational::BigRational;
use num::One;
use rand::Rng;

use crate::net::{NetNode, NodeId, Path, SupplyChainNetwork};
use crate::ratio::rational_from_u64;

/// The 9-node, 4-tier example network: tiers {1,2} | {3,4,5} | {6,7} | {8,9},
/// every tier-1-to-tier-4 chain a unit-flow path, unit costs.
///
/// Paths: (1,3,6,8), (1,3,6,9), (2,4,7,9), (2,5,7,9).
pub fn figure_network() -> SupplyChainNetwork {
    let tiers = [
        (1u64, 1u32),
        (2, 1),
        (3, 2),
        (4, 2),
        (5, 2),
        (6, 3),
        (7, 3),
        (8, 4),
        (9, 4),
    ];
    let nodes = tiers
        .iter()
        .map(|&(id, tier)| NetNode { id: NodeId(id), tier, cost: BigRational::one() })
        .collect();
    let edges = [
        (1u64, 3u64),
        (3, 6),
        (6, 8),
        (6, 9),
        (2, 4),
        (4, 7),
        (2, 5),
        (5, 7),
        (7, 9),
    ]
    .map(|(a, b)| (NodeId(a), NodeId(b)));
    let paths = [
        vec![1u64, 3, 6, 8],
        vec![1, 3, 6, 9],
        vec![2, 4, 7, 9],
        vec![2, 5, 7, 9],
    ]
    .into_iter()
    .map(|nodes| Path {
        nodes: nodes.into_iter().map(NodeId).collect(),
        flow: BigRational::one(),
    })
    .collect();
    SupplyChainNetwork::new(4, nodes, edges, paths).expect("figure network is well formed")
}

/// A single chain 1 -> 2 -> ... -> k carrying one path with the given flow.
pub fn single_path_network(k: u32, flow: BigRational) -> SupplyChainNetwork {
    let nodes = (1..=k as u64)
        .map(|id| NetNode { id: NodeId(id), tier: id as u32, cost: BigRational::one() })
        .collect();
    let edges: Vec<_> = (1..k as u64).map(|id| (NodeId(id), NodeId(id + 1))).collect();
    let paths = vec![Path { nodes: (1..=k as u64).map(NodeId).collect(), flow }];
    SupplyChainNetwork::new(k, nodes, edges, paths).expect("chain is well formed")
}

/// A random tiered network with `n` nodes, `k` tiers, `m` sampled paths,
/// and edges derived from the paths. With `integer_weights` set, flows are
/// drawn from 1..=4 and each node's cost is drawn from 0..=(incident flow),
/// so every node has the potential to adopt; otherwise flows and costs are 1.
/// Nodes missing from every sampled path stay in the network with cost 0.
pub fn random_network(
    rng: &mut impl Rng,
    n: usize,
    k: u32,
    m: usize,
    integer_weights: bool,
) -> SupplyChainNetwork {
    assert!(n >= k as usize && k >= 1);
    // at least one node per tier, remainder spread at random
    let mut tier_of = Vec::with_capacity(n);
    for t in 1..=k {
        tier_of.push(t);
    }
    for _ in k as usize..n {
        tier_of.push(rng.gen_range(1..=k));
    }
    let mut per_tier: Vec<Vec<NodeId>> = vec![Vec::new(); k as usize];
    let nodes: Vec<NetNode> = tier_of
        .iter()
        .enumerate()
        .map(|(i, &tier)| {
            let id = NodeId(i as u64 + 1);
            per_tier[tier as usize - 1].push(id);
            NetNode { id, tier, cost: BigRational::one() }
        })
        .collect();

    let mut edges = Vec::new();
    let mut paths = Vec::new();
    for _ in 0..m {
        let tuple: Vec<NodeId> = per_tier
            .iter()
            .map(|tier| tier[rng.gen_range(0..tier.len())])
            .collect();
        for pair in tuple.windows(2) {
            edges.push((pair[0], pair[1]));
        }
        let flow = if integer_weights { rng.gen_range(1..=4u64) } else { 1 };
        paths.push(Path { nodes: tuple, flow: rational_from_u64(flow) });
    }

    let mut net = SupplyChainNetwork::new(k, nodes, edges, paths).expect("random net well formed");
    if integer_weights {
        let costs: Vec<BigRational> = net
            .nodes()
            .iter()
            .map(|node| {
                let total: u64 = net
                    .paths_of(node.id)
                    .iter()
                    .map(|&r| net.paths()[r].flow.numer().try_into().unwrap_or(0u64))
                    .sum();
                rational_from_u64(rng.gen_range(0..=total))
            })
            .collect();
        let nodes = net
            .nodes()
            .iter()
            .zip(costs)
            .map(|(node, cost)| NetNode { id: node.id, tier: node.tier, cost })
            .collect();
        net = SupplyChainNetwork::new(
            net.k,
            nodes,
            net.edges().iter().copied(),
            net.paths().to_vec(),
        )
        .expect("costs preserve structure");
    } else {
        // nodes on no path cannot satisfy a positive cost; zero it
        let nodes = net
            .nodes()
            .iter()
            .map(|node| NetNode {
                id: node.id,
                tier: node.tier,
                cost: if net.paths_of(node.id).is_empty() {
                    BigRational::from_integer(0.into())
                } else {
                    node.cost.clone()
                },
            })
            .collect();
        net = SupplyChainNetwork::new(
            net.k,
            nodes,
            net.edges().iter().copied(),
            net.paths().to_vec(),
        )
        .expect("costs preserve structure");
    }
    net
}

/// `parts` disjoint copies of a two-tier single-path component.
pub fn disjoint_pairs_network(parts: u64) -> SupplyChainNetwork {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut paths = Vec::new();
    for c in 0..parts {
        let a = NodeId(2 * c + 1);
        let b = NodeId(2 * c + 2);
        nodes.push(NetNode { id: a, tier: 1, cost: BigRational::one() });
        nodes.push(NetNode { id: b, tier: 2, cost: BigRational::one() });
        edges.push((a, b));
        paths.push(Path { nodes: vec![a, b], flow: rational_from_u64(1) });
    }
    SupplyChainNetwork::new(2, nodes, edges, paths).expect("pairs are well formed")
}
