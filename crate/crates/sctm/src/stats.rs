//! Network realism statistics: diamond scale, directed modularity, and
//! degree/path-count assortativity.

use std::collections::{BTreeMap, BTreeSet};

use num::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::net::{NodeId, SupplyChainNetwork};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StatsError {
    #[error("node {0} is not eligible for the diamond scale: {1}")]
    IneligibleFocal(NodeId, String),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
}

fn predecessors(net: &SupplyChainNetwork) -> BTreeMap<NodeId, Vec<NodeId>> {
    let mut preds: BTreeMap<NodeId, Vec<NodeId>> =
        net.nodes().iter().map(|n| (n.id, Vec::new())).collect();
    for &(a, b) in net.edges() {
        preds.get_mut(&b).unwrap().push(a);
    }
    preds
}

/// Diamond scale of a focal firm: distinct supplier-to-supplier links two
/// tiers upstream divided by distinct tier-two suppliers. Exactly 1 on a
/// pure in-tree; grows as tier-two suppliers are shared between direct
/// suppliers. The focal firm needs two upstream tiers and at least one
/// tier-two supplier.
pub fn diamond_scale(net: &SupplyChainNetwork, focal: NodeId) -> Result<f64, StatsError> {
    let node = net.node(focal).ok_or(StatsError::UnknownNode(focal))?;
    if node.tier < 3 {
        return Err(StatsError::IneligibleFocal(
            focal,
            format!("tier {} has fewer than two upstream tiers", node.tier),
        ));
    }
    let preds = predecessors(net);
    let direct: BTreeSet<NodeId> = preds[&focal].iter().copied().collect();
    let mut links: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    let mut tier2: BTreeSet<NodeId> = BTreeSet::new();
    for &s1 in &direct {
        for &s2 in &preds[&s1] {
            links.insert((s1, s2));
            tier2.insert(s2);
        }
    }
    if tier2.is_empty() {
        return Err(StatsError::IneligibleFocal(focal, "no tier-two suppliers".into()));
    }
    Ok(links.len() as f64 / tier2.len() as f64)
}

/// Mean and sample standard deviation of the diamond scale over all
/// eligible focal firms; `None` when no firm is eligible.
pub fn diamond_scale_stats(net: &SupplyChainNetwork) -> Option<(f64, f64)> {
    let values: Vec<f64> = net
        .nodes()
        .iter()
        .filter_map(|n| diamond_scale(net, n.id).ok())
        .collect();
    if values.is_empty() {
        return None;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64)
            .sqrt()
    } else {
        0.0
    };
    Some((mean, std))
}

#[derive(Debug, Clone, Serialize)]
pub struct ModularityResult {
    pub q: f64,
    pub communities: Vec<Vec<NodeId>>,
}

impl ModularityResult {
    pub fn community_sizes(&self) -> Vec<usize> {
        self.communities.iter().map(|c| c.len()).collect()
    }

    pub fn median_community_size(&self) -> f64 {
        let mut sizes = self.community_sizes();
        sizes.sort_unstable();
        if sizes.is_empty() {
            return 0.0;
        }
        let mid = sizes.len() / 2;
        if sizes.len() % 2 == 1 {
            sizes[mid] as f64
        } else {
            (sizes[mid - 1] + sizes[mid]) as f64 / 2.0
        }
    }
}

/// Directed modularity of a given node partition:
/// `sum_c [ e_c/m - (out_c * in_c)/m^2 ]`.
pub fn modularity_of_partition(
    net: &SupplyChainNetwork,
    partition: &[Vec<NodeId>],
) -> f64 {
    let m = net.edges().len() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let mut comm_of: BTreeMap<NodeId, usize> = BTreeMap::new();
    for (c, members) in partition.iter().enumerate() {
        for &id in members {
            comm_of.insert(id, c);
        }
    }
    let mut within = vec![0.0; partition.len()];
    let mut out_deg = vec![0.0; partition.len()];
    let mut in_deg = vec![0.0; partition.len()];
    for &(a, b) in net.edges() {
        let (ca, cb) = (comm_of[&a], comm_of[&b]);
        out_deg[ca] += 1.0;
        in_deg[cb] += 1.0;
        if ca == cb {
            within[ca] += 1.0;
        }
    }
    (0..partition.len())
        .map(|c| within[c] / m - out_deg[c] * in_deg[c] / (m * m))
        .sum()
}

/// Greedy agglomerative directed-modularity maximization: start from
/// singleton communities and merge the best pair while the gain is
/// positive.
pub fn modularity(net: &SupplyChainNetwork) -> ModularityResult {
    let ids: Vec<NodeId> = net.node_ids().into_iter().collect();
    let m = net.edges().len() as f64;
    if ids.is_empty() || m == 0.0 {
        return ModularityResult { q: 0.0, communities: ids.iter().map(|&i| vec![i]).collect() };
    }
    let index: BTreeMap<NodeId, usize> =
        ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();

    // community state: member lists, directed degree sums, inter-community
    // edge counts
    let mut members: Vec<Option<Vec<NodeId>>> = ids.iter().map(|&id| Some(vec![id])).collect();
    let mut out_deg: Vec<f64> = vec![0.0; ids.len()];
    let mut in_deg: Vec<f64> = vec![0.0; ids.len()];
    let mut between: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut within: Vec<f64> = vec![0.0; ids.len()];
    for &(a, b) in net.edges() {
        let (ca, cb) = (index[&a], index[&b]);
        out_deg[ca] += 1.0;
        in_deg[cb] += 1.0;
        if ca == cb {
            within[ca] += 1.0;
        } else {
            *between.entry((ca.min(cb), ca.max(cb))).or_insert(0.0) += 1.0;
        }
    }

    loop {
        let mut best: Option<((usize, usize), f64)> = None;
        for (&(a, b), &edges) in &between {
            if members[a].is_none() || members[b].is_none() {
                continue;
            }
            let gain =
                edges / m - (out_deg[a] * in_deg[b] + out_deg[b] * in_deg[a]) / (m * m);
            if best.map_or(true, |(_, g)| gain > g) {
                best = Some(((a, b), gain));
            }
        }
        match best {
            Some(((a, b), gain)) if gain > 1e-12 => {
                let moved = members[b].take().unwrap();
                members[a].as_mut().unwrap().extend(moved);
                within[a] += within[b] + between.remove(&(a.min(b), a.max(b))).unwrap_or(0.0);
                out_deg[a] += out_deg[b];
                in_deg[a] += in_deg[b];
                // redirect b's inter-community counts to a
                let stale: Vec<((usize, usize), f64)> = between
                    .range((b, 0)..=(b, usize::MAX))
                    .map(|(&k, &v)| (k, v))
                    .chain(
                        between
                            .iter()
                            .filter(|(&(_, y), _)| y == b)
                            .map(|(&k, &v)| (k, v)),
                    )
                    .collect();
                for (key, v) in stale {
                    between.remove(&key);
                    let other = if key.0 == b { key.1 } else { key.0 };
                    if other == a {
                        within[a] += v;
                    } else {
                        *between.entry((a.min(other), a.max(other))).or_insert(0.0) += v;
                    }
                }
            }
            _ => break,
        }
    }

    let communities: Vec<Vec<NodeId>> = members.into_iter().flatten().collect();
    let q = modularity_of_partition(net, &communities);
    ModularityResult { q, communities }
}

/// Pearson correlation; `None` when either side has zero variance or there
/// are fewer than two samples.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    if vx <= 0.0 || vy <= 0.0 {
        return None;
    }
    Some(cov / (vx.sqrt() * vy.sqrt()))
}

/// The four directed degree assortativities plus the path-count
/// assortativity. Each coefficient correlates a source attribute with a
/// target attribute across directed edges; degenerate (zero variance)
/// coefficients are reported as `None`.
#[derive(Debug, Clone, Serialize)]
pub struct AssortativityReport {
    pub in_in: Option<f64>,
    pub in_out: Option<f64>,
    pub out_in: Option<f64>,
    pub out_out: Option<f64>,
    /// Correlation of flow-weighted path counts through the endpoints.
    pub path_count: Option<f64>,
}

pub fn assortativity(net: &SupplyChainNetwork) -> AssortativityReport {
    let mut indeg: BTreeMap<NodeId, f64> = net.nodes().iter().map(|n| (n.id, 0.0)).collect();
    let mut outdeg = indeg.clone();
    for &(a, b) in net.edges() {
        *outdeg.get_mut(&a).unwrap() += 1.0;
        *indeg.get_mut(&b).unwrap() += 1.0;
    }
    // flow-weighted so duplicate chains kept as multiplicity still count
    let mut path_weight: BTreeMap<NodeId, f64> =
        net.nodes().iter().map(|n| (n.id, 0.0)).collect();
    for path in net.paths() {
        let w = path.flow.to_f64().unwrap_or(0.0);
        for id in &path.nodes {
            *path_weight.get_mut(id).unwrap() += w;
        }
    }

    let edges: Vec<(NodeId, NodeId)> = net.edges().iter().copied().collect();
    let col = |attr: &BTreeMap<NodeId, f64>, source: bool| -> Vec<f64> {
        edges
            .iter()
            .map(|&(a, b)| attr[if source { &a } else { &b }])
            .collect()
    };
    let src_in = col(&indeg, true);
    let src_out = col(&outdeg, true);
    let dst_in = col(&indeg, false);
    let dst_out = col(&outdeg, false);
    let src_pc = col(&path_weight, true);
    let dst_pc = col(&path_weight, false);

    AssortativityReport {
        in_in: pearson(&src_in, &dst_in),
        in_out: pearson(&src_in, &dst_out),
        out_in: pearson(&src_out, &dst_in),
        out_out: pearson(&src_out, &dst_out),
        path_count: pearson(&src_pc, &dst_pc),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{NetNode, Path, SupplyChainNetwork};
    use crate::ratio::rational_from_u64;
    use num::rational::BigRational;
    use num::One;

    fn nid(v: u64) -> NodeId {
        NodeId(v)
    }

    fn net_from(
        k: u32,
        tiers: &[(u64, u32)],
        edges: &[(u64, u64)],
        paths: &[&[u64]],
    ) -> SupplyChainNetwork {
        let nodes = tiers
            .iter()
            .map(|&(id, tier)| NetNode { id: nid(id), tier, cost: BigRational::one() })
            .collect();
        let edge_list: Vec<_> = edges.iter().map(|&(a, b)| (nid(a), nid(b))).collect();
        let path_list = paths
            .iter()
            .map(|nodes| Path {
                nodes: nodes.iter().map(|&v| nid(v)).collect(),
                flow: rational_from_u64(1),
            })
            .collect();
        SupplyChainNetwork::new(k, nodes, edge_list, path_list).unwrap()
    }

    #[test]
    fn diamond_scale_is_one_on_trees() {
        // 1 -> 3, 2 -> 4, 3 -> 5, 4 -> 5: two disjoint branches into focal 5
        let net = net_from(
            3,
            &[(1, 1), (2, 1), (3, 2), (4, 2), (5, 3)],
            &[(1, 3), (2, 4), (3, 5), (4, 5)],
            &[&[1, 3, 5], &[2, 4, 5]],
        );
        assert_eq!(diamond_scale(&net, nid(5)).unwrap(), 1.0);
    }

    #[test]
    fn shared_tier_two_supplier_doubles_the_scale() {
        // one tier-2 supplier feeding both direct suppliers
        let net = net_from(
            3,
            &[(1, 1), (3, 2), (4, 2), (5, 3)],
            &[(1, 3), (1, 4), (3, 5), (4, 5)],
            &[&[1, 3, 5], &[1, 4, 5]],
        );
        assert_eq!(diamond_scale(&net, nid(5)).unwrap(), 2.0);
        assert!(diamond_scale(&net, nid(3)).is_err());
    }

    #[test]
    fn modularity_recovers_two_clusters() {
        // two parallel chains with no cross edges
        let net = net_from(
            3,
            &[(1, 1), (2, 2), (3, 3), (4, 1), (5, 2), (6, 3)],
            &[(1, 2), (2, 3), (4, 5), (5, 6)],
            &[&[1, 2, 3], &[4, 5, 6]],
        );
        let result = modularity(&net);
        let mut sizes = result.community_sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![3, 3]);
        assert!(result.q > 0.0);
    }

    #[test]
    fn single_edge_has_no_positive_split() {
        let net = net_from(2, &[(1, 1), (2, 2)], &[(1, 2)], &[&[1, 2]]);
        let split = vec![vec![nid(1)], vec![nid(2)]];
        assert!(modularity_of_partition(&net, &split) <= 0.0);
        let merged = vec![vec![nid(1), nid(2)]];
        assert!(modularity_of_partition(&net, &merged) <= 0.0 + 1e-12);
    }

    #[test]
    fn regular_tiers_have_undefined_degree_assortativity() {
        // complete bipartite between two 2-node tiers: every degree equal
        let net = net_from(
            2,
            &[(1, 1), (2, 1), (3, 2), (4, 2)],
            &[(1, 3), (1, 4), (2, 3), (2, 4)],
            &[&[1, 3], &[1, 4], &[2, 3], &[2, 4]],
        );
        let rep = assortativity(&net);
        assert_eq!(rep.out_in, None);
        assert_eq!(rep.in_out, None);
    }

    #[test]
    fn hub_fan_in_is_strongly_disassortative() {
        // hub 1 feeds three middles, all converging on sink 5
        let net = net_from(
            3,
            &[(1, 1), (2, 2), (3, 2), (4, 2), (5, 3)],
            &[(1, 2), (1, 3), (1, 4), (2, 5), (3, 5), (4, 5)],
            &[&[1, 2, 5], &[1, 3, 5], &[1, 4, 5]],
        );
        let rep = assortativity(&net);
        assert!(rep.out_in.unwrap() < -0.9);
    }
}
