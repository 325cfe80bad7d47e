//! Random generative model for supply chain networks, the deterministic
//! worst-case graph over fixed firm positions, degree-distribution fitting,
//! and the treewidth scaling experiment.
//!
//! Firms specialize at points on the unit interval, one sample set per
//! tier; each product is a point too and its supply chain picks the nearest
//! firm per tier. The auxiliary graph is generated directly (one path-node
//! per product), and the derived network merges duplicate chains with flow
//! equal to multiplicity.

use std::collections::BTreeMap;

use num::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::auxgraph::{AuxGraph, AuxId, AuxKind, AuxNode, SeedClass};
use crate::net::{CostMode, NetNode, NodeId, Path, SupplyChainNetwork};
use crate::ratio::rational_from_u64;
use crate::treedec::{decompose, Heuristic};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("bad generator config: {0}")]
    BadConfig(String),
    #[error("empty sample")]
    EmptySample,
}

/// How many paths to draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathCount {
    Explicit(usize),
    /// `m = round(n^alpha)`.
    Alpha(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomModelConfig {
    pub tier_sizes: Vec<usize>,
    pub paths: PathCount,
    pub seed: u64,
}

impl RandomModelConfig {
    /// `n` nodes spread over `k` tiers as evenly as possible.
    pub fn uniform(n: usize, k: u32, paths: PathCount, seed: u64) -> Self {
        let k = k as usize;
        let base = n / k;
        let extra = n % k;
        let tier_sizes = (0..k).map(|t| base + usize::from(t < extra)).collect();
        RandomModelConfig { tier_sizes, paths, seed }
    }

    pub fn n(&self) -> usize {
        self.tier_sizes.iter().sum()
    }

    pub fn k(&self) -> u32 {
        self.tier_sizes.len() as u32
    }

    pub fn path_count(&self) -> usize {
        match self.paths {
            PathCount::Explicit(m) => m,
            PathCount::Alpha(alpha) => (self.n() as f64).powf(alpha).round() as usize,
        }
    }
}

/// Sorted firm specialization coordinates, one list per tier.
#[derive(Debug, Clone, PartialEq)]
pub struct Positions {
    pub tiers: Vec<Vec<f64>>,
}

impl Positions {
    pub fn sample(tier_sizes: &[usize], rng: &mut impl Rng) -> Self {
        let tiers = tier_sizes
            .iter()
            .map(|&s| {
                let mut v: Vec<f64> = (0..s).map(|_| rng.gen::<f64>()).collect();
                v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                v
            })
            .collect();
        Positions { tiers }
    }

    pub fn k(&self) -> u32 {
        self.tiers.len() as u32
    }

    pub fn n(&self) -> usize {
        self.tiers.iter().map(|t| t.len()).sum()
    }

    /// Index of the firm nearest to `z` in `tier` (ties to the left).
    pub fn nearest(&self, tier: usize, z: f64) -> usize {
        let coords = &self.tiers[tier];
        let right = coords.partition_point(|&y| y < z);
        if right == 0 {
            return 0;
        }
        if right == coords.len() {
            return coords.len() - 1;
        }
        let left = right - 1;
        if (z - coords[left]) <= (coords[right] - z) {
            left
        } else {
            right
        }
    }

    /// Node id of firm `idx` in 0-based `tier` (tier-major, ids from 1).
    pub fn node_id(&self, tier: usize, idx: usize) -> NodeId {
        let offset: usize = self.tiers[..tier].iter().map(|t| t.len()).sum();
        NodeId((offset + idx) as u64 + 1)
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedInstance {
    pub positions: Positions,
    pub path_coords: Vec<f64>,
    /// Per path, the picked firm index in each tier.
    pub picks: Vec<Vec<usize>>,
    /// Direct auxiliary graph: one path-node per drawn path, duplicates kept.
    pub aux: AuxGraph,
    /// Derived network: distinct chains only, flow = multiplicity, unit costs.
    pub network: SupplyChainNetwork,
    pub multiplicity: BTreeMap<Vec<NodeId>, u64>,
}

/// Draw an instance of the random model. Reproducible: the same config
/// always yields the same instance.
pub fn generate(cfg: &RandomModelConfig) -> Result<GeneratedInstance, GenError> {
    validate_config(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let positions = Positions::sample(&cfg.tier_sizes, &mut rng);
    let m = cfg.path_count();
    let path_coords: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
    Ok(instantiate(positions, path_coords))
}

/// Draw only the product points over externally fixed firm positions.
pub fn generate_with_positions(
    positions: &Positions,
    m: usize,
    seed: u64,
) -> Result<GeneratedInstance, GenError> {
    if m == 0 {
        return Err(GenError::BadConfig("need at least one path".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let path_coords: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
    Ok(instantiate(positions.clone(), path_coords))
}

fn validate_config(cfg: &RandomModelConfig) -> Result<(), GenError> {
    if cfg.tier_sizes.is_empty() || cfg.tier_sizes.iter().any(|&s| s == 0) {
        return Err(GenError::BadConfig("every tier needs at least one node".into()));
    }
    if cfg.path_count() == 0 {
        return Err(GenError::BadConfig("need at least one path".into()));
    }
    Ok(())
}

fn instantiate(positions: Positions, path_coords: Vec<f64>) -> GeneratedInstance {
    let k = positions.k() as usize;
    let picks: Vec<Vec<usize>> = path_coords
        .iter()
        .map(|&z| (0..k).map(|t| positions.nearest(t, z)).collect())
        .collect();

    let mut multiplicity: BTreeMap<Vec<NodeId>, u64> = BTreeMap::new();
    for pick in &picks {
        let tuple: Vec<NodeId> =
            pick.iter().enumerate().map(|(t, &i)| positions.node_id(t, i)).collect();
        *multiplicity.entry(tuple).or_insert(0) += 1;
    }

    let aux = direct_aux(&positions, &picks);
    let network = derived_network(&positions, &multiplicity);
    GeneratedInstance { positions, path_coords, picks, aux, network, multiplicity }
}

/// The generated auxiliary graph itself: path-nodes with threshold k-1,
/// one singleton node-node per firm, unit weights.
fn direct_aux(positions: &Positions, picks: &[Vec<usize>]) -> AuxGraph {
    let k = positions.k();
    let m = picks.len();
    let mut nodes: Vec<AuxNode> = (0..m)
        .map(|r| AuxNode {
            kind: AuxKind::PathNode { path: r },
            cont: vec![],
            threshold: k as u64 - 1,
        })
        .collect();
    let mut firm_aux: BTreeMap<NodeId, AuxId> = BTreeMap::new();
    let mut on_path: BTreeMap<NodeId, bool> = BTreeMap::new();
    for t in 0..k as usize {
        for i in 0..positions.tiers[t].len() {
            let id = positions.node_id(t, i);
            firm_aux.insert(id, nodes.len() as AuxId);
            on_path.insert(id, false);
            nodes.push(AuxNode {
                kind: AuxKind::NodeNode { class: SeedClass::Normal },
                cont: vec![id],
                threshold: 1,
            });
        }
    }
    let mut edges = Vec::new();
    for (r, pick) in picks.iter().enumerate() {
        for (t, &i) in pick.iter().enumerate() {
            let firm = positions.node_id(t, i);
            on_path.insert(firm, true);
            let nn = firm_aux[&firm];
            edges.push((r as AuxId, nn, 1));
            edges.push((nn, r as AuxId, 1));
        }
    }
    let mut forced = Vec::new();
    for (id, &hit) in &on_path {
        if !hit {
            forced.push(*id);
            let aux_id = firm_aux[id];
            nodes[aux_id as usize].threshold = 0;
            nodes[aux_id as usize].kind = AuxKind::NodeNode { class: SeedClass::Forced };
        }
    }
    AuxGraph::from_parts(CostMode::Epsilon, k, nodes, edges, forced, vec![])
}

fn derived_network(
    positions: &Positions,
    multiplicity: &BTreeMap<Vec<NodeId>, u64>,
) -> SupplyChainNetwork {
    let k = positions.k();
    let mut nodes = Vec::new();
    for t in 0..k as usize {
        for i in 0..positions.tiers[t].len() {
            nodes.push(NetNode {
                id: positions.node_id(t, i),
                tier: t as u32 + 1,
                cost: num::rational::BigRational::one(),
            });
        }
    }
    let mut edges = Vec::new();
    let mut paths = Vec::new();
    for (tuple, &mult) in multiplicity {
        for pair in tuple.windows(2) {
            edges.push((pair[0], pair[1]));
        }
        paths.push(Path { nodes: tuple.clone(), flow: rational_from_u64(mult) });
    }
    SupplyChainNetwork::new(k, nodes, edges, paths).expect("generated network is well formed")
}

/// The deterministic supergraph of every instance over fixed positions.
#[derive(Debug, Clone)]
pub struct WorstCaseGraph {
    pub positions: Positions,
    /// Interior switch points per tier (midpoints of adjacent firms).
    pub switch_points: Vec<Vec<f64>>,
    /// Count of exactly coinciding switch points (collapsed intervals).
    pub coincident: usize,
    /// One representative product point per interval.
    pub representatives: Vec<f64>,
    pub network: SupplyChainNetwork,
}

/// Build the worst-case graph: consolidate all per-tier switch points on
/// the product segment and realize one path per interval. With pairwise
/// distinct switch points this yields exactly n - k + 1 distinct paths.
pub fn worst_case(positions: &Positions) -> WorstCaseGraph {
    let switch_points: Vec<Vec<f64>> = positions
        .tiers
        .iter()
        .map(|coords| coords.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect())
        .collect();
    let mut all: Vec<f64> = switch_points.iter().flatten().copied().collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let before = all.len();
    all.dedup();
    let coincident = before - all.len();

    let mut boundaries = vec![0.0];
    boundaries.extend(all.iter().copied());
    boundaries.push(1.0);
    let representatives: Vec<f64> =
        boundaries.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect();

    let mut multiplicity: BTreeMap<Vec<NodeId>, u64> = BTreeMap::new();
    for &z in &representatives {
        let tuple: Vec<NodeId> = (0..positions.k() as usize)
            .map(|t| positions.node_id(t, positions.nearest(t, z)))
            .collect();
        *multiplicity.entry(tuple).or_insert(0) += 1;
    }
    // collapse any duplicate tuples back to unit flow: the worst case is
    // structural, one chain per interval
    for (_, v) in multiplicity.iter_mut() {
        *v = 1;
    }
    let network = derived_network(positions, &multiplicity);
    WorstCaseGraph { positions: positions.clone(), switch_points, coincident, representatives, network }
}

/// Exact 1-Wasserstein distance between two empirical distributions,
/// computed as the area between their step CDFs.
pub fn wasserstein_1d(a: &[f64], b: &[f64]) -> Result<f64, GenError> {
    if a.is_empty() || b.is_empty() {
        return Err(GenError::EmptySample);
    }
    let mut av = a.to_vec();
    let mut bv = b.to_vec();
    av.sort_by(|x, y| x.partial_cmp(y).unwrap());
    bv.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (av.len() as f64, bv.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut dist = 0.0;
    let mut prev: Option<f64> = None;
    loop {
        let next = match (av.get(i), bv.get(j)) {
            (None, None) => break,
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (Some(&x), Some(&y)) => x.min(y),
        };
        if let Some(p) = prev {
            dist += (i as f64 / na - j as f64 / nb).abs() * (next - p);
        }
        while av.get(i) == Some(&next) {
            i += 1;
        }
        while bv.get(j) == Some(&next) {
            j += 1;
        }
        prev = Some(next);
    }
    Ok(dist)
}

/// Directed degree sequences of a network.
pub fn degree_samples(net: &SupplyChainNetwork) -> (Vec<f64>, Vec<f64>) {
    let mut indeg: BTreeMap<NodeId, usize> = net.nodes().iter().map(|n| (n.id, 0)).collect();
    let mut outdeg = indeg.clone();
    for &(a, b) in net.edges() {
        *outdeg.get_mut(&a).unwrap() += 1;
        *indeg.get_mut(&b).unwrap() += 1;
    }
    (
        indeg.values().map(|&d| d as f64).collect(),
        outdeg.values().map(|&d| d as f64).collect(),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct AlphaFitRow {
    pub alpha: f64,
    pub dist_in: f64,
    pub dist_out: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AlphaFit {
    pub best_in: f64,
    pub best_out: f64,
    pub rows: Vec<AlphaFitRow>,
}

/// Deterministic per-replication seed derivation.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E3779B97F4A7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }
    mix(master ^ mix(index))
}

/// Fit the path-count exponent: for every grid value, generate `reps`
/// instances with this network's tier sizes, pool the degree samples, and
/// pick the alpha whose pooled distribution is Wasserstein-closest to the
/// network's (independently for in- and out-degrees).
pub fn fit_alpha(
    net: &SupplyChainNetwork,
    alpha_grid: &[f64],
    reps: usize,
    seed: u64,
) -> Result<AlphaFit, GenError> {
    if alpha_grid.is_empty() || reps == 0 {
        return Err(GenError::BadConfig("empty alpha grid or zero reps".into()));
    }
    let mut tier_sizes = vec![0usize; net.k as usize];
    for node in net.nodes() {
        tier_sizes[node.tier as usize - 1] += 1;
    }
    if tier_sizes.iter().any(|&s| s == 0) {
        return Err(GenError::BadConfig("network has an empty tier".into()));
    }
    let (obs_in, obs_out) = degree_samples(net);

    let mut rows = Vec::with_capacity(alpha_grid.len());
    for (ai, &alpha) in alpha_grid.iter().enumerate() {
        let cfg0 = RandomModelConfig {
            tier_sizes: tier_sizes.clone(),
            paths: PathCount::Alpha(alpha),
            seed: 0,
        };
        let m = cfg0.path_count().max(1);
        let mut pooled_in = Vec::new();
        let mut pooled_out = Vec::new();
        for rep in 0..reps {
            let cfg = RandomModelConfig {
                tier_sizes: tier_sizes.clone(),
                paths: PathCount::Explicit(m),
                seed: derive_seed(seed, (ai * reps + rep) as u64),
            };
            let inst = generate(&cfg)?;
            let (di, do_) = degree_samples(&inst.network);
            pooled_in.extend(di);
            pooled_out.extend(do_);
        }
        rows.push(AlphaFitRow {
            alpha,
            dist_in: wasserstein_1d(&pooled_in, &obs_in)?,
            dist_out: wasserstein_1d(&pooled_out, &obs_out)?,
        });
    }
    let best = |f: fn(&AlphaFitRow) -> f64| -> f64 {
        rows.iter()
            .min_by(|a, b| f(a).partial_cmp(&f(b)).unwrap())
            .map(|r| r.alpha)
            .unwrap()
    };
    Ok(AlphaFit { best_in: best(|r| r.dist_in), best_out: best(|r| r.dist_out), rows })
}

#[derive(Debug, Clone, Serialize)]
pub struct TwRow {
    pub n: usize,
    pub k: u32,
    pub alpha: f64,
    pub m: usize,
    pub rep: usize,
    pub seed: u64,
    pub aux_nodes: usize,
    pub width: usize,
    /// `k * (m/n) * ln(n)`, the asymptotic scaling reference.
    pub bound: f64,
}

/// Decompose generated auxiliary graphs over a grid of `(n, k, alpha)`
/// cells and record heuristic width against the scaling reference.
/// Rows come back in deterministic grid-major order.
pub fn treewidth_experiment(
    grid: &[(usize, u32, f64)],
    reps: usize,
    seed: u64,
    heuristic: Heuristic,
) -> Result<Vec<TwRow>, GenError> {
    let mut cells = Vec::new();
    for (ci, &(n, k, alpha)) in grid.iter().enumerate() {
        if k == 0 || n < k as usize {
            return Err(GenError::BadConfig(format!("bad grid cell ({n}, {k})")));
        }
        let m = (n as f64).powf(alpha).ceil() as usize;
        for rep in 0..reps {
            cells.push((n, k, alpha, m, rep, derive_seed(seed, (ci * reps + rep) as u64)));
        }
    }
    let rows: Result<Vec<TwRow>, GenError> = cells
        .par_iter()
        .map(|&(n, k, alpha, m, rep, cell_seed)| {
            let cfg = RandomModelConfig::uniform(n, k, PathCount::Explicit(m), cell_seed);
            let inst = generate(&cfg)?;
            let skeleton = inst.aux.skeleton();
            let td = decompose(&skeleton, heuristic);
            let bound = k as f64 * (m as f64 / n as f64) * (n as f64).ln();
            Ok(TwRow {
                n,
                k,
                alpha,
                m,
                rep,
                seed: cell_seed,
                aux_nodes: inst.aux.len(),
                width: td.width(),
                bound,
            })
        })
        .collect();
    rows
}

pub fn treewidth_rows_csv(rows: &[TwRow]) -> String {
    let mut out = String::from("n,k,alpha,m,rep,seed,aux_nodes,width,bound\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.n, r.k, r.alpha, r.m, r.rep, r.seed, r.aux_nodes, r.width, r.bound
        ));
    }
    out
}

/// Tier sizes after the structure perturbation: per tier, with probability
/// `removal_prob`, half or ninety percent of its nodes (coin flip) are
/// removed and reassigned to uniformly random tiers.
pub fn perturbed_tier_sizes(
    n: usize,
    k: u32,
    removal_prob: f64,
    rng: &mut impl Rng,
) -> Vec<usize> {
    let k = k as usize;
    let base = n / k;
    let extra = n % k;
    let mut sizes: Vec<usize> = (0..k).map(|t| base + usize::from(t < extra)).collect();
    let mut displaced = 0usize;
    for size in sizes.iter_mut() {
        if removal_prob > 0.0 && rng.gen_bool(removal_prob) {
            let frac = if rng.gen_bool(0.5) { 0.5 } else { 0.9 };
            let removed = ((*size as f64) * frac).floor() as usize;
            *size -= removed;
            displaced += removed;
        }
    }
    for _ in 0..displaced {
        let t = rng.gen_range(0..k);
        sizes[t] += 1;
    }
    for t in 0..k {
        if sizes[t] == 0 {
            let donor = (0..k).max_by_key(|&d| sizes[d]).unwrap();
            sizes[donor] -= 1;
            sizes[t] += 1;
        }
    }
    sizes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::validate_network;

    #[test]
    fn generation_is_reproducible() {
        let cfg = RandomModelConfig::uniform(12, 4, PathCount::Alpha(1.2), 99);
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a.path_coords, b.path_coords);
        assert_eq!(a.picks, b.picks);
        assert_eq!(a.multiplicity, b.multiplicity);
    }

    #[test]
    fn figure_scale_instance_has_sane_shape() {
        let cfg = RandomModelConfig::uniform(12, 4, PathCount::Alpha(1.2), 5);
        assert_eq!(cfg.tier_sizes, vec![3, 3, 3, 3]);
        let inst = generate(&cfg).unwrap();
        assert_eq!(inst.network.k, 4);
        assert_eq!(inst.network.nodes().len(), 12);
        let report = validate_network(&inst.network, CostMode::Epsilon);
        assert!(report.is_structurally_valid(), "{:?}", report.issues);
        // every path-node touches exactly one firm per tier
        for pick in &inst.picks {
            assert_eq!(pick.len(), 4);
        }
        for pn in 0..inst.picks.len() as AuxId {
            assert_eq!(inst.aux.in_edges(pn).len(), 4);
        }
    }

    #[test]
    fn single_path_instance_picks_nearest_firms() {
        let cfg = RandomModelConfig::uniform(9, 3, PathCount::Explicit(1), 17);
        let inst = generate(&cfg).unwrap();
        assert_eq!(inst.network.paths().len(), 1);
        let z = inst.path_coords[0];
        for (t, &i) in inst.picks[0].iter().enumerate() {
            let d = (inst.positions.tiers[t][i] - z).abs();
            for &y in &inst.positions.tiers[t] {
                assert!(d <= (y - z).abs() + 1e-12);
            }
        }
    }

    #[test]
    fn worst_case_has_n_minus_k_plus_one_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (n, k) in [(12usize, 4u32), (30, 3), (10, 1)] {
            let sizes = RandomModelConfig::uniform(n, k, PathCount::Explicit(1), 0).tier_sizes;
            let positions = Positions::sample(&sizes, &mut rng);
            let wc = worst_case(&positions);
            assert_eq!(wc.coincident, 0);
            assert_eq!(wc.network.paths().len(), n - k as usize + 1);
        }
    }

    #[test]
    fn generated_instances_stay_inside_the_worst_case() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let sizes = vec![4usize, 4, 4];
        for trial in 0..100 {
            let positions = Positions::sample(&sizes, &mut rng);
            let wc = worst_case(&positions);
            let wc_paths: std::collections::BTreeSet<Vec<NodeId>> =
                wc.network.paths().iter().map(|p| p.nodes.clone()).collect();
            let inst = generate_with_positions(&positions, 20, derive_seed(3, trial)).unwrap();
            for path in inst.network.paths() {
                assert!(wc_paths.contains(&path.nodes));
            }
            for edge in inst.network.edges() {
                assert!(wc.network.edges().contains(edge));
            }
        }
    }

    #[test]
    fn wasserstein_examples() {
        assert_eq!(wasserstein_1d(&[0.0, 1.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((wasserstein_1d(&[0.0], &[1.0]).unwrap() - 1.0).abs() < 1e-12);
        let d = wasserstein_1d(&[0.0, 0.0, 1.0], &[0.0, 1.0, 1.0]).unwrap();
        assert!((d - 1.0 / 3.0).abs() < 1e-12);
        assert!(wasserstein_1d(&[], &[0.0]).is_err());
    }

    #[test]
    fn alpha_fit_prefers_matching_distributions() {
        let truth = generate(&RandomModelConfig::uniform(
            60,
            3,
            PathCount::Alpha(1.2),
            41,
        ))
        .unwrap();
        let fit = fit_alpha(&truth.network, &[0.8, 1.2, 1.6], 6, 7).unwrap();
        assert_eq!(fit.rows.len(), 3);
        assert_eq!(fit.best_in, 1.2);
    }

    #[test]
    fn tw_experiment_rows_are_complete_and_deterministic() {
        let grid = [(30usize, 3u32, 1.1f64)];
        let a = treewidth_experiment(&grid, 3, 11, Heuristic::MinDegree).unwrap();
        let b = treewidth_experiment(&grid, 3, 11, Heuristic::MinDegree).unwrap();
        assert_eq!(a.len(), 3);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.width, y.width);
            assert!(x.bound > 0.0);
        }
        let csv = treewidth_rows_csv(&a);
        assert!(csv.starts_with("n,k,alpha,m,rep,seed,aux_nodes,width,bound\n"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn perturbation_preserves_node_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let sizes = perturbed_tier_sizes(60, 3, 0.25, &mut rng);
            assert_eq!(sizes.iter().sum::<usize>(), 60);
            assert!(sizes.iter().all(|&s| s >= 1));
        }
    }
}
