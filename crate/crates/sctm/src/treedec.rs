//! Tree decompositions: heuristic construction, validation, PACE 2016
//! text formats, and conversion to the uniform-bag nice form the dynamic
//! program runs on.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

/// Simple undirected graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedGraph {
    adj: Vec<BTreeSet<usize>>,
}

impl UndirectedGraph {
    pub fn new(n: usize) -> Self {
        UndirectedGraph { adj: vec![BTreeSet::new(); n] }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = UndirectedGraph::new(n);
        for (a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        assert!(a < self.n() && b < self.n(), "edge ({a}, {b}) out of range");
        if a == b {
            return;
        }
        self.adj[a].insert(b);
        self.adj[b].insert(a);
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|s| s.len()).sum::<usize>() / 2
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (a, nbrs) in self.adj.iter().enumerate() {
            for &b in nbrs.range(a + 1..) {
                out.push((a, b));
            }
        }
        out
    }
}

/// Tree of bags over graph vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    pub bags: Vec<BTreeSet<usize>>,
    /// Undirected tree edges between bag indices.
    pub edges: Vec<(usize, usize)>,
}

impl TreeDecomposition {
    pub fn width(&self) -> usize {
        self.bags.iter().map(|b| b.len()).max().unwrap_or(1).saturating_sub(1)
    }

    pub fn bag_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.bags.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Heuristic {
    MinFill,
    MinDegree,
}

impl std::str::FromStr for Heuristic {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "min-fill" => Ok(Heuristic::MinFill),
            "min-degree" => Ok(Heuristic::MinDegree),
            other => Err(format!("unknown heuristic {other:?} (use min-fill or min-degree)")),
        }
    }
}

/// Heuristic tree decomposition via an elimination ordering. Always
/// succeeds; the result is validated before being returned.
pub fn decompose(g: &UndirectedGraph, heuristic: Heuristic) -> TreeDecomposition {
    let n = g.n();
    if n == 0 {
        return TreeDecomposition { bags: vec![BTreeSet::new()], edges: vec![] };
    }
    let mut adj: Vec<BTreeSet<usize>> = (0..n).map(|v| g.neighbors(v).clone()).collect();
    let mut alive: Vec<bool> = vec![true; n];
    let mut fill: Vec<usize> = vec![0; n];
    let mut dirty: Vec<bool> = vec![true; n];

    let fill_count = |adj: &[BTreeSet<usize>], v: usize| -> usize {
        let nbrs: Vec<usize> = adj[v].iter().copied().collect();
        let mut missing = 0;
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if !adj[a].contains(&b) {
                    missing += 1;
                }
            }
        }
        missing
    };

    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut elim_pos: Vec<usize> = vec![usize::MAX; n];
    let mut bags: Vec<BTreeSet<usize>> = Vec::with_capacity(n);
    let mut bag_nbrs: Vec<Vec<usize>> = Vec::with_capacity(n);

    for round in 0..n {
        let pick = match heuristic {
            Heuristic::MinDegree => (0..n)
                .filter(|&v| alive[v])
                .min_by_key(|&v| (adj[v].len(), v))
                .unwrap(),
            Heuristic::MinFill => {
                for v in 0..n {
                    if alive[v] && dirty[v] {
                        fill[v] = fill_count(&adj, v);
                        dirty[v] = false;
                    }
                }
                (0..n).filter(|&v| alive[v]).min_by_key(|&v| (fill[v], v)).unwrap()
            }
        };

        let nbrs: Vec<usize> = adj[pick].iter().copied().collect();
        let mut bag: BTreeSet<usize> = nbrs.iter().copied().collect();
        bag.insert(pick);
        bags.push(bag);
        bag_nbrs.push(nbrs.clone());
        order.push(pick);
        elim_pos[pick] = round;

        let mut new_edges = Vec::new();
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if adj[a].insert(b) {
                    adj[b].insert(a);
                    new_edges.push((a, b));
                }
            }
        }
        for &a in &nbrs {
            adj[a].remove(&pick);
            dirty[a] = true;
        }
        // a new edge (a, b) removes the missing pair from every common neighbor
        for (a, b) in new_edges {
            if adj[a].len() <= adj[b].len() {
                for &u in &adj[a] {
                    if adj[b].contains(&u) {
                        dirty[u] = true;
                    }
                }
            } else {
                for &u in &adj[b] {
                    if adj[a].contains(&u) {
                        dirty[u] = true;
                    }
                }
            }
        }
        alive[pick] = false;
        adj[pick].clear();
    }

    // bag of v attaches to the bag of its first-eliminated remaining neighbor
    let mut edges = Vec::new();
    let mut roots = Vec::new();
    for round in 0..n {
        match bag_nbrs[round].iter().map(|&u| elim_pos[u]).min() {
            Some(parent_round) => edges.push((round, parent_round)),
            None => roots.push(round),
        }
    }
    for pair in roots.windows(2) {
        edges.push((pair[0], pair[1]));
    }

    let td = TreeDecomposition { bags, edges };
    debug_assert!(validate_decomposition(g, &td).is_valid());
    td
}

/// A violated decomposition property with a concrete witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum DecompositionViolation {
    NotATree { detail: String },
    MissingVertex { vertex: usize },
    UncoveredEdge { a: usize, b: usize },
    DisconnectedOccurrences { vertex: usize },
    ForeignVertex { bag: usize, vertex: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionReport {
    pub width: usize,
    pub violations: Vec<DecompositionViolation>,
}

impl DecompositionReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check the three tree decomposition properties against `g`.
pub fn validate_decomposition(g: &UndirectedGraph, td: &TreeDecomposition) -> DecompositionReport {
    let mut violations = Vec::new();
    let b = td.bags.len();

    for &(x, y) in &td.edges {
        if x >= b || y >= b {
            violations.push(DecompositionViolation::NotATree {
                detail: format!("tree edge ({x}, {y}) references a missing bag"),
            });
            return DecompositionReport { width: td.width(), violations };
        }
    }
    if td.edges.len() + 1 != b {
        violations.push(DecompositionViolation::NotATree {
            detail: format!("{} bags but {} tree edges", b, td.edges.len()),
        });
    } else {
        let adj = td.bag_adjacency();
        let mut seen = vec![false; b];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    queue.push_back(y);
                }
            }
        }
        if count != b {
            violations.push(DecompositionViolation::NotATree {
                detail: "bag tree is disconnected".into(),
            });
        }
    }

    let mut covered = vec![false; g.n()];
    for (i, bag) in td.bags.iter().enumerate() {
        for &v in bag {
            if v >= g.n() {
                violations.push(DecompositionViolation::ForeignVertex { bag: i, vertex: v });
            } else {
                covered[v] = true;
            }
        }
    }
    for (v, &c) in covered.iter().enumerate() {
        if !c {
            violations.push(DecompositionViolation::MissingVertex { vertex: v });
        }
    }

    for (a, b2) in g.edges() {
        if !td.bags.iter().any(|bag| bag.contains(&a) && bag.contains(&b2)) {
            violations.push(DecompositionViolation::UncoveredEdge { a, b: b2 });
        }
    }

    // property (c): the bags containing v induce a connected subtree
    let adj = td.bag_adjacency();
    for v in 0..g.n() {
        let holders: Vec<usize> =
            (0..b).filter(|&i| td.bags[i].contains(&v)).collect();
        if holders.len() <= 1 {
            continue;
        }
        let inside: BTreeSet<usize> = holders.iter().copied().collect();
        let mut seen = BTreeSet::from([holders[0]]);
        let mut queue = VecDeque::from([holders[0]]);
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if inside.contains(&y) && seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        if seen.len() != holders.len() {
            violations.push(DecompositionViolation::DisconnectedOccurrences { vertex: v });
        }
    }

    DecompositionReport { width: td.width(), violations }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PaceError {
    #[error("malformed header: {0}")]
    Header(String),
    #[error("line {0}: {1}")]
    Line(usize, String),
    #[error("vertex {0} out of range 1..={1}")]
    VertexRange(usize, usize),
    #[error("bag id {0} out of range 1..={1}")]
    BagRange(usize, usize),
    #[error("tree decomposition is disconnected")]
    Disconnected,
}

/// Read a PACE 2016 `.gr` graph (`p tw <n> <m>`, then `u v` lines).
pub fn read_gr_pace(text: &str) -> Result<UndirectedGraph, PaceError> {
    let mut graph: Option<UndirectedGraph> = None;
    let mut declared_edges = 0usize;
    let mut seen_edges = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('p') {
            if graph.is_some() {
                return Err(PaceError::Line(lineno + 1, "duplicate p line".into()));
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[1] != "tw" {
                return Err(PaceError::Header(line.into()));
            }
            let n: usize =
                parts[2].parse().map_err(|_| PaceError::Header(line.into()))?;
            declared_edges =
                parts[3].parse().map_err(|_| PaceError::Header(line.into()))?;
            graph = Some(UndirectedGraph::new(n));
            continue;
        }
        let g = graph
            .as_mut()
            .ok_or_else(|| PaceError::Line(lineno + 1, "edge before p line".into()))?;
        let mut it = line.split_whitespace();
        let a: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| PaceError::Line(lineno + 1, "expected edge".into()))?;
        let b: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| PaceError::Line(lineno + 1, "expected edge".into()))?;
        if it.next().is_some() {
            return Err(PaceError::Line(lineno + 1, "trailing tokens".into()));
        }
        for v in [a, b] {
            if v == 0 || v > g.n() {
                return Err(PaceError::VertexRange(v, g.n()));
            }
        }
        if a != b {
            g.add_edge(a - 1, b - 1);
        }
        seen_edges += 1;
    }
    let g = graph.ok_or_else(|| PaceError::Header("missing p line".into()))?;
    if seen_edges != declared_edges {
        return Err(PaceError::Header(format!(
            "declared {declared_edges} edges, found {seen_edges}"
        )));
    }
    Ok(g)
}

pub fn write_gr_pace(g: &UndirectedGraph) -> String {
    let mut out = format!("p tw {} {}\n", g.n(), g.edge_count());
    for (a, b) in g.edges() {
        out.push_str(&format!("{} {}\n", a + 1, b + 1));
    }
    out
}

/// Read a PACE 2016 `.td` file. Returns the decomposition and the declared
/// vertex count of the underlying graph.
pub fn read_td_pace(text: &str) -> Result<(TreeDecomposition, usize), PaceError> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut bags: Vec<BTreeSet<usize>> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('s') {
            if header.is_some() {
                return Err(PaceError::Line(lineno + 1, "duplicate s line".into()));
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 5 || parts[1] != "td" {
                return Err(PaceError::Header(line.into()));
            }
            let nb: usize = parts[2].parse().map_err(|_| PaceError::Header(line.into()))?;
            let width_plus: usize =
                parts[3].parse().map_err(|_| PaceError::Header(line.into()))?;
            let nv: usize = parts[4].parse().map_err(|_| PaceError::Header(line.into()))?;
            bags = vec![BTreeSet::new(); nb];
            header = Some((nb, width_plus, nv));
            continue;
        }
        let (nb, _, nv) =
            header.ok_or_else(|| PaceError::Line(lineno + 1, "content before s line".into()))?;
        if let Some(rest) = line.strip_prefix("b ").or(if line == "b" { Some("") } else { None }) {
            let mut it = rest.split_whitespace();
            let id: usize = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| PaceError::Line(lineno + 1, "bag without id".into()))?;
            if id == 0 || id > nb {
                return Err(PaceError::BagRange(id, nb));
            }
            for tok in it {
                let v: usize = tok
                    .parse()
                    .map_err(|_| PaceError::Line(lineno + 1, format!("bad vertex {tok:?}")))?;
                if v == 0 || v > nv {
                    return Err(PaceError::VertexRange(v, nv));
                }
                bags[id - 1].insert(v - 1);
            }
        } else {
            let mut it = line.split_whitespace();
            let a: usize = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| PaceError::Line(lineno + 1, "expected tree edge".into()))?;
            let b: usize = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| PaceError::Line(lineno + 1, "expected tree edge".into()))?;
            if it.next().is_some() {
                return Err(PaceError::Line(lineno + 1, "trailing tokens".into()));
            }
            for id in [a, b] {
                if id == 0 || id > nb {
                    return Err(PaceError::BagRange(id, nb));
                }
            }
            edges.push((a - 1, b - 1));
        }
    }
    let (nb, _, nv) = header.ok_or_else(|| PaceError::Header("missing s line".into()))?;
    let td = TreeDecomposition { bags, edges };
    if nb > 0 {
        let adj = td.bag_adjacency();
        let mut seen = vec![false; nb];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    queue.push_back(y);
                }
            }
        }
        if count != nb {
            return Err(PaceError::Disconnected);
        }
    }
    Ok((td, nv))
}

pub fn write_td_pace(td: &TreeDecomposition, n_vertices: usize) -> String {
    let mut out = format!(
        "s td {} {} {}\n",
        td.bags.len(),
        td.bags.iter().map(|b| b.len()).max().unwrap_or(0),
        n_vertices
    );
    for (i, bag) in td.bags.iter().enumerate() {
        out.push_str(&format!("b {}", i + 1));
        for &v in bag {
            out.push_str(&format!(" {}", v + 1));
        }
        out.push('\n');
    }
    for &(a, b) in &td.edges {
        out.push_str(&format!("{} {}\n", a + 1, b + 1));
    }
    out
}

/// Node type in a nice tree decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NiceKind {
    Leaf,
    /// One child; `enters` (in this bag) replaces `leaves` (in the child's
    /// bag) at position `slot`.
    Replace { child: usize, slot: usize, enters: usize, leaves: usize },
    Join { left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NiceNode {
    /// Slot-ordered bag; position is the slot index used by the DP vectors.
    pub bag: Vec<usize>,
    pub kind: NiceKind,
}

/// Rooted decomposition with uniform bag size and only leaf/replace/join
/// nodes; slot assignments are consistent along replace and join edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NiceTreeDecomposition {
    pub nodes: Vec<NiceNode>,
    pub root: usize,
    pub omega: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NiceError {
    #[error("nice decomposition invalid: {0}")]
    Invalid(String),
}

impl NiceTreeDecomposition {
    pub fn from_parts(nodes: Vec<NiceNode>, root: usize) -> Result<Self, NiceError> {
        let omega = nodes.get(root).map(|n| n.bag.len()).unwrap_or(0);
        let ntd = NiceTreeDecomposition { nodes, root, omega };
        ntd.check()?;
        Ok(ntd)
    }

    fn check(&self) -> Result<(), NiceError> {
        let fail = |msg: String| Err(NiceError::Invalid(msg));
        if self.root >= self.nodes.len() {
            return fail("root out of range".into());
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if node.bag.len() != self.omega {
                return fail(format!("bag {i} has size {} != omega", node.bag.len()));
            }
            let distinct: BTreeSet<usize> = node.bag.iter().copied().collect();
            if distinct.len() != node.bag.len() {
                return fail(format!("bag {i} repeats an element"));
            }
            match &node.kind {
                NiceKind::Leaf => {}
                NiceKind::Replace { child, slot, enters, leaves } => {
                    let child = &self.nodes[*child];
                    if *slot >= self.omega
                        || node.bag[*slot] != *enters
                        || child.bag[*slot] != *leaves
                        || enters == leaves
                    {
                        return fail(format!("replace node {i} has an inconsistent swap"));
                    }
                    for s in 0..self.omega {
                        if s != *slot && node.bag[s] != child.bag[s] {
                            return fail(format!("replace node {i} changes more than one slot"));
                        }
                    }
                }
                NiceKind::Join { left, right } => {
                    if self.nodes[*left].bag != node.bag || self.nodes[*right].bag != node.bag {
                        return fail(format!("join node {i} has differing child bags"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Node indices with every child before its parent.
    pub fn post_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((idx, expanded)) = stack.pop() {
            if expanded {
                out.push(idx);
                continue;
            }
            stack.push((idx, true));
            match &self.nodes[idx].kind {
                NiceKind::Leaf => {}
                NiceKind::Replace { child, .. } => stack.push((*child, false)),
                NiceKind::Join { left, right } => {
                    stack.push((*right, false));
                    stack.push((*left, false));
                }
            }
        }
        out
    }

    /// Flatten back to an ordinary decomposition (for validation/export).
    pub fn to_tree_decomposition(&self) -> TreeDecomposition {
        let bags = self.nodes.iter().map(|n| n.bag.iter().copied().collect()).collect();
        let mut edges = Vec::new();
        for (i, node) in self.nodes.iter().enumerate() {
            match &node.kind {
                NiceKind::Leaf => {}
                NiceKind::Replace { child, .. } => edges.push((i, *child)),
                NiceKind::Join { left, right } => {
                    edges.push((i, *left));
                    edges.push((i, *right));
                }
            }
        }
        TreeDecomposition { bags, edges }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let nodes: Vec<serde_json::Value> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| match &n.kind {
                NiceKind::Leaf => serde_json::json!({"id": i, "kind": "leaf", "bag": n.bag}),
                NiceKind::Replace { child, slot, enters, leaves } => serde_json::json!({
                    "id": i, "kind": "replace", "bag": n.bag, "child": child,
                    "slot": slot, "enters": enters, "leaves": leaves,
                }),
                NiceKind::Join { left, right } => serde_json::json!({
                    "id": i, "kind": "join", "bag": n.bag, "left": left, "right": right,
                }),
            })
            .collect();
        serde_json::json!({"omega": self.omega, "root": self.root, "nodes": nodes})
    }
}

/// Centroid of the bag tree: minimizes the largest remaining component,
/// which keeps the number of simultaneously live DP tables small.
fn centroid(td: &TreeDecomposition) -> usize {
    let b = td.bags.len();
    if b <= 1 {
        return 0;
    }
    let adj = td.bag_adjacency();
    let mut sizes = vec![1usize; b];
    let mut order = Vec::with_capacity(b);
    let mut parent = vec![usize::MAX; b];
    let mut stack = vec![0usize];
    let mut seen = vec![false; b];
    seen[0] = true;
    while let Some(x) = stack.pop() {
        order.push(x);
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                parent[y] = x;
                stack.push(y);
            }
        }
    }
    for &x in order.iter().rev() {
        if parent[x] != usize::MAX {
            sizes[parent[x]] += sizes[x];
        }
    }
    (0..b)
        .min_by_key(|&x| {
            let mut worst = b - sizes[x];
            for &y in &adj[x] {
                if parent[y] == x {
                    worst = worst.max(sizes[y]);
                }
            }
            (worst, x)
        })
        .unwrap()
}

/// Convert a valid tree decomposition into a nice one of the same width:
/// every bag padded to exactly `omega` elements, single-swap replace chains
/// between differing adjacent bags, and joins binarized right-leaning.
pub fn to_nice(
    td: &TreeDecomposition,
    g: &UndirectedGraph,
    root: Option<usize>,
) -> Result<NiceTreeDecomposition, NiceError> {
    let report = validate_decomposition(g, td);
    if !report.is_valid() {
        return Err(NiceError::Invalid(format!(
            "input decomposition invalid: {:?}",
            report.violations[0]
        )));
    }
    let b = td.bags.len();
    let root_bag = match root {
        Some(r) if r < b => r,
        Some(r) => return Err(NiceError::Invalid(format!("root bag {r} out of range"))),
        None => centroid(td),
    };
    let omega = td.bags.iter().map(|bag| bag.len()).max().unwrap_or(0);

    // orient the tree
    let adj = td.bag_adjacency();
    let mut parent = vec![usize::MAX; b];
    let mut bfs_order = vec![root_bag];
    let mut seen = vec![false; b];
    seen[root_bag] = true;
    let mut head = 0;
    while head < bfs_order.len() {
        let x = bfs_order[head];
        head += 1;
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                parent[y] = x;
                bfs_order.push(y);
            }
        }
    }

    // pad every bag to exactly omega elements
    let mut bags: Vec<BTreeSet<usize>> = td.bags.clone();
    if bags[root_bag].len() < omega {
        // pull from the nearest descendant holding something new; every bag
        // strictly between is a subset of the root so far and can absorb it
        while bags[root_bag].len() < omega {
            let mut path = Vec::new();
            let mut found: Option<(usize, usize)> = None;
            let mut queue = VecDeque::from([root_bag]);
            let mut prev = vec![usize::MAX; b];
            let mut visited = vec![false; b];
            visited[root_bag] = true;
            'search: while let Some(x) = queue.pop_front() {
                for &v in &bags[x] {
                    if !bags[root_bag].contains(&v) {
                        found = Some((x, v));
                        break 'search;
                    }
                }
                for &y in &adj[x] {
                    if !visited[y] {
                        visited[y] = true;
                        prev[y] = x;
                        queue.push_back(y);
                    }
                }
            }
            let (holder, v) = found.expect("graph has at least omega vertices");
            let mut x = holder;
            while x != root_bag {
                path.push(x);
                x = prev[x];
            }
            for bag_idx in path {
                bags[bag_idx].insert(v);
            }
            bags[root_bag].insert(v);
        }
    }
    for &x in &bfs_order[1..] {
        while bags[x].len() < omega {
            let p = parent[x];
            let extra = *bags[p]
                .iter()
                .find(|v| !bags[x].contains(v))
                .expect("padded parent has omega elements");
            bags[x].insert(extra);
        }
    }

    // children lists in deterministic order
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); b];
    for &x in &bfs_order[1..] {
        children[parent[x]].push(x);
    }
    for list in &mut children {
        list.sort_unstable();
    }

    let mut nodes: Vec<NiceNode> = Vec::new();
    // returns the arena index of the subtree root for `bag_idx`, whose
    // slot-ordered bag must equal `slots`
    fn emit(
        bag_idx: usize,
        slots: Vec<usize>,
        bags: &[BTreeSet<usize>],
        children: &[Vec<usize>],
        nodes: &mut Vec<NiceNode>,
    ) -> usize {
        let kids = &children[bag_idx];
        let convert = |child: usize, nodes: &mut Vec<NiceNode>| -> usize {
            let child_set = &bags[child];
            let here: BTreeSet<usize> = slots.iter().copied().collect();
            let removed: Vec<usize> = here.difference(child_set).copied().collect();
            let added: Vec<usize> = child_set.difference(&here).copied().collect();
            debug_assert_eq!(removed.len(), added.len());
            // slot vectors from this bag down to the child's
            let mut seq = vec![slots.clone()];
            let mut cur = slots.clone();
            for (out, inn) in removed.iter().zip(added.iter()) {
                let pos = cur.iter().position(|v| v == out).unwrap();
                cur[pos] = *inn;
                seq.push(cur.clone());
            }
            let mut sub = emit(child, seq.last().unwrap().clone(), bags, children, nodes);
            for i in (0..removed.len()).rev() {
                let slot = seq[i].iter().position(|&v| v == removed[i]).unwrap();
                nodes.push(NiceNode {
                    bag: seq[i].clone(),
                    kind: NiceKind::Replace {
                        child: sub,
                        slot,
                        enters: removed[i],
                        leaves: added[i],
                    },
                });
                sub = nodes.len() - 1;
            }
            sub
        };
        match kids.len() {
            0 => {
                nodes.push(NiceNode { bag: slots, kind: NiceKind::Leaf });
                nodes.len() - 1
            }
            1 => convert(kids[0], nodes),
            _ => {
                let mut acc = convert(*kids.last().unwrap(), nodes);
                for &c in kids[..kids.len() - 1].iter().rev() {
                    let left = convert(c, nodes);
                    nodes.push(NiceNode {
                        bag: slots.clone(),
                        kind: NiceKind::Join { left, right: acc },
                    });
                    acc = nodes.len() - 1;
                }
                acc
            }
        }
    }

    let root_slots: Vec<usize> = bags[root_bag].iter().copied().collect();
    let root_node = emit(root_bag, root_slots, &bags, &children, &mut nodes);
    let ntd = NiceTreeDecomposition { nodes, root: root_node, omega };
    ntd.check()?;
    let report = validate_decomposition(g, &ntd.to_tree_decomposition());
    if !report.is_valid() {
        return Err(NiceError::Invalid(format!(
            "nice form violates decomposition properties: {:?}",
            report.violations[0]
        )));
    }
    Ok(ntd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auxgraph::build_aux_epsilon;
    use crate::fixtures;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn figure_skeleton() -> UndirectedGraph {
        build_aux_epsilon(&fixtures::figure_network()).unwrap().skeleton()
    }

    /// Width-2 decomposition of the figure auxiliary graph
    /// (aux ids: p_1..p_4 = 0..3, node-nodes 1,36,2,7,4,5,8,9 = 4..11).
    fn figure_td() -> TreeDecomposition {
        let bags: Vec<BTreeSet<usize>> = [
            vec![11, 2, 3],
            vec![11, 1],
            vec![0, 1, 4],
            vec![0, 1, 5],
            vec![0, 10],
            vec![6, 2, 3],
            vec![7, 2, 3],
            vec![9, 3],
            vec![8, 2],
        ]
        .into_iter()
        .map(|v| v.into_iter().collect())
        .collect();
        let edges = vec![(4, 3), (3, 2), (2, 1), (1, 0), (0, 5), (5, 6), (6, 7), (0, 8)];
        TreeDecomposition { bags, edges }
    }

    #[test]
    fn heuristics_reach_width_two_on_figure_aux() {
        let g = figure_skeleton();
        for h in [Heuristic::MinFill, Heuristic::MinDegree] {
            let td = decompose(&g, h);
            assert!(validate_decomposition(&g, &td).is_valid());
            assert!(td.width() <= 2, "{h:?} got width {}", td.width());
        }
    }

    #[test]
    fn trees_have_width_one_and_cliques_n_minus_one() {
        let path = UndirectedGraph::from_edges(5, (0..4).map(|i| (i, i + 1)));
        assert_eq!(decompose(&path, Heuristic::MinFill).width(), 1);

        let mut k5 = UndirectedGraph::new(5);
        for a in 0..5 {
            for b in a + 1..5 {
                k5.add_edge(a, b);
            }
        }
        assert_eq!(decompose(&k5, Heuristic::MinFill).width(), 4);
        assert_eq!(decompose(&k5, Heuristic::MinDegree).width(), 4);
    }

    #[test]
    fn disconnected_graphs_decompose_into_one_tree() {
        let g = UndirectedGraph::from_edges(6, [(0, 1), (2, 3)]);
        for h in [Heuristic::MinFill, Heuristic::MinDegree] {
            let td = decompose(&g, h);
            assert!(validate_decomposition(&g, &td).is_valid(), "{h:?}");
        }
    }

    #[test]
    fn figure_decomposition_validates_at_width_two() {
        let g = figure_skeleton();
        let report = validate_decomposition(&g, &figure_td());
        assert!(report.is_valid(), "{:?}", report.violations);
        assert_eq!(report.width, 2);
    }

    #[test]
    fn missing_edge_coverage_is_witnessed() {
        let g = UndirectedGraph::from_edges(3, [(0, 1), (1, 2)]);
        let td = TreeDecomposition {
            bags: vec![[0, 1].into_iter().collect(), [2].into_iter().collect()],
            edges: vec![(0, 1)],
        };
        let report = validate_decomposition(&g, &td);
        assert!(report
            .violations
            .contains(&DecompositionViolation::UncoveredEdge { a: 1, b: 2 }));
    }

    #[test]
    fn disconnected_occurrences_are_witnessed() {
        let g = UndirectedGraph::from_edges(3, [(0, 1), (1, 2)]);
        let td = TreeDecomposition {
            bags: vec![
                [0, 1].into_iter().collect(),
                [1, 2].into_iter().collect(),
                [0].into_iter().collect(),
            ],
            edges: vec![(0, 1), (1, 2)],
        };
        let report = validate_decomposition(&g, &td);
        assert!(report
            .violations
            .contains(&DecompositionViolation::DisconnectedOccurrences { vertex: 0 }));
    }

    #[test]
    fn pace_gr_parses_path_graph() {
        let g = read_gr_pace("c example\np tw 3 2\n1 2\n2 3\n").unwrap();
        assert_eq!(g.n(), 3);
        assert!(g.has_edge(0, 1) && g.has_edge(1, 2) && !g.has_edge(0, 2));
        assert!(read_gr_pace("p tw x 2\n").is_err());
        assert!(read_gr_pace("p tw 3 1\n1 4\n").is_err());
    }

    #[test]
    fn pace_td_parses_single_bag() {
        let (td, nv) = read_td_pace("s td 1 3 3\nb 1 1 2 3\n").unwrap();
        assert_eq!(nv, 3);
        assert_eq!(td.bags.len(), 1);
        assert_eq!(td.width(), 2);
        assert!(read_td_pace("s td 2 1 3\nb 1 1\nb 2 2\n").is_err()); // disconnected
    }

    #[test]
    fn single_bag_nice_form_is_a_leaf() {
        let g = UndirectedGraph::from_edges(3, [(0, 1), (1, 2), (0, 2)]);
        let td = TreeDecomposition { bags: vec![[0, 1, 2].into_iter().collect()], edges: vec![] };
        let ntd = to_nice(&td, &g, None).unwrap();
        assert_eq!(ntd.nodes.len(), 1);
        assert!(matches!(ntd.nodes[0].kind, NiceKind::Leaf));
        assert_eq!(ntd.omega, 3);
    }

    #[test]
    fn figure_td_nicifies_with_same_width() {
        let g = figure_skeleton();
        let ntd = to_nice(&figure_td(), &g, None).unwrap();
        assert_eq!(ntd.omega, 3);
        assert!(ntd.nodes.iter().all(|n| n.bag.len() == 3));
        let flat = ntd.to_tree_decomposition();
        assert_eq!(flat.width(), 2);
        assert!(validate_decomposition(&g, &flat).is_valid());
    }

    fn random_graph(rng: &mut StdRng, n: usize, p: f64) -> UndirectedGraph {
        let mut g = UndirectedGraph::new(n);
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(p) {
                    g.add_edge(a, b);
                }
            }
        }
        g
    }

    #[test]
    fn nice_form_preserves_width_on_random_graphs() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..100 {
            let n = rng.gen_range(1..14);
            let g = random_graph(&mut rng, n, 0.3);
            let td = decompose(&g, Heuristic::MinFill);
            let ntd = to_nice(&td, &g, None).unwrap();
            assert_eq!(ntd.to_tree_decomposition().width(), td.width());
        }
    }

    proptest! {
        #[test]
        fn td_pace_round_trip(n_bags in 1usize..10, nv in 1usize..12, seed in 0u64..500) {
            let mut rng = StdRng::seed_from_u64(seed);
            let mut bags = Vec::new();
            for _ in 0..n_bags {
                let bag: BTreeSet<usize> =
                    (0..nv).filter(|_| rng.gen_bool(0.4)).collect();
                bags.push(bag);
            }
            let edges: Vec<(usize, usize)> =
                (1..n_bags).map(|i| (rng.gen_range(0..i), i)).collect();
            let td = TreeDecomposition { bags, edges };
            let text = write_td_pace(&td, nv);
            let (back, nv_back) = read_td_pace(&text).unwrap();
            prop_assert_eq!(nv_back, nv);
            prop_assert_eq!(&back.bags, &td.bags);
            let canon = |es: &[(usize, usize)]| {
                let mut v: Vec<_> =
                    es.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
                v.sort_unstable();
                v
            };
            prop_assert_eq!(canon(&back.edges), canon(&td.edges));
        }

        #[test]
        fn gr_pace_round_trip(n in 1usize..12, seed in 0u64..500) {
            let mut rng = StdRng::seed_from_u64(seed);
            let g = random_graph(&mut rng, n, 0.35);
            let back = read_gr_pace(&write_gr_pace(&g)).unwrap();
            prop_assert_eq!(back, g);
        }
    }
}
