//! Treewidth-parameterized dynamic program for exact minimum seed sets.
//!
//! The DP walks a nice tree decomposition of the auxiliary graph bottom-up.
//! Each node carries a matrix indexed by a threshold vector (how much of a
//! bag element's threshold must be met inside the current subgraph) and an
//! activation vector (the relative activation order of the bag elements).
//! Entries are minimum seed sets of node-nodes, with seed size measured as
//! the number of original nodes represented.

use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use smallvec::{smallvec, SmallVec};
use thiserror::Error;

use crate::auxgraph::{
    build_aux_epsilon_with, build_aux_general_with, AuxBuildOptions, AuxError, AuxGraph, AuxId,
};
use crate::net::{
    rescale_integral, simulate, validate_network, CostMode, NetError, NodeId, Severity,
    SupplyChainNetwork,
};
use crate::treedec::{
    decompose, to_nice, validate_decomposition, Heuristic, NiceKind, NiceTreeDecomposition,
    TreeDecomposition,
};

const INFEASIBLE: u64 = u64::MAX;

/// Table dimensions: threshold digits in `0..=cap`, activation digits in
/// `0..=omega`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DpParams {
    pub omega: usize,
    pub cap: u64,
    pub parallel: bool,
}

impl DpParams {
    /// Threshold digit range for `aux`: the larger of k-1 and the largest
    /// auxiliary threshold (they coincide in epsilon mode).
    pub fn for_aux(aux: &AuxGraph, omega: usize) -> Self {
        let cap = aux.max_threshold().max(aux.k as u64 - 1);
        DpParams { omega, cap, parallel: false }
    }

    fn rows(&self) -> Option<usize> {
        checked_pow(self.cap as u128 + 1, self.omega)
    }

    fn cols(&self) -> Option<usize> {
        checked_pow(self.omega as u128 + 1, self.omega)
    }

    /// Total matrix entries, `[(cap+1)(omega+1)]^omega`.
    pub fn table_entries(&self) -> u128 {
        let per_slot = (self.cap as u128 + 1) * (self.omega as u128 + 1);
        let mut total: u128 = 1;
        for _ in 0..self.omega {
            total = total.saturating_mul(per_slot);
        }
        total
    }
}

fn checked_pow(base: u128, exp: usize) -> Option<usize> {
    let mut v: u128 = 1;
    for _ in 0..exp {
        v = v.checked_mul(base)?;
        if v > usize::MAX as u128 {
            return None;
        }
    }
    usize::try_from(v).ok()
}

/// A candidate seed set over node-node bits plus its size metric
/// (sum of represented original nodes); `size == u64::MAX` marks the
/// infeasible sentinel, which compares worse than everything.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Entry {
    size: u64,
    words: SmallVec<[u64; 1]>,
}

impl Entry {
    fn infeasible() -> Self {
        Entry { size: INFEASIBLE, words: SmallVec::new() }
    }

    fn empty(words_len: usize) -> Self {
        Entry { size: 0, words: smallvec![0; words_len] }
    }

    fn is_infeasible(&self) -> bool {
        self.size == INFEASIBLE
    }

    fn set_bit(&mut self, bit: usize, extra: u64) {
        let w = bit / 64;
        let m = 1u64 << (bit % 64);
        if self.words[w] & m == 0 {
            self.words[w] |= m;
            self.size += extra;
        }
    }

    fn bits(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rem = w;
            std::iter::from_fn(move || {
                if rem == 0 {
                    return None;
                }
                let b = rem.trailing_zeros() as usize;
                rem &= rem - 1;
                Some(wi * 64 + b)
            })
        })
    }

    fn union_size(&self, other: &Entry, cont_sz: &[u64]) -> u64 {
        let mut size = self.size;
        for (wi, (&a, &b)) in self.words.iter().zip(other.words.iter()).enumerate() {
            let mut fresh = b & !a;
            while fresh != 0 {
                let bit = wi * 64 + fresh.trailing_zeros() as usize;
                fresh &= fresh - 1;
                size += cont_sz[bit];
            }
        }
        size
    }

    fn union(&self, other: &Entry, cont_sz: &[u64]) -> Entry {
        let size = self.union_size(other, cont_sz);
        let words = self
            .words
            .iter()
            .zip(other.words.iter())
            .map(|(&a, &b)| a | b)
            .collect();
        Entry { size, words }
    }

    /// Ascending-id lexicographic order on the seed sets, used only to
    /// break size ties deterministically.
    fn lex_less(&self, other: &Entry) -> bool {
        let mut a = self.bits();
        let mut b = other.bits();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return false,
                (None, Some(_)) => return true,
                (Some(_), None) => return false,
                (Some(x), Some(y)) => {
                    if x != y {
                        return x < y;
                    }
                }
            }
        }
    }

    fn better_than(&self, other: &Entry) -> bool {
        if self.size != other.size {
            return self.size < other.size;
        }
        if self.is_infeasible() {
            return false;
        }
        self.lex_less(other)
    }
}

/// Probe result for a matrix cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatrixEntry {
    Infeasible,
    Seed(BTreeSet<AuxId>),
}

/// The DP matrix of one decomposition node.
#[derive(Debug, Clone)]
pub struct SeedMatrix {
    bag: Vec<AuxId>,
    omega: usize,
    cap: u64,
    rows: usize,
    cols: usize,
    entries: Vec<Entry>,
    nn_ids: Vec<AuxId>,
}

impl SeedMatrix {
    pub fn bag(&self) -> &[AuxId] {
        &self.bag
    }

    /// Entry at threshold vector `c` (digits `0..=cap`) and activation
    /// vector `a` (digits `0..=omega`), in bag slot order.
    pub fn get(&self, c: &[u64], a: &[u64]) -> MatrixEntry {
        assert_eq!(c.len(), self.omega, "threshold vector length");
        assert_eq!(a.len(), self.omega, "activation vector length");
        let mut c_idx = 0usize;
        let mut a_idx = 0usize;
        for slot in 0..self.omega {
            assert!(c[slot] <= self.cap, "threshold digit out of range");
            assert!(a[slot] <= self.omega as u64, "activation digit out of range");
            c_idx = c_idx * (self.cap as usize + 1) + c[self.omega - 1 - slot] as usize;
            a_idx = a_idx * (self.omega + 1) + a[self.omega - 1 - slot] as usize;
        }
        self.decode(&self.entries[a_idx * self.rows + c_idx])
    }

    fn decode(&self, entry: &Entry) -> MatrixEntry {
        if entry.is_infeasible() {
            MatrixEntry::Infeasible
        } else {
            MatrixEntry::Seed(entry.bits().map(|b| self.nn_ids[b]).collect())
        }
    }
}

/// Per-solve context shared by the step functions.
struct Ctx<'a> {
    aux: &'a AuxGraph,
    params: DpParams,
    rows: usize,
    cols: usize,
    c_stride: Vec<usize>,
    a_stride: Vec<usize>,
    nn_ids: Vec<AuxId>,
    bit_of: HashMap<AuxId, usize>,
    cont_sz: Vec<u64>,
    words_len: usize,
}

impl<'a> Ctx<'a> {
    fn new(aux: &'a AuxGraph, params: DpParams) -> Option<Self> {
        let rows = params.rows()?;
        let cols = params.cols()?;
        rows.checked_mul(cols)?;
        let omega = params.omega;
        let mut c_stride = vec![1usize; omega];
        let mut a_stride = vec![1usize; omega];
        for i in 1..omega {
            c_stride[i] = c_stride[i - 1].checked_mul(params.cap as usize + 1)?;
            a_stride[i] = a_stride[i - 1].checked_mul(omega + 1)?;
        }
        let nn_ids = aux.node_node_ids();
        let bit_of: HashMap<AuxId, usize> =
            nn_ids.iter().enumerate().map(|(b, &id)| (id, b)).collect();
        let cont_sz: Vec<u64> = nn_ids.iter().map(|&id| aux.cont_size(id)).collect();
        let words_len = nn_ids.len().div_ceil(64).max(1);
        Some(Ctx { aux, params, rows, cols, c_stride, a_stride, nn_ids, bit_of, cont_sz, words_len })
    }

    fn decode_a(&self, a_idx: usize, out: &mut [u64]) {
        let mut rest = a_idx;
        for slot in 0..self.params.omega {
            out[slot] = (rest % (self.params.omega + 1)) as u64;
            rest /= self.params.omega + 1;
        }
    }

    fn blank(&self, bag: Vec<AuxId>) -> SeedMatrix {
        SeedMatrix {
            bag,
            omega: self.params.omega,
            cap: self.params.cap,
            rows: self.rows,
            cols: self.cols,
            entries: vec![Entry::infeasible(); self.rows * self.cols],
            nn_ids: self.nn_ids.clone(),
        }
    }

    /// Weighted in-edges of each bag slot from other bag slots.
    fn bag_in_edges(&self, bag: &[AuxId]) -> Vec<Vec<(usize, u64)>> {
        let pos: HashMap<AuxId, usize> =
            bag.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        bag.iter()
            .map(|&id| {
                let mut ins = Vec::new();
                for &(from, w) in self.aux.in_edges(id) {
                    if let Some(&j) = pos.get(&from) {
                        ins.push((j, w));
                    }
                }
                ins
            })
            .collect()
    }

    fn run_columns<F>(&self, entries: &mut [Entry], f: F)
    where
        F: Fn(usize, &mut [Entry]) + Sync,
    {
        if self.params.parallel {
            entries
                .par_chunks_mut(self.rows)
                .enumerate()
                .for_each(|(a_idx, col)| f(a_idx, col));
        } else {
            for (a_idx, col) in entries.chunks_mut(self.rows).enumerate() {
                f(a_idx, col);
            }
        }
    }
}

/// Iterate threshold indices with their digit vectors in one sweep.
struct Odometer {
    digits: Vec<u64>,
    cap: u64,
}

impl Odometer {
    fn new(omega: usize, cap: u64) -> Self {
        Odometer { digits: vec![0; omega], cap }
    }

    fn advance(&mut self) {
        for d in self.digits.iter_mut() {
            if *d < self.cap {
                *d += 1;
                return;
            }
            *d = 0;
        }
    }
}

/// Leaf matrix: for each (threshold, activation) pair, the forced seed of
/// the bag-induced subgraph when activation must follow the given order.
/// Every bag element must end up active; an element whose earlier-ranked
/// bag benefit misses its threshold digit must be seeded, and if it is a
/// path-node the cell is infeasible.
pub fn leaf_table(aux: &AuxGraph, bag: &[AuxId], params: &DpParams) -> SeedMatrix {
    let ctx = Ctx::new(aux, *params).expect("table dimensions fit in memory");
    assert_eq!(bag.len(), params.omega, "bag size must equal omega");
    let ins = ctx.bag_in_edges(bag);
    let is_path: Vec<bool> = bag.iter().map(|&id| aux.node(id).is_path_node()).collect();
    let bit: Vec<usize> = bag
        .iter()
        .map(|&id| ctx.bit_of.get(&id).copied().unwrap_or(usize::MAX))
        .collect();
    let cont: Vec<u64> = bag.iter().map(|&id| aux.cont_size(id)).collect();

    let mut m = ctx.blank(bag.to_vec());
    let omega = params.omega;
    ctx.run_columns(&mut m.entries, |a_idx, col| {
        let mut a = vec![0u64; omega];
        ctx.decode_a(a_idx, &mut a);
        let benefit: Vec<u64> = (0..omega)
            .map(|i| {
                ins[i]
                    .iter()
                    .filter(|&&(j, _)| a[j] < a[i])
                    .map(|&(_, w)| w)
                    .sum()
            })
            .collect();
        let mut odo = Odometer::new(omega, ctx.params.cap);
        for cell in col.iter_mut() {
            let mut entry = Entry::empty(ctx.words_len);
            let mut ok = true;
            for i in 0..omega {
                if benefit[i] < odo.digits[i] {
                    if is_path[i] {
                        ok = false;
                        break;
                    }
                    entry.set_bit(bit[i], cont[i]);
                }
            }
            *cell = if ok { entry } else { Entry::infeasible() };
            odo.advance();
        }
    });
    m
}

/// Replace step: `entering` takes the bag slot of `leaving`.
///
/// Phase one restores the leaver's true threshold, minimizes over its
/// possible activation ranks, and seeds the entrant whenever its residual
/// threshold digit is positive (infeasible if the entrant is a path-node).
/// Phase two folds the entrant's bag-internal edges one at a time, looking
/// the previous table up at a threshold reduced along the edge that points
/// at the later-activating endpoint.
pub fn replace_step(
    aux: &AuxGraph,
    child: &SeedMatrix,
    entering: AuxId,
    leaving: AuxId,
    params: &DpParams,
) -> SeedMatrix {
    let ctx = Ctx::new(aux, *params).expect("table dimensions fit in memory");
    let slot = child
        .bag
        .iter()
        .position(|&id| id == leaving)
        .expect("leaving element must sit in the child bag");
    let mut bag = child.bag.clone();
    bag[slot] = entering;

    let omega = params.omega;
    let cap = params.cap;
    let leaver_true = aux.node(leaving).threshold;
    assert!(leaver_true <= cap, "true threshold exceeds digit range");
    let enter_is_path = aux.node(entering).is_path_node();
    let enter_bit = ctx.bit_of.get(&entering).copied();
    let enter_cont = aux.cont_size(entering);

    let mut m = ctx.blank(bag.clone());
    let c_stride = ctx.c_stride[slot];
    ctx.run_columns(&mut m.entries, |a_idx, col| {
        let mut a = vec![0u64; omega];
        ctx.decode_a(a_idx, &mut a);
        // The leaver may activate at any point relative to the remaining
        // bag elements. Activation vectors are ordinal, so enumerate its
        // insertion positions (tie with a rank group or strictly between
        // two) and recompress jointly; raw rank values could run out of
        // headroom when the column already uses the top of the range.
        let mut distinct: Vec<u64> =
            (0..omega).filter(|&i| i != slot).map(|i| a[i]).collect();
        distinct.sort_unstable();
        distinct.dedup();
        let d = distinct.len();
        // key 2g ties with group g; key 2g-1 falls strictly before group g
        let mut v_keys: Vec<i64> = (0..d as i64).map(|g| 2 * g).collect();
        v_keys.extend((0..=d as i64).map(|g| 2 * g - 1));
        let mut candidate_cols: Vec<usize> = Vec::with_capacity(v_keys.len());
        for &vk in &v_keys {
            let mut present: Vec<i64> = (0..d as i64).map(|g| 2 * g).collect();
            if !present.contains(&vk) {
                present.push(vk);
                present.sort_unstable();
            }
            let pos = |key: i64| -> u64 {
                present.iter().position(|&p| p == key).unwrap() as u64
            };
            let mut child_a = 0usize;
            for i in 0..omega {
                let digit = if i == slot {
                    pos(vk)
                } else {
                    let g = distinct.binary_search(&a[i]).unwrap() as i64;
                    pos(2 * g)
                };
                child_a += digit as usize * ctx.a_stride[i];
            }
            if !candidate_cols.contains(&child_a) {
                candidate_cols.push(child_a);
            }
        }
        let mut odo = Odometer::new(omega, cap);
        for (c_idx, cell) in col.iter_mut().enumerate() {
            let enter_digit = odo.digits[slot];
            let child_c = c_idx - enter_digit as usize * c_stride
                + leaver_true as usize * c_stride;
            let mut best: Option<&Entry> = None;
            for &cand_col in &candidate_cols {
                let cand = &child.entries[cand_col * ctx.rows + child_c];
                if best.map_or(true, |b| cand.better_than(b)) {
                    best = Some(cand);
                }
            }
            let best = best.expect("insertion positions are nonempty");
            *cell = if enter_digit == 0 {
                best.clone()
            } else if enter_is_path {
                Entry::infeasible()
            } else if best.is_infeasible() {
                Entry::infeasible()
            } else {
                let mut e = best.clone();
                e.set_bit(enter_bit.expect("node-nodes carry bits"), enter_cont);
                e
            };
            odo.advance();
        }
    });

    // fold the entrant's bag-internal edges, ascending by the other slot
    let pos: HashMap<AuxId, usize> = bag.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut into_other: HashMap<usize, u64> = HashMap::new();
    let mut into_enter: HashMap<usize, u64> = HashMap::new();
    for &(to, w) in aux.out_edges(entering) {
        if let Some(&x) = pos.get(&to) {
            *into_other.entry(x).or_insert(0) += w;
        }
    }
    for &(from, w) in aux.in_edges(entering) {
        if let Some(&x) = pos.get(&from) {
            *into_enter.entry(x).or_insert(0) += w;
        }
    }
    let mut touched: Vec<usize> =
        into_other.keys().chain(into_enter.keys()).copied().collect();
    touched.sort_unstable();
    touched.dedup();

    for x in touched {
        let w_to_other = into_other.get(&x).copied().unwrap_or(0);
        let w_to_enter = into_enter.get(&x).copied().unwrap_or(0);
        let prev = std::mem::replace(&mut m.entries, vec![Entry::infeasible(); 0]);
        let mut next = vec![Entry::infeasible(); ctx.rows * ctx.cols];
        let x_stride = ctx.c_stride[x];
        ctx.run_columns(&mut next, |a_idx, col| {
            let mut a = vec![0u64; omega];
            ctx.decode_a(a_idx, &mut a);
            let base = a_idx * ctx.rows;
            if a[slot] == a[x] {
                col.clone_from_slice(&prev[base..base + ctx.rows]);
                return;
            }
            // reduce the later activator's digit by the weight of the edge
            // pointing into it
            let (red_slot, red_stride, w) = if a[slot] < a[x] {
                (x, x_stride, w_to_other)
            } else {
                (slot, c_stride, w_to_enter)
            };
            let mut odo = Odometer::new(omega, cap);
            for (c_idx, cell) in col.iter_mut().enumerate() {
                let d = odo.digits[red_slot];
                let nd = d.saturating_sub(w);
                let src = c_idx - (d - nd) as usize * red_stride;
                *cell = prev[base + src].clone();
                odo.advance();
            }
        });
        m.entries = next;
    }
    m
}

/// Benefit already granted to each bag slot by earlier-activating bag
/// neighbors under activation vector `a` (the join's double-counting
/// correction).
pub fn activation_reduction(aux: &AuxGraph, bag: &[AuxId], a: &[u64]) -> Vec<u64> {
    assert_eq!(bag.len(), a.len());
    let pos: HashMap<AuxId, usize> = bag.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    bag.iter()
        .enumerate()
        .map(|(i, &id)| {
            aux.in_edges(id)
                .iter()
                .filter_map(|&(from, w)| pos.get(&from).map(|&j| (j, w)))
                .filter(|&(j, _)| a[j] < a[i])
                .map(|(_, w)| w)
                .sum()
        })
        .collect()
}

/// Join step over identical child bags: for every activation vector, split
/// each threshold digit (plus the double-counted bag-internal benefit)
/// between the two children and keep the smallest union.
pub fn join_step(
    aux: &AuxGraph,
    left: &SeedMatrix,
    right: &SeedMatrix,
    params: &DpParams,
) -> SeedMatrix {
    assert_eq!(left.bag, right.bag, "join children must share a bag");
    let ctx = Ctx::new(aux, *params).expect("table dimensions fit in memory");
    let bag = left.bag.clone();
    let omega = params.omega;
    let cap = params.cap;

    let mut m = ctx.blank(bag.clone());
    ctx.run_columns(&mut m.entries, |a_idx, col| {
        let mut a = vec![0u64; omega];
        ctx.decode_a(a_idx, &mut a);
        let red = activation_reduction(ctx.aux, &bag, &a);
        let base = a_idx * ctx.rows;

        let feasible = |mtx: &SeedMatrix| -> Vec<(usize, Vec<u64>)> {
            let mut out = Vec::new();
            let mut odo = Odometer::new(omega, cap);
            for c_idx in 0..ctx.rows {
                if !mtx.entries[base + c_idx].is_infeasible() {
                    out.push((c_idx, odo.digits.clone()));
                }
                odo.advance();
            }
            out
        };
        let lefts = feasible(left);
        let rights = feasible(right);

        for (f_idx, f) in &lefts {
            let fe = &left.entries[base + f_idx];
            for (g_idx, g) in &rights {
                let ge = &right.entries[base + g_idx];
                let mut t_idx = 0usize;
                let mut valid = true;
                for i in 0..omega {
                    let sum = f[i] + g[i];
                    if sum < red[i] || sum - red[i] > cap {
                        valid = false;
                        break;
                    }
                    t_idx += (sum - red[i]) as usize * ctx.c_stride[i];
                }
                if !valid {
                    continue;
                }
                let target = &mut col[t_idx];
                let size = fe.union_size(ge, &ctx.cont_sz);
                if size < target.size {
                    *target = fe.union(ge, &ctx.cont_sz);
                } else if size == target.size && !target.is_infeasible() {
                    let cand = fe.union(ge, &ctx.cont_sz);
                    if cand.lex_less(target) {
                        *target = cand;
                    }
                }
            }
        }
    });
    m
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("table of {estimated_entries} entries (~{estimated_bytes} bytes) exceeds the {budget}-byte memory budget")]
    MemoryBudgetExceeded { estimated_entries: u128, estimated_bytes: u128, budget: u64 },
    #[error("network fails validation: {0:?}")]
    InvalidNetwork(Vec<String>),
    #[error(transparent)]
    Aux(#[from] AuxError),
    #[error("decomposition problem: {0}")]
    Decomposition(String),
    #[error("internal consistency failure: {0}")]
    Verification(String),
    #[error(transparent)]
    Net(#[from] NetError),
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SolveDiagnostics {
    pub omega: usize,
    pub c_max: u64,
    pub aux_nodes: usize,
    pub nice_nodes: usize,
    pub width: usize,
    pub table_entries: u128,
    pub wall_ms: u128,
    pub forced_count: usize,
}

#[derive(Debug)]
pub struct SolveResult {
    pub opt_size: u64,
    /// Original node ids, forced seeds included.
    pub seed: BTreeSet<NodeId>,
    /// The node-nodes the DP chose.
    pub seed_aux: BTreeSet<AuxId>,
    pub forced: Vec<NodeId>,
    pub diagnostics: SolveDiagnostics,
    /// Per-decomposition-node matrices, kept when tracing.
    pub tables: Option<Vec<Option<SeedMatrix>>>,
}

impl SolveResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "opt_size": self.opt_size,
            "seed": self.seed.iter().map(|id| id.0).collect::<Vec<_>>(),
            "forced": self.forced.iter().map(|id| id.0).collect::<Vec<_>>(),
            "omega": self.diagnostics.omega,
            "c_max": self.diagnostics.c_max,
            "wall_ms": self.diagnostics.wall_ms,
        })
    }
}

/// Solver and pipeline configuration.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub mode: CostMode,
    /// Bytes the DP tables may occupy before the solve refuses to start.
    pub memory_budget: u64,
    pub parallel: bool,
    /// Keep every DP table for inspection (desk scale only).
    pub trace: bool,
    pub heuristic: Heuristic,
    /// Nodes assumed active at time zero (not counted, not returned).
    pub preseed: BTreeSet<NodeId>,
    /// Externally supplied decomposition of the auxiliary skeleton.
    pub imported_td: Option<TreeDecomposition>,
    /// Root bag override for the nice conversion.
    pub root: Option<usize>,
}

impl SolverConfig {
    pub fn new(mode: CostMode) -> Self {
        SolverConfig {
            mode,
            memory_budget: 4 * 1024 * 1024 * 1024,
            parallel: false,
            trace: false,
            heuristic: Heuristic::MinFill,
            preseed: BTreeSet::new(),
            imported_td: None,
            root: None,
        }
    }
}

fn entry_bytes(words_len: usize) -> u128 {
    let base = std::mem::size_of::<Entry>() as u128;
    if words_len > 1 {
        base + words_len as u128 * 8 + 16
    } else {
        base
    }
}

/// Run the DP over `ntd` and translate the root row back to original nodes.
pub fn solve(
    aux: &AuxGraph,
    ntd: &NiceTreeDecomposition,
    cfg: &SolverConfig,
) -> Result<SolveResult, SolveError> {
    let start = Instant::now();
    let mut params = DpParams::for_aux(aux, ntd.omega);
    params.parallel = cfg.parallel;

    let nn_count = aux.node_node_ids().len();
    let words_len = nn_count.div_ceil(64).max(1);
    let per_table = params.table_entries().saturating_mul(entry_bytes(words_len));
    let estimated = per_table.saturating_mul(3);
    if estimated > cfg.memory_budget as u128 || Ctx::new(aux, params).is_none() {
        return Err(SolveError::MemoryBudgetExceeded {
            estimated_entries: params.table_entries(),
            estimated_bytes: estimated,
            budget: cfg.memory_budget,
        });
    }

    let mut stack: Vec<SeedMatrix> = Vec::new();
    let mut tables: Vec<Option<SeedMatrix>> = if cfg.trace {
        vec![None; ntd.nodes.len()]
    } else {
        Vec::new()
    };
    for idx in ntd.post_order() {
        let live = (stack.len() as u128 + 2) * per_table;
        if live > cfg.memory_budget as u128 {
            return Err(SolveError::MemoryBudgetExceeded {
                estimated_entries: params.table_entries(),
                estimated_bytes: live,
                budget: cfg.memory_budget,
            });
        }
        let node = &ntd.nodes[idx];
        let m = match &node.kind {
            NiceKind::Leaf => {
                let bag: Vec<AuxId> = node.bag.iter().map(|&v| v as AuxId).collect();
                leaf_table(aux, &bag, &params)
            }
            NiceKind::Replace { enters, leaves, .. } => {
                let child = stack.pop().expect("child table computed");
                replace_step(aux, &child, *enters as AuxId, *leaves as AuxId, &params)
            }
            NiceKind::Join { .. } => {
                let right = stack.pop().expect("right table computed");
                let left = stack.pop().expect("left table computed");
                join_step(aux, &left, &right, &params)
            }
        };
        if cfg.trace {
            tables[idx] = Some(m.clone());
        }
        stack.push(m);
    }
    let root = stack.pop().expect("root table computed");
    debug_assert!(stack.is_empty());

    // root row: actual thresholds, minimized over activation vectors
    let mut c_idx = 0usize;
    for (slot, &id) in root.bag.iter().enumerate() {
        let t = aux.node(id as AuxId).threshold;
        debug_assert!(t <= params.cap);
        c_idx += t as usize
            * checked_pow(params.cap as u128 + 1, slot).expect("dims already checked");
    }
    let mut best: Option<&Entry> = None;
    for a_idx in 0..root.cols {
        let cand = &root.entries[a_idx * root.rows + c_idx];
        if best.map_or(true, |b| cand.better_than(b)) {
            best = Some(cand);
        }
    }
    let best = best.expect("root row nonempty");
    if best.is_infeasible() {
        return Err(SolveError::Verification(
            "root row is infeasible; seeding all node-nodes must always work".into(),
        ));
    }

    let seed_aux: BTreeSet<AuxId> = best.bits().map(|b| root.nn_ids[b]).collect();
    let mut seed: BTreeSet<NodeId> = seed_aux
        .iter()
        .flat_map(|&id| aux.node(id).cont.iter().copied())
        .collect();
    seed.extend(aux.forced.iter().copied());
    let opt_size = best.size + aux.forced.len() as u64;

    Ok(SolveResult {
        opt_size,
        seed,
        seed_aux,
        forced: aux.forced.clone(),
        diagnostics: SolveDiagnostics {
            omega: ntd.omega,
            c_max: params.cap,
            aux_nodes: aux.len(),
            nice_nodes: ntd.nodes.len(),
            width: ntd.omega.saturating_sub(1),
            table_entries: params.table_entries(),
            wall_ms: start.elapsed().as_millis(),
            forced_count: aux.forced.len(),
        },
        tables: if cfg.trace { Some(tables) } else { None },
    })
}

/// End-to-end exact solve: validate, rescale, build the auxiliary graph,
/// decompose, nicify, run the DP, and verify the answer by simulation.
pub fn min_seed_set(
    net: &SupplyChainNetwork,
    cfg: &SolverConfig,
) -> Result<SolveResult, SolveError> {
    let start = Instant::now();
    let report = validate_network(net, cfg.mode);
    if !report.is_structurally_valid() {
        return Err(SolveError::InvalidNetwork(
            report
                .issues
                .iter()
                .filter(|i| i.severity == Severity::Error)
                .map(|i| i.message.clone())
                .collect(),
        ));
    }
    if net.nodes().is_empty() {
        return Ok(SolveResult {
            opt_size: 0,
            seed: BTreeSet::new(),
            seed_aux: BTreeSet::new(),
            forced: vec![],
            diagnostics: SolveDiagnostics::default(),
            tables: None,
        });
    }

    let opts = AuxBuildOptions { preseed: cfg.preseed.clone(), ..Default::default() };
    let aux = match cfg.mode {
        CostMode::Epsilon => build_aux_epsilon_with(net, &opts)?,
        CostMode::General => {
            let (scaled, _) = rescale_integral(net);
            build_aux_general_with(&scaled, &opts)?
        }
    };

    let skeleton = aux.skeleton();
    let td = match &cfg.imported_td {
        Some(td) => {
            let check = validate_decomposition(&skeleton, td);
            if !check.is_valid() {
                return Err(SolveError::Decomposition(format!(
                    "imported decomposition invalid: {:?}",
                    check.violations[0]
                )));
            }
            td.clone()
        }
        None => decompose(&skeleton, cfg.heuristic),
    };
    let ntd = to_nice(&td, &skeleton, cfg.root)
        .map_err(|e| SolveError::Decomposition(e.to_string()))?;

    let mut result = solve(&aux, &ntd, cfg)?;

    // the returned seed must fully activate the network
    let mut check_seed = result.seed.clone();
    check_seed.extend(cfg.preseed.iter().copied());
    let outcome = simulate(net, &check_seed, cfg.mode)?;
    if !outcome.fully_active(net) {
        return Err(SolveError::Verification(format!(
            "solver seed {:?} does not activate the whole network",
            result.seed
        )));
    }
    result.diagnostics.wall_ms = start.elapsed().as_millis();
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auxgraph::build_aux_epsilon;
    use crate::fixtures;
    use crate::net::NodeId;
    use crate::ratio::rational_from_u64;
    use crate::treedec::NiceNode;

    /// Figure auxiliary ids: p_1..p_4 = 0..3; node-nodes
    /// 1, {3,6}, 2, 7, 4, 5, 8, 9 = 4..11.
    fn aux() -> AuxGraph {
        build_aux_epsilon(&fixtures::figure_network()).unwrap()
    }

    fn seed(ids: &[AuxId]) -> MatrixEntry {
        MatrixEntry::Seed(ids.iter().copied().collect())
    }

    #[test]
    fn leaf_worked_entries() {
        let aux = aux();
        let params = DpParams { omega: 3, cap: 3, parallel: false };
        // bag (p_3, 4, 7) in the worked slot order
        let m = leaf_table(&aux, &[2, 8, 7], &params);
        assert_eq!(m.get(&[1, 1, 0], &[1, 2, 0]), seed(&[]));
        assert_eq!(m.get(&[1, 1, 3], &[1, 2, 0]), seed(&[7]));
        assert_eq!(m.get(&[1, 1, 3], &[0, 2, 1]), MatrixEntry::Infeasible);
    }

    #[test]
    fn replace_worked_entries() {
        let aux = aux();
        let params = DpParams { omega: 3, cap: 3, parallel: false };
        let child = leaf_table(&aux, &[2, 8, 7], &params); // (p_3, 4, 7)
        // the child's activation-rank table behind the phase-one minimum
        assert_eq!(child.get(&[1, 1, 3], &[1, 0, 0]), seed(&[8, 7]));
        assert_eq!(child.get(&[1, 1, 3], &[1, 1, 0]), seed(&[8, 7]));
        assert_eq!(child.get(&[1, 1, 3], &[1, 2, 0]), seed(&[7]));
        assert_eq!(child.get(&[1, 1, 3], &[1, 3, 0]), seed(&[7]));

        // p_4 enters for 4: bag (p_3, p_4, 7)
        let m = replace_step(&aux, &child, 3, 8, &params);
        assert_eq!(m.bag(), &[2, 3, 7]);
        // phase one minimum {7}; the (p_4, 7) fold leaves it unchanged since
        // the later activator p_4 already has threshold digit zero
        assert_eq!(m.get(&[1, 0, 3], &[1, 2, 0]), seed(&[7]));
        // with 7 activating last, the fold discounts its digit by the edge
        // weight: the cell equals the pre-fold entry at (1, 0, 2)
        assert_eq!(m.get(&[1, 0, 3], &[1, 0, 2]), seed(&[8, 7]));
    }

    #[test]
    fn join_reduction_and_split_constraint() {
        let aux = aux();
        let bag: Vec<AuxId> = vec![2, 3, 7]; // (p_3, p_4, 7)
        let red = activation_reduction(&aux, &bag, &[1, 2, 0]);
        assert_eq!(red, vec![1, 1, 0]);

        let params = DpParams { omega: 3, cap: 3, parallel: false };
        let left = leaf_table(&aux, &bag, &params);
        let right = leaf_table(&aux, &bag, &params);
        let joined = join_step(&aux, &left, &right, &params);

        // brute-force the paper's split rule f + g = c + red per slot
        let probe_c = [1u64, 0, 3];
        let probe_a = [1u64, 2, 0];
        let mut best: Option<BTreeSet<AuxId>> = None;
        let target: Vec<u64> = (0..3).map(|i| probe_c[i] + red[i]).collect();
        let mut f = [0u64; 3];
        loop {
            if f.iter().zip(&target).all(|(fi, ti)| fi <= ti && ti - fi <= 3) {
                let g: Vec<u64> = (0..3).map(|i| target[i] - f[i]).collect();
                if let (MatrixEntry::Seed(l), MatrixEntry::Seed(r)) =
                    (left.get(&f, &probe_a), right.get(&g, &probe_a))
                {
                    let union: BTreeSet<AuxId> = l.union(&r).copied().collect();
                    let size = |s: &BTreeSet<AuxId>| -> u64 {
                        s.iter().map(|&i| aux.cont_size(i)).sum()
                    };
                    if best.as_ref().map_or(true, |b| size(&union) < size(b)) {
                        best = Some(union);
                    }
                }
            }
            let mut done = true;
            for d in f.iter_mut() {
                if *d < 3 {
                    *d += 1;
                    done = false;
                    break;
                }
                *d = 0;
            }
            if done {
                break;
            }
        }
        let direct = joined.get(&probe_c, &probe_a);
        match (direct, best) {
            (MatrixEntry::Seed(s), Some(b)) => {
                let size = |s: &BTreeSet<AuxId>| -> u64 {
                    s.iter().map(|&i| aux.cont_size(i)).sum()
                };
                assert_eq!(size(&s), size(&b));
            }
            (MatrixEntry::Infeasible, None) => {}
            (got, want) => panic!("join disagrees with split enumeration: {got:?} vs {want:?}"),
        }

        // both children infeasible at a cell keeps the join infeasible
        assert_eq!(left.get(&[1, 1, 3], &[0, 2, 1]), MatrixEntry::Infeasible);
        assert_eq!(joined.get(&[1, 1, 3], &[0, 2, 1]), MatrixEntry::Infeasible);
    }

    pub(super) fn worked_nice_td_public() -> NiceTreeDecomposition { worked_nice_td() }

    /// Hand-built nice decomposition of the figure auxiliary graph with a
    /// root join at bag (p_2, p_3, 9), mirroring the worked example tree.
    fn worked_nice_td() -> NiceTreeDecomposition {
        let leaf = |bag: [usize; 3]| NiceNode { bag: bag.to_vec(), kind: NiceKind::Leaf };
        let repl = |bag: [usize; 3], child: usize, slot: usize, enters: usize, leaves: usize| {
            NiceNode { bag: bag.to_vec(), kind: NiceKind::Replace { child, slot, enters, leaves } }
        };
        let nodes = vec![
            // left chain: (p_1, 36, 8) up to (p_2, p_3, 9)
            leaf([0, 5, 10]),                 // 0
            repl([0, 5, 4], 0, 2, 4, 10),     // 1: 1 enters for 8
            repl([1, 5, 4], 1, 0, 1, 0),      // 2: p_2 enters for p_1
            repl([1, 5, 11], 2, 2, 11, 4),    // 3: 9 enters for 1
            repl([1, 2, 11], 3, 1, 2, 5),     // 4: p_3 enters for 36 (left root)
            // right side, chain A: (4, p_3, 9) to the inner join bag
            leaf([8, 2, 11]),                 // 5
            repl([3, 2, 11], 5, 0, 3, 8),     // 6: p_4 enters for 4
            // right side, chain B: (p_4, p_3, 2) up through 5, 7, and 9
            leaf([3, 2, 6]),                  // 7
            repl([3, 2, 9], 7, 2, 9, 6),      // 8: 5 enters for 2
            repl([3, 2, 7], 8, 2, 7, 9),      // 9: 7 enters for 5
            repl([3, 2, 11], 9, 2, 11, 7),    // 10: 9 enters for 7
            NiceNode { bag: vec![3, 2, 11], kind: NiceKind::Join { left: 6, right: 10 } }, // 11
            repl([1, 2, 11], 11, 0, 1, 3),    // 12: p_2 enters for p_4 (right root)
            NiceNode { bag: vec![1, 2, 11], kind: NiceKind::Join { left: 4, right: 12 } }, // 13
        ];
        NiceTreeDecomposition::from_parts(nodes, 13).unwrap()
    }

    #[test]
    fn join_synergy_prefers_shared_seed() {
        let aux = aux();
        let ntd = worked_nice_td();
        let mut cfg = SolverConfig::new(CostMode::Epsilon);
        cfg.trace = true;
        let result = solve(&aux, &ntd, &cfg).unwrap();
        let tables = result.tables.as_ref().unwrap();

        // bag (p_2, p_3, 9): thresholds (1, 0, 2), order p_3 -> 9 -> p_2
        let c = [1u64, 0, 2];
        let a = [2u64, 0, 1];
        let left = tables[4].as_ref().unwrap();
        let right = tables[12].as_ref().unwrap();
        let root = tables[13].as_ref().unwrap();
        assert_eq!(left.get(&c, &a), seed(&[11]));
        assert_eq!(right.get(&c, &a), seed(&[9]));
        assert_eq!(root.get(&c, &a), seed(&[11]));
        assert_eq!(result.opt_size, 5);
    }

    #[test]
    fn solve_matches_figure_optimum() {
        let net = fixtures::figure_network();
        let cfg = SolverConfig::new(CostMode::Epsilon);
        let result = min_seed_set(&net, &cfg).unwrap();
        assert_eq!(result.opt_size, 5);
        let sim = simulate(&net, &result.seed, CostMode::Epsilon).unwrap();
        assert!(sim.fully_active(&net));
    }

    #[test]
    fn solve_single_path_needs_k_minus_one() {
        let net = fixtures::single_path_network(3, rational_from_u64(1));
        let result = min_seed_set(&net, &SolverConfig::new(CostMode::Epsilon)).unwrap();
        assert_eq!(result.opt_size, 2);
    }

    #[test]
    fn solve_counts_components_at_k_two() {
        let net = fixtures::disjoint_pairs_network(3);
        let result = min_seed_set(&net, &SolverConfig::new(CostMode::Epsilon)).unwrap();
        assert_eq!(result.opt_size, 3);
    }

    #[test]
    fn k_one_forces_only_pathless_nodes() {
        use crate::net::{NetNode, Path, SupplyChainNetwork};
        use num::rational::BigRational;
        use num::One;
        let nodes = vec![
            NetNode { id: NodeId(1), tier: 1, cost: BigRational::one() },
            NetNode { id: NodeId(2), tier: 1, cost: BigRational::one() },
        ];
        let paths = vec![Path { nodes: vec![NodeId(1)], flow: rational_from_u64(1) }];
        let net = SupplyChainNetwork::new(1, nodes, [], paths).unwrap();
        let result = min_seed_set(&net, &SolverConfig::new(CostMode::Epsilon)).unwrap();
        assert_eq!(result.opt_size, 1);
        assert_eq!(result.seed, [NodeId(2)].into_iter().collect());
    }

    #[test]
    fn tiny_budget_is_rejected_up_front() {
        let net = fixtures::figure_network();
        let mut cfg = SolverConfig::new(CostMode::Epsilon);
        cfg.memory_budget = 512;
        match min_seed_set(&net, &cfg) {
            Err(SolveError::MemoryBudgetExceeded { estimated_entries, .. }) => {
                assert!(estimated_entries > 0);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn parallel_solve_is_bit_identical() {
        let net = fixtures::figure_network();
        let mut cfg = SolverConfig::new(CostMode::Epsilon);
        let seq = min_seed_set(&net, &cfg).unwrap();
        cfg.parallel = true;
        let par = min_seed_set(&net, &cfg).unwrap();
        assert_eq!(seq.opt_size, par.opt_size);
        assert_eq!(seq.seed, par.seed);
    }

    #[test]
    fn preseeded_nodes_are_free() {
        let net = fixtures::single_path_network(3, rational_from_u64(1));
        let mut cfg = SolverConfig::new(CostMode::Epsilon);
        cfg.preseed = [NodeId(1)].into_iter().collect();
        let result = min_seed_set(&net, &cfg).unwrap();
        // one of the remaining two nodes still has to be seeded
        assert_eq!(result.opt_size, 1);
        assert!(!result.seed.contains(&NodeId(1)));
    }
}

#[cfg(test)]
mod debug_probe {
    use super::*;
    use crate::auxgraph::build_aux_epsilon;
    use crate::fixtures;

    #[test]
    fn probe_left_chain() {
        let aux = build_aux_epsilon(&fixtures::figure_network()).unwrap();
        let params = DpParams { omega: 3, cap: 3, parallel: false };
        let n0 = leaf_table(&aux, &[0, 5, 10], &params);          // (p_1, 36, 8)
        let n1 = replace_step(&aux, &n0, 4, 10, &params);          // 1 enters for 8
        let n2 = replace_step(&aux, &n1, 1, 0, &params);           // p_2 enters for p_1
        let n3 = replace_step(&aux, &n2, 11, 4, &params);          // 9 enters for 1
        let n4 = replace_step(&aux, &n3, 2, 5, &params);           // p_3 enters for 36
        eprintln!("n2[(0,2,1),(2,3,3)] = {:?}", n2.get(&[0,2,1], &[2,3,3]));
        eprintln!("n2[(1,2,1),(2,3,1)] = {:?}", n2.get(&[1,2,1], &[2,3,1]));
        eprintln!("n3[(1,2,1),(2,3,1)] = {:?}", n3.get(&[1,2,1], &[2,3,1]));
        eprintln!("n3[(0,2,1),(2,3,1)] = {:?}", n3.get(&[0,2,1], &[2,3,1]));
        eprintln!("n4[(1,0,2),(2,0,1)] = {:?}", n4.get(&[1,0,2], &[2,0,1]));
        eprintln!("n4[(1,0,1),(2,0,1)] = {:?}", n4.get(&[1,0,1], &[2,0,1]));
        eprintln!("n0[(3,2,1),(0,1,2)] = {:?}", n0.get(&[3,2,1], &[0,1,2]));
    }
}

#[cfg(test)]
mod debug_probe2 {
    use super::*;
    use crate::auxgraph::build_aux_epsilon;
    use crate::fixtures;

    #[test]
    fn probe_synergy_tables() {
        let aux = build_aux_epsilon(&fixtures::figure_network()).unwrap();
        let ntd = super::tests::worked_nice_td_public();
        let mut cfg = SolverConfig::new(CostMode::Epsilon);
        cfg.trace = true;
        let result = solve(&aux, &ntd, &cfg).unwrap();
        let tables = result.tables.as_ref().unwrap();
        for idx in [4usize, 12, 13] {
            let t = tables[idx].as_ref().unwrap();
            eprintln!("table {idx}: bag {:?} cell {:?}", t.bag(), t.get(&[1,0,2], &[2,0,1]));
        }
        let n4 = tables[4].as_ref().unwrap();
        eprintln!("n3 cell via n4 parent-child: {:?}", tables[3].as_ref().unwrap().get(&[1,2,1], &[2,3,1]));
        eprintln!("n2 cell: {:?}", tables[2].as_ref().unwrap().get(&[0,2,1], &[2,3,3]));
        eprintln!("n4 all-a scan at c=(1,0,2):");
        for a0 in 0..=3u64 { for a1 in 0..=3u64 { for a2 in 0..=3u64 {
            if (a0,a1,a2) == (2,0,1) {
                eprintln!("  a=({a0},{a1},{a2}) -> {:?}", n4.get(&[1,0,2], &[a0,a1,a2]));
            }
        }}}
    }
}
