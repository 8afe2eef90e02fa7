//! Exact maximum free-subset computation.
//!
//! Instances of a proscribed family inside a ground set form a hypergraph of
//! forbidden vertex subsets; the free-subset number is the maximum set of
//! vertices containing no full edge. The solver is a depth-first branch and
//! bound with unit propagation, a greedy edge-packing bound, and optional
//! capacity (partition) bounds supplied by callers that know extra structure
//! (e.g. slab caps on grids).

use std::collections::BTreeSet;

use crate::patterns::{enumerate_instances, NaturalSet, PatternFamily};
use crate::{Error, Result};

pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000_000;
/// Largest vertex count the exhaustive validation oracle accepts.
pub const ORACLE_VERTEX_CAP: usize = 24;

/// Ground set plus forbidden vertex subsets (each an instance of 𝒜).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForbiddenHypergraph {
    vertex_count: usize,
    edges: Vec<Vec<u32>>,
}

impl ForbiddenHypergraph {
    /// Validates, sorts, and deduplicates edges.
    pub fn new(vertex_count: usize, edges: impl IntoIterator<Item = Vec<u32>>) -> Result<Self> {
        let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
        for mut edge in edges {
            edge.sort_unstable();
            edge.dedup();
            if edge.len() < 2 {
                return Err(Error::InvalidParameter(
                    "forbidden subsets must have at least 2 vertices".into(),
                ));
            }
            if *edge.last().unwrap() as usize >= vertex_count {
                return Err(Error::InvalidParameter(format!(
                    "edge vertex {} out of range (vertex count {vertex_count})",
                    edge.last().unwrap()
                )));
            }
            seen.insert(edge);
        }
        Ok(ForbiddenHypergraph {
            vertex_count,
            edges: seen.into_iter().collect(),
        })
    }

    /// Hypergraph of all `family` instances inside `ground`, along with the
    /// vertex-id → element mapping (sorted ground elements).
    pub fn from_family(ground: &NaturalSet, family: PatternFamily) -> Result<(Self, Vec<u64>)> {
        let elements = ground.elements().to_vec();
        let edges = enumerate_instances(family, ground)?
            .into_iter()
            .map(|inst| {
                inst.elements()
                    .iter()
                    .map(|x| elements.binary_search(x).unwrap() as u32)
                    .collect()
            })
            .collect::<Vec<Vec<u32>>>();
        let h = ForbiddenHypergraph::new(elements.len(), edges)?;
        Ok((h, elements))
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[Vec<u32>] {
        &self.edges
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProofStatus {
    Exact,
    BudgetExceeded,
}

impl std::fmt::Display for ProofStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProofStatus::Exact => write!(f, "exact"),
            ProofStatus::BudgetExceeded => write!(f, "budget-exceeded"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    /// Maximum free-subset size (best known lower bound when budget-limited).
    pub optimum: u64,
    /// Sorted vertex ids of a free subset achieving `optimum`.
    pub witness: Vec<u32>,
    pub nodes_explored: u64,
    pub proof_status: ProofStatus,
}

/// A partition of (part of) the vertex set into groups with known per-group
/// caps on any free subset; yields the bound Σ min(cap, remaining in group).
#[derive(Debug, Clone)]
pub struct CapacityPartition {
    pub groups: Vec<Vec<u32>>,
    pub caps: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub node_budget: u64,
    /// Accepted for CLI parity; the search is single-pass and deterministic,
    /// so results never depend on this value.
    pub threads: usize,
    pub capacity_hints: Vec<CapacityPartition>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            node_budget: DEFAULT_NODE_BUDGET,
            threads: 1,
            capacity_hints: Vec::new(),
        }
    }
}

const UNDECIDED: u8 = 0;
const IN: u8 = 1;
const OUT: u8 = 2;
const NO_GROUP: u32 = u32::MAX;

enum TrailOp {
    Assign(u32),
    EdgeDec(u32),
    EdgeKill(u32),
}

struct PartState {
    group_of: Vec<u32>,
    caps: Vec<u64>,
    avail: Vec<u64>,
    uncovered_avail: u64,
}

struct Search<'a> {
    edges: &'a [Vec<u32>],
    vert_edges: Vec<Vec<u32>>,
    degree: Vec<u32>,
    state: Vec<u8>,
    residual: Vec<u32>,
    alive: Vec<bool>,
    live_edges: usize,
    included: u64,
    undecided: u64,
    best_size: u64,
    best_witness: Vec<u32>,
    nodes: u64,
    budget: u64,
    stopped: bool,
    trail: Vec<TrailOp>,
    parts: Vec<PartState>,
    force_queue: Vec<u32>,
    mark: Vec<u32>,
    mark_epoch: u32,
    buckets: Vec<Vec<u32>>,
}

impl<'a> Search<'a> {
    fn new(h: &'a ForbiddenHypergraph, opts: &SolverOptions) -> Result<Self> {
        let v = h.vertex_count;
        let mut vert_edges = vec![Vec::new(); v];
        let mut degree = vec![0u32; v];
        let mut max_edge = 2usize;
        for (i, e) in h.edges.iter().enumerate() {
            max_edge = max_edge.max(e.len());
            for &x in e {
                vert_edges[x as usize].push(i as u32);
                degree[x as usize] += 1;
            }
        }
        let mut parts = Vec::new();
        for hint in &opts.capacity_hints {
            if hint.caps.len() != hint.groups.len() {
                return Err(Error::InvalidParameter(
                    "capacity hint needs one cap per group".into(),
                ));
            }
            let mut group_of = vec![NO_GROUP; v];
            let mut avail = vec![0u64; hint.groups.len()];
            for (g, members) in hint.groups.iter().enumerate() {
                for &x in members {
                    if x as usize >= v {
                        return Err(Error::InvalidParameter(
                            "capacity hint vertex out of range".into(),
                        ));
                    }
                    if group_of[x as usize] != NO_GROUP {
                        return Err(Error::InvalidParameter(
                            "capacity hint groups must be disjoint".into(),
                        ));
                    }
                    group_of[x as usize] = g as u32;
                    avail[g] += 1;
                }
            }
            let covered: u64 = avail.iter().sum();
            parts.push(PartState {
                group_of,
                caps: hint.caps.clone(),
                avail,
                uncovered_avail: v as u64 - covered,
            });
        }
        Ok(Search {
            edges: &h.edges,
            vert_edges,
            degree,
            state: vec![UNDECIDED; v],
            residual: h.edges.iter().map(|e| e.len() as u32).collect(),
            alive: vec![true; h.edges.len()],
            live_edges: h.edges.len(),
            included: 0,
            undecided: v as u64,
            best_size: 0,
            best_witness: Vec::new(),
            nodes: 0,
            budget: opts.node_budget,
            stopped: false,
            trail: Vec::new(),
            parts,
            force_queue: Vec::new(),
            mark: vec![0; v],
            mark_epoch: 0,
            buckets: vec![Vec::new(); max_edge + 1],
        })
    }

    /// Assigns an undecided vertex; false on conflict (an edge went fully IN).
    fn assign(&mut self, v: u32, include: bool) -> bool {
        debug_assert_eq!(self.state[v as usize], UNDECIDED);
        self.state[v as usize] = if include { IN } else { OUT };
        self.trail.push(TrailOp::Assign(v));
        self.undecided -= 1;
        if include {
            self.included += 1;
        } else {
            for p in &mut self.parts {
                match p.group_of[v as usize] {
                    NO_GROUP => p.uncovered_avail -= 1,
                    g => p.avail[g as usize] -= 1,
                }
            }
        }
        for idx in 0..self.vert_edges[v as usize].len() {
            let e = self.vert_edges[v as usize][idx];
            if !self.alive[e as usize] {
                continue;
            }
            if include {
                self.residual[e as usize] -= 1;
                self.trail.push(TrailOp::EdgeDec(e));
                match self.residual[e as usize] {
                    0 => return false,
                    1 => {
                        let u = *self.edges[e as usize]
                            .iter()
                            .find(|&&u| self.state[u as usize] == UNDECIDED)
                            .expect("residual 1 edge has an undecided vertex");
                        self.force_queue.push(u);
                    }
                    _ => {}
                }
            } else {
                self.alive[e as usize] = false;
                self.live_edges -= 1;
                self.trail.push(TrailOp::EdgeKill(e));
            }
        }
        true
    }

    /// Excludes every queued forced-out vertex; false on conflict.
    fn propagate(&mut self) -> bool {
        while let Some(v) = self.force_queue.pop() {
            match self.state[v as usize] {
                OUT => continue,
                IN => return false, // defensive; unreachable with one IN per wave
                _ => {
                    if !self.assign(v, false) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn rewind(&mut self, mark: usize) {
        while self.trail.len() > mark {
            match self.trail.pop().unwrap() {
                TrailOp::Assign(v) => {
                    if self.state[v as usize] == IN {
                        self.included -= 1;
                    } else {
                        for p in &mut self.parts {
                            match p.group_of[v as usize] {
                                NO_GROUP => p.uncovered_avail += 1,
                                g => p.avail[g as usize] += 1,
                            }
                        }
                    }
                    self.state[v as usize] = UNDECIDED;
                    self.undecided += 1;
                }
                TrailOp::EdgeDec(e) => self.residual[e as usize] += 1,
                TrailOp::EdgeKill(e) => {
                    self.alive[e as usize] = true;
                    self.live_edges += 1;
                }
            }
        }
    }

    /// Upper bound on any completion of the current partial assignment.
    fn bound(&mut self) -> u64 {
        // Greedy packing of live edges with pairwise-disjoint undecided parts:
        // each packed edge forces at least one exclusion.
        for b in &mut self.buckets {
            b.clear();
        }
        for e in 0..self.edges.len() {
            if self.alive[e] {
                debug_assert!(self.residual[e] >= 2);
                self.buckets[self.residual[e] as usize].push(e as u32);
            }
        }
        self.mark_epoch += 1;
        let epoch = self.mark_epoch;
        let mut packed = 0u64;
        for bucket in &self.buckets {
            for &e in bucket {
                let verts = &self.edges[e as usize];
                let disjoint = verts.iter().all(|&u| {
                    self.state[u as usize] != UNDECIDED || self.mark[u as usize] != epoch
                });
                if disjoint {
                    packed += 1;
                    for &u in verts {
                        if self.state[u as usize] == UNDECIDED {
                            self.mark[u as usize] = epoch;
                        }
                    }
                }
            }
        }
        let mut bound = self.included + self.undecided - packed;
        for p in &self.parts {
            let mut s = p.uncovered_avail;
            for (g, &avail) in p.avail.iter().enumerate() {
                s += avail.min(p.caps[g]);
            }
            bound = bound.min(s);
        }
        bound
    }

    /// Branch vertex: in a live edge of minimum residual (tie: least edge id),
    /// the undecided vertex of maximum degree (tie: least vertex id).
    fn select_branch(&self) -> u32 {
        let mut best_edge = usize::MAX;
        let mut best_res = u32::MAX;
        for (e, &alive) in self.alive.iter().enumerate() {
            if alive && self.residual[e] < best_res {
                best_res = self.residual[e];
                best_edge = e;
            }
        }
        let mut pick = u32::MAX;
        let mut pick_deg = 0;
        for &u in &self.edges[best_edge] {
            if self.state[u as usize] == UNDECIDED
                && (pick == u32::MAX || self.degree[u as usize] > pick_deg)
            {
                pick = u;
                pick_deg = self.degree[u as usize];
            }
        }
        pick
    }

    fn dfs(&mut self) {
        if self.stopped {
            return;
        }
        if self.nodes >= self.budget {
            self.stopped = true;
            return;
        }
        self.nodes += 1;
        if self.live_edges == 0 {
            let candidate = self.included + self.undecided;
            if candidate > self.best_size {
                self.best_size = candidate;
                self.best_witness = self
                    .state
                    .iter()
                    .enumerate()
                    .filter(|(_, &s)| s != OUT)
                    .map(|(v, _)| v as u32)
                    .collect();
            }
            return;
        }
        if self.included + self.undecided <= self.best_size || self.bound() <= self.best_size {
            return;
        }
        let v = self.select_branch();
        for include in [true, false] {
            let mark = self.trail.len();
            self.force_queue.clear();
            if self.assign(v, include) && self.propagate() {
                self.dfs();
            }
            self.rewind(mark);
            if self.stopped {
                return;
            }
        }
    }
}

/// Exact maximum independent-set size of the forbidden hypergraph, with a
/// witness. Budget exhaustion yields a flagged best-known result, not an
/// error.
pub fn max_free(h: &ForbiddenHypergraph, opts: &SolverOptions) -> Result<SolveResult> {
    if opts.node_budget == 0 {
        return Err(Error::InvalidParameter("node budget must be ≥ 1".into()));
    }
    if opts.threads == 0 {
        return Err(Error::InvalidParameter("thread count must be ≥ 1".into()));
    }
    let mut search = Search::new(h, opts)?;
    search.dfs();
    Ok(SolveResult {
        optimum: search.best_size,
        witness: search.best_witness,
        nodes_explored: search.nodes,
        proof_status: if search.stopped {
            ProofStatus::BudgetExceeded
        } else {
            ProofStatus::Exact
        },
    })
}

/// Validation oracle: complete subset enumeration, capped at
/// [`ORACLE_VERTEX_CAP`] vertices.
pub fn exhaustive_max_free(h: &ForbiddenHypergraph) -> Result<SolveResult> {
    let v = h.vertex_count;
    if v > ORACLE_VERTEX_CAP {
        return Err(Error::OracleCapExceeded {
            vertices: v,
            cap: ORACLE_VERTEX_CAP,
        });
    }
    let edge_masks: Vec<u32> = h
        .edges
        .iter()
        .map(|e| e.iter().fold(0u32, |m, &x| m | 1 << x))
        .collect();
    let mut best = 0u32;
    let mut best_mask = 0u32;
    let top: u64 = 1u64 << v;
    for mask in 1..top {
        let mask = mask as u32;
        if mask.count_ones() > best && edge_masks.iter().all(|&em| mask & em != em) {
            best = mask.count_ones();
            best_mask = mask;
        }
    }
    Ok(SolveResult {
        optimum: best as u64,
        witness: (0..v as u32).filter(|&x| best_mask >> x & 1 == 1).collect(),
        nodes_explored: top,
        proof_status: ProofStatus::Exact,
    })
}

/// Solve bundle for a concrete ground set: result plus the witness mapped
/// back to element values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundSolve {
    pub result: SolveResult,
    pub witness_elements: Vec<u64>,
}

pub fn solve_ground(
    ground: &NaturalSet,
    family: PatternFamily,
    opts: &SolverOptions,
) -> Result<GroundSolve> {
    let (h, elements) = ForbiddenHypergraph::from_family(ground, family)?;
    let result = max_free(&h, opts)?;
    let witness_elements = result.witness.iter().map(|&v| elements[v as usize]).collect();
    Ok(GroundSolve {
        result,
        witness_elements,
    })
}

/// G_family([n]); requires an exact (non-budget-limited) search.
pub fn g_value(family: PatternFamily, n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::InvalidParameter("g_value needs n ≥ 1".into()));
    }
    let solve = solve_ground(&NaturalSet::interval(n)?, family, &SolverOptions::default())?;
    match solve.result.proof_status {
        ProofStatus::Exact => Ok(solve.result.optimum),
        ProofStatus::BudgetExceeded => Err(Error::BudgetExceeded {
            explored: solve.result.nodes_explored,
            budget: DEFAULT_NODE_BUDGET,
            best: solve.result.optimum,
        }),
    }
}

/// r_k(m) for all m = 0..n: maximum size of a k-AP-free subset of [m].
///
/// Incremental: r_k(m) ∈ {r_k(m−1), r_k(m−1)+1}, and the increment happens
/// exactly when some free set of size r_k(m−1)+1 contains m. The running
/// witness is tried first; otherwise a descending DFS settles the question,
/// pruned by the table itself (a suffix needing t elements from [x] requires
/// r_k(x) ≥ t) and by a live count of *dead* values — values that would
/// complete a k-AP with the elements already chosen above them.
pub fn r_values(k: u32, n: u64) -> Result<Vec<u64>> {
    if k < 2 {
        return Err(Error::InvalidParameter("r_k needs k ≥ 2".into()));
    }
    if k == 2 {
        // Any two elements form a 2-AP.
        return Ok((0..=n).map(|m| (m > 0) as u64).collect());
    }
    let mut r = Vec::with_capacity(n as usize + 1);
    r.push(0u64);
    let mut witness = Bitset::new(n + 1);
    let mut budget = DEFAULT_NODE_BUDGET;
    for m in 1..=n {
        let prev = r[m as usize - 1];
        // Fast path: extend the running witness by m (m is the new maximum,
        // so any new AP descends from m).
        if !extends_ap(&witness, m, k) {
            witness.set(m);
            r.push(prev + 1);
            continue;
        }
        // Cheap repair: drop whatever clashes with m from the witness and
        // refill greedily; reaching prev+1 elements avoids a full search.
        if let Some(patched) = patch_witness(&witness, m, k, prev + 1) {
            witness = patched;
            witness.words.resize((n as usize + 64) / 64, 0);
            r.push(prev + 1);
            continue;
        }
        // A set of size prev+1 in [1, m] must contain m (else it fits in
        // [1, m−1]) and must contain 1 (else shifting it down by its
        // minimum − 1 puts a too-large free set inside [1, m−1]), so the
        // search anchors both endpoints.
        let mut search = ApSearch::new(k, m, &r, &mut budget);
        if search.run(prev + 1)? {
            witness = search.chosen;
            witness.words.resize((n as usize + 64) / 64, 0);
            r.push(prev + 1);
        } else {
            r.push(prev);
        }
    }
    Ok(r)
}

/// r_k(n): maximum k-AP-free subset size of [n].
pub fn r_value(k: u32, n: u64) -> Result<u64> {
    Ok(*r_values(k, n)?.last().unwrap())
}

#[derive(Clone)]
struct Bitset {
    words: Vec<u64>,
}

impl Bitset {
    fn new(len: u64) -> Self {
        Bitset {
            words: vec![0; (len as usize + 63) / 64],
        }
    }

    fn get(&self, i: u64) -> bool {
        self.words[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    fn set(&mut self, i: u64) {
        self.words[(i / 64) as usize] |= 1 << (i % 64);
    }

    fn clear(&mut self, i: u64) {
        self.words[(i / 64) as usize] &= !(1 << (i % 64));
    }

    /// Number of set bits at positions ≤ i.
    fn rank(&self, i: u64) -> u64 {
        let word = (i / 64) as usize;
        let mut count = self.words[..word].iter().map(|w| w.count_ones() as u64).sum::<u64>();
        let keep = i % 64 + 1;
        count += (self.words[word] << (64 - keep)).count_ones() as u64;
        count
    }

}

/// Does adding `m` (as the new maximum) to the set complete a k-AP?
fn extends_ap(members: &Bitset, m: u64, k: u32) -> bool {
    let span = (k - 1) as u64;
    let mut e = 1u64;
    while span * e < m {
        if (1..=span).all(|i| members.get(m - i * e)) {
            return true;
        }
        e += 1;
    }
    false
}

/// Some k-AP fully inside the set on [1, m], if any.
fn find_ap(members: &Bitset, m: u64, k: u32) -> Option<(u64, u64)> {
    let span = (k - 1) as u64;
    for e in 1..=m.saturating_sub(1) / span {
        for a in 1..=m - span * e {
            if (0..=span).all(|i| members.get(a + i * e)) {
                return Some((a, e));
            }
        }
    }
    None
}

/// Would the set stay k-AP-free on [1, m] after adding v?
fn can_add(members: &Bitset, v: u64, m: u64, k: u32) -> bool {
    let span = (k - 1) as u64;
    for e in 1..=(m - 1) / span {
        for j in 0..=span {
            if j * e >= v {
                break;
            }
            let a = v - j * e;
            if a + span * e > m {
                continue;
            }
            if (0..=span).all(|i| i == j || members.get(a + i * e)) {
                return false;
            }
        }
    }
    true
}

/// Repairs the running witness after m joins the ground set: remove one
/// member of each k-AP that m completes, then refill greedily from the
/// top. Returns the patched set only if it reaches `target` elements.
fn patch_witness(witness: &Bitset, m: u64, k: u32, target: u64) -> Option<Bitset> {
    let mut s = witness.clone();
    s.words.resize((m as usize + 64) / 64, 0);
    s.set(m);
    while let Some((a, _)) = find_ap(&s, m, k) {
        // Drop the smallest member; m itself stays.
        s.clear(a);
    }
    let mut count = 0;
    for word in &s.words {
        count += word.count_ones() as u64;
    }
    let mut v = m;
    while v >= 1 && count < target {
        if !s.get(v) && can_add(&s, v, m, k) {
            s.set(v);
            count += 1;
        }
        v -= 1;
    }
    (count >= target).then_some(s)
}

/// Search for a k-AP-free subset of [1, m] of a given size containing both
/// 1 and m (every maximum free set can be normalized to touch both ends).
///
/// Elements are chosen in descending order. `dead` marks every value y that
/// would complete a k-AP as the new minimum: y is dead iff some progression
/// {y+e, …, y+(k−1)e} lies in the chosen set, or y together with the low
/// anchor and the chosen set completes one. Dead values can never be
/// picked, which yields both an O(1) candidate test and the availability
/// prune (live values ≤ x must cover the remaining demand).
struct ApSearch<'a> {
    k: u32,
    m: u64,
    r: &'a [u64],
    budget: &'a mut u64,
    chosen: Bitset,
    dead: Bitset,
    undo: Vec<u64>,
    picked: u64,
}

impl<'a> ApSearch<'a> {
    fn new(k: u32, m: u64, r: &'a [u64], budget: &'a mut u64) -> Self {
        let mut s = ApSearch {
            k,
            m,
            r,
            budget,
            chosen: Bitset::new(m + 1),
            dead: Bitset::new(m + 1),
            undo: Vec::new(),
            picked: 2,
        };
        s.chosen.set(1);
        s.dead.set(1); // the anchor is not available as a future pick
        s.chosen.set(m);
        s.deaden(m);
        s
    }

    fn run(&mut self, size: u64) -> Result<bool> {
        self.dfs(self.m - 1, size - 2)
    }

    /// Marks values newly killed by choosing x. Two shapes: y = x − e is
    /// dead when {x, x+e, …, x+(k−2)e} all lie in the chosen set (y, x, …
    /// completes a k-AP), and u is dead when the progression through the
    /// low anchor (1, u, 2u−1, …) has all of its upper part chosen, x
    /// being its smallest upper element.
    fn deaden(&mut self, x: u64) {
        let inner = self.k as u64 - 2;
        let mut e = 1u64;
        while e < x && (inner == 0 || x + inner * e <= self.m) {
            if (1..=inner).all(|i| self.chosen.get(x + i * e)) {
                let y = x - e;
                if !self.dead.get(y) {
                    self.dead.set(y);
                    self.undo.push(y);
                }
            }
            e += 1;
        }
        let span = self.k as u64 - 1;
        for i in 2..=span {
            if (x - 1) % i == 0 {
                let u = 1 + (x - 1) / i;
                let rest_chosen = (2..=span).all(|j| {
                    let v = 1 + j * (u - 1);
                    j == i || (v <= self.m && self.chosen.get(v))
                });
                if rest_chosen && !self.dead.get(u) {
                    self.dead.set(u);
                    self.undo.push(u);
                }
            }
        }
    }

    /// Two-window bound. Splitting the remaining range at y, picks in
    /// (y, x] join the chosen part inside the window (y, m], whose free
    /// capacity r(m−y) is already partly consumed (the low anchor sits
    /// below every split, so it never counts there); picks in [2, y]
    /// join the low anchor inside [1, y], so they are capped by
    /// r(y) − 1. Live counts tighten both sides. All window widths are
    /// < m, so the table entries are already known.
    fn split_prune(&self, x: u64, need: u64) -> bool {
        let rank_x = self.dead.rank(x);
        let mut rank_y = rank_x;
        let mut y = x;
        while y > 1 {
            rank_y -= self.dead.get(y) as u64;
            y -= 1;
            let upper_live = (x - y) - (rank_x - rank_y);
            let upper = (self.r[(self.m - y) as usize] - (self.picked - 1))
                .min(self.r[(x - y) as usize])
                .min(upper_live);
            let lower = (self.r[y as usize] - 1).min(y - rank_y);
            if upper + lower < need {
                return true;
            }
        }
        false
    }

    fn dfs(&mut self, limit: u64, need: u64) -> Result<bool> {
        if need == 0 {
            return Ok(true);
        }
        if *self.budget == 0 {
            return Err(Error::BudgetExceeded {
                explored: DEFAULT_NODE_BUDGET,
                budget: DEFAULT_NODE_BUDGET,
                best: 0,
            });
        }
        *self.budget -= 1;
        if self.split_prune(limit.min(self.m - 1), need) {
            return Ok(false);
        }
        let mut x = limit;
        while x >= need {
            // Everything still to pick fits in [2, x] and joins the low
            // anchor there, so [1, x] must hold need+1 free elements; the
            // live count caps the interval too. Both only shrink with x.
            if self.r[x as usize] <= need || x - self.dead.rank(x) < need {
                return Ok(false);
            }
            if !self.dead.get(x) {
                let mark = self.undo.len();
                self.chosen.set(x);
                self.picked += 1;
                self.deaden(x);
                if self.dfs(x - 1, need - 1)? {
                    return Ok(true);
                }
                self.chosen.clear(x);
                self.picked -= 1;
                while self.undo.len() > mark {
                    let y = self.undo.pop().unwrap();
                    self.dead.clear(y);
                }
            }
            x -= 1;
        }
        Ok(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::is_free;

    fn interval_graph(family: PatternFamily, n: u64) -> ForbiddenHypergraph {
        ForbiddenHypergraph::from_family(&NaturalSet::interval(n).unwrap(), family)
            .unwrap()
            .0
    }

    #[test]
    fn hypergraph_validation() {
        assert!(ForbiddenHypergraph::new(3, [vec![0u32]]).is_err());
        assert!(ForbiddenHypergraph::new(3, [vec![0u32, 3]]).is_err());
        let h = ForbiddenHypergraph::new(3, [vec![1u32, 0], vec![0u32, 1], vec![1, 2]]).unwrap();
        assert_eq!(h.edges(), &[vec![0, 1], vec![1, 2]]);
    }

    #[test]
    fn no_edges_means_everything() {
        let h = ForbiddenHypergraph::new(5, Vec::<Vec<u32>>::new()).unwrap();
        let r = max_free(&h, &SolverOptions::default()).unwrap();
        assert_eq!(r.optimum, 5);
        assert_eq!(r.witness, vec![0, 1, 2, 3, 4]);
        assert_eq!(r.proof_status, ProofStatus::Exact);
    }

    #[test]
    fn gp_int_ten_elements() {
        let h = interval_graph(PatternFamily::gp_int(3).unwrap(), 10);
        let r = max_free(&h, &SolverOptions::default()).unwrap();
        assert_eq!(r.optimum, 8);
        assert_eq!(r.witness.len(), 8);
    }

    #[test]
    fn g_value_examples() {
        assert_eq!(g_value(PatternFamily::gp_int(3).unwrap(), 10).unwrap(), 8);
        assert_eq!(g_value(PatternFamily::gp_rat(3).unwrap(), 10).unwrap(), 8);
        assert_eq!(g_value(PatternFamily::GeomSquare, 6).unwrap(), 5);
    }

    #[test]
    fn exhaustive_complete_graph() {
        let edges: Vec<Vec<u32>> = (0..4u32)
            .flat_map(|a| (a + 1..4).map(move |b| vec![a, b]))
            .collect();
        let h = ForbiddenHypergraph::new(4, edges).unwrap();
        assert_eq!(exhaustive_max_free(&h).unwrap().optimum, 1);
    }

    #[test]
    fn exhaustive_squares_twelve() {
        // No single element lies in all six squares of [1..12] ({1,2,3,6},
        // {1,2,4,8}, {1,2,5,10}, {1,2,6,12}, {1,3,4,12}, {2,4,6,12}), so two
        // removals are needed and suffice ({1,2}).
        let h = interval_graph(PatternFamily::GeomSquare, 12);
        let r = exhaustive_max_free(&h).unwrap();
        assert_eq!(r.optimum, 10);
        assert_eq!(max_free(&h, &SolverOptions::default()).unwrap().optimum, 10);
    }

    #[test]
    fn exhaustive_cap_enforced() {
        let h = ForbiddenHypergraph::new(25, [vec![0u32, 1]]).unwrap();
        assert!(matches!(
            exhaustive_max_free(&h),
            Err(Error::OracleCapExceeded { vertices: 25, cap: 24 })
        ));
    }

    #[test]
    fn oracle_agreement_small_grounds() {
        for n in [6u64, 10, 14, 18] {
            for family in [
                PatternFamily::ap(3).unwrap(),
                PatternFamily::gp_int(3).unwrap(),
                PatternFamily::gp_rat(3).unwrap(),
                PatternFamily::GeomSquare,
                PatternFamily::gp_prime_power(2, 3).unwrap(),
                PatternFamily::gp_friable3(2).unwrap(),
            ] {
                let h = interval_graph(family, n);
                let fast = max_free(&h, &SolverOptions::default()).unwrap();
                let slow = exhaustive_max_free(&h).unwrap();
                assert_eq!(fast.optimum, slow.optimum, "{family} on [1..{n}]");
                assert_eq!(fast.proof_status, ProofStatus::Exact);
            }
        }
    }

    #[test]
    fn witnesses_are_free_and_deterministic() {
        for n in [12u64, 20, 30] {
            let family = PatternFamily::gp_rat(3).unwrap();
            let ground = NaturalSet::interval(n).unwrap();
            let a = solve_ground(&ground, family, &SolverOptions::default()).unwrap();
            let b = solve_ground(&ground, family, &SolverOptions::default()).unwrap();
            assert_eq!(a, b, "rerun must be identical");
            let witness = NaturalSet::new(a.witness_elements.clone(), n).unwrap();
            assert!(is_free(&witness, family).unwrap());
            assert_eq!(witness.len() as u64, a.result.optimum);
        }
    }

    #[test]
    fn budget_flagging() {
        let h = interval_graph(PatternFamily::gp_rat(3).unwrap(), 40);
        let opts = SolverOptions {
            node_budget: 3,
            ..SolverOptions::default()
        };
        let r = max_free(&h, &opts).unwrap();
        assert_eq!(r.proof_status, ProofStatus::BudgetExceeded);
        assert!(r.nodes_explored <= 3);
        let exact = max_free(&h, &SolverOptions::default()).unwrap();
        assert!(r.optimum <= exact.optimum, "budget result is a lower bound");
    }

    #[test]
    fn capacity_hints_are_sound() {
        // [1..20] split into two halves, each capped by its own exact value:
        // the hint must not change the optimum, only the node count.
        let family = PatternFamily::gp_rat(3).unwrap();
        let h = interval_graph(family, 20);
        let plain = max_free(&h, &SolverOptions::default()).unwrap();
        let low: Vec<u32> = (0..10).collect();
        let high: Vec<u32> = (10..20).collect();
        let cap_low = g_value(family, 10).unwrap();
        let opts = SolverOptions {
            capacity_hints: vec![CapacityPartition {
                groups: vec![low, high],
                caps: vec![cap_low, 10],
            }],
            ..SolverOptions::default()
        };
        let hinted = max_free(&h, &opts).unwrap();
        assert_eq!(plain.optimum, hinted.optimum);
    }

    #[test]
    fn monotone_g_values() {
        let family = PatternFamily::gp_int(3).unwrap();
        let mut prev = 0;
        for n in 1..=30 {
            let g = g_value(family, n).unwrap();
            assert!(g >= prev && g <= prev + 1, "n={n}: {prev} -> {g}");
            prev = g;
        }
    }

    #[test]
    fn rational_dominates_integer() {
        for n in [15u64, 24, 36, 48] {
            let rat = g_value(PatternFamily::gp_rat(3).unwrap(), n).unwrap();
            let int = g_value(PatternFamily::gp_int(3).unwrap(), n).unwrap();
            assert!(rat <= int, "n={n}: rational-free {rat} > integer-free {int}");
        }
    }

    #[test]
    fn dilation_invariance() {
        let family = PatternFamily::GeomSquare;
        let base = NaturalSet::interval(30).unwrap();
        let solved = solve_ground(&base, family, &SolverOptions::default()).unwrap();
        for c in [2u64, 3, 5] {
            let dilated = base.dilate(c).unwrap();
            let s = solve_ground(&dilated, family, &SolverOptions::default()).unwrap();
            assert_eq!(s.result.optimum, solved.result.optimum, "dilation by {c}");
        }
    }

    #[test]
    fn r_value_examples() {
        assert_eq!(r_value(3, 4).unwrap(), 3);
        assert_eq!(r_value(3, 7).unwrap(), 4);
        assert_eq!(r_value(3, 9).unwrap(), 5);
        assert_eq!(r_value(3, 0).unwrap(), 0);
    }

    #[test]
    fn r3_table_to_twenty() {
        let r = r_values(3, 20).unwrap();
        assert_eq!(
            r,
            vec![0, 1, 2, 2, 3, 4, 4, 4, 4, 5, 5, 6, 6, 7, 8, 8, 8, 8, 8, 8, 9]
        );
    }

    #[test]
    fn r4_r5_tables_to_thirty() {
        let r4 = r_values(4, 30).unwrap();
        assert_eq!(
            &r4[1..],
            &[
                1, 2, 3, 3, 4, 5, 5, 6, 7, 8, 8, 8, 9, 9, 10, 10, 11, 11, 12, 12, 13, 13, 14, 14,
                15, 15, 16, 17, 17, 18
            ]
        );
        let r5 = r_values(5, 30).unwrap();
        assert_eq!(
            &r5[1..],
            &[
                1, 2, 3, 4, 4, 5, 6, 7, 8, 8, 9, 10, 11, 12, 12, 13, 14, 15, 16, 16, 16, 16, 16,
                17, 18, 18, 19, 20, 21, 21
            ]
        );
    }

    #[test]
    fn r2_is_capped_at_one() {
        assert_eq!(r_values(2, 6).unwrap(), vec![0, 1, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn r_values_match_generic_solver() {
        let table = r_values(3, 16).unwrap();
        for n in 1..=16u64 {
            assert_eq!(table[n as usize], g_value(PatternFamily::ap(3).unwrap(), n).unwrap());
        }
    }

    #[test]
    fn subadditive_on_disjoint_split() {
        let family = PatternFamily::gp_rat(3).unwrap();
        for pivot in [7u64, 13, 20] {
            let whole = g_value(family, 40).unwrap();
            let low = NaturalSet::new(1..=pivot, 40).unwrap();
            let high = NaturalSet::new(pivot + 1..=40, 40).unwrap();
            let gl = solve_ground(&low, family, &SolverOptions::default()).unwrap();
            let gh = solve_ground(&high, family, &SolverOptions::default()).unwrap();
            assert!(whole <= gl.result.optimum + gh.result.optimum);
        }
    }
}
