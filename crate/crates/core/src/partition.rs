//! Joint search over short local-complementation sequences and bounded-size
//! vertex partitions, minimizing the number of edges between parts.

use std::collections::HashSet;
use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{GraphError, GraphState, VertexPartition};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PartitionError {
    #[error("{n} vertices exceeds the exact-solve cap of {cap}; use the heuristic solver")]
    TooLarge { n: usize, cap: usize },
    #[error("LC depth {l} exceeds the exact-solve cap of {cap}; use the heuristic solver")]
    TooDeep { l: usize, cap: usize },
    #[error("g_max must be positive")]
    ZeroGmax,
    #[error("more than one LC vertex chosen in a single step")]
    MultipleLc,
    #[error("edge matrix is not square/symmetric or choice vector has the wrong length")]
    Shape,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub const EXACT_VERTEX_CAP: usize = 12;
pub const EXACT_DEPTH_CAP: usize = 4;

/// Search effort for the heuristic. Iterations make runs reproducible;
/// the wall-clock limit is a safety net on top.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub iterations: u64,
    pub time: Option<Duration>,
}

impl Budget {
    pub fn iterations(iterations: u64) -> Self {
        Budget { iterations, time: None }
    }
}

#[derive(Clone, Debug)]
pub struct PartitionModel {
    pub graph: GraphState,
    /// Maximum number of LC steps.
    pub l: usize,
    pub g_max: usize,
    pub budget: Budget,
    pub seed: u64,
    pub exact_cap: usize,
}

impl PartitionModel {
    pub fn new(graph: GraphState, l: usize, g_max: usize) -> Self {
        PartitionModel {
            graph,
            l,
            g_max,
            budget: Budget::iterations(20_000),
            seed: 0,
            exact_cap: EXACT_VERTEX_CAP,
        }
    }

    fn max_parts(&self) -> usize {
        self.graph.len().div_ceil(self.g_max).max(1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Proof {
    Optimal,
    TimeLimited,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionSolution {
    pub lc_sequence: Vec<usize>,
    pub partition: VertexPartition,
    pub k: usize,
    pub proof: Proof,
    pub trace: Vec<TraceRow>,
    /// The heuristic stopped on its wall-clock limit.
    pub timed_out: bool,
}

impl PartitionSolution {
    /// The graph the partition refers to.
    pub fn transformed(&self, g: &GraphState) -> Result<GraphState, GraphError> {
        g.apply_lc_sequence(&self.lc_sequence)
    }

    /// Recompute K from scratch.
    pub fn verify_k(&self, g: &GraphState) -> Result<bool, GraphError> {
        Ok(self.transformed(g)?.cut_edges(&self.partition)?.len() == self.k)
    }

    /// Which limit on the partition is tight: the part count, the part size, both or neither.
    pub fn binding(&self) -> (bool, bool) {
        let parts = self.partition.parts();
        let count = parts.len() == self.partition.subgraph_count.max(1);
        let size = parts.iter().any(|p| p.len() == self.partition.g_max);
        (count, size)
    }
}

/// One line per new incumbent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceRow {
    pub iteration: u64,
    pub k: usize,
    pub elapsed_ms: u64,
}

pub fn write_trace<W: Write>(rows: &[TraceRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// One step of the exact LC edge dynamics.
pub fn step_dynamics(e: &[Vec<bool>], x: &[bool]) -> Result<Vec<Vec<bool>>, PartitionError> {
    let n = e.len();
    if x.len() != n || e.iter().any(|r| r.len() != n) {
        return Err(PartitionError::Shape);
    }
    let chosen: Vec<usize> = (0..n).filter(|&v| x[v]).collect();
    if chosen.len() > 1 {
        return Err(PartitionError::MultipleLc);
    }
    let mut next = e.to_vec();
    if let Some(&v0) = chosen.first() {
        for v1 in 0..n {
            for v2 in 0..n {
                if v1 != v2 && e[v0][v1] && e[v0][v2] {
                    next[v1][v2] ^= true;
                }
            }
        }
    }
    Ok(next)
}

/// Adjacency as bit masks; only used below the exact cap.
fn masks(g: &GraphState) -> Vec<u64> {
    (0..g.len())
        .map(|v| g.neighbors_row(v).iter_ones().fold(0u64, |m, u| m | 1 << u))
        .collect()
}

fn lc_masks(adj: &mut [u64], v: usize) {
    let row = adj[v];
    let mut rest = row;
    while rest != 0 {
        let a = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        adj[a] ^= row & !(1 << a);
    }
}

struct Incumbent {
    k: usize,
    lc_len: usize,
    lc: Vec<usize>,
    assignment: Vec<usize>,
}

struct Bnb<'a> {
    adj: &'a [u64],
    g_max: usize,
    max_parts: usize,
    part_of: Vec<usize>,
    members: Vec<u64>,
    best: Option<(usize, Vec<usize>)>,
    /// Accept ties with this K (only when nothing better exists yet).
    limit: usize,
}

impl Bnb<'_> {
    fn run(&mut self, v: usize, used: usize, cut: usize) {
        let n = self.adj.len();
        if cut > self.limit {
            return;
        }
        if v == n {
            // DFS order visits assignments lexicographically, so the first
            // one at a given K is the smallest.
            if self.best.as_ref().is_none_or(|(k, _)| cut < *k) {
                self.best = Some((cut, self.part_of.clone()));
                self.limit = cut;
            }
            return;
        }
        let room: usize = (0..self.max_parts)
            .map(|p| self.g_max - self.members[p].count_ones() as usize)
            .sum();
        if room < n - v {
            return;
        }
        let assigned = if v == 0 { 0 } else { (1u64 << v) - 1 };
        let back = self.adj[v] & assigned;
        // symmetry: v may open only the lowest-indexed empty part
        for p in 0..(used + 1).min(self.max_parts) {
            if self.members[p].count_ones() as usize >= self.g_max {
                continue;
            }
            let inc = (back & !self.members[p]).count_ones() as usize;
            self.part_of[v] = p;
            self.members[p] |= 1 << v;
            self.run(v + 1, used.max(p + 1), cut + inc);
            self.members[p] &= !(1 << v);
        }
    }
}

/// Provably K-minimal partition over all LC sequences of length at most `l`.
pub fn solve_exact(m: &PartitionModel) -> Result<PartitionSolution, PartitionError> {
    let n = m.graph.len();
    if m.g_max == 0 {
        return Err(PartitionError::ZeroGmax);
    }
    let cap = m.exact_cap.min(63);
    if n > cap {
        return Err(PartitionError::TooLarge { n, cap });
    }
    if m.l > EXACT_DEPTH_CAP {
        return Err(PartitionError::TooDeep { l: m.l, cap: EXACT_DEPTH_CAP });
    }
    let mut inc: Option<Incumbent> = None;
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let start = masks(&m.graph);
    seen.insert(start.clone());
    let mut level: Vec<(Vec<usize>, Vec<u64>)> = vec![(Vec::new(), start)];
    for depth in 0..=m.l {
        for (seq, adj) in &level {
            // a longer sequence must strictly beat the incumbent
            let limit = match &inc {
                None => usize::MAX,
                Some(b) if b.lc_len == depth => b.k,
                Some(b) if b.k == 0 => continue,
                Some(b) => b.k - 1,
            };
            let mut s = Bnb {
                adj,
                g_max: m.g_max,
                max_parts: m.max_parts(),
                part_of: vec![0; n],
                members: vec![0; m.max_parts()],
                best: None,
                limit,
            };
            s.run(0, 0, 0);
            if let Some((k, a)) = s.best {
                let better = match &inc {
                    None => true,
                    Some(b) => k < b.k || (k == b.k && depth == b.lc_len && a < b.assignment),
                };
                if better {
                    inc = Some(Incumbent { k, lc_len: depth, lc: seq.clone(), assignment: a });
                }
            }
        }
        if depth == m.l || inc.as_ref().is_some_and(|b| b.k == 0) {
            break;
        }
        let mut next = Vec::new();
        for (seq, adj) in &level {
            for v in 0..n {
                if adj[v].count_ones() < 2 {
                    continue;
                }
                let mut a = adj.clone();
                lc_masks(&mut a, v);
                if seen.insert(a.clone()) {
                    let mut s = seq.clone();
                    s.push(v);
                    next.push((s, a));
                }
            }
        }
        level = next;
    }
    let b = inc.unwrap_or(Incumbent { k: 0, lc_len: 0, lc: Vec::new(), assignment: Vec::new() });
    Ok(PartitionSolution {
        lc_sequence: b.lc,
        partition: VertexPartition::new(b.assignment, m.g_max),
        k: b.k,
        proof: Proof::Optimal,
        trace: Vec::new(),
        timed_out: false,
    })
}

/// Partition state on a fixed graph, with part sizes kept in sync.
#[derive(Clone)]
struct Layout {
    g: GraphState,
    part: Vec<usize>,
    sizes: Vec<usize>,
    k: usize,
}

impl Layout {
    fn new(g: GraphState, part: Vec<usize>, parts: usize) -> Self {
        let mut sizes = vec![0; parts];
        for &p in &part {
            sizes[p] += 1;
        }
        let k = cut_of(&g, &part);
        Layout { g, part, sizes, k }
    }

    fn links(&self, v: usize, p: usize) -> usize {
        self.g.neighbors_row(v).iter_ones().filter(|&u| self.part[u] == p).count()
    }

    /// Change in K from moving `v` to part `q`.
    fn delta(&self, v: usize, q: usize) -> isize {
        self.links(v, self.part[v]) as isize - self.links(v, q) as isize
    }

    fn relocate(&mut self, v: usize, q: usize) {
        let d = self.delta(v, q);
        self.sizes[self.part[v]] -= 1;
        self.sizes[q] += 1;
        self.part[v] = q;
        self.k = (self.k as isize + d) as usize;
    }

    /// Steepest descent with single moves and swaps.
    fn refine(&mut self, g_max: usize) {
        let n = self.part.len();
        loop {
            let mut best: Option<(isize, usize, usize)> = None;
            for v in 0..n {
                for q in 0..self.sizes.len() {
                    if q != self.part[v] && self.sizes[q] < g_max {
                        let d = self.delta(v, q);
                        if d < 0 && best.is_none_or(|b| d < b.0) {
                            best = Some((d, v, q));
                        }
                    }
                }
            }
            if let Some((_, v, q)) = best {
                self.relocate(v, q);
                continue;
            }
            let mut swap: Option<(isize, usize, usize)> = None;
            for u in 0..n {
                for v in u + 1..n {
                    let (a, b) = (self.part[u], self.part[v]);
                    if a == b {
                        continue;
                    }
                    let e = self.g.has_edge(u, v) as isize;
                    let d = self.delta(u, b) + self.delta(v, a) + 2 * e;
                    if d < 0 && swap.is_none_or(|s| d < s.0) {
                        swap = Some((d, u, v));
                    }
                }
            }
            match swap {
                Some((_, u, v)) => {
                    let (a, b) = (self.part[u], self.part[v]);
                    self.relocate(u, b);
                    self.relocate(v, a);
                }
                None => return,
            }
        }
    }
}

fn cut_of(g: &GraphState, part: &[usize]) -> usize {
    g.edges().iter().filter(|&&(u, v)| part[u] != part[v]).count()
}

fn canonical(part: &[usize]) -> Vec<usize> {
    VertexPartition::new(part.to_vec(), 1).canonical().assignment
}

/// Region growing from peripheral vertices, then local refinement. No LC.
pub fn seed_partition(g: &GraphState, g_max: usize) -> Result<VertexPartition, PartitionError> {
    if g_max == 0 {
        return Err(PartitionError::ZeroGmax);
    }
    let n = g.len();
    let parts = n.div_ceil(g_max).max(1);
    let mut part = vec![usize::MAX; n];
    let free = |part: &[usize], v: usize| part[v] == usize::MAX;
    for p in 0..parts {
        let open: Vec<usize> = (0..n).filter(|&v| free(&part, v)).collect();
        let Some(&root) = open.iter().min_by_key(|&&v| {
            (g.neighbors_row(v).iter_ones().filter(|&u| free(&part, u)).count(), v)
        }) else {
            break;
        };
        part[root] = p;
        let mut size = 1;
        while size < g_max {
            let pick = (0..n).filter(|&v| free(&part, v)).max_by_key(|&v| {
                let inside = g.neighbors_row(v).iter_ones().filter(|&u| part[u] == p).count();
                let outside = g.neighbors_row(v).iter_ones().filter(|&u| free(&part, u)).count();
                (inside, std::cmp::Reverse(outside), std::cmp::Reverse(v))
            });
            let Some(v) = pick else { break };
            part[v] = p;
            size += 1;
        }
    }
    let mut lay = Layout::new(g.bare(), part, parts);
    lay.refine(g_max);
    Ok(VertexPartition::new(canonical(&lay.part), g_max))
}

fn lc_graph(bare: &GraphState, seq: &[usize]) -> GraphState {
    let mut g = bare.clone();
    for &v in seq {
        g.toggle_neighborhood(v);
    }
    g
}

/// Strictly better: lower K, then fewer LC steps, then smaller assignment.
fn improves(k: usize, lc: &[usize], part: &[usize], best: &PartitionSolution) -> bool {
    (k, lc.len()) < (best.k, best.lc_sequence.len())
        || ((k, lc.len()) == (best.k, best.lc_sequence.len())
            && canonical(part) < best.partition.assignment)
}

/// Simulated annealing over (LC sequence, assignment), seeded with the
/// LC-free refined partition. Never returns anything worse than the seed.
pub fn solve_heuristic(m: &PartitionModel) -> Result<PartitionSolution, PartitionError> {
    let t0 = Instant::now();
    let seed = seed_partition(&m.graph, m.g_max)?;
    let bare = m.graph.bare();
    let n = bare.len();
    let parts = m.max_parts();
    let mut best = PartitionSolution {
        lc_sequence: Vec::new(),
        k: bare.cut_edges(&seed)?.len(),
        partition: seed.clone(),
        proof: Proof::TimeLimited,
        trace: Vec::new(),
        timed_out: false,
    };
    best.trace.push(TraceRow { iteration: 0, k: best.k, elapsed_ms: 0 });
    let zero_time = m.budget.time == Some(Duration::ZERO);
    if n < 2 || m.budget.iterations == 0 || zero_time || best.k == 0 {
        best.timed_out = zero_time;
        return Ok(best);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(m.seed);
    let mut seq: Vec<usize> = Vec::new();
    let mut cur = Layout::new(bare.clone(), seed.assignment.clone(), parts);
    let iters = m.budget.iterations;
    let (t_hi, t_lo) = (2.0f64, 0.05f64);
    let restart = (iters / 8).max(1);
    for it in 1..=iters {
        if it % 128 == 0 && m.budget.time.is_some_and(|t| t0.elapsed() >= t) {
            best.timed_out = true;
            break;
        }
        if it % restart == 0 {
            seq = best.lc_sequence.clone();
            cur = Layout::new(lc_graph(&bare, &seq), best.partition.assignment.clone(), parts);
        }
        let temp = t_hi * (t_lo / t_hi).powf(it as f64 / iters as f64);
        let accept = |d: isize, rng: &mut ChaCha8Rng| {
            d <= 0 || rng.gen::<f64>() < (-(d as f64) / temp).exp()
        };
        let roll = rng.gen_range(0..100);
        if m.l > 0 && roll < 15 {
            let mut s = seq.clone();
            let deg2: Vec<usize> = (0..n).filter(|&v| cur.g.degree(v) >= 2).collect();
            match rng.gen_range(0..3) {
                0 if s.len() < m.l && !deg2.is_empty() => s.push(deg2[rng.gen_range(0..deg2.len())]),
                1 if !s.is_empty() => {
                    s.remove(rng.gen_range(0..s.len()));
                }
                2 if !s.is_empty() => {
                    let i = rng.gen_range(0..s.len());
                    s[i] = rng.gen_range(0..n);
                }
                _ => continue,
            }
            let mut next = Layout::new(lc_graph(&bare, &s), cur.part.clone(), parts);
            next.refine(m.g_max);
            if accept(next.k as isize - cur.k as isize, &mut rng) {
                seq = s;
                cur = next;
            }
        } else if roll < 65 {
            let v = rng.gen_range(0..n);
            let q = rng.gen_range(0..parts);
            if q == cur.part[v] || cur.sizes[q] >= m.g_max {
                continue;
            }
            if accept(cur.delta(v, q), &mut rng) {
                cur.relocate(v, q);
            }
        } else {
            let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
            let (a, b) = (cur.part[u], cur.part[v]);
            if a == b {
                continue;
            }
            let d = cur.delta(u, b) + cur.delta(v, a) + 2 * cur.g.has_edge(u, v) as isize;
            if accept(d, &mut rng) {
                cur.relocate(u, b);
                cur.relocate(v, a);
            }
        }
        if improves(cur.k, &seq, &cur.part, &best) {
            best.k = cur.k;
            best.lc_sequence = seq.clone();
            best.partition = VertexPartition::new(canonical(&cur.part), m.g_max);
            best.trace.push(TraceRow {
                iteration: it,
                k: cur.k,
                elapsed_ms: t0.elapsed().as_millis() as u64,
            });
            if best.k == 0 {
                break;
            }
        }
    }
    prune_lc(&bare, &mut best);
    Ok(best)
}

/// Drop LC steps that do not help the final partition.
fn prune_lc(bare: &GraphState, best: &mut PartitionSolution) {
    let mut i = 0;
    while i < best.lc_sequence.len() {
        let mut s = best.lc_sequence.clone();
        s.remove(i);
        let k = cut_of(&lc_graph(bare, &s), &best.partition.assignment);
        if k <= best.k {
            best.lc_sequence = s;
            best.k = k;
        } else {
            i += 1;
        }
    }
}

/// Exact when the instance is small enough, otherwise the annealer.
pub fn solve(m: &PartitionModel) -> Result<PartitionSolution, PartitionError> {
    if m.graph.len() <= m.exact_cap.min(63) && m.l <= EXACT_DEPTH_CAP {
        solve_exact(m)
    } else {
        solve_heuristic(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn matrix(g: &GraphState) -> Vec<Vec<bool>> {
        let n = g.len();
        (0..n).map(|u| (0..n).map(|v| g.has_edge(u, v)).collect()).collect()
    }

    fn onehot(n: usize, v: Option<usize>) -> Vec<bool> {
        (0..n).map(|u| Some(u) == v).collect()
    }

    /// Every LC word (repeats allowed) times every assignment, no pruning.
    fn oracle(g: &GraphState, l: usize, g_max: usize) -> usize {
        let n = g.len();
        let parts = n.div_ceil(g_max).max(1);
        let mut best = usize::MAX;
        let mut frontier = vec![matrix(g)];
        for depth in 0..=l {
            for e in &frontier {
                let mut a = vec![0usize; n];
                loop {
                    let mut sizes = vec![0; parts];
                    a.iter().for_each(|&p| sizes[p] += 1);
                    if sizes.iter().all(|&s| s <= g_max) {
                        let k = (0..n)
                            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
                            .filter(|&(u, v)| e[u][v] && a[u] != a[v])
                            .count();
                        best = best.min(k);
                    }
                    let mut i = 0;
                    while i < n && a[i] + 1 == parts {
                        a[i] = 0;
                        i += 1;
                    }
                    if i == n {
                        break;
                    }
                    a[i] += 1;
                }
            }
            if depth < l {
                frontier = frontier
                    .iter()
                    .flat_map(|e| (0..n).map(move |v| step_dynamics(e, &onehot(n, Some(v))).unwrap()))
                    .collect();
            }
        }
        best
    }

    fn lc_instance() -> GraphState {
        let e = [
            (0, 1), (1, 3), (1, 4), (1, 6), (1, 7), (2, 3), (2, 4),
            (2, 6), (2, 7), (3, 4), (3, 6), (3, 7), (5, 7),
        ];
        GraphState::from_edges(8, &e).unwrap()
    }

    fn random_graph(n: usize, p: f64, seed: u64) -> GraphState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut e = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(p) {
                    e.push((u, v));
                }
            }
        }
        GraphState::from_edges(n, &e).unwrap()
    }

    #[test]
    fn dynamics_examples() {
        let tri = GraphState::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let e = matrix(&tri);
        assert_eq!(step_dynamics(&e, &onehot(3, None)).unwrap(), e);
        let next = step_dynamics(&e, &onehot(3, Some(0))).unwrap();
        assert!(!next[1][2] && !next[2][1] && next[0][1] && next[0][2]);
        assert_eq!(step_dynamics(&e, &[true, true, false]), Err(PartitionError::MultipleLc));
        assert_eq!(step_dynamics(&e, &[true]), Err(PartitionError::Shape));
    }

    #[test]
    fn dynamics_matches_local_complement() {
        for s in 0..500 {
            let g = random_graph(3 + (s as usize % 8), 0.4, s);
            let v = s as usize % g.len();
            let want = matrix(&g.local_complement(v).unwrap());
            assert_eq!(step_dynamics(&matrix(&g), &onehot(g.len(), Some(v))).unwrap(), want);
        }
    }

    #[test]
    fn exact_examples() {
        let empty = GraphState::new(5);
        for g_max in 1..=5 {
            assert_eq!(solve_exact(&PartitionModel::new(empty.clone(), 2, g_max)).unwrap().k, 0);
        }
        let c4 = GraphState::from_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let s = solve_exact(&PartitionModel::new(c4.clone(), 0, 2)).unwrap();
        assert_eq!((s.k, s.proof), (2, Proof::Optimal));
        assert_eq!(s.partition.assignment, vec![0, 0, 1, 1]);
        assert_eq!(oracle(&c4, 0, 2), 2);

        let g = lc_instance();
        let ks: Vec<usize> = (0..=2)
            .map(|l| solve_exact(&PartitionModel::new(g.clone(), l, 4)).unwrap().k)
            .collect();
        assert_eq!(ks, vec![5, 3, 1]);
        let s = solve_exact(&PartitionModel::new(g.clone(), 2, 4)).unwrap();
        assert_eq!(s.lc_sequence.len(), 2);
        assert!(s.verify_k(&g).unwrap());
    }

    #[test]
    fn exact_refuses_large_instances() {
        let g = GraphState::new(13);
        assert!(matches!(
            solve_exact(&PartitionModel::new(g, 0, 7)),
            Err(PartitionError::TooLarge { .. })
        ));
        assert!(matches!(
            solve_exact(&PartitionModel::new(GraphState::new(4), 5, 2)),
            Err(PartitionError::TooDeep { .. })
        ));
    }

    #[test]
    fn exact_matches_oracle() {
        for s in 0..40 {
            let n = 3 + s as usize % 4;
            let g = random_graph(n, 0.5, 100 + s);
            let g_max = 1 + s as usize % 3;
            let l = s as usize % 3;
            let got = solve_exact(&PartitionModel::new(g.clone(), l, g_max)).unwrap();
            assert_eq!(got.k, oracle(&g, l, g_max), "seed {s}");
            assert!(got.verify_k(&g).unwrap() && got.partition.is_feasible());
        }
    }

    #[test]
    fn heuristic_examples() {
        let g = lc_instance();
        let mut m = PartitionModel::new(g.clone(), 3, 4);
        m.budget = Budget { iterations: 5000, time: Some(Duration::ZERO) };
        let seed = seed_partition(&g, 4).unwrap();
        let s = solve_heuristic(&m).unwrap();
        assert_eq!(s.partition, seed);
        assert!(s.lc_sequence.is_empty() && s.proof == Proof::TimeLimited);

        let star = GraphState::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let s = solve_heuristic(&PartitionModel::new(star, 4, 5)).unwrap();
        assert_eq!(s.k, 0);
        assert_eq!(s.partition.parts().len(), 1);
    }

    #[test]
    fn heuristic_tracks_exact() {
        let mut hits = 0;
        for s in 0..100u64 {
            let n = 5 + s as usize % 6;
            let g = random_graph(n, 0.45, 1000 + s);
            let g_max = 2 + s as usize % 3;
            let l = s as usize % 3;
            let exact = solve_exact(&PartitionModel::new(g.clone(), l, g_max)).unwrap();
            let mut m = PartitionModel::new(g.clone(), l, g_max);
            m.seed = s;
            m.budget = Budget::iterations(4000);
            let h = solve_heuristic(&m).unwrap();
            assert!(h.k >= exact.k);
            assert!(h.verify_k(&g).unwrap() && h.partition.is_feasible() && h.lc_sequence.len() <= l);
            hits += (h.k == exact.k) as usize;
        }
        assert!(hits >= 90, "{hits}/100");
    }

    #[test]
    fn trace_csv() {
        let rows = vec![TraceRow { iteration: 3, k: 2, elapsed_ms: 1 }];
        let mut buf = Vec::new();
        write_trace(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "iteration,k,elapsed_ms\n3,2,1\n");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn monotone_in_depth_and_size(seed in 0u64..10_000, n in 2usize..8) {
            let g = random_graph(n, 0.5, seed);
            let k = |l, g_max| solve_exact(&PartitionModel::new(g.clone(), l, g_max)).unwrap().k;
            prop_assert!(k(1, 3) <= k(0, 3));
            prop_assert!(k(2, 3) <= k(1, 3));
            prop_assert!(k(1, 4) <= k(1, 3));
            prop_assert!(k(1, 3) <= k(1, 2));
        }

        #[test]
        fn heuristic_never_worse_than_seed(seed in 0u64..10_000, n in 2usize..16, g_max in 1usize..6) {
            let g = random_graph(n, 0.3, seed);
            let mut m = PartitionModel::new(g.clone(), 4, g_max);
            m.budget = Budget::iterations(500);
            let s = solve_heuristic(&m).unwrap();
            let seed_k = g.cut_edges(&seed_partition(&g, g_max).unwrap()).unwrap().len();
            prop_assert!(s.k <= seed_k);
            prop_assert!(s.verify_k(&g).unwrap());
            prop_assert!(s.partition.is_feasible());
            prop_assert_eq!(s.partition.assignment.len(), n);
        }
    }
}
