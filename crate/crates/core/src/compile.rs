//! Subgraph compilation: search reduction histories with the fewest
//! emitter-emitter CNOTs, then keep the circuit with the least photon
//! waiting time.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit::{Circuit, Time};
use crate::clifford::Clifford1;
use crate::graph::GraphState;
use crate::hardware::{self, HardwareModel};
use crate::reduction::{greedy_choice, Forward, ReductionError, ReductionState, ReversedOp};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CompileError {
    #[error("no complete reduction within ne_limit = {ne_limit}")]
    Infeasible { ne_limit: usize },
    #[error("emission order is not a permutation of the vertices")]
    NotPermutation,
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    /// Optimal histories forwarded to candidate selection.
    pub candidate_cap: usize,
    /// Exact search gives up (and falls back to greedy) past this many states.
    pub node_limit: usize,
    /// Randomized greedy runs used when the exact search is skipped.
    pub greedy_tries: usize,
    /// Larger graphs skip the exact search.
    pub exact_max_vertices: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            candidate_cap: 100,
            node_limit: 200_000,
            greedy_tries: 24,
            exact_max_vertices: 12,
            seed: 0,
        }
    }
}

/// Height-function peak of an emission order: the largest cut-rank across
/// any prefix.
pub fn min_emitters(g: &GraphState, order: &[usize]) -> Result<usize, CompileError> {
    let n = g.len();
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&v| v >= n || std::mem::replace(&mut seen[v], true)) {
        return Err(CompileError::NotPermutation);
    }
    (1..n)
        .map(|k| g.cut_rank(&order[..k]).map_err(|_| CompileError::NotPermutation))
        .try_fold(0, |acc, r| r.map(|r| acc.max(r)))
}

/// Emission order of a history: photons in the order the forward circuit
/// emits them (reverse of their removal).
pub fn emission_order(start: &ReductionState, history: &[ReversedOp]) -> Vec<usize> {
    let mut removed: Vec<usize> = history
        .iter()
        .filter_map(|op| match *op {
            ReversedOp::Swap { photon, .. } | ReversedOp::Absorb { photon, .. } => Some(photon),
            _ => None,
        })
        .collect();
    removed.extend(start.hosts().iter().copied());
    removed.reverse();
    removed
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub histories: Vec<Vec<ReversedOp>>,
    pub min_cnot: usize,
    /// Whether `min_cnot` is proven minimal.
    pub exact: bool,
}

struct Exact {
    memo: HashMap<Vec<u64>, Option<u32>>,
    limit: usize,
}

struct Aborted;

const MAX_KEY_ORDERS: usize = 120;

/// Memo key invariant under relabelling of active emitters. Requires all
/// vertices to fit one word.
fn pack(s: &ReductionState) -> Vec<u64> {
    let n = s.photons();
    let g = s.graph();
    let pmask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let word = |v: usize| g.neighbors_row(v).words().first().copied().unwrap_or(0);
    let sig = |a: usize| {
        let v = s.emitter_vertex(a);
        (word(v) & pmask, g.degree(v))
    };
    let mut act: Vec<usize> = s.active_emitters().collect();
    act.sort_by_key(|&a| sig(a));
    // emitters with equal signatures are tried in every order, unless that
    // gets expensive; any fixed order still gives a sound (if less shared) key
    let mut groups: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    let mut orders = 1usize;
    while i < act.len() {
        let mut j = i + 1;
        while j < act.len() && sig(act[j]) == sig(act[i]) {
            j += 1;
        }
        groups.push((i, j));
        orders = orders.saturating_mul((1..=j - i).product());
        i = j;
    }
    if orders > MAX_KEY_ORDERS {
        groups.clear();
    }
    let encode = |order: &[usize]| -> Vec<u64> {
        let remap = |w: u64| -> u64 {
            let mut out = w & pmask;
            for (slot, &a) in order.iter().enumerate() {
                if w >> (n + a) & 1 == 1 {
                    out |= 1 << (n + slot);
                }
            }
            out
        };
        let mut key: Vec<u64> = (0..n).map(|v| remap(word(v))).collect();
        key.extend(order.iter().map(|&a| remap(word(s.emitter_vertex(a)))));
        key.push(s.present_photons().fold(0u64, |acc, p| acc | 1 << p));
        key.push(order.len() as u64);
        key
    };
    let mut best: Option<Vec<u64>> = None;
    let mut order = act.clone();
    permute_groups(&mut order, &groups, 0, &mut |o| {
        let k = encode(o);
        if best.as_ref().is_none_or(|b| k < *b) {
            best = Some(k);
        }
    });
    best.unwrap_or_else(|| encode(&[]))
}

fn permute_groups(order: &mut Vec<usize>, groups: &[(usize, usize)], gi: usize, f: &mut dyn FnMut(&[usize])) {
    let Some(&(lo, hi)) = groups.get(gi) else {
        f(order);
        return;
    };
    fn heap(order: &mut Vec<usize>, lo: usize, k: usize, rest: &mut dyn FnMut(&mut Vec<usize>)) {
        if k <= 1 {
            rest(order);
            return;
        }
        for i in 0..k - 1 {
            heap(order, lo, k - 1, rest);
            let j = if k % 2 == 0 { lo + i } else { lo };
            order.swap(j, lo + k - 1);
        }
        heap(order, lo, k - 1, rest);
    }
    heap(order, lo, hi - lo, &mut |o: &mut Vec<usize>| permute_groups(o, groups, gi + 1, f));
}

fn op_cost(op: &ReversedOp) -> u32 {
    op.is_ee_cnot() as u32
}

/// Degree-based expansion order: operations touching low-degree vertices first.
fn op_rank(s: &ReductionState, op: &ReversedOp) -> (usize, ReversedOp) {
    let g = s.graph();
    let d = match *op {
        ReversedOp::Swap { photon, .. } | ReversedOp::Absorb { photon, .. } => g.degree(photon),
        ReversedOp::Disentangle { a, b } | ReversedOp::RowAdd { a, b } => {
            g.degree(s.emitter_vertex(a)) + g.degree(s.emitter_vertex(b))
        }
    };
    (d, *op)
}

impl Exact {
    fn best(&mut self, s: &ReductionState) -> Result<Option<u32>, Aborted> {
        if s.is_terminal() {
            return Ok(Some(0));
        }
        let key = pack(s);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        if self.memo.len() >= self.limit {
            return Err(Aborted);
        }
        let mut best: Option<u32> = None;
        for op in s.applicable_ops() {
            let mut next = s.clone();
            next.apply_unchecked(op);
            if let Some(c) = self.best(&next)? {
                let c = c + op_cost(&op);
                best = Some(best.map_or(c, |b| b.min(c)));
            }
        }
        self.memo.insert(key, best);
        Ok(best)
    }

    fn collect(&mut self, s: &ReductionState, cap: usize, out: &mut Vec<Vec<ReversedOp>>) {
        if out.len() >= cap {
            return;
        }
        if s.is_terminal() {
            out.push(s.history.clone());
            return;
        }
        let Ok(Some(target)) = self.best(s) else { return };
        let mut ops = s.applicable_ops();
        ops.sort_by_key(|op| op_rank(s, op));
        for op in ops {
            let mut next = s.clone();
            next.apply_unchecked(op);
            if let Ok(Some(c)) = self.best(&next) {
                if c + op_cost(&op) == target {
                    self.collect(&next, cap, out);
                    if out.len() >= cap {
                        return;
                    }
                }
            }
        }
    }
}

/// Greedy reduction with randomized tie-breaking among equally ranked ops.
fn greedy_run(start: &ReductionState, rng: Option<&mut ChaCha8Rng>) -> Option<Vec<ReversedOp>> {
    let mut s = start.clone();
    let mut rng = rng;
    while !s.is_terminal() {
        let op = match rng.as_deref_mut() {
            None => greedy_choice(&s)?,
            Some(r) => randomized_choice(&s, r)?,
        };
        s.apply_unchecked(op);
    }
    Some(s.history)
}

fn randomized_choice(s: &ReductionState, rng: &mut ChaCha8Rng) -> Option<ReversedOp> {
    let ops = s.applicable_ops();
    let absorbs: Vec<ReversedOp> =
        ops.iter().copied().filter(|o| matches!(o, ReversedOp::Absorb { .. })).collect();
    if let Some(op) = absorbs.choose(rng) {
        return Some(*op);
    }
    let swaps: Vec<ReversedOp> =
        ops.iter().copied().filter(|o| matches!(o, ReversedOp::Swap { .. })).collect();
    if !swaps.is_empty() {
        let low = swaps.iter().map(|o| op_rank(s, o).0).min().unwrap();
        // occasionally look one degree higher to diversify emission orders
        let slack = usize::from(rng.gen_ratio(1, 4));
        let pool: Vec<ReversedOp> =
            swaps.into_iter().filter(|o| op_rank(s, o).0 <= low + slack).collect();
        return pool.choose(rng).copied();
    }
    greedy_choice(s)
}

/// The deterministic greedy history followed by `tries` randomized ones,
/// all at the budget of `start`. Failed runs are skipped.
pub fn greedy_histories(start: &ReductionState, tries: usize, seed: u64) -> Vec<Vec<ReversedOp>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vec<ReversedOp>> = greedy_run(start, None).into_iter().collect();
    for _ in 0..tries {
        out.extend(greedy_run(start, Some(&mut rng)));
    }
    out
}

/// Graphs above this many photons get fewer randomized greedy runs.
const LARGE: usize = 24;

/// Budgets tried by the greedy fallback: all of `lo..=hi` when there are
/// few, otherwise four evenly spaced ones ending at `hi`.
fn greedy_budgets(lo: usize, hi: usize) -> Vec<usize> {
    if hi < lo + 4 {
        return (lo..=hi).collect();
    }
    let mut b: Vec<usize> = (0..4).map(|k| lo + (hi - lo) * k / 4).collect();
    b.push(hi);
    b.dedup();
    b
}

/// Minimal-CNOT reduction histories from `start`.
pub fn search_sequences(start: &ReductionState, cfg: &SearchConfig) -> Result<SearchResult, CompileError> {
    let infeasible = CompileError::Infeasible { ne_limit: start.ne_limit() };
    let exact_ok = |s: &ReductionState| s.photons() <= cfg.exact_max_vertices && s.graph().len() <= 64;
    // a history found under a smaller budget is valid under a larger one
    let mut runs: Vec<Vec<ReversedOp>> = Vec::new();
    if exact_ok(start) {
        let mut ex = Exact { memo: HashMap::new(), limit: cfg.node_limit };
        if let Ok(best) = ex.best(start) {
            let min = best.ok_or(infeasible)?;
            let mut histories = Vec::new();
            ex.collect(start, cfg.candidate_cap.max(1), &mut histories);
            return Ok(SearchResult { histories, min_cnot: min as usize, exact: true });
        }
        // too many states: take the largest smaller budget that still solves exactly
        for b in start.hosts().len().max(1)..start.ne_limit() {
            let Some(capped) = start.with_budget(b) else { continue };
            let mut ex = Exact { memo: HashMap::new(), limit: cfg.node_limit };
            match ex.best(&capped) {
                Ok(Some(_)) => {
                    runs.clear();
                    ex.collect(&capped, cfg.candidate_cap.max(1), &mut runs);
                }
                Ok(None) => {}
                Err(Aborted) => break,
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let tries = if start.photons() > LARGE { cfg.greedy_tries / 3 } else { cfg.greedy_tries };
    for b in greedy_budgets(start.hosts().len().max(1), start.ne_limit()) {
        let Some(capped) = start.with_budget(b) else { continue };
        runs.extend(greedy_run(&capped, None));
        for _ in 0..tries {
            runs.extend(greedy_run(&capped, Some(&mut rng)));
        }
    }
    let cost = |h: &Vec<ReversedOp>| h.iter().filter(|o| o.is_ee_cnot()).count();
    let min = runs.iter().map(cost).min().ok_or(infeasible)?;
    let mut histories: Vec<Vec<ReversedOp>> = runs.into_iter().filter(|h| cost(h) == min).collect();
    histories.sort();
    histories.dedup();
    histories.truncate(cfg.candidate_cap.max(1));
    Ok(SearchResult { histories, min_cnot: min, exact: false })
}

/// A boundary photon kept on an emitter when the body ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Host {
    pub photon: usize,
    pub emitter: usize,
    /// Emitter tag when the body ends.
    pub tag: Clifford1,
}

#[derive(Clone, Debug)]
pub struct CompilationCandidate {
    /// Standalone circuit producing the subgraph state.
    pub circuit: Circuit,
    pub n_ee_cnot: usize,
    pub avg_t_loss: Time,
    pub duration: Time,
    pub ne_used: usize,
    pub ne_limit: usize,
    /// The circuit up to the point where only host releases remain; hosts
    /// are still alive at its end.
    pub body: Circuit,
    pub hosts: Vec<Host>,
    pub exact: bool,
}

fn build_candidate(
    target: &GraphState,
    start: &ReductionState,
    history: &[ReversedOp],
    hw: &HardwareModel,
    exact: bool,
) -> Result<CompilationCandidate, CompileError> {
    let mut f = Forward::from_history(start, history)?;
    let host_photons = start.hosts().to_vec();
    for p in (0..target.len()).filter(|p| !host_photons.contains(p)) {
        f.finish_photon(p, target.lc_tag(p));
    }
    let body = hardware::time_alap(&f.circuit, hw);
    let hosts: Vec<Host> = host_photons
        .iter()
        .enumerate()
        .map(|(j, &photon)| Host { photon, emitter: j, tag: f.emitter_tag(j) })
        .collect();
    for h in &hosts {
        f.release(h.emitter, h.photon);
        f.finish_photon(h.photon, target.lc_tag(h.photon));
    }
    let circuit = hardware::time_alap(&f.circuit, hw);
    let duration = circuit.end_time(hw);
    let avg_t_loss = hardware::avg_photon_loss(&circuit, hw).expect("all photons emitted");
    Ok(CompilationCandidate {
        n_ee_cnot: circuit.n_ee_cnot(),
        avg_t_loss,
        duration,
        ne_used: hardware::peak_emitters(&circuit, hw),
        ne_limit: start.ne_limit(),
        circuit,
        body,
        hosts,
        exact,
    })
}

/// Best candidate for `target` (with `hosts` kept alive) under `ne_limit`.
pub fn compile_with_hosts(
    target: &GraphState,
    hosts: &[usize],
    ne_limit: usize,
    hw: &HardwareModel,
    cfg: &SearchConfig,
) -> Result<CompilationCandidate, CompileError> {
    let start = ReductionState::with_hosts(target, hosts, ne_limit)?;
    let found = search_sequences(&start, cfg)?;
    let mut best: Option<(CompilationCandidate, String)> = None;
    for h in &found.histories {
        let cand = build_candidate(target, &start, h, hw, found.exact)?;
        let key = cand.circuit.to_json();
        let better = match &best {
            None => true,
            Some((b, bkey)) => {
                (cand.avg_t_loss, cand.duration, &key) < (b.avg_t_loss, b.duration, bkey)
            }
        };
        if better {
            best = Some((cand, key));
        }
    }
    best.map(|(c, _)| c).ok_or(CompileError::Infeasible { ne_limit })
}

pub fn compile_subgraph(
    target: &GraphState,
    ne_limit: usize,
    hw: &HardwareModel,
    cfg: &SearchConfig,
) -> Result<CompilationCandidate, CompileError> {
    compile_with_hosts(target, &[], ne_limit, hw, cfg)
}

/// Smallest budget at which a complete reduction exists (searched upward
/// from the number of hosts).
pub fn min_feasible_budget(
    target: &GraphState,
    hosts: &[usize],
    cfg: &SearchConfig,
) -> Option<usize> {
    if target.is_empty() {
        return Some(0);
    }
    let exact = target.len() <= cfg.exact_max_vertices;
    (hosts.len().max(1)..=target.len().max(1)).find(|&b| {
        ReductionState::with_hosts(target, hosts, b).ok().is_some_and(|s| {
            if exact {
                search_sequences(&s, cfg).is_ok()
            } else {
                greedy_run(&s, None).is_some()
            }
        })
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmitterBudget {
    pub ne_min: usize,
    pub variants: Vec<usize>,
}

impl EmitterBudget {
    pub fn new(ne_min: usize) -> Self {
        EmitterBudget { ne_min, variants: vec![ne_min, ne_min + 1, ne_min + 2] }
    }
}

/// Candidates for budgets `ne_min`, `ne_min+1`, `ne_min+2`. A larger budget
/// that is not strictly better reuses the smaller budget's candidate.
pub fn compile_flexible_with_hosts(
    target: &GraphState,
    hosts: &[usize],
    hw: &HardwareModel,
    cfg: &SearchConfig,
) -> BTreeMap<usize, CompilationCandidate> {
    let mut out = BTreeMap::new();
    if target.is_empty() {
        return out;
    }
    let Some(ne_min) = min_feasible_budget(target, hosts, cfg) else {
        return out;
    };
    let mut prev: Option<CompilationCandidate> = None;
    for b in EmitterBudget::new(ne_min).variants {
        let Ok(mut cand) = compile_with_hosts(target, hosts, b, hw, cfg) else {
            continue;
        };
        if let Some(p) = &prev {
            if p.duration <= cand.duration || p.n_ee_cnot < cand.n_ee_cnot {
                cand = p.clone();
            }
        }
        prev = Some(cand.clone());
        out.insert(b, cand);
    }
    out
}

pub fn compile_flexible(
    target: &GraphState,
    hw: &HardwareModel,
    cfg: &SearchConfig,
) -> BTreeMap<usize, CompilationCandidate> {
    compile_flexible_with_hosts(target, &[], hw, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{GateKind, Outcomes};
    use crate::tableau::Tableau;

    fn hw() -> HardwareModel {
        HardwareModel::default()
    }

    fn path(n: usize) -> GraphState {
        let e: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        GraphState::from_edges(n, &e).unwrap()
    }

    fn star(n: usize) -> GraphState {
        let e: Vec<_> = (1..n).map(|v| (0, v)).collect();
        GraphState::from_edges(n, &e).unwrap()
    }

    fn cycle4() -> GraphState {
        GraphState::from_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap()
    }

    /// Plain enumeration of every reduction sequence, no memo.
    fn brute_min(s: &ReductionState, spent: usize, best: &mut Option<usize>) {
        if best.is_some_and(|b| spent >= b) {
            return;
        }
        if s.is_terminal() {
            *best = Some(spent);
            return;
        }
        for op in s.applicable_ops() {
            let next = s.apply_op(op).unwrap();
            brute_min(&next, spent + op.is_ee_cnot() as usize, best);
        }
    }

    fn assert_replays(g: &GraphState, c: &Circuit) {
        let want = Tableau::from_graph(g);
        for o in [Outcomes::AllZero, Outcomes::AllOne] {
            assert!(c.replay(&hw(), o).unwrap().states_equal(&want).unwrap());
        }
    }

    #[test]
    fn height_function_examples() {
        assert_eq!(min_emitters(&path(6), &[0, 1, 2, 3, 4, 5]).unwrap(), 1);
        assert_eq!(min_emitters(&star(5), &[3, 1, 0, 4, 2]).unwrap(), 1);
        // adjacent pair first gives the full rank-2 cut; a diagonal pair does not
        assert_eq!(min_emitters(&cycle4(), &[0, 1, 2, 3]).unwrap(), 2);
        assert_eq!(min_emitters(&cycle4(), &[0, 2, 1, 3]).unwrap(), 1);
        assert_eq!(min_emitters(&cycle4(), &[0, 0, 1, 2]), Err(CompileError::NotPermutation));
    }

    #[test]
    fn search_examples() {
        let cfg = SearchConfig::default();
        for g in [star(6), path(6)] {
            let r = search_sequences(&ReductionState::new(&g, 1), &cfg).unwrap();
            assert_eq!(r.min_cnot, 0);
            assert!(r.exact && !r.histories.is_empty());
        }
        let r = search_sequences(&ReductionState::new(&cycle4(), 2), &cfg).unwrap();
        let mut brute = None;
        brute_min(&ReductionState::new(&cycle4(), 2), 0, &mut brute);
        assert_eq!(Some(r.min_cnot), brute);
        assert_eq!(r.min_cnot, 0);
        let complete = GraphState::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!(search_sequences(&ReductionState::new(&complete, 0), &cfg).is_err());
    }

    #[test]
    fn histories_all_share_the_minimum() {
        let g = GraphState::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3)]).unwrap();
        let start = ReductionState::new(&g, 3);
        let r = search_sequences(&start, &SearchConfig::default()).unwrap();
        for h in &r.histories {
            assert_eq!(h.iter().filter(|o| o.is_ee_cnot()).count(), r.min_cnot);
        }
        let mut brute = None;
        brute_min(&start, 0, &mut brute);
        assert_eq!(brute, Some(r.min_cnot));
    }

    #[test]
    fn star_compiles_without_cnots() {
        let g = star(5);
        let c = compile_subgraph(&g, 1, &hw(), &SearchConfig::default()).unwrap();
        assert_eq!(c.n_ee_cnot, 0);
        assert_eq!(c.ne_used, 1);
        assert_replays(&g, &c.circuit);
    }

    #[test]
    fn single_vertex_is_emit_then_measure() {
        let g = GraphState::new(1);
        let c = compile_subgraph(&g, 1, &hw(), &SearchConfig::default()).unwrap();
        assert_eq!(c.circuit.count(GateKind::Emission), 1);
        assert_eq!(c.circuit.count(GateKind::EmitterMeasureX), 1);
        // emission, measure-out, then the photon's frame gate
        let h = hw();
        assert_eq!(c.avg_t_loss, h.t_emission + h.t_measure + h.t_1q);
        assert_replays(&g, &c.circuit);
    }

    #[test]
    fn cycle_compiles_on_one_emitter() {
        let g = cycle4();
        let c = compile_subgraph(&g, 2, &hw(), &SearchConfig::default()).unwrap();
        assert_eq!(c.n_ee_cnot, 0);
        assert!(c.ne_used <= 2);
        assert_replays(&g, &c.circuit);
        assert_eq!(min_feasible_budget(&g, &[], &SearchConfig::default()), Some(1));
    }

    #[test]
    fn flexible_budgets() {
        let cfg = SearchConfig::default();
        let m = compile_flexible(&star(5), &hw(), &cfg);
        assert_eq!(m.keys().copied().collect::<Vec<_>>(), vec![1, 2, 3]);
        let durations: Vec<Time> = m.values().map(|c| c.duration).collect();
        assert!(durations.windows(2).all(|w| w[0] == w[1]));

        let g = GraphState::from_edges(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3)]).unwrap();
        let m = compile_flexible(&g, &hw(), &cfg);
        let durations: Vec<Time> = m.values().map(|c| c.duration).collect();
        assert!(durations.windows(2).all(|w| w[1] <= w[0]), "{durations:?}");
        for c in m.values() {
            assert!(c.ne_used <= c.ne_limit);
            assert_replays(&g, &c.circuit);
        }
        assert!(compile_flexible(&GraphState::new(0), &hw(), &cfg).is_empty());
    }

    #[test]
    fn hosts_stay_alive_in_the_body() {
        let g = path(5);
        let c = compile_with_hosts(&g, &[0, 4], 3, &hw(), &SearchConfig::default()).unwrap();
        assert_eq!(c.hosts.len(), 2);
        assert_eq!(c.body.count(GateKind::Emission), 3);
        assert_replays(&g, &c.circuit);
    }

    #[test]
    fn selected_candidate_has_least_photon_wait() {
        let g = GraphState::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        let cfg = SearchConfig::default();
        let start = ReductionState::new(&g, 2);
        let best = compile_subgraph(&g, 2, &hw(), &cfg).unwrap();
        for h in search_sequences(&start, &cfg).unwrap().histories {
            let other = build_candidate(&g, &start, &h, &hw(), true).unwrap();
            assert!(other.avg_t_loss >= best.avg_t_loss);
        }
    }
}
