//! Time-reversed reduction of a photonic graph to the all-free emitter state,
//! and the reversal of a reduction history into a forward circuit.
//!
//! Vertices `0..n` are photons of the target; vertex `n + j` is emitter `j`.
//! Every op strictly decreases `(photons left, edges)` lexicographically, so
//! reductions always terminate.

use thiserror::Error;

use crate::bits::BitRow;
use crate::circuit::{Circuit, Gate};
use crate::clifford::{Clifford1, Pauli};
use crate::graph::GraphState;

/// Local-Clifford dressing class of an absorption.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AbsorbCase {
    /// `N(p) = {e}`.
    Pendant,
    /// `N(e) = {p}`; `e` takes over the rest of `p`'s neighbourhood.
    EmitterLeaf,
    /// Adjacent with `N(e) - p = N(p) - e`.
    TrueTwin,
    /// Non-adjacent with `N(e) = N(p)`, dressed through LC at `pivot`.
    FalseTwin { pivot: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReversedOp {
    Swap { photon: usize, emitter: usize },
    Absorb { emitter: usize, photon: usize, case: AbsorbCase },
    Disentangle { a: usize, b: usize },
    /// `N(a) <- N(a) xor N(b)` for non-adjacent emitters; forward a CNOT `a -> b`.
    RowAdd { a: usize, b: usize },
}

impl ReversedOp {
    /// Whether the forward gate is an emitter-emitter CNOT.
    pub fn is_ee_cnot(&self) -> bool {
        matches!(self, ReversedOp::Disentangle { .. } | ReversedOp::RowAdd { .. })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReductionError {
    #[error("vertex {0} does not have the role this op needs")]
    RoleMismatch(usize),
    #[error("op {0:?} is not applicable")]
    Inapplicable(ReversedOp),
    #[error("history does not reach the terminal state")]
    Incomplete,
    #[error("{hosts} hosts exceed the emitter budget {ne_limit}")]
    TooManyHosts { hosts: usize, ne_limit: usize },
    #[error("input graph must contain photons only")]
    NotPhotonic,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ReductionState {
    graph: GraphState,
    photons: usize,
    present: BitRow,
    active: BitRow,
    ne_limit: usize,
    hosts: Vec<usize>,
    pub history: Vec<ReversedOp>,
}

/// Hashable snapshot of a state without its history.
pub type StateKey = (Vec<BitRow>, BitRow, BitRow);

impl ReductionState {
    pub fn new(target: &GraphState, ne_limit: usize) -> Self {
        Self::with_hosts(target, &[], ne_limit).expect("no hosts")
    }

    /// Start with each vertex in `hosts` already held by emitter `i` (its
    /// index in `hosts`), as if swapped in before the reduction began.
    pub fn with_hosts(target: &GraphState, hosts: &[usize], ne_limit: usize) -> Result<Self, ReductionError> {
        if hosts.len() > ne_limit {
            return Err(ReductionError::TooManyHosts { hosts: hosts.len(), ne_limit });
        }
        let n = target.len();
        let mut graph = GraphState::new(n + ne_limit);
        for (u, v) in target.edges() {
            graph.set_edge(u, v, true);
        }
        let mut s = ReductionState {
            graph,
            photons: n,
            present: BitRow::from_indices(n, 0..n),
            active: BitRow::zeros(ne_limit),
            ne_limit,
            hosts: hosts.to_vec(),
            history: Vec::new(),
        };
        for (j, &p) in hosts.iter().enumerate() {
            s.swap_in(p, j);
        }
        s.free_isolated();
        Ok(s)
    }

    /// The same state with a smaller emitter budget, if no emitter above it
    /// is in use.
    pub fn with_budget(&self, ne_limit: usize) -> Option<ReductionState> {
        if ne_limit > self.ne_limit || self.active.iter_ones().any(|j| j >= ne_limit) {
            return None;
        }
        let n = self.photons;
        let mut graph = GraphState::new(n + ne_limit);
        for (u, v) in self.graph.edges() {
            graph.set_edge(u, v, true);
        }
        let mut active = BitRow::zeros(ne_limit);
        for j in self.active.iter_ones() {
            active.set(j, true);
        }
        Some(ReductionState { graph, active, ne_limit, ..self.clone() })
    }

    /// Photon held by each host emitter at the start.
    pub fn hosts(&self) -> &[usize] {
        &self.hosts
    }

    pub fn photons(&self) -> usize {
        self.photons
    }

    pub fn ne_limit(&self) -> usize {
        self.ne_limit
    }

    pub fn emitter_vertex(&self, j: usize) -> usize {
        self.photons + j
    }

    pub fn graph(&self) -> &GraphState {
        &self.graph
    }

    pub fn is_present(&self, p: usize) -> bool {
        p < self.photons && self.present.get(p)
    }

    pub fn is_active(&self, j: usize) -> bool {
        j < self.ne_limit && self.active.get(j)
    }

    pub fn photons_left(&self) -> usize {
        self.present.count_ones()
    }

    pub fn active_count(&self) -> usize {
        self.active.count_ones()
    }

    pub fn free_emitters(&self) -> usize {
        self.ne_limit - self.active_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn is_terminal(&self) -> bool {
        self.present.is_zero() && self.active.is_zero()
    }

    pub fn disentangle_count(&self) -> usize {
        self.history.iter().filter(|o| o.is_ee_cnot()).count()
    }

    pub fn key(&self) -> StateKey {
        let adj = (0..self.graph.len()).map(|v| self.graph.neighbors_row(v).clone()).collect();
        (adj, self.present.clone(), self.active.clone())
    }

    pub fn present_photons(&self) -> impl Iterator<Item = usize> + '_ {
        self.present.iter_ones()
    }

    pub fn active_emitters(&self) -> impl Iterator<Item = usize> + '_ {
        self.active.iter_ones()
    }

    fn swap_in(&mut self, p: usize, j: usize) {
        let ev = self.emitter_vertex(j);
        let nbrs: Vec<usize> = self.graph.neighbors_row(p).iter_ones().collect();
        for u in nbrs {
            self.graph.set_edge(p, u, false);
            if u != ev {
                self.graph.set_edge(ev, u, true);
            }
        }
        self.present.set(p, false);
        self.active.set(j, true);
    }

    fn free_isolated(&mut self) {
        for j in self.active.iter_ones().collect::<Vec<_>>() {
            if self.graph.degree(self.emitter_vertex(j)) == 0 {
                self.active.set(j, false);
            }
        }
    }

    fn remove_photon(&mut self, p: usize) {
        for u in self.graph.neighbors_row(p).iter_ones().collect::<Vec<_>>() {
            self.graph.set_edge(p, u, false);
        }
        self.present.set(p, false);
    }

    /// Absorption case for emitter `e` and photon `p`, if any.
    pub fn is_absorbable(&self, e: usize, p: usize) -> Result<Option<AbsorbCase>, ReductionError> {
        if !self.is_active(e) {
            return Err(ReductionError::RoleMismatch(self.photons + e));
        }
        if !self.is_present(p) {
            return Err(ReductionError::RoleMismatch(p));
        }
        let ev = self.emitter_vertex(e);
        let ne = self.graph.neighbors_row(ev);
        let np = self.graph.neighbors_row(p);
        if self.graph.has_edge(ev, p) {
            if np.count_ones() == 1 {
                return Ok(Some(AbsorbCase::Pendant));
            }
            if ne.count_ones() == 1 {
                return Ok(Some(AbsorbCase::EmitterLeaf));
            }
            let mut a = ne.clone();
            a.set(p, false);
            let mut b = np.clone();
            b.set(ev, false);
            return Ok((a == b).then_some(AbsorbCase::TrueTwin));
        }
        if ne == np && !ne.is_zero() {
            let pivot = ne.first_one().unwrap();
            return Ok(Some(AbsorbCase::FalseTwin { pivot }));
        }
        Ok(None)
    }

    fn row_add_gain(&self, a: usize, b: usize) -> Option<usize> {
        let (va, vb) = (self.emitter_vertex(a), self.emitter_vertex(b));
        if a == b || self.graph.has_edge(va, vb) {
            return None;
        }
        let na = self.graph.neighbors_row(va);
        let mut x = na.clone();
        x.xor_assign(self.graph.neighbors_row(vb));
        (x.count_ones() < na.count_ones()).then(|| na.count_ones() - x.count_ones())
    }

    /// Every legal op, in a fixed order: swaps by photon, absorptions by
    /// (emitter, photon), disentangles by edge, row additions by (a, b).
    pub fn applicable_ops(&self) -> Vec<ReversedOp> {
        let mut ops = Vec::new();
        if let Some(free) = (0..self.ne_limit).find(|&j| !self.active.get(j)) {
            ops.extend(self.present.iter_ones().map(|photon| ReversedOp::Swap { photon, emitter: free }));
        }
        for e in self.active.iter_ones() {
            for p in self.present.iter_ones() {
                if let Ok(Some(case)) = self.is_absorbable(e, p) {
                    ops.push(ReversedOp::Absorb { emitter: e, photon: p, case });
                }
            }
        }
        let act: Vec<usize> = self.active.iter_ones().collect();
        for (i, &a) in act.iter().enumerate() {
            for &b in &act[i + 1..] {
                if self.graph.has_edge(self.emitter_vertex(a), self.emitter_vertex(b)) {
                    ops.push(ReversedOp::Disentangle { a, b });
                }
            }
        }
        for &a in &act {
            for &b in &act {
                if self.row_add_gain(a, b).is_some() {
                    ops.push(ReversedOp::RowAdd { a, b });
                }
            }
        }
        ops
    }

    fn is_applicable(&self, op: &ReversedOp) -> bool {
        match *op {
            ReversedOp::Swap { photon, emitter } => {
                self.is_present(photon)
                    && emitter < self.ne_limit
                    && (0..self.ne_limit).find(|&j| !self.active.get(j)) == Some(emitter)
            }
            ReversedOp::Absorb { emitter, photon, case } => {
                self.is_absorbable(emitter, photon).ok().flatten() == Some(case)
            }
            ReversedOp::Disentangle { a, b } => {
                a < b
                    && self.is_active(a)
                    && self.is_active(b)
                    && self.graph.has_edge(self.emitter_vertex(a), self.emitter_vertex(b))
            }
            ReversedOp::RowAdd { a, b } => {
                self.is_active(a) && self.is_active(b) && self.row_add_gain(a, b).is_some()
            }
        }
    }

    pub fn apply_op(&self, op: ReversedOp) -> Result<ReductionState, ReductionError> {
        if !self.is_applicable(&op) {
            return Err(ReductionError::Inapplicable(op));
        }
        let mut s = self.clone();
        s.apply_unchecked(op);
        Ok(s)
    }

    pub(crate) fn apply_unchecked(&mut self, op: ReversedOp) {
        match op {
            ReversedOp::Swap { photon, emitter } => self.swap_in(photon, emitter),
            ReversedOp::Absorb { emitter, photon, case } => {
                if case == AbsorbCase::EmitterLeaf {
                    let ev = self.emitter_vertex(emitter);
                    for u in self.graph.neighbors_row(photon).iter_ones().collect::<Vec<_>>() {
                        if u != ev {
                            self.graph.set_edge(ev, u, true);
                        }
                    }
                }
                self.remove_photon(photon);
            }
            ReversedOp::Disentangle { a, b } => {
                let (va, vb) = (self.emitter_vertex(a), self.emitter_vertex(b));
                self.graph.set_edge(va, vb, false);
            }
            ReversedOp::RowAdd { a, b } => {
                let (va, vb) = (self.emitter_vertex(a), self.emitter_vertex(b));
                for u in self.graph.neighbors_row(vb).iter_ones().collect::<Vec<_>>() {
                    self.graph.toggle_edge(va, u);
                }
            }
        }
        self.free_isolated();
        self.history.push(op);
    }
}

/// Forward circuit builder. The represented state is `(tags) |graph>` over
/// photons `0..n` and emitters `n..n+E`; unemitted photons and free emitters
/// are isolated with tag `H` (that is, `|0>`).
#[derive(Clone, Debug)]
pub struct Forward {
    n: usize,
    rep: GraphState,
    active: Vec<bool>,
    emitted: Vec<bool>,
    pub circuit: Circuit,
}

impl Forward {
    pub fn new(photons: usize, emitters: usize) -> Self {
        let mut rep = GraphState::new(photons + emitters);
        for v in 0..photons + emitters {
            rep.set_lc_tag(v, Clifford1::h());
        }
        Forward {
            n: photons,
            rep,
            active: vec![false; emitters],
            emitted: vec![false; photons],
            circuit: Circuit::new(emitters, photons),
        }
    }

    /// Replay `history` backwards from the terminal state, reaching `start`.
    pub fn from_history(start: &ReductionState, history: &[ReversedOp]) -> Result<Self, ReductionError> {
        let mut check = start.clone();
        for &op in history {
            check = check.apply_op(op)?;
        }
        if !check.is_terminal() {
            return Err(ReductionError::Incomplete);
        }
        let mut f = Forward::new(start.photons(), start.ne_limit());
        for &op in history.iter().rev() {
            f.apply(op);
        }
        debug_assert!(f.matches(start), "forward replay diverged from the reduction");
        Ok(f)
    }

    fn matches(&self, s: &ReductionState) -> bool {
        (0..self.rep.len()).all(|v| self.rep.neighbors_row(v) == s.graph().neighbors_row(v))
    }

    pub fn graph(&self) -> &GraphState {
        &self.rep
    }

    fn ev(&self, j: usize) -> usize {
        self.n + j
    }

    fn qubit(&self, v: usize) -> usize {
        if v < self.n {
            self.circuit.emitters + v
        } else {
            v - self.n
        }
    }

    pub fn tag(&self, v: usize) -> Clifford1 {
        self.rep.lc_tag(v)
    }

    pub fn emitter_tag(&self, j: usize) -> Clifford1 {
        self.rep.lc_tag(self.ev(j))
    }

    fn gate_1q(&mut self, v: usize, u: Clifford1) {
        if !u.is_identity() {
            self.circuit.push(Gate::Local { qubit: self.qubit(v), u });
            self.rep.set_lc_tag(v, self.rep.lc_tag(v).then(u));
        }
    }

    fn clear(&mut self, v: usize) {
        self.gate_1q(v, self.rep.lc_tag(v).inverse());
    }

    fn ensure_active(&mut self, j: usize) {
        if !self.active[j] {
            self.circuit.push(Gate::EmitterInit { emitter: j });
            self.active[j] = true;
        }
    }

    fn lc(&mut self, v: usize) {
        self.rep.local_complement_mut(v).expect("vertex in range");
    }

    fn emit(&mut self, j: usize, p: usize) {
        let ev = self.ev(j);
        self.clear(ev);
        assert!(!self.emitted[p] && self.rep.lc_tag(p) == Clifford1::h(), "photon {p} not fresh");
        self.circuit.push(Gate::Emission { emitter: j, photon: self.qubit(p) });
        self.rep.set_edge(ev, p, true);
        self.rep.set_lc_tag(p, Clifford1::IDENTITY);
        self.emitted[p] = true;
    }

    /// Measure out emitter `j` after emitting `p`, handing its role to `p`.
    fn measure_swap(&mut self, j: usize, p: usize) {
        let ev = self.ev(j);
        let corr = Some((self.qubit(p), Pauli::X));
        self.circuit.push(Gate::MeasureX { emitter: j, corr });
        for u in self.rep.neighbors_row(ev).iter_ones().collect::<Vec<_>>() {
            self.rep.set_edge(ev, u, false);
            if u != p {
                self.rep.set_edge(p, u, true);
            }
        }
        self.rep.set_lc_tag(p, Clifford1::h());
        self.rep.set_lc_tag(ev, Clifford1::h());
        self.active[j] = false;
    }

    /// Controlled-Z between emitters `a` and `b`, as `H_b CNOT H_b` with the
    /// trailing `H` left in `b`'s tag.
    pub fn cz(&mut self, a: usize, b: usize) {
        self.ensure_active(a);
        self.ensure_active(b);
        let (va, vb) = (self.ev(a), self.ev(b));
        self.clear(va);
        self.gate_1q(vb, self.rep.lc_tag(vb).inverse().then(Clifford1::h()));
        self.circuit.push(Gate::EmitterCnot { control: a, target: b });
        self.rep.toggle_edge(va, vb);
    }

    fn cnot(&mut self, a: usize, b: usize) {
        self.ensure_active(a);
        self.ensure_active(b);
        let (va, vb) = (self.ev(a), self.ev(b));
        self.clear(va);
        self.clear(vb);
        self.circuit.push(Gate::EmitterCnot { control: a, target: b });
        for u in self.rep.neighbors_row(vb).iter_ones().collect::<Vec<_>>() {
            self.rep.toggle_edge(va, u);
        }
    }

    /// Forward counterpart of one reversed op.
    pub fn apply(&mut self, op: ReversedOp) {
        match op {
            ReversedOp::Swap { photon, emitter } => self.release(emitter, photon),
            ReversedOp::Absorb { emitter, photon, case } => {
                self.ensure_active(emitter);
                let e = self.ev(emitter);
                let (before, after): (Vec<usize>, Vec<usize>) = match case {
                    AbsorbCase::Pendant => (vec![], vec![]),
                    AbsorbCase::EmitterLeaf => (vec![], vec![e, photon]),
                    AbsorbCase::TrueTwin => (vec![e], vec![e]),
                    AbsorbCase::FalseTwin { pivot } => (vec![pivot, e], vec![e, pivot]),
                };
                for v in before {
                    self.lc(v);
                }
                self.emit(emitter, photon);
                for v in after {
                    self.lc(v);
                }
            }
            ReversedOp::Disentangle { a, b } => self.cz(a, b),
            ReversedOp::RowAdd { a, b } => self.cnot(a, b),
        }
    }

    /// Emit `p` from host `j` and measure the host out; `p` inherits its edges.
    pub fn release(&mut self, j: usize, p: usize) {
        self.ensure_active(j);
        self.emit(j, p);
        self.measure_swap(j, p);
    }

    /// Final single-qubit gate bringing photon `p` to tag `target`.
    pub fn finish_photon(&mut self, p: usize, target: Clifford1) {
        let u = self.rep.lc_tag(p).inverse().then(target);
        self.gate_1q(p, u);
    }

    pub fn is_active(&self, j: usize) -> bool {
        self.active[j]
    }
}

/// Forward circuit for a complete history from `start`, ending in the
/// photon state `target` (adjacency plus tags).
pub fn reverse_to_circuit(
    start: &ReductionState,
    history: &[ReversedOp],
    target: &GraphState,
) -> Result<Circuit, ReductionError> {
    let mut f = Forward::from_history(start, history)?;
    let hosts = start.hosts().to_vec();
    for p in (0..start.photons()).filter(|p| !hosts.contains(p)) {
        f.finish_photon(p, target.lc_tag(p));
    }
    for (j, &p) in hosts.iter().enumerate() {
        f.release(j, p);
        f.finish_photon(p, target.lc_tag(p));
    }
    Ok(f.circuit)
}

/// Drive `state` to the terminal state with a fixed greedy policy.
pub fn greedy_reduce(mut state: ReductionState) -> Result<ReductionState, ReductionState> {
    while !state.is_terminal() {
        let Some(op) = greedy_choice(&state) else {
            return Err(state);
        };
        state.apply_unchecked(op);
    }
    Ok(state)
}

/// Absorb if possible (lowest-degree photon first), else swap in the
/// lowest-degree photon, else free an emitter with an emitter-emitter op.
pub fn greedy_choice(s: &ReductionState) -> Option<ReversedOp> {
    let g = s.graph();
    let ops = s.applicable_ops();
    let absorb = ops
        .iter()
        .filter(|o| matches!(o, ReversedOp::Absorb { .. }))
        .min_by_key(|o| match **o {
            ReversedOp::Absorb { photon, emitter, .. } => (g.degree(photon), photon, emitter),
            _ => unreachable!(),
        });
    if let Some(op) = absorb {
        return Some(*op);
    }
    let swap = ops
        .iter()
        .filter(|o| matches!(o, ReversedOp::Swap { .. }))
        .min_by_key(|o| match **o {
            ReversedOp::Swap { photon, .. } => (g.degree(photon), photon),
            _ => unreachable!(),
        });
    if let Some(op) = swap {
        return Some(*op);
    }
    ops.iter()
        .filter(|o| o.is_ee_cnot())
        .min_by_key(|o| {
            let mut after = s.clone();
            after.apply_unchecked(**o);
            (std::cmp::Reverse(after.free_emitters()), after.edge_count(), **o)
        })
        .copied()
}
