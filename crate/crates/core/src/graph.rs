//! Graph states with vertex roles and local-Clifford tags.
//!
//! A [`GraphState`] stands for the physical state `(⊗_v tag_v) |G>`, where
//! `|G>` is the graph state of the adjacency. Local complementation rewrites
//! the adjacency and folds the inverse of the implementing local Clifford
//! into the tags, so the represented state is unchanged by it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::{gf2_rank, BitRow};
use crate::clifford::Clifford1;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown vertex {0}")]
    UnknownVertex(usize),
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("partition assigns {got} of {expected} vertices")]
    PartialAssignment { expected: usize, got: usize },
    #[error("malformed graph file: {0}")]
    Parse(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    #[default]
    Photon,
    Emitter,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GraphState {
    roles: Vec<Role>,
    adj: Vec<BitRow>,
    lc_tags: Vec<Clifford1>,
}

impl GraphState {
    /// Edgeless graph of `n` photons.
    pub fn new(n: usize) -> Self {
        GraphState {
            roles: vec![Role::Photon; n],
            adj: vec![BitRow::zeros(n); n],
            lc_tags: vec![Clifford1::IDENTITY; n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Self::new(n);
        for &(u, v) in edges {
            g.check(u)?;
            g.check(v)?;
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            g.set_edge(u, v, true);
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.roles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }

    fn check(&self, v: usize) -> Result<(), GraphError> {
        if v < self.len() {
            Ok(())
        } else {
            Err(GraphError::UnknownVertex(v))
        }
    }

    pub fn role(&self, v: usize) -> Role {
        self.roles[v]
    }

    pub fn set_role(&mut self, v: usize, role: Role) {
        self.roles[v] = role;
    }

    pub fn lc_tag(&self, v: usize) -> Clifford1 {
        self.lc_tags[v]
    }

    pub fn lc_tags(&self) -> &[Clifford1] {
        &self.lc_tags
    }

    pub fn set_lc_tag(&mut self, v: usize, c: Clifford1) {
        self.lc_tags[v] = c;
    }

    /// Drop the tags, keeping only the adjacency and roles.
    pub fn bare(&self) -> GraphState {
        let mut g = self.clone();
        g.lc_tags.fill(Clifford1::IDENTITY);
        g
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].get(v)
    }

    pub fn set_edge(&mut self, u: usize, v: usize, present: bool) {
        debug_assert_ne!(u, v);
        self.adj[u].set(v, present);
        self.adj[v].set(u, present);
    }

    pub fn toggle_edge(&mut self, u: usize, v: usize) {
        debug_assert_ne!(u, v);
        self.adj[u].toggle(v);
        self.adj[v].toggle(u);
    }

    pub fn neighbors_row(&self, v: usize) -> &BitRow {
        &self.adj[v]
    }

    pub fn neighborhood(&self, v: usize) -> Result<Vec<usize>, GraphError> {
        self.check(v)?;
        Ok(self.adj[v].iter_ones().collect())
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones()
    }

    /// Edges `(u, v)` with `u < v`, sorted lexicographically.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.len() {
            for v in self.adj[u].iter_ones().filter(|&v| v > u) {
                out.push((u, v));
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BitRow::count_ones).sum::<usize>() / 2
    }

    /// Toggle every edge inside `N(v)`, adjacency only.
    pub(crate) fn toggle_neighborhood(&mut self, v: usize) {
        let nbrs: Vec<usize> = self.adj[v].iter_ones().collect();
        let row = self.adj[v].clone();
        for &a in &nbrs {
            // toggle a's links to the other neighbours
            let mut mask = row.clone();
            mask.set(a, false);
            self.adj[a].xor_assign(&mask);
        }
    }

    /// Local complementation at `v`, in place.
    pub fn local_complement_mut(&mut self, v: usize) -> Result<(), GraphError> {
        self.check(v)?;
        let nbrs: Vec<usize> = self.adj[v].iter_ones().collect();
        self.toggle_neighborhood(v);
        // |tau_v G> = U |G> with U = sqrt(-iX)_v prod_u sqrt(iZ)_u
        let ux = Clifford1::sqrt_neg_i_x().inverse();
        let uz = Clifford1::sqrt_i_z().inverse();
        self.lc_tags[v] = ux.then(self.lc_tags[v]);
        for u in nbrs {
            self.lc_tags[u] = uz.then(self.lc_tags[u]);
        }
        Ok(())
    }

    pub fn local_complement(&self, v: usize) -> Result<GraphState, GraphError> {
        let mut g = self.clone();
        g.local_complement_mut(v)?;
        Ok(g)
    }

    pub fn apply_lc_sequence(&self, seq: &[usize]) -> Result<GraphState, GraphError> {
        let mut g = self.clone();
        for &v in seq {
            g.local_complement_mut(v)?;
        }
        Ok(g)
    }

    /// Edges crossing between different parts.
    pub fn cut_edges(&self, p: &VertexPartition) -> Result<Vec<(usize, usize)>, GraphError> {
        if p.assignment.len() != self.len() {
            return Err(GraphError::PartialAssignment {
                expected: self.len(),
                got: p.assignment.len(),
            });
        }
        Ok(self
            .edges()
            .into_iter()
            .filter(|&(u, v)| p.assignment[u] != p.assignment[v])
            .collect())
    }

    /// GF(2) rank of the biadjacency matrix between `a` and its complement.
    pub fn cut_rank(&self, a: &[usize]) -> Result<usize, GraphError> {
        let n = self.len();
        let mut in_a = BitRow::zeros(n);
        for &v in a {
            self.check(v)?;
            in_a.set(v, true);
        }
        let mut outside = BitRow::zeros(n);
        for v in (0..n).filter(|&v| !in_a.get(v)) {
            outside.set(v, true);
        }
        let rows: Vec<BitRow> = in_a.iter_ones().map(|v| self.adj[v].and(&outside)).collect();
        Ok(gf2_rank(rows))
    }

    /// Induced subgraph on `vertices`, relabelled `0..k` in the given order.
    pub fn induced(&self, vertices: &[usize]) -> GraphState {
        let k = vertices.len();
        let mut g = GraphState::new(k);
        for (i, &u) in vertices.iter().enumerate() {
            g.roles[i] = self.roles[u];
            g.lc_tags[i] = self.lc_tags[u];
            for (j, &v) in vertices.iter().enumerate().skip(i + 1) {
                if self.has_edge(u, v) {
                    g.set_edge(i, j, true);
                }
            }
        }
        g
    }

    pub fn is_connected(&self) -> bool {
        let n = self.len();
        if n == 0 {
            return true;
        }
        let mut seen = BitRow::zeros(n);
        seen.set(0, true);
        let mut stack = vec![0];
        while let Some(v) = stack.pop() {
            for u in self.adj[v].iter_ones() {
                if !seen.get(u) {
                    seen.set(u, true);
                    stack.push(u);
                }
            }
        }
        seen.count_ones() == n
    }

    pub fn to_file(&self) -> GraphFile {
        let roles = if self.roles.iter().any(|r| *r == Role::Emitter) {
            Some(self.roles.clone())
        } else {
            None
        };
        GraphFile {
            n: self.len(),
            edges: self.edges().into_iter().map(|(u, v)| [u, v]).collect(),
            roles,
        }
    }

    pub fn from_file(file: &GraphFile) -> Result<Self, GraphError> {
        let edges: Vec<(usize, usize)> = file.edges.iter().map(|e| (e[0], e[1])).collect();
        let mut g = Self::from_edges(file.n, &edges)?;
        if let Some(roles) = &file.roles {
            if roles.len() != file.n {
                return Err(GraphError::Parse(format!(
                    "roles has {} entries for {} vertices",
                    roles.len(),
                    file.n
                )));
            }
            g.roles = roles.clone();
        }
        Ok(g)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let file: GraphFile =
            serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))?;
        Self::from_file(&file)
    }
}

impl std::fmt::Debug for GraphState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GraphState(n={}, edges={:?}", self.len(), self.edges())?;
        if self.lc_tags.iter().any(|t| !t.is_identity()) {
            write!(f, ", tags={:?}", self.lc_tags)?;
        }
        write!(f, ")")
    }
}

/// On-disk graph format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roles: Option<Vec<Role>>,
}

/// Assignment of vertices to subgraphs of bounded size.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VertexPartition {
    pub assignment: Vec<usize>,
    pub g_max: usize,
    pub subgraph_count: usize,
}

impl VertexPartition {
    pub fn new(assignment: Vec<usize>, g_max: usize) -> Self {
        let n = assignment.len();
        VertexPartition { assignment, g_max, subgraph_count: n.div_ceil(g_max.max(1)) }
    }

    /// Vertices of each non-empty part, parts ordered by smallest member.
    pub fn parts(&self) -> Vec<Vec<usize>> {
        let mut by_id: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for (v, &p) in self.assignment.iter().enumerate() {
            by_id.entry(p).or_default().push(v);
        }
        let mut parts: Vec<Vec<usize>> = by_id.into_values().collect();
        parts.sort_by_key(|p| p[0]);
        parts
    }

    pub fn is_feasible(&self) -> bool {
        self.parts().iter().all(|p| p.len() <= self.g_max)
            && self.parts().len() <= self.subgraph_count.max(1)
    }

    /// Relabel part ids by first appearance.
    pub fn canonical(&self) -> VertexPartition {
        let mut map = std::collections::HashMap::new();
        let assignment = self
            .assignment
            .iter()
            .map(|&p| {
                let next = map.len();
                *map.entry(p).or_insert(next)
            })
            .collect();
        VertexPartition { assignment, ..self.clone() }
    }
}
