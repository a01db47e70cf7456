//! Benchmark graph families: square lattices, complete trees and Waxman
//! random geometric graphs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::GraphState;

#[derive(Debug, Error, PartialEq)]
pub enum BenchError {
    #[error("invalid parameters: {0}")]
    Invalid(String),
    #[error("no connected Waxman graph after {0} attempts")]
    Disconnected(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum BenchmarkSpec {
    Lattice { width: usize, height: usize },
    Tree { branching: usize, depth: usize },
    Waxman { n: usize, alpha: f64, beta: f64, seed: u64 },
}

pub const WAXMAN_ALPHA: f64 = 0.6;
pub const WAXMAN_BETA: f64 = 0.4;
const WAXMAN_ATTEMPTS: usize = 1000;

impl BenchmarkSpec {
    pub fn waxman(n: usize, seed: u64) -> Self {
        BenchmarkSpec::Waxman { n, alpha: WAXMAN_ALPHA, beta: WAXMAN_BETA, seed }
    }

    pub fn family(&self) -> &'static str {
        match self {
            BenchmarkSpec::Lattice { .. } => "lattice",
            BenchmarkSpec::Tree { .. } => "tree",
            BenchmarkSpec::Waxman { .. } => "waxman",
        }
    }

    pub fn generate(&self) -> Result<GraphState, BenchError> {
        match *self {
            BenchmarkSpec::Lattice { width, height } => lattice(width, height),
            BenchmarkSpec::Tree { branching, depth } => tree(branching, depth),
            BenchmarkSpec::Waxman { n, alpha, beta, seed } => waxman(n, alpha, beta, seed),
        }
    }
}

pub fn lattice(width: usize, height: usize) -> Result<GraphState, BenchError> {
    if width == 0 || height == 0 {
        return Err(BenchError::Invalid("lattice dimensions must be positive".into()));
    }
    let id = |r: usize, c: usize| r * width + c;
    let mut edges = Vec::new();
    for r in 0..height {
        for c in 0..width {
            if c + 1 < width {
                edges.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < height {
                edges.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    Ok(GraphState::from_edges(width * height, &edges).expect("grid edges in range"))
}

/// Complete `branching`-ary tree; the root is vertex 0 and children of `v`
/// are `branching*v+1 ..= branching*v+branching`.
pub fn tree(branching: usize, depth: usize) -> Result<GraphState, BenchError> {
    if branching == 0 {
        return Err(BenchError::Invalid("branching must be positive".into()));
    }
    let mut n = 1usize;
    let mut level = 1usize;
    for _ in 0..depth {
        level = level.checked_mul(branching).ok_or_else(|| BenchError::Invalid("tree too large".into()))?;
        n = n.checked_add(level).ok_or_else(|| BenchError::Invalid("tree too large".into()))?;
    }
    let edges: Vec<(usize, usize)> = (1..n).map(|v| ((v - 1) / branching, v)).collect();
    Ok(GraphState::from_edges(n, &edges).expect("tree edges in range"))
}

/// Points uniform in the unit square; edge `(u,v)` with probability
/// `alpha * exp(-d(u,v) / (beta * L))`, `L` the largest pairwise distance.
/// Redrawn from the same stream until connected.
pub fn waxman(n: usize, alpha: f64, beta: f64, seed: u64) -> Result<GraphState, BenchError> {
    if n == 0 || !(alpha > 0.0 && alpha <= 1.0) || !(beta > 0.0 && beta <= 1.0) {
        return Err(BenchError::Invalid(format!("waxman n={n} alpha={alpha} beta={beta}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..WAXMAN_ATTEMPTS {
        let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen(), rng.gen())).collect();
        let dist = |a: usize, b: usize| (pts[a].0 - pts[b].0).hypot(pts[a].1 - pts[b].1);
        let l = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .map(|(a, b)| dist(a, b))
            .fold(0.0f64, f64::max);
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                let p = if l > 0.0 { alpha * (-dist(a, b) / (beta * l)).exp() } else { alpha };
                if rng.gen::<f64>() < p {
                    edges.push((a, b));
                }
            }
        }
        let g = GraphState::from_edges(n, &edges).expect("edges in range");
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(BenchError::Disconnected(WAXMAN_ATTEMPTS))
}

/// Connected Erdos-Renyi graph for randomized testing.
pub fn random_connected(n: usize, p: f64, seed: u64) -> GraphState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(p) {
                    edges.push((a, b));
                }
            }
        }
        let g = GraphState::from_edges(n, &edges).expect("edges in range");
        if g.is_connected() {
            return g;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_2x2_is_a_square() {
        let g = lattice(2, 2).unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (0, 2), (1, 3), (2, 3)]);
        assert!(lattice(0, 3).is_err());
    }

    #[test]
    fn binary_tree_depth_two() {
        let g = tree(2, 2).unwrap();
        assert_eq!((g.len(), g.edge_count()), (7, 6));
        assert!(g.is_connected());
        assert_eq!(tree(1, 3).unwrap().edge_count(), 3);
    }

    #[test]
    fn waxman_is_reproducible() {
        let a = BenchmarkSpec::waxman(20, 7).generate().unwrap();
        let b = BenchmarkSpec::waxman(20, 7).generate().unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert!(a.is_connected());
        assert_ne!(a.to_json(), BenchmarkSpec::waxman(20, 8).generate().unwrap().to_json());
        assert!(waxman(5, 0.0, 0.4, 1).is_err());
    }
}
