//! Graph-state topologies.
//!
//! Vertices are numbered `0..n`. Trees use breadth-first numbering with the root
//! at 0; the +-cluster has its central node at 0 followed by four arms, each
//! listed from the centre outwards.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Which family a [`GraphSpec`] was generated from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraphKind {
    Linear,
    Complete,
    Tree(Vec<usize>),
    PlusCluster(usize),
    Custom,
}

/// Adjacency description of a graph state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSpec {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    kind: GraphKind,
}

impl GraphSpec {
    /// Path `0 - 1 - ... - (n-1)`.
    pub fn linear(n: usize) -> Self {
        let edges = (1..n).map(|i| (i - 1, i)).collect();
        Self { n, edges, kind: GraphKind::Linear }
    }

    /// Complete graph `K_n`.
    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        Self { n, edges, kind: GraphKind::Complete }
    }

    /// Tree where every node at depth `k` has `branching[k]` children.
    pub fn tree(branching: &[usize]) -> Result<Self> {
        if branching.is_empty() || branching.contains(&0) {
            return Err(invalid("tree branching", format!("{branching:?}: need d >= 1 and every b_i >= 1")));
        }
        let mut edges = BTreeSet::new();
        let mut level = vec![0usize];
        let mut next_id = 1;
        for &b in branching {
            let mut next_level = Vec::with_capacity(level.len() * b);
            for &parent in &level {
                for _ in 0..b {
                    edges.insert((parent, next_id));
                    next_level.push(next_id);
                    next_id += 1;
                }
            }
            level = next_level;
        }
        Ok(Self { n: next_id, edges, kind: GraphKind::Tree(branching.to_vec()) })
    }

    /// Central node plus four linear arms of `arm_length` qubits.
    pub fn plus_cluster(arm_length: usize) -> Self {
        let mut edges = BTreeSet::new();
        for arm in 0..4 {
            let first = 1 + arm * arm_length;
            for k in 0..arm_length {
                let v = first + k;
                let prev = if k == 0 { 0 } else { v - 1 };
                edges.insert((prev, v));
            }
        }
        Self { n: 4 * arm_length + 1, edges, kind: GraphKind::PlusCluster(arm_length) }
    }

    /// Arbitrary graph; edges are validated and normalised to `(lo, hi)`.
    pub fn custom(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(invalid("graph", format!("self-loop on vertex {a}")));
            }
            if a >= n || b >= n {
                return Err(invalid("graph", format!("edge ({a}, {b}) references a vertex >= {n}")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Self { n, edges: set, kind: GraphKind::Custom })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &GraphKind {
        &self.kind
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// Neighbourhood `v(i)`, ascending.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| if a == v { Some(b) } else if b == v { Some(a) } else { None })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for row in &mut adj {
            row.sort_unstable();
        }
        adj
    }

    pub fn check_qubit(&self, q: usize) -> Result<()> {
        if q < self.n {
            Ok(())
        } else {
            Err(invalid("qubit index", format!("{q} out of range for {} qubits", self.n)))
        }
    }

    /// Re-checks the structural invariants; constructors already enforce them.
    pub fn validate(&self) -> Result<()> {
        for &(a, b) in &self.edges {
            if a == b {
                return Err(invalid("graph", format!("self-loop on vertex {a}")));
            }
            if a >= self.n || b >= self.n {
                return Err(invalid("graph", format!("edge ({a}, {b}) references a vertex >= {}", self.n)));
            }
        }
        Ok(())
    }

    /// Subgraph induced on `keep` (ascending), relabelled to `0..keep.len()`.
    pub fn induced(&self, keep: &[usize]) -> GraphSpec {
        let index: std::collections::HashMap<usize, usize> =
            keep.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let edges = self
            .edges
            .iter()
            .filter_map(|(a, b)| Some((*index.get(a)?, *index.get(b)?)))
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        GraphSpec { n: keep.len(), edges, kind: GraphKind::Custom }
    }

    /// Connected components as sorted vertex lists, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut out = vec![];
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &u in &adj[v] {
                    if !seen[u] {
                        seen[u] = true;
                        comp.push(u);
                        queue.push_back(u);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// True when the graph is a single path (or a single vertex).
    pub fn is_path(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        let adj = self.adjacency();
        self.edges.len() == self.n - 1
            && adj.iter().all(|a| a.len() <= 2)
            && self.components().len() == 1
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            GraphKind::Linear => write!(f, "linear:{}", self.n),
            GraphKind::Complete => write!(f, "complete:{}", self.n),
            GraphKind::Tree(b) => {
                let parts: Vec<String> = b.iter().map(|x| x.to_string()).collect();
                write!(f, "tree:{}", parts.join(","))
            }
            GraphKind::PlusCluster(l) => write!(f, "plus:{l}"),
            GraphKind::Custom => {
                let parts: Vec<String> = self.edges.iter().map(|(a, b)| format!("{a}-{b}")).collect();
                write!(f, "custom:{}:{}", self.n, parts.join(","))
            }
        }
    }
}

impl FromStr for GraphSpec {
    type Err = Error;

    /// Parses `linear:N`, `complete:N`, `tree:b1,b2,..`, `plus:L` or `custom:N:a-b,c-d`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: &str| invalid("graph spec", format!("{s:?}: {reason}"));
        let (kind, rest) = s.split_once(':').ok_or_else(|| bad("expected <kind>:<params>"))?;
        let int = |t: &str| t.trim().parse::<usize>().map_err(|_| bad("expected a non-negative integer"));
        match kind.trim() {
            "linear" => Ok(GraphSpec::linear(int(rest)?)),
            "complete" => Ok(GraphSpec::complete(int(rest)?)),
            "plus" => Ok(GraphSpec::plus_cluster(int(rest)?)),
            "tree" => {
                let b = rest.split(',').map(int).collect::<Result<Vec<_>>>()?;
                GraphSpec::tree(&b)
            }
            "custom" => {
                let (n, edges) = rest.split_once(':').unwrap_or((rest, ""));
                let n = int(n)?;
                let mut list = vec![];
                for e in edges.split(',').filter(|e| !e.trim().is_empty()) {
                    let (a, b) = e.split_once('-').ok_or_else(|| bad("edge must be a-b"))?;
                    list.push((int(a)?, int(b)?));
                }
                GraphSpec::custom(n, list)
            }
            other => Err(bad(&format!("unknown graph kind {other:?}"))),
        }
    }
}

/// Located erasures: the set of qubits known to be lost.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LossMask {
    lost: BTreeSet<usize>,
}

impl LossMask {
    pub fn new(n: usize, lost: impl IntoIterator<Item = usize>) -> Result<Self> {
        let lost: BTreeSet<usize> = lost.into_iter().collect();
        if let Some(&q) = lost.iter().find(|&&q| q >= n) {
            return Err(invalid("loss mask", format!("qubit {q} out of range for {n} qubits")));
        }
        Ok(Self { lost })
    }

    pub fn contains(&self, q: usize) -> bool {
        self.lost.contains(&q)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.lost.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.lost.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lost.is_empty()
    }
}
