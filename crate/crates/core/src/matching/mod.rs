//! Bipartite graphs `B(E, F, U)`, maximum matchings and Hall deficiency
//! witnesses.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::group::{Entourage, FiniteWindow, GroupError, GroupModel};

const NONE: usize = usize::MAX;

/// Plain bipartite graph on `0..adj.len()` (left) and `0..n_right`.
/// Each adjacency list is sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    pub n_right: usize,
    pub adj: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    pub fn new(n_right: usize, mut adj: Vec<Vec<usize>>) -> Self {
        for row in &mut adj {
            row.sort_unstable();
            row.dedup();
            assert!(row.iter().all(|&j| j < n_right), "edge endpoint out of range");
        }
        BipartiteGraph { n_right, adj }
    }

    pub fn n_left(&self) -> usize {
        self.adj.len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i].binary_search(&j).is_ok()
    }

    pub fn edges(&self) -> Vec<[usize; 2]> {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&j| [i, j]))
            .collect()
    }

    /// Neighbourhood of a set of left vertices.
    pub fn neighbourhood(&self, s: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = s.iter().flat_map(|&i| self.adj[i].iter().copied()).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn transpose(&self) -> BipartiteGraph {
        let mut adj = vec![Vec::new(); self.n_right];
        for (i, row) in self.adj.iter().enumerate() {
            for &j in row {
                adj[j].push(i);
            }
        }
        BipartiteGraph {
            n_right: self.n_left(),
            adj,
        }
    }
}

/// `B(E, F, U)`: `(x, y)` adjacent iff `y x^{-1} ∈ U`.
#[derive(Debug, Clone)]
pub struct BipartiteInstance {
    pub left: FiniteWindow,
    pub right: FiniteWindow,
    pub graph: BipartiteGraph,
}

pub fn build_graph(
    model: &GroupModel,
    e: &FiniteWindow,
    f: &FiniteWindow,
    u: &Entourage,
) -> Result<BipartiteInstance, GroupError> {
    let adj = e
        .as_slice()
        .par_iter()
        .map(|x| {
            let mut row = Vec::new();
            for (j, y) in f.iter().enumerate() {
                if model.related(u, x, y)? {
                    row.push(j);
                }
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, GroupError>>()?;
    Ok(BipartiteInstance {
        left: e.clone(),
        right: f.clone(),
        graph: BipartiteGraph { n_right: f.len(), adj },
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingResult {
    pub mu: usize,
    /// Matched pairs `(left, right)` sorted by left index.
    pub pairing: Vec<[usize; 2]>,
    /// Left vertices reachable by alternating paths from unmatched left
    /// vertices; `|S| - |N(S)| = |E| - mu`.
    pub witness: Vec<usize>,
    #[serde(skip)]
    pub perfect: bool,
}

impl MatchingResult {
    pub fn deficiency(&self, graph: &BipartiteGraph) -> usize {
        self.witness.len() - graph.neighbourhood(&self.witness).len()
    }

    /// Checks the pairing against the graph: adjacency and injectivity.
    pub fn is_valid_for(&self, graph: &BipartiteGraph) -> bool {
        let mut used_left = vec![false; graph.n_left()];
        let mut used_right = vec![false; graph.n_right];
        for &[i, j] in &self.pairing {
            if i >= graph.n_left() || j >= graph.n_right || !graph.has_edge(i, j) {
                return false;
            }
            if std::mem::replace(&mut used_left[i], true) || std::mem::replace(&mut used_right[j], true) {
                return false;
            }
        }
        self.pairing.len() == self.mu
    }
}

/// Signature shared by the matching engine and test doubles.
pub type Matcher = fn(&BipartiteGraph) -> MatchingResult;

/// Hopcroft–Karp with layered BFS phases and iterative DFS.
pub fn max_matching(g: &BipartiteGraph) -> MatchingResult {
    let n = g.n_left();
    let mut match_l = vec![NONE; n];
    let mut match_r = vec![NONE; g.n_right];
    let mut dist = vec![NONE; n];
    let mut queue = VecDeque::new();
    loop {
        queue.clear();
        for u in 0..n {
            if match_l[u] == NONE {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = NONE;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &g.adj[u] {
                let w = match_r[v];
                if w == NONE {
                    found = true;
                } else if dist[w] == NONE {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            break;
        }
        let mut next = vec![0usize; n];
        let mut stack = Vec::new();
        for s in 0..n {
            if match_l[s] != NONE {
                continue;
            }
            stack.clear();
            stack.push(s);
            while let Some(&u) = stack.last() {
                if next[u] == g.adj[u].len() {
                    dist[u] = NONE;
                    stack.pop();
                    continue;
                }
                let v = g.adj[u][next[u]];
                next[u] += 1;
                let w = match_r[v];
                if w == NONE {
                    for &x in &stack {
                        let y = g.adj[x][next[x] - 1];
                        match_l[x] = y;
                        match_r[y] = x;
                    }
                    break;
                } else if dist[w] != NONE && dist[w] == dist[u] + 1 {
                    stack.push(w);
                }
            }
        }
    }
    let pairing: Vec<[usize; 2]> = match_l
        .iter()
        .enumerate()
        .filter(|(_, &j)| j != NONE)
        .map(|(i, &j)| [i, j])
        .collect();
    let witness = konig_witness(g, &match_l, &match_r);
    let mu = pairing.len();
    MatchingResult {
        mu,
        pairing,
        witness,
        perfect: mu == n,
    }
}

fn konig_witness(g: &BipartiteGraph, match_l: &[usize], match_r: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; g.n_left()];
    let mut queue: VecDeque<usize> = (0..g.n_left()).filter(|&u| match_l[u] == NONE).collect();
    for &u in &queue {
        seen[u] = true;
    }
    while let Some(u) = queue.pop_front() {
        for &v in &g.adj[u] {
            let w = match_r[v];
            debug_assert!(w != NONE, "augmenting path left after maximum matching");
            if w != NONE && !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    (0..g.n_left()).filter(|&u| seen[u]).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PerfectOutcome {
    Perfect(Vec<[usize; 2]>),
    /// A left set with more members than neighbours.
    Violation(Vec<usize>),
}

impl PerfectOutcome {
    pub fn is_perfect(&self) -> bool {
        matches!(self, PerfectOutcome::Perfect(_))
    }
}

pub fn perfect_matching(g: &BipartiteGraph) -> PerfectOutcome {
    let r = max_matching(g);
    if r.perfect {
        PerfectOutcome::Perfect(r.pairing)
    } else {
        PerfectOutcome::Violation(r.witness)
    }
}

/// Golden-file form of an instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDump {
    #[serde(rename = "E")]
    pub e: Vec<String>,
    #[serde(rename = "F")]
    pub f: Vec<String>,
    pub edges: Vec<[usize; 2]>,
}

impl BipartiteInstance {
    pub fn dump(&self) -> InstanceDump {
        InstanceDump {
            e: self.left.to_strings(),
            f: self.right.to_strings(),
            edges: self.graph.edges(),
        }
    }
}

impl InstanceDump {
    pub fn graph(&self) -> BipartiteGraph {
        let mut adj = vec![Vec::new(); self.e.len()];
        for &[i, j] in &self.edges {
            adj[i].push(j);
        }
        BipartiteGraph::new(self.f.len(), adj)
    }
}
