//! Agent networks and their dominating-set partitions into star blocks.
//!
//! Vertices are numbered from 1, matching the edge-list file format.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected simple graph on vertices `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentGraph {
    adjacency: Vec<BTreeSet<usize>>,
    connected: bool,
}

impl AgentGraph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph(
                "graph needs at least one vertex".into(),
            ));
        }
        let mut adjacency = vec![BTreeSet::new(); n];
        for &(u, v) in edges {
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            if u == 0 || v == 0 || u > n || v > n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) out of range 1..={n}"
                )));
            }
            adjacency[u - 1].insert(v);
            adjacency[v - 1].insert(u);
        }
        let mut g = Self {
            adjacency,
            connected: false,
        };
        g.connected = g.components().len() == 1;
        Ok(g)
    }

    /// Star with center 1.
    pub fn star(n: usize) -> Result<Self> {
        let edges: Vec<_> = (2..=n).map(|v| (1, v)).collect();
        Self::new(n, &edges)
    }

    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|v| (v, v + 1)).collect();
        Self::new(n, &edges)
    }

    pub fn cycle(n: usize) -> Result<Self> {
        let mut edges: Vec<_> = (1..n).map(|v| (v, v + 1)).collect();
        if n > 2 {
            edges.push((n, 1));
        }
        Self::new(n, &edges)
    }

    /// Erdős–Rényi `G(n, p)` with extra edges stitching the components together.
    pub fn random_connected<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Self> {
        let mut edges = Vec::new();
        for u in 1..=n {
            for v in (u + 1)..=n {
                if rng.random::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        let g = Self::new(n, &edges)?;
        let comps = g.components();
        for w in comps.windows(2) {
            let a = w[0][rng.random_range(0..w[0].len())];
            let b = w[1][rng.random_range(0..w[1].len())];
            edges.push((a, b));
        }
        Self::new(n, &edges)
    }

    pub fn num_vertices(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adjacency[v - 1]
    }

    pub fn is_adjacent(&self, u: usize, v: usize) -> bool {
        self.contains(u) && self.adjacency[u - 1].contains(&v)
    }

    pub fn contains(&self, v: usize) -> bool {
        v >= 1 && v <= self.adjacency.len()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, nb)| {
                nb.iter()
                    .filter(move |&&v| v > i + 1)
                    .map(move |&v| (i + 1, v))
            })
            .collect()
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.num_vertices();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 1..=n {
            if seen[start - 1] {
                continue;
            }
            seen[start - 1] = true;
            let mut comp = vec![start];
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for &v in self.neighbors(u) {
                    if !seen[v - 1] {
                        seen[v - 1] = true;
                        comp.push(v);
                        stack.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Parses the edge-list format: `n <count>` then one `u v` per line.
    /// Blank lines and `#` comments are ignored.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .enumerate()
            .filter(|(_, l)| !l.is_empty());
        let n = match lines.next() {
            Some((_, header)) => {
                let mut parts = header.split_whitespace();
                match (
                    parts.next(),
                    parts.next().map(str::parse::<usize>),
                    parts.next(),
                ) {
                    (Some("n"), Some(Ok(n)), None) => n,
                    _ => return Err(Error::Parse(format!("bad graph header '{header}'"))),
                }
            }
            None => return Err(Error::Parse("empty graph file".into())),
        };
        let mut edges = Vec::new();
        for (idx, line) in lines {
            let nums: Vec<_> = line.split_whitespace().map(str::parse::<usize>).collect();
            match nums.as_slice() {
                [Ok(u), Ok(v)] => edges.push((*u, *v)),
                _ => return Err(Error::Parse(format!("line {}: bad edge '{line}'", idx + 1))),
            }
        }
        Self::new(n, &edges)
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = format!("n {}\n", self.num_vertices());
        for (u, v) in self.edges() {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse_edge_list(&fs::read_to_string(path)?)
    }
}

/// Greedy dominating set: repeatedly take the vertex whose closed
/// neighbourhood covers the most undominated vertices. Ties prefer a vertex
/// that is itself undominated, then the lowest index. Returned sorted.
pub fn greedy_dominating_set(g: &AgentGraph) -> Vec<usize> {
    let n = g.num_vertices();
    let mut covered = vec![false; n];
    let mut remaining = n;
    let mut dom = Vec::new();
    while remaining > 0 {
        let mut best: Option<(usize, bool, usize)> = None;
        for v in 1..=n {
            let gain = usize::from(!covered[v - 1])
                + g.neighbors(v).iter().filter(|&&u| !covered[u - 1]).count();
            let cand = (gain, !covered[v - 1], v);
            let better = match best {
                None => true,
                Some((bg, bself, _)) => gain > bg || (gain == bg && cand.1 && !bself),
            };
            if better {
                best = Some(cand);
            }
        }
        let (_, _, v) = best.expect("uncovered vertex exists");
        for u in std::iter::once(v).chain(g.neighbors(v).iter().copied()) {
            if !covered[u - 1] {
                covered[u - 1] = true;
                remaining -= 1;
            }
        }
        dom.push(v);
    }
    dom.sort_unstable();
    dom
}

/// Star-shaped blocks, `blocks[i]` led by `hubs[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub blocks: Vec<Vec<usize>>,
    pub hubs: Vec<usize>,
}

impl Partition {
    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Single block containing every vertex of `g`, led by `hub`.
    pub fn single_block(g: &AgentGraph, hub: usize) -> Self {
        Self {
            blocks: vec![(1..=g.num_vertices()).collect()],
            hubs: vec![hub],
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

/// Assigns each vertex to a dominant vertex: itself if dominant, otherwise the
/// lowest-index adjacent dominant vertex.
pub fn build_partition(g: &AgentGraph, dom: &[usize]) -> Result<Partition> {
    let hubs: Vec<usize> = dom
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if hubs.is_empty() {
        return Err(Error::NotDominating { vertex: 1 });
    }
    if let Some(&bad) = hubs.iter().find(|&&h| !g.contains(h)) {
        return Err(Error::InvalidGraph(format!(
            "dominant vertex {bad} not in graph"
        )));
    }
    let mut blocks: Vec<Vec<usize>> = hubs.iter().map(|_| Vec::new()).collect();
    for v in 1..=g.num_vertices() {
        let slot = hubs
            .iter()
            .position(|&h| h == v)
            .or_else(|| hubs.iter().position(|&h| g.is_adjacent(h, v)))
            .ok_or(Error::NotDominating { vertex: v })?;
        blocks[slot].push(v);
    }
    Ok(Partition { blocks, hubs })
}

/// First broken partition invariant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Violation {
    HubCount { blocks: usize, hubs: usize },
    VertexOutOfRange { vertex: usize },
    Disjointness { vertex: usize },
    Coverage { vertex: usize },
    HubMembership { hub: usize },
    HubAdjacency { vertex: usize, hub: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::HubCount { blocks, hubs } => {
                write!(f, "hub count: {blocks} blocks but {hubs} hubs")
            }
            Violation::VertexOutOfRange { vertex } => {
                write!(f, "range: vertex {vertex} not in graph")
            }
            Violation::Disjointness { vertex } => {
                write!(f, "disjointness: vertex {vertex} appears in two blocks")
            }
            Violation::Coverage { vertex } => write!(f, "coverage: vertex {vertex} in no block"),
            Violation::HubMembership { hub } => {
                write!(f, "hub membership: hub {hub} outside its block")
            }
            Violation::HubAdjacency { vertex, hub } => {
                write!(
                    f,
                    "hub adjacency: vertex {vertex} not adjacent to hub {hub}"
                )
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartitionReport {
    pub valid: bool,
    pub violation: Option<Violation>,
}

/// Checks every partition invariant; never fails.
pub fn validate_partition(g: &AgentGraph, p: &Partition) -> PartitionReport {
    let fail = |v: Violation| PartitionReport {
        valid: false,
        violation: Some(v),
    };
    if p.blocks.len() != p.hubs.len() {
        return fail(Violation::HubCount {
            blocks: p.blocks.len(),
            hubs: p.hubs.len(),
        });
    }
    let mut owner = vec![false; g.num_vertices()];
    for block in &p.blocks {
        for &v in block {
            if !g.contains(v) {
                return fail(Violation::VertexOutOfRange { vertex: v });
            }
            if owner[v - 1] {
                return fail(Violation::Disjointness { vertex: v });
            }
            owner[v - 1] = true;
        }
    }
    if let Some(v) = owner.iter().position(|&o| !o) {
        return fail(Violation::Coverage { vertex: v + 1 });
    }
    for (block, &hub) in p.blocks.iter().zip(&p.hubs) {
        if !block.contains(&hub) {
            return fail(Violation::HubMembership { hub });
        }
        if let Some(&v) = block.iter().find(|&&v| v != hub && !g.is_adjacent(hub, v)) {
            return fail(Violation::HubAdjacency { vertex: v, hub });
        }
    }
    PartitionReport {
        valid: true,
        violation: None,
    }
}
