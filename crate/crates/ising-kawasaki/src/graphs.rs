//! Bounded-degree multigraphs, configuration-model random regular graphs,
//! disjoint unions and a plain-text edge-list format.
//!
//! A self-loop at `v` stores `v` twice in `v`'s adjacency list, so it adds 2
//! to the degree and is always monochromatic.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util;

pub const DEFAULT_SIMPLE_RETRIES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    adjacency: Vec<Vec<usize>>,
    delta_max: usize,
}

impl Graph {
    /// Empty graph on `n` vertices with declared maximum degree `delta_max`.
    pub fn empty(n: usize, delta_max: usize) -> Self {
        Graph {
            n,
            adjacency: vec![Vec::new(); n],
            delta_max,
        }
    }

    pub fn from_edges(n: usize, delta_max: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::empty(n, delta_max);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        g.validate()?;
        Ok(g)
    }

    /// Builds from edges and sets `delta_max` to the realized maximum degree.
    pub fn from_edges_auto(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::empty(n, usize::MAX);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        g.delta_max = g.max_degree();
        Ok(g)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        if u >= self.n || v >= self.n {
            return Err(Error::invalid(format!(
                "edge ({u}, {v}) out of range for n = {}",
                self.n
            )));
        }
        self.adjacency[u].push(v);
        self.adjacency[v].push(u);
        Ok(())
    }

    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Graph::from_edges_auto(n, &edges).expect("valid complete graph")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle needs n >= 3");
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_edges_auto(n, &edges).expect("valid cycle")
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        let mut g = Graph::from_edges_auto(n, &edges).expect("valid path");
        g.delta_max = g.delta_max.max(if n > 2 { 2 } else { 1 });
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta_max(&self) -> usize {
        self.delta_max
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edge multiset as `(u, v)` with `u <= v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.n {
            let mut loops = 0;
            for &v in &self.adjacency[u] {
                if u < v {
                    out.push((u, v));
                } else if u == v {
                    loops += 1;
                }
            }
            for _ in 0..loops / 2 {
                out.push((u, u));
            }
        }
        out.sort_unstable();
        out
    }

    pub fn has_self_loop(&self) -> bool {
        (0..self.n).any(|u| self.adjacency[u].contains(&u))
    }

    pub fn has_parallel_edge(&self) -> bool {
        self.edges().windows(2).any(|w| w[0] == w[1])
    }

    pub fn is_simple(&self) -> bool {
        !self.has_self_loop() && !self.has_parallel_edge()
    }

    pub fn validate(&self) -> Result<()> {
        let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for u in 0..self.n {
            for &v in &self.adjacency[u] {
                if v >= self.n {
                    return Err(Error::invalid(format!("neighbor {v} of {u} out of range")));
                }
                *counts.entry((u, v)).or_default() += 1;
            }
        }
        for (&(u, v), &c) in &counts {
            if u != v && counts.get(&(v, u)).copied().unwrap_or(0) != c {
                return Err(Error::invalid(format!("adjacency not symmetric at ({u}, {v})")));
            }
            if u == v && c % 2 != 0 {
                return Err(Error::invalid(format!("odd self-loop multiplicity at {u}")));
            }
        }
        if self.max_degree() > self.delta_max {
            return Err(Error::invalid(format!(
                "max degree {} exceeds declared {}",
                self.max_degree(),
                self.delta_max
            )));
        }
        Ok(())
    }

    /// Applies a vertex relabeling `perm[old] = new`.
    pub fn relabel(&self, perm: &[usize]) -> Graph {
        let edges: Vec<_> = self
            .edges()
            .into_iter()
            .map(|(u, v)| (perm[u], perm[v]))
            .collect();
        let mut g = Graph::from_edges_auto(self.n, &edges).expect("relabel keeps validity");
        g.delta_max = self.delta_max;
        g
    }

    pub fn to_edge_list_string(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.delta_max);
        for (u, v) in self.edges() {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }

    pub fn parse_edge_list(text: &str) -> Result<Graph> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header \"n delta\"".into(),
        })?;
        let (n, delta) = parse_pair(hline, header)?;
        let mut g = Graph::empty(n, delta);
        for (line, l) in lines {
            let (u, v) = parse_pair(line, l)?;
            g.add_edge(u, v).map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })?;
        }
        g.validate()?;
        Ok(g)
    }

    pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
        Graph::parse_edge_list(&std::fs::read_to_string(path)?)
    }

    pub fn write_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_edge_list_string())?;
        Ok(())
    }
}

fn parse_pair(line: usize, l: &str) -> Result<(usize, usize)> {
    let mut it = l.split_whitespace();
    let mut next = |what: &str| -> Result<usize> {
        it.next()
            .ok_or_else(|| Error::Parse {
                line,
                msg: format!("missing {what}"),
            })?
            .parse()
            .map_err(|e| Error::Parse {
                line,
                msg: format!("bad {what}: {e}"),
            })
    };
    let a = next("first field")?;
    let b = next("second field")?;
    if it.next().is_some() {
        return Err(Error::Parse {
            line,
            msg: "expected two fields".into(),
        });
    }
    Ok((a, b))
}

/// Configuration-model Δ-regular multigraph; with `simple` set, rejection
/// samples up to [`DEFAULT_SIMPLE_RETRIES`] times.
pub fn random_regular(n: usize, delta: usize, seed: u64, simple: bool) -> Result<Graph> {
    random_regular_with_cap(n, delta, seed, simple, DEFAULT_SIMPLE_RETRIES)
}

pub fn random_regular_with_cap(
    n: usize,
    delta: usize,
    seed: u64,
    simple: bool,
    max_retries: usize,
) -> Result<Graph> {
    if n < 2 {
        return Err(Error::invalid("random_regular needs n >= 2"));
    }
    if (n * delta) % 2 != 0 {
        return Err(Error::invalid(format!("n * delta = {} is odd", n * delta)));
    }
    let mut rng = util::rng(seed, 0);
    let mut half_edges: Vec<usize> = (0..n * delta).map(|h| h / delta).collect();
    for _ in 0..=max_retries {
        half_edges.shuffle(&mut rng);
        let mut g = Graph::empty(n, delta);
        for pair in half_edges.chunks_exact(2) {
            g.add_edge(pair[0], pair[1])?;
        }
        if !simple || g.is_simple() {
            return Ok(g);
        }
    }
    Err(Error::RetriesExhausted(max_retries))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnionGraph {
    pub base: Graph,
    pub copies: usize,
    pub graph: Graph,
    pub component_of: Vec<usize>,
}

impl UnionGraph {
    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Vertices of copy `c`, in base order.
    pub fn component(&self, c: usize) -> std::ops::Range<usize> {
        let b = self.base.n();
        c * b..(c + 1) * b
    }
}

pub fn disjoint_union(base: &Graph, m: usize) -> Result<UnionGraph> {
    if m == 0 {
        return Err(Error::invalid("disjoint_union needs m >= 1"));
    }
    let b = base.n();
    let mut graph = Graph::empty(b * m, base.delta_max());
    let base_edges = base.edges();
    for c in 0..m {
        for &(u, v) in &base_edges {
            graph.add_edge(c * b + u, c * b + v)?;
        }
    }
    Ok(UnionGraph {
        base: base.clone(),
        copies: m,
        graph,
        component_of: (0..b * m).map(|v| v / b.max(1)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k2_from_single_matching() {
        let g = random_regular(2, 1, 7, true).unwrap();
        assert_eq!(g.edges(), vec![(0, 1)]);
    }

    #[test]
    fn simple_cubic_on_four_is_k4() {
        for seed in 0..5 {
            let g = random_regular(4, 3, seed, true).unwrap();
            assert_eq!(g.edges(), Graph::complete(4).edges());
        }
    }

    #[test]
    fn odd_handshake_rejected() {
        assert!(matches!(
            random_regular(5, 3, 1, false),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn impossible_simple_exhausts() {
        // two vertices of degree 2: every matching has a loop or a double edge
        assert!(matches!(
            random_regular_with_cap(2, 2, 3, true, 3),
            Err(Error::RetriesExhausted(3))
        ));
    }

    #[test]
    fn union_counts() {
        let u = disjoint_union(&Graph::complete(2), 3).unwrap();
        assert_eq!(u.n(), 6);
        assert_eq!(u.graph.edge_count(), 3);
        assert_eq!(u.component_of, vec![0, 0, 1, 1, 2, 2]);
        let same = disjoint_union(&Graph::complete(2), 1).unwrap();
        assert_eq!(same.graph.edges(), Graph::complete(2).edges());
    }

    #[test]
    fn parse_k2() {
        let g = Graph::parse_edge_list("2 1\n0 1").unwrap();
        assert_eq!(g.edges(), vec![(0, 1)]);
        assert!(Graph::parse_edge_list("2 1\n0 2").is_err());
        assert!(Graph::parse_edge_list("2 1\n0 x").is_err());
        assert!(Graph::parse_edge_list("2 1\n0 1 1").is_err());
    }

    #[test]
    fn self_loop_degree_two() {
        let g = Graph::from_edges(1, 2, &[(0, 0)]).unwrap();
        assert_eq!(g.degree(0), 2);
        assert_eq!(g.edges(), vec![(0, 0)]);
        assert_eq!(g.edge_count(), 1);
    }
}
