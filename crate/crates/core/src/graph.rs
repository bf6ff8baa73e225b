//! Undirected simple graphs loaded from whitespace-separated edge lists.
//!
//! Node identifiers are kept as opaque strings; internally every node is
//! addressed by its dense index in first-appearance order.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: expected two node tokens, found {found}")]
    Malformed { line: usize, found: usize },
    #[error("line {line}: self-loop on node '{node}'")]
    SelfLoop { line: usize, node: String },
    #[error("edge list contains no edges")]
    Empty,
    #[error("unknown node '{0}'")]
    UnknownNode(String),
    #[error("node index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("duplicate node label '{0}'")]
    DuplicateNode(String),
}

/// An immutable undirected simple graph.
#[derive(Debug, Clone)]
pub struct Graph {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    // (u, v) with u < v, in insertion order
    edges: Vec<(usize, usize)>,
    edge_set: HashSet<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

fn ordered(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl Graph {
    /// Builds a graph from node labels and index pairs. Duplicate edges
    /// collapse; self-loops are rejected.
    pub fn from_edges<S: Into<String>>(
        labels: impl IntoIterator<Item = S>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(GraphError::DuplicateNode(l.clone()));
            }
        }
        let mut g = Graph {
            neighbors: vec![Vec::new(); labels.len()],
            labels,
            index,
            edges: Vec::new(),
            edge_set: HashSet::new(),
        };
        for (u, v) in edges {
            for x in [u, v] {
                if x >= g.labels.len() {
                    return Err(GraphError::IndexOutOfRange(x));
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop {
                    line: 0,
                    node: g.labels[u].clone(),
                });
            }
            g.insert_edge(u, v);
        }
        g.finish();
        Ok(g)
    }

    fn insert_edge(&mut self, u: usize, v: usize) {
        let e = ordered(u, v);
        if self.edge_set.insert(e) {
            self.edges.push(e);
            self.neighbors[u].push(v);
            self.neighbors[v].push(u);
        }
    }

    fn finish(&mut self) {
        for n in &mut self.neighbors {
            n.sort_unstable();
        }
    }

    fn intern(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.labels.len();
        self.labels.push(label.to_owned());
        self.index.insert(label.to_owned(), i);
        self.neighbors.push(Vec::new());
        i
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Node labels in first-appearance order.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn node_index(&self, label: &str) -> Result<usize, GraphError> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| GraphError::UnknownNode(label.to_owned()))
    }

    /// Edges as `(u, v)` index pairs with `u < v`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Sorted neighbor indices of node `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// Degree by node index.
    pub fn degree_of(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    /// Degree by node label.
    pub fn degree(&self, label: &str) -> Result<usize, GraphError> {
        Ok(self.degree_of(self.node_index(label)?))
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    /// Adjacency entry `a_ij`.
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.edge_set.contains(&ordered(i, j))
    }

    /// Writes the graph back out as an edge list, one edge per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{} {}", self.labels[u], self.labels[v]);
        }
        out
    }
}

/// Parses a whitespace-separated edge list. Lines starting with `#` and
/// blank lines are skipped.
pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut g = Graph {
        labels: Vec::new(),
        index: HashMap::new(),
        edges: Vec::new(),
        edge_set: HashSet::new(),
        neighbors: Vec::new(),
    };
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(GraphError::Malformed {
                line: n + 1,
                found: tokens.len(),
            });
        }
        if tokens[0] == tokens[1] {
            return Err(GraphError::SelfLoop {
                line: n + 1,
                node: tokens[0].to_owned(),
            });
        }
        let u = g.intern(tokens[0]);
        let v = g.intern(tokens[1]);
        g.insert_edge(u, v);
    }
    if g.edges.is_empty() {
        return Err(GraphError::Empty);
    }
    g.finish();
    Ok(g)
}
