//! Weighted causal DAGs and their discovery.

mod lingam;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lingam::{direct_lingam, DiscoveryDiagnostics};

#[derive(Debug, Error)]
pub enum CausalError {
    #[error("graph contains a cycle through {0:?}")]
    Cycle(Vec<String>),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(String, String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("order is not a topological order of the graph")]
    BadOrder,
    #[error("discovery needs at least 2 variables, got {0}")]
    TooFewVariables(usize),
    #[error("discovery needs more rows than variables (n = {n}, p = {p})")]
    TooFewRows { n: usize, p: usize },
    #[error("constant column `{0}` cannot enter discovery")]
    ConstantColumn(String),
    #[error("rank-deficient regression of `{target}` on {predictors:?}")]
    RankDeficient {
        target: String,
        predictors: Vec<String>,
    },
    #[error("graph file: {0}")]
    Format(String),
    #[error("cannot read graph file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, CausalError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub weight: f64,
}

/// On-disk layout of a graph.
#[derive(Debug, Serialize, Deserialize)]
struct DagFile {
    nodes: Vec<String>,
    edges: Vec<Edge>,
}

/// Directed acyclic graph over named variables with real edge weights.
///
/// Edges are kept sorted by (from, to); `order` is a topological order that
/// every edge respects.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDag {
    nodes: Vec<String>,
    edges: Vec<Edge>,
    order: Vec<String>,
}

/// Kahn's algorithm; ties between ready nodes go to the smallest name.
pub fn topological_sort(nodes: &[String], edges: &[Edge]) -> Result<Vec<String>> {
    let mut indegree: BTreeMap<&str, usize> = nodes.iter().map(|n| (n.as_str(), 0)).collect();
    let mut children: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for e in edges {
        for end in [&e.from, &e.to] {
            if !indegree.contains_key(end.as_str()) {
                return Err(CausalError::UnknownNode(end.clone()));
            }
        }
        *indegree.get_mut(e.to.as_str()).unwrap() += 1;
        children.entry(e.from.as_str()).or_default().push(e.to.as_str());
    }
    let mut ready: BTreeSet<&str> = indegree
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(n, _)| *n)
        .collect();
    let mut order = Vec::with_capacity(nodes.len());
    while let Some(n) = ready.pop_first() {
        order.push(n.to_string());
        for c in children.get(n).map(Vec::as_slice).unwrap_or(&[]) {
            let d = indegree.get_mut(c).unwrap();
            *d -= 1;
            if *d == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() != nodes.len() {
        let stuck = indegree
            .iter()
            .filter(|(n, _)| !order.iter().any(|o| o == *n))
            .map(|(n, _)| n.to_string())
            .collect();
        return Err(CausalError::Cycle(stuck));
    }
    Ok(order)
}

impl WeightedDag {
    /// Builds a DAG; `order` is computed with the name tiebreak.
    pub fn new(nodes: Vec<String>, edges: Vec<Edge>) -> Result<Self> {
        let edges = Self::check_edges(&nodes, edges)?;
        let order = topological_sort(&nodes, &edges)?;
        Ok(WeightedDag { nodes, edges, order })
    }

    /// Builds a DAG with a caller-supplied topological order (e.g. a causal
    /// order from discovery).
    pub fn with_order(nodes: Vec<String>, edges: Vec<Edge>, order: Vec<String>) -> Result<Self> {
        let edges = Self::check_edges(&nodes, edges)?;
        topological_sort(&nodes, &edges)?;
        let pos: BTreeMap<&str, usize> =
            order.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let same_set = order.len() == nodes.len() && nodes.iter().all(|n| pos.contains_key(n.as_str()));
        if !same_set || edges.iter().any(|e| pos[e.from.as_str()] >= pos[e.to.as_str()]) {
            return Err(CausalError::BadOrder);
        }
        Ok(WeightedDag { nodes, edges, order })
    }

    fn check_edges(nodes: &[String], mut edges: Vec<Edge>) -> Result<Vec<Edge>> {
        let mut seen = BTreeSet::new();
        for n in nodes {
            if !seen.insert(n.as_str()) {
                return Err(CausalError::DuplicateNode(n.clone()));
            }
        }
        let mut pairs = BTreeSet::new();
        for e in &edges {
            if e.from == e.to {
                return Err(CausalError::SelfLoop(e.from.clone()));
            }
            for end in [&e.from, &e.to] {
                if !seen.contains(end.as_str()) {
                    return Err(CausalError::UnknownNode(end.clone()));
                }
            }
            if !pairs.insert((e.from.clone(), e.to.clone())) {
                return Err(CausalError::DuplicateEdge(e.from.clone(), e.to.clone()));
            }
            if !e.weight.is_finite() {
                return Err(CausalError::Format(format!(
                    "non-finite weight on {} -> {}",
                    e.from, e.to
                )));
            }
        }
        edges.sort_by(|a, b| (&a.from, &a.to).cmp(&(&b.from, &b.to)));
        Ok(edges)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn order(&self) -> &[String] {
        &self.order
    }

    pub fn contains(&self, node: &str) -> bool {
        self.nodes.iter().any(|n| n == node)
    }

    pub fn index_of(&self, node: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == node)
    }

    /// Incoming edges of `node` as (parent, weight), sorted by parent name.
    pub fn parents(&self, node: &str) -> Vec<(&str, f64)> {
        self.edges
            .iter()
            .filter(|e| e.to == node)
            .map(|e| (e.from.as_str(), e.weight))
            .collect()
    }

    pub fn children(&self, node: &str) -> Vec<&str> {
        self.edges
            .iter()
            .filter(|e| e.from == node)
            .map(|e| e.to.as_str())
            .collect()
    }

    pub fn edge(&self, from: &str, to: &str) -> Option<&Edge> {
        self.edges.iter().find(|e| e.from == from && e.to == to)
    }

    /// Every node reachable from `node` by directed edges, excluding itself.
    pub fn descendants(&self, node: &str) -> Result<BTreeSet<String>> {
        if !self.contains(node) {
            return Err(CausalError::UnknownNode(node.to_string()));
        }
        let mut out = BTreeSet::new();
        let mut queue = VecDeque::from([node]);
        while let Some(n) = queue.pop_front() {
            for c in self.children(n) {
                if out.insert(c.to_string()) {
                    queue.push_back(c);
                }
            }
        }
        Ok(out)
    }

    /// Union of descendants over several nodes.
    pub fn descendants_of_all<S: AsRef<str>>(&self, nodes: &[S]) -> Result<BTreeSet<String>> {
        let mut out = BTreeSet::new();
        for n in nodes {
            out.extend(self.descendants(n.as_ref())?);
        }
        Ok(out)
    }

    /// Nodes in the weakly connected component containing `node`.
    pub fn component_of(&self, node: &str) -> Result<BTreeSet<String>> {
        if !self.contains(node) {
            return Err(CausalError::UnknownNode(node.to_string()));
        }
        let mut out = BTreeSet::from([node.to_string()]);
        let mut queue = VecDeque::from([node.to_string()]);
        while let Some(n) = queue.pop_front() {
            for e in &self.edges {
                let next = if e.from == n {
                    &e.to
                } else if e.to == n {
                    &e.from
                } else {
                    continue;
                };
                if out.insert(next.clone()) {
                    queue.push_back(next.clone());
                }
            }
        }
        Ok(out)
    }

    /// Deterministic topological order with the name tiebreak.
    pub fn topological_order(&self) -> Result<Vec<String>> {
        topological_sort(&self.nodes, &self.edges)
    }

    /// Drops edges with `|weight| < tau`; nodes and order are kept.
    pub fn threshold_edges(&self, tau: f64) -> WeightedDag {
        WeightedDag {
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .filter(|e| !(e.weight.abs() < tau))
                .cloned()
                .collect(),
            order: self.order.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let file = DagFile {
            nodes: self.nodes.clone(),
            edges: self.edges.clone(),
        };
        serde_json::to_string_pretty(&file).expect("dag serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DagFile =
            serde_json::from_str(text).map_err(|e| CausalError::Format(e.to_string()))?;
        WeightedDag::new(file.nodes, file.edges)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| CausalError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Graphviz rendering; `shaded` nodes (the sensitive attributes) are filled gray.
    pub fn to_dot(&self, shaded: &[&str]) -> String {
        let mut out = String::from("digraph scm {\n  rankdir=LR;\n  node [shape=ellipse];\n");
        for n in &self.nodes {
            if shaded.contains(&n.as_str()) {
                let _ = writeln!(out, "  \"{n}\" [style=filled, fillcolor=gray80];");
            } else {
                let _ = writeln!(out, "  \"{n}\";");
            }
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [label=\"{:.2}\"];",
                e.from, e.to, e.weight
            );
        }
        out.push_str("}\n");
        out
    }
}

/// Free-function forms of the [`WeightedDag`] methods.
pub fn threshold_edges(dag: &WeightedDag, tau: f64) -> WeightedDag {
    dag.threshold_edges(tau)
}

pub fn descendants(dag: &WeightedDag, node: &str) -> Result<BTreeSet<String>> {
    dag.descendants(node)
}

pub fn topological_order(dag: &WeightedDag) -> Result<Vec<String>> {
    dag.topological_order()
}

#[cfg(test)]
pub(crate) fn edge(from: &str, to: &str, weight: f64) -> Edge {
    Edge {
        from: from.into(),
        to: to.into(),
        weight,
    }
}

#[cfg(test)]
pub(crate) fn names(ns: &[&str]) -> Vec<String> {
    ns.iter().map(|s| s.to_string()).collect()
}
