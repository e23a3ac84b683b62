//! Undirected simple graphs with binary nodal attributes.
//!
//! A [`Graph`] is immutable once built. Edges are stored once as `(u, v)`
//! with `u < v`, sorted, alongside a sorted adjacency list per node.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    edges: Vec<(NodeId, NodeId)>,
    adjacency: Vec<Vec<NodeId>>,
}

impl Graph {
    /// Builds a graph from an edge list. Endpoint order within a pair is
    /// irrelevant; self-loops, duplicate pairs and out-of-range endpoints are
    /// rejected.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut normalized = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at node {a}")));
            }
            if a >= node_count || b >= node_count {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) out of range for {node_count} nodes"
                )));
            }
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        if let Some(w) = normalized.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!(
                "parallel edge ({}, {})",
                w[0].0, w[0].1
            )));
        }
        Ok(Self::from_sorted_unique(node_count, normalized))
    }

    /// Internal constructor for generators that already guarantee simple,
    /// in-range, normalized edges.
    pub(crate) fn from_normalized_unchecked(
        node_count: usize,
        mut edges: Vec<(NodeId, NodeId)>,
    ) -> Self {
        edges.sort_unstable();
        debug_assert!(edges.windows(2).all(|w| w[0] != w[1]));
        debug_assert!(edges.iter().all(|&(a, b)| a < b && b < node_count));
        Self::from_sorted_unique(node_count, edges)
    }

    fn from_sorted_unique(node_count: usize, edges: Vec<(NodeId, NodeId)>) -> Self {
        let mut degree = vec![0usize; node_count];
        for &(a, b) in &edges {
            degree[a] += 1;
            degree[b] += 1;
        }
        let mut adjacency: Vec<Vec<NodeId>> =
            degree.iter().map(|&d| Vec::with_capacity(d)).collect();
        for &(a, b) in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        Graph {
            node_count,
            edges,
            adjacency,
        }
    }

    pub fn empty(node_count: usize) -> Self {
        Self::from_sorted_unique(node_count, Vec::new())
    }

    pub fn complete(node_count: usize) -> Self {
        let edges = (0..node_count)
            .flat_map(|a| (a + 1..node_count).map(move |b| (a, b)))
            .collect();
        Self::from_sorted_unique(node_count, edges)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency[node].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        a < self.node_count && self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn degree_distribution(&self) -> DegreeDistribution {
        let mut counts = BTreeMap::new();
        for nbrs in &self.adjacency {
            *counts.entry(nbrs.len()).or_insert(0) += 1;
        }
        DegreeDistribution { counts }
    }
}

/// A binary nodal attribute `z`, one value per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeVector {
    name: String,
    values: Vec<u8>,
}

impl AttributeVector {
    pub fn new(name: impl Into<String>, values: Vec<u8>) -> Result<Self> {
        let name = name.into();
        if let Some(pos) = values.iter().position(|&v| v > 1) {
            return Err(Error::InvalidAttribute(format!(
                "{name}: value {} at node {pos} is not 0 or 1",
                values[pos]
            )));
        }
        Ok(AttributeVector { name, values })
    }

    pub fn from_bools(name: impl Into<String>, values: impl IntoIterator<Item = bool>) -> Self {
        AttributeVector {
            name: name.into(),
            values: values.into_iter().map(u8::from).collect(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, node: NodeId) -> u8 {
        self.values[node]
    }

    pub fn count_ones(&self) -> usize {
        self.values.iter().filter(|&&v| v == 1).count()
    }

    /// The same attribute with labels 0 and 1 exchanged.
    pub fn swapped(&self) -> Self {
        AttributeVector {
            name: self.name.clone(),
            values: self.values.iter().map(|&v| 1 - v).collect(),
        }
    }

    pub(crate) fn check_matches(&self, g: &Graph) -> Result<()> {
        if self.values.len() != g.node_count() {
            return Err(Error::InvalidAttribute(format!(
                "{}: length {} does not match node count {}",
                self.name,
                self.values.len(),
                g.node_count()
            )));
        }
        Ok(())
    }
}

/// Several binary attributes over the same nodes, stored column-wise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CovariateMatrix {
    columns: Vec<AttributeVector>,
}

impl CovariateMatrix {
    /// Supports up to 16 covariates (joint patterns are kept in a `u16` mask).
    pub fn new(columns: Vec<AttributeVector>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidAttribute("no covariate columns".into()));
        }
        if columns.len() > 16 {
            return Err(Error::InvalidAttribute(format!(
                "{} covariates exceeds the supported 16",
                columns.len()
            )));
        }
        let rows = columns[0].len();
        if let Some(bad) = columns.iter().find(|c| c.len() != rows) {
            return Err(Error::InvalidAttribute(format!(
                "{}: length {} differs from {rows}",
                bad.name(),
                bad.len()
            )));
        }
        Ok(CovariateMatrix { columns })
    }

    pub fn rows(&self) -> usize {
        self.columns[0].len()
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[AttributeVector] {
        &self.columns
    }

    pub fn column(&self, index: usize) -> &AttributeVector {
        &self.columns[index]
    }

    pub fn into_columns(self) -> Vec<AttributeVector> {
        self.columns
    }

    /// Joint attribute pattern of a node: bit `k` is covariate `k`.
    pub fn pattern(&self, node: NodeId) -> u16 {
        self.columns
            .iter()
            .enumerate()
            .fold(0u16, |acc, (k, c)| acc | (u16::from(c.get(node)) << k))
    }
}

/// Population-level degree frequency table `D_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeDistribution {
    counts: BTreeMap<usize, usize>,
}

impl DegreeDistribution {
    pub fn count(&self, degree: usize) -> usize {
        self.counts.get(&degree).copied().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.counts.keys().next_back().copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.counts.iter().map(|(&k, &c)| (k, c))
    }

    pub fn node_total(&self) -> usize {
        self.counts.values().sum()
    }

    /// `sum_k k * D_k`, which equals twice the edge count.
    pub fn degree_total(&self) -> usize {
        self.counts.iter().map(|(&k, &c)| k * c).sum()
    }
}

/// Edge counts by endpoint attribute class. Every undirected edge is counted
/// exactly once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MixingCounts {
    /// Both endpoints have `z = 1`.
    pub within_1: u64,
    /// Both endpoints have `z = 0`.
    pub within_0: u64,
    pub cross: u64,
}

impl MixingCounts {
    pub fn total(&self) -> u64 {
        self.within_1 + self.within_0 + self.cross
    }

    /// Tallies one edge whose endpoints carry attributes `a` and `b`.
    pub fn add(&mut self, a: u8, b: u8) {
        match (a, b) {
            (1, 1) => self.within_1 += 1,
            (0, 0) => self.within_0 += 1,
            _ => self.cross += 1,
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u8, u8)>) -> Self {
        let mut m = MixingCounts::default();
        for (a, b) in pairs {
            m.add(a, b);
        }
        m
    }

    pub fn swapped(&self) -> Self {
        MixingCounts {
            within_1: self.within_0,
            within_0: self.within_1,
            cross: self.cross,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_self_loops_and_parallel_edges() {
        assert!(matches!(
            Graph::from_edges(3, [(1, 1)]),
            Err(Error::InvalidGraph(_))
        ));
        assert!(matches!(
            Graph::from_edges(3, [(0, 1), (1, 0)]),
            Err(Error::InvalidGraph(_))
        ));
        assert!(Graph::from_edges(3, [(0, 3)]).is_err());
    }

    #[test]
    fn adjacency_is_sorted_and_consistent() {
        let g = Graph::from_edges(5, [(4, 0), (2, 0), (3, 1), (0, 1)]).unwrap();
        assert_eq!(g.neighbors(0), &[1, 2, 4]);
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (0, 4), (1, 3)]);
        assert!(g.has_edge(3, 1));
        assert!(!g.has_edge(2, 3));
        assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.edge_count());
    }

    #[test]
    fn degree_distribution_is_consistent() {
        let g = Graph::from_edges(6, [(0, 1), (0, 2), (0, 3), (4, 1)]).unwrap();
        let d = g.degree_distribution();
        assert_eq!(d.node_total(), 6);
        assert_eq!(d.degree_total(), 2 * g.edge_count());
        assert_eq!(d.count(0), 1);
        assert_eq!(d.count(1), 3);
        assert_eq!(d.max_degree(), 3);
    }

    #[test]
    fn attribute_values_must_be_binary() {
        assert!(AttributeVector::new("z", vec![0, 1, 2]).is_err());
        let z = AttributeVector::new("z", vec![0, 1, 1]).unwrap();
        assert_eq!(z.count_ones(), 2);
        assert_eq!(z.swapped().values(), &[1, 0, 0]);
    }
}
