//! Simple undirected graphs on vertices `0..n`.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sorted adjacency lists. Conflict graphs and generated graphs share this type.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Self { adj: vec![Vec::new(); n] }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = Self::empty(n);
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Validation(format!("edge ({u}, {v}) out of range for {n} vertices")));
            }
            if u == v {
                return Err(Error::Validation(format!("self-loop at vertex {u}")));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycles need at least 3 vertices");
        Self::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    pub fn complete(n: usize) -> Self {
        Self::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)))).unwrap()
    }

    /// Inserts `{u, v}`; duplicates are ignored.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert_ne!(u, v, "self-loop");
        for (a, b) in [(u, v), (v, u)] {
            if let Err(pos) = self.adj[a].binary_search(&b) {
                self.adj[a].insert(pos, b);
            }
        }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
            .collect()
    }

    pub fn complement(&self) -> Self {
        let n = self.n();
        let adj = (0..n).map(|u| (0..n).filter(|&v| v != u && !self.has_edge(u, v)).collect()).collect();
        Self { adj }
    }

    pub fn is_clique(&self, vertices: &[usize]) -> bool {
        vertices.iter().enumerate().all(|(k, &u)| vertices[k + 1..].iter().all(|&v| self.has_edge(u, v)))
    }

    pub fn is_independent(&self, vertices: &[usize]) -> bool {
        vertices.iter().enumerate().all(|(k, &u)| vertices[k + 1..].iter().all(|&v| !self.has_edge(u, v)))
    }

    /// Lexicographically first triangle.
    pub fn find_triangle(&self) -> Option<[usize; 3]> {
        for (u, v) in self.edges() {
            let (a, b) = (&self.adj[u], &self.adj[v]);
            let (mut i, mut j) = (0, 0);
            while i < a.len() && j < b.len() {
                match a[i].cmp(&b[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        if a[i] > v {
                            return Some([u, v, a[i]]);
                        }
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
        None
    }

    pub fn is_triangle_free(&self) -> bool {
        self.find_triangle().is_none()
    }

    pub fn adjacency_bitsets(&self) -> Vec<FixedBitSet> {
        let n = self.n();
        self.adj
            .iter()
            .map(|ns| {
                let mut b = FixedBitSet::with_capacity(n);
                for &v in ns {
                    b.insert(v);
                }
                b
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let doc = GraphJson { n: self.n(), edges: self.edges().into_iter().map(|(u, v)| [u, v]).collect() };
        serde_json::to_string_pretty(&doc).expect("graph serializes")
    }

    /// Reads `{"n": .., "edges": [[i, j], ..]}` with 0-based indices.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GraphJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_edges(doc.n, doc.edges.into_iter().map(|[u, v]| (u, v)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_and_complement() {
        let c5 = Graph::cycle(5);
        assert_eq!(c5.edge_count(), 5);
        assert!(c5.is_triangle_free());
        // the complement of C5 is again a 5-cycle
        let comp = c5.complement();
        assert_eq!(comp.edge_count(), 5);
        assert!(comp.has_edge(0, 2) && !comp.has_edge(0, 1));
        assert_eq!(comp.complement(), c5);
    }

    #[test]
    fn triangles_found_in_order() {
        let mut g = Graph::cycle(6);
        assert_eq!(g.find_triangle(), None);
        g.add_edge(2, 4);
        assert_eq!(g.find_triangle(), Some([2, 3, 4]));
        assert_eq!(Graph::complete(4).find_triangle(), Some([0, 1, 2]));
    }

    #[test]
    fn rejects_loops_and_out_of_range() {
        assert!(Graph::from_edges(3, [(1, 1)]).is_err());
        assert!(Graph::from_edges(3, [(0, 3)]).is_err());
        let g = Graph::from_edges(3, [(0, 1), (1, 0)]).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn json_round_trip() {
        let g = Graph::cycle(7).complement();
        let back = Graph::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
        assert!(Graph::from_json("{\"n\": 2}").is_err());
    }
}
