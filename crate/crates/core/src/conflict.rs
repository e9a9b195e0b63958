//! Conflict graph, conflict hypergraph and clique hypergraph of a distribution.
//!
//! Hypergraphs are stored by their maximal edges; the full family is the
//! downward closure. Every vertex is covered by some maximal edge.

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{labels_distinct, DiscreteDistribution, Norm};
use crate::error::{Error, Result};
use crate::geometry::{balls_intersect_from, pair_relation, IntersectionStatus, PairRelation};
use crate::graph::Graph;
use crate::rational::{int, Epsilon, Rational};

pub const CLIQUE_LIMIT: usize = 1_000_000;

/// A downward-closed set family on `0..n`, kept as an antichain of maximal
/// edges. Each edge is sorted; edges are sorted lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Hypergraph {
    n: usize,
    max_edges: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct HypergraphJson {
    n: usize,
    max_edges: Vec<Vec<usize>>,
}

fn is_subset(small: &[usize], big: &[usize]) -> bool {
    small.len() <= big.len() && small.iter().all(|v| big.binary_search(v).is_ok())
}

/// Keeps the inclusion-maximal sets (deduplicated), each sorted, in
/// lexicographic order. Returns the surviving positions of `sets`.
fn antichain(sets: &[Vec<usize>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..sets.len()).collect();
    order.sort_by(|&a, &b| sets[b].len().cmp(&sets[a].len()).then_with(|| sets[a].cmp(&sets[b])));
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        if !kept.iter().any(|&k| is_subset(&sets[i], &sets[k])) {
            kept.push(i);
        }
    }
    kept.sort_by(|&a, &b| sets[a].cmp(&sets[b]));
    kept
}

impl Hypergraph {
    /// Validates indices, sorts, and reduces `edges` to its maximal members.
    pub fn new(n: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        let mut sets = Vec::with_capacity(edges.len());
        for mut e in edges {
            if e.is_empty() {
                return Err(Error::Validation("empty hyperedge".into()));
            }
            e.sort_unstable();
            e.dedup();
            if let Some(&v) = e.last().filter(|&&v| v >= n) {
                return Err(Error::Validation(format!("vertex {v} out of range for {n} vertices")));
            }
            sets.push(e);
        }
        let keep = antichain(&sets);
        Ok(Self { n, max_edges: keep.into_iter().map(|i| sets[i].clone()).collect() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_edges(&self) -> &[Vec<usize>] {
        &self.max_edges
    }

    /// `s` lies in the downward closure (`s ⊆ e` for some maximal `e`).
    pub fn contains(&self, s: &[usize]) -> bool {
        let mut s = s.to_vec();
        s.sort_unstable();
        s.dedup();
        self.max_edges.iter().any(|e| is_subset(&s, e))
    }

    pub fn to_json(&self) -> String {
        let doc = HypergraphJson { n: self.n, max_edges: self.max_edges.clone() };
        serde_json::to_string_pretty(&doc).expect("hypergraph serializes")
    }

    /// Reads `{"n": .., "max_edges": [[..], ..]}` with 0-based indices.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: HypergraphJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(doc.n, doc.max_edges)
    }
}

/// The conflict hypergraph together with a point of the joint ball
/// intersection for every maximal edge (`witnesses[k]` for `max_edges()[k]`).
#[derive(Clone, Debug)]
pub struct ConflictHypergraph {
    hypergraph: Hypergraph,
    witnesses: Vec<Vec<Rational>>,
}

impl ConflictHypergraph {
    pub fn hypergraph(&self) -> &Hypergraph {
        &self.hypergraph
    }

    pub fn max_edges(&self) -> &[Vec<usize>] {
        self.hypergraph.max_edges()
    }

    pub fn witnesses(&self) -> &[Vec<Rational>] {
        &self.witnesses
    }

    pub fn contains(&self, s: &[usize]) -> bool {
        self.hypergraph.contains(s)
    }
}

/// `{i, j}` is an edge iff the labels differ and `‖x_i − x_j‖_p ≤ 2ε`.
pub fn build_conflict_graph(dist: &DiscreteDistribution, eps: &Epsilon, norm: &Norm, tol: f64) -> Result<Graph> {
    let n = dist.len();
    let rows: Vec<Result<Vec<usize>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = dist.point(i);
            let mut out = Vec::new();
            for j in i + 1..n {
                let b = dist.point(j);
                if a.label == b.label {
                    continue;
                }
                match pair_relation(&a.coords, &b.coords, eps, norm, tol) {
                    PairRelation::Conflict => out.push(j),
                    PairRelation::Separate => {}
                    PairRelation::Inconclusive { margin } => {
                        return Err(Error::Inconclusive { vertices: vec![i, j], margin })
                    }
                }
            }
            Ok(out)
        })
        .collect();
    let mut g = Graph::empty(n);
    for (i, row) in rows.into_iter().enumerate() {
        for j in row? {
            g.add_edge(i, j);
        }
    }
    Ok(g)
}

pub fn build_conflict_hypergraph(
    dist: &DiscreteDistribution,
    eps: &Epsilon,
    norm: &Norm,
    tol: f64,
) -> Result<ConflictHypergraph> {
    let g = build_conflict_graph(dist, eps, norm, tol)?;
    conflict_hypergraph_from_graph(dist, &g, eps, norm, tol)
}

struct Search<'a> {
    dist: &'a DiscreteDistribution,
    g: &'a Graph,
    eps: &'a Epsilon,
    norm: &'a Norm,
    tol: f64,
}

type Found = Vec<(Vec<usize>, Vec<Rational>)>;

impl Search<'_> {
    /// Extends `current` (whose balls meet at `witness`, near `center`) by
    /// later candidates. Records `current` when no candidate extends it.
    fn extend(
        &self,
        current: &mut Vec<usize>,
        witness: Vec<Rational>,
        center: &[f64],
        candidates: &[usize],
        found: &mut Found,
    ) -> Result<()> {
        if found.len() > CLIQUE_LIMIT {
            return Err(Error::CliqueLimit { limit: CLIQUE_LIMIT });
        }
        let mut grown = Vec::new();
        for &c in candidates {
            current.push(c);
            let pts: Vec<&[Rational]> = current.iter().map(|&v| self.dist.point(v).coords.as_slice()).collect();
            let verdict = balls_intersect_from(&pts, self.eps, self.norm, self.tol, Some(center));
            current.pop();
            match verdict.status {
                IntersectionStatus::NonEmpty { witness } => grown.push((c, witness, verdict.center)),
                IntersectionStatus::Empty => {}
                IntersectionStatus::Inconclusive => {
                    let mut vertices = current.clone();
                    vertices.push(c);
                    return Err(Error::Inconclusive { vertices, margin: verdict.margin });
                }
            }
        }
        if grown.is_empty() {
            found.push((current.clone(), witness));
            return Ok(());
        }
        // A candidate that failed here fails for every superset too.
        let survivors: Vec<usize> = grown.iter().map(|(c, ..)| *c).collect();
        for (k, (c, w, ctr)) in grown.into_iter().enumerate() {
            let next: Vec<usize> = survivors[k + 1..].iter().copied().filter(|&d| self.g.has_edge(c, d)).collect();
            current.push(c);
            self.extend(current, w, &ctr, &next, found)?;
            current.pop();
        }
        Ok(())
    }
}

/// Maximal label-distinct vertex sets whose ε-balls share a point, found by
/// depth-first search over cliques of `g` in increasing vertex order.
pub fn conflict_hypergraph_from_graph(
    dist: &DiscreteDistribution,
    g: &Graph,
    eps: &Epsilon,
    norm: &Norm,
    tol: f64,
) -> Result<ConflictHypergraph> {
    let n = dist.len();
    if g.n() != n {
        return Err(Error::Validation(format!("graph has {} vertices, distribution has {n}", g.n())));
    }
    let search = Search { dist, g, eps, norm, tol };
    let per_vertex: Vec<Result<Found>> = (0..n)
        .into_par_iter()
        .map(|v| {
            let mut found = Found::new();
            let xv = &dist.point(v).coords;
            let later: Vec<usize> = g.neighbors(v).iter().copied().filter(|&u| u > v).collect();
            if g.degree(v) == 0 {
                found.push((vec![v], xv.clone()));
            }
            // Pairs are exactly the edges of g, met at their midpoint.
            for (k, &u) in later.iter().enumerate() {
                let xu = &dist.point(u).coords;
                let mid: Vec<Rational> = xv.iter().zip(xu).map(|(a, b)| (a + b) / int(2)).collect();
                let center: Vec<f64> = mid.iter().map(crate::rational::to_f64).collect();
                let next: Vec<usize> = later[k + 1..].iter().copied().filter(|&w| g.has_edge(u, w)).collect();
                search.extend(&mut vec![v, u], mid, &center, &next, &mut found)?;
            }
            Ok(found)
        })
        .collect();

    let mut all = Found::new();
    for part in per_vertex {
        all.extend(part?);
    }
    debug_assert!(all.iter().all(|(e, _)| labels_distinct(dist, e)));
    let sets: Vec<Vec<usize>> = all.iter().map(|(e, _)| e.clone()).collect();
    let keep = antichain(&sets);
    let mut max_edges = Vec::with_capacity(keep.len());
    let mut witnesses = Vec::with_capacity(keep.len());
    for i in keep {
        max_edges.push(all[i].0.clone());
        witnesses.push(all[i].1.clone());
    }
    Ok(ConflictHypergraph { hypergraph: Hypergraph { n, max_edges }, witnesses })
}

/// Maximal cliques of `g` by Bron–Kerbosch with Tomita pivoting. Isolated
/// vertices give singleton cliques.
pub fn build_clique_hypergraph(g: &Graph) -> Result<Hypergraph> {
    let n = g.n();
    let adj = g.adjacency_bitsets();
    let mut cliques = Vec::new();
    let mut r = Vec::new();
    let mut p = FixedBitSet::with_capacity(n);
    p.insert_range(..);
    let x = FixedBitSet::with_capacity(n);
    bron_kerbosch(&adj, &mut r, p, x, &mut cliques)?;
    for c in &mut cliques {
        c.sort_unstable();
    }
    cliques.sort();
    Ok(Hypergraph { n, max_edges: cliques })
}

fn bron_kerbosch(
    adj: &[FixedBitSet],
    r: &mut Vec<usize>,
    mut p: FixedBitSet,
    mut x: FixedBitSet,
    out: &mut Vec<Vec<usize>>,
) -> Result<()> {
    if p.is_clear() {
        if x.is_clear() {
            if out.len() >= CLIQUE_LIMIT {
                return Err(Error::CliqueLimit { limit: CLIQUE_LIMIT });
            }
            out.push(r.clone());
        }
        return Ok(());
    }
    let pivot = p.union(&x).max_by_key(|&u| p.intersection(&adj[u]).count()).expect("P ∪ X is nonempty");
    let mut branch = p.clone();
    branch.difference_with(&adj[pivot]);
    for v in branch.ones() {
        let mut np = p.clone();
        np.intersect_with(&adj[v]);
        let mut nx = x.clone();
        nx.intersect_with(&adj[v]);
        r.push(v);
        bron_kerbosch(adj, r, np, nx, out)?;
        r.pop();
        p.set(v, false);
        x.insert(v);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::LabeledPoint;
    use crate::rational::ratio;

    fn dist(points: Vec<(Vec<Rational>, usize)>) -> DiscreteDistribution {
        DiscreteDistribution::uniform(points.into_iter().map(|(c, l)| LabeledPoint::new(c, l)).collect(), None).unwrap()
    }

    fn fig2() -> DiscreteDistribution {
        dist(vec![
            (vec![ratio(-1, 2), int(0)], 1),
            (vec![ratio(1, 2), int(0)], 2),
            (vec![int(0), int(1)], 3),
            (vec![int(0), ratio(5, 2)], 4),
        ])
    }

    #[test]
    fn fig2_hyperedges() {
        let eps = Epsilon::new(ratio(4, 5)).unwrap();
        let h = build_conflict_hypergraph(&fig2(), &eps, &Norm::l2(), 1e-9).unwrap();
        assert_eq!(h.max_edges(), &[vec![0, 1, 2], vec![2, 3]]);
        assert!(h.contains(&[0, 1]));
        assert!(!h.contains(&[0, 3]));
        assert!(h.contains(&[3]));
        let g = build_conflict_graph(&fig2(), &eps, &Norm::l2(), 1e-9).unwrap();
        let c = build_clique_hypergraph(&g).unwrap();
        assert_eq!(c.max_edges(), h.max_edges());
    }

    #[test]
    fn witnesses_lie_in_every_ball() {
        let eps = Epsilon::new(ratio(4, 5)).unwrap();
        let d = fig2();
        let h = build_conflict_hypergraph(&d, &eps, &Norm::l2(), 1e-9).unwrap();
        for (e, w) in h.max_edges().iter().zip(h.witnesses()) {
            for &i in e {
                assert!(crate::geometry::ball_contains(&d.point(i).coords, w, &eps, &Norm::l2(), 0.0));
            }
        }
    }

    #[test]
    fn same_label_points_never_conflict() {
        let d = dist(vec![(vec![int(0)], 1), (vec![ratio(1, 10)], 1), (vec![int(5)], 1)]);
        let eps = Epsilon::new(int(1)).unwrap();
        let g = build_conflict_graph(&d, &eps, &Norm::Infinity, 1e-9).unwrap();
        assert_eq!(g.edge_count(), 0);
        let h = build_conflict_hypergraph(&d, &eps, &Norm::Infinity, 1e-9).unwrap();
        assert_eq!(h.max_edges(), &[vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn canonical_basis_has_only_pairs() {
        let d = dist((0..3).map(|i| ((0..3).map(|j| int((i == j) as i64)).collect(), i + 1)).collect());
        let eps = Epsilon::from_square(ratio(121, 200)).unwrap();
        let h = build_conflict_hypergraph(&d, &eps, &Norm::l2(), 1e-9).unwrap();
        assert_eq!(h.max_edges(), &[vec![0, 1], vec![0, 2], vec![1, 2]]);
    }

    #[test]
    fn clique_hypergraph_of_small_graphs() {
        let c5 = build_clique_hypergraph(&Graph::cycle(5)).unwrap();
        assert_eq!(c5.max_edges(), &[vec![0, 1], vec![0, 4], vec![1, 2], vec![2, 3], vec![3, 4]]);
        let empty = build_clique_hypergraph(&Graph::empty(3)).unwrap();
        assert_eq!(empty.max_edges(), &[vec![0], vec![1], vec![2]]);
        let k4 = build_clique_hypergraph(&Graph::complete(4)).unwrap();
        assert_eq!(k4.max_edges(), &[vec![0, 1, 2, 3]]);
    }

    #[test]
    fn hypergraph_new_keeps_maximal_sets() {
        let h = Hypergraph::new(4, vec![vec![1, 0], vec![0], vec![2, 3], vec![0, 1]]).unwrap();
        assert_eq!(h.max_edges(), &[vec![0, 1], vec![2, 3]]);
        assert!(Hypergraph::new(2, vec![vec![2]]).is_err());
        assert!(Hypergraph::new(2, vec![vec![]]).is_err());
        assert_eq!(Hypergraph::from_json(&h.to_json()).unwrap(), h);
    }
}
