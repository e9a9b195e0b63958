//! Conformality, perfectness, and the split of the randomization gap into
//! `FP(H) − FP(C)` (non-conformality) plus `FP(C) − IP(C)` (imperfection).

use std::time::{Duration, Instant};

use num_traits::{Signed, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::conflict::{
    build_clique_hypergraph, build_conflict_graph, conflict_hypergraph_from_graph, ConflictHypergraph, Hypergraph,
};
use crate::dataset::{DiscreteDistribution, Norm};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::packing::{
    solve_fractional, solve_integral_exact, FractionalSolution, IntegralSolution, PackingInstance, SolveOptions,
};
use crate::rational::{format_rational, Epsilon, Rational};

pub const HOLE_CAP: usize = 13;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Conformality {
    pub conformal: bool,
    /// First maximal clique (lexicographically) that is not a hyperedge.
    pub witness: Option<Vec<usize>>,
    /// Smallest subset of `witness` that is not a hyperedge.
    pub minimal_witness: Option<Vec<usize>>,
}

/// Whether every maximal clique of the 2-section is a hyperedge of `h`.
pub fn check_conformal(h: &Hypergraph, c: &Hypergraph) -> Conformality {
    assert_eq!(h.n(), c.n(), "hypergraphs on different vertex sets");
    let Some(bad) = c.max_edges().iter().find(|e| !h.contains(e)) else {
        return Conformality { conformal: true, witness: None, minimal_witness: None };
    };
    let minimal = (1..=bad.len()).find_map(|size| first_subset(bad, size, &|s| !h.contains(s)));
    Conformality { conformal: false, witness: Some(bad.clone()), minimal_witness: minimal }
}

fn first_subset(items: &[usize], size: usize, pred: &dyn Fn(&[usize]) -> bool) -> Option<Vec<usize>> {
    fn rec(items: &[usize], size: usize, start: usize, acc: &mut Vec<usize>, pred: &dyn Fn(&[usize]) -> bool) -> bool {
        if acc.len() == size {
            return pred(acc);
        }
        for i in start..=items.len().saturating_sub(size - acc.len()) {
            acc.push(items[i]);
            if rec(items, size, i + 1, acc, pred) {
                return true;
            }
            acc.pop();
        }
        false
    }
    let mut acc = Vec::with_capacity(size);
    rec(items, size, 0, &mut acc, pred).then_some(acc)
}

/// An induced cycle of odd length in `[5, max_len]`, listed in cycle order
/// from its smallest vertex. Search order is fixed, so the result is
/// deterministic.
pub fn find_odd_hole(g: &Graph, max_len: usize) -> Option<Vec<usize>> {
    if max_len < 5 {
        return None;
    }
    let mut path = Vec::with_capacity(max_len);
    for s in 0..g.n() {
        path.clear();
        path.push(s);
        if extend_hole(g, max_len, &mut path) {
            return Some(path);
        }
    }
    None
}

/// Grows the induced path `path` (all vertices above `path[0]`). Returns true
/// with `path` holding a hole once one closes.
fn extend_hole(g: &Graph, max_len: usize, path: &mut Vec<usize>) -> bool {
    let s = path[0];
    let last = *path.last().unwrap();
    let k = path.len();
    for &w in g.neighbors(last) {
        if w <= s || path.contains(&w) {
            continue;
        }
        // No chords to interior path vertices.
        if path.iter().take(k - 1).skip(1).any(|&u| g.has_edge(u, w)) {
            continue;
        }
        let closes = k >= 2 && g.has_edge(s, w);
        if closes {
            let len = k + 1;
            // Each cycle is met in both directions; keep one.
            if len >= 5 && len % 2 == 1 && len <= max_len && path[1] < w {
                path.push(w);
                return true;
            }
            continue;
        }
        if k + 2 <= max_len {
            path.push(w);
            if extend_hole(g, max_len, path) {
                return true;
            }
            path.pop();
        }
    }
    false
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    Hole,
    AntiHole,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Perfectness {
    Perfect,
    NotPerfect {
        kind: WitnessKind,
        cycle: Vec<usize>,
    },
    /// No witness up to the hole cap, which is below the vertex count.
    Inconclusive {
        max_len: usize,
    },
}

impl Perfectness {
    pub fn is_perfect(&self) -> bool {
        matches!(self, Perfectness::Perfect)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Perfectness::Perfect => "perfect",
            Perfectness::NotPerfect { .. } => "not_perfect",
            Perfectness::Inconclusive { .. } => "inconclusive",
        }
    }
}

/// Default hole cap: the largest odd length up to `n`, at most 13.
pub fn default_hole_cap(n: usize) -> usize {
    let odd = if n % 2 == 1 { n } else { n.saturating_sub(1) };
    odd.clamp(5, HOLE_CAP)
}

/// Searches `g` for odd holes and its complement for odd anti-holes.
pub fn check_perfect(g: &Graph, max_len: usize) -> Perfectness {
    let comp = g.complement();
    let (hole, anti) = rayon::join(|| find_odd_hole(g, max_len), || find_odd_hole(&comp, max_len));
    if let Some(cycle) = hole {
        return Perfectness::NotPerfect { kind: WitnessKind::Hole, cycle };
    }
    if let Some(cycle) = anti {
        return Perfectness::NotPerfect { kind: WitnessKind::AntiHole, cycle };
    }
    let n = g.n();
    let exhaustive = n < 5 || max_len >= n || (n.is_multiple_of(2) && max_len + 1 >= n);
    if exhaustive {
        Perfectness::Perfect
    } else {
        Perfectness::Inconclusive { max_len }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapReport {
    pub fp_h: Rational,
    pub fp_c: Rational,
    pub ip: Rational,
    pub gap: Rational,
    pub term_conformal: Rational,
    pub term_perfect: Rational,
    pub conformality: Conformality,
    pub perfectness: Perfectness,
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

impl GapReport {
    /// Rationals as strings, vertex lists 1-based.
    pub fn to_json(&self) -> Value {
        let r = format_rational;
        let perfect = match &self.perfectness {
            Perfectness::Perfect => json!({ "status": "perfect" }),
            Perfectness::NotPerfect { kind, cycle } => json!({
                "status": "not_perfect",
                "kind": kind,
                "cycle": one_based(cycle),
            }),
            Perfectness::Inconclusive { max_len } => json!({ "status": "inconclusive", "max_len": max_len }),
        };
        json!({
            "fp_h": r(&self.fp_h),
            "fp_c": r(&self.fp_c),
            "ip": r(&self.ip),
            "gap": r(&self.gap),
            "term_conformal": r(&self.term_conformal),
            "term_perfect": r(&self.term_perfect),
            "conformal": self.conformality.conformal,
            "conformal_witness": self.conformality.witness.as_deref().map(one_based),
            "conformal_minimal_witness": self.conformality.minimal_witness.as_deref().map(one_based),
            "perfect": perfect,
        })
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct AnalysisOptions {
    pub solve: SolveOptions,
    /// Longest odd hole searched; `None` uses [`default_hole_cap`].
    pub hole_cap: Option<usize>,
}

/// Everything computed along the way, for reporting.
#[derive(Clone, Debug)]
pub struct GapAnalysis {
    pub graph: Graph,
    pub hypergraph: ConflictHypergraph,
    pub cliques: Hypergraph,
    pub fp_h: FractionalSolution,
    pub fp_c: FractionalSolution,
    pub ip_h: IntegralSolution,
    pub ip_c: IntegralSolution,
    pub report: GapReport,
    /// Wall-clock time per pipeline phase, in execution order.
    pub timings: Vec<(&'static str, Duration)>,
}

pub fn decompose_gap(
    dist: &DiscreteDistribution,
    eps: &Epsilon,
    norm: &Norm,
    opts: AnalysisOptions,
) -> Result<GapAnalysis> {
    let tol = opts.solve.tol;
    let budget = opts.solve.node_budget;
    let mut clock = Instant::now();
    let mut timings = Vec::new();
    let mut lap = |phase: &'static str| {
        timings.push((phase, clock.elapsed()));
        clock = Instant::now();
    };
    let graph = build_conflict_graph(dist, eps, norm, tol)?;
    lap("conflict_graph");
    let hypergraph = conflict_hypergraph_from_graph(dist, &graph, eps, norm, tol)?;
    lap("conflict_hypergraph");
    let cliques = build_clique_hypergraph(&graph)?;
    lap("clique_hypergraph");

    let weights = dist.weights().to_vec();
    let inst_h = PackingInstance::from_hypergraph(hypergraph.hypergraph(), weights.clone())?;
    let inst_c = PackingInstance::from_hypergraph(&cliques, weights)?;
    let fp_h = solve_fractional(&inst_h);
    let fp_c = solve_fractional(&inst_c);
    let ip_c = solve_integral_exact(&inst_c, budget)?;
    let ip_h = solve_integral_exact(&inst_h, budget)?;
    lap("packing");
    if ip_h.value != ip_c.value {
        return Err(Error::Invariant(format!(
            "integral packing differs between hypergraph ({}) and clique hypergraph ({})",
            ip_h.value, ip_c.value
        )));
    }

    let conformality = check_conformal(hypergraph.hypergraph(), &cliques);
    let max_len = opts.hole_cap.unwrap_or_else(|| default_hole_cap(graph.n()));
    let perfectness = check_perfect(&graph, max_len);
    lap("structure_checks");

    let term_conformal = &fp_h.value - &fp_c.value;
    let term_perfect = &fp_c.value - &ip_c.value;
    let gap = &fp_h.value - &ip_c.value;
    if term_conformal.is_negative() || term_perfect.is_negative() {
        return Err(Error::Invariant(format!("negative gap term: conformal {term_conformal}, perfect {term_perfect}")));
    }
    if gap.is_positive() && conformality.conformal && perfectness.is_perfect() {
        return Err(Error::Invariant(format!("gap {gap} is positive on a conformal hypergraph with a perfect graph")));
    }
    debug_assert_eq!(&term_conformal + &term_perfect, gap);
    debug_assert!(!gap.is_negative() || gap.is_zero());

    let report = GapReport {
        fp_h: fp_h.value.clone(),
        fp_c: fp_c.value.clone(),
        ip: ip_c.value.clone(),
        gap,
        term_conformal,
        term_perfect,
        conformality,
        perfectness,
    };
    Ok(GapAnalysis { graph, hypergraph, cliques, fp_h, fp_c, ip_h, ip_c, report, timings })
}
