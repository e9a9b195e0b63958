//! Weighted set packing and its fractional relaxation, solved exactly.
//!
//! `IP = max ωᵀq` over binary `q` with `Σ_{i∈e} q_i ≤ 1` for every constraint
//! `e`; `FP` is the same over `q ∈ [0,1]^n`. On the conflict hypergraph, the
//! optimal deterministic and randomized adversarial risks are `1 − IP` and
//! `1 − FP`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::conflict::{build_conflict_hypergraph, Hypergraph};
use crate::dataset::{DiscreteDistribution, Norm};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rational::{int, ratio, serde_rational, Epsilon, Rational};
use crate::simplex::maximize;

pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackingInstance {
    n: usize,
    constraints: Vec<Vec<usize>>,
    weights: Vec<Rational>,
}

impl PackingInstance {
    pub fn new(n: usize, constraints: Vec<Vec<usize>>, weights: Vec<Rational>) -> Result<Self> {
        if weights.len() != n {
            return Err(Error::Validation(format!("{} weights for {n} variables", weights.len())));
        }
        if let Some(w) = weights.iter().find(|w| w.is_negative()) {
            return Err(Error::Validation(format!("negative weight {w}")));
        }
        let mut cs = Vec::with_capacity(constraints.len());
        for mut e in constraints {
            if e.is_empty() {
                return Err(Error::Validation("empty constraint".into()));
            }
            e.sort_unstable();
            e.dedup();
            if let Some(&v) = e.last().filter(|&&v| v >= n) {
                return Err(Error::Validation(format!("vertex {v} out of range for {n} variables")));
            }
            cs.push(e);
        }
        Ok(Self { n, constraints: cs, weights })
    }

    pub fn from_hypergraph(h: &Hypergraph, weights: Vec<Rational>) -> Result<Self> {
        Self::new(h.n(), h.max_edges().to_vec(), weights)
    }

    /// Edges of `g` as constraints: IP is the maximum-weight independent set.
    pub fn from_graph(g: &Graph, weights: Vec<Rational>) -> Result<Self> {
        Self::new(g.n(), g.edges().into_iter().map(|(u, v)| vec![u, v]).collect(), weights)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn constraints(&self) -> &[Vec<usize>] {
        &self.constraints
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn is_feasible(&self, q: &[Rational]) -> bool {
        q.len() == self.n
            && q.iter().all(|v| !v.is_negative() && *v <= int(1))
            && self.constraints.iter().all(|e| e.iter().map(|&i| &q[i]).sum::<Rational>() <= int(1))
    }

    pub fn objective(&self, q: &[Rational]) -> Rational {
        self.weights.iter().zip(q).map(|(w, x)| w * x).sum()
    }

    /// Vertices sharing a constraint with `v`, excluding `v`.
    fn constraint_neighbours(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.constraints {
            for &u in e {
                adj[u].extend(e.iter().copied().filter(|&w| w != u));
            }
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FractionalSolution {
    #[serde(with = "serde_rational::vec")]
    pub q: Vec<Rational>,
    #[serde(with = "serde_rational")]
    pub value: Rational,
    /// One multiplier per constraint, aligned with `constraints()`.
    #[serde(with = "serde_rational::vec")]
    pub dual: Vec<Rational>,
    /// Multipliers on `q_i ≤ 1` for vertices that no constraint covers.
    #[serde(with = "serde_rational::vec")]
    pub box_dual: Vec<Rational>,
    #[serde(with = "serde_rational")]
    pub dual_value: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntegralSolution {
    pub q: Vec<bool>,
    #[serde(with = "serde_rational")]
    pub value: Rational,
    pub proven_optimal: bool,
    /// Best bound on the optimum; equals `value` when proven optimal.
    #[serde(with = "serde_rational")]
    pub upper_bound: Rational,
    pub nodes: u64,
}

impl IntegralSolution {
    pub fn support(&self) -> Vec<usize> {
        (0..self.q.len()).filter(|&i| self.q[i]).collect()
    }

    pub fn as_rational(&self) -> Vec<Rational> {
        self.q.iter().map(|&b| int(b as i64)).collect()
    }
}

/// Exact LP optimum with a matching dual certificate.
///
/// Vertices covered only by singleton constraints (or none) are fixed to 1
/// up front; the simplex sees only constraints with two or more members.
pub fn solve_fractional(inst: &PackingInstance) -> FractionalSolution {
    let n = inst.n;
    let mut in_big = vec![false; n];
    for e in inst.constraints.iter().filter(|e| e.len() >= 2) {
        for &v in e {
            in_big[v] = true;
        }
    }
    let lp_vars: Vec<usize> = (0..n).filter(|&v| in_big[v]).collect();
    let mut col_of = vec![usize::MAX; n];
    for (k, &v) in lp_vars.iter().enumerate() {
        col_of[v] = k;
    }
    let big_rows: Vec<usize> = (0..inst.constraints.len()).filter(|&r| inst.constraints[r].len() >= 2).collect();

    let mut q = vec![Rational::zero(); n];
    let mut dual = vec![Rational::zero(); inst.constraints.len()];
    let mut box_dual = vec![Rational::zero(); n];

    if !lp_vars.is_empty() {
        let c: Vec<Rational> = lp_vars.iter().map(|&v| inst.weights[v].clone()).collect();
        let a: Vec<Vec<Rational>> = big_rows
            .iter()
            .map(|&r| {
                let mut row = vec![Rational::zero(); lp_vars.len()];
                for &v in &inst.constraints[r] {
                    row[col_of[v]] = int(1);
                }
                row
            })
            .collect();
        let b = vec![int(1); big_rows.len()];
        let sol = maximize(&c, &a, &b).expect("packing LP is bounded");
        for (k, &v) in lp_vars.iter().enumerate() {
            q[v] = sol.x[k].clone();
        }
        for (k, &r) in big_rows.iter().enumerate() {
            dual[r] = sol.dual[k].clone();
        }
    }

    for v in (0..n).filter(|&v| !in_big[v]) {
        q[v] = int(1);
        let single = inst.constraints.iter().position(|e| e.len() == 1 && e[0] == v);
        match single {
            Some(r) => dual[r] = inst.weights[v].clone(),
            None => box_dual[v] = inst.weights[v].clone(),
        }
    }

    let value = inst.objective(&q);
    let dual_value = dual.iter().sum::<Rational>() + box_dual.iter().sum::<Rational>();
    let sol = FractionalSolution { q, value, dual, box_dual, dual_value };
    debug_assert!(verify_fractional(inst, &sol));
    assert_eq!(sol.value, sol.dual_value, "strong duality");
    sol
}

/// Primal feasibility, dual feasibility and equal objective values.
pub fn verify_fractional(inst: &PackingInstance, sol: &FractionalSolution) -> bool {
    let mut cover = sol.box_dual.clone();
    for (e, y) in inst.constraints.iter().zip(&sol.dual) {
        for &i in e {
            cover[i] += y;
        }
    }
    inst.is_feasible(&sol.q)
        && sol.dual.iter().chain(&sol.box_dual).all(|y| !y.is_negative())
        && cover.iter().zip(&inst.weights).all(|(c, w)| c >= w)
        && inst.objective(&sol.q) == sol.value
        && sol.value == sol.dual_value
}

/// Largest `g` with every weight an integer multiple of `g`.
fn granularity(weights: &[Rational]) -> Option<Rational> {
    let nonzero: Vec<&Rational> = weights.iter().filter(|w| !w.is_zero()).collect();
    if nonzero.is_empty() {
        return None;
    }
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    for w in nonzero {
        num = num.gcd(w.numer());
        den = den.lcm(w.denom());
    }
    Some(Rational::new(num, den))
}

fn floor_to(value: &Rational, g: &Option<Rational>) -> Rational {
    match g {
        Some(g) => (value / g).floor() * g,
        None => value.clone(),
    }
}

struct BranchAndBound<'a> {
    inst: &'a PackingInstance,
    neighbours: Vec<Vec<usize>>,
    granularity: Option<Rational>,
    best: Vec<bool>,
    best_value: Rational,
    nodes: u64,
    budget: u64,
}

impl BranchAndBound<'_> {
    /// Residual instance on the free vertices; constraints keep their free
    /// members and vanish once a member is fixed to one.
    fn residual(&self, free: &[bool]) -> (Vec<usize>, PackingInstance) {
        let verts: Vec<usize> = (0..self.inst.n).filter(|&v| free[v]).collect();
        let mut index = vec![usize::MAX; self.inst.n];
        for (k, &v) in verts.iter().enumerate() {
            index[v] = k;
        }
        let mut cons: Vec<Vec<usize>> = self
            .inst
            .constraints
            .iter()
            .map(|e| e.iter().filter(|&&v| free[v]).map(|&v| index[v]).collect::<Vec<_>>())
            .filter(|e: &Vec<usize>| e.len() >= 2)
            .collect();
        cons.sort();
        cons.dedup();
        let weights = verts.iter().map(|&v| self.inst.weights[v].clone()).collect();
        let n = verts.len();
        (verts, PackingInstance { n, constraints: cons, weights })
    }

    fn greedy(&mut self) {
        let mut order: Vec<usize> = (0..self.inst.n).collect();
        order.sort_by(|&a, &b| self.inst.weights[b].cmp(&self.inst.weights[a]).then(a.cmp(&b)));
        let mut blocked = vec![false; self.inst.n];
        let mut q = vec![false; self.inst.n];
        for v in order {
            if !blocked[v] && self.inst.weights[v].is_positive() {
                q[v] = true;
                for &u in &self.neighbours[v] {
                    blocked[u] = true;
                }
            }
        }
        let value = (0..self.inst.n).filter(|&v| q[v]).map(|v| self.inst.weights[v].clone()).sum();
        self.best = q;
        self.best_value = value;
    }

    /// Depth-first search; `false` when the node budget runs out.
    fn run(&mut self) -> bool {
        let n = self.inst.n;
        let mut stack: Vec<(Vec<bool>, Vec<usize>, Rational)> = vec![(vec![true; n], Vec::new(), Rational::zero())];
        while let Some((free, ones, fixed)) = stack.pop() {
            if self.nodes >= self.budget {
                return false;
            }
            self.nodes += 1;
            let (verts, sub) = self.residual(&free);
            let lp = solve_fractional(&sub);
            let bound = floor_to(&(&fixed + &lp.value), &self.granularity);
            if bound <= self.best_value {
                continue;
            }
            let half = ratio(1, 2);
            let branch = (0..verts.len()).filter(|&k| !lp.q[k].is_integer()).min_by(|&a, &b| {
                let da = (&lp.q[a] - &half).abs();
                let db = (&lp.q[b] - &half).abs();
                da.cmp(&db).then_with(|| sub.weights[b].cmp(&sub.weights[a])).then(a.cmp(&b))
            });
            let Some(k) = branch else {
                // Integral LP optimum: the best completion of this node.
                let mut q = vec![false; n];
                for &v in &ones {
                    q[v] = true;
                }
                for (k, &v) in verts.iter().enumerate() {
                    if lp.q[k].is_one() && self.inst.weights[v].is_positive() {
                        q[v] = true;
                    }
                }
                let value = &fixed + &lp.value;
                if value > self.best_value {
                    self.best = q;
                    self.best_value = value;
                }
                continue;
            };
            let v = verts[k];
            let mut zero = free.clone();
            zero[v] = false;
            stack.push((zero, ones.clone(), fixed.clone()));
            let mut one = free;
            one[v] = false;
            for &u in &self.neighbours[v] {
                one[u] = false;
            }
            let mut ones = ones;
            ones.push(v);
            stack.push((one, ones, &fixed + &self.inst.weights[v]));
        }
        true
    }
}

/// Exact optimum by LP-bounded branch and bound.
///
/// Branches on the most fractional vertex (ties: heavier, then lower index),
/// exploring `q_v = 1` first. With `budget` exhausted the best packing found
/// is returned with `proven_optimal = false`.
pub fn solve_integral(inst: &PackingInstance, budget: u64) -> IntegralSolution {
    let mut bb = BranchAndBound {
        inst,
        neighbours: inst.constraint_neighbours(),
        granularity: granularity(&inst.weights),
        best: vec![false; inst.n],
        best_value: Rational::zero(),
        nodes: 0,
        budget,
    };
    bb.greedy();
    let finished = bb.run();
    let upper_bound = if finished { bb.best_value.clone() } else { solve_fractional(inst).value };
    let q = bb.best;
    let value = bb.best_value;
    debug_assert!(inst.is_feasible(&q.iter().map(|&b| int(b as i64)).collect::<Vec<_>>()));
    IntegralSolution { q, value, proven_optimal: finished, upper_bound, nodes: bb.nodes }
}

/// As [`solve_integral`], failing when the budget runs out.
pub fn solve_integral_exact(inst: &PackingInstance, budget: u64) -> Result<IntegralSolution> {
    let sol = solve_integral(inst, budget);
    if sol.proven_optimal {
        Ok(sol)
    } else {
        Err(Error::BudgetExceeded { budget, incumbent: Box::new(sol.value), bound: Box::new(sol.upper_bound) })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub tol: f64,
    pub node_budget: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: crate::geometry::DEFAULT_TOL, node_budget: DEFAULT_NODE_BUDGET }
    }
}

fn hypergraph_instance(
    dist: &DiscreteDistribution,
    eps: &Epsilon,
    norm: &Norm,
    opts: SolveOptions,
) -> Result<PackingInstance> {
    let h = build_conflict_hypergraph(dist, eps, norm, opts.tol)?;
    PackingInstance::from_hypergraph(h.hypergraph(), dist.weights().to_vec())
}

pub fn deterministic_adversarial_risk(
    dist: &DiscreteDistribution,
    eps: &Epsilon,
    norm: &Norm,
    opts: SolveOptions,
) -> Result<Rational> {
    let inst = hypergraph_instance(dist, eps, norm, opts)?;
    Ok(int(1) - solve_integral_exact(&inst, opts.node_budget)?.value)
}

pub fn randomized_adversarial_risk(
    dist: &DiscreteDistribution,
    eps: &Epsilon,
    norm: &Norm,
    opts: SolveOptions,
) -> Result<Rational> {
    let inst = hypergraph_instance(dist, eps, norm, opts)?;
    Ok(int(1) - solve_fractional(&inst).value)
}

/// `FP − IP` on the conflict hypergraph.
pub fn randomization_gap(
    dist: &DiscreteDistribution,
    eps: &Epsilon,
    norm: &Norm,
    opts: SolveOptions,
) -> Result<Rational> {
    let inst = hypergraph_instance(dist, eps, norm, opts)?;
    let ip = solve_integral_exact(&inst, opts.node_budget)?.value;
    Ok(solve_fractional(&inst).value - ip)
}
