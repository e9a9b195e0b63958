//! Classifiers built from packings, and packings read back from classifiers.
//!
//! For a fractional packing `q`, `g(x)^y = max { q_i : y_i = y, x ∈ B(x_i, ε) }`
//! and the classifier outputs `g(x)^y` for `y > 1`, with the remaining mass on
//! class 1. Every support point keeps at least `q_i` on its own label
//! throughout its ball, so its adversarial accuracy is at least `ωᵀq`.

use num_traits::{Signed, Zero};

use crate::conflict::ConflictHypergraph;
use crate::dataset::{DiscreteDistribution, Norm};
use crate::error::{Error, Result};
use crate::geometry::ball_contains;
use crate::packing::PackingInstance;
use crate::rational::{int, Epsilon, Rational};

#[derive(Clone, Debug)]
pub struct RandomizedClassifier<'a> {
    dist: &'a DiscreteDistribution,
    eps: Epsilon,
    norm: Norm,
    tol: f64,
    q: Vec<Rational>,
}

impl RandomizedClassifier<'_> {
    pub fn packing(&self) -> &[Rational] {
        &self.q
    }

    fn in_ball(&self, i: usize, x: &[Rational]) -> bool {
        ball_contains(&self.dist.point(i).coords, x, &self.eps, &self.norm, self.tol)
    }

    /// Probability vector over classes `1..=K` (index `y − 1`).
    pub fn eval(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        let k = self.dist.num_classes();
        let mut g = vec![Rational::zero(); k];
        for i in 0..self.dist.len() {
            let y = self.dist.point(i).label - 1;
            if self.q[i] > g[y] && self.in_ball(i, x) {
                g[y] = self.q[i].clone();
            }
        }
        let rest: Rational = g[1..].iter().sum();
        g[0] = int(1) - rest;
        if g[0].is_negative() {
            return Err(Error::Invariant(format!(
                "classifier mass on class 1 is {} at a query point; the packing is not feasible there",
                g[0]
            )));
        }
        Ok(g)
    }
}

/// Wraps a packing `q` that is feasible for `h` (checked exactly).
pub fn classifier_from_packing<'a>(
    dist: &'a DiscreteDistribution,
    h: &ConflictHypergraph,
    eps: &Epsilon,
    norm: &Norm,
    tol: f64,
    q: Vec<Rational>,
) -> Result<RandomizedClassifier<'a>> {
    let inst = PackingInstance::from_hypergraph(h.hypergraph(), dist.weights().to_vec())?;
    if !inst.is_feasible(&q) {
        return Err(Error::InfeasiblePacking(format!(
            "expected {} entries in [0, 1] summing to at most 1 on every hyperedge",
            dist.len()
        )));
    }
    Ok(RandomizedClassifier { dist, eps: eps.clone(), norm: norm.clone(), tol, q })
}

/// Candidate adversarial inputs: the support points and one point in the
/// joint ball intersection of every maximal hyperedge.
#[derive(Clone, Debug, Default)]
pub struct AttackSet {
    pub points: Vec<Vec<Rational>>,
}

impl AttackSet {
    pub fn from_hypergraph(dist: &DiscreteDistribution, h: &ConflictHypergraph) -> Self {
        let mut points: Vec<Vec<Rational>> = dist.support().iter().map(|p| p.coords.clone()).collect();
        points.extend(h.witnesses().iter().cloned());
        Self { points }
    }
}

/// Per support point, the smallest probability of its own label over the
/// attack points inside its ball, with the attack index attaining it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessedPacking {
    pub q: Vec<Rational>,
    pub worst_attack: Vec<usize>,
}

pub fn packing_from_classifier(f: &RandomizedClassifier<'_>, attacks: &AttackSet) -> Result<WitnessedPacking> {
    let n = f.dist.len();
    let outputs: Vec<Vec<Rational>> = attacks.points.iter().map(|a| f.eval(a)).collect::<Result<_>>()?;
    let mut q = Vec::with_capacity(n);
    let mut worst_attack = Vec::with_capacity(n);
    for i in 0..n {
        let y = f.dist.point(i).label - 1;
        let (best, value) = attacks
            .points
            .iter()
            .enumerate()
            .filter(|(_, a)| f.in_ball(i, a))
            .map(|(k, _)| (k, &outputs[k][y]))
            .min_by(|a, b| a.1.cmp(b.1).then(a.0.cmp(&b.0)))
            .ok_or_else(|| Error::Validation(format!("no attack point inside the ball of support point {i}")))?;
        q.push(value.clone());
        worst_attack.push(best);
    }
    Ok(WitnessedPacking { q, worst_attack })
}

/// `Σ_i ω_i · min f(a)^{y_i}` over attack points `a` in the ball of `x_i`.
/// An upper bound on the true adversarial accuracy of `f`.
pub fn witnessed_adversarial_accuracy(f: &RandomizedClassifier<'_>, attacks: &AttackSet) -> Result<Rational> {
    let wp = packing_from_classifier(f, attacks)?;
    Ok(f.dist.weights().iter().zip(&wp.q).map(|(w, q)| w * q).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conflict::build_conflict_hypergraph;
    use crate::constructions::{pentagon, triangle_with_pendant};
    use crate::geometry::DEFAULT_TOL;
    use crate::rational::ratio;
    use num_traits::One;

    #[test]
    fn pentagon_half_packing_keeps_half_everywhere() {
        let d = pentagon();
        let h = build_conflict_hypergraph(&d.distribution, &d.epsilon, &d.norm, DEFAULT_TOL).unwrap();
        let f = classifier_from_packing(&d.distribution, &h, &d.epsilon, &d.norm, DEFAULT_TOL, vec![ratio(1, 2); 5])
            .unwrap();
        let attacks = AttackSet::from_hypergraph(&d.distribution, &h);
        let wp = packing_from_classifier(&f, &attacks).unwrap();
        assert_eq!(wp.q, vec![ratio(1, 2); 5]);
        assert_eq!(witnessed_adversarial_accuracy(&f, &attacks).unwrap(), ratio(1, 2));
        for a in &attacks.points {
            let out = f.eval(a).unwrap();
            assert!(out.iter().sum::<Rational>().is_one());
        }
    }

    #[test]
    fn pendant_packing_gives_dirac_outputs() {
        let d = triangle_with_pendant();
        let h = build_conflict_hypergraph(&d.distribution, &d.epsilon, &d.norm, DEFAULT_TOL).unwrap();
        let q = vec![int(0), int(1), int(0), int(1)];
        let f = classifier_from_packing(&d.distribution, &h, &d.epsilon, &d.norm, DEFAULT_TOL, q.clone()).unwrap();
        let attacks = AttackSet::from_hypergraph(&d.distribution, &h);
        for a in &attacks.points {
            let out = f.eval(a).unwrap();
            assert_eq!(out.iter().filter(|v| v.is_one()).count(), 1);
            assert_eq!(out.iter().filter(|v| v.is_zero()).count(), 3);
        }
        assert_eq!(packing_from_classifier(&f, &attacks).unwrap().q, q);
        assert_eq!(witnessed_adversarial_accuracy(&f, &attacks).unwrap(), ratio(1, 2));
    }

    #[test]
    fn zero_packing_is_constant_first_class() {
        let d = triangle_with_pendant();
        let h = build_conflict_hypergraph(&d.distribution, &d.epsilon, &d.norm, DEFAULT_TOL).unwrap();
        let f =
            classifier_from_packing(&d.distribution, &h, &d.epsilon, &d.norm, DEFAULT_TOL, vec![int(0); 4]).unwrap();
        let attacks = AttackSet::from_hypergraph(&d.distribution, &h);
        assert_eq!(packing_from_classifier(&f, &attacks).unwrap().q, vec![int(1), int(0), int(0), int(0)]);
    }

    #[test]
    fn infeasible_packing_is_rejected() {
        let d = triangle_with_pendant();
        let h = build_conflict_hypergraph(&d.distribution, &d.epsilon, &d.norm, DEFAULT_TOL).unwrap();
        let bad = vec![int(1), int(1), int(0), int(0)];
        assert!(matches!(
            classifier_from_packing(&d.distribution, &h, &d.epsilon, &d.norm, DEFAULT_TOL, bad),
            Err(Error::InfeasiblePacking(_))
        ));
    }
}
