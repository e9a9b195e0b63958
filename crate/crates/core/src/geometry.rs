//! Joint ε-ball intersection for ℓp norms.
//!
//! `⋂ B_p(x_i, ε) ≠ ∅` iff the Chebyshev radius `min_x max_i ‖x − x_i‖_p` is
//! at most ε. Three solvers back that radius:
//!
//! * ℓ∞: per-coordinate midranges, exact in rationals.
//! * ℓ2: minimum enclosing ball. A float core-set search finds the support
//!   set, whose circumcenter is then recomputed and verified in rationals, so
//!   the squared radius is exact.
//! * other p: restarted subgradient descent. The upper bound is the objective
//!   at the returned center; the lower bound is a Hölder dual certificate
//!   (see [`dual_lower_bound`]).
//!
//! Pairwise tests (`‖a − b‖_p ≤ 2ε`) are exact for ℓ∞ and integer p.

use std::cmp::Ordering;

use num_traits::{Signed, Zero};

use crate::dataset::{LabeledPoint, Norm};
use crate::rational::{from_f64, int, pow, to_f64, Epsilon, Rational};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const SUBGRADIENT_ITERATION_CAP: usize = 100_000;
const EXACT_ENUMERATION_LIMIT: usize = 16;

/// The exact radius `r` of a ball, known as `r^power = value`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactRadius {
    pub power: u32,
    pub value: Rational,
}

impl ExactRadius {
    pub fn compare(&self, eps: &Epsilon) -> Ordering {
        eps.compare_power(&self.value, self.power)
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.value).powf(1.0 / self.power as f64)
    }
}

#[derive(Clone, Debug)]
pub struct ChebyshevCenter {
    pub center: Vec<f64>,
    /// Objective value at `center`.
    pub radius: f64,
    /// Certified lower bound on the optimal radius.
    pub lower_bound: f64,
    /// `radius − lower_bound ≤ tol`, or the radius is exact.
    pub certified: bool,
    /// Present when center and radius were computed in exact arithmetic.
    pub exact: Option<(Vec<Rational>, ExactRadius)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum IntersectionStatus {
    /// `witness` lies in every ball.
    NonEmpty {
        witness: Vec<Rational>,
    },
    Empty,
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct IntersectionVerdict {
    pub status: IntersectionStatus,
    /// Best center's radius minus ε.
    pub margin: f64,
    /// Best center found, usable as a warm start for supersets.
    pub center: Vec<f64>,
}

impl IntersectionVerdict {
    pub fn is_non_empty(&self) -> bool {
        matches!(self.status, IntersectionStatus::NonEmpty { .. })
    }
}

/// `‖a − b‖^power` exactly: `power = 1` for ℓ∞, `p` for integer p.
fn exact_distance_power(a: &[Rational], b: &[Rational], norm: &Norm) -> Option<ExactRadius> {
    match norm {
        Norm::Infinity => {
            let m = a.iter().zip(b).map(|(x, y)| (x - y).abs()).max().unwrap_or_else(Rational::zero);
            Some(ExactRadius { power: 1, value: m })
        }
        _ => {
            let p = norm.integer_p()?;
            let s = a.iter().zip(b).map(|(x, y)| pow(&(x - y).abs(), p)).sum();
            Some(ExactRadius { power: p, value: s })
        }
    }
}

pub fn distance_f64(a: &[f64], b: &[f64], norm: &Norm) -> f64 {
    norm.eval_f64(a.iter().zip(b).map(|(x, y)| x - y))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PairRelation {
    Conflict,
    Separate,
    /// `|‖a − b‖ − 2ε| ≤ tol` on the floating-point path.
    Inconclusive {
        margin: f64,
    },
}

/// Decides `‖a − b‖_p ≤ 2ε`.
pub fn pair_relation(a: &[Rational], b: &[Rational], eps: &Epsilon, norm: &Norm, tol: f64) -> PairRelation {
    let two_eps = eps.scaled(&int(2));
    if let Some(d) = exact_distance_power(a, b, norm) {
        return match d.compare(&two_eps) {
            Ordering::Greater => PairRelation::Separate,
            _ => PairRelation::Conflict,
        };
    }
    let af: Vec<f64> = a.iter().map(to_f64).collect();
    let bf: Vec<f64> = b.iter().map(to_f64).collect();
    let margin = distance_f64(&af, &bf, norm) - two_eps.to_f64();
    if margin < -tol {
        PairRelation::Conflict
    } else if margin > tol {
        PairRelation::Separate
    } else {
        PairRelation::Inconclusive { margin }
    }
}

/// `‖a − b‖_p ≤ 2ε`, up to `tol` on the floating-point path. Labels are ignored.
pub fn pairwise_conflict(a: &LabeledPoint, b: &LabeledPoint, eps: &Epsilon, norm: &Norm, tol: f64) -> bool {
    match pair_relation(&a.coords, &b.coords, eps, norm, tol) {
        PairRelation::Conflict => true,
        PairRelation::Separate => false,
        PairRelation::Inconclusive { margin } => margin <= tol,
    }
}

/// `x ∈ B_p(center, ε)`; exact when the norm allows, otherwise within `tol`.
pub fn ball_contains(center: &[Rational], x: &[Rational], eps: &Epsilon, norm: &Norm, tol: f64) -> bool {
    if let Some(d) = exact_distance_power(center, x, norm) {
        return d.compare(eps) != Ordering::Greater;
    }
    let cf: Vec<f64> = center.iter().map(to_f64).collect();
    let xf: Vec<f64> = x.iter().map(to_f64).collect();
    distance_f64(&cf, &xf, norm) <= eps.to_f64() + tol
}

pub fn chebyshev_center(points: &[&[Rational]], norm: &Norm, tol: f64) -> ChebyshevCenter {
    chebyshev_center_from(points, norm, tol, None, None)
}

/// As [`chebyshev_center`], optionally warm-started, and stopping early once
/// the radius is separated from `target` by more than `tol`.
pub fn chebyshev_center_from(
    points: &[&[Rational]],
    norm: &Norm,
    tol: f64,
    start: Option<&[f64]>,
    target: Option<f64>,
) -> ChebyshevCenter {
    assert!(!points.is_empty(), "chebyshev_center needs at least one point");
    if let Some(c) = closed_form(points, norm) {
        return c;
    }
    match norm {
        Norm::P(_) if norm.integer_p() == Some(2) => l2_center(points, tol),
        _ => subgradient_center(points, norm, tol, start, target),
    }
}

fn exact_result(center: Vec<Rational>, radius: ExactRadius) -> ChebyshevCenter {
    let r = radius.to_f64();
    ChebyshevCenter {
        center: center.iter().map(to_f64).collect(),
        radius: r,
        lower_bound: r,
        certified: true,
        exact: Some((center, radius)),
    }
}

/// Singletons, pairs, and the ℓ∞ norm.
fn closed_form(points: &[&[Rational]], norm: &Norm) -> Option<ChebyshevCenter> {
    let dim = points[0].len();
    if points.len() == 1 {
        let power = if norm.is_infinity() { 1 } else { norm.integer_p().unwrap_or(1) };
        return Some(exact_result(points[0].to_vec(), ExactRadius { power, value: Rational::zero() }));
    }
    if let Norm::Infinity = norm {
        let mut center = Vec::with_capacity(dim);
        let mut radius = Rational::zero();
        for j in 0..dim {
            let lo = points.iter().map(|p| &p[j]).min().unwrap();
            let hi = points.iter().map(|p| &p[j]).max().unwrap();
            center.push((lo + hi) / int(2));
            radius = radius.max((hi - lo) / int(2));
        }
        return Some(exact_result(center, ExactRadius { power: 1, value: radius }));
    }
    if points.len() == 2 {
        let mid: Vec<Rational> = points[0].iter().zip(points[1]).map(|(a, b)| (a + b) / int(2)).collect();
        if let Some(d) = exact_distance_power(points[0], points[1], norm) {
            // ‖a − b‖^p / 2^p
            let value = d.value / pow(&int(2), d.power);
            return Some(exact_result(mid, ExactRadius { power: d.power, value }));
        }
        // Any x has ‖x − a‖ + ‖x − b‖ ≥ ‖a − b‖, so half the distance is optimal.
        let a: Vec<f64> = points[0].iter().map(to_f64).collect();
        let b: Vec<f64> = points[1].iter().map(to_f64).collect();
        let r = distance_f64(&a, &b, norm) / 2.0;
        return Some(ChebyshevCenter {
            center: mid.iter().map(to_f64).collect(),
            radius: r,
            lower_bound: r,
            certified: true,
            exact: None,
        });
    }
    None
}

// ---------------------------------------------------------------------------
// ℓ2: minimum enclosing ball

fn dist2_f64(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Circumcenter of the simplex spanned by `pts` inside its affine hull, as
/// barycentric weights. `None` when the points are affinely dependent.
fn circumcenter_weights_f64(pts: &[&[f64]]) -> Option<Vec<f64>> {
    let m = pts.len() - 1;
    if m == 0 {
        return Some(vec![1.0]);
    }
    let base = pts[0];
    let v: Vec<Vec<f64>> = pts[1..].iter().map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect()).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut mat = vec![vec![0.0; m + 1]; m];
    let mut scale = 0.0f64;
    for j in 0..m {
        for l in 0..m {
            mat[j][l] = dot(&v[j], &v[l]);
        }
        mat[j][m] = dot(&v[j], &v[j]) / 2.0;
        scale = scale.max(mat[j][j]);
    }
    let beta = solve_f64(mat, scale * 1e-10)?;
    let mut weights = Vec::with_capacity(m + 1);
    weights.push(1.0 - beta.iter().sum::<f64>());
    weights.extend(beta);
    Some(weights)
}

#[allow(clippy::needless_range_loop)]
fn solve_f64(mut a: Vec<Vec<f64>>, pivot_floor: f64) -> Option<Vec<f64>> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= pivot_floor.max(1e-300) {
            return None;
        }
        a.swap(col, piv);
        for row in 0..n {
            if row != col {
                let f = a[row][col] / a[col][col];
                if f != 0.0 {
                    for k in col..=n {
                        a[row][k] -= f * a[col][k];
                    }
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

#[allow(clippy::needless_range_loop)]
fn solve_rational(mut a: Vec<Vec<Rational>>) -> Option<Vec<Rational>> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).find(|&i| !a[i][col].is_zero())?;
        a.swap(col, piv);
        let inv = a[col][col].recip();
        for k in col..=n {
            a[col][k] = &a[col][k] * &inv;
        }
        for row in 0..n {
            if row != col && !a[row][col].is_zero() {
                let f = a[row][col].clone();
                for k in col..=n {
                    let delta = &f * &a[col][k];
                    a[row][k] -= delta;
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n].clone()).collect())
}

fn circumcenter_weights_exact(pts: &[&[Rational]]) -> Option<Vec<Rational>> {
    let m = pts.len() - 1;
    if m == 0 {
        return Some(vec![int(1)]);
    }
    let base = pts[0];
    let v: Vec<Vec<Rational>> = pts[1..].iter().map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect()).collect();
    let dot = |a: &[Rational], b: &[Rational]| a.iter().zip(b).map(|(x, y)| x * y).sum::<Rational>();
    let mut mat = vec![vec![Rational::zero(); m + 1]; m];
    for j in 0..m {
        for l in j..m {
            let d = dot(&v[j], &v[l]);
            mat[l][j] = d.clone();
            mat[j][l] = d;
        }
        mat[j][m] = dot(&v[j], &v[j]) / int(2);
    }
    let beta = solve_rational(mat)?;
    let mut weights = Vec::with_capacity(m + 1);
    weights.push(int(1) - beta.iter().sum::<Rational>());
    weights.extend(beta);
    Some(weights)
}

fn combinations(items: &[usize], size: usize, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    fn rec(
        items: &[usize],
        size: usize,
        start: usize,
        acc: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if acc.len() == size {
            return visit(acc);
        }
        for i in start..items.len() {
            if items.len() - i < size - acc.len() {
                break;
            }
            acc.push(items[i]);
            if rec(items, size, i + 1, acc, visit) {
                return true;
            }
            acc.pop();
        }
        false
    }
    rec(items, size, 0, &mut Vec::with_capacity(size), visit)
}

/// Smallest enclosing ball of `pts[idx]` in floats: the first subset (by size)
/// whose circumcenter lies in its convex hull and covers every point.
fn meb_support_f64(pts: &[Vec<f64>], idx: &[usize]) -> Option<(Vec<usize>, Vec<f64>, f64)> {
    let dim = pts[0].len();
    let mut found = None;
    for size in 1..=idx.len().min(dim + 1) {
        let hit = combinations(idx, size, &mut |subset| {
            let sub: Vec<&[f64]> = subset.iter().map(|&i| pts[i].as_slice()).collect();
            let Some(w) = circumcenter_weights_f64(&sub) else { return false };
            if w.iter().any(|&l| l < -1e-10) {
                return false;
            }
            let mut c = vec![0.0; dim];
            for (wt, p) in w.iter().zip(&sub) {
                for (cj, pj) in c.iter_mut().zip(p.iter()) {
                    *cj += wt * pj;
                }
            }
            let r2 = dist2_f64(&c, sub[0]);
            let slack = r2 * 1e-9 + 1e-18;
            if idx.iter().all(|&i| dist2_f64(&c, &pts[i]) <= r2 + slack) {
                found = Some((subset.to_vec(), c, r2));
                true
            } else {
                false
            }
        });
        if hit {
            break;
        }
    }
    found
}

/// Exact verification: the circumcenter of `support` has nonnegative
/// barycentric weights and its ball contains every point.
fn verify_support_exact(points: &[&[Rational]], support: &[usize]) -> Option<(Vec<Rational>, Rational)> {
    let sub: Vec<&[Rational]> = support.iter().map(|&i| points[i]).collect();
    let w = circumcenter_weights_exact(&sub)?;
    if w.iter().any(|l| l.is_negative()) {
        return None;
    }
    let dim = points[0].len();
    let mut c = vec![Rational::zero(); dim];
    for (wt, p) in w.iter().zip(&sub) {
        for (cj, pj) in c.iter_mut().zip(p.iter()) {
            *cj += wt * pj;
        }
    }
    let d2 = |p: &[Rational]| c.iter().zip(p).map(|(a, b)| pow(&(a - b), 2)).sum::<Rational>();
    let r2 = d2(sub[0]);
    if points.iter().all(|p| d2(p) <= r2) {
        Some((c, r2))
    } else {
        None
    }
}

fn l2_center(points: &[&[Rational]], tol: f64) -> ChebyshevCenter {
    let fpts: Vec<Vec<f64>> = points.iter().map(|p| p.iter().map(to_f64).collect()).collect();
    let k = fpts.len();
    let farthest = |c: &[f64]| -> (usize, f64) {
        (0..k).map(|i| (i, dist2_f64(c, &fpts[i]))).max_by(|a, b| a.1.total_cmp(&b.1)).unwrap()
    };

    // Core-set refinement: grow the core with the farthest violator.
    let (far, _) = farthest(&fpts[0]);
    let mut core = vec![0];
    if far != 0 {
        core.push(far);
    }
    let mut best: Option<(Vec<usize>, Vec<f64>, f64)> = None;
    while core.len() <= EXACT_ENUMERATION_LIMIT {
        let Some((support, c, r2)) = meb_support_f64(&fpts, &core) else { break };
        let (q, d2) = farthest(&c);
        best = Some((support, c, r2));
        if d2 <= r2 * (1.0 + 1e-9) + 1e-18 || core.contains(&q) {
            break;
        }
        core.push(q);
    }

    if let Some((support, ..)) = &best {
        if let Some((c, r2)) = verify_support_exact(points, support) {
            return exact_result(c, ExactRadius { power: 2, value: r2 });
        }
    }
    // Floats picked the wrong support; enumerate exactly.
    if k <= EXACT_ENUMERATION_LIMIT {
        let dim = points[0].len();
        let all: Vec<usize> = (0..k).collect();
        let mut exact = None;
        for size in 1..=k.min(dim + 1) {
            if combinations(&all, size, &mut |s| {
                exact = verify_support_exact(points, s);
                exact.is_some()
            }) {
                break;
            }
        }
        if let Some((c, r2)) = exact {
            return exact_result(c, ExactRadius { power: 2, value: r2 });
        }
    }
    let (_, c, r2) = best.unwrap_or_else(|| {
        let c = fpts[0].clone();
        let r2 = farthest(&c).1;
        (vec![], c, r2)
    });
    let r = farthest(&c).1.sqrt().max(r2.sqrt());
    ChebyshevCenter { center: c, radius: r, lower_bound: 0.0, certified: tol.is_infinite(), exact: None }
}

// ---------------------------------------------------------------------------
// General p: subgradient descent with a dual certificate

struct Minimax<'a> {
    pts: &'a [Vec<f64>],
    norm: &'a Norm,
    p: f64,
}

impl Minimax<'_> {
    fn values(&self, x: &[f64]) -> Vec<f64> {
        self.pts.iter().map(|q| distance_f64(x, q, self.norm)).collect()
    }

    fn objective(&self, x: &[f64]) -> f64 {
        self.values(x).into_iter().fold(0.0, f64::max)
    }

    /// Gradient of `‖x − q‖_p`; unit length in the dual norm.
    fn gradient(&self, x: &[f64], q: &[f64]) -> Vec<f64> {
        let d: Vec<f64> = x.iter().zip(q).map(|(a, b)| a - b).collect();
        let scale = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return vec![0.0; d.len()];
        }
        let g: Vec<f64> = d.iter().map(|v| (v / scale).signum() * (v.abs() / scale).powf(self.p - 1.0)).collect();
        let dual_p = self.p / (self.p - 1.0);
        let norm_q = self.norm_with(&g, dual_p);
        g.into_iter().map(|v| v / norm_q).collect()
    }

    fn norm_with(&self, v: &[f64], p: f64) -> f64 {
        let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        scale * v.iter().map(|x| (x.abs() / scale).powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Lower bound on `min_x max_i ‖x − x_i‖_p` from the point `x`.
///
/// For unit dual vectors `u_i` and `λ` on the simplex, Hölder gives
/// `max_i ‖y − x_i‖ ≥ Σ λ_i u_i·(y − x_i)` for every `y`. The minimizer lies
/// in the bounding box of the points (clamping coordinates never increases a
/// distance), so minimizing the affine right side over that box is a valid
/// bound. `u_i` are the gradients at `x` of near-active points and `λ` drives
/// `Σ λ_i u_i` towards zero.
fn dual_lower_bound(mm: &Minimax<'_>, x: &[f64], hi: f64) -> f64 {
    let dim = x.len();
    let lo_box: Vec<f64> = (0..dim).map(|j| mm.pts.iter().map(|p| p[j]).fold(f64::INFINITY, f64::min)).collect();
    let hi_box: Vec<f64> = (0..dim).map(|j| mm.pts.iter().map(|p| p[j]).fold(f64::NEG_INFINITY, f64::max)).collect();
    let vals = mm.values(x);
    let mut best = 0.0f64;
    for rel in [1e-1, 3e-2, 1e-2, 1e-3, 1e-4, 1e-6, 1e-9] {
        let active: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] >= hi * (1.0 - rel)).collect();
        let grads: Vec<Vec<f64>> = active.iter().map(|&i| mm.gradient(x, &mm.pts[i])).collect();
        let lambda = min_norm_combination(&grads);
        let s: Vec<f64> = (0..dim).map(|j| lambda.iter().zip(&grads).map(|(l, g)| l * g[j]).sum()).collect();
        let offset: f64 = lambda
            .iter()
            .zip(&active)
            .zip(&grads)
            .map(|((l, &i), g)| l * g.iter().zip(&mm.pts[i]).map(|(a, b)| a * b).sum::<f64>())
            .sum();
        let box_min: f64 = (0..dim).map(|j| (s[j] * lo_box[j]).min(s[j] * hi_box[j])).sum();
        let bound = box_min - offset;
        let slack = 1e-12 * (1.0 + hi.abs());
        best = best.max(bound - slack);
    }
    best.min(hi)
}

/// Frank–Wolfe on `min_{λ ∈ Δ} ‖Σ λ_i g_i‖²`.
fn min_norm_combination(grads: &[Vec<f64>]) -> Vec<f64> {
    let k = grads.len();
    let dim = grads.first().map_or(0, Vec::len);
    let mut lambda = vec![1.0 / k as f64; k];
    let combo = |lambda: &[f64]| -> Vec<f64> {
        (0..dim).map(|j| lambda.iter().zip(grads).map(|(l, g)| l * g[j]).sum()).collect()
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    for _ in 0..500 {
        let s = combo(&lambda);
        let (best, _) = (0..k).map(|i| (i, dot(&grads[i], &s))).min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        let d: Vec<f64> = grads[best].iter().zip(&s).map(|(g, v)| g - v).collect();
        let dd = dot(&d, &d);
        if dd <= 1e-30 {
            break;
        }
        let step = (-dot(&s, &d) / dd).clamp(0.0, 1.0);
        if step <= 1e-15 {
            break;
        }
        for (i, l) in lambda.iter_mut().enumerate() {
            *l *= 1.0 - step;
            if i == best {
                *l += step;
            }
        }
    }
    lambda
}

fn subgradient_center(
    points: &[&[Rational]],
    norm: &Norm,
    tol: f64,
    start: Option<&[f64]>,
    target: Option<f64>,
) -> ChebyshevCenter {
    let fpts: Vec<Vec<f64>> = points.iter().map(|p| p.iter().map(to_f64).collect()).collect();
    let dim = fpts[0].len();
    let mm = Minimax { pts: &fpts, norm, p: norm.p_f64().expect("finite p") };

    let mut x: Vec<f64> = match start {
        Some(s) if s.len() == dim => s.to_vec(),
        _ => (0..dim).map(|j| fpts.iter().map(|p| p[j]).sum::<f64>() / fpts.len() as f64).collect(),
    };
    let diameter = fpts.iter().flat_map(|a| fpts.iter().map(move |b| distance_f64(a, b, norm))).fold(0.0, f64::max);

    let mut best_x = x.clone();
    let mut best = mm.objective(&x);
    let mut lower = 0.0f64;
    let mut scale = diameter;
    let mut used = 0usize;
    let round_len = 2_000usize;

    // Restarts shrink the step scale to the current certified gap.
    while used < SUBGRADIENT_ITERATION_CAP {
        let mut avg = vec![0.0; dim];
        let mut avg_w = 0.0;
        x.clone_from(&best_x);
        for k in 1..=round_len {
            let vals = mm.values(&x);
            let (imax, fmax) =
                vals.iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
            if fmax < best {
                best = fmax;
                best_x.clone_from(&x);
            }
            let g = mm.gradient(&x, &fpts[imax]);
            let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if gn == 0.0 {
                break;
            }
            let step = scale / (k as f64).sqrt();
            for (xj, gj) in x.iter_mut().zip(&g) {
                *xj -= step * gj / gn;
            }
            for (aj, xj) in avg.iter_mut().zip(&x) {
                *aj += step * xj;
            }
            avg_w += step;
        }
        used += round_len;
        if avg_w > 0.0 {
            let xa: Vec<f64> = avg.iter().map(|v| v / avg_w).collect();
            let fa = mm.objective(&xa);
            if fa < best {
                best = fa;
                best_x = xa;
            }
        }
        lower = lower.max(dual_lower_bound(&mm, &best_x, best));
        let gap = best - lower;
        if gap <= tol {
            break;
        }
        if let Some(t) = target {
            if best < t - tol || lower > t + tol {
                break;
            }
        }
        scale = gap.max(tol).min(scale);
    }

    ChebyshevCenter { center: best_x, radius: best, lower_bound: lower, certified: best - lower <= tol, exact: None }
}

// ---------------------------------------------------------------------------

pub fn balls_intersect(points: &[&[Rational]], eps: &Epsilon, norm: &Norm, tol: f64) -> IntersectionVerdict {
    balls_intersect_from(points, eps, norm, tol, None)
}

/// Decides `⋂ B_p(x_i, ε) ≠ ∅`.
///
/// Exact solvers never return `Inconclusive`. On the floating-point path the
/// verdict is `NonEmpty` when the best center is inside every ball by more than
/// `tol`, `Empty` when the certified lower bound exceeds `ε + tol`, and
/// `Inconclusive` otherwise.
pub fn balls_intersect_from(
    points: &[&[Rational]],
    eps: &Epsilon,
    norm: &Norm,
    tol: f64,
    start: Option<&[f64]>,
) -> IntersectionVerdict {
    let eps_f = eps.to_f64();
    let cheb = chebyshev_center_from(points, norm, tol, start, Some(eps_f));
    let margin = cheb.radius - eps_f;
    let status = match &cheb.exact {
        Some((center, radius)) => match radius.compare(eps) {
            Ordering::Greater => IntersectionStatus::Empty,
            _ => IntersectionStatus::NonEmpty { witness: center.clone() },
        },
        None => {
            if cheb.radius < eps_f - tol {
                IntersectionStatus::NonEmpty { witness: cheb.center.iter().map(|&v| from_f64(v)).collect() }
            } else if cheb.lower_bound > eps_f + tol {
                IntersectionStatus::Empty
            } else {
                IntersectionStatus::Inconclusive
            }
        }
    };
    IntersectionVerdict { status, margin, center: cheb.center }
}
