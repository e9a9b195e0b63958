//! Datasets and graphs with known conflict structure.

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conflict::build_conflict_graph;
use crate::dataset::{Dataset, DiscreteDistribution, LabeledPoint, Norm};
use crate::error::{Error, Result};
use crate::geometry::DEFAULT_TOL;
use crate::graph::Graph;
use crate::packing::{solve_integral_exact, PackingInstance};
use crate::rational::{int, ratio, round_decimal, Epsilon, Rational};

pub const FIBRATION_SIZE_CAP: usize = 10_000;
/// Digits kept when irrational coordinates are rounded to rationals.
pub const EMBED_DIGITS: u32 = 12;

fn dataset(points: Vec<Vec<Rational>>, labels: Vec<usize>, eps: Epsilon, norm: Norm) -> Dataset {
    let support = points.into_iter().zip(labels).map(|(c, l)| LabeledPoint::new(c, l)).collect();
    let distribution = DiscreteDistribution::uniform(support, None).expect("construction is valid");
    Dataset { distribution, epsilon: eps, norm }
}

/// Regular pentagon of circumradius 1 (coordinates rounded to 6 digits),
/// five classes, ε = 3/4 under ℓ2: the conflict hypergraph is a 5-cycle.
pub fn pentagon() -> Dataset {
    let points = (0..5)
        .map(|k| {
            let theta = std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * k as f64 / 5.0;
            vec![round_decimal(theta.cos(), 6), round_decimal(theta.sin(), 6)]
        })
        .collect();
    dataset(points, (1..=5).collect(), Epsilon::new(ratio(3, 4)).unwrap(), Norm::l2())
}

/// Three points whose balls share a point, plus a fourth meeting only the
/// third: maximal hyperedges {1,2,3} and {3,4}. ε = 4/5 under ℓ2.
pub fn triangle_with_pendant() -> Dataset {
    let points =
        vec![vec![ratio(-1, 2), int(0)], vec![ratio(1, 2), int(0)], vec![int(0), int(1)], vec![int(0), ratio(5, 2)]];
    dataset(points, (1..=4).collect(), Epsilon::new(ratio(4, 5)).unwrap(), Norm::l2())
}

/// Seven points in R^7 whose ℓ∞ conflict graph at ε = 49/100 is the
/// complement of the 7-cycle.
pub fn sup_norm_antihole() -> Dataset {
    let rows: [[i64; 7]; 7] = [
        [0, 2, 3, 4, 5, 6, 10],
        [10, 0, 3, 4, 5, 6, 7],
        [1, 10, 0, 4, 5, 6, 7],
        [1, 2, 10, 0, 5, 6, 7],
        [1, 2, 3, 10, 0, 6, 7],
        [1, 2, 3, 4, 10, 0, 7],
        [1, 2, 3, 4, 5, 10, 0],
    ];
    let points = rows.iter().map(|r| r.iter().map(|&v| ratio(v, 10)).collect()).collect();
    dataset(points, (1..=7).collect(), Epsilon::new(ratio(49, 100)).unwrap(), Norm::Infinity)
}

/// ε with ε² = 121/200, i.e. 1.1/√2: basis pairs conflict, triples do not.
pub fn basis_epsilon() -> Epsilon {
    Epsilon::from_square(ratio(121, 200)).unwrap()
}

/// Uniform distribution on the canonical basis of R^K, `e_k` labelled `k`.
pub fn canonical_basis_distribution(k: usize) -> Result<DiscreteDistribution> {
    if k < 2 {
        return Err(Error::Validation(format!("canonical basis needs K ≥ 2, got {k}")));
    }
    let support = (0..k).map(|i| LabeledPoint::new((0..k).map(|j| int((i == j) as i64)).collect(), i + 1)).collect();
    DiscreteDistribution::uniform(support, None)
}

pub fn canonical_basis(k: usize) -> Result<Dataset> {
    Ok(Dataset { distribution: canonical_basis_distribution(k)?, epsilon: basis_epsilon(), norm: Norm::l2() })
}

/// Points with `‖x_i − x_j‖_∞ ≤ 2ε` iff `{i, j}` is an edge: coordinate `j` of
/// `x_i` is 0 on the diagonal, `1.8ε` for neighbours and `2.2ε` otherwise.
pub fn embed_linf(g: &Graph, eps: &Epsilon) -> Result<Vec<Vec<Rational>>> {
    let e = eps
        .as_rational()
        .ok_or_else(|| Error::Validation(format!("sup-norm embedding needs a rational epsilon, got {eps}")))?;
    let near = &e * ratio(9, 5);
    let far = &e * ratio(11, 5);
    let n = g.n();
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Rational::zero()
                    } else if g.has_edge(i, j) {
                        near.clone()
                    } else {
                        far.clone()
                    }
                })
                .collect()
        })
        .collect())
}

/// Points in R^{n+m} for finite p: edge-incidence coordinates, plus one
/// coordinate `(n − deg_i)^{1/p}` per vertex, all scaled by `2ε(2n−1)^{−1/p}`.
///
/// `Σ|Δ|^p` is `2n − 2` across an edge and `2n` across a non-edge, so edges
/// sit at `2ε((2n−2)/(2n−1))^{1/p}` and non-edges at `2ε(2n/(2n−1))^{1/p}`.
/// Irrational values are rounded to [`EMBED_DIGITS`] decimals.
pub fn embed_lp(g: &Graph, eps: &Epsilon, norm: &Norm) -> Result<Vec<Vec<Rational>>> {
    let p = norm.p_f64().ok_or_else(|| Error::Validation("p-norm embedding needs a finite p".into()))?;
    let n = g.n();
    let edges = g.edges();
    let m = edges.len();
    let scale = 2.0 * eps.to_f64() * ((2 * n - 1) as f64).powf(-1.0 / p);
    let s = round_decimal(scale, EMBED_DIGITS);
    let mut points = vec![vec![Rational::zero(); m + n]; n];
    for (k, &(u, v)) in edges.iter().enumerate() {
        points[u][k] = s.clone();
        points[v][k] = s.clone();
    }
    for (i, pt) in points.iter_mut().enumerate() {
        let slack = (n - g.degree(i)) as f64;
        pt[m + i] = round_decimal(scale * slack.powf(1.0 / p), EMBED_DIGITS);
    }
    Ok(points)
}

/// DSATUR: colour the vertex with most distinct neighbour colours next
/// (ties: higher degree, then lower index). Colours are 1-based.
pub fn greedy_coloring(g: &Graph) -> Vec<usize> {
    let n = g.n();
    let mut color = vec![0usize; n];
    let mut seen: Vec<Vec<bool>> = vec![Vec::new(); n];
    let mut saturation = vec![0usize; n];
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| color[v] == 0)
            .max_by(|&a, &b| saturation[a].cmp(&saturation[b]).then(g.degree(a).cmp(&g.degree(b))).then(b.cmp(&a)))
            .unwrap();
        let c = (1..).find(|&c| seen[v].get(c).is_none_or(|&used| !used)).unwrap();
        color[v] = c;
        for &u in g.neighbors(v) {
            if seen[u].len() <= c {
                seen[u].resize(c + 1, false);
            }
            if !seen[u][c] {
                seen[u][c] = true;
                saturation[u] += 1;
            }
        }
    }
    color
}

/// A uniform distribution whose conflict graph is `g`, vertex for vertex.
/// ℓ∞ uses [`embed_linf`], finite p uses [`embed_lp`]; labels come from
/// [`greedy_coloring`].
pub fn graph_to_distribution(g: &Graph, eps: &Epsilon, norm: &Norm) -> Result<Dataset> {
    if g.n() == 0 {
        return Err(Error::Validation("empty support".into()));
    }
    let points = match norm {
        Norm::Infinity => embed_linf(g, eps)?,
        Norm::P(_) => embed_lp(g, eps, norm)?,
    };
    let data = dataset(points, greedy_coloring(g), eps.clone(), norm.clone());
    let back = build_conflict_graph(&data.distribution, eps, norm, DEFAULT_TOL)?;
    if &back != g {
        return Err(Error::Invariant("embedded dataset does not reproduce the input graph".into()));
    }
    Ok(data)
}

/// Six copies of `g`; vertex `v` of copy `i` (0-based) is `i·n + v`. Copies
/// carry `g`'s edges, cyclically adjacent copies are joined along `g`'s edges
/// in both orientations, and each vertex is joined to its copy three steps on.
pub fn fibrate(g: &Graph) -> Graph {
    let n = g.n();
    let id = |v: usize, i: usize| (i % 6) * n + v;
    let mut h = Graph::empty(6 * n);
    let edges = g.edges();
    for i in 0..6 {
        for &(u, v) in &edges {
            h.add_edge(id(u, i), id(v, i));
            h.add_edge(id(u, i), id(v, i + 1));
            h.add_edge(id(u, i + 1), id(v, i));
        }
    }
    for i in 0..3 {
        for u in 0..n {
            h.add_edge(id(u, i), id(u, i + 3));
        }
    }
    h
}

pub fn iterate_fibration(g0: &Graph, t: u32, cap: usize) -> Result<Graph> {
    let size = 6usize.checked_pow(t).and_then(|f| f.checked_mul(g0.n()));
    match size {
        Some(s) if s <= cap => {}
        _ => return Err(Error::SizeCap(format!("{t} fibrations of a {}-vertex graph exceed {cap} vertices", g0.n()))),
    }
    let mut g = g0.clone();
    for _ in 0..t {
        g = fibrate(&g);
    }
    Ok(g)
}

/// α(g), via exact branch and bound on the edge packing with unit weights.
pub fn independence_number(g: &Graph, node_budget: u64) -> Result<usize> {
    let inst = PackingInstance::from_graph(g, vec![Rational::one(); g.n()])?;
    let sol = solve_integral_exact(&inst, node_budget)?;
    Ok(sol.support().len())
}

pub fn random_graph(n: usize, density: f64, rng: &mut impl Rng) -> Graph {
    let mut g = Graph::empty(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(density) {
                g.add_edge(u, v);
            }
        }
    }
    g
}

/// Adds random edges in shuffled order whenever they close no triangle.
pub fn random_triangle_free_graph(n: usize, density: f64, rng: &mut impl Rng) -> Graph {
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    pairs.shuffle(rng);
    let mut g = Graph::empty(n);
    for (u, v) in pairs {
        if rng.gen_bool(density) && !g.neighbors(u).iter().any(|&w| g.has_edge(w, v)) {
            g.add_edge(u, v);
        }
    }
    g
}

#[derive(Clone, Debug)]
pub struct RandomDatasetSpec {
    pub n: usize,
    pub dim: usize,
    pub classes: usize,
    pub norm: Norm,
    /// Coordinates are multiples of `1/grid` in `[0, 1]`.
    pub grid: i64,
    pub epsilon: Epsilon,
}

/// Random grid points, labels and weights. Duplicate points are re-drawn;
/// weights are random positive integers normalized exactly.
pub fn random_dataset(spec: &RandomDatasetSpec, rng: &mut impl Rng) -> Dataset {
    assert!(spec.n >= 1 && spec.classes >= 1 && spec.grid >= 1);
    let mut support: Vec<LabeledPoint> = Vec::with_capacity(spec.n);
    while support.len() < spec.n {
        let coords: Vec<Rational> = (0..spec.dim).map(|_| ratio(rng.gen_range(0..=spec.grid), spec.grid)).collect();
        let label = rng.gen_range(1..=spec.classes);
        let p = LabeledPoint::new(coords, label);
        if !support.contains(&p) {
            support.push(p);
        }
    }
    let raw: Vec<i64> = (0..spec.n).map(|_| rng.gen_range(1..=9)).collect();
    let total: i64 = raw.iter().sum();
    let weights = raw.iter().map(|&w| ratio(w, total)).collect();
    let distribution = DiscreteDistribution::new(support, weights, Some(spec.classes)).expect("valid random dataset");
    Dataset { distribution, epsilon: spec.epsilon.clone(), norm: spec.norm.clone() }
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Graphs addressable by name on the command line: `c<n>`, `k<n>`,
/// `c<n>complement`, `empty<n>`.
pub fn named_graph(name: &str) -> Result<Graph> {
    let bad = || Error::Validation(format!("unknown graph {name:?}; expected c<n>, k<n>, c<n>complement or empty<n>"));
    let lower = name.to_ascii_lowercase();
    let (body, complement) = match lower.strip_suffix("complement") {
        Some(b) => (b, true),
        None => (lower.as_str(), false),
    };
    let g = if let Some(k) = body.strip_prefix("empty") {
        Graph::empty(k.parse().map_err(|_| bad())?)
    } else if let Some(k) = body.strip_prefix('c') {
        let k: usize = k.parse().map_err(|_| bad())?;
        if k < 3 {
            return Err(bad());
        }
        Graph::cycle(k)
    } else if let Some(k) = body.strip_prefix('k') {
        Graph::complete(k.parse().map_err(|_| bad())?)
    } else {
        return Err(bad());
    };
    Ok(if complement { g.complement() } else { g })
}
