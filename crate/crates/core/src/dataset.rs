//! Discrete labeled distributions and their JSON file format.
//!
//! ```json
//! { "epsilon": "1/2", "norm": "2",
//!   "points": [["0", "1/3"], ["1", "0"]], "labels": [1, 2],
//!   "weights": ["1/2", "1/2"] }
//! ```
//!
//! Labels are 1-based. `weights` may be omitted (uniform). `epsilon` also
//! accepts `"sqrt(a/b)"` for radii whose square is rational. An optional
//! `num_classes` overrides the inferred class count (max label).

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_traits::{One, Signed};
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::rational::{format_rational, int, parse_rational, to_f64, Epsilon, Rational};

/// An ℓp norm with p ∈ (1, ∞].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Norm {
    P(Rational),
    Infinity,
}

impl Norm {
    pub fn p(p: Rational) -> Result<Self> {
        if p <= Rational::one() {
            return Err(Error::Validation(format!("norm exponent must satisfy p > 1, got {p}")));
        }
        Ok(Norm::P(p))
    }

    pub fn l2() -> Self {
        Norm::P(int(2))
    }

    /// The exponent when it is a positive integer.
    pub fn integer_p(&self) -> Option<u32> {
        match self {
            Norm::P(p) if p.is_integer() => p.to_integer().try_into().ok(),
            _ => None,
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, Norm::Infinity)
    }

    /// `None` for the ∞ norm.
    pub fn p_f64(&self) -> Option<f64> {
        match self {
            Norm::P(p) => Some(to_f64(p)),
            Norm::Infinity => None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "inf" | "infinity" | "Infinity" | "∞" => Ok(Norm::Infinity),
            other => Norm::p(parse_rational(other)?),
        }
    }

    /// ‖v‖ in floating point.
    pub fn eval_f64(&self, v: impl IntoIterator<Item = f64>) -> f64 {
        match self.p_f64() {
            None => v.into_iter().fold(0.0, |m, x| m.max(x.abs())),
            Some(2.0) => v.into_iter().map(|x| x * x).sum::<f64>().sqrt(),
            Some(p) => {
                let vals: Vec<f64> = v.into_iter().map(f64::abs).collect();
                let scale = vals.iter().cloned().fold(0.0, f64::max);
                if scale == 0.0 {
                    return 0.0;
                }
                scale * vals.iter().map(|x| (x / scale).powf(p)).sum::<f64>().powf(1.0 / p)
            }
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::P(p) => write!(f, "{p}"),
            Norm::Infinity => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabeledPoint {
    pub coords: Vec<Rational>,
    /// 1-based class index.
    pub label: usize,
}

impl LabeledPoint {
    pub fn new(coords: Vec<Rational>, label: usize) -> Self {
        Self { coords, label }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords_f64(&self) -> Vec<f64> {
        self.coords.iter().map(to_f64).collect()
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Rescale weights exactly to sum to one.
    pub normalize: bool,
    /// Sum the weights of repeated (coords, label) pairs instead of failing.
    pub merge_duplicates: bool,
}

/// A finite labeled distribution with exact weights on the simplex.
///
/// Fields are private: every value of this type has positive weights summing
/// exactly to one, distinct support pairs, and labels in `1..=num_classes`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscreteDistribution {
    support: Vec<LabeledPoint>,
    weights: Vec<Rational>,
    num_classes: usize,
}

impl DiscreteDistribution {
    pub fn new(support: Vec<LabeledPoint>, weights: Vec<Rational>, num_classes: Option<usize>) -> Result<Self> {
        Self::with_options(support, Some(weights), num_classes, ParseOptions::default())
    }

    /// Uniform weights `1/n`.
    pub fn uniform(support: Vec<LabeledPoint>, num_classes: Option<usize>) -> Result<Self> {
        Self::with_options(support, None, num_classes, ParseOptions::default())
    }

    pub fn with_options(
        support: Vec<LabeledPoint>,
        weights: Option<Vec<Rational>>,
        num_classes: Option<usize>,
        options: ParseOptions,
    ) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::Validation("empty support".into()));
        }
        let n = support.len();
        let mut weights = match weights {
            Some(w) => {
                if w.len() != n {
                    return Err(Error::Validation(format!("{} weights for {n} support points", w.len())));
                }
                w
            }
            None => vec![Rational::new(1.into(), n.into()); n],
        };
        let dim = support[0].dim();
        for (i, p) in support.iter().enumerate() {
            if p.dim() != dim {
                return Err(Error::Validation(format!(
                    "dimension mismatch: point {i} has {} coordinates, expected {dim}",
                    p.dim()
                )));
            }
            if p.label == 0 {
                return Err(Error::Validation(format!("label of point {i} must be ≥ 1")));
            }
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !w.is_positive()) {
            return Err(Error::Validation(format!("weight {i} must be strictly positive, got {w}")));
        }

        let (support, weights_merged) = dedupe(support, weights, options.merge_duplicates)?;
        weights = weights_merged;

        let max_label = support.iter().map(|p| p.label).max().unwrap_or(1);
        let num_classes = num_classes.unwrap_or(max_label);
        if max_label > num_classes {
            return Err(Error::Validation(format!("label {max_label} out of range for {num_classes} classes")));
        }

        let total: Rational = weights.iter().sum();
        if !total.is_one() {
            if options.normalize {
                for w in &mut weights {
                    *w = &*w / &total;
                }
            } else {
                return Err(Error::Validation(format!("weights sum to {total} ≠ 1")));
            }
        }
        Ok(Self { support, weights, num_classes })
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.support[0].dim()
    }

    pub fn support(&self) -> &[LabeledPoint] {
        &self.support
    }

    pub fn point(&self, i: usize) -> &LabeledPoint {
        &self.support[i]
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn labels(&self) -> Vec<usize> {
        self.support.iter().map(|p| p.label).collect()
    }
}

fn dedupe(
    support: Vec<LabeledPoint>,
    weights: Vec<Rational>,
    merge: bool,
) -> Result<(Vec<LabeledPoint>, Vec<Rational>)> {
    let mut first_seen: HashMap<&LabeledPoint, usize> = HashMap::new();
    let mut duplicates = Vec::new();
    for (i, p) in support.iter().enumerate() {
        if let Some(&j) = first_seen.get(p) {
            duplicates.push((i, j));
        } else {
            first_seen.insert(p, i);
        }
    }
    if duplicates.is_empty() {
        return Ok((support, weights));
    }
    if !merge {
        let (i, j) = duplicates[0];
        return Err(Error::Validation(format!(
            "support points {j} and {i} are identical (coords and label); \
             use --merge-duplicates to sum their weights"
        )));
    }
    let mut out_points = Vec::new();
    let mut out_weights: Vec<Rational> = Vec::new();
    let mut slot: HashMap<LabeledPoint, usize> = HashMap::new();
    for (p, w) in support.into_iter().zip(weights) {
        match slot.get(&p) {
            Some(&k) => out_weights[k] += w,
            None => {
                slot.insert(p.clone(), out_points.len());
                out_points.push(p);
                out_weights.push(w);
            }
        }
    }
    Ok((out_points, out_weights))
}

/// A distribution together with the attack radius and norm: one dataset file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    pub distribution: DiscreteDistribution,
    pub epsilon: Epsilon,
    pub norm: Norm,
}

#[derive(Serialize)]
struct DatasetFile {
    epsilon: String,
    norm: String,
    points: Vec<Vec<String>>,
    labels: Vec<usize>,
    weights: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    num_classes: Option<usize>,
}

fn rational_from_json(v: &Value, what: &str) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        // arbitrary_precision keeps the literal text of numbers.
        Value::Number(n) => parse_rational(&n.to_string()),
        other => Err(Error::Parse(format!("{what}: expected a rational, got {other}"))),
    }
}

fn field<'a>(obj: &'a serde_json::Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::Parse(format!("missing field {key:?}")))
}

pub fn parse_dataset(text: &str, options: ParseOptions) -> Result<Dataset> {
    let root: Value = serde_json::from_str(text).map_err(|e| Error::Parse(format!("invalid JSON: {e}")))?;
    let obj = root.as_object().ok_or_else(|| Error::Parse("dataset must be a JSON object".into()))?;

    let epsilon = match field(obj, "epsilon")? {
        Value::String(s) => Epsilon::parse(s)?,
        v => Epsilon::new(rational_from_json(v, "epsilon")?)?,
    };
    let norm = match field(obj, "norm")? {
        Value::String(s) => Norm::parse(s)?,
        Value::Number(n) => Norm::parse(&n.to_string())?,
        other => return Err(Error::Parse(format!("norm: unexpected value {other}"))),
    };

    let points = field(obj, "points")?.as_array().ok_or_else(|| Error::Parse("points must be an array".into()))?;
    let labels = field(obj, "labels")?.as_array().ok_or_else(|| Error::Parse("labels must be an array".into()))?;
    if points.len() != labels.len() {
        return Err(Error::Validation(format!("{} points but {} labels", points.len(), labels.len())));
    }
    let mut support = Vec::with_capacity(points.len());
    for (i, (pt, lab)) in points.iter().zip(labels).enumerate() {
        let coords = pt
            .as_array()
            .ok_or_else(|| Error::Parse(format!("point {i} must be an array")))?
            .iter()
            .map(|c| rational_from_json(c, &format!("point {i}")))
            .collect::<Result<Vec<_>>>()?;
        let label = lab.as_u64().ok_or_else(|| Error::Parse(format!("label {i} must be a positive integer")))?;
        support.push(LabeledPoint::new(coords, label as usize));
    }

    let weights = match obj.get("weights") {
        None | Some(Value::Null) => None,
        Some(Value::Array(ws)) => Some(ws.iter().map(|w| rational_from_json(w, "weight")).collect::<Result<Vec<_>>>()?),
        Some(other) => return Err(Error::Parse(format!("weights: unexpected value {other}"))),
    };
    let num_classes = match obj.get("num_classes") {
        None | Some(Value::Null) => None,
        Some(v) => {
            Some(v.as_u64().ok_or_else(|| Error::Parse("num_classes must be a positive integer".into()))? as usize)
        }
    };

    let distribution = DiscreteDistribution::with_options(support, weights, num_classes, options)?;
    Ok(Dataset { distribution, epsilon, norm })
}

pub fn serialize_dataset(dataset: &Dataset) -> String {
    let dist = &dataset.distribution;
    let max_label = dist.support().iter().map(|p| p.label).max().unwrap_or(1);
    let file = DatasetFile {
        epsilon: dataset.epsilon.to_string(),
        norm: dataset.norm.to_string(),
        points: dist.support().iter().map(|p| p.coords.iter().map(format_rational).collect()).collect(),
        labels: dist.labels(),
        weights: dist.weights().iter().map(format_rational).collect(),
        num_classes: (dist.num_classes() != max_label).then_some(dist.num_classes()),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("dataset serializes");
    out.push('\n');
    out
}

/// Distinct labels never conflict; this set is used to check hyperedge labels.
pub(crate) fn labels_distinct(dist: &DiscreteDistribution, vertices: &[usize]) -> bool {
    let mut seen = HashSet::with_capacity(vertices.len());
    vertices.iter().all(|&v| seen.insert(dist.point(v).label))
}
