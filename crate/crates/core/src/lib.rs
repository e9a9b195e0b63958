//! Adversarial risk gaps between randomized and deterministic classifiers on
//! finite labeled distributions.
//!
//! The pipeline runs dataset → conflict graph / hypergraph → weighted packing
//! LP and IP → gap decomposition. Optimal deterministic and randomized
//! adversarial risks are `1 − IP` and `1 − FP` over the conflict hypergraph.

pub mod analysis;
pub mod classifier;
pub mod conflict;
pub mod constructions;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod packing;
pub mod rational;
pub mod simplex;

pub use dataset::{Dataset, DiscreteDistribution, LabeledPoint, Norm, ParseOptions};
pub use error::{Error, Result};
pub use graph::Graph;
pub use rational::{Epsilon, Rational};
