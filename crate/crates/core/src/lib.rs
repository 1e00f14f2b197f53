//! Exact localization engine for the stable-quotient theory of local P².
//!
//! Layers, bottom up: exact scalars, truncated series, the differential ring
//! of generators L, X, c, the I-function and its normalizations, the
//! asymptotic rows R, intersection numbers on moduli of curves, graph
//! localization, and the anomaly-equation checks.

pub mod anomaly;
pub mod error;
pub mod graphs;
pub mod localization;
pub mod scalars;
pub mod linalg;
pub mod lring;
pub mod mgn;
pub mod mirror;
pub mod rseries;
pub mod series;

pub use error::{Error, Result};
