//! Adaptive uniform approximation of vectors from linear measurements.
//!
//! Given measurement access to `x ∈ ℝ^m`, [`pipeline::approximate`] returns a
//! sparse `z` with `‖x − z‖_∞ ≤ ε‖x‖_p` with probability at least `1 − δ`,
//! using `O(ε^{-p} log(1/δ) log log m)`-style budgets: a count sketch over
//! hashed buckets picks candidate buckets, adaptive spotting isolates one
//! coordinate per bucket, and direct queries read the values.

pub mod error;
pub mod harness;
pub mod io;
pub mod measurement;
pub mod pipeline;
pub mod random;
pub mod select;
pub mod spot;
pub mod vector;

pub use error::{Error, Result};
pub use measurement::{CostLedger, MeasurementOracle, Stage};
pub use pipeline::{approximate, derive_params, AlgoParams, ApproxOutput, Mode, Variant};
pub use random::{SeedSpec, Stream};
pub use vector::{IndexSet, SparseVector};
