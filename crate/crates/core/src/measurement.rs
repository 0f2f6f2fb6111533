//! The measurement oracle: the only way the algorithms see the input.
//!
//! A linear functional is given by its coefficient function `i ↦ c_i`; the
//! oracle returns `Σ c_i x_i` and charges one unit to the stage that asked.
//! Coefficients are never materialized as arrays, so `m` may be far larger
//! than memory.
//!
//! Sums are accumulated in double-double arithmetic. The spotting stage forms
//! coefficients of magnitude up to `2^57` and then needs the ratio of two
//! readings to within `1/2`, which is beyond plain `f64`.

use serde::ser::{Serialize, SerializeStruct, Serializer};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::vector::SparseVector;

/// Which part of the algorithm a linear measurement is charged to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    /// Stage 1: the bucket-selection sketch.
    Select,
    /// Stage 2: adaptive one-sparse recovery.
    Spot,
}

/// Per-stage measurement counters.
///
/// `n3` counts direct entry queries only.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CostLedger {
    pub n1: u64,
    pub n2: u64,
    pub n3: u64,
}

impl Serialize for CostLedger {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("CostLedger", 4)?;
        s.serialize_field("n1", &self.n1)?;
        s.serialize_field("n2", &self.n2)?;
        s.serialize_field("n3", &self.n3)?;
        s.serialize_field("total", &self.total())?;
        s.end()
    }
}

impl CostLedger {
    pub fn total(&self) -> u64 {
        self.n1 + self.n2 + self.n3
    }

    pub const CSV_HEADER: [&'static str; 4] = ["n1", "n2", "n3", "total"];

    pub fn csv_fields(&self) -> [String; 4] {
        [self.n1, self.n2, self.n3, self.total()].map(|v| v.to_string())
    }

    /// Componentwise `self >= earlier`.
    pub fn dominates(&self, earlier: &CostLedger) -> bool {
        self.n1 >= earlier.n1 && self.n2 >= earlier.n2 && self.n3 >= earlier.n3
    }
}

/// Holds the hidden vector and charges every access to a [`CostLedger`].
#[derive(Debug)]
pub struct MeasurementOracle {
    hidden: SparseVector,
    ledger: CostLedger,
}

impl MeasurementOracle {
    pub fn new(hidden: SparseVector) -> Self {
        Self {
            hidden,
            ledger: CostLedger::default(),
        }
    }

    /// Dimension `m` of the hidden vector. This is public information.
    pub fn dim(&self) -> u64 {
        self.hidden.dim()
    }

    /// Evaluates the functional `x ↦ Σ_i coeff(i)·x_i`.
    ///
    /// Only the support of the hidden vector is visited; zero entries
    /// contribute nothing to the sum.
    pub fn measure<C, F>(&mut self, stage: Stage, coeff: F) -> TwoFloat
    where
        C: Into<TwoFloat>,
        F: Fn(u64) -> C,
    {
        match stage {
            Stage::Select => self.ledger.n1 += 1,
            Stage::Spot => self.ledger.n2 += 1,
        }
        let mut acc = TwoFloat::from(0.0);
        for (i, v) in self.hidden.iter() {
            let c: TwoFloat = coeff(i).into();
            if c != 0.0 {
                acc += c * v;
            }
        }
        acc
    }

    /// Reads `x_i` directly. Charged to `n3` whether or not the entry is zero.
    pub fn query_entry(&mut self, i: u64) -> Result<f64> {
        if i >= self.hidden.dim() {
            return Err(Error::IndexOutOfRange {
                index: i,
                dim: self.hidden.dim(),
            });
        }
        self.ledger.n3 += 1;
        Ok(self.hidden.get(i))
    }

    pub fn cost_report(&self) -> CostLedger {
        self.ledger
    }
}
