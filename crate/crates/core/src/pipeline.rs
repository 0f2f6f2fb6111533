//! The three-stage approximation: select heavy buckets, spot one coordinate
//! in each, then read the spotted coordinates directly.

use crate::error::{Error, Result};
use crate::measurement::{CostLedger, MeasurementOracle};
use crate::random::{BucketHash, PairwiseHash, Stream};
use crate::select::{build_sketch, repetitions_for, select_streaming, selection_size, SelectParams};
use crate::spot::{iid_condition_threshold, kstar, spot, CandidateSet, SpotSchedule, EXPLICIT_LIMIT};
use crate::vector::{IndexSet, SparseVector};

pub use crate::spot::{Mode, Variant};

/// Every constant the algorithm derives from `(p, ε, δ, m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgoParams {
    pub p: f64,
    pub eps: f64,
    pub delta: f64,
    pub m: u64,
    pub variant: Variant,
    /// `⌊ε^{-p}⌋`, the most coordinates that can reach `ε‖x‖_p`.
    pub k0: u64,
    /// Per-bucket spotting failure probability `δ/(2k0)`.
    pub alpha: f64,
    /// Isolation ratio spotting needs.
    pub gamma: f64,
    /// Number of buckets `D`.
    pub buckets: u64,
    /// Sketch repetitions `R`.
    pub repetitions: usize,
    /// Groups per repetition `G = 4k`.
    pub groups: u64,
    /// Buckets kept by selection.
    pub k: u64,
    pub delta0: f64,
    pub delta1: f64,
}

/// Derives the parameters, failing if a constant overflows `u64`.
pub fn derive_params(p: f64, eps: f64, delta: f64, m: u64, variant: Variant) -> Result<AlgoParams> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::invalid(format!("p must lie in [1,2], got {p}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("ε must lie in (0,1), got {eps}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("δ must lie in (0,1), got {delta}")));
    }
    if m < 2 {
        return Err(Error::invalid(format!("m must be at least 2, got {m}")));
    }
    let k0 = eps.powf(-p).floor();
    if k0 >= 2f64.powi(53) {
        return Err(Error::Overflow {
            formula: "k0 = ⌊ε^{-p}⌋",
            value: k0,
        });
    }
    let k0 = k0 as u64;
    let alpha = delta / (2.0 * k0 as f64);
    let gamma = iid_condition_threshold(alpha, variant);
    let delta0 = delta / 4.0;
    let delta1 = delta / 4.0;
    let buckets = (gamma_pow(alpha, p, variant) * eps.powf(-p) * k0 as f64 / delta0).ceil();
    if !buckets.is_finite() || buckets > 2f64.powi(63) {
        return Err(Error::Overflow {
            formula: "D = ⌈(γ/ε)^p·k0/δ0⌉",
            value: buckets,
        });
    }
    let buckets = buckets as u64;
    let repetitions = repetitions_for(buckets, delta1)?;
    let k = selection_size(eps, p)?;
    Ok(AlgoParams {
        p,
        eps,
        delta,
        m,
        variant,
        k0,
        alpha,
        gamma,
        buckets,
        repetitions,
        groups: 4 * k,
        k,
        delta0,
        delta1,
    })
}

/// `γ^p`, kept free of rounding when `α` is a power of two and `p = 2`.
fn gamma_pow(alpha: f64, p: f64, variant: Variant) -> f64 {
    match variant {
        Variant::Pairwise => 2049f64.powf(p) * (2.0 / (alpha * alpha * alpha)).powf(p / 2.0),
        Variant::Iid => iid_condition_threshold(alpha, variant).powf(p),
    }
}

impl AlgoParams {
    /// `D ≥ m`: hashing cannot help, so buckets are single coordinates.
    pub fn trivial_branch(&self) -> bool {
        self.buckets >= self.m
    }

    /// The schedule of spotting hash ranges for this `m` and `α`.
    pub fn spot_schedule(&self) -> Result<SpotSchedule> {
        SpotSchedule::for_dim(self.alpha, self.m)
    }
}

/// Worst-case measurement counts, as predicted from the parameters alone.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PredictedCost {
    pub n1: u64,
    pub n2_max: u64,
    pub n3_max: u64,
    pub kstar: u32,
}

impl PredictedCost {
    pub fn total_max(&self) -> u64 {
        self.n1 + self.n2_max + self.n3_max
    }
}

/// `n1 = R·G`, `n2 ≤ k(2k*+2)`, `n3 ≤ k`.
pub fn predicted_cost(params: &AlgoParams) -> Result<PredictedCost> {
    let ks = kstar(params.m)?;
    Ok(PredictedCost {
        n1: params.repetitions as u64 * params.groups,
        n2_max: params.k * (2 * u64::from(ks) + 2),
        n3_max: params.k,
        kstar: ks,
    })
}

/// What one bucket's spotting produced.
#[derive(Clone, Debug, PartialEq)]
pub struct BucketSpot {
    pub bucket: u64,
    pub found: Option<u64>,
    pub measurements: u64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub trivial_branch: bool,
    /// Buckets kept by selection.
    pub buckets: IndexSet,
    pub spots: Vec<BucketSpot>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApproxOutput {
    /// The approximation, supported on `selected`.
    pub z: SparseVector,
    /// Coordinates read directly.
    pub selected: IndexSet,
    pub ledger: CostLedger,
    pub diagnostics: Diagnostics,
}

/// Runs selection, spotting and direct reads against `oracle`.
///
/// All randomness comes from `stream`; equal streams give equal outputs.
pub fn approximate(
    oracle: &mut MeasurementOracle,
    params: &AlgoParams,
    mode: Mode,
    stream: &Stream,
) -> Result<ApproxOutput> {
    let m = oracle.dim();
    if m != params.m {
        return Err(Error::DimensionMismatch {
            left: m,
            right: params.m,
        });
    }
    if mode == Mode::Explicit && m > EXPLICIT_LIMIT {
        return Err(Error::invalid(format!(
            "explicit mode supports m <= {EXPLICIT_LIMIT}, got {m}"
        )));
    }

    let mut diagnostics = Diagnostics {
        trivial_branch: params.trivial_branch(),
        ..Diagnostics::default()
    };
    let selected = if params.trivial_branch() {
        let hash = BucketHash::Identity { m };
        let sp = SelectParams::new(params.repetitions, params.groups, params.k.min(m), m)?;
        let sketch = build_sketch(oracle, hash, &sp, &stream.derive("select", 0))?;
        let chosen = select_streaming(&sketch, sp.k)?;
        let selected = chosen.iter().map(|d| d - 1).collect();
        diagnostics.buckets = chosen;
        selected
    } else {
        let hash = BucketHash::Pairwise(PairwiseHash::new(
            &stream.derive("bucket-hash", 0),
            params.buckets,
        )?);
        let sp = SelectParams::new(params.repetitions, params.groups, params.k, params.buckets)?;
        let sketch = build_sketch(oracle, hash, &sp, &stream.derive("select", 0))?;
        let chosen = select_streaming(&sketch, sp.k)?;
        let schedule = params.spot_schedule()?;
        let mut starts = match mode {
            Mode::Implicit => chosen.iter().map(|d| (d, CandidateSet::bucket(hash, d))).collect(),
            Mode::Explicit => explicit_buckets(&hash, &chosen, m),
        };
        let mut found = Vec::new();
        for (d, start) in starts.drain(..) {
            let out = spot(oracle, start, &schedule, &stream.derive("spot", d))?;
            let hit = out.found.iter().next();
            found.extend(hit);
            diagnostics.spots.push(BucketSpot {
                bucket: d,
                found: hit,
                measurements: out.measurements,
            });
        }
        diagnostics.buckets = chosen;
        IndexSet::from_unsorted(found)
    };

    let mut entries = Vec::with_capacity(selected.len());
    for i in selected.iter() {
        entries.push((i, oracle.query_entry(i)?));
    }
    Ok(ApproxOutput {
        z: SparseVector::from_entries(m, entries)?,
        selected,
        ledger: oracle.cost_report(),
        diagnostics,
    })
}

/// Enumerates the chosen buckets with one pass over `[m]`.
fn explicit_buckets(hash: &BucketHash, chosen: &IndexSet, m: u64) -> Vec<(u64, CandidateSet)> {
    let mut members: Vec<Vec<u64>> = vec![Vec::new(); chosen.len()];
    for i in 0..m {
        if let Some(r) = chosen.rank(hash.eval(i)) {
            members[r].push(i);
        }
    }
    chosen
        .iter()
        .zip(members)
        .map(|(d, v)| (d, CandidateSet::Explicit(IndexSet::from_unsorted(v))))
        .collect()
}

/// The expected-error form: runs with `ε/2` and `δ = ε/2`, so that
/// `E‖x − z‖_∞ ≤ ε‖x‖_p`.
pub fn approximate_expected(
    oracle: &mut MeasurementOracle,
    p: f64,
    eps: f64,
    variant: Variant,
    mode: Mode,
    stream: &Stream,
) -> Result<ApproxOutput> {
    let params = derive_params(p, eps / 2.0, eps / 2.0, oracle.dim(), variant)?;
    approximate(oracle, &params, mode, stream)
}

/// `ε' = m^{-(1/2 − 1/p)}·ε`: an `ℓ₂` guarantee at `ε'` gives an `ℓ_p`
/// guarantee at `ε` for `p > 2`.
pub fn reduced_eps(p: f64, eps: f64, m: u64) -> Result<f64> {
    if !(p > 2.0 && p.is_finite()) {
        return Err(Error::invalid(format!("p must be finite and > 2, got {p}")));
    }
    let reduced = (m as f64).powf(-(0.5 - 1.0 / p)) * eps;
    if !(reduced > 0.0 && reduced < 1.0) {
        return Err(Error::invalid(format!("reduced ε' = {reduced} outside (0,1)")));
    }
    Ok(reduced)
}

/// The `p > 2` reduction: the `p = 2` expected-error algorithm run at `ε'`.
pub fn approximate_p_gt2(
    oracle: &mut MeasurementOracle,
    p: f64,
    eps: f64,
    variant: Variant,
    mode: Mode,
    stream: &Stream,
) -> Result<ApproxOutput> {
    let reduced = reduced_eps(p, eps, oracle.dim())?;
    approximate_expected(oracle, 2.0, reduced, variant, mode, stream)
}
