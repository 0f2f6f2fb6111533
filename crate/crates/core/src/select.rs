//! Bucket selection with a partition count sketch, and the non-adaptive
//! count-sketch estimator that falls out of it under identity hashing.
//!
//! Buckets `J_d = {i : h_i = d}` come from a bucket hash `h: [m] → [D]`. Each
//! of `R` repetitions sorts the `D` buckets into `G` groups with its own hash
//! `H^(r): [D] → [G]` and measures one Rademacher functional per group, for
//! `R·G` stage-1 measurements in total. Bucket `d` is scored by the median of
//! the `R` absolute group values it fell into, and the `k` highest-scoring
//! buckets are returned.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};

use crate::error::{Error, Result};
use crate::measurement::{MeasurementOracle, Stage};
use crate::random::{BlockHasher, BucketHash, PairwiseHash, RademacherStream, Stream};
use crate::vector::{IndexSet, SparseVector};

/// Noise ratio `8√2` separating heavy buckets from light ones.
pub const SELECT_GAMMA: f64 = 8.0 * std::f64::consts::SQRT_2;

/// Parameters `(R, G, k)` of one bucket-selection run over `D` buckets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SelectParams {
    pub repetitions: usize,
    pub groups: u64,
    pub k: u64,
    pub buckets: u64,
}

impl SelectParams {
    pub fn new(repetitions: usize, groups: u64, k: u64, buckets: u64) -> Result<Self> {
        if repetitions == 0 || repetitions % 2 == 0 {
            return Err(Error::invalid(format!(
                "repetition count R must be odd and positive, got {repetitions}"
            )));
        }
        if repetitions > usize::from(u16::MAX) {
            return Err(Error::invalid("repetition count R too large"));
        }
        if groups == 0 {
            return Err(Error::invalid("group count G must be positive"));
        }
        if k == 0 || k > buckets {
            return Err(Error::invalid(format!(
                "selection size k must satisfy 1 <= k <= D, got k = {k}, D = {buckets}"
            )));
        }
        Ok(Self {
            repetitions,
            groups,
            k,
            buckets,
        })
    }

    /// The parameters under which all `ε`-heavy, `8√2`-isolated buckets are
    /// selected with probability at least `1 − δ₁`: odd `R` from
    /// [`repetitions_for`], `k = ⌊(8√2/ε)^p⌋` and `G = 4k`.
    pub fn for_guarantee(eps: f64, p: f64, delta1: f64, buckets: u64) -> Result<Self> {
        let k = selection_size(eps, p)?;
        let r = repetitions_for(buckets, delta1)?;
        Self::new(r, 4 * k, k.min(buckets), buckets)
    }
}

/// `R = 2⌈log₂(D/(2δ₁)) − 1/2⌉ + 1`, the smallest odd integer `≥ 2 log₂(D/(2δ₁))`.
pub fn repetitions_for(buckets: u64, delta1: f64) -> Result<usize> {
    if !(delta1 > 0.0 && delta1 < 1.0) {
        return Err(Error::invalid(format!("δ₁ must lie in (0,1), got {delta1}")));
    }
    let half = ((buckets as f64 / (2.0 * delta1)).log2() - 0.5).ceil().max(0.0);
    if half > 1e6 {
        return Err(Error::Overflow {
            formula: "R = 2⌈log₂(D/(2δ₁)) − 1/2⌉ + 1",
            value: half,
        });
    }
    Ok(2 * half as usize + 1)
}

/// `k = ⌊2^{7p/2} ε^{−p}⌋ = ⌊(8√2/ε)^p⌋`.
pub fn selection_size(eps: f64, p: f64) -> Result<u64> {
    let k = ((3.5 * p).exp2() * eps.powf(-p)).floor();
    if !k.is_finite() || k >= (1u64 << 40) as f64 {
        return Err(Error::Overflow {
            formula: "k = ⌊2^{7p/2} ε^{-p}⌋",
            value: k,
        });
    }
    Ok((k as u64).max(1))
}

/// The stored sketch: group hashes, sign streams and the `R × G` measurements.
#[derive(Clone, Debug)]
pub struct SketchState {
    bucket_hash: BucketHash,
    group_hashes: Vec<PairwiseHash>,
    signs: Vec<RademacherStream>,
    y: Vec<f64>,
    groups: u64,
}

/// Measures the sketch `Y[r][g] = Σ_{i : H^(r)(h_i) = g} σ_{r,i} x_i`.
///
/// Charges exactly `R·G` measurements to stage 1.
pub fn build_sketch(
    oracle: &mut MeasurementOracle,
    bucket_hash: BucketHash,
    params: &SelectParams,
    stream: &Stream,
) -> Result<SketchState> {
    if bucket_hash.range() != params.buckets {
        return Err(Error::invalid(format!(
            "bucket hash range {} does not match D = {}",
            bucket_hash.range(),
            params.buckets
        )));
    }
    let r_count = params.repetitions;
    let g_count = params.groups;
    let mut group_hashes = Vec::with_capacity(r_count);
    let mut signs = Vec::with_capacity(r_count);
    let mut y = Vec::with_capacity(r_count * g_count as usize);
    for r in 0..r_count as u64 {
        let gh = PairwiseHash::new(&stream.derive("group", r), g_count)?;
        let sg = stream.derive("sign", r).rademacher();
        for g in 1..=g_count {
            let reading = oracle.measure(Stage::Select, |i| {
                if gh.eval(bucket_hash.eval(i) - 1) == g {
                    sg.sign(i)
                } else {
                    0.0
                }
            });
            y.push(f64::from(reading));
        }
        group_hashes.push(gh);
        signs.push(sg);
    }
    Ok(SketchState {
        bucket_hash,
        group_hashes,
        signs,
        y,
        groups: g_count,
    })
}

impl SketchState {
    pub fn repetitions(&self) -> usize {
        self.group_hashes.len()
    }

    pub fn groups(&self) -> u64 {
        self.groups
    }

    pub fn buckets(&self) -> u64 {
        self.bucket_hash.range()
    }

    pub fn bucket_hash(&self) -> &BucketHash {
        &self.bucket_hash
    }

    /// The stored measurement `Y[r][g]`, `g` 1-based.
    pub fn measurement(&self, r: usize, g: u64) -> f64 {
        self.y[r * self.groups as usize + (g - 1) as usize]
    }

    /// `Ŷ_{r,d}`: the measurement of the group bucket `d` fell into in repetition `r`.
    #[inline]
    pub fn bucket_value(&self, r: usize, d: u64) -> f64 {
        self.measurement(r, self.group_hashes[r].eval(d - 1))
    }

    /// `Z_d = median_r |Ŷ_{r,d}|`. Reuses the stored sketch; no oracle calls.
    pub fn bucket_score(&self, d: u64) -> f64 {
        let mut v: Vec<f64> = (0..self.repetitions())
            .map(|r| self.bucket_value(r, d).abs())
            .collect();
        median_in_place(&mut v)
    }

    /// Scores for the given buckets.
    pub fn scores<I: IntoIterator<Item = u64>>(&self, buckets: I) -> BucketScores {
        BucketScores::new(buckets.into_iter().map(|d| (d, self.bucket_score(d))).collect())
    }

    /// The count-sketch estimate `median_r σ_{r,i} Ŷ_{r,i}` of `x_i`.
    ///
    /// Only meaningful under identity bucket hashing, where bucket `i + 1`
    /// is the singleton `{i}`.
    pub fn count_sketch_estimate(&self, i: u64) -> Result<f64> {
        if !self.bucket_hash.is_identity() {
            return Err(Error::invalid(
                "count-sketch estimates need the identity bucket hash",
            ));
        }
        if i >= self.buckets() {
            return Err(Error::IndexOutOfRange {
                index: i,
                dim: self.buckets(),
            });
        }
        let mut v: Vec<f64> = (0..self.repetitions())
            .map(|r| self.signs[r].sign(i) * self.bucket_value(r, i + 1))
            .collect();
        Ok(median_in_place(&mut v))
    }
}

/// Free-function form of [`SketchState::bucket_score`].
pub fn bucket_score(state: &SketchState, d: u64) -> f64 {
    state.bucket_score(d)
}

/// Free-function form of [`SketchState::count_sketch_estimate`].
pub fn count_sketch_estimate(state: &SketchState, i: u64) -> Result<f64> {
    state.count_sketch_estimate(i)
}

/// Median of an odd-length slice. Reorders the slice.
fn median_in_place(v: &mut [f64]) -> f64 {
    debug_assert!(v.len() % 2 == 1);
    let mid = v.len() / 2;
    *v.select_nth_unstable_by(mid, f64::total_cmp).1
}

/// Bucket scores `Z_d` keyed by bucket id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BucketScores(Vec<(u64, f64)>);

impl BucketScores {
    pub fn new(mut scores: Vec<(u64, f64)>) -> Self {
        scores.sort_unstable_by_key(|&(d, _)| d);
        Self(scores)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.0.iter().copied()
    }
}

/// Score ordering: higher score first, then smaller bucket id.
#[derive(Clone, Copy, Debug)]
struct Ranked {
    score: f64,
    id: u64,
}

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Ranked {}

/// The `k` best-scored buckets; ties go to the smaller bucket id.
pub fn select_top_k(scores: &BucketScores, k: usize) -> Result<IndexSet> {
    if k > scores.len() {
        return Err(Error::invalid(format!(
            "cannot select {k} of {} buckets",
            scores.len()
        )));
    }
    let mut ranked: Vec<Ranked> = scores.iter().map(|(id, score)| Ranked { score, id }).collect();
    ranked.sort_unstable_by(|a, b| b.cmp(a));
    Ok(ranked[..k].iter().map(|r| r.id).collect())
}

const SCAN_BLOCK: usize = 2048;

/// Top-`k` selection over every bucket `d ∈ [D]`, in `O(k)` memory.
///
/// Buckets are visited in increasing id order. Once `k` buckets are held, a
/// new bucket can only enter if its score strictly exceeds the current
/// `k`-th best `t`, which happens iff at least `(R+1)/2` of its values
/// `|Ŷ_{r,d}|` exceed `t`. That count is accumulated block by block with
/// incremental hash cursors; the exact median is only computed for buckets
/// that pass. Returns the same set as [`select_top_k`] over all `D` scores.
pub fn select_streaming(state: &SketchState, k: u64) -> Result<IndexSet> {
    let total = state.buckets();
    if k == 0 || k > total {
        return Err(Error::invalid(format!(
            "selection size k must satisfy 1 <= k <= D, got k = {k}, D = {total}"
        )));
    }
    let reps = state.repetitions();
    let groups = state.groups as usize;
    let need = (reps + 1) / 2;

    let mut heap: BinaryHeap<Reverse<Ranked>> = BinaryHeap::with_capacity(k as usize + 1);
    for d in 1..=k {
        heap.push(Reverse(Ranked {
            score: state.bucket_score(d),
            id: d,
        }));
    }

    let abs_y: Vec<f64> = state.y.iter().map(|v| v.abs()).collect();
    let mut above = vec![0u16; reps * groups];
    let mut threshold = f64::NAN;
    let mut counts = [0u16; SCAN_BLOCK];
    let mut slots = [0u64; SCAN_BLOCK];
    let hashers: Vec<BlockHasher> = state.group_hashes.iter().map(BlockHasher::new).collect();

    let mut next = k + 1;
    while next <= total {
        let len = SCAN_BLOCK.min((total - next + 1) as usize);
        let t = heap.peek().map(|w| w.0.score).unwrap_or(f64::NEG_INFINITY);
        if t.to_bits() != threshold.to_bits() {
            for (flag, v) in above.iter_mut().zip(&abs_y) {
                *flag = u16::from(*v > t);
            }
            threshold = t;
        }
        let counts = &mut counts[..len];
        counts.fill(0);
        let mut alive = true;
        for r in 0..reps {
            let row = &above[r * groups..(r + 1) * groups];
            let slots = &mut slots[..len];
            hashers[r].fill_zero_based(next - 1, slots);
            for (c, &g) in counts.iter_mut().zip(slots.iter()) {
                *c += row[g as usize];
            }
            let remaining = reps - r - 1;
            if remaining < need {
                let best = counts.iter().copied().max().unwrap_or(0) as usize;
                if best + remaining < need {
                    alive = false;
                    break;
                }
            }
        }
        if alive {
            for (b, &c) in counts.iter().enumerate() {
                if (c as usize) < need {
                    continue;
                }
                let cand = Ranked {
                    score: state.bucket_score(next + b as u64),
                    id: next + b as u64,
                };
                let worst = heap.peek().expect("heap holds k >= 1 entries").0;
                if cand > worst {
                    heap.pop();
                    heap.push(Reverse(cand));
                }
            }
        }
        next += len as u64;
    }
    Ok(heap.into_iter().map(|Reverse(r)| r.id).collect())
}

/// Squared `ℓ₂` norm of every nonempty bucket.
fn bucket_energy(x: &SparseVector, hash: &BucketHash) -> HashMap<u64, Vec<(u64, f64)>> {
    let mut buckets: HashMap<u64, Vec<(u64, f64)>> = HashMap::new();
    for (i, v) in x.iter() {
        buckets.entry(hash.eval(i)).or_default().push((i, v));
    }
    buckets
}

/// The important buckets `Q`: buckets holding some `j` with `|x_j| ≥ ε` and
/// `‖x_{J_d∖{j}}‖₂ ≤ |x_j|/(8√2)`.
///
/// Needs the whole vector, so this is a test-side diagnostic.
pub fn compute_q(x: &SparseVector, bucket_hash: &BucketHash, eps: f64) -> IndexSet {
    bucket_energy(x, bucket_hash)
        .into_iter()
        .filter(|(_, members)| {
            members.iter().any(|&(j, xj)| {
                let rest: f64 = members
                    .iter()
                    .filter(|&&(i, _)| i != j)
                    .map(|&(_, v)| v * v)
                    .sum::<f64>()
                    .sqrt();
                xj.abs() >= eps && rest <= xj.abs() / SELECT_GAMMA
            })
        })
        .map(|(d, _)| d)
        .collect()
}

/// Number of buckets with `‖x_{J_d}‖₂ ≥ threshold`.
pub fn heavy_bucket_count(x: &SparseVector, bucket_hash: &BucketHash, threshold: f64) -> usize {
    bucket_energy(x, bucket_hash)
        .values()
        .filter(|members| members.iter().map(|&(_, v)| v * v).sum::<f64>().sqrt() >= threshold)
        .count()
}

/// `‖x_{B_j ∖ {j}}‖_p`: the mass sharing `j`'s bucket.
pub fn bucket_residual_norm(x: &SparseVector, bucket_hash: &BucketHash, j: u64, p: f64) -> f64 {
    let target = bucket_hash.eval(j);
    x.iter()
        .filter(|&(i, _)| i != j && bucket_hash.eval(i) == target)
        .map(|(_, v)| v.abs().powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}
