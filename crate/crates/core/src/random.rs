//! Seedable randomness: derived sub-streams, pairwise-independent hashing and
//! Rademacher sign streams.
//!
//! Every random choice made by the algorithms is a pure function of a
//! [`Stream`], and streams are derived from a master seed along a path of
//! `(label, counter)` pairs. Two runs with the same master seed therefore
//! draw identical hashes and signs regardless of the input vector.
//!
//! The hash family is `i ↦ 1 + ((a·(i+1) + b) mod P) mod D` with the Mersenne
//! prime `P = 2^61 − 1`. Over indices `i < P` the pair `(H_i, H_j)` of an
//! affine map mod `P` is uniform, so after the final reduction mod `D` each
//! value has probability within `D/P` of `1/D`; for `D ≤ 2^40` that deviation
//! is at most `2^-21`. Indices `i` and `i + P` always collide, so exact pairwise
//! independence only holds on domains of size at most `P`.

use multiversion::multiversion;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// The Mersenne prime `2^61 − 1`.
pub const MERSENNE_61: u64 = (1 << 61) - 1;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn label_hash(label: &str) -> u64 {
    // FNV-1a, then mixed.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    mix64(h)
}

/// The root of all randomness for one run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedSpec {
    master: u64,
}

impl SeedSpec {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// The stream at the empty path.
    pub fn root(&self) -> Stream {
        Stream {
            key: mix64(self.master ^ GOLDEN),
        }
    }

    /// Shorthand for `self.root().derive(label, counter)`.
    pub fn derive(&self, label: &str, counter: u64) -> Stream {
        self.root().derive(label, counter)
    }
}

/// A handle on an independent pseudo-random stream.
///
/// Streams are counter-based: [`Stream::word`] is a pure function of the
/// stream and the position, so a stream can be shared by value and evaluated
/// in any order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Stream {
    key: u64,
}

impl Stream {
    /// Derives the child stream at `(label, counter)`.
    pub fn derive(&self, label: &str, counter: u64) -> Stream {
        let k = mix64(self.key ^ label_hash(label));
        Stream {
            key: mix64(k.wrapping_add(mix64(counter.wrapping_add(GOLDEN)))),
        }
    }

    /// The `i`-th 64-bit output word.
    #[inline]
    pub fn word(&self, i: u64) -> u64 {
        mix64(mix64(i ^ self.key).wrapping_add(self.key.rotate_left(29)))
    }

    /// A sequential generator seeded from this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.key)
    }

    pub fn rademacher(&self) -> RademacherStream {
        RademacherStream(*self)
    }
}

/// Derives the sub-stream `(label, counter)` of `seed`.
pub fn derive_stream(seed: &SeedSpec, label: &str, counter: u64) -> Stream {
    seed.derive(label, counter)
}

/// Independent uniform signs `σ_i ∈ {−1, +1}`, one per index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RademacherStream(Stream);

impl RademacherStream {
    #[inline]
    pub fn sign(&self, i: u64) -> f64 {
        if self.0.word(i) >> 63 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Free-function form of [`RademacherStream::sign`].
pub fn rademacher(stream: &RademacherStream, i: u64) -> f64 {
    stream.sign(i)
}

#[inline]
fn reduce(v: u64) -> u64 {
    // v < 2^63 + P is enough for one fold plus one conditional subtraction.
    let r = (v & MERSENNE_61) + (v >> 61);
    if r >= MERSENNE_61 {
        r - MERSENNE_61
    } else {
        r
    }
}

#[inline]
fn mul_mod(a: u64, b: u64) -> u64 {
    let z = u128::from(a) * u128::from(b);
    let lo = (z as u64) & MERSENNE_61;
    let hi = (z >> 61) as u64;
    reduce(lo + hi)
}

/// A member of the pairwise-independent family `[m] → [D]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairwiseHash {
    a: u64,
    b: u64,
    range: u64,
}

impl PairwiseHash {
    /// Draws `a ∈ [1, P)` and `b ∈ [0, P)` uniformly.
    pub fn new(stream: &Stream, range: u64) -> Result<Self> {
        if range == 0 {
            return Err(Error::invalid("hash range D must be at least 1"));
        }
        let mut rng = stream.rng();
        Ok(Self {
            a: rng.random_range(1..MERSENNE_61),
            b: rng.random_range(0..MERSENNE_61),
            range,
        })
    }

    /// Fixed coefficients, reduced mod `P`. `a = 0` gives a constant hash.
    pub fn from_coefficients(a: u64, b: u64, range: u64) -> Result<Self> {
        if range == 0 {
            return Err(Error::invalid("hash range D must be at least 1"));
        }
        Ok(Self {
            a: reduce(a),
            b: reduce(b),
            range,
        })
    }

    pub fn range(&self) -> u64 {
        self.range
    }

    /// `(a·(i+1) + b) mod P`.
    #[inline]
    fn raw(&self, i: u64) -> u64 {
        let x = reduce(reduce(i) + 1);
        reduce(mul_mod(self.a, x) + self.b)
    }

    /// Hash value of index `i`, in `1..=D`.
    #[inline]
    pub fn eval(&self, i: u64) -> u64 {
        1 + self.raw(i) % self.range
    }

    /// Iterates hash values of `start, start + 1, ...` using additions only.
    pub fn cursor(&self, start: u64) -> HashCursor {
        let s = self.raw(start);
        HashCursor {
            s,
            s_mod: s % self.range,
            a: self.a,
            a_mod: self.a % self.range,
            p_mod: MERSENNE_61 % self.range,
            range: self.range,
        }
    }
}

/// Free-function form of [`PairwiseHash::new`].
pub fn pairwise_hash_new(stream: &Stream, range: u64) -> Result<PairwiseHash> {
    PairwiseHash::new(stream, range)
}

/// Free-function form of [`PairwiseHash::eval`].
pub fn hash_eval(h: &PairwiseHash, i: u64) -> u64 {
    h.eval(i)
}

/// Sequential evaluation of a [`PairwiseHash`] over consecutive indices.
///
/// Tracks `s = (a·(i+1) + b) mod P` and `s mod D` incrementally.
#[derive(Clone, Debug)]
pub struct HashCursor {
    s: u64,
    s_mod: u64,
    a: u64,
    a_mod: u64,
    p_mod: u64,
    range: u64,
}

impl HashCursor {
    /// Current value as a 0-based hash value (`eval − 1`), then advances.
    #[inline(always)]
    pub fn next_zero_based(&mut self) -> u64 {
        let out = self.s_mod;
        let mut s = self.s + self.a;
        let mut m = self.s_mod + self.a_mod;
        if m >= self.range {
            m -= self.range;
        }
        if s >= MERSENNE_61 {
            s -= MERSENNE_61;
            m = if m >= self.p_mod {
                m - self.p_mod
            } else {
                m + (self.range - self.p_mod)
            };
        }
        self.s = s;
        self.s_mod = m;
        out
    }
}

/// Evaluates a [`PairwiseHash`] over runs of consecutive indices, stepping
/// several interleaved lanes at once.
#[derive(Clone, Debug)]
pub struct BlockHasher {
    hash: PairwiseHash,
    step: u64,
    step_mod: u64,
    p_mod: u64,
}

const LANES: usize = 8;

impl BlockHasher {
    pub fn new(hash: &PairwiseHash) -> Self {
        let step = mul_mod(hash.a, LANES as u64);
        Self {
            hash: *hash,
            step,
            step_mod: step % hash.range,
            p_mod: MERSENNE_61 % hash.range,
        }
    }

    /// Writes `eval(start + t) − 1` to `out[t]`.
    pub fn fill_zero_based(&self, start: u64, out: &mut [u64]) {
        let range = self.hash.range;
        let mut s = [0u64; LANES];
        let mut sm = [0u64; LANES];
        for l in 0..LANES {
            s[l] = self.hash.raw(start.wrapping_add(l as u64));
            sm[l] = s[l] % range;
        }
        fill_lanes(s, sm, [self.step, self.step_mod, self.p_mod, range], out);
    }
}

#[multiversion(targets("x86_64+avx512f+avx512vl", "x86_64+avx2", "aarch64+neon"))]
fn fill_lanes(mut s: [u64; LANES], mut sm: [u64; LANES], consts: [u64; 4], out: &mut [u64]) {
    let [step, step_mod, p_mod, range] = consts;
    let mask = |b: bool| (b as u64).wrapping_neg();
    let mut chunks = out.chunks_exact_mut(LANES);
    for chunk in &mut chunks {
        for l in 0..LANES {
            chunk[l] = sm[l];
            let next = s[l].wrapping_add(step);
            let wrap = mask(next >= MERSENNE_61);
            s[l] = next.wrapping_sub(MERSENNE_61 & wrap);
            let m = sm[l].wrapping_add(step_mod);
            let m = m.wrapping_sub(range & mask(m >= range));
            let m = m.wrapping_add(range.wrapping_sub(p_mod) & wrap);
            sm[l] = m.wrapping_sub(range & mask(m >= range));
        }
    }
    for (o, v) in chunks.into_remainder().iter_mut().zip(sm) {
        *o = v;
    }
}

/// The hash that assigns indices to buckets: either a random pairwise hash
/// or the identity `i ↦ i + 1` over `[m]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BucketHash {
    Pairwise(PairwiseHash),
    Identity { m: u64 },
}

impl BucketHash {
    #[inline]
    pub fn eval(&self, i: u64) -> u64 {
        match self {
            BucketHash::Pairwise(h) => h.eval(i),
            BucketHash::Identity { .. } => i + 1,
        }
    }

    pub fn range(&self) -> u64 {
        match self {
            BucketHash::Pairwise(h) => h.range(),
            BucketHash::Identity { m } => *m,
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, BucketHash::Identity { .. })
    }
}

/// The identity bucket map over `[m]`, with `D = m`.
pub fn trivial_hash(m: u64) -> Result<BucketHash> {
    if m == 0 {
        return Err(Error::invalid("trivial hash needs m >= 1"));
    }
    Ok(BucketHash::Identity { m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn hash_formula_examples() {
        let h = PairwiseHash::from_coefficients(3, 5, 4).unwrap();
        assert_eq!(h.eval(10), 3);
        let zero = PairwiseHash::from_coefficients(0, 0, 17).unwrap();
        assert!((0..100).all(|i| zero.eval(i) == 1));
        let s = SeedSpec::new(7).derive("h", 0);
        let one = PairwiseHash::new(&s, 1).unwrap();
        assert!((0..100).all(|i| one.eval(i * 1_000_003) == 1));
        assert!(PairwiseHash::new(&s, 0).is_err());
    }

    #[test]
    fn hash_is_pure() {
        let h = PairwiseHash::new(&SeedSpec::new(1).derive("h", 3), 1000).unwrap();
        let first = h.eval(123_456_789);
        assert!((0..1000).all(|_| h.eval(123_456_789) == first));
    }

    #[test]
    fn large_indices_reduce_correctly() {
        let h = PairwiseHash::from_coefficients(12345, 678, u64::MAX).unwrap();
        // Brute-force the affine map in 128-bit arithmetic.
        let p = u128::from(MERSENNE_61);
        for i in [0u64, 1, MERSENNE_61 - 2, MERSENNE_61 - 1, MERSENNE_61, u64::MAX - 1, u64::MAX] {
            let want = (12345u128 * ((u128::from(i) + 1) % p) + 678) % p;
            assert_eq!(h.eval(i), 1 + want as u64 % u64::MAX, "i = {i}");
        }
    }

    #[test]
    fn cursor_matches_eval() {
        for (seed, range) in [(1u64, 7u64), (2, 180), (3, 1 << 40), (4, 1), (5, MERSENNE_61 + 5)] {
            let h = PairwiseHash::new(&SeedSpec::new(seed).root(), range).unwrap();
            let start = 1_000_000 * seed;
            let mut c = h.cursor(start);
            for i in start..start + 5000 {
                assert_eq!(c.next_zero_based() + 1, h.eval(i));
            }
        }
    }

    #[test]
    fn block_hasher_matches_eval() {
        for (seed, range) in [(1u64, 7u64), (2, 180), (3, 1 << 40), (4, 1), (5, MERSENNE_61 + 5), (6, 3)] {
            let h = PairwiseHash::new(&SeedSpec::new(seed).root(), range).unwrap();
            let bh = BlockHasher::new(&h);
            for (start, len) in [(0u64, 0usize), (7 * seed, 1), (1_000_000 * seed, 4097), (u64::MAX - 9, 6)] {
                let mut out = vec![0u64; len];
                bh.fill_zero_based(start, &mut out);
                for (t, v) in out.iter().enumerate() {
                    assert_eq!(v + 1, h.eval(start.wrapping_add(t as u64)));
                }
            }
        }
    }

    #[test]
    fn trivial_hash_is_identity() {
        let t = trivial_hash(5).unwrap();
        assert_eq!(t.eval(2), 3);
        assert_eq!(t.range(), 5);
        assert_eq!(trivial_hash(1).unwrap().eval(0), 1);
        let buckets: HashSet<u64> = (0..5).map(|i| t.eval(i)).collect();
        assert_eq!(buckets.len(), 5);
        assert!(trivial_hash(0).is_err());
    }

    #[test]
    fn derivation_is_deterministic_and_separates_paths() {
        let seed = SeedSpec::new(42);
        assert_eq!(seed.derive("stage1", 3), seed.derive("stage1", 3));
        assert_eq!(seed.derive("stage1", 3).word(9), seed.derive("stage1", 3).word(9));
        assert_ne!(seed.derive("stage1", 3), seed.derive("stage2", 3));

        let mut first_words = HashSet::new();
        let mut ones = 0u64;
        for c in 0..10_000u64 {
            for label in ["stage1", "stage2"] {
                let w = seed.derive(label, c).word(0);
                assert!(first_words.insert(w), "repeated first word");
                ones += u64::from(w.count_ones());
            }
        }
        // Bit balance over 20_000 · 64 bits: mean 0.5, σ ≈ 0.00044.
        let frac = ones as f64 / (20_000.0 * 64.0);
        assert!((frac - 0.5).abs() < 3.0 * (0.25f64 / (20_000.0 * 64.0)).sqrt() + 1e-4);
    }

    #[test]
    fn rademacher_is_deterministic_and_balanced() {
        let r = SeedSpec::new(5).derive("sign", 0).rademacher();
        assert_eq!(r.sign(77), r.sign(77));
        let n = 100_000u64;
        let sum: f64 = (0..n).map(|i| rademacher(&r, i)).sum();
        let sigma = (n as f64).sqrt();
        assert!(sum.abs() <= 3.0 * sigma, "sum {sum}");
        // Correlation of neighbouring and far-apart signs.
        for lag in [1u64, 1 << 20] {
            let corr: f64 = (0..n).map(|i| r.sign(i) * r.sign(i + lag)).sum();
            assert!(corr.abs() <= 3.0 * sigma, "lag {lag}: {corr}");
        }
    }

    #[test]
    fn collision_probability_is_one_over_d() {
        let root = SeedSpec::new(2024).root();
        for (d, draws) in [(2u64, 1_000_000u64), (16, 1_000_000), (1024, 10_000_000)] {
            let mut rng = root.derive("collide", d).rng();
            let mut hits = 0u64;
            for t in 0..draws {
                let h = PairwiseHash::from_coefficients(
                    rng.random_range(1..MERSENNE_61),
                    rng.random_range(0..MERSENNE_61),
                    d,
                )
                .unwrap();
                let i = t % 1000;
                if h.eval(i) == h.eval(i + 1 + (t % 7919) * 104_729) {
                    hits += 1;
                }
            }
            let rate = hits as f64 / draws as f64;
            let target = 1.0 / d as f64;
            assert!((rate / target - 1.0).abs() <= 0.05, "D = {d}: rate {rate}");
        }
    }

    #[test]
    fn marginal_is_uniform_chi_square() {
        let s = SeedSpec::new(99).root();
        let d = 8u64;
        let draws = 100_000u64;
        let mut counts = [0u64; 8];
        for t in 0..draws {
            let h = PairwiseHash::new(&s.derive("marg", t), d).unwrap();
            counts[(h.eval(31_337) - 1) as usize] += 1;
        }
        let expect = draws as f64 / d as f64;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
        // 7 degrees of freedom, 0.001 upper quantile.
        assert!(chi2 < 24.322, "chi2 = {chi2}");
    }
}
