//! Instance generators. Every generator returns `‖x‖_p ≤ 1`.

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::random::Stream;
use crate::vector::{lp_norm, SparseVector};

/// Densest instance [`dense_tail`] will build.
pub const DENSE_LIMIT: u64 = 1 << 20;

/// The instance showing the hashing bound is tight: `r = ⌊αD⌋` entries of
/// `r^{-1/p}` off `j`, and `x_j = value`.
pub fn hash_adversary(m: u64, alpha: f64, buckets: u64, p: f64, j: u64, value: f64) -> Result<SparseVector> {
    let r = (alpha * buckets as f64).floor() as u64;
    if r == 0 {
        return Err(Error::invalid("⌊αD⌋ must be at least 1"));
    }
    if r >= m || j >= m {
        return Err(Error::invalid(format!("need ⌊αD⌋ + 1 <= m, got r = {r}, m = {m}")));
    }
    let level = (r as f64).powf(-1.0 / p);
    let rest = (0..m).filter(|&i| i != j).take(r as usize).map(|i| (i, level));
    SparseVector::from_entries(m, rest.chain(std::iter::once((j, value))).collect::<std::collections::BTreeMap<_, _>>())
}

/// `k1` entries at `ε = (2k1)^{-1/p}` and `⌊2k1(γ/2)^p⌋` entries at `ε/γ`,
/// laid out on evenly spaced indices.
pub fn two_level(m: u64, k1: u64, gamma: f64, p: f64) -> Result<SparseVector> {
    if k1 == 0 {
        return Err(Error::invalid("two-level instance needs k1 >= 1"));
    }
    let k2 = (2.0 * k1 as f64 * (gamma / 2.0).powf(p)).floor() as u64;
    let n = k1.checked_add(k2).filter(|&n| n <= m).ok_or_else(|| {
        Error::invalid(format!("two-level instance needs k1 + k2 <= m, got {k1} + {k2} > {m}"))
    })?;
    let eps = (2.0 * k1 as f64).powf(-1.0 / p);
    let stride = m / n;
    let entries = (0..n).map(|t| (t * stride, if t < k1 { eps } else { eps / gamma }));
    SparseVector::from_entries(m, entries)
}

/// `k1` spikes at `(2k1)^{-1/p}`, every other entry at `(2m)^{-1/p}`.
pub fn dense_tail(m: u64, k1: u64, p: f64) -> Result<SparseVector> {
    if m > DENSE_LIMIT {
        return Err(Error::invalid(format!("dense instance needs m <= {DENSE_LIMIT}")));
    }
    if k1 == 0 || k1 >= m {
        return Err(Error::invalid(format!("dense instance needs 1 <= k1 < m, got k1 = {k1}, m = {m}")));
    }
    let spike = (2.0 * k1 as f64).powf(-1.0 / p);
    let tail = (2.0 * m as f64).powf(-1.0 / p);
    SparseVector::from_entries(m, (0..m).map(|i| (i, if i < k1 { spike } else { tail })))
}

/// `s` random coordinates with random signs and magnitudes, scaled to `‖x‖_p = 1`.
pub fn random_unit(m: u64, s: u64, p: f64, stream: &Stream) -> Result<SparseVector> {
    if s > m {
        return Err(Error::invalid(format!("cannot place {s} entries in dimension {m}")));
    }
    let mut rng = stream.rng();
    let entries: Vec<(u64, f64)> = distinct_indices(m, s, stream)
        .into_iter()
        .map(|i| {
            let mag: f64 = 1.0 - rng.random::<f64>();
            (i, if rng.random::<bool>() { mag } else { -mag })
        })
        .collect();
    let x = SparseVector::from_entries(m, entries)?;
    if x.is_zero() {
        return Ok(x);
    }
    Ok(x.scaled(1.0 / lp_norm(&x, p)?))
}

/// `s` distinct indices of `[m]`, uniformly at random.
fn distinct_indices(m: u64, s: u64, stream: &Stream) -> Vec<u64> {
    let mut rng = stream.derive("indices", 0).rng();
    index::sample(&mut rng, m as usize, s as usize)
        .into_iter()
        .map(|i| i as u64)
        .collect()
}

/// Moves the support of `x` onto random distinct indices, keeping values.
pub fn scatter(x: &SparseVector, stream: &Stream) -> Result<SparseVector> {
    let to = distinct_indices(x.dim(), x.nnz() as u64, stream);
    SparseVector::from_entries(x.dim(), to.into_iter().zip(x.iter().map(|(_, v)| v)).collect::<std::collections::BTreeMap<_, _>>())
}

/// An instance family for the trial runner.
#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    Zero,
    /// `value·e_j` at a random `j`.
    Spike { value: f64 },
    TwoLevel { k1: u64, gamma: f64 },
    RandomUnit { s: u64 },
    DenseTail { k1: u64 },
    /// One of the listed families, picked uniformly per instance.
    Mixture(Vec<Generator>),
}

impl Generator {
    /// One instance, placed at random where the family allows it.
    pub fn sample(&self, m: u64, p: f64, stream: &Stream) -> Result<SparseVector> {
        match self {
            Generator::Zero => Ok(SparseVector::zeros(m)),
            &Generator::Spike { value } => {
                let j = stream.rng().random_range(0..m);
                SparseVector::spike(m, j, value)
            }
            &Generator::TwoLevel { k1, gamma } => scatter(&two_level(m, k1, gamma, p)?, stream),
            &Generator::RandomUnit { s } => random_unit(m, s, p, stream),
            &Generator::DenseTail { k1 } => dense_tail(m, k1, p),
            Generator::Mixture(family) => {
                if family.is_empty() {
                    return Err(Error::invalid("empty generator mixture"));
                }
                let pick = stream.derive("family", 0).rng().random_range(0..family.len());
                family[pick].sample(m, p, &stream.derive("member", 0))
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            Generator::Zero => "zero".into(),
            Generator::Spike { value } => format!("spike({value})"),
            Generator::TwoLevel { k1, gamma } => format!("two-level(k1={k1},gamma={gamma})"),
            Generator::RandomUnit { s } => format!("random-unit(s={s})"),
            Generator::DenseTail { k1 } => format!("dense-tail(k1={k1})"),
            Generator::Mixture(family) => {
                format!("mixture({})", family.iter().map(Generator::name).collect::<Vec<_>>().join("|"))
            }
        }
    }
}
