//! Sparse vectors over a 64-bit index domain `[m]`, with the norms and
//! projections used to state and check uniform-approximation guarantees.
//!
//! Indices are 0-based everywhere in the library. The text file format in
//! [`crate::io`] uses 1-based indices and converts at the boundary.

use crate::error::{Error, Result};

/// A real vector of dimension `dim` stored by its nonzero support.
///
/// Entries are kept sorted by index; zero values are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseVector {
    dim: u64,
    entries: Vec<(u64, f64)>,
}

impl SparseVector {
    /// The zero vector of dimension `dim`.
    pub fn zeros(dim: u64) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    /// Builds a vector from `(index, value)` pairs.
    ///
    /// Zero values are dropped. Duplicate indices, out-of-range indices and
    /// non-finite values are rejected.
    pub fn from_entries<I>(dim: u64, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, f64)>,
    {
        let mut out: Vec<(u64, f64)> = Vec::new();
        for (i, v) in entries {
            if i >= dim {
                return Err(Error::IndexOutOfRange { index: i, dim });
            }
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { index: i });
            }
            out.push((i, v));
        }
        out.sort_unstable_by_key(|&(i, _)| i);
        if let Some(w) = out.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateIndex { index: w[0].0 });
        }
        out.retain(|&(_, v)| v != 0.0);
        Ok(Self { dim, entries: out })
    }

    /// The standard basis vector `e_j` scaled by `value`.
    pub fn spike(dim: u64, j: u64, value: f64) -> Result<Self> {
        Self::from_entries(dim, [(j, value)])
    }

    pub fn dim(&self) -> u64 {
        self.dim
    }

    /// Number of stored nonzeros.
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry `x_i`, zero when `i` is not in the support.
    pub fn get(&self, i: u64) -> f64 {
        match self.entries.binary_search_by_key(&i, |&(j, _)| j) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0.0,
        }
    }

    /// Nonzero entries in increasing index order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn support(&self) -> IndexSet {
        IndexSet(self.entries.iter().map(|&(i, _)| i).collect())
    }

    /// Multiplies every entry by `t`. Scaling by zero yields the zero vector.
    pub fn scaled(&self, t: f64) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|&(i, v)| (i, v * t))
            .filter(|&(_, v)| v != 0.0)
            .collect();
        Self {
            dim: self.dim,
            entries,
        }
    }

    /// Largest absolute entry.
    pub fn linf_norm(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, &(_, v)| m.max(v.abs()))
    }
}

/// A strictly increasing set of indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct IndexSet(Vec<u64>);

impl IndexSet {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    /// Sorts and deduplicates.
    pub fn from_unsorted(mut v: Vec<u64>) -> Self {
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: u64) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Self::from_unsorted(v)
    }

    /// Position of `i` within the sorted set.
    pub fn rank(&self, i: u64) -> Option<usize> {
        self.0.binary_search(&i).ok()
    }
}

impl FromIterator<u64> for IndexSet {
    fn from_iter<T: IntoIterator<Item = u64>>(iter: T) -> Self {
        Self::from_unsorted(iter.into_iter().collect())
    }
}

fn check_p(p: f64) -> Result<()> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "norm exponent p must be finite and >= 1, got {p}"
        )));
    }
    Ok(())
}

fn check_dims(x: &SparseVector, z: &SparseVector) -> Result<()> {
    if x.dim != z.dim {
        return Err(Error::DimensionMismatch {
            left: x.dim,
            right: z.dim,
        });
    }
    Ok(())
}

/// The `ℓ_p` norm over the support.
pub fn lp_norm(x: &SparseVector, p: f64) -> Result<f64> {
    check_p(p)?;
    if p == 1.0 {
        return Ok(x.iter().map(|(_, v)| v.abs()).sum());
    }
    // Rescale by the max entry so tiny or huge entries do not under/overflow.
    let scale = x.linf_norm();
    if scale == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = x.iter().map(|(_, v)| (v.abs() / scale).powf(p)).sum();
    Ok(scale * sum.powf(1.0 / p))
}

/// `max_i |x_i - z_i|` over the union of supports.
pub fn linf_dist(x: &SparseVector, z: &SparseVector) -> Result<f64> {
    check_dims(x, z)?;
    Ok(diff_entries(x, z).fold(0.0, |m, d| m.max(d.abs())))
}

/// Walks both sorted supports and yields `x_i - z_i` for every index in the union.
fn diff_entries<'a>(x: &'a SparseVector, z: &'a SparseVector) -> impl Iterator<Item = f64> + 'a {
    let (a, b) = (&x.entries, &z.entries);
    let (mut i, mut j) = (0, 0);
    std::iter::from_fn(move || {
        match (a.get(i), b.get(j)) {
            (Some(&(ia, va)), Some(&(ib, vb))) => {
                if ia == ib {
                    i += 1;
                    j += 1;
                    Some(va - vb)
                } else if ia < ib {
                    i += 1;
                    Some(va)
                } else {
                    j += 1;
                    Some(-vb)
                }
            }
            (Some(&(_, va)), None) => {
                i += 1;
                Some(va)
            }
            (None, Some(&(_, vb))) => {
                j += 1;
                Some(-vb)
            }
            (None, None) => None,
        }
    })
}

/// The projection of `x` onto the coordinates `k`: agrees with `x` on `k`, zero elsewhere.
pub fn project(x: &SparseVector, k: &IndexSet) -> Result<SparseVector> {
    if let Some(bad) = k.iter().find(|&i| i >= x.dim) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            dim: x.dim,
        });
    }
    let entries = x.iter().filter(|&(i, _)| k.contains(i)).collect();
    Ok(SparseVector {
        dim: x.dim,
        entries,
    })
}

/// Indices with `|x_i| >= eps`.
pub fn heavy_set(x: &SparseVector, eps: f64) -> IndexSet {
    IndexSet(
        x.iter()
            .filter(|&(_, v)| v.abs() >= eps)
            .map(|(i, _)| i)
            .collect(),
    )
}

/// `‖x - z‖_q` for `q ∈ [1, ∞]`.
pub fn lq_error(x: &SparseVector, z: &SparseVector, q: f64) -> Result<f64> {
    check_dims(x, z)?;
    if q == f64::INFINITY {
        return linf_dist(x, z);
    }
    check_p(q)?;
    let diffs: Vec<f64> = diff_entries(x, z).filter(|d| *d != 0.0).collect();
    let scale = diffs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    if scale == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = diffs.iter().map(|d| (d.abs() / scale).powf(q)).sum();
    Ok(scale * sum.powf(1.0 / q))
}
