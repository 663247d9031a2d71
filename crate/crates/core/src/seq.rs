//! Finitely supported real sequences and the `ℓ_p` machinery on them.
//!
//! A [`SeqVector`] stores its nonzero entries as `(index, value)` pairs sorted
//! by index. Indices are 1-based so that `e_1` is `SeqVector::unit(1)`. Exact
//! zeros are never stored, which makes [`SeqVector::support`] well defined and
//! lets `PartialEq` compare canonical forms.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An exponent `p` with `1 < p < ∞`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PExponent(f64);

impl PExponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_finite() && p > 1.0 {
            Ok(Self(p))
        } else {
            Err(Error::InvalidExponent(p))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// The conjugate exponent `q = p / (p - 1)`.
    pub fn dual(self) -> PExponent {
        PExponent(self.0 / (self.0 - 1.0))
    }
}

impl TryFrom<f64> for PExponent {
    type Error = Error;

    fn try_from(p: f64) -> Result<Self> {
        Self::new(p)
    }
}

impl From<PExponent> for f64 {
    fn from(p: PExponent) -> f64 {
        p.0
    }
}

impl fmt::Display for PExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `(Σ|v_i|^p)^{1/p}` over a dense slice.
pub fn lp_norm_slice(values: &[f64], p: PExponent) -> f64 {
    lp_norm_iter(values.iter().copied(), p)
}

// Rescaled by the largest modulus to keep the powers in range.
fn lp_norm_iter<I>(values: I, p: PExponent) -> f64
where
    I: Iterator<Item = f64> + Clone,
{
    let scale = values.clone().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let p = p.value();
    if p == 2.0 {
        let s: f64 = values.map(|v| (v / scale) * (v / scale)).sum();
        scale * s.sqrt()
    } else {
        let s: f64 = values.map(|v| (v.abs() / scale).powf(p)).sum();
        scale * s.powf(1.0 / p)
    }
}

/// A finitely supported real sequence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeqRepr", into = "SeqRepr")]
pub struct SeqVector {
    entries: Vec<(usize, f64)>,
}

#[derive(Serialize, Deserialize)]
struct SeqRepr {
    entries: Vec<(usize, f64)>,
}

impl TryFrom<SeqRepr> for SeqVector {
    type Error = Error;

    fn try_from(repr: SeqRepr) -> Result<Self> {
        for w in repr.entries.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::UnorderedIndex(w[1].0));
            }
        }
        SeqVector::from_entries(repr.entries)
    }
}

impl From<SeqVector> for SeqRepr {
    fn from(v: SeqVector) -> Self {
        SeqRepr { entries: v.entries }
    }
}

impl SeqVector {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The unit vector `e_index`.
    ///
    /// # Panics
    ///
    /// If `index` is 0.
    pub fn unit(index: usize) -> Self {
        assert!(index >= 1, "sequence indices are 1-based");
        Self {
            entries: vec![(index, 1.0)],
        }
    }

    /// Builds a vector from `(index, value)` pairs in any order. Zeros are
    /// dropped; repeated indices, index 0 and non-finite values are rejected.
    pub fn from_entries<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let mut entries: Vec<(usize, f64)> = entries.into_iter().collect();
        entries.sort_by_key(|&(i, _)| i);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::DuplicateIndex(w[0].0));
            }
        }
        for &(index, value) in &entries {
            if index == 0 {
                return Err(Error::ZeroIndex);
            }
            if !value.is_finite() {
                return Err(Error::NonFinite { index, value });
            }
        }
        entries.retain(|&(_, v)| v != 0.0);
        Ok(Self { entries })
    }

    /// Dense coefficients placed at indices `1, 2, …`.
    pub fn from_dense(values: &[f64]) -> Self {
        Self::from_dense_at(1, values)
    }

    /// Dense coefficients placed at indices `start, start + 1, …`.
    pub fn from_dense_at(start: usize, values: &[f64]) -> Self {
        assert!(start >= 1, "sequence indices are 1-based");
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(k, &v)| (start + k, v))
            .collect();
        Self { entries }
    }

    /// Indicator of a set of indices.
    pub fn indicator<I: IntoIterator<Item = usize>>(indices: I) -> Result<Self> {
        Self::from_entries(indices.into_iter().map(|i| (i, 1.0)))
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map(|k| self.entries[k].1)
            .unwrap_or(0.0)
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(i, _)| i)
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn min_index(&self) -> Option<usize> {
        self.entries.first().map(|&(i, _)| i)
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|&(i, _)| i)
    }

    /// Dense copy of the coefficients at indices `1..=len`.
    pub fn to_dense(&self, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len];
        for &(i, v) in &self.entries {
            if i <= len {
                out[i - 1] = v;
            }
        }
        out
    }

    /// Applies `f` to every stored value, keeping the index. Zeros produced by
    /// `f` are dropped.
    pub fn map_values<F: FnMut(f64) -> f64>(&self, mut f: F) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|&(i, v)| (i, f(v)))
            .filter(|&(_, v)| v != 0.0)
            .collect();
        Self { entries }
    }

    pub fn scale(&self, lambda: f64) -> Self {
        self.map_values(|v| lambda * v)
    }

    fn merge<F: Fn(f64, f64) -> f64>(&self, other: &Self, op: F) -> Self {
        let (a, b) = (&self.entries, &other.entries);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let (index, value) = match (a.get(i), b.get(j)) {
                (Some(&(ia, va)), Some(&(ib, vb))) if ia == ib => {
                    i += 1;
                    j += 1;
                    (ia, op(va, vb))
                }
                (Some(&(ia, va)), Some(&(ib, _))) if ia < ib => {
                    i += 1;
                    (ia, op(va, 0.0))
                }
                (Some(&(ia, va)), None) => {
                    i += 1;
                    (ia, op(va, 0.0))
                }
                (_, Some(&(ib, vb))) => {
                    j += 1;
                    (ib, op(0.0, vb))
                }
                (None, None) => unreachable!(),
            };
            if value != 0.0 {
                out.push((index, value));
            }
        }
        Self { entries: out }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.merge(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.merge(other, |a, b| a - b)
    }

    /// `self + lambda * other`.
    pub fn axpy(&self, lambda: f64, other: &Self) -> Self {
        self.merge(other, |a, b| a + lambda * b)
    }

    /// `(Σ|x_i|^p)^{1/p}`.
    pub fn lp_norm(&self, p: PExponent) -> f64 {
        lp_norm_iter(self.entries.iter().map(|&(_, v)| v), p)
    }

    /// `max_i |x_i|`.
    pub fn sup_norm(&self) -> f64 {
        self.entries
            .iter()
            .fold(0.0_f64, |m, &(_, v)| m.max(v.abs()))
    }

    /// The bilinear bracket `Σ_i x_i b_i`.
    pub fn pairing(&self, other: &Self) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j) = (0, 0);
        let mut acc = 0.0;
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    /// Coordinatewise product `(a x)_i = a_i x_i`.
    pub fn pointwise_mul(&self, other: &Self) -> Self {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    let v = a[i].1 * b[j].1;
                    if v != 0.0 {
                        out.push((a[i].0, v));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        Self { entries: out }
    }

    /// Restriction to the indices where `keep` holds.
    pub fn restrict<F: Fn(usize) -> bool>(&self, keep: F) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .copied()
                .filter(|&(i, _)| keep(i))
                .collect(),
        }
    }
}

/// `true` iff the supports are pairwise disjoint.
pub fn are_disjoint(vectors: &[SeqVector]) -> bool {
    let mut seen = HashSet::new();
    vectors
        .iter()
        .flat_map(|v| v.support())
        .all(|i| seen.insert(i))
}

/// Sum of a list of vectors.
pub fn sum(vectors: &[SeqVector]) -> SeqVector {
    vectors.iter().fold(SeqVector::zero(), |acc, v| acc.add(v))
}

impl fmt::Display for SeqVector {
    /// Sparse `i1:v1;i2:v2;…` form, round-trippable through [`FromStr`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, &(i, v)) in self.entries.iter().enumerate() {
            if k > 0 {
                f.write_str(";")?;
            }
            write!(f, "{i}:{v:?}")?;
        }
        Ok(())
    }
}

impl FromStr for SeqVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for item in s.split(';').map(str::trim).filter(|t| !t.is_empty()) {
            let (index, value) = item
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected `index:value`, got `{item}`")))?;
            let index: usize = index
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("bad index `{index}`: {e}")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("bad value `{value}`: {e}")))?;
            entries.push((index, value));
        }
        Self::from_entries(entries)
    }
}
