//! Finite real sequences, ranks, elimination subsequences and index subsets.
//!
//! Positions are 1-based throughout the public surface: `x1` is the first
//! term, rank 1 is the minimum.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A non-empty ordered list of finite reals. Duplicates are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RealSequence {
    values: Vec<f64>,
}

impl RealSequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySequence);
        }
        if let Some((i, &v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                position: i + 1,
                value: v,
            });
        }
        Ok(RealSequence { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The term at 1-based position `k`.
    pub fn get(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.values.get(i)).copied()
    }

    /// Removes the `j`-th term (1-based); terms after it shift down by one.
    pub fn eliminate(&self, j: usize) -> Result<RealSequence> {
        let len = self.len();
        if j == 0 || j > len {
            return Err(Error::IndexOutOfRange { index: j, len });
        }
        if len == 1 {
            return Err(Error::EliminateSingleton);
        }
        let mut values = Vec::with_capacity(len - 1);
        values.extend_from_slice(&self.values[..j - 1]);
        values.extend_from_slice(&self.values[j..]);
        Ok(RealSequence { values })
    }

    /// Removes terms one after another; each index refers to the sequence
    /// produced by the previous removal.
    pub fn eliminate_iter(&self, js: &[usize]) -> Result<RealSequence> {
        let mut seq = self.clone();
        for &j in js {
            seq = seq.eliminate(j)?;
        }
        Ok(seq)
    }

    /// Applies `x -> scale * x + shift` to every term.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<RealSequence> {
        RealSequence::new(self.values.iter().map(|&x| scale * x + shift).collect())
    }
}

impl TryFrom<Vec<f64>> for RealSequence {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        RealSequence::new(values)
    }
}

impl From<RealSequence> for Vec<f64> {
    fn from(seq: RealSequence) -> Self {
        seq.values
    }
}

/// A 1-based rank `n` validated against a sequence length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Rank(usize);

impl Rank {
    pub fn new(n: usize, len: usize) -> Result<Self> {
        if n == 0 || n > len {
            return Err(Error::RankOutOfRange { rank: n, len });
        }
        Ok(Rank(n))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// The set of original indices that survive a series of eliminations.
///
/// Stored as a bitset so equal sets are equal values regardless of the
/// order in which terms were removed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSubset {
    words: Vec<u64>,
    len: usize,
}

impl IndexSubset {
    /// All of `1..=n`.
    pub fn full(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySequence);
        }
        let mut words = vec![u64::MAX; n.div_ceil(64)];
        let tail = n % 64;
        if tail != 0 {
            *words.last_mut().unwrap() = (1u64 << tail) - 1;
        }
        Ok(IndexSubset { words, len: n })
    }

    /// Builds a subset of `1..=universe` from arbitrary 1-based indices.
    pub fn from_indices(universe: usize, indices: &[usize]) -> Result<Self> {
        let mut words = vec![0u64; universe.div_ceil(64)];
        let mut len = 0;
        for &i in indices {
            if i == 0 || i > universe {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: universe,
                });
            }
            let (w, b) = ((i - 1) / 64, (i - 1) % 64);
            if words[w] & (1 << b) == 0 {
                words[w] |= 1 << b;
                len += 1;
            }
        }
        if len == 0 {
            return Err(Error::EmptySequence);
        }
        Ok(IndexSubset { words, len })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, index: usize) -> bool {
        index >= 1
            && (index - 1) / 64 < self.words.len()
            && self.words[(index - 1) / 64] & (1 << ((index - 1) % 64)) != 0
    }

    /// Surviving original indices in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + b + 1)
            })
        })
    }

    /// Removes the `j`-th surviving index (1-based, in original order).
    pub fn eliminate(&self, j: usize) -> Result<IndexSubset> {
        if j == 0 || j > self.len {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: self.len,
            });
        }
        if self.len == 1 {
            return Err(Error::EliminateSingleton);
        }
        let original = self.iter().nth(j - 1).expect("j within len");
        let mut words = self.words.clone();
        words[(original - 1) / 64] &= !(1 << ((original - 1) % 64));
        Ok(IndexSubset {
            words,
            len: self.len - 1,
        })
    }

    /// The subsequence of `seq` induced by this subset, in original order.
    pub fn induce(&self, seq: &RealSequence) -> Result<RealSequence> {
        let values = self
            .iter()
            .map(|i| {
                seq.get(i).ok_or(Error::IndexOutOfRange {
                    index: i,
                    len: seq.len(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        RealSequence::new(values)
    }
}

/// A permutation `perm` (1-based) with `x[perm[0]] <= x[perm[1]] <= ...`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SortWitness {
    pub perm: Vec<usize>,
}

impl SortWitness {
    /// Stable: equal values keep their original relative order.
    pub fn of(seq: &RealSequence) -> SortWitness {
        let values = seq.values();
        let mut perm: Vec<usize> = (1..=values.len()).collect();
        perm.sort_by(|&a, &b| values[a - 1].total_cmp(&values[b - 1]));
        SortWitness { perm }
    }

    /// True if `perm` is a permutation of `1..=N` ordering `seq` nondecreasingly.
    pub fn certifies(&self, seq: &RealSequence) -> bool {
        let n = seq.len();
        if self.perm.len() != n {
            return false;
        }
        let mut seen = vec![false; n];
        for &p in &self.perm {
            if p == 0 || p > n || std::mem::replace(&mut seen[p - 1], true) {
                return false;
            }
        }
        self.perm
            .windows(2)
            .all(|w| seq.values()[w[0] - 1] <= seq.values()[w[1] - 1])
    }

    /// The value at sorted position `n`.
    pub fn value_at(&self, seq: &RealSequence, n: Rank) -> f64 {
        seq.values()[self.perm[n.get() - 1] - 1]
    }
}
