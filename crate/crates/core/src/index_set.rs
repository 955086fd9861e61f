use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest ambient dimension an [`IndexSet`] can describe.
pub const MAX_INDEX_DIM: usize = 32;

/// A subset of `{1, ..., n}` stored as a bitmask over zero-based positions.
///
/// Serialized as the strictly increasing list of one-based members together
/// with `n`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet {
    mask: u32,
    n: usize,
}

impl IndexSet {
    pub fn empty(n: usize) -> Self {
        assert!(n <= MAX_INDEX_DIM, "index set dimension {n} too large");
        IndexSet { mask: 0, n }
    }

    pub fn full(n: usize) -> Self {
        Self::from_mask(if n == 32 { u32::MAX } else { (1u32 << n) - 1 }, n)
    }

    pub fn from_mask(mask: u32, n: usize) -> Self {
        assert!(n <= MAX_INDEX_DIM, "index set dimension {n} too large");
        debug_assert!(n == 32 || mask >> n == 0);
        IndexSet { mask, n }
    }

    /// Builds a set from zero-based positions.
    pub fn from_zero_based(members: &[usize], n: usize) -> Result<Self> {
        let mut s = Self::empty(n);
        for &j in members {
            if j >= n {
                return Err(Error::DimensionMismatch(format!(
                    "index {} outside 1..={n}",
                    j + 1
                )));
            }
            s.mask |= 1 << j;
        }
        Ok(s)
    }

    /// Builds a set from one-based members, as written in the literature.
    pub fn from_one_based(members: &[usize], n: usize) -> Result<Self> {
        let mut zero = Vec::with_capacity(members.len());
        for &j in members {
            if j == 0 || j > n {
                return Err(Error::DimensionMismatch(format!("index {j} outside 1..={n}")));
            }
            zero.push(j - 1);
        }
        Self::from_zero_based(&zero, n)
    }

    /// Every subset of `{1..n}` in increasing mask order.
    pub fn all(n: usize) -> impl Iterator<Item = IndexSet> {
        assert!(n < MAX_INDEX_DIM);
        (0u32..(1u32 << n)).map(move |m| IndexSet::from_mask(m, n))
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    /// Membership of a zero-based position.
    pub fn contains(&self, j: usize) -> bool {
        j < self.n && self.mask & (1 << j) != 0
    }

    /// Zero-based members in increasing order.
    pub fn members(&self) -> Vec<usize> {
        (0..self.n).filter(|&j| self.contains(j)).collect()
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.members().into_iter().map(|j| j + 1).collect()
    }

    pub fn complement(&self) -> IndexSet {
        IndexSet::from_mask(!self.mask & IndexSet::full(self.n).mask, self.n)
    }

    pub fn with(&self, j: usize) -> IndexSet {
        IndexSet::from_mask(self.mask | (1 << j), self.n)
    }

    pub fn without(&self, j: usize) -> IndexSet {
        IndexSet::from_mask(self.mask & !(1 << j), self.n)
    }

    /// Re-indexes the set under a permutation: position `i` of the result is
    /// a member iff `perm[i]` is a member of `self`.
    pub fn pulled_back(&self, perm: &[usize]) -> IndexSet {
        let mut out = IndexSet::empty(self.n);
        for (i, &p) in perm.iter().enumerate() {
            if self.contains(p) {
                out = out.with(i);
            }
        }
        out
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.one_based().iter().map(|j| j.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}/{}", self.n)
    }
}

#[derive(Serialize, Deserialize)]
struct IndexSetRepr {
    members: Vec<usize>,
    n: usize,
}

impl Serialize for IndexSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        IndexSetRepr { members: self.one_based(), n: self.n }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IndexSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = IndexSetRepr::deserialize(d)?;
        if repr.n > MAX_INDEX_DIM {
            return Err(serde::de::Error::custom("index set dimension too large"));
        }
        if repr.members.windows(2).any(|w| w[0] >= w[1]) {
            return Err(serde::de::Error::custom("index set members must be strictly increasing"));
        }
        IndexSet::from_one_based(&repr.members, repr.n).map_err(serde::de::Error::custom)
    }
}
