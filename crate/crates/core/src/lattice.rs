//! Multi-indices, shuffles and axis-aligned boxes in `ℕ^m`.
//!
//! Coordinates are 0-based throughout the library. Serialized forms (JSON,
//! CLI) print capped coordinates 1-based, matching the usual `z_1, …, z_m`
//! labelling.

use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An exponent vector `n = (n_1, …, n_m)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::ZeroDimension);
        }
        Ok(Self(entries))
    }

    pub fn zeros(m: usize) -> Self {
        Self(vec![0; m])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// Total degree `|n|`.
    pub fn degree(&self) -> u64 {
        self.0.iter().map(|&x| x as u64).sum()
    }

    pub fn get(&self, coord: usize) -> u32 {
        self.0[coord]
    }

    /// `n + e_p`.
    pub fn shifted_up(&self, p: usize) -> Self {
        let mut v = self.0.clone();
        v[p] += 1;
        Self(v)
    }

    /// `n - e_p`, or `None` when `n_p = 0`.
    pub fn shifted_down(&self, p: usize) -> Option<Self> {
        let mut v = self.0.clone();
        v[p] = v[p].checked_sub(1)?;
        Some(Self(v))
    }

    /// Componentwise `self ≥ other` (i.e. `z^other` divides `z^self`).
    pub fn dominates(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }

    pub fn check_dim(&self, m: usize) -> Result<()> {
        if self.dim() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: self.dim(),
            });
        }
        Ok(())
    }

    /// Every coordinate strictly below `cutoff`.
    pub fn within(&self, cutoff: u32) -> bool {
        self.0.iter().all(|&x| x < cutoff)
    }

    /// Every coordinate at most `cutoff - 2`, so each single shift stays inside the grid.
    pub fn is_interior(&self, cutoff: u32) -> bool {
        self.0.iter().all(|&x| x + 1 < cutoff)
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.iter().join(","))
    }
}

/// A strictly increasing list of indices. The empty shuffle stands for level 0.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Shuffle(Vec<usize>);

impl Shuffle {
    /// Validates strict increase and `index < range` for every entry.
    pub fn new(indices: Vec<usize>, range: usize) -> Result<Self> {
        let increasing = indices.windows(2).all(|w| w[0] < w[1]);
        let in_range = indices.iter().all(|&i| i < range);
        if !increasing || !in_range {
            return Err(Error::InvalidShuffle(indices));
        }
        Ok(Self(indices))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    /// Drops the `i`-th smallest element (0-based position).
    pub fn drop_at(&self, i: usize) -> Shuffle {
        let mut v = self.0.clone();
        v.remove(i);
        Shuffle(v)
    }

    /// 1-based copy for display and serialization.
    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }
}

impl fmt::Display for Shuffle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.one_based().iter().join(","))
    }
}

/// All `q`-element strictly increasing subsets of `0..k`, lexicographically.
pub fn shuffles(q: usize, k: usize) -> Result<Vec<Shuffle>> {
    if q > k {
        return Err(Error::ShuffleTooLarge { q, k });
    }
    Ok((0..k).combinations(q).map(Shuffle).collect())
}

/// The box `{ n : n_{j_l} ≤ b_l for every capped coordinate j_l }`.
///
/// Stored canonically: capped coordinates ascending with caps aligned, so
/// structural equality is set equality and the derived order is the
/// lexicographic order on `(j, b)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticeBox {
    m: usize,
    coords: Vec<usize>,
    caps: Vec<u32>,
}

impl LatticeBox {
    pub fn new(m: usize, coords: Vec<usize>, caps: Vec<u32>) -> Result<Self> {
        if m == 0 {
            return Err(Error::ZeroDimension);
        }
        if coords.len() != caps.len() {
            return Err(Error::CapArity {
                coords: coords.len(),
                caps: caps.len(),
            });
        }
        let mut pairs: Vec<(usize, u32)> = coords.into_iter().zip(caps).collect();
        pairs.sort_unstable();
        let coords: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        Shuffle::new(coords.clone(), m)?;
        let caps = pairs.into_iter().map(|p| p.1).collect();
        Ok(Self { m, coords, caps })
    }

    /// The whole of `ℕ^m` (no capped coordinates).
    pub fn full(m: usize) -> Self {
        Self {
            m,
            coords: Vec::new(),
            caps: Vec::new(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.m
    }

    pub fn coords(&self) -> &[usize] {
        &self.coords
    }

    pub fn caps(&self) -> &[u32] {
        &self.caps
    }

    /// Number of capped coordinates.
    pub fn capped_count(&self) -> usize {
        self.coords.len()
    }

    pub fn cap_of(&self, coord: usize) -> Option<u32> {
        self.coords
            .binary_search(&coord)
            .ok()
            .map(|pos| self.caps[pos])
    }

    fn check_same_dim(&self, other: &LatticeBox) -> Result<()> {
        if self.m != other.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                found: other.m,
            });
        }
        Ok(())
    }

    pub fn contains(&self, n: &MultiIndex) -> Result<bool> {
        n.check_dim(self.m)?;
        Ok(self.contains_unchecked(n))
    }

    pub(crate) fn contains_unchecked(&self, n: &MultiIndex) -> bool {
        self.coords
            .iter()
            .zip(&self.caps)
            .all(|(&c, &b)| n.get(c) <= b)
    }

    /// Union of capped coordinates, minimum cap on shared ones.
    pub fn intersect(&self, other: &LatticeBox) -> Result<LatticeBox> {
        self.check_same_dim(other)?;
        let mut coords = Vec::with_capacity(self.coords.len() + other.coords.len());
        let mut caps = Vec::with_capacity(coords.capacity());
        let (mut i, mut j) = (0, 0);
        while i < self.coords.len() || j < other.coords.len() {
            let a = self.coords.get(i).copied();
            let b = other.coords.get(j).copied();
            match (a, b) {
                (Some(x), Some(y)) if x == y => {
                    coords.push(x);
                    caps.push(self.caps[i].min(other.caps[j]));
                    i += 1;
                    j += 1;
                }
                (Some(x), Some(y)) if x < y => {
                    coords.push(x);
                    caps.push(self.caps[i]);
                    i += 1;
                }
                (Some(x), None) => {
                    coords.push(x);
                    caps.push(self.caps[i]);
                    i += 1;
                }
                (_, Some(y)) => {
                    coords.push(y);
                    caps.push(other.caps[j]);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Ok(LatticeBox {
            m: self.m,
            coords,
            caps,
        })
    }

    /// Every point of `self` lies in `other`: each cap of `other` is matched
    /// by an equal-or-tighter cap of `self`.
    pub fn is_subset_of(&self, other: &LatticeBox) -> Result<bool> {
        self.check_same_dim(other)?;
        Ok(other
            .coords
            .iter()
            .zip(&other.caps)
            .all(|(&c, &b)| self.cap_of(c).is_some_and(|a| a <= b)))
    }

    /// Number of admissible values of each coordinate under the cutoff.
    fn extents(&self, cutoff: u32) -> Vec<u32> {
        (0..self.m)
            .map(|c| match self.cap_of(c) {
                Some(b) => (b + 1).min(cutoff),
                None => cutoff,
            })
            .collect()
    }

    /// Points of the box with every coordinate `< cutoff`, lexicographically.
    pub fn enumerate_truncated(&self, cutoff: u32) -> Vec<MultiIndex> {
        let extents = self.extents(cutoff);
        if extents.contains(&0) {
            return Vec::new();
        }
        let total: usize = extents.iter().map(|&e| e as usize).product();
        let mut out = Vec::with_capacity(total);
        let mut current = vec![0u32; self.m];
        loop {
            out.push(MultiIndex(current.clone()));
            let mut pos = self.m;
            loop {
                if pos == 0 {
                    return out;
                }
                pos -= 1;
                current[pos] += 1;
                if current[pos] < extents[pos] {
                    break;
                }
                current[pos] = 0;
            }
        }
    }

    pub fn count_truncated(&self, cutoff: u32) -> usize {
        self.extents(cutoff).iter().map(|&e| e as usize).product()
    }

    /// Position of `n` in [`enumerate_truncated`](Self::enumerate_truncated), if present.
    pub fn position_truncated(&self, n: &MultiIndex, cutoff: u32) -> Option<usize> {
        let extents = self.extents(cutoff);
        let mut offset = 0usize;
        for (c, &e) in extents.iter().enumerate() {
            let x = n.get(c);
            if x >= e {
                return None;
            }
            offset = offset * e as usize + x as usize;
        }
        Some(offset)
    }

    /// The same box with the cap on `coord` raised by one (no-op if uncapped).
    pub fn thickened(&self, coord: usize) -> LatticeBox {
        let mut out = self.clone();
        if let Ok(pos) = out.coords.binary_search(&coord) {
            out.caps[pos] += 1;
        }
        out
    }
}

/// Left fold of [`LatticeBox::intersect`] over the boxes selected by `family`.
pub fn intersect_family(boxes: &[LatticeBox], family: &Shuffle) -> Result<LatticeBox> {
    let (first, rest) = family.indices().split_first().ok_or(Error::EmptyFamily)?;
    let lookup = |i: usize| {
        boxes.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            len: boxes.len(),
        })
    };
    let mut acc = lookup(*first)?.clone();
    for &i in rest {
        acc = acc.intersect(lookup(i)?)?;
    }
    Ok(acc)
}

impl fmt::Display for LatticeBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coords.is_empty() {
            return write!(f, "N^{}", self.m);
        }
        let parts = self
            .coords
            .iter()
            .zip(&self.caps)
            .map(|(c, b)| format!("n{}<={}", c + 1, b));
        write!(f, "{{{}}}", parts.format(", "))
    }
}

#[derive(Serialize, Deserialize)]
struct BoxRepr {
    m: usize,
    j: Vec<usize>,
    b: Vec<u32>,
}

impl Serialize for LatticeBox {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BoxRepr {
            m: self.m,
            j: self.coords.iter().map(|c| c + 1).collect(),
            b: self.caps.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LatticeBox {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = BoxRepr::deserialize(d)?;
        let coords = repr
            .j
            .iter()
            .map(|&c| c.checked_sub(1).ok_or_else(|| serde::de::Error::custom("coordinates are 1-based")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        LatticeBox::new(repr.m, coords, repr.b).map_err(serde::de::Error::custom)
    }
}
