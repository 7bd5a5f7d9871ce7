//! Monomial ideals and the box decomposition of their staircase complement.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{LatticeBox, MultiIndex};

/// An ideal of `ℂ[z_1, …, z_m]` generated by monomials `z^α`.
///
/// Generators are minimalized on construction: any generator divisible by
/// another is dropped, duplicates are merged, and the survivors are sorted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonomialIdeal {
    m: usize,
    generators: Vec<MultiIndex>,
}

impl MonomialIdeal {
    pub fn new(m: usize, generators: Vec<MultiIndex>) -> Result<Self> {
        if m == 0 {
            return Err(Error::ZeroDimension);
        }
        if generators.is_empty() {
            return Err(Error::NoGenerators);
        }
        for g in &generators {
            g.check_dim(m)?;
        }
        let unique: BTreeSet<MultiIndex> = generators.into_iter().collect();
        let minimal = unique
            .iter()
            .filter(|g| !unique.iter().any(|h| h != *g && g.dominates(h)))
            .cloned()
            .collect();
        Ok(Self {
            m,
            generators: minimal,
        })
    }

    pub fn from_exponents(m: usize, exponents: &[&[u32]]) -> Result<Self> {
        let gens = exponents
            .iter()
            .map(|e| MultiIndex::new(e.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(m, gens)
    }

    pub fn ambient_dim(&self) -> usize {
        self.m
    }

    pub fn generators(&self) -> &[MultiIndex] {
        &self.generators
    }

    /// `1 ∈ I`.
    pub fn is_unit(&self) -> bool {
        self.generators.iter().any(|g| g.degree() == 0)
    }

    /// `z^n ∈ I` iff some generator divides it.
    pub fn contains_monomial(&self, n: &MultiIndex) -> Result<bool> {
        n.check_dim(self.m)?;
        Ok(self.contains_unchecked(n))
    }

    pub(crate) fn contains_unchecked(&self, n: &MultiIndex) -> bool {
        self.generators.iter().any(|g| n.dominates(g))
    }

    /// `n ∈ C(I)`, the staircase complement.
    pub fn complement_contains(&self, n: &MultiIndex) -> Result<bool> {
        Ok(!self.contains_monomial(n)?)
    }

    /// The boxes whose union is `C(I)`.
    ///
    /// Each choice vector `s ∈ {0..m}^l` (one coordinate per generator)
    /// yields the box capping coordinate `c` at `min{α_i^c : s_i = c} - 1`;
    /// choices producing a negative cap are empty and skipped. The result is
    /// deduplicated and sorted. With `dedupe`, boxes contained in another
    /// box of the list are dropped as well.
    pub fn boxes_from_generators(&self, dedupe: bool) -> Vec<LatticeBox> {
        let l = self.generators.len();
        let mut found: BTreeSet<LatticeBox> = BTreeSet::new();
        let mut choice = vec![0usize; l];
        'choices: loop {
            let mut caps: Vec<Option<u32>> = vec![None; self.m];
            let mut nonempty = true;
            for (g, &c) in self.generators.iter().zip(&choice) {
                let bound = g.get(c);
                if bound == 0 {
                    nonempty = false;
                    break;
                }
                let cap = bound - 1;
                caps[c] = Some(caps[c].map_or(cap, |old| old.min(cap)));
            }
            if nonempty {
                let (coords, caps): (Vec<usize>, Vec<u32>) = caps
                    .iter()
                    .enumerate()
                    .filter_map(|(c, cap)| cap.map(|b| (c, b)))
                    .unzip();
                found.insert(LatticeBox::new(self.m, coords, caps).expect("coordinates are distinct"));
            }
            // odometer over {0..m}^l
            for slot in choice.iter_mut().rev() {
                *slot += 1;
                if *slot < self.m {
                    continue 'choices;
                }
                *slot = 0;
            }
            break;
        }
        let boxes: Vec<LatticeBox> = found.into_iter().collect();
        if !dedupe {
            return boxes;
        }
        boxes
            .iter()
            .filter(|b| {
                !boxes
                    .iter()
                    .any(|other| other != *b && b.is_subset_of(other).expect("same dimension"))
            })
            .cloned()
            .collect()
    }
}
