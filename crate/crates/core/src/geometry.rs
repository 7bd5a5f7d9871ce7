//! Box spaces as bundles over coordinate sub-balls, and the formal
//! alternating sum of the resolution.
//!
//! A box with capped coordinates `j` and caps `b` splits a multi-index `n`
//! into the fiber index `i = n|_j` and the free part `n' = n|_{j^c}`. Taking
//! `∂^i` in the capped variables and restricting to the sub-ball where they
//! vanish sends `z^n` to `i! z^{n'}`, landing in the weighted Bergman space
//! of weight `q + |i|` over the `(m-q)`-ball.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::complex::BoxComplex;
use crate::error::{Error, Result};
use crate::exact::{factorial, Surd};
use crate::lattice::{LatticeBox, MultiIndex, Shuffle};
use crate::toeplitz::omega;

/// Splits `n` into (fiber index on capped coordinates, free part).
fn split(region: &LatticeBox, n: &MultiIndex) -> (Vec<u32>, Vec<u32>) {
    let fiber = region.coords().iter().map(|&c| n.get(c)).collect();
    let free = (0..region.ambient_dim())
        .filter(|c| region.cap_of(*c).is_none())
        .map(|c| n.get(c))
        .collect();
    (fiber, free)
}

/// `‖R(z^n / √ω_0(n))‖` where `R` differentiates along the capped
/// coordinates and restricts to the sub-ball.
pub fn restriction_factor(region: &LatticeBox, n: &MultiIndex) -> Result<Surd> {
    if !region.contains(n)? {
        return Err(Error::OutsideBox(n.entries().to_vec()));
    }
    let m = region.ambient_dim();
    let q = region.capped_count();
    let (fiber, free) = split(region, n);
    let fiber_degree: u32 = fiber.iter().sum();
    let mut derivative = BigInt::from(1);
    for &i in &fiber {
        derivative *= BigInt::from(factorial(i as u64));
    }
    let image = omega(m - q, q as u32 + fiber_degree, &free)?;
    let source = omega(m, 0, n.entries())?;
    let squared = BigRational::from_integer(derivative.pow(2)) * image / source;
    Surd::sqrt(&squared)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BundleData {
    /// Complex dimension of the sub-ball.
    pub base_dim: usize,
    pub rank: usize,
    /// `q + |i|` for each fiber index `i ≤ b`, in lexicographic order of `i`.
    pub fiber_weights: Vec<u32>,
}

/// All `i` with `0 ≤ i ≤ caps` componentwise, lexicographic.
pub fn fiber_indices(caps: &[u32]) -> Vec<Vec<u32>> {
    if caps.is_empty() {
        return vec![Vec::new()];
    }
    caps.iter().map(|&b| 0..=b).multi_cartesian_product().collect()
}

pub fn bundle_report(region: &LatticeBox) -> BundleData {
    let q = region.capped_count();
    let fibers = fiber_indices(region.caps());
    BundleData {
        base_dim: region.ambient_dim() - q,
        rank: fibers.len(),
        fiber_weights: fibers.iter().map(|i| q as u32 + i.iter().sum::<u32>()).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiberFactor {
    pub fiber: Vec<u32>,
    pub factor: Surd,
    pub samples: usize,
    /// Every sampled `n'` gave exactly this factor.
    pub constant: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RestrictionSummary {
    pub region: LatticeBox,
    pub cutoff: u32,
    pub fibers: Vec<FiberFactor>,
    pub fiber_constant: bool,
    pub min_factor: f64,
    pub max_factor: f64,
    pub all_positive: bool,
    /// Distinct basis monomials have distinct `(i, n')` images.
    pub images_distinct: bool,
}

/// Evaluates the restriction factor on every truncated label of the box.
pub fn restriction_summary(region: &LatticeBox, cutoff: u32) -> Result<RestrictionSummary> {
    let labels = region.enumerate_truncated(cutoff);
    let mut by_fiber: BTreeMap<Vec<u32>, (Surd, usize, bool)> = BTreeMap::new();
    let mut images = BTreeSet::new();
    for n in &labels {
        let factor = restriction_factor(region, n)?;
        let (fiber, free) = split(region, n);
        images.insert((fiber.clone(), free));
        by_fiber
            .entry(fiber)
            .and_modify(|(f, count, same)| {
                *count += 1;
                *same &= *f == factor;
            })
            .or_insert((factor, 1, true));
    }
    let fibers: Vec<FiberFactor> = by_fiber
        .into_iter()
        .map(|(fiber, (factor, samples, constant))| FiberFactor {
            fiber,
            factor,
            samples,
            constant,
        })
        .collect();
    let values: Vec<f64> = fibers.iter().map(|f| f.factor.to_f64()).collect();
    Ok(RestrictionSummary {
        region: region.clone(),
        cutoff,
        fiber_constant: fibers.iter().all(|f| f.constant),
        min_factor: values.iter().copied().fold(f64::INFINITY, f64::min),
        max_factor: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        all_positive: values.iter().all(|&v| v > 0.0),
        images_distinct: images.len() == labels.len(),
        fibers,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KhomComponent {
    /// 1-based box positions.
    pub shuffle: Vec<usize>,
    pub region: LatticeBox,
    pub bundle: BundleData,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KhomTerm {
    pub level: usize,
    pub sign: i8,
    /// Placeholder name for the class of this level's Toeplitz extension.
    pub symbol: String,
    pub components: Vec<KhomComponent>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KhomReport {
    pub k: usize,
    pub lhs: String,
    pub terms: Vec<KhomTerm>,
    pub formula: String,
}

/// Bookkeeping for `[T(Q_I)] = [α_1] - [α_2] + ⋯ + (-1)^{k-1}[α_k]`.
pub fn khom_formal_sum(cx: &BoxComplex) -> KhomReport {
    let k = cx.k();
    let terms: Vec<KhomTerm> = (1..=k)
        .map(|q| {
            let components = cx
                .level(q)
                .components
                .iter()
                .map(|c| KhomComponent {
                    shuffle: c.shuffle.one_based(),
                    region: c.region.clone(),
                    bundle: bundle_report(&c.region),
                })
                .collect();
            KhomTerm {
                level: q,
                sign: if q % 2 == 1 { 1 } else { -1 },
                symbol: format!("alpha_{q}"),
                components,
            }
        })
        .collect();
    let formula = terms
        .iter()
        .enumerate()
        .map(|(idx, t)| {
            let op = match (idx, t.sign) {
                (0, _) => "",
                (_, 1) => " + ",
                _ => " - ",
            };
            format!("{op}[{}]", t.symbol)
        })
        .collect();
    KhomReport {
        k,
        lhs: "[T(Q_I)]".into(),
        terms,
        formula,
    }
}

/// Shuffles of a level, for callers that only need the component names.
pub fn level_shuffles(cx: &BoxComplex, q: usize) -> Vec<Shuffle> {
    cx.level(q).components.iter().map(|c| c.shuffle.clone()).collect()
}
