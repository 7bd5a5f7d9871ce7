//! The truncated box resolution `𝒜_0 → 𝒜_1 → ⋯ → 𝒜_k`.
//!
//! Level `q` is the direct sum, over `q`-element subsets `I` of the `k`
//! boxes, of the coefficient spaces of the intersections `ℬ_I`; level 0 is
//! the whole grid. `Ψ_q` copies coefficients from each `q`-face to each
//! `(q+1)`-face containing it, with sign `(-1)^i` when the face is obtained
//! by dropping the `i`-th smallest index (0-based). Every entry joins two
//! labels with the same multi-index, so the complex splits into one small
//! simplicial complex per multidegree; [`oracle`] exploits this.

mod oracle;

use std::collections::HashMap;

use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::Surd;
use crate::ideal::MonomialIdeal;
use crate::lattice::{intersect_family, shuffles, LatticeBox, MultiIndex, Shuffle};
use crate::linalg::SparseIntMatrix;
use crate::toeplitz;

pub use oracle::{oracle_sweep, per_degree_oracle, DegreeReport, SweepReport};

/// Power-iteration tolerance for `‖Ψ_q‖`.
pub const NORM_TOLERANCE: f64 = 1e-10;
/// Slack allowed on `‖Ψ_q‖² ≤ (k-q)(q+1)`.
pub const NORM_SLACK: f64 = 1e-9;

/// A basis vector `z^n` of the component `I` at level `q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisLabel {
    pub level: usize,
    pub component: Shuffle,
    pub n: MultiIndex,
}

#[derive(Clone, Debug)]
pub struct Component {
    pub shuffle: Shuffle,
    pub region: LatticeBox,
    pub points: Vec<MultiIndex>,
    offset: usize,
}

impl Component {
    pub fn offset(&self) -> usize {
        self.offset
    }
}

#[derive(Clone, Debug)]
pub struct Level {
    pub q: usize,
    pub components: Vec<Component>,
    index: HashMap<Shuffle, usize>,
    dim: usize,
}

impl Level {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn component_index(&self, shuffle: &Shuffle) -> Option<usize> {
        self.index.get(shuffle).copied()
    }

    /// Global position of `(component, n)` inside this level.
    pub fn position(&self, component: usize, n: &MultiIndex, cutoff: u32) -> Option<usize> {
        let c = &self.components[component];
        c.region.position_truncated(n, cutoff).map(|p| c.offset + p)
    }

    pub fn label(&self, idx: usize) -> BasisLabel {
        let ci = self.components.partition_point(|c| c.offset <= idx) - 1;
        let c = &self.components[ci];
        BasisLabel {
            level: self.q,
            component: c.shuffle.clone(),
            n: c.points[idx - c.offset].clone(),
        }
    }

    /// Multi-index of the label at `idx`.
    pub fn point(&self, idx: usize) -> &MultiIndex {
        let ci = self.components.partition_point(|c| c.offset <= idx) - 1;
        let c = &self.components[ci];
        &c.points[idx - c.offset]
    }

    pub fn labels(&self) -> impl Iterator<Item = BasisLabel> + '_ {
        self.components.iter().flat_map(move |c| {
            c.points.iter().map(move |n| BasisLabel {
                level: self.q,
                component: c.shuffle.clone(),
                n: n.clone(),
            })
        })
    }
}

/// `Ψ_q : 𝒜_q → 𝒜_{q+1}`; rows index level `q+1`, columns level `q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignMatrix {
    pub source_level: usize,
    pub matrix: SparseIntMatrix,
}

#[derive(Clone, Debug)]
pub struct BoxComplex {
    ideal: MonomialIdeal,
    boxes: Vec<LatticeBox>,
    cutoff: u32,
    dedupe: bool,
    levels: Vec<Level>,
    psi: Vec<SignMatrix>,
}

impl BoxComplex {
    /// Extracts the boxes of `ideal` and builds every level and map at cutoff `M`.
    pub fn build(ideal: &MonomialIdeal, cutoff: u32, dedupe: bool) -> Result<Self> {
        if ideal.is_unit() {
            return Err(Error::UnitIdeal);
        }
        let boxes = ideal.boxes_from_generators(dedupe);
        Self::from_boxes(ideal.clone(), boxes, cutoff, dedupe)
    }

    /// Builds the complex for an explicit, already ordered list of boxes.
    pub fn from_boxes(ideal: MonomialIdeal, boxes: Vec<LatticeBox>, cutoff: u32, dedupe: bool) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::ZeroCutoff);
        }
        if boxes.is_empty() {
            return Err(Error::UnitIdeal);
        }
        let m = ideal.ambient_dim();
        for b in &boxes {
            if b.ambient_dim() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: b.ambient_dim(),
                });
            }
        }
        let k = boxes.len();
        let mut levels = Vec::with_capacity(k + 1);
        for q in 0..=k {
            let mut components = Vec::new();
            let mut index = HashMap::new();
            let mut offset = 0;
            for shuffle in shuffles(q, k)? {
                let region = if q == 0 {
                    LatticeBox::full(m)
                } else {
                    intersect_family(&boxes, &shuffle)?
                };
                let points = region.enumerate_truncated(cutoff);
                index.insert(shuffle.clone(), components.len());
                let len = points.len();
                components.push(Component {
                    shuffle,
                    region,
                    points,
                    offset,
                });
                offset += len;
            }
            levels.push(Level {
                q,
                components,
                index,
                dim: offset,
            });
        }
        let mut cx = Self {
            ideal,
            boxes,
            cutoff,
            dedupe,
            levels,
            psi: Vec::with_capacity(k),
        };
        for q in 0..k {
            let psi = cx.build_psi(q)?;
            cx.psi.push(psi);
        }
        Ok(cx)
    }

    pub fn ideal(&self) -> &MonomialIdeal {
        &self.ideal
    }

    pub fn boxes(&self) -> &[LatticeBox] {
        &self.boxes
    }

    /// Number of boxes `k`.
    pub fn k(&self) -> usize {
        self.boxes.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ideal.ambient_dim()
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn dedupe(&self) -> bool {
        self.dedupe
    }

    pub fn level(&self, q: usize) -> &Level {
        &self.levels[q]
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn dims(&self) -> Vec<usize> {
        self.levels.iter().map(Level::dim).collect()
    }

    /// `Ψ_q`, built at construction.
    pub fn psi(&self, q: usize) -> Result<&SignMatrix> {
        self.psi.get(q).ok_or(Error::LevelOutOfRange { level: q, k: self.k() })
    }

    /// Assembles `Ψ_q` from the face maps.
    pub fn build_psi(&self, q: usize) -> Result<SignMatrix> {
        let k = self.k();
        if q >= k {
            return Err(Error::LevelOutOfRange { level: q, k });
        }
        let (source, target) = (&self.levels[q], &self.levels[q + 1]);
        let mut triplets = Vec::new();
        for face in &target.components {
            for i in 0..=q {
                let sub = face.shuffle.drop_at(i);
                let ci = source
                    .component_index(&sub)
                    .expect("every q-subset is a component");
                let sign = if i % 2 == 0 { 1 } else { -1 };
                for (pos, n) in face.points.iter().enumerate() {
                    let col = source
                        .position(ci, n, self.cutoff)
                        .expect("a face region lies inside each of its sub-face regions");
                    triplets.push((face.offset + pos, col, sign));
                }
            }
        }
        Ok(SignMatrix {
            source_level: q,
            matrix: SparseIntMatrix::from_triplets(target.dim(), source.dim(), triplets),
        })
    }

    /// Number of grid points whose monomial lies in the ideal.
    pub fn ideal_monomial_count(&self) -> usize {
        self.levels[0].components[0]
            .points
            .iter()
            .filter(|n| self.ideal.contains_unchecked(n))
            .count()
    }

    /// Entries of `Ψ_q` joining labels with different multi-indices.
    pub fn multidegree_violations(&self, q: usize) -> Result<usize> {
        let psi = self.psi(q)?;
        let (source, target) = (&self.levels[q], &self.levels[q + 1]);
        Ok(psi
            .matrix
            .triplets()
            .filter(|&(r, c, _)| target.point(r) != source.point(c))
            .count())
    }

    pub fn exactness_report(&self) -> Result<ExactnessReport> {
        let k = self.k();
        let dims = self.dims();
        let ranks = self
            .psi
            .iter()
            .map(|p| p.matrix.rank())
            .collect::<Result<Vec<_>>>()?;
        let ideal_monomials = self.ideal_monomial_count();
        let mut checks = Vec::new();
        for q in 0..k {
            checks.push(Check::new("multidegree_preserved", q, 0, self.multidegree_violations(q)?));
        }
        for q in 0..k.saturating_sub(1) {
            let composite = self.psi[q + 1].matrix.mul(&self.psi[q].matrix)?;
            checks.push(Check::new("psi_composition_zero", q, 0, composite.nnz()));
        }
        checks.push(Check::new("kernel_is_ideal", 0, ideal_monomials, dims[0] - ranks[0]));
        for q in 1..k {
            checks.push(Check::new("kernel_equals_image", q, ranks[q - 1], dims[q] - ranks[q]));
        }
        checks.push(Check::new("top_map_surjective", k, dims[k], ranks[k - 1]));
        let pass = checks.iter().all(|c| c.pass);
        Ok(ExactnessReport {
            k,
            cutoff: self.cutoff,
            dims,
            ranks,
            ideal_monomials,
            checks,
            pass,
        })
    }

    /// `‖Ψ_q‖²` against `(k-q)(q+1)`.
    pub fn psi_norm_bound_check(&self, q: usize) -> Result<NormReport> {
        let psi = self.psi(q)?;
        let norm = psi.matrix.largest_singular_value(NORM_TOLERANCE);
        let norm_sq = norm * norm;
        let bound = ((self.k() - q) * (q + 1)) as f64;
        Ok(NormReport {
            q,
            k: self.k(),
            norm_sq,
            bound,
            pass: norm_sq <= bound + NORM_SLACK,
        })
    }

    /// Exact basis of `ker Ψ_q`; at `q = k` this is the whole of `𝒜_k`.
    pub fn kernel_basis(&self, q: usize) -> Result<Vec<Vec<(usize, BigRational)>>> {
        let k = self.k();
        if q > k {
            return Err(Error::LevelOutOfRange { level: q, k });
        }
        if q == k {
            let one = BigRational::from_integer(1.into());
            return Ok((0..self.levels[k].dim()).map(|i| vec![(i, one.clone())]).collect());
        }
        self.psi[q].matrix.kernel_basis()
    }

    /// Checks `T_p Ψ_q = Ψ_q T_p` on every level-`q` basis vector whose
    /// `z_p`-shift stays inside the truncation.
    pub fn module_morphism_check(&self, q: usize, p: usize) -> Result<MorphismReport> {
        let m = self.ambient_dim();
        if p >= m {
            return Err(Error::CoordinateOutOfRange { coord: p, m });
        }
        let psi = &self.psi(q)?.matrix;
        let psi_t = psi.transpose();
        let (source, target) = (&self.levels[q], &self.levels[q + 1]);
        let mut checked = 0;
        let mut mismatches = 0;
        for (ci, comp) in source.components.iter().enumerate() {
            for n in &comp.points {
                if n.get(p) + 1 >= self.cutoff {
                    continue;
                }
                checked += 1;
                let col = source.position(ci, n, self.cutoff).unwrap();
                let shifted = n.shifted_up(p);
                let weight = toeplitz::shift_weight(m, 0, n, p)?;

                // Ψ_q (T_p z^n): T_p keeps the component, so shift then copy.
                let mut lhs: HashMap<usize, Surd> = HashMap::new();
                if let Some(dest) = source.position(ci, &shifted, self.cutoff) {
                    for &(row, sign) in psi_t.row(dest) {
                        let v = Surd::from_int(sign) * weight.clone();
                        add_into(&mut lhs, row, v);
                    }
                }
                // T_p (Ψ_q z^n): copy, then shift inside each target component.
                let mut rhs: HashMap<usize, Surd> = HashMap::new();
                for &(row, sign) in psi_t.row(col) {
                    let label = target.label(row);
                    let ti = target.component_index(&label.component).unwrap();
                    if let Some(dest) = target.position(ti, &shifted, self.cutoff) {
                        add_into(&mut rhs, dest, Surd::from_int(sign) * weight.clone());
                    }
                }
                if lhs != rhs {
                    mismatches += 1;
                }
            }
        }
        Ok(MorphismReport {
            q,
            p,
            columns_checked: checked,
            mismatches,
            pass: mismatches == 0,
        })
    }
}

fn add_into(acc: &mut HashMap<usize, Surd>, key: usize, v: Surd) {
    let slot = acc.entry(key).or_default();
    *slot = std::mem::take(slot) + v;
    if slot.is_zero() {
        acc.remove(&key);
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub level: usize,
    pub expected: usize,
    pub actual: usize,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, level: usize, expected: usize, actual: usize) -> Self {
        Self {
            name: name.to_string(),
            level,
            expected,
            actual,
            pass: expected == actual,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExactnessReport {
    pub k: usize,
    pub cutoff: u32,
    pub dims: Vec<usize>,
    pub ranks: Vec<usize>,
    pub ideal_monomials: usize,
    pub checks: Vec<Check>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormReport {
    pub q: usize,
    pub k: usize,
    pub norm_sq: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MorphismReport {
    pub q: usize,
    pub p: usize,
    pub columns_checked: usize,
    pub mismatches: usize,
    pub pass: bool,
}
