//! Bergman weights and truncated Toeplitz operators on box spaces.
//!
//! In the orthonormal basis `z^n / √ω_s(n)` multiplication by `z_p` is the
//! weighted shift `z^n ↦ √(ω_s(n+e_p)/ω_s(n)) z^{n+e_p}`. On a box space
//! the shift is compressed: it is zero whenever `n+e_p` leaves the box.
//! Truncation at cutoff `M` keeps labels with every coordinate `< M`; rows
//! and columns touching the outermost shell (a coordinate equal to `M-1`)
//! are not faithful to the untruncated operator and are skipped by the
//! diagnostics.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{factorial, format_rational, Surd};
use crate::ideal::MonomialIdeal;
use crate::lattice::{LatticeBox, MultiIndex};
use crate::linalg::blockwise_singular_values;

/// Default degree window for power-law fits.
pub const FIT_WINDOW: (u64, u64) = (20, 200);

/// `ω_s(n) = n_1!⋯n_m! (m+s)! / (|n|+s+m)!`, the squared norm of `z^n`
/// in the weighted Bergman space of the unit ball in `ℂ^m`.
///
/// `m = 0` is allowed and gives 1 (the space over a point).
pub fn omega(m: usize, s: u32, n: &[u32]) -> Result<BigRational> {
    if n.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: n.len(),
        });
    }
    let mut numer = factorial((m as u64) + s as u64);
    for &x in n {
        numer *= factorial(x as u64);
    }
    let degree: u64 = n.iter().map(|&x| x as u64).sum();
    let denom = factorial(degree + s as u64 + m as u64);
    Ok(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
}

/// `ω_s(n+e_p) / ω_s(n)` after cancelling factorials: `(n_p+1)/(|n|+s+m+1)`.
pub fn shift_ratio(m: usize, s: u32, n: &MultiIndex, p: usize) -> Result<BigRational> {
    n.check_dim(m)?;
    if p >= m {
        return Err(Error::CoordinateOutOfRange { coord: p, m });
    }
    let denom = n.degree() + s as u64 + m as u64 + 1;
    Ok(BigRational::new(
        BigInt::from(n.get(p) as u64 + 1),
        BigInt::from(denom),
    ))
}

/// `√(ω_s(n+e_p) / ω_s(n))`, the coefficient of the `z_p` shift at `n`.
pub fn shift_weight(m: usize, s: u32, n: &MultiIndex, p: usize) -> Result<Surd> {
    Surd::sqrt(&shift_ratio(m, s, n, p)?)
}

/// A finite real matrix indexed by multi-index labels, with exact entries.
///
/// Row and column labels are kept in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "OperatorRepr", try_from = "OperatorRepr")]
pub struct TruncatedOperator {
    m: usize,
    cutoff: u32,
    rows: Vec<MultiIndex>,
    cols: Vec<MultiIndex>,
    entries: Vec<Vec<(usize, Surd)>>,
}

#[derive(Serialize, Deserialize)]
struct OperatorRepr {
    m: usize,
    cutoff: u32,
    rows: Vec<MultiIndex>,
    cols: Vec<MultiIndex>,
    /// `(row, col, value)` with 0-based positions into `rows` / `cols`.
    entries: Vec<(usize, usize, Surd)>,
}

impl From<TruncatedOperator> for OperatorRepr {
    fn from(op: TruncatedOperator) -> Self {
        let entries = op
            .entries
            .into_iter()
            .enumerate()
            .flat_map(|(r, row)| row.into_iter().map(move |(c, v)| (r, c, v)))
            .collect();
        OperatorRepr {
            m: op.m,
            cutoff: op.cutoff,
            rows: op.rows,
            cols: op.cols,
            entries,
        }
    }
}

impl TryFrom<OperatorRepr> for TruncatedOperator {
    type Error = Error;
    fn try_from(repr: OperatorRepr) -> Result<Self> {
        let mut op = TruncatedOperator::zero(repr.m, repr.cutoff, repr.rows, repr.cols)?;
        for (r, c, v) in repr.entries {
            op.insert(r, c, v)?;
        }
        Ok(op)
    }
}

impl TruncatedOperator {
    pub fn zero(m: usize, cutoff: u32, rows: Vec<MultiIndex>, cols: Vec<MultiIndex>) -> Result<Self> {
        for label in rows.iter().chain(&cols) {
            label.check_dim(m)?;
        }
        if !rows.windows(2).all(|w| w[0] < w[1]) || !cols.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::ShapeMismatch("labels must be strictly increasing".into()));
        }
        let n_rows = rows.len();
        Ok(Self {
            m,
            cutoff,
            rows,
            cols,
            entries: vec![Vec::new(); n_rows],
        })
    }

    fn square(m: usize, cutoff: u32, labels: Vec<MultiIndex>) -> Self {
        let n = labels.len();
        Self {
            m,
            cutoff,
            rows: labels.clone(),
            cols: labels,
            entries: vec![Vec::new(); n],
        }
    }

    /// Adds `v` to entry `(r, c)`.
    pub fn insert(&mut self, r: usize, c: usize, v: Surd) -> Result<()> {
        if r >= self.rows.len() || c >= self.cols.len() {
            return Err(Error::IndexOutOfRange {
                index: r.max(c),
                len: self.rows.len().min(self.cols.len()),
            });
        }
        let row = &mut self.entries[r];
        match row.binary_search_by_key(&c, |e| e.0) {
            Ok(pos) => {
                let sum = std::mem::take(&mut row[pos].1) + v;
                if sum.is_zero() {
                    row.remove(pos);
                } else {
                    row[pos].1 = sum;
                }
            }
            Err(pos) => {
                if !v.is_zero() {
                    row.insert(pos, (c, v));
                }
            }
        }
        Ok(())
    }

    pub fn ambient_dim(&self) -> usize {
        self.m
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn rows(&self) -> &[MultiIndex] {
        &self.rows
    }

    pub fn cols(&self) -> &[MultiIndex] {
        &self.cols
    }

    pub fn row_index(&self, label: &MultiIndex) -> Option<usize> {
        self.rows.binary_search(label).ok()
    }

    pub fn col_index(&self, label: &MultiIndex) -> Option<usize> {
        self.cols.binary_search(label).ok()
    }

    pub fn get(&self, r: usize, c: usize) -> Surd {
        self.entries[r]
            .binary_search_by_key(&c, |e| e.0)
            .map(|pos| self.entries[r][pos].1.clone())
            .unwrap_or_default()
    }

    /// Entry between two labels; zero when either label is absent.
    pub fn get_by_label(&self, row: &MultiIndex, col: &MultiIndex) -> Surd {
        match (self.row_index(row), self.col_index(col)) {
            (Some(r), Some(c)) => self.get(r, c),
            _ => Surd::zero(),
        }
    }

    /// Nonzero entries as `(row, col, value)`, row-major.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Surd)> {
        self.entries
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |(c, v)| (r, *c, v)))
    }

    pub fn nnz(&self) -> usize {
        self.entries.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.nnz() == 0
    }

    /// Conjugate transpose (all entries are real).
    pub fn adjoint(&self) -> Self {
        let mut entries: Vec<Vec<(usize, Surd)>> = vec![Vec::new(); self.cols.len()];
        for (r, c, v) in self.entries() {
            entries[c].push((r, v.clone()));
        }
        Self {
            m: self.m,
            cutoff: self.cutoff,
            rows: self.cols.clone(),
            cols: self.rows.clone(),
            entries,
        }
    }

    pub fn mul(&self, rhs: &TruncatedOperator) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::ShapeMismatch("inner labels differ".into()));
        }
        let mut entries = Vec::with_capacity(self.rows.len());
        for row in &self.entries {
            let mut acc: BTreeMap<usize, Surd> = BTreeMap::new();
            for (k, a) in row {
                for (c, b) in &rhs.entries[*k] {
                    let slot = acc.entry(*c).or_default();
                    *slot = std::mem::take(slot) + a * b;
                }
            }
            entries.push(acc.into_iter().filter(|(_, v)| !v.is_zero()).collect());
        }
        Ok(Self {
            m: self.m,
            cutoff: self.cutoff.min(rhs.cutoff),
            rows: self.rows.clone(),
            cols: rhs.cols.clone(),
            entries,
        })
    }

    pub fn sub(&self, rhs: &TruncatedOperator) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::ShapeMismatch("labels differ".into()));
        }
        let mut out = self.clone();
        for (r, c, v) in rhs.entries() {
            out.insert(r, c, -v.clone())?;
        }
        Ok(out)
    }

    /// The block on the given row and column labels (each must be present).
    pub fn compress(&self, rows: &[MultiIndex], cols: &[MultiIndex]) -> Result<Self> {
        let row_ids = rows
            .iter()
            .map(|l| self.row_index(l).ok_or_else(|| Error::OutsideTruncation(l.entries().to_vec())))
            .collect::<Result<Vec<_>>>()?;
        let col_pos: BTreeMap<usize, usize> = cols
            .iter()
            .enumerate()
            .map(|(new, l)| {
                self.col_index(l)
                    .map(|old| (old, new))
                    .ok_or_else(|| Error::OutsideTruncation(l.entries().to_vec()))
            })
            .collect::<Result<_>>()?;
        let mut out = Self::zero(self.m, self.cutoff, rows.to_vec(), cols.to_vec())?;
        for (new_r, &old_r) in row_ids.iter().enumerate() {
            for (c, v) in &self.entries[old_r] {
                if let Some(&new_c) = col_pos.get(c) {
                    out.entries[new_r].push((new_c, v.clone()));
                }
            }
            out.entries[new_r].sort_by_key(|e| e.0);
        }
        Ok(out)
    }

    /// Labels with a coordinate on the outermost shell `M-1`.
    pub fn boundary_rows(&self) -> usize {
        self.rows.iter().filter(|n| !n.is_interior(self.cutoff)).count()
    }

    pub fn to_f64_triplets(&self) -> Vec<(usize, usize, f64)> {
        self.entries().map(|(r, c, v)| (r, c, v.to_f64())).collect()
    }

    /// Matrix Market coordinate format (1-based, real, general).
    pub fn to_matrix_market(&self) -> String {
        let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
        out.push_str(&format!("% m={} cutoff={}\n", self.m, self.cutoff));
        out.push_str(&format!("{} {} {}\n", self.rows.len(), self.cols.len(), self.nnz()));
        for (r, c, v) in self.entries() {
            out.push_str(&format!("{} {} {:.17e}\n", r + 1, c + 1, v.to_f64()));
        }
        out
    }
}

fn check_coord(m: usize, p: usize) -> Result<()> {
    if p >= m {
        return Err(Error::CoordinateOutOfRange { coord: p, m });
    }
    Ok(())
}

/// `T_{z_p}` on the box space, truncated at `cutoff`, in the weight-`s` space.
pub fn toeplitz_matrix(region: &LatticeBox, p: usize, cutoff: u32, weight: u32) -> Result<TruncatedOperator> {
    let m = region.ambient_dim();
    check_coord(m, p)?;
    let labels = region.enumerate_truncated(cutoff);
    let mut op = TruncatedOperator::square(m, cutoff, labels);
    for c in 0..op.cols.len() {
        let n = &op.cols[c];
        let up = n.shifted_up(p);
        if !up.within(cutoff) || !region.contains_unchecked(&up) {
            continue;
        }
        let r = op.row_index(&up).expect("shift stays in the enumerated box");
        let w = shift_weight(m, weight, n, p)?;
        op.insert(r, c, w)?;
    }
    Ok(op)
}

/// The 0/1 diagonal projection onto `region` within the given labels.
fn projection(m: usize, cutoff: u32, labels: &[MultiIndex], region: &LatticeBox) -> TruncatedOperator {
    let mut op = TruncatedOperator::square(m, cutoff, labels.to_vec());
    for (i, n) in labels.iter().enumerate() {
        if region.contains_unchecked(n) {
            op.entries[i].push((i, Surd::one()));
        }
    }
    op
}

/// `[P, T_{z_s}] = P T_{z_s} - T_{z_s} P` for the box projection `P`.
///
/// The commutator vanishes on columns outside the box and only reaches one
/// step past it in direction `s`, so it is represented on the labels of the
/// box with its cap on `s` raised by one.
pub fn projection_commutator(region: &LatticeBox, s: usize, cutoff: u32, weight: u32) -> Result<TruncatedOperator> {
    let m = region.ambient_dim();
    check_coord(m, s)?;
    let thick = region.thickened(s);
    let shift = toeplitz_matrix(&thick, s, cutoff, weight)?;
    let proj = projection(m, cutoff, shift.rows(), region);
    proj.mul(&shift)?.sub(&shift.mul(&proj)?)
}

/// `T_s* T_t - T_t T_s*` on the box space.
///
/// Both products send `z^n` to a multiple of `z^{n+e_t-e_s}`, so each column
/// has at most one entry; it is assembled directly from the shift weights
/// of the truncated factors.
pub fn self_commutator(region: &LatticeBox, s: usize, t: usize, cutoff: u32, weight: u32) -> Result<TruncatedOperator> {
    let m = region.ambient_dim();
    check_coord(m, s)?;
    check_coord(m, t)?;
    let inside = |n: &MultiIndex| n.within(cutoff) && region.contains_unchecked(n);
    let labels = region.enumerate_truncated(cutoff);
    let mut op = TruncatedOperator::square(m, cutoff, labels);
    for c in 0..op.cols.len() {
        let n = op.cols[c].clone();
        let target = match n.shifted_up(t).shifted_down(s) {
            Some(target) => target,
            None => continue,
        };
        let mut value = Surd::zero();
        // T_s* T_t: up along t, then down along s
        if inside(&n.shifted_up(t)) {
            value = value + shift_weight(m, weight, &n, t)? * shift_weight(m, weight, &target, s)?;
        }
        // T_t T_s*: down along s, then up along t
        if let Some(down) = n.shifted_down(s) {
            if inside(&target) {
                value = value - shift_weight(m, weight, &down, s)? * shift_weight(m, weight, &down, t)?;
            }
        }
        if value.is_zero() {
            continue;
        }
        let r = op.row_index(&target).expect("target label lies in the truncated box");
        op.insert(r, c, value)?;
    }
    Ok(op)
}

/// Compression of `T_{z_p}` to the span of the monomials outside the ideal.
pub fn quotient_toeplitz(ideal: &MonomialIdeal, p: usize, cutoff: u32, weight: u32) -> Result<TruncatedOperator> {
    if ideal.is_unit() {
        return Err(Error::UnitIdeal);
    }
    let m = ideal.ambient_dim();
    check_coord(m, p)?;
    let labels: Vec<MultiIndex> = LatticeBox::full(m)
        .enumerate_truncated(cutoff)
        .into_iter()
        .filter(|n| !ideal.contains_unchecked(n))
        .collect();
    let mut op = TruncatedOperator::square(m, cutoff, labels);
    for c in 0..op.cols.len() {
        let up = op.cols[c].shifted_up(p);
        if let Some(r) = op.row_index(&up) {
            let w = shift_weight(m, weight, &op.cols[c], p)?;
            op.insert(r, c, w)?;
        }
    }
    Ok(op)
}

/// Labels of the quotient basis (the staircase complement under the cutoff).
pub fn quotient_dimension(ideal: &MonomialIdeal, cutoff: u32) -> usize {
    LatticeBox::full(ideal.ambient_dim())
        .enumerate_truncated(cutoff)
        .iter()
        .filter(|n| !ideal.contains_unchecked(n))
        .count()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Shell {
    pub degree: u64,
    pub max_abs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayProfile {
    /// Largest interior entry magnitude per column degree.
    pub shells: Vec<Shell>,
    pub fit_window: (u64, u64),
    /// Least-squares slope of `log max_abs` against `log degree` inside the window.
    pub exponent: Option<f64>,
    pub boundary_rows: usize,
}

impl DecayProfile {
    pub fn max_at(&self, degree: u64) -> f64 {
        self.shells
            .iter()
            .find(|s| s.degree == degree)
            .map_or(0.0, |s| s.max_abs)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("degree,max_abs\n");
        for s in &self.shells {
            out.push_str(&format!("{},{:e}\n", s.degree, s.max_abs));
        }
        out
    }
}

/// Interior entries only: both labels must have headroom in every coordinate.
pub fn decay_profile(op: &TruncatedOperator) -> DecayProfile {
    decay_profile_in(op, FIT_WINDOW)
}

pub fn decay_profile_in(op: &TruncatedOperator, window: (u64, u64)) -> DecayProfile {
    let mut by_degree: BTreeMap<u64, f64> = BTreeMap::new();
    let max_degree = op.cols.iter().map(MultiIndex::degree).max().unwrap_or(0);
    for d in 0..=max_degree {
        by_degree.insert(d, 0.0);
    }
    for (r, c, v) in op.entries() {
        let (row, col) = (&op.rows[r], &op.cols[c]);
        if !row.is_interior(op.cutoff) || !col.is_interior(op.cutoff) {
            continue;
        }
        let slot = by_degree.entry(col.degree()).or_insert(0.0);
        *slot = slot.max(v.to_f64().abs());
    }
    let shells: Vec<Shell> = by_degree
        .into_iter()
        .map(|(degree, max_abs)| Shell { degree, max_abs })
        .collect();
    let points: Vec<(f64, f64)> = shells
        .iter()
        .filter(|s| s.degree >= window.0 && s.degree <= window.1 && s.max_abs > 0.0)
        .map(|s| ((s.degree as f64).ln(), s.max_abs.ln()))
        .collect();
    DecayProfile {
        shells,
        fit_window: window,
        exponent: least_squares_slope(&points),
        boundary_rows: op.boundary_rows(),
    }
}

fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesVerdict {
    Converging,
    Diverging,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartialSum {
    pub cutoff: u32,
    pub sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchattenReport {
    pub p: String,
    pub sums: Vec<PartialSum>,
    /// Slope of `log(ΔS/ΔM)` against `log M`; below `-1` the tail is summable.
    pub tail_slope: Option<f64>,
    pub verdict: SeriesVerdict,
}

/// `Σ σ_i^p` of `op` restricted to interior labels below each cutoff.
///
/// Cutoffs must not exceed `op.cutoff() - 1`. The verdict reads the growth
/// of the increments: a series whose increments per unit of cutoff decay
/// faster than `1/M` is flagged converging, slower than `M^-0.9` diverging.
/// This is a diagnostic, not a proof.
pub fn schatten_partial_sums(op: &TruncatedOperator, p: &BigRational, cutoffs: &[u32]) -> Result<SchattenReport> {
    let exponent = p.to_f64().unwrap_or(f64::NAN);
    if exponent.is_nan() || exponent <= 0.0 {
        return Err(Error::NonPositiveExponent);
    }
    let mut sorted = cutoffs.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut sums = Vec::with_capacity(sorted.len());
    for &cut in &sorted {
        if cut + 1 > op.cutoff {
            return Err(Error::OutsideTruncation(vec![cut]));
        }
        let keep = |n: &MultiIndex| n.within(cut) && n.is_interior(op.cutoff);
        let rows: Vec<MultiIndex> = op.rows.iter().filter(|n| keep(n)).cloned().collect();
        let cols: Vec<MultiIndex> = op.cols.iter().filter(|n| keep(n)).cloned().collect();
        let block = op.compress(&rows, &cols)?;
        let sv = blockwise_singular_values(rows.len(), cols.len(), &block.to_f64_triplets());
        let sum = sv.iter().filter(|&&s| s > 0.0).map(|s| s.powf(exponent)).sum();
        sums.push(PartialSum { cutoff: cut, sum });
    }
    let increments: Vec<(f64, f64)> = sums
        .windows(2)
        .filter_map(|w| {
            let dm = (w[1].cutoff - w[0].cutoff) as f64;
            let ds = w[1].sum - w[0].sum;
            let mid = 0.5 * (w[0].cutoff + w[1].cutoff) as f64;
            (ds > 0.0).then(|| (mid.ln(), (ds / dm).ln()))
        })
        .collect();
    let all_flat = sums.len() >= 3 && sums.windows(2).all(|w| w[1].sum - w[0].sum <= 1e-300);
    let tail_slope = least_squares_slope(&increments);
    let verdict = if all_flat {
        SeriesVerdict::Converging
    } else {
        match tail_slope {
            Some(s) if s < -1.1 => SeriesVerdict::Converging,
            Some(s) if s > -0.9 => SeriesVerdict::Diverging,
            _ => SeriesVerdict::Inconclusive,
        }
    };
    Ok(SchattenReport {
        p: format_rational(p),
        sums,
        tail_slope,
        verdict,
    })
}
