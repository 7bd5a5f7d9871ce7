//! Sparse exact integer elimination and a few floating-point helpers.

use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

type Row = Vec<(usize, i128)>;

/// Sparse integer matrix in row-major form; each row sorted by column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseIntMatrix {
    n_rows: usize,
    n_cols: usize,
    rows: Vec<Vec<(usize, i64)>>,
}

impl SparseIntMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            rows: vec![Vec::new(); n_rows],
        }
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: impl IntoIterator<Item = (usize, usize, i64)>) -> Self {
        let mut rows: Vec<BTreeMap<usize, i64>> = vec![BTreeMap::new(); n_rows];
        for (r, c, v) in triplets {
            assert!(r < n_rows && c < n_cols, "triplet ({r}, {c}) outside {n_rows}x{n_cols}");
            *rows[r].entry(c).or_insert(0) += v;
        }
        let rows = rows
            .into_iter()
            .map(|row| row.into_iter().filter(|&(_, v)| v != 0).collect())
            .collect();
        Self { n_rows, n_cols, rows }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, r: usize) -> &[(usize, i64)] {
        &self.rows[r]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |&(c, v)| (r, c, v)))
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(Vec::is_empty)
    }

    pub fn transpose(&self) -> Self {
        let mut rows = vec![Vec::new(); self.n_cols];
        for (r, c, v) in self.triplets() {
            rows[c].push((r, v));
        }
        Self {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            rows,
        }
    }

    /// Exact product `self · rhs`.
    pub fn mul(&self, rhs: &SparseIntMatrix) -> Result<SparseIntMatrix> {
        if self.n_cols != rhs.n_rows {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} times {}x{}",
                self.n_rows, self.n_cols, rhs.n_rows, rhs.n_cols
            )));
        }
        let mut rows = Vec::with_capacity(self.n_rows);
        for row in &self.rows {
            let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
            for &(k, a) in row {
                for &(c, b) in &rhs.rows[k] {
                    let prod = a.checked_mul(b).ok_or(Error::Overflow)?;
                    let slot = acc.entry(c).or_insert(0);
                    *slot = slot.checked_add(prod).ok_or(Error::Overflow)?;
                }
            }
            rows.push(acc.into_iter().filter(|&(_, v)| v != 0).collect());
        }
        Ok(Self {
            n_rows: self.n_rows,
            n_cols: rhs.n_cols,
            rows,
        })
    }

    /// `y = A x` in floating point.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(c, v)| v as f64 * x[c]).sum())
            .collect()
    }

    /// `y = Aᵀ x` in floating point.
    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_cols];
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                y[c] += v as f64 * x[r];
            }
        }
        y
    }

    /// Row echelon form by fraction-free elimination, keyed by leading column.
    fn echelon(&self) -> Result<BTreeMap<usize, Row>> {
        let mut pivots: BTreeMap<usize, Row> = BTreeMap::new();
        for row in &self.rows {
            let mut r: Row = row.iter().map(|&(c, v)| (c, v as i128)).collect();
            while let Some(&(lead, a)) = r.first() {
                match pivots.get(&lead) {
                    Some(p) => r = cancel_lead(&r, a, p)?,
                    None => {
                        normalize(&mut r);
                        pivots.insert(lead, r);
                        break;
                    }
                }
            }
        }
        Ok(pivots)
    }

    /// Exact rank over ℚ.
    pub fn rank(&self) -> Result<usize> {
        Ok(self.echelon()?.len())
    }

    /// Exact basis of the null space `{x : A x = 0}` as sparse rational vectors,
    /// one per non-pivot column, with a `1` in that column.
    pub fn kernel_basis(&self) -> Result<Vec<Vec<(usize, BigRational)>>> {
        let pivots = self.echelon()?;
        // column -> leading columns of the pivot rows that touch it (off the lead)
        let mut touching: HashMap<usize, Vec<usize>> = HashMap::new();
        for (&lead, row) in &pivots {
            for &(c, _) in &row[1..] {
                touching.entry(c).or_default().push(lead);
            }
        }
        let mut basis = Vec::new();
        for free in (0..self.n_cols).filter(|c| !pivots.contains_key(c)) {
            let mut v: BTreeMap<usize, BigRational> = BTreeMap::new();
            v.insert(free, BigRational::from_integer(1.into()));
            let mut queue: BinaryHeap<usize> = BinaryHeap::new();
            let mut queued: HashSet<usize> = HashSet::new();
            for &lead in touching.get(&free).into_iter().flatten() {
                if queued.insert(lead) {
                    queue.push(lead);
                }
            }
            // Pivot rows only reference columns right of their lead, so
            // resolving leads in descending order sees final values.
            while let Some(lead) = queue.pop() {
                let row = &pivots[&lead];
                let mut sum = BigRational::zero();
                for &(c, a) in &row[1..] {
                    if let Some(x) = v.get(&c) {
                        sum += x * BigRational::from_integer(BigInt::from(a));
                    }
                }
                if sum.is_zero() {
                    continue;
                }
                let value = -sum / BigRational::from_integer(BigInt::from(row[0].1));
                v.insert(lead, value);
                for &next in touching.get(&lead).into_iter().flatten() {
                    if queued.insert(next) {
                        queue.push(next);
                    }
                }
            }
            basis.push(v.into_iter().collect());
        }
        Ok(basis)
    }

    /// Largest singular value by power iteration on `AᵀA`.
    ///
    /// Stops once the Rayleigh quotient changes by at most `tol` (relative)
    /// and the eigen-residual is at most `√tol`.
    pub fn largest_singular_value(&self, tol: f64) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut x: Vec<f64> = (0..self.n_cols).map(|_| rng.gen_range(0.5..1.5)).collect();
        normalize_f64(&mut x);
        let mut lambda = 0.0f64;
        for _ in 0..100_000 {
            let y = self.apply_transpose(&self.apply(&x));
            let next: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            let residual = y
                .iter()
                .zip(&x)
                .map(|(yi, xi)| (yi - next * xi).powi(2))
                .sum::<f64>()
                .sqrt();
            let settled = (next - lambda).abs() <= tol * next.max(1.0) && residual <= tol.sqrt();
            lambda = next;
            x = y;
            if normalize_f64(&mut x) == 0.0 || settled {
                break;
            }
        }
        lambda.max(0.0).sqrt()
    }
}

fn normalize_f64(x: &mut [f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

/// `p[0]·r - r[0]·p`, which has no entry at the shared leading column.
fn cancel_lead(r: &Row, a: i128, p: &Row) -> Result<Row> {
    let b = p[0].1;
    let g = a.gcd(&b);
    let (ra, pb) = (b / g, a / g);
    let mut out = Vec::with_capacity(r.len() + p.len());
    let (mut i, mut j) = (1, 1);
    let scaled = |x: i128, k: i128| x.checked_mul(k).ok_or(Error::Overflow);
    while i < r.len() || j < p.len() {
        let (c, v) = match (r.get(i), p.get(j)) {
            (Some(&(cr, vr)), Some(&(cp, vp))) if cr == cp => {
                i += 1;
                j += 1;
                (cr, scaled(vr, ra)?.checked_sub(scaled(vp, pb)?).ok_or(Error::Overflow)?)
            }
            (Some(&(cr, vr)), Some(&(cp, _))) if cr < cp => {
                i += 1;
                (cr, scaled(vr, ra)?)
            }
            (Some(&(cr, vr)), None) => {
                i += 1;
                (cr, scaled(vr, ra)?)
            }
            (_, Some(&(cp, vp))) => {
                j += 1;
                (cp, -scaled(vp, pb)?)
            }
            (None, None) => unreachable!(),
        };
        if v != 0 {
            out.push((c, v));
        }
    }
    normalize(&mut out);
    Ok(out)
}

/// Divides out the content and makes the leading entry positive.
fn normalize(r: &mut Row) {
    let g = r.iter().fold(0i128, |g, &(_, v)| g.gcd(&v));
    if g == 0 {
        return;
    }
    let g = if r[0].1 < 0 { -g } else { g };
    r.iter_mut().for_each(|(_, v)| *v /= g);
}

/// All singular values of a sparse real matrix, computed per connected
/// block of its row/column incidence graph.
pub fn blockwise_singular_values(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Vec<f64> {
    let mut parent: Vec<usize> = (0..n_rows + n_cols).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(r, c, _) in triplets {
        let (a, b) = (find(&mut parent, r), find(&mut parent, n_rows + c));
        if a != b {
            parent[a] = b;
        }
    }
    let mut blocks: BTreeMap<usize, Vec<(usize, usize, f64)>> = BTreeMap::new();
    for &t in triplets {
        let root = find(&mut parent, t.0);
        blocks.entry(root).or_default().push(t);
    }
    let mut out = Vec::new();
    for entries in blocks.values() {
        let mut row_ids: BTreeMap<usize, usize> = BTreeMap::new();
        let mut col_ids: BTreeMap<usize, usize> = BTreeMap::new();
        for &(r, c, _) in entries {
            let nr = row_ids.len();
            row_ids.entry(r).or_insert(nr);
            let nc = col_ids.len();
            col_ids.entry(c).or_insert(nc);
        }
        let mut dense = DMatrix::<f64>::zeros(row_ids.len(), col_ids.len());
        for &(r, c, v) in entries {
            dense[(row_ids[&r], col_ids[&c])] += v;
        }
        out.extend(dense.singular_values().iter().copied());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(rows: &[&[i64]]) -> SparseIntMatrix {
        let n_cols = rows.first().map_or(0, |r| r.len());
        let triplets = rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().enumerate().map(move |(c, &v)| (r, c, v)));
        SparseIntMatrix::from_triplets(rows.len(), n_cols, triplets)
    }

    #[test]
    fn rank_of_small_matrices() {
        assert_eq!(dense(&[&[1, 2], &[2, 4]]).rank().unwrap(), 1);
        assert_eq!(dense(&[&[0, 1, 1], &[1, 0, 1], &[1, 1, 0]]).rank().unwrap(), 3);
        assert_eq!(dense(&[&[1, -1, 0], &[0, 1, -1], &[1, 0, -1]]).rank().unwrap(), 2);
        assert_eq!(SparseIntMatrix::zeros(3, 4).rank().unwrap(), 0);
    }

    #[test]
    fn kernel_vectors_are_annihilated() {
        let a = dense(&[&[1, -1, 0, 2], &[0, 1, -1, 0], &[1, 0, -1, 2]]);
        let kernel = a.kernel_basis().unwrap();
        assert_eq!(kernel.len(), 4 - a.rank().unwrap());
        for v in &kernel {
            for r in 0..a.n_rows() {
                let mut s = BigRational::zero();
                for &(c, x) in a.row(r) {
                    if let Some((_, y)) = v.iter().find(|(i, _)| *i == c) {
                        s += y * BigRational::from_integer(x.into());
                    }
                }
                assert!(s.is_zero());
            }
        }
    }

    #[test]
    fn product_and_transpose() {
        let a = dense(&[&[1, 1], &[0, 1]]);
        let b = dense(&[&[1, -1], &[0, 1]]);
        assert_eq!(a.mul(&b).unwrap(), dense(&[&[1, 0], &[0, 1]]));
        assert_eq!(a.transpose(), dense(&[&[1, 0], &[1, 1]]));
        assert!(a.mul(&SparseIntMatrix::zeros(3, 1)).is_err());
    }

    #[test]
    fn power_iteration_norm() {
        let a = dense(&[&[1, -1]]);
        assert!((a.largest_singular_value(1e-10) - 2f64.sqrt()).abs() < 1e-9);
        let b = dense(&[&[3, 0], &[0, 2]]);
        assert!((b.largest_singular_value(1e-10) - 3.0).abs() < 1e-9);
        assert_eq!(SparseIntMatrix::zeros(2, 2).largest_singular_value(1e-10), 0.0);
    }

    #[test]
    fn blockwise_svd_matches_dense() {
        let t = vec![(0, 0, 3.0), (1, 1, 1.0), (1, 2, 1.0), (2, 2, -2.0)];
        let mut sv = blockwise_singular_values(3, 3, &t);
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut d = DMatrix::<f64>::zeros(3, 3);
        for &(r, c, v) in &t {
            d[(r, c)] = v;
        }
        let mut expected: Vec<f64> = d.singular_values().iter().copied().collect();
        expected.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (a, b) in sv.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
