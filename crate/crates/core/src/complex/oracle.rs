//! Per-multidegree verification.
//!
//! At a fixed multi-index `n`, only the faces `I` with `n ∈ ℬ_I` carry a
//! basis vector, and these are exactly the subsets of the `t` boxes that
//! contain `n`. The restricted complex is the augmented cochain complex of
//! a `(t-1)`-simplex, built and ranked here with dense arithmetic that
//! shares nothing with the global sparse path.

use itertools::Itertools;
use serde::Serialize;

use super::BoxComplex;
use crate::error::{Error, Result};
use crate::lattice::{MultiIndex, Shuffle};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeReport {
    pub n: MultiIndex,
    /// Boxes (0-based positions in the complex) containing `n`.
    pub containing: Vec<usize>,
    pub dims: Vec<usize>,
    pub ranks: Vec<usize>,
    pub exact: bool,
    /// The global `Ψ_q` restricted to multidegree `n` equals the simplicial matrices.
    pub matches_global: bool,
}

/// Rank by Bareiss fraction-free elimination on a dense integer matrix.
fn dense_rank(mut a: Vec<Vec<i128>>) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    let mut prev = 1i128;
    for col in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| a[r][col] != 0) else {
            continue;
        };
        a.swap(rank, pivot);
        for r in rank + 1..rows {
            for c in col + 1..cols {
                a[r][c] = (a[rank][col] * a[r][c] - a[r][col] * a[rank][c]) / prev;
            }
            a[r][col] = 0;
        }
        prev = a[rank][col];
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

type Coboundary = (Vec<Vec<usize>>, Vec<Vec<usize>>, Vec<Vec<i128>>);

/// Coboundary of the simplex on `vertices` from `q`-subsets to `(q+1)`-subsets.
fn simplex_coboundary(vertices: &[usize], q: usize) -> Coboundary {
    let cols: Vec<Vec<usize>> = vertices.iter().copied().combinations(q).collect();
    let rows: Vec<Vec<usize>> = vertices.iter().copied().combinations(q + 1).collect();
    let mut matrix = vec![vec![0i128; cols.len()]; rows.len()];
    for (r, face) in rows.iter().enumerate() {
        for drop in 0..face.len() {
            let mut sub = face.clone();
            sub.remove(drop);
            let c = cols.iter().position(|s| *s == sub).expect("subface is listed");
            matrix[r][c] = if drop % 2 == 0 { 1 } else { -1 };
        }
    }
    (rows, cols, matrix)
}

/// Restricts the complex to the single multidegree `n` and verifies it.
pub fn per_degree_oracle(cx: &BoxComplex, n: &MultiIndex) -> Result<DegreeReport> {
    n.check_dim(cx.ambient_dim())?;
    if !n.within(cx.cutoff()) {
        return Err(Error::OutsideTruncation(n.entries().to_vec()));
    }
    let k = cx.k();
    let containing: Vec<usize> = cx
        .boxes()
        .iter()
        .enumerate()
        .filter(|(_, b)| {
            b.coords()
                .iter()
                .zip(b.caps())
                .all(|(&c, &cap)| n.get(c) <= cap)
        })
        .map(|(i, _)| i)
        .collect();
    let t = containing.len();

    let mut dims = Vec::with_capacity(k + 1);
    let mut ranks = Vec::with_capacity(k);
    let mut matches_global = true;
    for q in 0..=k {
        dims.push(containing.iter().combinations(q).count());
    }
    for q in 0..k {
        let (rows, cols, matrix) = simplex_coboundary(&containing, q);
        ranks.push(dense_rank(matrix.clone()));
        matches_global &= restriction_matches(cx, n, q, &rows, &cols, &matrix)?;
    }

    let mut exact = 1 - ranks.first().copied().unwrap_or(0) == usize::from(t == 0);
    for q in 1..=k {
        let outgoing = if q < k { ranks[q] } else { 0 };
        exact &= dims[q] - outgoing == ranks[q - 1];
    }
    Ok(DegreeReport {
        n: n.clone(),
        containing,
        dims,
        ranks,
        exact,
        matches_global,
    })
}

/// Compares the global sparse `Ψ_q` rows at multidegree `n` with the simplicial matrix.
fn restriction_matches(
    cx: &BoxComplex,
    n: &MultiIndex,
    q: usize,
    rows: &[Vec<usize>],
    cols: &[Vec<usize>],
    matrix: &[Vec<i128>],
) -> Result<bool> {
    let k = cx.k();
    let psi = &cx.psi(q)?.matrix;
    let (source, target) = (cx.level(q), cx.level(q + 1));
    let locate = |level: &super::Level, face: &[usize]| -> Option<usize> {
        let shuffle = Shuffle::new(face.to_vec(), k).ok()?;
        let ci = level.component_index(&shuffle)?;
        level.position(ci, n, cx.cutoff())
    };
    let col_ids: Option<Vec<usize>> = cols.iter().map(|f| locate(source, f)).collect();
    let Some(col_ids) = col_ids else {
        return Ok(false);
    };
    for (r, face) in rows.iter().enumerate() {
        let Some(row_id) = locate(target, face) else {
            return Ok(false);
        };
        let mut expected: Vec<(usize, i64)> = col_ids
            .iter()
            .zip(&matrix[r])
            .filter(|(_, &v)| v != 0)
            .map(|(&c, &v)| (c, v as i64))
            .collect();
        expected.sort_unstable();
        if psi.row(row_id) != expected.as_slice() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub degrees_checked: usize,
    pub all_exact: bool,
    pub all_match_global: bool,
    /// Level dimensions summed over multidegrees.
    pub summed_dims: Vec<usize>,
    /// Ranks of the restricted maps summed over multidegrees.
    pub summed_ranks: Vec<usize>,
    pub global_dims: Vec<usize>,
    pub global_ranks: Vec<usize>,
    pub consistent: bool,
    pub failing_degrees: Vec<MultiIndex>,
}

/// Runs [`per_degree_oracle`] on every grid point and compares the totals
/// with the global dimensions and ranks.
pub fn oracle_sweep(cx: &BoxComplex) -> Result<SweepReport> {
    let k = cx.k();
    let mut summed_dims = vec![0; k + 1];
    let mut summed_ranks = vec![0; k];
    let mut all_exact = true;
    let mut all_match = true;
    let mut failing = Vec::new();
    let grid = &cx.level(0).components[0].points;
    for n in grid {
        let report = per_degree_oracle(cx, n)?;
        for (acc, d) in summed_dims.iter_mut().zip(&report.dims) {
            *acc += d;
        }
        for (acc, r) in summed_ranks.iter_mut().zip(&report.ranks) {
            *acc += r;
        }
        if !report.exact || !report.matches_global {
            failing.push(n.clone());
        }
        all_exact &= report.exact;
        all_match &= report.matches_global;
    }
    let global_dims = cx.dims();
    let global_ranks = (0..k)
        .map(|q| cx.psi(q)?.matrix.rank())
        .collect::<Result<Vec<_>>>()?;
    let consistent = summed_dims == global_dims && summed_ranks == global_ranks;
    Ok(SweepReport {
        degrees_checked: grid.len(),
        all_exact,
        all_match_global: all_match,
        summed_dims,
        summed_ranks,
        global_dims,
        global_ranks,
        consistent,
        failing_degrees: failing,
    })
}
