//! Acceptance suite. Prints one line per criterion and exits non-zero if
//! any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::process::{Command, ExitCode};
use std::time::Instant;

use boxres::cli::{cmd_resolve, parse_ideal, Format};
use boxres::complex::{oracle_sweep, BoxComplex};
use boxres::exact::Surd;
use boxres::geometry::restriction_summary;
use boxres::lattice::{LatticeBox, MultiIndex};
use boxres::toeplitz::{decay_profile, projection_commutator, quotient_dimension, self_commutator};
use num_rational::BigRational;

use common::{count_ideal_monomials, full_corpus, Named};

const CUTOFF: u32 = 8;
const DUALITY_CUTOFF: u32 = 12;
const NORM_SLACK: f64 = 1e-9;
/// Degree window for the fitted exponents; the cutoff leaves headroom above it.
const FIT_CUTOFF: u32 = 203;
/// Cutoff for the `d` versus `2d` comparison: every label of degree `≤ 60`
/// is interior, so shells up to `2d = 60` are complete.
const SHELL_CUTOFF: u32 = 62;
const SHELL_FROM: u64 = 20;

type Verdict = (bool, String);
type Criterion = (&'static str, fn(&Corpus) -> Verdict);

struct Corpus {
    items: Vec<Named>,
    complexes: Vec<BoxComplex>,
}

impl Corpus {
    fn distinct_boxes(&self) -> Vec<LatticeBox> {
        let set: BTreeSet<LatticeBox> = self.complexes.iter().flat_map(|cx| cx.boxes().to_vec()).collect();
        set.into_iter().collect()
    }
}

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(p.into(), d.into())
}

fn exactness(corpus: &Corpus) -> Verdict {
    let mut failures = Vec::new();
    for (item, cx) in corpus.items.iter().zip(&corpus.complexes) {
        let report = cx.exactness_report().expect("ranks are computable");
        let brute = count_ideal_monomials(&item.ideal, CUTOFF);
        let kernel0 = report.dims[0] - report.ranks[0];
        if !report.pass || kernel0 != brute {
            failures.push(format!("{} (kernel {kernel0} vs {brute} ideal monomials)", item.name));
        }
    }
    verdict(failures, format!("{} ideals at M={CUTOFF}", corpus.items.len()))
}

fn oracle_equivalence(corpus: &Corpus) -> Verdict {
    let mut failures = Vec::new();
    let mut degrees = 0;
    for (item, cx) in corpus.items.iter().zip(&corpus.complexes) {
        let sweep = oracle_sweep(cx).expect("grid points are valid");
        degrees += sweep.degrees_checked;
        if !(sweep.all_exact && sweep.all_match_global && sweep.consistent) {
            failures.push(item.name.clone());
        }
    }
    verdict(failures, format!("{degrees} multidegrees"))
}

fn staircase_duality(corpus: &Corpus) -> Verdict {
    let mut failures = Vec::new();
    for item in &corpus.items {
        let grid = LatticeBox::full(item.ideal.ambient_dim()).enumerate_truncated(DUALITY_CUTOFF);
        for dedupe in [true, false] {
            let boxes = item.ideal.boxes_from_generators(dedupe);
            let bad = grid.iter().any(|n| {
                let in_union = boxes.iter().any(|b| b.contains(n).unwrap());
                let divisible = item
                    .ideal
                    .generators()
                    .iter()
                    .any(|g| g.entries().iter().zip(n.entries()).all(|(a, x)| a <= x));
                in_union == divisible
            });
            if bad {
                failures.push(format!("{} (dedupe={dedupe})", item.name));
            }
        }
    }
    verdict(failures, format!("[0,{DUALITY_CUTOFF})^m, both dedupe settings"))
}

fn norm_bound(corpus: &Corpus) -> Verdict {
    let mut failures = Vec::new();
    let mut worst: f64 = f64::NEG_INFINITY;
    for (item, cx) in corpus.items.iter().zip(&corpus.complexes) {
        for level in 0..cx.k() {
            let report = cx.psi_norm_bound_check(level).unwrap();
            worst = worst.max(report.norm_sq - report.bound);
            if report.norm_sq > report.bound + NORM_SLACK {
                failures.push(format!("{} q={level}: {} > {}", item.name, report.norm_sq, report.bound));
            }
        }
    }
    let square = &corpus.complexes[0];
    let pair = square.psi_norm_bound_check(1).unwrap().norm_sq;
    if square.k() != 2 || (pair - 2.0).abs() > NORM_SLACK {
        failures.push(format!("k=2 pair: |Psi_1|^2 = {pair}"));
    }
    verdict(
        failures,
        format!("max(|Psi_q|^2 - bound) = {worst:.3e}; k=2 pair |Psi_1|^2 = {pair:.12}"),
    )
}

fn commutator_closed_form(corpus: &Corpus) -> Verdict {
    let mut failures = Vec::new();
    let mut entries = 0usize;
    for region in corpus.distinct_boxes() {
        let m = region.ambient_dim();
        for s in 0..m {
            let op = projection_commutator(&region, s, CUTOFF, 0).unwrap();
            for (r, c, v) in op.entries() {
                entries += 1;
                let n = &op.cols()[c];
                let ok = match region.cap_of(s) {
                    Some(b) if n.get(s) == b && op.rows()[r] == n.shifted_up(s) => {
                        *v == -Surd::sqrt(&q(b as i64 + 1, n.degree() as i64 + m as i64 + 1)).unwrap()
                    }
                    _ => false,
                };
                if !ok {
                    failures.push(format!("{region} s={}: entry at {n}", s + 1));
                }
            }
            // every boundary label of the box carries its entry
            if let Some(b) = region.cap_of(s) {
                for n in region.enumerate_truncated(CUTOFF) {
                    if n.get(s) == b && n.shifted_up(s).within(CUTOFF) && op.get_by_label(&n.shifted_up(s), &n).is_zero() {
                        failures.push(format!("{region} s={}: missing entry at {n}", s + 1));
                    }
                }
            }
        }
    }
    let strip = LatticeBox::new(2, vec![0], vec![1]).unwrap();
    let profile = decay_profile(&projection_commutator(&strip, 0, FIT_CUTOFF, 0).unwrap());
    let exponent = profile.exponent.unwrap_or(f64::NAN);
    if exponent.is_nan() || (exponent + 0.5).abs() > 0.1 {
        failures.push(format!("fitted exponent {exponent}"));
    }
    verdict(failures, format!("{entries} exact entries; fitted exponent {exponent:.4} (target -0.5)"))
}

fn essential_normality(corpus: &Corpus) -> Verdict {
    let mut failures = Vec::new();
    let line = LatticeBox::full(1);
    let op = self_commutator(&line, 0, 0, FIT_CUTOFF, 0).unwrap();
    for (i, n) in op.cols().iter().enumerate() {
        if !n.is_interior(FIT_CUTOFF) {
            continue;
        }
        let k = n.get(0) as i64;
        if op.get(i, i).as_rational() != Some(q(k + 1, k + 2) - q(k, k + 1)) {
            failures.push(format!("m=1 diagonal at {k}"));
        }
    }
    let exponent = decay_profile(&op).exponent.unwrap_or(f64::NAN);
    if exponent.is_nan() || (exponent + 2.0).abs() > 0.4 {
        failures.push(format!("fitted exponent {exponent}"));
    }
    let boxes = corpus.distinct_boxes();
    let mut comparisons = 0;
    for region in &boxes {
        let m = region.ambient_dim();
        for s in 0..m {
            for t in 0..m {
                let profile = decay_profile(&self_commutator(region, s, t, SHELL_CUTOFF, 0).unwrap());
                for d in SHELL_FROM..=(SHELL_CUTOFF as u64 - 2) / 2 {
                    comparisons += 1;
                    let (at_d, at_2d) = (profile.max_at(d), profile.max_at(2 * d));
                    let shrinks = at_2d < at_d || (at_d == 0.0 && at_2d == 0.0);
                    if !shrinks {
                        failures.push(format!("{region} (s,t)=({},{}) d={d}: {at_2d} >= {at_d}", s + 1, t + 1));
                    }
                }
            }
        }
    }
    verdict(
        failures,
        format!(
            "m=1 exponent {exponent:.4} (target -2); {} boxes, {comparisons} shell comparisons d in [{SHELL_FROM},{}]",
            boxes.len(),
            (SHELL_CUTOFF - 2) / 2
        ),
    )
}

fn restriction_map(corpus: &Corpus) -> Verdict {
    let mut failures = Vec::new();
    let mut fibers = 0;
    for region in corpus.distinct_boxes() {
        let summary = restriction_summary(&region, CUTOFF).unwrap();
        let free = region.ambient_dim() - region.capped_count();
        let full_grid = summary.fibers.iter().all(|f| f.samples == (CUTOFF as usize).pow(free as u32));
        fibers += summary.fibers.len();
        if !(summary.fiber_constant && summary.all_positive && summary.images_distinct && full_grid) {
            failures.push(region.to_string());
        }
    }
    verdict(failures, format!("{fibers} fibers over [0,{CUTOFF})^(m-q)"))
}

fn quotient_consistency(corpus: &Corpus) -> Verdict {
    let mut failures = Vec::new();
    for (item, cx) in corpus.items.iter().zip(&corpus.complexes) {
        let dim1 = cx.dims()[1];
        let kernel1 = if cx.k() > 1 { dim1 - cx.psi(1).unwrap().matrix.rank().unwrap() } else { dim1 };
        let quotient = quotient_dimension(&item.ideal, CUTOFF);
        if kernel1 != quotient {
            failures.push(format!("{}: ker Psi_1 = {kernel1}, quotient = {quotient}", item.name));
        }
    }
    verdict(failures, format!("{} ideals", corpus.items.len()))
}

fn determinism(corpus: &Corpus) -> Verdict {
    let mut failures = Vec::new();
    for item in &corpus.items {
        let text = ideal_file(&item.ideal.ambient_dim(), item.ideal.generators());
        let spec = parse_ideal(&text).unwrap();
        if cmd_resolve(&spec, Format::Json).unwrap() != cmd_resolve(&spec, Format::Json).unwrap() {
            failures.push(item.name.clone());
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("staircase.txt");
    std::fs::write(&path, "m=2\n2,3\n4,1\n").unwrap();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_boxres"))
            .args(["resolve", "--input"])
            .arg(&path)
            .output()
            .unwrap()
    };
    let (a, b) = (run(), run());
    if !a.status.success() || a.stdout != b.stdout || a.stdout.is_empty() {
        failures.push("binary runs differ".into());
    }
    verdict(failures, format!("{} ideals in-process, binary twice ({} bytes)", corpus.items.len(), a.stdout.len()))
}

fn ideal_file(m: &usize, generators: &[MultiIndex]) -> String {
    let mut text = format!("m={m}\n");
    for g in generators {
        let row: Vec<String> = g.entries().iter().map(ToString::to_string).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    text
}

fn verdict(failures: Vec<String>, detail: String) -> Verdict {
    if failures.is_empty() {
        (true, detail)
    } else {
        let shown: Vec<&str> = failures.iter().take(5).map(String::as_str).collect();
        (false, format!("{detail}; {} failures: {}", failures.len(), shown.join("; ")))
    }
}

fn main() -> ExitCode {
    let items = full_corpus();
    let complexes = items
        .iter()
        .map(|item| BoxComplex::build(&item.ideal, CUTOFF, true).expect("corpus ideals are proper"))
        .collect();
    let corpus = Corpus { items, complexes };
    let criteria: [Criterion; 9] = [
        ("exactness", exactness),
        ("per-degree oracle equivalence", oracle_equivalence),
        ("staircase duality", staircase_duality),
        ("norm bound", norm_bound),
        ("commutator closed form", commutator_closed_form),
        ("essential-normality evidence", essential_normality),
        ("restriction map", restriction_map),
        ("quotient consistency", quotient_consistency),
        ("determinism", determinism),
    ];
    let mut all = true;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = check(&corpus);
        all &= pass;
        println!(
            "criterion {} {:<31} {} ({:.1}s) {}",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
