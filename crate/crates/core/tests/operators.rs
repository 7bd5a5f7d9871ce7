//! Toeplitz operators on the corpus, decay and Schatten diagnostics.

mod common;

use boxres::exact::Surd;
use boxres::ideal::MonomialIdeal;
use boxres::lattice::{LatticeBox, MultiIndex};
use boxres::toeplitz::{
    decay_profile, projection_commutator, quotient_toeplitz, schatten_partial_sums, self_commutator,
    toeplitz_matrix, SeriesVerdict,
};
use num_rational::BigRational;
use proptest::prelude::*;

use common::fixed_corpus;

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(p.into(), d.into())
}

fn strip() -> LatticeBox {
    LatticeBox::new(2, vec![0], vec![1]).unwrap()
}

#[test]
fn box_operators_are_compressions_on_the_corpus() {
    for item in fixed_corpus() {
        let m = item.ideal.ambient_dim();
        for region in item.ideal.boxes_from_generators(false) {
            let labels = region.enumerate_truncated(7);
            for p in 0..m {
                let full = toeplitz_matrix(&LatticeBox::full(m), p, 7, 0).unwrap();
                assert_eq!(
                    full.compress(&labels, &labels).unwrap(),
                    toeplitz_matrix(&region, p, 7, 0).unwrap(),
                    "{} {region}",
                    item.name
                );
            }
        }
    }
}

#[test]
fn weighted_shift_entries() {
    // ω_1 on m=1: ω_1(n) = n!·2!/(n+2)!, so the shift ratio is (n+1)/(n+3)
    let op = toeplitz_matrix(&LatticeBox::full(1), 0, 6, 1).unwrap();
    for n in 0..5u32 {
        let v = op.get_by_label(&MultiIndex::from(vec![n + 1]), &MultiIndex::from(vec![n]));
        assert_eq!(v, Surd::sqrt(&q(n as i64 + 1, n as i64 + 3)).unwrap());
    }
}

#[test]
fn projection_commutator_shells_decrease() {
    let profile = decay_profile(&projection_commutator(&strip(), 0, 60, 0).unwrap());
    let interior: Vec<f64> = profile.shells.iter().filter(|s| s.degree >= 1 && s.degree <= 58).map(|s| s.max_abs).collect();
    assert!(interior.windows(2).all(|w| w[1] < w[0]));
    for s in &profile.shells {
        if (1..=58).contains(&s.degree) {
            let expected = (2.0 / (s.degree as f64 + 3.0)).sqrt();
            assert!((s.max_abs - expected).abs() < 1e-14);
        }
    }
}

#[test]
fn trace_class_self_commutator_in_one_variable() {
    // Σ_{n<N} 1/((n+1)(n+2)) = 1 - 1/(N+1)
    let op = self_commutator(&LatticeBox::full(1), 0, 0, 130, 0).unwrap();
    let report = schatten_partial_sums(&op, &q(1, 1), &[16, 32, 64, 128]).unwrap();
    for s in &report.sums {
        let expected = 1.0 - 1.0 / (s.cutoff as f64 + 1.0);
        assert!((s.sum - expected).abs() < 1e-12, "{s:?}");
    }
    assert_eq!(report.verdict, SeriesVerdict::Converging);
}

#[test]
fn projection_commutator_needs_p_above_two_free_dimensions() {
    // one free coordinate: singular values √(2/(d+3)), so Σσ^p ~ Σ d^{-p/2}
    let op = projection_commutator(&strip(), 0, 260, 0).unwrap();
    let cutoffs = [32, 64, 128, 256];
    let cubic = schatten_partial_sums(&op, &q(3, 1), &cutoffs).unwrap();
    assert_eq!(cubic.verdict, SeriesVerdict::Converging, "{cubic:?}");
    let square = schatten_partial_sums(&op, &q(2, 1), &cutoffs).unwrap();
    assert_ne!(square.verdict, SeriesVerdict::Converging, "{square:?}");
    for s in &square.sums {
        // columns (1, n2) with n2 < cutoff contribute 2/(n2+4)
        let harmonic: f64 = (0..s.cutoff).map(|n2| 2.0 / (n2 as f64 + 4.0)).sum();
        assert!((s.sum - harmonic).abs() < 1e-9, "{s:?} vs {harmonic}");
    }
    let half = schatten_partial_sums(&op, &q(1, 1), &cutoffs).unwrap();
    assert_eq!(half.verdict, SeriesVerdict::Diverging);
}

#[test]
fn finite_boxes_have_no_high_degree_shells() {
    let corner = LatticeBox::new(2, vec![0, 1], vec![1, 0]).unwrap();
    let op = self_commutator(&corner, 0, 0, 8, 0).unwrap();
    assert_eq!(op.rows().len(), 2);
    assert!(!op.is_zero());
    let profile = decay_profile(&op);
    assert!(profile.shells.iter().all(|s| s.degree <= 1));
}

fn arb_ideal() -> impl Strategy<Value = MonomialIdeal> {
    (1usize..=3, 1usize..=3).prop_flat_map(|(m, l)| {
        proptest::collection::vec(proptest::collection::vec(0u32..=4, m), l)
            .prop_filter("proper", |g| g.iter().all(|v| v.iter().any(|&x| x > 0)))
            .prop_map(move |g| MonomialIdeal::new(m, g.into_iter().map(MultiIndex::from).collect()).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn quotient_is_the_compressed_full_shift(ideal in arb_ideal()) {
        let m = ideal.ambient_dim();
        for p in 0..m {
            let quotient = quotient_toeplitz(&ideal, p, 6, 0).unwrap();
            let full = toeplitz_matrix(&LatticeBox::full(m), p, 6, 0).unwrap();
            prop_assert_eq!(&quotient, &full.compress(quotient.rows(), quotient.cols()).unwrap());
        }
    }

    #[test]
    fn quotient_shifts_commute_on_interior_labels(ideal in arb_ideal()) {
        let m = ideal.ambient_dim();
        for p in 0..m {
            for t in 0..m {
                let a = quotient_toeplitz(&ideal, p, 6, 0).unwrap();
                let b = quotient_toeplitz(&ideal, t, 6, 0).unwrap();
                let (ab, ba) = (a.mul(&b).unwrap(), b.mul(&a).unwrap());
                for (c, n) in a.cols().iter().enumerate() {
                    if n.is_interior(6) {
                        for r in 0..a.rows().len() {
                            prop_assert_eq!(ab.get(r, c), ba.get(r, c));
                        }
                    }
                }
            }
        }
    }
}
