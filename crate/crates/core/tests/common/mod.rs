//! Test corpus shared by the integration targets.

#![allow(dead_code)]

use boxres::ideal::MonomialIdeal;
use boxres::lattice::MultiIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const RANDOM_SEED: u64 = 20_241_016;
pub const RANDOM_COUNT: usize = 100;

pub struct Named {
    pub name: String,
    pub ideal: MonomialIdeal,
}

fn named(name: &str, m: usize, gens: &[&[u32]]) -> Named {
    Named {
        name: name.to_string(),
        ideal: MonomialIdeal::from_exponents(m, gens).unwrap(),
    }
}

/// Staircase `⟨z_1^p z_2^q, z_1^r z_2^s⟩`.
pub fn staircase(p: u32, q: u32, r: u32, s: u32) -> MonomialIdeal {
    MonomialIdeal::from_exponents(2, &[&[p, q], &[r, s]]).unwrap()
}

pub fn fixed_corpus() -> Vec<Named> {
    vec![
        named("square <z1^2 z2^2>", 2, &[&[2, 2]]),
        Named {
            name: "staircase (2,3,4,1)".into(),
            ideal: staircase(2, 3, 4, 1),
        },
        Named {
            name: "staircase (1,4,3,2)".into(),
            ideal: staircase(1, 4, 3, 2),
        },
        named("<z1^2, z3>", 3, &[&[2, 0, 0], &[0, 0, 1]]),
    ]
}

/// Proper ideals with `m ≤ 3`, at most three generators, exponents `≤ 4`.
pub fn random_corpus() -> Vec<Named> {
    let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_SEED);
    let mut out = Vec::with_capacity(RANDOM_COUNT);
    while out.len() < RANDOM_COUNT {
        let m = rng.gen_range(1..=3usize);
        let l = rng.gen_range(1..=3usize);
        let gens: Vec<MultiIndex> = (0..l)
            .map(|_| MultiIndex::from((0..m).map(|_| rng.gen_range(0..=4u32)).collect::<Vec<_>>()))
            .collect();
        if gens.iter().any(|g| g.degree() == 0) {
            continue;
        }
        let ideal = MonomialIdeal::new(m, gens).unwrap();
        out.push(Named {
            name: format!("random #{} {:?}", out.len(), ideal.generators()),
            ideal,
        });
    }
    out
}

pub fn full_corpus() -> Vec<Named> {
    let mut all = fixed_corpus();
    all.extend(random_corpus());
    all
}

/// Brute-force count of ideal monomials on `[0, cutoff)^m`.
pub fn count_ideal_monomials(ideal: &MonomialIdeal, cutoff: u32) -> usize {
    let m = ideal.ambient_dim();
    let total = (cutoff as usize).pow(m as u32);
    (0..total)
        .filter(|&code| {
            let mut rest = code;
            let n: Vec<u32> = (0..m)
                .map(|_| {
                    let v = (rest % cutoff as usize) as u32;
                    rest /= cutoff as usize;
                    v
                })
                .collect();
            ideal
                .generators()
                .iter()
                .any(|g| g.entries().iter().zip(&n).all(|(a, x)| a <= x))
        })
        .count()
}
