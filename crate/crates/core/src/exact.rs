//! Exact scalars for operator entries.
//!
//! Every weight ratio that shows up in the shift operators is a square root
//! of a rational number, so entries are kept as finite sums `Σ r·√t` with
//! rational `r` and squarefree integer radicand `t`. Distinct squarefree
//! radicands are linearly independent over the rationals, which makes the
//! representation canonical and equality a structural comparison.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Mutex;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Trial division stops here; radicands beyond this must be smooth.
const TRIAL_DIVISION_LIMIT: u64 = 1 << 22;

static FACTORIALS: Mutex<Vec<BigUint>> = Mutex::new(Vec::new());

/// `n!`, memoized across calls.
pub fn factorial(n: u64) -> BigUint {
    let mut table = FACTORIALS.lock().expect("factorial table poisoned");
    if table.is_empty() {
        table.push(BigUint::one());
    }
    while (table.len() as u64) <= n {
        let next = table.last().unwrap() * BigUint::from(table.len() as u64);
        table.push(next);
    }
    table[n as usize].clone()
}

/// Canonical "p/q" (or "p" for integers) text form.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    match text.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(BigRational::new(p, q))
        }
        None => Some(BigRational::from_integer(text.parse().ok()?)),
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fall back to a scaled division when numerator or denominator overflow f64.
        let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
        let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Splits `n` as `square² · free` with `free` squarefree.
fn squarefree_split(n: &BigUint) -> Result<(BigUint, BigUint)> {
    if let Some(small) = n.to_u64() {
        let (square, free) = squarefree_split_u64(small)?;
        return Ok((BigUint::from(square), BigUint::from(free)));
    }
    let mut rest = n.clone();
    let mut square = BigUint::one();
    let mut free = BigUint::one();
    let mut d: u64 = 2;
    while BigUint::from(d) * BigUint::from(d) <= rest {
        if d > TRIAL_DIVISION_LIMIT {
            return Err(Error::RadicandTooLarge);
        }
        let dd = BigUint::from(d);
        let mut power = 0u32;
        while (&rest % &dd).is_zero() {
            rest /= &dd;
            power += 1;
        }
        if power > 0 {
            square *= dd.pow(power / 2);
            if power % 2 == 1 {
                free *= &dd;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    free *= rest;
    Ok((square, free))
}

fn squarefree_split_u64(n: u64) -> Result<(u64, u64)> {
    let mut rest = n;
    let (mut square, mut free) = (1u64, 1u64);
    let mut d: u64 = 2;
    while d.saturating_mul(d) <= rest {
        if d > TRIAL_DIVISION_LIMIT {
            return Err(Error::RadicandTooLarge);
        }
        let mut power = 0u32;
        while rest.is_multiple_of(d) {
            rest /= d;
            power += 1;
        }
        square *= d.pow(power / 2);
        if power % 2 == 1 {
            free *= d;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    Ok((square, free * rest))
}

/// A finite sum `Σ coef·√radicand` with squarefree radicands and nonzero coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Surd {
    terms: BTreeMap<u64, BigRational>,
}

impl Surd {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_rational(BigRational::one())
    }

    pub fn from_int(v: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_rational(r: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !r.is_zero() {
            terms.insert(1, r);
        }
        Self { terms }
    }

    /// `coef · √radicand` where `radicand` is already known to be squarefree.
    fn term(coef: BigRational, radicand: u64) -> Self {
        let mut terms = BTreeMap::new();
        if !coef.is_zero() {
            terms.insert(radicand, coef);
        }
        Self { terms }
    }

    /// Exact `√r` for a nonnegative rational `r`.
    pub fn sqrt(r: &BigRational) -> Result<Self> {
        if r.is_negative() {
            return Err(Error::NegativeRadicand);
        }
        if r.is_zero() {
            return Ok(Self::zero());
        }
        let p = r.numer().magnitude();
        let q = r.denom().magnitude();
        let (sp, fp) = squarefree_split(p)?;
        let (sq, fq) = squarefree_split(q)?;
        // √(p/q) = sp·sq·√(fp·fq) / q, and fp, fq are coprime since p/q is reduced.
        let radicand = (&fp * &fq).to_u64().ok_or(Error::RadicandTooLarge)?;
        let coef = BigRational::new(
            BigInt::from(&sp * &sq),
            BigInt::from(q.clone()),
        );
        Ok(Self::term(coef, radicand))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(coefficient, radicand)` pairs in increasing radicand order.
    pub fn terms(&self) -> impl Iterator<Item = (&BigRational, u64)> {
        self.terms.iter().map(|(t, r)| (r, *t))
    }

    pub fn from_terms<I: IntoIterator<Item = (BigRational, u64)>>(terms: I) -> Result<Self> {
        let mut acc = Self::zero();
        for (coef, radicand) in terms {
            let root = Self::sqrt(&BigRational::from_integer(BigInt::from(radicand)))?;
            acc = acc + root * Self::from_rational(coef);
        }
        Ok(acc)
    }

    /// The rational value if there is no irrational part.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&1).cloned(),
            _ => None,
        }
    }

    /// The square, when it is rational (single-term values).
    pub fn square_if_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (t, r) = self.terms.iter().next().unwrap();
                Some(r * r * BigRational::from_integer(BigInt::from(*t)))
            }
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(t, r)| rational_to_f64(r) * (*t as f64).sqrt())
            .sum()
    }

    fn add_term(&mut self, radicand: u64, coef: BigRational) {
        let entry = self.terms.entry(radicand).or_insert_with(BigRational::zero);
        *entry += coef;
        if entry.is_zero() {
            self.terms.remove(&radicand);
        }
    }
}

impl Add for Surd {
    type Output = Surd;
    fn add(mut self, rhs: Surd) -> Surd {
        for (t, r) in rhs.terms {
            self.add_term(t, r);
        }
        self
    }
}

impl<'a> Add<&'a Surd> for &'a Surd {
    type Output = Surd;
    fn add(self, rhs: &Surd) -> Surd {
        self.clone() + rhs.clone()
    }
}

impl Neg for Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd {
            terms: self.terms.into_iter().map(|(t, r)| (t, -r)).collect(),
        }
    }
}

impl Sub for Surd {
    type Output = Surd;
    fn sub(self, rhs: Surd) -> Surd {
        self + (-rhs)
    }
}

impl<'a> Mul<&'a Surd> for &'a Surd {
    type Output = Surd;
    fn mul(self, rhs: &Surd) -> Surd {
        let mut out = Surd::zero();
        for (&a, ra) in &self.terms {
            for (&b, rb) in &rhs.terms {
                // √a·√b = g·√((a/g)(b/g)) with g = gcd(a, b); the product stays squarefree.
                let g = a.gcd(&b);
                let radicand = (a / g) as u128 * (b / g) as u128;
                let radicand = u64::try_from(radicand).expect("radicand product exceeds u64");
                let coef = ra * rb * BigRational::from_integer(BigInt::from(g));
                out.add_term(radicand, coef);
            }
        }
        out
    }
}

impl Mul for Surd {
    type Output = Surd;
    fn mul(self, rhs: Surd) -> Surd {
        &self * &rhs
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(t, r)| {
                if *t == 1 {
                    format_rational(r)
                } else {
                    format!("{}*sqrt({})", format_rational(r), t)
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// JSON form: a list of `[coefficient, radicand]` pairs, coefficient as "p/q".
impl Serialize for Surd {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<(String, u64)> = self
            .terms
            .iter()
            .map(|(t, r)| (format_rational(r), *t))
            .collect();
        pairs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Surd {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<(String, u64)> = Vec::deserialize(deserializer)?;
        let mut terms = Vec::with_capacity(pairs.len());
        for (coef, radicand) in pairs {
            let coef = parse_rational(&coef)
                .ok_or_else(|| serde::de::Error::custom(format!("bad rational {coef:?}")))?;
            terms.push((coef, radicand));
        }
        Surd::from_terms(terms).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    #[test]
    fn squarefree_parts() {
        for n in 1u64..3000 {
            let (square, free) = squarefree_split_u64(n).unwrap();
            assert_eq!(square * square * free, n);
            assert!((2..=free).take_while(|d| d * d <= free).all(|d| free % (d * d) != 0));
        }
        // beyond u64: 2^70 · 3 · 7^3
        let big = BigUint::from(2u32).pow(70) * BigUint::from(3u32 * 343);
        let (square, free) = squarefree_split(&big).unwrap();
        assert_eq!(square, BigUint::from(2u32).pow(35) * BigUint::from(7u32));
        assert_eq!(free, BigUint::from(21u32));
    }

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), BigUint::one());
        assert_eq!(factorial(5), BigUint::from(120u32));
        assert_eq!(factorial(20), BigUint::from(2432902008176640000u64));
    }

    #[test]
    fn sqrt_normalizes() {
        let s = Surd::sqrt(&q(8, 1)).unwrap();
        assert_eq!(s.terms().collect::<Vec<_>>(), vec![(&q(2, 1), 2)]);
        let s = Surd::sqrt(&q(1, 2)).unwrap();
        assert_eq!(s.terms().collect::<Vec<_>>(), vec![(&q(1, 2), 2)]);
        assert_eq!(Surd::sqrt(&q(9, 4)).unwrap(), Surd::from_rational(q(3, 2)));
        assert!(Surd::sqrt(&q(-1, 2)).is_err());
    }

    #[test]
    fn products_and_sums() {
        let a = Surd::sqrt(&q(2, 3)).unwrap();
        let b = Surd::sqrt(&q(3, 2)).unwrap();
        assert_eq!(&a * &b, Surd::one());
        let c = Surd::sqrt(&q(6, 1)).unwrap();
        assert_eq!((&a * &c).as_rational(), Some(q(2, 1)));
        assert!((a.clone() - a.clone()).is_zero());
        let two = a.clone() + a.clone();
        assert_eq!(two.square_if_rational(), Some(q(8, 3)));
    }

    #[test]
    fn json_round_trip() {
        let s = Surd::sqrt(&q(50, 3)).unwrap() + Surd::from_rational(q(-1, 7));
        let text = serde_json::to_string(&s).unwrap();
        let back: Surd = serde_json::from_str(&text).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn squarefree_of_smooth_big_numbers() {
        let n = factorial(40);
        let (sq, free) = squarefree_split(&n).unwrap();
        assert_eq!(&sq * &sq * &free, n);
    }
}
