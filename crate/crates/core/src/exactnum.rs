//! Exact rational numbers, values extended by infinity, and the finitely
//! generated value groups (1/e)Z that show up as value groups of chains.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

pub type Rational = num_rational::BigRational;

/// Shorthand for small rational constants.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(num: i64) -> Rational {
    Rational::from_integer(BigInt::from(num))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExactNumError {
    NotASubgroup { sub: u64, sup: u64 },
}

impl fmt::Display for ExactNumError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactNumError::NotASubgroup { sub, sup } => write!(
                f,
                "(1/{sub})Z is not a subgroup of (1/{sup})Z: {sub} does not divide {sup}"
            ),
        }
    }
}

impl std::error::Error for ExactNumError {}

/// An element of the value group extended by infinity, the codomain of every
/// valuation in this crate. Infinity is greater than every finite value and
/// absorbs addition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtendedValue {
    Finite(Rational),
    Infinity,
}

impl ExtendedValue {
    pub fn zero() -> Self {
        ExtendedValue::Finite(Rational::zero())
    }

    pub fn from_rat(r: Rational) -> Self {
        ExtendedValue::Finite(r)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedValue::Infinity)
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ExtendedValue::Finite(r) => Some(r),
            ExtendedValue::Infinity => None,
        }
    }

    pub fn min(a: ExtendedValue, b: ExtendedValue) -> ExtendedValue {
        if a <= b {
            a
        } else {
            b
        }
    }
}

impl PartialOrd for ExtendedValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtendedValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtendedValue::Infinity, ExtendedValue::Infinity) => Ordering::Equal,
            (ExtendedValue::Infinity, _) => Ordering::Greater,
            (_, ExtendedValue::Infinity) => Ordering::Less,
            (ExtendedValue::Finite(a), ExtendedValue::Finite(b)) => a.cmp(b),
        }
    }
}

impl Add for ExtendedValue {
    type Output = ExtendedValue;

    fn add(self, rhs: ExtendedValue) -> ExtendedValue {
        match (self, rhs) {
            (ExtendedValue::Finite(a), ExtendedValue::Finite(b)) => ExtendedValue::Finite(a + b),
            _ => ExtendedValue::Infinity,
        }
    }
}

impl<'a> Add<&'a ExtendedValue> for &'a ExtendedValue {
    type Output = ExtendedValue;

    fn add(self, rhs: &'a ExtendedValue) -> ExtendedValue {
        match (self, rhs) {
            (ExtendedValue::Finite(a), ExtendedValue::Finite(b)) => ExtendedValue::Finite(a + b),
            _ => ExtendedValue::Infinity,
        }
    }
}

impl fmt::Display for ExtendedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedValue::Finite(r) => write!(f, "{}", r),
            ExtendedValue::Infinity => write!(f, "inf"),
        }
    }
}

impl From<Rational> for ExtendedValue {
    fn from(r: Rational) -> Self {
        ExtendedValue::Finite(r)
    }
}

/// The group (1/e)Z inside Q, normalized so that the value of the prime is 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueGroup {
    denominator: u64,
}

impl ValueGroup {
    /// The integers Z, the value group of the base field.
    pub fn integers() -> Self {
        ValueGroup { denominator: 1 }
    }

    pub fn new(denominator: u64) -> Self {
        assert!(denominator >= 1, "value group denominator must be positive");
        ValueGroup { denominator }
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn contains(&self, v: &Rational) -> bool {
        let den = v.denom();
        if !den.is_positive() {
            return false;
        }
        (BigInt::from(self.denominator) % den).is_zero()
    }

    /// The smallest group (1/e')Z containing this group and v.
    pub fn join(&self, v: &Rational) -> ValueGroup {
        let den = v.denom().magnitude();
        let e = BigInt::from(self.denominator)
            .lcm(&BigInt::from_biguint(num_bigint::Sign::Plus, den.clone()));
        let e: u64 = e
            .to_string()
            .parse()
            .expect("value group denominator exceeds u64");
        ValueGroup { denominator: e }
    }
}

impl fmt::Display for ValueGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denominator == 1 {
            write!(f, "Z")
        } else {
            write!(f, "(1/{})Z", self.denominator)
        }
    }
}

/// Index (sup : sub) of one cyclic value group in another.
pub fn group_index(sub: &ValueGroup, sup: &ValueGroup) -> Result<u64, ExactNumError> {
    if sup.denominator % sub.denominator != 0 {
        return Err(ExactNumError::NotASubgroup {
            sub: sub.denominator,
            sup: sup.denominator,
        });
    }
    Ok(sup.denominator / sub.denominator)
}

/// Numerator/denominator string pair, the JSON form used for every rational.
pub fn rational_strings(r: &Rational) -> (String, String) {
    (r.numer().to_string(), r.denom().to_string())
}

pub fn big_rational_from_parts(num: BigInt, den: BigInt) -> Rational {
    Rational::new(num, den)
}

pub fn one() -> Rational {
    Rational::one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn min_and_add_small_cases() {
        assert_eq!(
            ExtendedValue::min(rat(1, 3).into(), rat(1, 2).into()),
            rat(1, 3).into()
        );
        assert_eq!(
            ExtendedValue::Infinity + ExtendedValue::from_rat(rat_int(-5)),
            ExtendedValue::Infinity
        );
        assert_eq!(
            ExtendedValue::from_rat(rat(1, 3)) + ExtendedValue::from_rat(rat(1, 3)),
            rat(2, 3).into()
        );
    }

    #[test]
    fn order_is_total_with_infinity_on_top() {
        let inf = ExtendedValue::Infinity;
        let v: ExtendedValue = rat(7, 2).into();
        assert!(inf > v);
        assert_eq!(inf.cmp(&ExtendedValue::Infinity), Ordering::Equal);
        assert!(ExtendedValue::from_rat(rat(-1, 2)) < ExtendedValue::zero());
    }

    #[test]
    fn group_indices_match_fixtures() {
        assert_eq!(
            group_index(&ValueGroup::new(1), &ValueGroup::new(3)).unwrap(),
            3
        );
        assert_eq!(
            group_index(&ValueGroup::new(1), &ValueGroup::new(6)).unwrap(),
            6
        );
        assert_eq!(
            group_index(&ValueGroup::new(2), &ValueGroup::new(2)).unwrap(),
            1
        );
        assert!(group_index(&ValueGroup::new(2), &ValueGroup::new(3)).is_err());
    }

    #[test]
    fn join_takes_lcm_of_denominators() {
        let g = ValueGroup::integers().join(&rat(1, 2)).join(&rat(1, 3));
        assert_eq!(g.denominator(), 6);
        assert!(g.contains(&rat(11, 6)));
        assert!(!g.contains(&rat(1, 4)));
    }

    #[test]
    fn rational_arithmetic_is_exact_on_random_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let a = rat(rng.gen_range(-50..50), rng.gen_range(1..20));
            let b = rat(rng.gen_range(-50..50), rng.gen_range(1..20));
            let c = rat(rng.gen_range(-50..50), rng.gen_range(1..20));
            assert_eq!((&a + &b) + &c, &a + (&b + &c));
            assert_eq!(&a * (&b + &c), &a * &b + &a * &c);
        }
    }

    #[test]
    fn min_add_commute_and_associate_with_infinity() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let sample = |rng: &mut ChaCha8Rng| -> ExtendedValue {
            if rng.gen_range(0..5) == 0 {
                ExtendedValue::Infinity
            } else {
                rat(rng.gen_range(-10..10), rng.gen_range(1..8)).into()
            }
        };
        for _ in 0..300 {
            let a = sample(&mut rng);
            let b = sample(&mut rng);
            let c = sample(&mut rng);
            assert_eq!(
                ExtendedValue::min(a.clone(), b.clone()),
                ExtendedValue::min(b.clone(), a.clone())
            );
            assert_eq!(&a + &b, &b + &a);
            assert_eq!(
                ExtendedValue::min(a.clone(), ExtendedValue::min(b.clone(), c.clone())),
                ExtendedValue::min(ExtendedValue::min(a.clone(), b.clone()), c.clone())
            );
            assert_eq!((a.clone() + b.clone()) + c.clone(), a + (b + c));
        }
    }
}
