//! Exact dyadic rationals `j / 2^e`.
//!
//! Every scalar in the crate is a [`Dyadic`]. Values are kept in canonical
//! form (odd numerator, or `0/2^0`), so structural equality is value equality.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigInt,
    exp: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseDyadicError {
    #[error("empty dyadic literal")]
    Empty,
    #[error("invalid numerator in `{0}`")]
    Numerator(String),
    #[error("denominator of `{0}` must have the form 2^e")]
    Denominator(String),
}

/// Range of `k` for which a value satisfies `value <= 2^-k`.
///
/// The admissible `k` always form a down-set of the naturals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cutoff {
    /// `value <= 2^-k` for every `k` (the value is `<= 0`).
    All,
    /// `value <= 2^-k` exactly for `k < n`.
    Below(usize),
}

impl Cutoff {
    pub fn admits(self, k: usize) -> bool {
        match self {
            Cutoff::All => true,
            Cutoff::Below(n) => k < n,
        }
    }
}

impl Dyadic {
    /// Canonical `j / 2^e`.
    pub fn new(j: impl Into<BigInt>, e: usize) -> Self {
        Self::canonical(j.into(), e)
    }

    fn canonical(num: BigInt, exp: usize) -> Self {
        if num.is_zero() {
            return Dyadic { num, exp: 0 };
        }
        let tz = num.trailing_zeros().unwrap_or(0) as usize;
        let shift = tz.min(exp);
        if shift == 0 {
            Dyadic { num, exp }
        } else {
            Dyadic { num: num >> shift, exp: exp - shift }
        }
    }

    pub fn zero() -> Self {
        Dyadic { num: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic { num: BigInt::one(), exp: 0 }
    }

    /// `2^-k`.
    pub fn pow2_neg(k: usize) -> Self {
        Dyadic { num: BigInt::one(), exp: k }
    }

    pub fn from_int(n: i64) -> Self {
        Self::new(n, 0)
    }

    pub fn numerator(&self) -> &BigInt {
        &self.num
    }

    pub fn exponent(&self) -> usize {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.num.is_positive()
    }

    pub fn abs(&self) -> Self {
        Dyadic { num: self.num.abs(), exp: self.exp }
    }

    /// Numerator rescaled to denominator `2^e`; requires `e >= self.exp`.
    fn scaled_num(&self, e: usize) -> BigInt {
        debug_assert!(e >= self.exp);
        &self.num << (e - self.exp)
    }

    /// The set of `k` with `self <= 2^-k`.
    ///
    /// For positive `j / 2^e` with odd `j`, the largest admissible `k` is
    /// `e - ceil(log2 j)`, which reads directly off the bit length.
    pub fn cutoff(&self) -> Cutoff {
        if !self.num.is_positive() {
            return Cutoff::All;
        }
        let ceil_log2 = if self.num.is_one() { 0 } else { self.num.bits() as usize };
        if ceil_log2 > self.exp {
            Cutoff::Below(0)
        } else {
            Cutoff::Below(self.exp - ceil_log2 + 1)
        }
    }

    /// `self <= 2^-k`.
    pub fn le_pow2_neg(&self, k: usize) -> bool {
        self.cutoff().admits(k)
    }

    /// `j` with `self = j * 2^-e`, if such an integer exists.
    pub fn grid_index(&self, e: usize) -> Option<BigInt> {
        if self.exp > e {
            None
        } else {
            Some(self.scaled_num(e))
        }
    }
}

/// Exact sum of a finite sequence; the empty sum is zero.
pub fn dy_sum<'a>(xs: impl IntoIterator<Item = &'a Dyadic>) -> Dyadic {
    xs.into_iter().sum()
}

/// Total order on dyadic values.
pub fn dy_cmp(a: &Dyadic, b: &Dyadic) -> Ordering {
    a.cmp(b)
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.exp == other.exp {
            return self.num.cmp(&other.num);
        }
        let e = self.exp.max(other.exp);
        self.scaled_num(e).cmp(&other.scaled_num(e))
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add<&Dyadic> for &Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let e = self.exp.max(rhs.exp);
        Dyadic::canonical(self.scaled_num(e) + rhs.scaled_num(e), e)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: Dyadic) -> Dyadic {
        &self + &rhs
    }
}

impl AddAssign<&Dyadic> for Dyadic {
    fn add_assign(&mut self, rhs: &Dyadic) {
        *self = &*self + rhs;
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;

    fn neg(self) -> Dyadic {
        Dyadic { num: -&self.num, exp: self.exp }
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;

    fn neg(self) -> Dyadic {
        Dyadic { num: -self.num, exp: self.exp }
    }
}

impl Sub<&Dyadic> for &Dyadic {
    type Output = Dyadic;

    fn sub(self, rhs: &Dyadic) -> Dyadic {
        self + &(-rhs)
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;

    fn sub(self, rhs: Dyadic) -> Dyadic {
        &self - &rhs
    }
}

impl<'a> Sum<&'a Dyadic> for Dyadic {
    fn sum<I: Iterator<Item = &'a Dyadic>>(iter: I) -> Self {
        // Accumulate at the largest exponent seen, canonicalize once.
        let mut acc = BigInt::zero();
        let mut exp = 0usize;
        for x in iter {
            if x.is_zero() {
                continue;
            }
            if x.exp > exp {
                acc <<= x.exp - exp;
                exp = x.exp;
            }
            acc += x.scaled_num(exp);
        }
        Dyadic::canonical(acc, exp)
    }
}

impl Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Self {
        let items: Vec<Dyadic> = iter.collect();
        items.iter().sum()
    }
}

impl Default for Dyadic {
    fn default() -> Self {
        Dyadic::zero()
    }
}

impl From<i64> for Dyadic {
    fn from(n: i64) -> Self {
        Dyadic::from_int(n)
    }
}

/// Canonical text form `j/2^e`, e.g. `3/2^3`; integers print as `j/2^0`.
impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.exp)
    }
}

/// Accepts `j/2^e` or a bare integer `j`.
impl FromStr for Dyadic {
    type Err = ParseDyadicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseDyadicError::Empty);
        }
        let (num_part, exp) = match s.split_once('/') {
            None => (s, 0),
            Some((n, d)) => {
                let e = d
                    .trim()
                    .strip_prefix("2^")
                    .and_then(|e| e.trim().parse::<usize>().ok())
                    .ok_or_else(|| ParseDyadicError::Denominator(s.to_string()))?;
                (n, e)
            }
        };
        let num = num_part.trim().parse::<BigInt>().map_err(|_| ParseDyadicError::Numerator(s.to_string()))?;
        Ok(Dyadic::new(num, exp))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(j: i64, e: usize) -> Dyadic {
        Dyadic::new(j, e)
    }

    #[test]
    fn make_canonicalizes() {
        assert_eq!(d(4, 2), Dyadic::one());
        assert_eq!(d(4, 2).exponent(), 0);
        let z = d(0, 7);
        assert_eq!(z.exponent(), 0);
        assert!(z.numerator().is_zero());
        let x = d(3, 3);
        assert_eq!((x.numerator().clone(), x.exponent()), (BigInt::from(3), 3));
        assert_eq!(d(-12, 4), d(-3, 2));
    }

    #[test]
    fn sums() {
        assert_eq!(dy_sum(&[d(1, 1), d(1, 2), d(1, 3)]), d(7, 3));
        assert_eq!(dy_sum(&[]), Dyadic::zero());
        assert_eq!(dy_sum(&[Dyadic::one(), d(-1, 1), d(1, 1)]), Dyadic::one());
    }

    #[test]
    fn comparisons() {
        assert_eq!(dy_cmp(&d(7, 3), &d(1, 1)), Ordering::Greater);
        assert_eq!(dy_cmp(&d(1, 1), &d(4, 3)), Ordering::Equal);
        assert_eq!(dy_cmp(&Dyadic::zero(), &d(1, 10)), Ordering::Less);
    }

    #[test]
    fn text_form() {
        assert_eq!(d(3, 3).to_string(), "3/2^3");
        assert_eq!(Dyadic::one().to_string(), "1/2^0");
        assert_eq!("1".parse::<Dyadic>().unwrap(), Dyadic::one());
        assert_eq!("6/2^4".parse::<Dyadic>().unwrap(), d(3, 3));
        assert_eq!("-5/2^1".parse::<Dyadic>().unwrap(), d(-5, 1));
        assert!("1/3".parse::<Dyadic>().is_err());
        assert!("x/2^3".parse::<Dyadic>().is_err());
        assert!("".parse::<Dyadic>().is_err());
    }

    #[test]
    fn cutoff_matches_comparison() {
        for j in -5i64..=70 {
            for e in 0..8 {
                let x = d(j, e);
                for k in 0..12 {
                    assert_eq!(x.le_pow2_neg(k), x <= Dyadic::pow2_neg(k), "{x} vs 2^-{k}");
                }
            }
        }
    }

    #[test]
    fn wide_values_do_not_overflow() {
        let tiny = Dyadic::pow2_neg(200);
        let big = d(1, 0) - tiny.clone();
        assert!(big < Dyadic::one());
        assert_eq!(&big + &tiny, Dyadic::one());
        assert_eq!(big.exponent(), 200);
    }

    fn arb_dyadic() -> impl Strategy<Value = Dyadic> {
        (any::<i64>(), 0usize..80).prop_map(|(j, e)| Dyadic::new(j, e))
    }

    proptest! {
        #[test]
        fn canonicalization_idempotent(x in arb_dyadic()) {
            let again = Dyadic::new(x.numerator().clone(), x.exponent());
            prop_assert_eq!(&again, &x);
            if x.is_zero() {
                prop_assert_eq!(x.exponent(), 0);
            } else {
                prop_assert!(x.exponent() == 0 || x.numerator().bit(0));
            }
        }

        #[test]
        fn text_round_trip(x in arb_dyadic()) {
            prop_assert_eq!(x.to_string().parse::<Dyadic>().unwrap(), x);
        }

        #[test]
        fn sum_is_order_independent(mut xs in prop::collection::vec(arb_dyadic(), 0..12), split in 0usize..12) {
            let forward = dy_sum(&xs);
            let split = split.min(xs.len());
            let (l, r) = xs.split_at(split);
            prop_assert_eq!(&dy_sum(l) + &dy_sum(r), forward.clone());
            xs.reverse();
            prop_assert_eq!(dy_sum(&xs), forward);
        }

        #[test]
        fn order_is_total(a in arb_dyadic(), b in arb_dyadic(), c in arb_dyadic()) {
            prop_assert_eq!(dy_cmp(&a, &b), dy_cmp(&b, &a).reverse());
            if a <= b && b <= c {
                prop_assert!(a <= c);
            }
            prop_assert_eq!(dy_cmp(&a, &b) == Ordering::Equal, a == b);
            // consistent with subtraction
            prop_assert_eq!(dy_cmp(&(&a - &b), &Dyadic::zero()), dy_cmp(&a, &b));
        }
    }
}
