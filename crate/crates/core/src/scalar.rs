//! Number types accepted by the apportionment routines.
//!
//! Two arithmetic paths exist. The exact path (integer or rational
//! populations) compares priority values by cross-multiplying squared
//! populations with seat products in arbitrary precision. The float path
//! works in `f64` and treats values within [`FLOAT_REL_TOL`] of each other as
//! equal, so that near-ties surface as errors instead of silent tie-breaks.

use std::cmp::Ordering;
use std::fmt::Debug;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Relative tolerance under which two floats compare equal.
pub const FLOAT_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arithmetic {
    Exact,
    Float,
}

/// Ordered field used for quotas and modified divisors.
pub trait Field: Num + Clone + PartialOrd + Debug + Send + Sync {
    const ARITHMETIC: Arithmetic;

    fn from_u64(v: u64) -> Self;

    fn to_f64(&self) -> f64;

    /// Floor of a nonnegative value.
    fn floor_u64(&self) -> u64;

    fn is_integral(&self) -> bool;

    /// Sign of `lhs - rhs`. Floats within the relative tolerance are `Equal`.
    fn compare(lhs: &Self, rhs: &Self) -> Ordering;

    fn ceil_u64(&self) -> u64 {
        self.floor_u64() + u64::from(!self.is_integral())
    }

    fn half(&self) -> Self {
        self.clone() / (Self::one() + Self::one())
    }
}

impl Field for f64 {
    const ARITHMETIC: Arithmetic = Arithmetic::Float;

    fn from_u64(v: u64) -> Self {
        v as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn floor_u64(&self) -> u64 {
        self.floor() as u64
    }

    fn is_integral(&self) -> bool {
        self.fract() == 0.0
    }

    fn compare(lhs: &Self, rhs: &Self) -> Ordering {
        let scale = lhs.abs().max(rhs.abs());
        if (lhs - rhs).abs() <= FLOAT_REL_TOL * scale {
            Ordering::Equal
        } else if lhs < rhs {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
}

impl Field for BigRational {
    const ARITHMETIC: Arithmetic = Arithmetic::Exact;

    fn from_u64(v: u64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn floor_u64(&self) -> u64 {
        self.floor().to_integer().to_u64().unwrap_or(0)
    }

    fn is_integral(&self) -> bool {
        self.is_integer()
    }

    fn compare(lhs: &Self, rhs: &Self) -> Ordering {
        lhs.cmp(rhs)
    }
}

/// A state population magnitude.
pub trait Population: Clone + Debug + PartialEq + Send + Sync {
    /// Field that quotas and divisors derived from this population live in.
    type Quota: Field;

    fn is_positive(&self) -> bool;

    fn to_quota(&self) -> Self::Quota;

    fn to_f64(&self) -> f64;

    /// Order of `self / sqrt(seats (seats + 1))` against the same quantity
    /// for `other`, decided as `self² · other_seats(other_seats + 1)` versus
    /// `other² · seats(seats + 1)`.
    fn priority_cmp(&self, seats: u64, other: &Self, other_seats: u64) -> Ordering;
}

fn seat_product(r: u64) -> u128 {
    u128::from(r) * (u128::from(r) + 1)
}

impl Population for u64 {
    type Quota = BigRational;

    fn is_positive(&self) -> bool {
        *self > 0
    }

    fn to_quota(&self) -> BigRational {
        BigRational::from_integer(BigInt::from(*self))
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }

    fn priority_cmp(&self, seats: u64, other: &Self, other_seats: u64) -> Ordering {
        let a2 = u128::from(*self) * u128::from(*self);
        let b2 = u128::from(*other) * u128::from(*other);
        let (ra, rb) = (seat_product(seats), seat_product(other_seats));
        match (a2.checked_mul(rb), b2.checked_mul(ra)) {
            (Some(lhs), Some(rhs)) => lhs.cmp(&rhs),
            _ => {
                let lhs = BigUint::from(a2) * BigUint::from(rb);
                let rhs = BigUint::from(b2) * BigUint::from(ra);
                lhs.cmp(&rhs)
            }
        }
    }
}

impl Population for BigRational {
    type Quota = BigRational;

    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }

    fn to_quota(&self) -> BigRational {
        self.clone()
    }

    fn to_f64(&self) -> f64 {
        Field::to_f64(self)
    }

    fn priority_cmp(&self, seats: u64, other: &Self, other_seats: u64) -> Ordering {
        // Compare a²/b² against ra/rb on integers: a = an/ad, b = bn/bd.
        let (an, ad) = (self.numer(), self.denom());
        let (bn, bd) = (other.numer(), other.denom());
        let ra = BigInt::from(seat_product(seats));
        let rb = BigInt::from(seat_product(other_seats));
        let lhs = (an * bd).pow(2) * rb;
        let rhs = (bn * ad).pow(2) * ra;
        lhs.cmp(&rhs)
    }
}

impl Population for f64 {
    type Quota = f64;

    fn is_positive(&self) -> bool {
        self.is_finite() && *self > 0.0
    }

    fn to_quota(&self) -> f64 {
        *self
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn priority_cmp(&self, seats: u64, other: &Self, other_seats: u64) -> Ordering {
        let lhs = self * self * seat_product(other_seats) as f64;
        let rhs = other * other * seat_product(seats) as f64;
        <f64 as Field>::compare(&lhs, &rhs)
    }
}

/// Parses `"a"`, `"a/b"` or a decimal literal into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((int, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = int.starts_with('-');
        let int: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().ok()?
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac: BigInt = BigInt::from_str_radix(frac, 10).ok()?;
        let magnitude = int.abs() * &scale + frac;
        let numer = if negative { -magnitude } else { magnitude };
        return Some(BigRational::new(numer, scale));
    }
    let n: BigInt = text.parse().ok()?;
    Some(BigRational::from_integer(n))
}

/// Exact square root of a nonnegative rational, when it exists.
pub fn rational_sqrt(value: &BigRational) -> Option<BigRational> {
    if value.is_negative() {
        return None;
    }
    let n = value.numer().to_biguint()?;
    let d = value.denom().to_biguint()?;
    let (rn, rd) = (n.sqrt(), d.sqrt());
    if &rn * &rn == n && &rd * &rd == d {
        Some(BigRational::new(BigInt::from(rn), BigInt::from(rd)))
    } else {
        None
    }
}
