//! Exact dyadic rationals `mantissa * 2^exp2`.
//!
//! Every amplitude in the simulator is a dyadic rational: reference wires
//! carry `±1` or `±1/2`, and sums and products of those never leave the
//! dyadic ring. Values are kept canonical (odd mantissa, or zero with
//! `exp2 == 0`) so that structural equality is numeric equality.
//!
//! Mantissas that fit in an `i64` are stored inline; anything larger spills
//! into a [`BigInt`]. The spill is invisible to callers.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, PartialEq, Eq, Hash)]
enum Mantissa {
    Small(i64),
    Big(BigInt),
}

/// An exact value `mantissa * 2^exp2`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mantissa: Mantissa,
    exp2: i64,
}

impl Dyadic {
    pub const fn zero() -> Self {
        Dyadic { mantissa: Mantissa::Small(0), exp2: 0 }
    }

    pub const fn one() -> Self {
        Dyadic { mantissa: Mantissa::Small(1), exp2: 0 }
    }

    /// `2^exp`.
    pub const fn pow2(exp: i64) -> Self {
        Dyadic { mantissa: Mantissa::Small(1), exp2: exp }
    }

    pub fn from_i64(value: i64) -> Self {
        Self::from_i128(value as i128, 0)
    }

    /// Builds `mantissa * 2^exp2`, normalising to canonical form.
    pub fn new(mantissa: BigInt, exp2: i64) -> Self {
        Self::from_big(mantissa, exp2)
    }

    fn from_i128(mut m: i128, mut e: i64) -> Self {
        if m == 0 {
            return Self::zero();
        }
        let tz = m.trailing_zeros();
        m >>= tz;
        e += tz as i64;
        match i64::try_from(m) {
            Ok(small) => Dyadic { mantissa: Mantissa::Small(small), exp2: e },
            Err(_) => Dyadic { mantissa: Mantissa::Big(BigInt::from(m)), exp2: e },
        }
    }

    fn from_big(mut m: BigInt, mut e: i64) -> Self {
        let Some(tz) = m.trailing_zeros() else {
            return Self::zero();
        };
        if tz > 0 {
            m >>= tz;
            e += tz as i64;
        }
        match m.to_i64() {
            Some(small) => Dyadic { mantissa: Mantissa::Small(small), exp2: e },
            None => Dyadic { mantissa: Mantissa::Big(m), exp2: e },
        }
    }

    /// The odd (or zero) mantissa.
    pub fn mantissa(&self) -> BigInt {
        match &self.mantissa {
            Mantissa::Small(m) => BigInt::from(*m),
            Mantissa::Big(m) => m.clone(),
        }
    }

    pub fn exp2(&self) -> i64 {
        self.exp2
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.mantissa, Mantissa::Small(0))
    }

    /// -1, 0 or +1.
    pub fn signum(&self) -> i32 {
        match &self.mantissa {
            Mantissa::Small(m) => m.signum() as i32,
            Mantissa::Big(m) => {
                if m.is_negative() {
                    -1
                } else {
                    1
                }
            }
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    /// Nearest `f64`; saturates to infinity or zero outside the `f64` range.
    pub fn to_f64(&self) -> f64 {
        let m = match &self.mantissa {
            Mantissa::Small(m) => *m as f64,
            Mantissa::Big(m) => m.to_f64().unwrap_or(f64::NAN),
        };
        scale_pow2(m, self.exp2)
    }

    /// Exact decimal expansion, e.g. `-0.5625` or `12`.
    pub fn to_decimal_string(&self) -> String {
        if self.is_zero() {
            return "0".to_owned();
        }
        let m = self.mantissa();
        if self.exp2 >= 0 {
            return (m << self.exp2 as usize).to_string();
        }
        let places = self.exp2.unsigned_abs() as usize;
        let digits = (m.abs() * BigInt::from(5u8).pow(places as u32)).to_string();
        let padded = format!("{digits:0>width$}", width = places + 1);
        let (int_part, frac_part) = padded.split_at(padded.len() - places);
        let sign = if m.is_negative() { "-" } else { "" };
        format!("{sign}{int_part}.{frac_part}")
    }

    fn as_small(&self) -> Option<i64> {
        match self.mantissa {
            Mantissa::Small(m) => Some(m),
            Mantissa::Big(_) => None,
        }
    }

    fn add_ref(&self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let (hi, lo) = if self.exp2 >= rhs.exp2 { (self, rhs) } else { (rhs, self) };
        let shift = (hi.exp2 - lo.exp2) as u64;
        if let (Some(a), Some(b)) = (hi.as_small(), lo.as_small()) {
            if shift < 63 {
                return Self::from_i128(((a as i128) << shift) + b as i128, lo.exp2);
            }
        }
        let m = (hi.mantissa() << shift as usize) + lo.mantissa();
        Self::from_big(m, lo.exp2)
    }

    fn mul_ref(&self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        let e = self.exp2 + rhs.exp2;
        if let (Some(a), Some(b)) = (self.as_small(), rhs.as_small()) {
            return Self::from_i128(a as i128 * b as i128, e);
        }
        Self::from_big(self.mantissa() * rhs.mantissa(), e)
    }

    fn neg_ref(&self) -> Dyadic {
        match &self.mantissa {
            Mantissa::Small(m) => Self::from_i128(-(*m as i128), self.exp2),
            Mantissa::Big(m) => Self::from_big(-m, self.exp2),
        }
    }

    /// Multiplies by an integer coefficient.
    pub fn scale(&self, coefficient: i64) -> Dyadic {
        self.mul_ref(&Dyadic::from_i64(coefficient))
    }
}

fn scale_pow2(mut x: f64, mut e: i64) -> f64 {
    // powi saturates well before i32 limits; step in chunks that stay finite.
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

impl Default for Dyadic {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for Dyadic {
    fn from(v: i64) -> Self {
        Dyadic::from_i64(v)
    }
}

impl From<i32> for Dyadic {
    fn from(v: i32) -> Self {
        Dyadic::from_i64(v as i64)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dyadic({}*2^{})", self.mantissa(), self.exp2)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum().cmp(&0)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $inner:ident) => {
        impl $tr<&Dyadic> for &Dyadic {
            type Output = Dyadic;
            fn $method(self, rhs: &Dyadic) -> Dyadic {
                self.$inner(rhs)
            }
        }
        impl $tr<Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $method(self, rhs: Dyadic) -> Dyadic {
                (&self).$inner(&rhs)
            }
        }
        impl $tr<&Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $method(self, rhs: &Dyadic) -> Dyadic {
                (&self).$inner(rhs)
            }
        }
        impl $tr<Dyadic> for &Dyadic {
            type Output = Dyadic;
            fn $method(self, rhs: Dyadic) -> Dyadic {
                self.$inner(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_ref);
forward_binop!(Mul, mul, mul_ref);

impl Dyadic {
    fn sub_ref(&self, rhs: &Dyadic) -> Dyadic {
        self.add_ref(&rhs.neg_ref())
    }
}

forward_binop!(Sub, sub, sub_ref);

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        self.neg_ref()
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        self.neg_ref()
    }
}

impl AddAssign<&Dyadic> for Dyadic {
    fn add_assign(&mut self, rhs: &Dyadic) {
        *self = self.add_ref(rhs);
    }
}

impl AddAssign for Dyadic {
    fn add_assign(&mut self, rhs: Dyadic) {
        *self = self.add_ref(&rhs);
    }
}

impl SubAssign<&Dyadic> for Dyadic {
    fn sub_assign(&mut self, rhs: &Dyadic) {
        *self = self.sub_ref(rhs);
    }
}

impl MulAssign<&Dyadic> for Dyadic {
    fn mul_assign(&mut self, rhs: &Dyadic) {
        *self = self.mul_ref(rhs);
    }
}

impl MulAssign for Dyadic {
    fn mul_assign(&mut self, rhs: Dyadic) {
        *self = self.mul_ref(&rhs);
    }
}

impl Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Self {
        iter.fold(Dyadic::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Dyadic> for Dyadic {
    fn sum<I: Iterator<Item = &'a Dyadic>>(iter: I) -> Self {
        iter.fold(Dyadic::zero(), |acc, x| acc + x)
    }
}

impl Product for Dyadic {
    fn product<I: Iterator<Item = Dyadic>>(iter: I) -> Self {
        iter.fold(Dyadic::one(), |acc, x| acc * x)
    }
}

#[derive(Serialize, Deserialize)]
struct DyadicRepr {
    mantissa: String,
    exp2: i64,
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        DyadicRepr { mantissa: self.mantissa().to_string(), exp2: self.exp2 }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = DyadicRepr::deserialize(deserializer)?;
        let m: BigInt =
            repr.mantissa.parse().map_err(|_| D::Error::custom(format!("invalid mantissa {:?}", repr.mantissa)))?;
        Ok(Dyadic::new(m, repr.exp2))
    }
}

impl Zero for Dyadic {
    fn zero() -> Self {
        Dyadic::zero()
    }

    fn is_zero(&self) -> bool {
        Dyadic::is_zero(self)
    }
}
