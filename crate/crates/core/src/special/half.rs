use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

/// An exact element of `Z/2`, stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HalfInteger {
    twice: i64,
}

impl HalfInteger {
    pub const ZERO: HalfInteger = HalfInteger { twice: 0 };
    pub const HALF: HalfInteger = HalfInteger { twice: 1 };

    /// The half-integer `twice / 2`.
    pub const fn new(twice: i64) -> Self {
        HalfInteger { twice }
    }

    pub const fn from_int(n: i64) -> Self {
        HalfInteger { twice: 2 * n }
    }

    /// Recovers a half-integer from a float, if it is one exactly.
    pub fn from_f64(value: f64) -> Option<Self> {
        let twice = value * 2.0;
        (twice.is_finite() && twice.fract() == 0.0 && twice.abs() < 9.0e15)
            .then(|| HalfInteger { twice: twice as i64 })
    }

    pub const fn twice(self) -> i64 {
        self.twice
    }

    pub const fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    /// Integer value, if this is an integer.
    pub const fn as_integer(self) -> Option<i64> {
        if self.is_integer() {
            Some(self.twice / 2)
        } else {
            None
        }
    }

    /// True at the poles of the scalar gamma function, `0, -1, -2, ...`.
    pub const fn is_nonpositive_integer(self) -> bool {
        self.is_integer() && self.twice <= 0
    }

    pub fn to_f64(self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub fn to_rational(self) -> BigRational {
        BigRational::new(BigInt::from(self.twice), BigInt::from(2))
    }

    pub fn mul_int(self, n: i64) -> Self {
        HalfInteger { twice: self.twice * n }
    }
}

impl Add for HalfInteger {
    type Output = HalfInteger;
    fn add(self, rhs: HalfInteger) -> HalfInteger {
        HalfInteger { twice: self.twice + rhs.twice }
    }
}

impl Sub for HalfInteger {
    type Output = HalfInteger;
    fn sub(self, rhs: HalfInteger) -> HalfInteger {
        HalfInteger { twice: self.twice - rhs.twice }
    }
}

impl Neg for HalfInteger {
    type Output = HalfInteger;
    fn neg(self) -> HalfInteger {
        HalfInteger { twice: -self.twice }
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_is_exact() {
        let a = HalfInteger::new(3);
        let b = HalfInteger::new(-5);
        assert_eq!(a + b, HalfInteger::from_int(-1));
        assert_eq!(a - b, HalfInteger::from_int(4));
        assert_eq!(-a, HalfInteger::new(-3));
        assert!((a + b).is_nonpositive_integer());
        assert!(!a.is_integer());
        assert_eq!(a.to_string(), "3/2");
        assert_eq!(HalfInteger::from_f64(-2.5), Some(HalfInteger::new(-5)));
        assert_eq!(HalfInteger::from_f64(0.3), None);
    }
}
