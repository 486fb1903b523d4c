use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::binomial;

/// A polynomial in `(s, z)` with exact rational coefficients.
///
/// Terms are keyed by `(degree in s, degree in z)`; zero coefficients are
/// never stored, so structural equality is polynomial equality.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BivariatePolynomial {
    terms: BTreeMap<(u32, u32), BigRational>,
}

fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl BivariatePolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term(0, 0, c);
        p
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    /// `cs·s + cz·z + c0`.
    pub fn linear(cs: BigRational, cz: BigRational, c0: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term(1, 0, cs);
        p.add_term(0, 1, cz);
        p.add_term(0, 0, c0);
        p
    }

    pub fn s() -> Self {
        Self::linear(BigRational::one(), BigRational::zero(), BigRational::zero())
    }

    pub fn z() -> Self {
        Self::linear(BigRational::zero(), BigRational::one(), BigRational::zero())
    }

    fn add_term(&mut self, ds: u32, dz: u32, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry((ds, dz)).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&(ds, dz));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, ds: u32, dz: u32) -> BigRational {
        self.terms.get(&(ds, dz)).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), &BigRational)> {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|(a, b)| a + b).max()
    }

    pub fn degree_in_z(&self) -> Option<u32> {
        self.terms.keys().map(|&(_, b)| b).max()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = Self::zero();
        for (&(a, b), v) in &self.terms {
            out.add_term(a, b, v * c);
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::one(), |acc, _| &acc * self)
    }

    /// `P(s + ds, z + dz)`.
    pub fn shift(&self, ds: &BigRational, dz: &BigRational) -> Self {
        let s_shift = Self::linear(BigRational::one(), BigRational::zero(), ds.clone());
        let z_shift = Self::linear(BigRational::zero(), BigRational::one(), dz.clone());
        let mut out = Self::zero();
        for (&(a, b), v) in &self.terms {
            out = &out + &(&s_shift.pow(a) * &z_shift.pow(b)).scale(v);
        }
        out
    }

    pub fn evaluate_exact(&self, s: &BigRational, z: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for (&(a, b), v) in &self.terms {
            acc += v * num_traits::pow(s.clone(), a as usize) * num_traits::pow(z.clone(), b as usize);
        }
        acc
    }

    pub fn evaluate(&self, s: f64, z: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(a, b), v)| v.to_f64().unwrap_or(f64::NAN) * s.powi(a as i32) * z.powi(b as i32))
            .sum()
    }
}

impl Add for &BivariatePolynomial {
    type Output = BivariatePolynomial;
    fn add(self, rhs: &BivariatePolynomial) -> BivariatePolynomial {
        let mut out = self.clone();
        for (&(a, b), v) in &rhs.terms {
            out.add_term(a, b, v.clone());
        }
        out
    }
}

impl Neg for &BivariatePolynomial {
    type Output = BivariatePolynomial;
    fn neg(self) -> BivariatePolynomial {
        self.scale(&-BigRational::one())
    }
}

impl Sub for &BivariatePolynomial {
    type Output = BivariatePolynomial;
    fn sub(self, rhs: &BivariatePolynomial) -> BivariatePolynomial {
        self + &(-rhs)
    }
}

impl Mul for &BivariatePolynomial {
    type Output = BivariatePolynomial;
    fn mul(self, rhs: &BivariatePolynomial) -> BivariatePolynomial {
        let mut out = BivariatePolynomial::zero();
        for (&(a1, b1), v1) in &self.terms {
            for (&(a2, b2), v2) in &rhs.terms {
                out.add_term(a1 + a2, b1 + b2, v1 * v2);
            }
        }
        out
    }
}

impl fmt::Display for BivariatePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(a, b), v) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({v})")?;
            match a {
                0 => {}
                1 => write!(f, "·s")?,
                _ => write!(f, "·s^{a}")?,
            }
            match b {
                0 => {}
                1 => write!(f, "·z")?,
                _ => write!(f, "·z^{b}")?,
            }
        }
        Ok(())
    }
}

/// `P_m(s, z) = Σ_q binom(m, q) (-1)^q Π_{j<m-q} (z + j/2) Π_{j<q} (z + s - j/2)`,
/// expanded exactly.
pub fn p_m_poly(m: usize) -> BivariatePolynomial {
    let mut acc = BivariatePolynomial::zero();
    for q in 0..=m {
        let mut term = BivariatePolynomial::constant(rat(if q % 2 == 0 { 1 } else { -1 } * binomial(m, q) as i64, 1));
        for j in 0..(m - q) {
            term = &term * &BivariatePolynomial::linear(BigRational::zero(), BigRational::one(), rat(j as i64, 2));
        }
        for j in 0..q {
            term = &term * &BivariatePolynomial::linear(BigRational::one(), BigRational::one(), rat(-(j as i64), 2));
        }
        acc = &acc + &term;
    }
    acc
}

/// The `z`-free closed form `(-1)^m Π_{j<m} (s - j/2)`.
pub fn p_m_closed_poly(m: usize) -> BivariatePolynomial {
    let sign = if m % 2 == 0 { 1 } else { -1 };
    let mut acc = BivariatePolynomial::constant(rat(sign, 1));
    for j in 0..m {
        acc = &acc * &BivariatePolynomial::linear(BigRational::one(), BigRational::zero(), rat(-(j as i64), 2));
    }
    acc
}

/// `z·P(s - 1/2, z + 1/2) - (z + s)·P(s - 1/2, z)`, which maps `P_m` to
/// `P_{m+1}`.
pub fn p_m_recursion_step(p: &BivariatePolynomial) -> BivariatePolynomial {
    let half = rat(1, 2);
    let up = p.shift(&-half.clone(), &half);
    let down = p.shift(&-half, &BigRational::zero());
    let z_plus_s = BivariatePolynomial::linear(BigRational::one(), BigRational::one(), BigRational::zero());
    &(&BivariatePolynomial::z() * &up) - &(&z_plus_s * &down)
}

/// `(-1)^m s (s - 1/2) ... (s - (m-1)/2)`.
pub fn p_m_closed(m: usize, s: f64) -> f64 {
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    sign * (0..m).map(|j| s - j as f64 / 2.0).product::<f64>()
}
