use std::f64::consts::PI;
use std::fmt;
use std::ops::{Div, Mul};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::HalfInteger;
use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn lanczos_sum(x: f64) -> f64 {
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    acc
}

/// Scalar gamma function (Lanczos, g = 7, n = 9). Returns `±inf` at the
/// poles `0, -1, -2, ...`.
pub fn gamma(x: f64) -> f64 {
    if x <= 0.0 && x.fract() == 0.0 {
        return f64::INFINITY;
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let xm = x - 1.0;
    let t = xm + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(xm + 0.5) * (-t).exp() * lanczos_sum(xm)
}

/// `(ln |Γ(x)|, sign Γ(x))`. At a pole returns `(inf, 1)`.
pub fn ln_gamma(x: f64) -> (f64, f64) {
    if x <= 0.0 && x.fract() == 0.0 {
        return (f64::INFINITY, 1.0);
    }
    if x < 0.5 {
        let s = (PI * x).sin();
        let (lg, sign) = ln_gamma(1.0 - x);
        return (PI.ln() - s.abs().ln() - lg, sign * s.signum());
    }
    let xm = x - 1.0;
    let t = xm + LANCZOS_G + 0.5;
    (LN_SQRT_2PI + (xm + 0.5) * t.ln() - t + lanczos_sum(xm).ln(), 1.0)
}

fn pole_count(m: usize, s: f64) -> usize {
    (0..m)
        .filter(|&nu| {
            let x = s - nu as f64 / 2.0;
            x <= 0.0 && x.fract() == 0.0
        })
        .count()
}

/// Multivariate gamma `Γ_m(s) = π^{m(m-1)/4} Π_{ν<m} Γ(s - ν/2)`.
pub fn gamma_m(m: usize, s: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::invalid("multivariate gamma needs m >= 1"));
    }
    let order = pole_count(m, s);
    if order > 0 {
        return Err(Error::Pole { order, at: s });
    }
    let mut acc = PI.powf((m * (m - 1)) as f64 / 4.0);
    for nu in 0..m {
        acc *= gamma(s - nu as f64 / 2.0);
    }
    Ok(acc)
}

/// `(ln |Γ_m(s)|, sign Γ_m(s))`, for arguments where `Γ_m` overflows.
pub fn ln_gamma_m(m: usize, s: f64) -> Result<(f64, f64)> {
    if m == 0 {
        return Err(Error::invalid("multivariate gamma needs m >= 1"));
    }
    let order = pole_count(m, s);
    if order > 0 {
        return Err(Error::Pole { order, at: s });
    }
    let mut ln = PI.ln() * (m * (m - 1)) as f64 / 4.0;
    let mut sign = 1.0;
    for nu in 0..m {
        let (lg, sg) = ln_gamma(s - nu as f64 / 2.0);
        ln += lg;
        sign *= sg;
    }
    Ok((ln, sign))
}

/// An exact number of the form `r · π^{e/4}` with `r` rational.
///
/// Gamma values at half-integers, residues of gamma and powers of `4π` with
/// half-integer exponent all live in this set, which makes the pole/zero
/// bookkeeping of the Sturm limit exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiMonomial {
    coeff: BigRational,
    pi_quarters: i64,
}

impl PiMonomial {
    pub fn new(coeff: BigRational, pi_quarters: i64) -> Self {
        if coeff.is_zero() {
            PiMonomial { coeff, pi_quarters: 0 }
        } else {
            PiMonomial { coeff, pi_quarters }
        }
    }

    pub fn rational(coeff: BigRational) -> Self {
        Self::new(coeff, 0)
    }

    pub fn integer(n: i64) -> Self {
        Self::rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Self::integer(0)
    }

    pub fn one() -> Self {
        Self::integer(1)
    }

    /// `(4π)^x` for half-integer `x`.
    pub fn four_pi_pow(x: HalfInteger) -> Self {
        let e = x.twice();
        let two = BigInt::from(2);
        let coeff = if e >= 0 {
            BigRational::from_integer(num_traits::pow(two, e as usize))
        } else {
            BigRational::new(BigInt::one(), num_traits::pow(two, (-e) as usize))
        };
        Self::new(coeff, 2 * e)
    }

    pub fn coeff(&self) -> &BigRational {
        &self.coeff
    }

    /// Exponent of `π`, in quarters.
    pub fn pi_quarters(&self) -> i64 {
        self.pi_quarters
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        if self.coeff.is_zero() {
            return 0.0;
        }
        let pi_part = self.pi_quarters as f64 / 4.0 * PI.ln();
        let direct = self.coeff.to_f64().unwrap_or(f64::NAN);
        if direct.is_finite() && direct != 0.0 {
            return direct * (pi_part).exp();
        }
        // Coefficient outside f64 range on its own: go through logarithms.
        let sign = if self.coeff.is_negative() { -1.0 } else { 1.0 };
        let ln = ln_big(self.coeff.numer()) - ln_big(self.coeff.denom()) + pi_part;
        sign * ln.exp()
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.coeff.is_zero() {
            return Err(Error::domain("division by zero"));
        }
        Ok(Self::new(self.coeff.recip(), -self.pi_quarters))
    }
}

fn ln_big(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits < 1000 {
        return n.abs().to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top: BigInt = n.abs() >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

impl Mul for &PiMonomial {
    type Output = PiMonomial;
    fn mul(self, rhs: &PiMonomial) -> PiMonomial {
        PiMonomial::new(&self.coeff * &rhs.coeff, self.pi_quarters + rhs.pi_quarters)
    }
}

impl Mul for PiMonomial {
    type Output = PiMonomial;
    fn mul(self, rhs: PiMonomial) -> PiMonomial {
        &self * &rhs
    }
}

impl Div for &PiMonomial {
    type Output = Result<PiMonomial>;
    fn div(self, rhs: &PiMonomial) -> Result<PiMonomial> {
        Ok(self * &rhs.inverse()?)
    }
}

impl fmt::Display for PiMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pi_quarters {
            0 => write!(f, "{}", self.coeff),
            q if q % 4 == 0 => write!(f, "{}·π^{}", self.coeff, q / 4),
            q => write!(f, "{}·π^({}/4)", self.coeff, q),
        }
    }
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Exact `Γ(h)` at a half-integer `h`, via `Γ(1) = 1`, `Γ(1/2) = √π` and the
/// functional equation in both directions.
pub fn gamma_half_exact(h: HalfInteger) -> Result<PiMonomial> {
    if h.is_nonpositive_integer() {
        return Err(Error::Pole { order: 1, at: h.to_f64() });
    }
    if let Some(n) = h.as_integer() {
        return Ok(PiMonomial::rational(BigRational::from_integer(factorial(n as u64 - 1))));
    }
    let half = HalfInteger::HALF;
    let mut value = BigRational::one();
    let mut x = half;
    if h > half {
        while x < h {
            value *= x.to_rational();
            x = x + HalfInteger::from_int(1);
        }
    } else {
        while x > h {
            x = x - HalfInteger::from_int(1);
            value /= x.to_rational();
        }
    }
    Ok(PiMonomial::new(value, 2))
}

/// Residue of `Γ` at the pole `-n`: `(-1)^n / n!`.
pub fn gamma_residue(n: u64) -> BigRational {
    let sign = if n % 2 == 0 { 1 } else { -1 };
    BigRational::new(BigInt::from(sign), factorial(n))
}

/// Exact `Γ_m(h)` at a half-integer.
pub fn gamma_m_exact(m: usize, h: HalfInteger) -> Result<PiMonomial> {
    if m == 0 {
        return Err(Error::invalid("multivariate gamma needs m >= 1"));
    }
    let order = (0..m as i64).filter(|&nu| (h - HalfInteger::new(nu)).is_nonpositive_integer()).count();
    if order > 0 {
        return Err(Error::Pole { order, at: h.to_f64() });
    }
    let mut acc = PiMonomial::new(BigRational::one(), (m * (m - 1)) as i64);
    for nu in 0..m as i64 {
        acc = acc * gamma_half_exact(h - HalfInteger::new(nu))?;
    }
    Ok(acc)
}
