//! The Sturm normalisation `c(m, κ)` and the exact `s → 0` limit of the
//! closed-form Sturm coefficient of a Maass-shifted cusp form.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::gamma::{gamma_half_exact, gamma_m_exact, gamma_residue, PiMonomial};
use super::HalfInteger;
use crate::error::{Error, Result};

/// `c(m, κ) = (4π)^{-m(κ - (m+1)/2)} Γ_m(κ - (m+1)/2)`, exactly.
pub fn c_const_exact(m: usize, kappa: HalfInteger) -> Result<PiMonomial> {
    if m == 0 {
        return Err(Error::invalid("genus must be at least 1"));
    }
    let arg = kappa - HalfInteger::new(m as i64 + 1);
    let power = PiMonomial::four_pi_pow(-arg.mul_int(m as i64));
    Ok(power * gamma_m_exact(m, arg)?)
}

pub fn c_const(m: usize, kappa: HalfInteger) -> Result<f64> {
    c_const_exact(m, kappa).map(|c| c.to_f64())
}

/// Leading Laurent term `leading · s^{-pole_order}` of a function at `s = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentTerm {
    pub pole_order: usize,
    pub leading: PiMonomial,
}

/// Leading term of `Γ_m(h + s)` at `s = 0`: each scalar factor is either
/// finite, `Γ(β)`, or has a simple pole with residue `(-1)^n / n!` at `β = -n`.
pub fn gamma_m_laurent(m: usize, h: HalfInteger) -> Result<LaurentTerm> {
    let mut pole_order = 0;
    let mut leading = PiMonomial::new(BigRational::from_integer(BigInt::from(1)), (m * (m - 1)) as i64);
    for nu in 0..m as i64 {
        let beta = h - HalfInteger::new(nu);
        let factor = if beta.is_nonpositive_integer() {
            pole_order += 1;
            PiMonomial::rational(gamma_residue((-beta.as_integer().unwrap()) as u64))
        } else {
            gamma_half_exact(beta)?
        };
        leading = leading * factor;
    }
    Ok(LaurentTerm { pole_order, leading })
}

/// Leading term of `Π_{j<m} (s - j/2)` at `s = 0`: a simple zero from `j = 0`.
fn p_m_product_laurent(m: usize) -> LaurentTerm {
    let mut coeff = BigRational::from_integer(BigInt::from(1));
    for j in 1..m as i64 {
        coeff *= BigRational::new(BigInt::from(-j), BigInt::from(2));
    }
    LaurentTerm { pole_order: 0, leading: PiMonomial::rational(coeff) }
}

/// `L(m, k) = lim_{s→0} (-1)^m c(m, k+2)^{-1} Γ_m(α + s) (4π)^{-m(α+s)} Π_{j<m} (s - j/2)`
/// with `α = k + (1-m)/2`, evaluated by matching the pole order of `Γ_m`
/// against the simple zero of the product.
///
/// For `k = m - 1` this is `-(4π)^m`; for `k >= m` it is zero. Weights below
/// `m - 1` put a pole of order at least two on `Γ_m` and are rejected.
pub fn limit_factor_exact(m: usize, k: i64) -> Result<PiMonomial> {
    if m == 0 {
        return Err(Error::invalid("genus must be at least 1"));
    }
    if k < m as i64 - 1 {
        return Err(Error::UnsupportedRegime(format!(
            "weight k = {k} < m - 1 = {}: the gamma factor has a higher-order pole at s = 0",
            m as i64 - 1
        )));
    }
    let alpha = HalfInteger::from_int(k) + HalfInteger::new(1 - m as i64);
    let gamma = gamma_m_laurent(m, alpha)?;
    let zero_order = 1;
    if gamma.pole_order > zero_order {
        return Err(Error::UnsupportedRegime(format!(
            "pole of order {} exceeds the simple zero",
            gamma.pole_order
        )));
    }
    if gamma.pole_order < zero_order {
        return Ok(PiMonomial::zero());
    }
    let product = p_m_product_laurent(m);
    let sign = PiMonomial::integer(if m % 2 == 0 { 1 } else { -1 });
    let power = PiMonomial::four_pi_pow(-alpha.mul_int(m as i64));
    let numerator = sign * gamma.leading * product.leading * power;
    let c = c_const_exact(m, HalfInteger::from_int(k + 2))?;
    &numerator / &c
}

pub fn limit_factor(m: usize, k: i64) -> Result<f64> {
    limit_factor_exact(m, k).map(|v| v.to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{gamma, gamma_m};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn c_const_examples() {
        // m = 1, κ = 2: argument κ - 1 = 1.
        assert_relative_eq!(c_const(1, HalfInteger::from_int(2)).unwrap(), 1.0 / (4.0 * PI), max_relative = 1e-15);
        assert_relative_eq!(
            c_const(2, HalfInteger::from_int(3)).unwrap(),
            (4.0 * PI).powi(-3) * PI / 2.0,
            max_relative = 1e-14
        );
        for m in 1..=2 {
            let kappa = HalfInteger::new(m as i64 + 1) + HalfInteger::from_int(1);
            assert_relative_eq!(
                c_const(m, kappa).unwrap(),
                (4.0 * PI).powi(-(m as i32)) * gamma_m(m, 1.0).unwrap(),
                max_relative = 1e-14
            );
        }
        for m in 3..=6 {
            let kappa = HalfInteger::new(m as i64 + 1) + HalfInteger::from_int(1);
            assert!(matches!(c_const(m, kappa), Err(Error::Pole { .. })));
        }
    }

    #[test]
    fn c_const_matches_lanczos_route() {
        for m in 1..=6usize {
            for twice_kappa in (m as i64 + 3)..(m as i64 + 20) {
                let kappa = HalfInteger::new(twice_kappa);
                let arg = kappa.to_f64() - (m as f64 + 1.0) / 2.0;
                let Ok(g) = gamma_m(m, arg) else { continue };
                let float = (4.0 * PI).powf(-(m as f64) * arg) * g;
                assert_relative_eq!(c_const(m, kappa).unwrap(), float, max_relative = 1e-12);
            }
        }
        assert_relative_eq!(gamma(1.5), PI.sqrt() / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn phantom_limit_is_minus_four_pi_power() {
        for m in 1..=12usize {
            let got = limit_factor_exact(m, m as i64 - 1).unwrap();
            let unit = PiMonomial::four_pi_pow(HalfInteger::from_int(-(m as i64)));
            assert_eq!(got * unit, PiMonomial::integer(-1), "m = {m}");
            assert_relative_eq!(limit_factor(m, m as i64 - 1).unwrap(), -(4.0 * PI).powi(m as i32), max_relative = 1e-13);
        }
    }

    #[test]
    fn vanishing_for_large_weight() {
        for m in 1..=8usize {
            for k in m as i64..m as i64 + 6 {
                assert!(limit_factor_exact(m, k).unwrap().is_zero());
                assert_eq!(limit_factor(m, k).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn low_weight_is_unsupported() {
        assert!(matches!(limit_factor(3, 1), Err(Error::UnsupportedRegime(_))));
        assert!(matches!(limit_factor(2, 0), Err(Error::UnsupportedRegime(_))));
        assert!(matches!(limit_factor(0, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn laurent_counts_poles() {
        let t = gamma_m_laurent(3, HalfInteger::from_int(0)).unwrap();
        assert_eq!(t.pole_order, 2);
        let t = gamma_m_laurent(2, HalfInteger::new(3)).unwrap();
        assert_eq!(t.pole_order, 0);
    }
}
