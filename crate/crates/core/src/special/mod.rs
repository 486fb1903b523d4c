//! Half-step Pochhammer products, the multivariate gamma function, the
//! Sturm normalisation constant and the polynomial `P_m(s, z)`.

mod gamma;
mod half;
mod limit;
mod polynomial;

pub use gamma::{
    gamma, gamma_half_exact, gamma_m, gamma_m_exact, gamma_residue, ln_gamma, ln_gamma_m, PiMonomial,
};
pub use half::HalfInteger;
pub use limit::{c_const, c_const_exact, limit_factor, limit_factor_exact, LaurentTerm};
pub use polynomial::{p_m_closed, p_m_closed_poly, p_m_poly, p_m_recursion_step, BivariatePolynomial};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

/// Binomial coefficient `n choose k`; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// `C_l(α) = α (α + 1/2) ... (α + (l-1)/2)`; the empty product is 1.
pub fn c_poch(l: usize, alpha: f64) -> f64 {
    (0..l).map(|j| alpha + j as f64 / 2.0).product()
}

/// Exact `C_l(α)` for rational `α`.
pub fn c_poch_exact(l: usize, alpha: &BigRational) -> BigRational {
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let mut acc = BigRational::one();
    let mut factor = alpha.clone();
    for _ in 0..l {
        acc *= &factor;
        factor += &half;
    }
    acc
}

/// Exact `C_l(α)` for a half-integer argument.
pub fn c_poch_half(l: usize, alpha: HalfInteger) -> BigRational {
    c_poch_exact(l, &alpha.to_rational())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_traits::ToPrimitive;
    use proptest::prelude::*;

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(12, 6), 924);
        assert_eq!(binomial(3, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(0, 0), 1);
    }

    #[test]
    fn c_poch_examples() {
        assert_eq!(c_poch(0, 17.25), 1.0);
        let a = 0.8;
        assert_relative_eq!(c_poch(3, a), a * (a + 0.5) * (a + 1.0), epsilon = 1e-15);
        assert_eq!(c_poch(2, -1.0), 0.5);
        let exact = c_poch_half(2, HalfInteger::from_int(-1));
        assert_eq!(exact, BigRational::new(BigInt::from(1), BigInt::from(2)));
        assert_eq!(c_poch(1, 0.0), 0.0);
    }

    proptest! {
        #[test]
        fn c_poch_exact_matches_float(twice in -40i64..40, l in 0usize..10) {
            let alpha = HalfInteger::new(twice);
            let exact = c_poch_half(l, alpha).to_f64().unwrap();
            let float = c_poch(l, alpha.to_f64());
            if exact == 0.0 {
                prop_assert_eq!(float, 0.0);
            } else {
                prop_assert!(((float - exact) / exact).abs() <= 1e-13);
            }
        }
    }
}
