//! Sturm's operator on Fourier coefficients.
//!
//! For a coefficient function `b(T, Y)` of weight `κ` the Sturm integral is
//!
//! ```text
//! a(T, s) = ∫_{Y>0} b(T, Y) exp(-4π tr(TY)) det(TY)^{κ-(m+1)/2+s} dY_inv
//! ```
//!
//! and the Sturm coefficient is `c(m, κ)^{-1} lim_{s→0} a(T, s)`. For the Maass
//! shift of a weight-`k` form the integral has the closed form
//! `b(T) det(T) Γ_m(α+s) (4π)^{-m(α+s)} P_m(s, α)` with `α = k + (1-m)/2`,
//! and `P_m(s, α)` does not depend on `α`. The limit is taken analytically by
//! [`limit_factor_exact`]; Monte Carlo is only used at fixed `s > 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::cone::{integrate_invariant, i_q_closed, IntegralEstimate, IntegrandShape, MonteCarloParams};
use crate::error::{Error, Result};
use crate::maass::{maass_coeff_factor_real, FourierExpansion, HalfIntegralForm};
use crate::matrix::SymmetricMatrix;
use crate::special::{
    c_const, c_poch, gamma_m, limit_factor_exact, ln_gamma_m, p_m_closed, HalfInteger,
};

fn check_genus(m: usize, t: &HalfIntegralForm) -> Result<()> {
    if m == 0 {
        return Err(Error::invalid("genus must be at least 1"));
    }
    if t.genus() != m {
        return Err(Error::invalid(format!("T has size {} but m = {m}", t.genus())));
    }
    Ok(())
}

fn alpha(m: usize, k: i64) -> f64 {
    k as f64 + (1.0 - m as f64) / 2.0
}

/// Closed-form `a(T, s)` for the Maass shift of a weight-`k` term with
/// coefficient `b`.
pub fn a_closed(m: usize, k: i64, s: f64, t: &HalfIntegralForm, b: f64) -> Result<f64> {
    check_genus(m, t)?;
    let x = alpha(m, k) + s;
    let det = t.det();
    let p = p_m_closed(m, s);
    let gm = gamma_m(m, x)?;
    if p == 0.0 || b == 0.0 {
        return Ok(0.0);
    }
    let value = b * det * gm * (4.0 * PI).powf(-(m as f64) * x) * p;
    if value.is_finite() && value != 0.0 {
        return Ok(value);
    }
    let (ln_gm, sign_gm) = ln_gamma_m(m, x)?;
    let ln = (b * det * p).abs().ln() + ln_gm - m as f64 * x * (4.0 * PI).ln();
    Ok((b * p).signum() * sign_gm * ln.exp())
}

/// `a(T, s)` assembled from the individual cone integrals `I_q(α + s)`:
/// `b det(T) Σ_q (-4π)^q C_{m-q}(α) I_q(α+s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QSum {
    pub value: f64,
    /// `Σ_q |term_q|`, the scale against which cancellation is judged.
    pub magnitude: f64,
}

pub fn a_closed_qsum(m: usize, k: i64, s: f64, t: &HalfIntegralForm, b: f64) -> Result<QSum> {
    check_genus(m, t)?;
    let a = alpha(m, k);
    let prefactor = b * t.det();
    let mut value = 0.0;
    let mut magnitude = 0.0;
    for q in 0..=m {
        let term = prefactor * (-4.0 * PI).powi(q as i32) * c_poch(m - q, a) * i_q_closed(m, q, a + s)?;
        value += term;
        magnitude += term.abs();
    }
    Ok(QSum { value, magnitude })
}

/// Phantom coefficient `-(4π)^m det(T) b` at weight `k = m - 1`.
pub fn phantom_coeff(m: usize, t: &HalfIntegralForm, b: f64) -> Result<f64> {
    check_genus(m, t)?;
    let det = t.det_exact().to_f64().ok_or_else(|| Error::domain("det(T) not representable"))?;
    Ok(-(4.0 * PI).powi(m as i32) * det * b)
}

fn i_pow(n: usize) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// The formal image `(-1)^{m+1} (2i)^m det(∂_Z) h` of a weight-`(m-1)`
/// expansion, as an expansion of weight `m + 1`.
pub fn phantom_series(h: &FourierExpansion) -> Result<FourierExpansion> {
    let m = h.genus();
    let k = h.weight();
    if k != m as i64 - 1 {
        return Err(Error::UnsupportedRegime(format!(
            "the phantom series needs weight m - 1 = {}, got {k}",
            m as i64 - 1
        )));
    }
    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
    let two_i = i_pow(m) * 2f64.powi(m as i32);
    let two_pi_i = i_pow(m) * (2.0 * PI).powi(m as i32);
    let factor = two_i * two_pi_i * sign;
    debug_assert_eq!(factor.im, 0.0);
    let mut out = FourierExpansion::new(m, k + 2)?;
    for (t, b) in h.terms() {
        let det = t.det_exact().to_f64().ok_or_else(|| Error::domain("det(T) not representable"))?;
        out.insert(t.clone(), factor.re * det * b)?;
    }
    Ok(out)
}

/// The `s → 0` Sturm coefficient for weight `k >= m`, which is zero.
pub fn vanishing_check(m: usize, k: i64) -> Result<f64> {
    if k < m as i64 {
        return Err(Error::invalid(format!("vanishing needs k >= m, got k = {k}, m = {m}")));
    }
    limit_factor_exact(m, k).map(|v| v.to_f64())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SturmRegime {
    Phantom,
    Vanishing,
    GenericS,
}

impl SturmRegime {
    pub fn classify(m: usize, k: i64, limit: bool) -> Result<Self> {
        if !limit {
            return Ok(SturmRegime::GenericS);
        }
        match k - m as i64 {
            -1 => Ok(SturmRegime::Phantom),
            d if d >= 0 => Ok(SturmRegime::Vanishing),
            _ => Err(Error::UnsupportedRegime(format!("no analytic limit for k = {k} < m - 1"))),
        }
    }
}

/// Where the Sturm coefficient is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SturmPoint {
    At(f64),
    Limit,
}

/// A normalised Sturm coefficient `c(m, κ)^{-1} a(T, s)` or its limit.
#[derive(Debug, Clone, PartialEq)]
pub struct SturmResult {
    pub m: usize,
    pub k: i64,
    pub point: SturmPoint,
    pub t: HalfIntegralForm,
    pub value: f64,
    pub stderr: Option<f64>,
    pub regime: SturmRegime,
}

impl Serialize for SturmResult {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = ser.serialize_map(None)?;
        map.serialize_entry("m", &self.m)?;
        map.serialize_entry("k", &self.k)?;
        match self.point {
            SturmPoint::At(s) => map.serialize_entry("s", &s)?,
            SturmPoint::Limit => map.serialize_entry("limit", &0.0)?,
        }
        map.serialize_entry("T", &self.t.two_t_rows())?;
        map.serialize_entry("value", &self.value)?;
        if let Some(se) = self.stderr {
            map.serialize_entry("stderr", &se)?;
        }
        map.serialize_entry("regime", &self.regime)?;
        map.end()
    }
}

/// `c(m, k+2)^{-1} lim_{s→0} a(T, s)` for the Maass shift of a weight-`k`
/// term, by exact pole/zero bookkeeping.
pub fn sturm_limit(m: usize, k: i64, t: &HalfIntegralForm, b: f64) -> Result<SturmResult> {
    check_genus(m, t)?;
    let regime = SturmRegime::classify(m, k, true)?;
    let factor = limit_factor_exact(m, k)?;
    let det = t.det_exact().to_f64().ok_or_else(|| Error::domain("det(T) not representable"))?;
    Ok(SturmResult {
        m,
        k,
        point: SturmPoint::Limit,
        t: t.clone(),
        value: factor.to_f64() * det * b,
        stderr: None,
        regime,
    })
}

/// `c(m, k+2)^{-1} a(T, s)` from the closed form at a fixed `s`.
pub fn sturm_at(m: usize, k: i64, s: f64, t: &HalfIntegralForm, b: f64) -> Result<SturmResult> {
    let c = c_const(m, HalfInteger::from_int(k + 2))?;
    Ok(SturmResult {
        m,
        k,
        point: SturmPoint::At(s),
        t: t.clone(),
        value: a_closed(m, k, s, t, b)? / c,
        stderr: None,
        regime: SturmRegime::GenericS,
    })
}

/// A coefficient function `Y ↦ b(T, Y)` fed to the Sturm integral.
pub trait SturmCoefficient: Sync {
    fn value(&self, y: &SymmetricMatrix) -> f64;

    /// Leading power of `det(Y)` carried by the coefficient itself, used to
    /// fit the sampling proposal.
    fn det_shift(&self) -> f64 {
        0.0
    }
}

/// `b(T, Y) = b`, the coefficient of a holomorphic form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolomorphicCoefficient {
    pub b: f64,
}

impl SturmCoefficient for HolomorphicCoefficient {
    fn value(&self, _y: &SymmetricMatrix) -> f64 {
        self.b
    }
}

/// The coefficient of the Maass shift of a weight-`k` term `b e^{2πi tr TZ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaassCoefficient {
    pub k: i64,
    pub t: SymmetricMatrix,
    pub b: f64,
}

impl MaassCoefficient {
    pub fn new(k: i64, t: &HalfIntegralForm, b: f64) -> Self {
        MaassCoefficient { k, t: t.to_symmetric(), b }
    }
}

impl SturmCoefficient for MaassCoefficient {
    fn value(&self, y: &SymmetricMatrix) -> f64 {
        maass_coeff_factor_real(self.k, &self.t, y).unwrap_or(f64::NAN) * self.b
    }

    fn det_shift(&self) -> f64 {
        -1.0
    }
}

/// Monte Carlo estimate of `a(T, s)` for a coefficient function of weight `κ`.
pub fn sturm_numeric(
    m: usize,
    kappa: HalfInteger,
    coeff: &dyn SturmCoefficient,
    t: &HalfIntegralForm,
    s: f64,
    params: &MonteCarloParams,
) -> Result<IntegralEstimate> {
    check_genus(m, t)?;
    let exponent = kappa.to_f64() - (m as f64 + 1.0) / 2.0 + s;
    let ts = t.to_symmetric();
    let det_t = t.det();
    let shape = IntegrandShape::new(exponent + coeff.det_shift(), ts.scale(4.0 * PI));
    integrate_invariant(
        |y| {
            let tr_ty = (ts.as_matrix() * y.as_matrix()).trace();
            coeff.value(y) * (-4.0 * PI * tr_ty).exp() * (det_t * y.determinant()).powf(exponent)
        },
        &shape,
        params,
    )
}

/// [`sturm_numeric`] divided by `c(m, κ)`.
pub fn sturm_coefficient_numeric(
    m: usize,
    kappa: HalfInteger,
    coeff: &dyn SturmCoefficient,
    t: &HalfIntegralForm,
    s: f64,
    params: &MonteCarloParams,
) -> Result<IntegralEstimate> {
    let c = c_const(m, kappa)?;
    Ok(sturm_numeric(m, kappa, coeff, t, s, params)?.scaled(1.0 / c))
}
