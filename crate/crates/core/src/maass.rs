//! Half-integral forms, formal Fourier expansions, and the closed-form action
//! of `det(∂_Z)` and of the Maass shift operator on Fourier terms.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::trace_sandwich_all;
use crate::matrix::{SiegelPoint, SymmetricMatrix};
use crate::special::{c_poch, HalfInteger};

/// A positive definite half-integral matrix `T`, stored exactly as the
/// integer matrix `2T` (even diagonal).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct HalfIntegralForm {
    m: usize,
    two_t: Vec<i64>,
}

impl HalfIntegralForm {
    /// Builds `T` from the rows of `2T`.
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::invalid("half-integral form must have genus >= 1"));
        }
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::invalid("2T must be square"));
        }
        for i in 0..m {
            if rows[i][i] % 2 != 0 {
                return Err(Error::invalid(format!("2T has odd diagonal entry {}", rows[i][i])));
            }
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::invalid("2T is not symmetric"));
                }
            }
        }
        let form = HalfIntegralForm { m, two_t: rows.into_iter().flatten().collect() };
        for k in 1..=m {
            if form.leading_minor(k) <= BigInt::zero() {
                return Err(Error::domain(format!("T is not positive definite (leading minor {k})")));
            }
        }
        Ok(form)
    }

    /// Diagonal `T = diag(t_1, .., t_m)` with integer entries.
    pub fn diagonal(t: &[i64]) -> Result<Self> {
        let m = t.len();
        Self::new((0..m).map(|i| (0..m).map(|j| if i == j { 2 * t[i] } else { 0 }).collect()).collect())
    }

    pub fn identity(m: usize) -> Self {
        Self::diagonal(&vec![1; m]).expect("identity is positive definite")
    }

    pub fn genus(&self) -> usize {
        self.m
    }

    /// Entry `(i, j)` of `2T`.
    pub fn two_t(&self, i: usize, j: usize) -> i64 {
        self.two_t[i * self.m + j]
    }

    pub fn two_t_rows(&self) -> Vec<Vec<i64>> {
        self.two_t.chunks(self.m).map(|r| r.to_vec()).collect()
    }

    /// Determinant of the leading `k x k` block of `2T` (fraction-free
    /// Gaussian elimination over the integers).
    fn leading_minor(&self, k: usize) -> BigInt {
        let mut a: Vec<Vec<BigInt>> =
            (0..k).map(|i| (0..k).map(|j| BigInt::from(self.two_t(i, j))).collect()).collect();
        bareiss_det(&mut a)
    }

    /// `det(2T)`, exactly.
    pub fn det_two_t(&self) -> BigInt {
        self.leading_minor(self.m)
    }

    /// `det(T) = det(2T) / 2^m`, exactly.
    pub fn det_exact(&self) -> BigRational {
        BigRational::new(self.det_two_t(), num_traits::pow(BigInt::from(2), self.m))
    }

    pub fn det(&self) -> f64 {
        self.det_exact().to_f64().expect("finite determinant")
    }

    /// `T` as a real symmetric matrix.
    pub fn to_symmetric(&self) -> SymmetricMatrix {
        SymmetricMatrix::new(nalgebra::DMatrix::from_fn(self.m, self.m, |i, j| self.two_t(i, j) as f64 / 2.0))
            .expect("2T is symmetric")
    }
}

fn bareiss_det(a: &mut [Vec<BigInt>]) -> BigInt {
    let n = a.len();
    let mut sign = 1;
    let mut prev = BigInt::from(1);
    for k in 0..n {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    if n == 0 {
        return BigInt::from(1);
    }
    a[n - 1][n - 1].clone() * sign
}

impl TryFrom<Vec<Vec<i64>>> for HalfIntegralForm {
    type Error = Error;
    fn try_from(rows: Vec<Vec<i64>>) -> Result<Self> {
        HalfIntegralForm::new(rows)
    }
}

impl From<HalfIntegralForm> for Vec<Vec<i64>> {
    fn from(t: HalfIntegralForm) -> Self {
        t.two_t_rows()
    }
}

/// A finite formal Fourier expansion `Σ_{T > 0} b(T) exp(2πi tr(TZ))` of
/// scalar weight `k` and genus `m`.
///
/// JSON form: `{ "m": 2, "k": 1, "terms": [ { "twoT": [[2, 1], [1, 2]], "b": 1.0 } ] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ExpansionJson", into = "ExpansionJson")]
pub struct FourierExpansion {
    m: usize,
    k: i64,
    terms: BTreeMap<HalfIntegralForm, f64>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    #[serde(rename = "twoT")]
    two_t: HalfIntegralForm,
    b: f64,
}

#[derive(Serialize, Deserialize)]
struct ExpansionJson {
    m: usize,
    k: i64,
    terms: Vec<TermJson>,
}

impl TryFrom<ExpansionJson> for FourierExpansion {
    type Error = Error;
    fn try_from(raw: ExpansionJson) -> Result<Self> {
        let mut out = FourierExpansion::new(raw.m, raw.k)?;
        for term in raw.terms {
            out.insert(term.two_t, term.b)?;
        }
        Ok(out)
    }
}

impl From<FourierExpansion> for ExpansionJson {
    fn from(e: FourierExpansion) -> Self {
        ExpansionJson {
            m: e.m,
            k: e.k,
            terms: e.terms.into_iter().map(|(two_t, b)| TermJson { two_t, b }).collect(),
        }
    }
}

impl FourierExpansion {
    pub fn new(m: usize, k: i64) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("genus must be at least 1"));
        }
        Ok(FourierExpansion { m, k, terms: BTreeMap::new() })
    }

    pub fn from_terms(m: usize, k: i64, terms: impl IntoIterator<Item = (HalfIntegralForm, f64)>) -> Result<Self> {
        let mut out = Self::new(m, k)?;
        for (t, b) in terms {
            out.insert(t, b)?;
        }
        Ok(out)
    }

    /// Adds `b` to the coefficient of `T`.
    pub fn insert(&mut self, t: HalfIntegralForm, b: f64) -> Result<()> {
        if t.genus() != self.m {
            return Err(Error::invalid(format!("term of genus {} in a genus-{} expansion", t.genus(), self.m)));
        }
        if !b.is_finite() {
            return Err(Error::invalid("coefficient is not finite"));
        }
        *self.terms.entry(t).or_insert(0.0) += b;
        Ok(())
    }

    pub fn genus(&self) -> usize {
        self.m
    }

    pub fn weight(&self) -> i64 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, t: &HalfIntegralForm) -> Option<f64> {
        self.terms.get(t).copied()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&HalfIntegralForm, f64)> {
        self.terms.iter().map(|(t, b)| (t, *b))
    }

    pub fn scale(&self, c: f64) -> Self {
        FourierExpansion { m: self.m, k: self.k, terms: self.terms.iter().map(|(t, b)| (t.clone(), c * b)).collect() }
    }

    pub fn add(&self, other: &FourierExpansion) -> Result<Self> {
        if self.m != other.m || self.k != other.k {
            return Err(Error::invalid("expansions differ in genus or weight"));
        }
        let mut out = self.clone();
        for (t, b) in other.terms() {
            out.insert(t.clone(), b)?;
        }
        Ok(out)
    }
}

fn two_i_pow(m: i32) -> Complex64 {
    Complex64::new(0.0, 2.0).powi(m)
}

/// `det(Y)^j exp(2πi tr(TZ))` at `Z = X + iY`.
pub fn det_power_exponential(j: f64, t: &SymmetricMatrix, z: &SiegelPoint) -> Complex64 {
    let tr_tx = (t.as_matrix() * z.x.as_matrix()).trace();
    let tr_ty = (t.as_matrix() * z.y.as_matrix()).trace();
    Complex64::from_polar((-2.0 * PI * tr_ty).exp(), 2.0 * PI * tr_tx) * z.y.determinant().powf(j)
}

/// `det(∂_Z) (det(Y)^j exp(2πi tr(TZ)))` in closed form:
/// `(2i)^{-m} det(Y)^{j-1} exp(2πi tr(TZ)) Σ_q (-4π)^q C_{m-q}(j) trace((Y^{1/2} T Y^{1/2})^[q])`.
///
/// `T` may be any real symmetric matrix here, including zero or singular
/// ones.
pub fn det_dz_closed(j: f64, t: &SymmetricMatrix, z: &SiegelPoint) -> Result<Complex64> {
    let m = z.dim();
    if t.dim() != m {
        return Err(Error::invalid("T and Z differ in size"));
    }
    let traces = trace_sandwich_all(&z.y, t)?;
    let sum: f64 = (0..=m).map(|q| (-4.0 * PI).powi(q as i32) * c_poch(m - q, j) * traces[q]).sum();
    let det_y = z.y.determinant();
    let tr_tx = (t.as_matrix() * z.x.as_matrix()).trace();
    let tr_ty = (t.as_matrix() * z.y.as_matrix()).trace();
    let phase = Complex64::from_polar((-2.0 * PI * tr_ty).exp(), 2.0 * PI * tr_tx);
    Ok(two_i_pow(-(m as i32)) * det_y.powf(j - 1.0) * phase * sum)
}

/// The exponent `j = k + (1 - m)/2` of `det(Y)` conjugating `det(∂_Z)` in the
/// Maass shift at scalar weight `k`.
pub fn maass_exponent(m: usize, k: i64) -> HalfInteger {
    HalfInteger::from_int(k) + HalfInteger::new(1 - m as i64)
}

/// `b(T, Y) / b(T)` for the image of a weight-`k` term under the Maass shift:
/// `Σ_q (-4π)^q C_{m-q}(k + (1-m)/2) det(Y)^{-1} trace((Y^{1/2} T Y^{1/2})^[q])`.
pub fn maass_coeff_factor(k: i64, t: &HalfIntegralForm, y: &SymmetricMatrix) -> Result<f64> {
    maass_coeff_factor_real(k, &t.to_symmetric(), y)
}

/// [`maass_coeff_factor`] for an arbitrary real symmetric `T`.
pub fn maass_coeff_factor_real(k: i64, t: &SymmetricMatrix, y: &SymmetricMatrix) -> Result<f64> {
    let m = y.dim();
    if t.dim() != m {
        return Err(Error::invalid("T and Y differ in size"));
    }
    let j = maass_exponent(m, k).to_f64();
    let traces = trace_sandwich_all(y, t)?;
    let sum: f64 = (0..=m).map(|q| (-4.0 * PI).powi(q as i32) * c_poch(m - q, j) * traces[q]).sum();
    Ok(sum / y.determinant())
}

/// The Maass shift of a Fourier expansion, as a map `(T, Y) ↦ b(T, Y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaassImage {
    source: FourierExpansion,
}

impl MaassImage {
    pub fn genus(&self) -> usize {
        self.source.genus()
    }

    /// Weight of the shifted form, `k + 2`.
    pub fn weight(&self) -> i64 {
        self.source.weight() + 2
    }

    pub fn source(&self) -> &FourierExpansion {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }

    /// `b(T, Y)`, or `None` when `T` is not in the support.
    pub fn coefficient(&self, t: &HalfIntegralForm, y: &SymmetricMatrix) -> Result<Option<f64>> {
        match self.source.coefficient(t) {
            None => Ok(None),
            Some(b) => Ok(Some(b * maass_coeff_factor(self.source.weight(), t, y)?)),
        }
    }

    /// All coefficients `b(T, Y)` at a fixed `Y`.
    pub fn evaluate(&self, y: &SymmetricMatrix) -> Result<Vec<(HalfIntegralForm, f64)>> {
        self.source
            .terms()
            .map(|(t, b)| Ok((t.clone(), b * maass_coeff_factor(self.source.weight(), t, y)?)))
            .collect()
    }
}

/// Applies the Maass shift operator `Δ_+` to a scalar-weight expansion.
pub fn maass_apply(h: &FourierExpansion) -> MaassImage {
    MaassImage { source: h.clone() }
}
