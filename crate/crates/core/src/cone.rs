//! Importance-sampled integration over the cone of positive definite
//! matrices with the invariant measure `dY_inv = det(Y)^{-(m+1)/2} Π_{j<=k} dY_jk`,
//! and the closed forms it is checked against.
//!
//! Samples come from a Wishart proposal built by the Bartlett decomposition.
//! Work is split into fixed-size chunks; chunk `i` draws from its own ChaCha
//! stream `i` under the run seed and per-chunk statistics are merged by a
//! fixed pairwise tree, so estimates are bit-identical for any thread count.

use std::f64::consts::{LN_2, PI};

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{exterior_power, trace_sandwich};
use crate::matrix::SymmetricMatrix;
use crate::special::{binomial, c_poch, gamma_m, ln_gamma_m};

/// Sampling controls. `nu = None` derives the proposal degrees of freedom
/// from the integrand's [`IntegrandShape`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloParams {
    pub samples: usize,
    pub seed: u64,
    pub nu: Option<f64>,
    pub chunk_size: usize,
}

impl Default for MonteCarloParams {
    fn default() -> Self {
        MonteCarloParams { samples: 1_000_000, seed: 0, nu: None, chunk_size: 8192 }
    }
}

impl MonteCarloParams {
    pub fn new(samples: usize, seed: u64) -> Self {
        MonteCarloParams { samples, seed, ..Self::default() }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        MonteCarloParams { seed, ..self }
    }

    fn validate(&self, m: usize) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::invalid("at least one sample is required"));
        }
        if self.chunk_size == 0 {
            return Err(Error::invalid("chunk size must be positive"));
        }
        if let Some(nu) = self.nu {
            if !(nu > m as f64 - 1.0) {
                return Err(Error::invalid(format!("proposal degrees of freedom {nu} must exceed m - 1 = {}", m - 1)));
            }
        }
        Ok(())
    }
}

/// Coarse description of an integrand `f(Y) ≈ poly(Y) det(Y)^det_power exp(-tr(rate Y))`
/// used to fit the proposal.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrandShape {
    pub det_power: f64,
    pub rate: SymmetricMatrix,
}

impl IntegrandShape {
    pub fn new(det_power: f64, rate: SymmetricMatrix) -> Self {
        IntegrandShape { det_power, rate }
    }

    /// Default degrees of freedom `2·det_power - 1/2`, kept above `m - 1/2`.
    ///
    /// The importance weight then behaves like `det(Y)^{1/4}` times a
    /// polynomial, which has finite variance whenever the integral converges.
    pub fn default_nu(&self) -> f64 {
        let m = self.rate.dim() as f64;
        (2.0 * self.det_power - 0.5).max(m - 0.5)
    }
}

/// Wishart proposal `W_m(ν, Σ)` with `Σ = (2·rate)^{-1}`, sampled as
/// `Y = C A A^T C^T` with `C = chol(Σ)` and Bartlett factor `A`.
struct WishartProposal {
    m: usize,
    nu: f64,
    chol: DMatrix<f64>,
    ln_det_chol: f64,
    ln_norm: f64,
    chi: Vec<ChiSquared<f64>>,
}

impl WishartProposal {
    fn new(shape: &IntegrandShape, nu: f64) -> Result<Self> {
        let m = shape.rate.dim();
        shape.rate.require_positive_definite("integrand rate")?;
        let sigma = shape.rate.scale(2.0).inverse()?;
        let chol = sigma
            .as_matrix()
            .clone()
            .cholesky()
            .ok_or_else(|| Error::domain("proposal scale is not positive definite"))?
            .l();
        let ln_det_chol: f64 = (0..m).map(|i| chol[(i, i)].ln()).sum();
        let (ln_gm, _) = ln_gamma_m(m, nu / 2.0)?;
        // log normaliser: (νm/2) ln 2 + (ν/2) ln det Σ + ln Γ_m(ν/2)
        let ln_norm = nu * m as f64 / 2.0 * LN_2 + nu * ln_det_chol + ln_gm;
        let chi = (0..m)
            .map(|i| ChiSquared::new(nu - i as f64).map_err(|e| Error::invalid(format!("chi-square: {e}"))))
            .collect::<Result<_>>()?;
        Ok(WishartProposal { m, nu, chol, ln_det_chol, ln_norm, chi })
    }

    /// A draw and the log of `(dY_inv density of the target) / (proposal density)`
    /// up to the integrand itself, i.e. `-(m+1)/2 ln det Y - ln p(Y)`.
    fn sample<R: Rng>(&self, rng: &mut R) -> (SymmetricMatrix, f64) {
        let m = self.m;
        let mut a = DMatrix::zeros(m, m);
        let mut ln_det_a = 0.0;
        let mut frob = 0.0;
        for i in 0..m {
            let c: f64 = self.chi[i].sample(rng);
            a[(i, i)] = c.sqrt();
            ln_det_a += 0.5 * c.ln();
            frob += c;
            for j in 0..i {
                let z: f64 = StandardNormal.sample(rng);
                a[(i, j)] = z;
                frob += z * z;
            }
        }
        let l = &self.chol * a;
        let y = &l * l.transpose();
        let ln_det_y = 2.0 * (self.ln_det_chol + ln_det_a);
        // tr(Σ^{-1} Y) = ||A||_F^2
        let ln_p = (self.nu - m as f64 - 1.0) / 2.0 * ln_det_y - frob / 2.0 - self.ln_norm;
        let ln_ratio = -(m as f64 + 1.0) / 2.0 * ln_det_y - ln_p;
        let y = SymmetricMatrix::new((&y + y.transpose()) * 0.5).expect("symmetric by construction");
        (y, ln_ratio)
    }
}

/// Monte Carlo estimate of a scalar or matrix-valued integral.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralEstimate {
    #[serde(serialize_with = "serialize_rows")]
    pub value: DMatrix<f64>,
    #[serde(serialize_with = "serialize_rows")]
    pub stderr: DMatrix<f64>,
    pub samples: usize,
    pub rejected: usize,
    pub effective_sample_size: f64,
    pub nu: f64,
    pub possible_divergence: bool,
    pub warnings: Vec<String>,
}

fn serialize_rows<S: serde::Serializer>(mat: &DMatrix<f64>, ser: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = (0..mat.nrows()).map(|i| mat.row(i).iter().copied().collect()).collect();
    rows.serialize(ser)
}

impl IntegralEstimate {
    /// Value of a scalar (1x1) estimate.
    pub fn scalar(&self) -> f64 {
        self.value[(0, 0)]
    }

    pub fn scalar_stderr(&self) -> f64 {
        self.stderr[(0, 0)]
    }

    /// Samples that produced a finite contribution.
    pub fn accepted(&self) -> usize {
        self.samples - self.rejected
    }

    pub fn scaled(&self, factor: f64) -> Self {
        IntegralEstimate {
            value: &self.value * factor,
            stderr: &self.stderr * factor.abs(),
            ..self.clone()
        }
    }

    /// `|value - expected| <= k · stderr`, entrywise.
    pub fn within_sigma(&self, expected: &DMatrix<f64>, k: f64) -> bool {
        self.value
            .iter()
            .zip(expected.iter())
            .zip(self.stderr.iter())
            .all(|((v, e), s)| (v - e).abs() <= k * s)
    }
}

/// Running mean and centred second moment for each output entry.
#[derive(Debug, Clone)]
struct Moments {
    n: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
    rejected: usize,
    ratio_sum: f64,
    ratio_sq_sum: f64,
}

impl Moments {
    fn new(len: usize) -> Self {
        Moments { n: 0.0, mean: vec![0.0; len], m2: vec![0.0; len], rejected: 0, ratio_sum: 0.0, ratio_sq_sum: 0.0 }
    }

    fn push(&mut self, values: &[f64]) {
        self.n += 1.0;
        for (i, &x) in values.iter().enumerate() {
            let delta = x - self.mean[i];
            self.mean[i] += delta / self.n;
            self.m2[i] += delta * (x - self.mean[i]);
        }
    }

    fn merge(a: &Moments, b: &Moments) -> Moments {
        let n = a.n + b.n;
        let mut out = Moments::new(a.mean.len());
        out.n = n;
        out.rejected = a.rejected + b.rejected;
        out.ratio_sum = a.ratio_sum + b.ratio_sum;
        out.ratio_sq_sum = a.ratio_sq_sum + b.ratio_sq_sum;
        if n == 0.0 {
            return out;
        }
        for i in 0..a.mean.len() {
            let delta = b.mean[i] - a.mean[i];
            out.mean[i] = a.mean[i] + delta * b.n / n;
            out.m2[i] = a.m2[i] + b.m2[i] + delta * delta * a.n * b.n / n;
        }
        out
    }

    fn stderr(&self, i: usize) -> f64 {
        if self.n < 2.0 {
            return f64::INFINITY;
        }
        (self.m2[i] / (self.n - 1.0) / self.n).sqrt()
    }
}

fn merge_tree(parts: &[Moments]) -> Moments {
    match parts.len() {
        0 => unreachable!("at least one chunk"),
        1 => parts[0].clone(),
        n => {
            let (left, right) = parts.split_at(n / 2);
            Moments::merge(&merge_tree(left), &merge_tree(right))
        }
    }
}

/// Standard errors should shrink like `1/√N`: across the last three sample
/// doublings the ratio `se(N/2) / se(N)` must stay within `[1, 2]`
/// (ideal `√2`).
fn divergence_suspected(chunks: &[Moments]) -> bool {
    let n = chunks.len();
    if n < 8 {
        return false;
    }
    let prefix: Vec<Moments> = [n / 8, n / 4, n / 2, n].iter().map(|&c| merge_tree(&chunks[..c])).collect();
    let len = prefix[0].mean.len();
    (0..len).any(|i| {
        prefix.windows(2).any(|w| {
            let (small, large) = (w[0].stderr(i), w[1].stderr(i));
            if large == 0.0 || !large.is_finite() {
                return false;
            }
            let ratio = small / large;
            !(1.0..=2.0).contains(&ratio)
        })
    })
}

fn integrate_entries(
    f: &(dyn Fn(&SymmetricMatrix, &mut [f64]) + Sync),
    rows: usize,
    cols: usize,
    shape: &IntegrandShape,
    params: &MonteCarloParams,
) -> Result<IntegralEstimate> {
    let m = shape.rate.dim();
    if m == 0 {
        return Err(Error::invalid("genus must be at least 1"));
    }
    params.validate(m)?;
    let nu = params.nu.unwrap_or_else(|| shape.default_nu());
    let proposal = WishartProposal::new(shape, nu)?;
    let len = rows * cols;
    let n_chunks = params.samples.div_ceil(params.chunk_size);
    let chunks: Vec<Moments> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(chunk as u64);
            let count = params.chunk_size.min(params.samples - chunk * params.chunk_size);
            let mut moments = Moments::new(len);
            let mut buf = vec![0.0; len];
            let zeros = vec![0.0; len];
            for _ in 0..count {
                let (y, ln_ratio) = proposal.sample(&mut rng);
                let ratio = ln_ratio.exp();
                buf.iter_mut().for_each(|v| *v = 0.0);
                f(&y, &mut buf);
                if ratio.is_finite() && buf.iter().all(|v| v.is_finite()) {
                    buf.iter_mut().for_each(|v| *v *= ratio);
                }
                if buf.iter().all(|v| v.is_finite()) && ratio.is_finite() {
                    moments.ratio_sum += ratio;
                    moments.ratio_sq_sum += ratio * ratio;
                    moments.push(&buf);
                } else {
                    moments.rejected += 1;
                    moments.push(&zeros);
                }
            }
            moments
        })
        .collect();
    let total = merge_tree(&chunks);
    let value = DMatrix::from_fn(rows, cols, |i, j| total.mean[i * cols + j]);
    let stderr = DMatrix::from_fn(rows, cols, |i, j| total.stderr(i * cols + j));
    let ess = if total.ratio_sq_sum > 0.0 { total.ratio_sum * total.ratio_sum / total.ratio_sq_sum } else { 0.0 };
    let possible_divergence = divergence_suspected(&chunks);
    let mut warnings = Vec::new();
    let reject_rate = total.rejected as f64 / params.samples as f64;
    if reject_rate > 0.01 {
        warnings.push(format!("{:.2}% of samples rejected as non-finite", 100.0 * reject_rate));
    }
    if possible_divergence {
        warnings.push("possible divergence: standard error does not scale like 1/sqrt(N)".to_string());
    }
    Ok(IntegralEstimate {
        value,
        stderr,
        samples: params.samples,
        rejected: total.rejected,
        effective_sample_size: ess,
        nu,
        possible_divergence,
        warnings,
    })
}

/// `∫_{Y>0} f(Y) dY_inv` for a scalar integrand.
pub fn integrate_invariant(
    f: impl Fn(&SymmetricMatrix) -> f64 + Sync,
    shape: &IntegrandShape,
    params: &MonteCarloParams,
) -> Result<IntegralEstimate> {
    integrate_entries(&|y, out| out[0] = f(y), 1, 1, shape, params)
}

/// `∫_{Y>0} F(Y) dY_inv` for a `rows x cols` matrix-valued integrand.
pub fn integrate_invariant_matrix(
    f: impl Fn(&SymmetricMatrix) -> DMatrix<f64> + Sync,
    rows: usize,
    cols: usize,
    shape: &IntegrandShape,
    params: &MonteCarloParams,
) -> Result<IntegralEstimate> {
    integrate_entries(
        &|y, out| {
            let v = f(y);
            for i in 0..rows {
                for j in 0..cols {
                    out[i * cols + j] = v[(i, j)];
                }
            }
        },
        rows,
        cols,
        shape,
        params,
    )
}

/// `I_q(s) = (-4π)^{-q} (4π)^{-ms} binom(m, q) C_q(-s) Γ_m(s)`.
pub fn i_q_closed(m: usize, q: usize, s: f64) -> Result<f64> {
    if q > m {
        return Err(Error::invalid(format!("q = {q} exceeds m = {m}")));
    }
    Ok((-4.0 * PI).powi(-(q as i32))
        * (4.0 * PI).powf(-(m as f64) * s)
        * binomial(m, q) as f64
        * c_poch(q, -s)
        * gamma_m(m, s)?)
}

/// Monte Carlo estimate of
/// `∫ trace((Y^{1/2} T Y^{1/2})^[q]) det(TY)^s exp(-4π tr(TY)) dY_inv`.
pub fn i_q_numeric(q: usize, s: f64, t: &SymmetricMatrix, params: &MonteCarloParams) -> Result<IntegralEstimate> {
    let m = t.dim();
    if q > m {
        return Err(Error::invalid(format!("q = {q} exceeds m = {m}")));
    }
    t.require_positive_definite("T")?;
    let det_t = t.determinant();
    let shape = IntegrandShape::new(s, t.scale(4.0 * PI));
    integrate_invariant(
        |y| {
            let tr_ty = (t.as_matrix() * y.as_matrix()).trace();
            let tr_q = trace_sandwich(y, t, q).unwrap_or(f64::NAN);
            tr_q * (det_t * y.determinant()).powf(s) * (-4.0 * PI * tr_ty).exp()
        },
        &shape,
        params,
    )
}

/// Diagonal value `(-1)^q C_q(-s) Γ_m(s)` of `∫ Y^[q] e^{-tr Y} det(Y)^s dY_inv`.
pub fn q_trace_integral_closed(m: usize, q: usize, s: f64) -> Result<f64> {
    let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * c_poch(q, -s) * gamma_m(m, s)?)
}

/// Monte Carlo estimate of the matrix `∫ Y^[q] e^{-tr Y} det(Y)^s dY_inv`.
pub fn q_trace_integral_num(m: usize, q: usize, s: f64, params: &MonteCarloParams) -> Result<IntegralEstimate> {
    if q > m {
        return Err(Error::invalid(format!("q = {q} exceeds m = {m}")));
    }
    let n = binomial(m, q) as usize;
    let shape = IntegrandShape::new(s, SymmetricMatrix::identity(m));
    integrate_invariant_matrix(
        |y| {
            let weight = (-y.trace()).exp() * y.determinant().powf(s);
            exterior_power(y.as_matrix(), q).expect("q <= m").into_entries() * weight
        },
        n,
        n,
        &shape,
        params,
    )
}
