//! The verification suites run by `sturm verify`.
//!
//! Every suite draws its random instances from ChaCha streams derived from
//! the run seed, so a report is a pure function of its flags.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sturm_core::cone::{
    i_q_closed, i_q_numeric, integrate_invariant, q_trace_integral_closed, q_trace_integral_num, IntegralEstimate,
    IntegrandShape, MonteCarloParams,
};
use sturm_core::exterior::{exterior_power, sqcap, trace_sandwich, ExteriorMatrix};
use sturm_core::finite_diff::{det_dz_numeric, exterior_derivative_num, FdScheme};
use sturm_core::maass::{det_dz_closed, det_power_exponential, FourierExpansion};
use sturm_core::random::{random_half_integral_form, random_matrix, random_siegel_point, random_spd, random_symmetric};
use sturm_core::special::{
    binomial, c_poch, gamma_m, limit_factor_exact, p_m_closed, p_m_closed_poly, p_m_poly, p_m_recursion_step,
    HalfInteger,
};
use sturm_core::sturm::{
    a_closed, a_closed_qsum, phantom_coeff, phantom_series, sturm_at, sturm_coefficient_numeric, sturm_limit,
    sturm_numeric, HolomorphicCoefficient, MaassCoefficient,
};
use sturm_core::SymmetricMatrix;

use crate::report::{Check, VerificationReport};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Pm,
    Exterior,
    Sandwich,
    Maass,
    Cone,
    Sturm,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Pm => "pm",
            Suite::Exterior => "exterior",
            Suite::Sandwich => "sandwich",
            Suite::Maass => "maass",
            Suite::Cone => "cone",
            Suite::Sturm => "sturm",
            Suite::All => "all",
        }
    }
}

pub const FULL_SAMPLES: usize = 1_000_000;
const QUICK_SAMPLES: usize = 100_000;
const QUICK_GENUS: usize = 3;
const MAX_GENUS: usize = 20;
const MAX_CONE_GENUS: usize = 4;
const MAX_STURM_NUMERIC_GENUS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub m: Option<usize>,
    pub k: Option<i64>,
    pub s: Option<f64>,
    pub q: Option<usize>,
    pub samples: usize,
    pub seed: u64,
    pub nu: Option<f64>,
    pub max_genus: usize,
    pub quick: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            m: None,
            k: None,
            s: None,
            q: None,
            samples: FULL_SAMPLES,
            seed: 7,
            nu: None,
            max_genus: 12,
            quick: false,
        }
    }
}

fn mix(seed: u64, tag: u64) -> u64 {
    seed ^ tag.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

impl SuiteConfig {
    /// Applies the `--quick` caps.
    pub fn effective(&self) -> SuiteConfig {
        if !self.quick {
            return self.clone();
        }
        SuiteConfig {
            samples: self.samples.min(QUICK_SAMPLES),
            max_genus: self.max_genus.min(QUICK_GENUS),
            m: self.m.map(|m| m.min(QUICK_GENUS)),
            ..self.clone()
        }
    }

    fn validate(&self, suite: Suite) -> Result<(), CliError> {
        if self.samples == 0 {
            return Err(CliError::Usage("--samples must be at least 1".into()));
        }
        if self.max_genus == 0 || self.max_genus > MAX_GENUS {
            return Err(CliError::Usage(format!("--max-genus must lie in 1..={MAX_GENUS}")));
        }
        if let Some(s) = self.s {
            if !s.is_finite() {
                return Err(CliError::Usage("--s must be finite".into()));
            }
        }
        let numeric = matches!(suite, Suite::Cone | Suite::Sturm | Suite::All);
        if let Some(m) = self.m {
            let cap = if matches!(suite, Suite::Cone) { MAX_CONE_GENUS } else { MAX_STURM_NUMERIC_GENUS };
            if numeric && (m == 0 || m > cap) {
                return Err(CliError::Usage(format!("--m must lie in 1..={cap} for numeric integration")));
            }
        }
        if let Some(q) = self.q {
            if q > self.m.unwrap_or(2) {
                return Err(CliError::Usage(format!("--q = {q} exceeds m")));
            }
        }
        Ok(())
    }

    fn rng(&self, tag: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(mix(self.seed, tag))
    }

    fn mc(&self, tag: u64) -> MonteCarloParams {
        MonteCarloParams { samples: self.samples, seed: mix(self.seed, 1000 + tag), nu: self.nu, ..Default::default() }
    }

    fn count(&self, full: usize, quick: usize) -> usize {
        if self.quick {
            quick
        } else {
            full
        }
    }

    /// Relative standard-error budget: 1% at 10⁶ samples, scaled by `1/√N`.
    fn stderr_budget(&self) -> f64 {
        0.01 * (FULL_SAMPLES as f64 / self.samples as f64).sqrt().max(1.0)
    }
}

pub fn run_suite(suite: Suite, config: &SuiteConfig) -> Result<VerificationReport, CliError> {
    let cfg = config.effective();
    cfg.validate(suite)?;
    let start = Instant::now();
    let mut report = VerificationReport::new(suite.name(), cfg.seed, cfg.samples);
    match suite {
        Suite::Pm => pm(&cfg, &mut report)?,
        Suite::Exterior => exterior(&cfg, &mut report)?,
        Suite::Sandwich => sandwich(&cfg, &mut report)?,
        Suite::Maass => maass(&cfg, &mut report)?,
        Suite::Cone => cone(&cfg, &mut report)?,
        Suite::Sturm => sturm(&cfg, &mut report)?,
        Suite::All => {
            pm(&cfg, &mut report)?;
            exterior(&cfg, &mut report)?;
            sandwich(&cfg, &mut report)?;
            maass(&cfg, &mut report)?;
            cone(&cfg, &mut report)?;
            sturm(&cfg, &mut report)?;
        }
    }
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}

fn pm(cfg: &SuiteConfig, report: &mut VerificationReport) -> Result<(), CliError> {
    let mut previous = None;
    for m in 1..=cfg.max_genus {
        let p = p_m_poly(m);
        let identity = p == p_m_closed_poly(m);
        let recursion = previous.as_ref().is_none_or(|prev| p_m_recursion_step(prev) == p);
        report.push(Check::exact(
            format!("pm/m={m}"),
            "P_m(s, z) equals its z-free product form; recursion from P_{m-1}",
            p_m_closed(m, 0.3),
            p.evaluate(0.3, 0.7),
            identity && recursion,
        ));
        previous = Some(p);
    }
    Ok(())
}

fn worst(checks: impl IntoIterator<Item = Check>) -> Check {
    checks
        .into_iter()
        .reduce(|a, b| match (a.pass, b.pass) {
            (true, false) => b,
            (false, true) => a,
            _ if b.rel_err > a.rel_err => b,
            _ => a,
        })
        .expect("at least one check")
}

fn power(a: &DMatrix<f64>, q: usize) -> Result<ExteriorMatrix, CliError> {
    Ok(exterior_power(a, q)?)
}

/// Both sides of `(Y^{-[p]} ⊓ T^[q]) Y^[h] = (Y^{-1/2})^[h] (E^[p] ⊓ (Y^{1/2} T Y^{1/2})^[q]) (Y^{1/2})^[h]`
/// with `h = p + q`.
pub fn inverse_sandwich_sides(
    y: &SymmetricMatrix,
    t: &SymmetricMatrix,
    p: usize,
    q: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>), CliError> {
    let m = y.dim();
    let h = p + q;
    let (half, inv_half) = y.sqrt_pair()?;
    let y_inv = y.inverse()?;
    let lhs = sqcap(&power(y_inv.as_matrix(), p)?, &power(t.as_matrix(), q)?)?.compose(&power(y.as_matrix(), h)?)?;
    let sandwich = &half * t.as_matrix() * &half;
    let inner = sqcap(&ExteriorMatrix::identity(m, p)?, &power(&sandwich, q)?)?;
    let rhs = power(&inv_half, h)?.compose(&inner)?.compose(&power(&half, h)?)?;
    Ok((lhs.into_entries(), rhs.into_entries()))
}

fn exterior(cfg: &SuiteConfig, report: &mut VerificationReport) -> Result<(), CliError> {
    let m_max = cfg.max_genus.min(5);
    let n = cfg.count(200, 20);
    let mut rng = cfg.rng(1);
    for i in 0..n {
        let m = rng.random_range(1..=m_max);
        let a = random_matrix(m, &mut rng);
        let b = random_matrix(m, &mut rng);
        let mut checks = Vec::new();
        for q in 0..=m {
            let lhs = power(&(&a * &b), q)?;
            let rhs = power(&a, q)?.compose(&power(&b, q)?)?;
            checks.push(Check::matrix(format!("exterior/functoriality/{i}"), "(MN)^[q] = M^[q] N^[q]", lhs.entries(), rhs.entries(), 1e-9));
        }
        report.push(worst(checks));
    }
    for i in 0..n {
        let m = rng.random_range(1..=m_max);
        let a = random_matrix(m, &mut rng);
        let mut checks = Vec::new();
        for p in 0..=m {
            for q in 0..=m - p {
                let lhs = sqcap(&power(&a, p)?, &power(&a, q)?)?;
                let rhs = power(&a, p + q)?;
                checks.push(Check::matrix(format!("exterior/sqcap-closure/{i}"), "M^[p] ⊓ M^[q] = M^[p+q]", rhs.entries(), lhs.entries(), 1e-10));
            }
        }
        report.push(worst(checks));
    }
    for i in 0..n {
        let m = rng.random_range(1..=m_max);
        let y = random_spd(m, 0.2, &mut rng);
        let t = random_spd(m, 0.2, &mut rng);
        let mut checks = Vec::new();
        for p in 0..=m {
            for q in 0..=m - p {
                let (lhs, rhs) = inverse_sandwich_sides(&y, &t, p, q)?;
                checks.push(Check::matrix(
                    format!("exterior/inverse-sandwich/{i}"),
                    "(Y^{-[p]} ⊓ T^[q]) Y^[h] conjugated to E^[p] ⊓ (Y^{1/2} T Y^{1/2})^[q]",
                    &lhs,
                    &rhs,
                    1e-9,
                ));
            }
        }
        report.push(worst(checks));
    }
    Ok(())
}

/// Elementary symmetric polynomials of the eigenvalues of `Y T`.
pub fn elementary_symmetric_of_product(y: &SymmetricMatrix, t: &SymmetricMatrix) -> Vec<f64> {
    let m = y.dim();
    let eig = (y.as_matrix() * t.as_matrix()).complex_eigenvalues();
    let mut e = vec![0.0; m + 1];
    e[0] = 1.0;
    for lambda in eig.iter() {
        for q in (1..=m).rev() {
            e[q] += e[q - 1] * lambda.re;
        }
    }
    e
}

fn sandwich(cfg: &SuiteConfig, report: &mut VerificationReport) -> Result<(), CliError> {
    let m_max = cfg.max_genus.min(5);
    let mut rng = cfg.rng(2);
    for i in 0..cfg.count(100, 20) {
        let m = rng.random_range(1..=m_max);
        let y = random_spd(m, 0.2, &mut rng);
        let t = random_spd(m, 0.2, &mut rng);
        let e = elementary_symmetric_of_product(&y, &t);
        let checks = (0..=m)
            .map(|q| {
                let v = trace_sandwich(&y, &t, q)?;
                Ok(Check::relative(
                    format!("sandwich/{i}"),
                    "trace((Y^{1/2} T Y^{1/2})^[q]) = e_q(eigenvalues of YT)",
                    v,
                    e[q],
                    1e-10,
                ))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        report.push(worst(checks));
    }
    Ok(())
}

fn maass(cfg: &SuiteConfig, report: &mut VerificationReport) -> Result<(), CliError> {
    let mut rng = cfg.rng(3);
    let scheme = FdScheme::with_step(1e-2);
    let cases = [(2usize, cfg.count(25, 5), 1e-6), (3, cfg.count(10, 2), 1e-4)];
    for (m, n, tol) in cases {
        if m > cfg.max_genus {
            continue;
        }
        for i in 0..n {
            let z = random_siegel_point(m, &mut rng);
            let t = random_half_integral_form(m, &mut rng).to_symmetric().scale(0.25);
            let j = rng.random_range(0.5..2.5);
            let closed = det_dz_closed(j, &t, &z)?;
            let numeric = det_dz_numeric(&|p| det_power_exponential(j, &t, p), &z, &scheme)?;
            report.push(Check::complex(
                format!("maass/det-dz/m={m}/{i}"),
                "det(∂_Z)(det(Y)^j e^{2πi tr TZ}) closed form against finite differences",
                [closed.re, closed.im],
                [numeric.re, numeric.im],
                tol,
            ));
        }
    }
    for (m, tol) in [(2usize, 1e-6), (3, 1e-4)] {
        if m > cfg.max_genus {
            continue;
        }
        for i in 0..cfg.count(3, 1) {
            let y = random_spd(m, 0.8, &mut rng);
            let t = random_symmetric(m, &mut rng).scale(0.5);
            let alpha = rng.random_range(0.3..2.0);
            let y_inv = y.inverse()?;
            let f = |yy: &SymmetricMatrix| yy.determinant().powf(alpha);
            let g = |yy: &SymmetricMatrix| (t.as_matrix() * yy.as_matrix()).trace().exp();
            let (mut exp_checks, mut det_checks, mut prod_checks) = (Vec::new(), Vec::new(), Vec::new());
            for h in 0..=m {
                let d_exp = exterior_derivative_num(&g, &y, h, &scheme)?;
                let exp_closed = power(t.as_matrix(), h)?.scale(g(&y));
                exp_checks.push(Check::matrix(format!("maass/d-exp/m={m}/{i}"), "∂_Y^[q] e^{tr TY} = T^[q] e^{tr TY}", exp_closed.entries(), d_exp.entries(), tol));

                let d_det = exterior_derivative_num(&f, &y, h, &scheme)?;
                let det_closed = power(y_inv.as_matrix(), h)?.scale(c_poch(h, alpha) * f(&y));
                det_checks.push(Check::matrix(format!("maass/d-det/m={m}/{i}"), "∂_Y^[q] det(Y)^α = C_q(α) det(Y)^α Y^{-[q]}", det_closed.entries(), d_det.entries(), tol));

                let d_prod = exterior_derivative_num(&|yy| f(yy) * g(yy), &y, h, &scheme)?;
                let n = binomial(m, h) as usize;
                let mut assembled = DMatrix::zeros(n, n);
                for p in 0..=h {
                    let df = power(y_inv.as_matrix(), p)?.scale(c_poch(p, alpha) * f(&y));
                    let dg = power(t.as_matrix(), h - p)?.scale(g(&y));
                    assembled += sqcap(&df, &dg)?.entries() * binomial(h, p) as f64;
                }
                prod_checks.push(Check::matrix(format!("maass/d-product/m={m}/{i}"), "product rule for ∂_Y^[q] assembled with ⊓", &assembled, d_prod.entries(), tol));
            }
            report.push(worst(exp_checks));
            report.push(worst(det_checks));
            report.push(worst(prod_checks));
        }
    }
    Ok(())
}

fn note_estimate(report: &mut VerificationReport, id: &str, est: &IntegralEstimate) {
    for w in &est.warnings {
        report.note(format!("{id}: {w}"));
    }
}

fn distinct_forms(m: usize, rng: &mut ChaCha8Rng) -> (SymmetricMatrix, SymmetricMatrix) {
    let a = random_half_integral_form(m, rng);
    loop {
        let b = random_half_integral_form(m, rng);
        if b != a {
            return (a.to_symmetric(), b.to_symmetric());
        }
    }
}

fn cone(cfg: &SuiteConfig, report: &mut VerificationReport) -> Result<(), CliError> {
    let m = cfg.m.unwrap_or(2);
    let s = cfg.s.unwrap_or(2.5);
    let qs: Vec<usize> = match cfg.q {
        Some(q) => vec![q],
        None => (0..=m).collect(),
    };
    let budget = cfg.stderr_budget();
    let mut rng = cfg.rng(4);

    let gm = gamma_m(m, s)?;
    let shape = IntegrandShape::new(s, SymmetricMatrix::identity(m));
    let est = integrate_invariant(|y| (-y.trace()).exp() * y.determinant().powf(s), &shape, &cfg.mc(0))?;
    note_estimate(report, "cone/gamma_m", &est);
    report.push(Check::sigma("cone/gamma_m", "∫ e^{-tr Y} det(Y)^s dY_inv = Γ_m(s)", gm, est.scalar(), est.scalar_stderr(), 3.0));

    let (t1, t2) = distinct_forms(m, &mut rng);
    for &q in &qs {
        let closed = i_q_closed(m, q, s)?;
        let e1 = i_q_numeric(q, s, &t1, &cfg.mc(10 + q as u64))?;
        let e2 = i_q_numeric(q, s, &t2, &cfg.mc(20 + q as u64))?;
        let id = format!("cone/I_q/q={q}");
        note_estimate(report, &id, &e1);
        note_estimate(report, &id, &e2);
        let anchor = "I_q(s) = (-4π)^{-q} (4π)^{-ms} binom(m,q) C_q(-s) Γ_m(s)";
        report.push(Check::sigma(id.clone(), anchor, closed, e1.scalar(), e1.scalar_stderr(), 3.0));
        report.push(Check::at_most(format!("{id}/relative-stderr"), anchor, e1.scalar_stderr() / closed.abs(), budget));
        let combined = e1.scalar_stderr().hypot(e2.scalar_stderr());
        report.push(Check::sigma(format!("{id}/T-independence"), "I_q does not depend on T", e1.scalar(), e2.scalar(), combined, 3.0));
    }

    for &q in &qs {
        let closed = q_trace_integral_closed(m, q, s)?;
        let est = q_trace_integral_num(m, q, s, &cfg.mc(30 + q as u64))?;
        let id = format!("cone/q-trace/q={q}");
        note_estimate(report, &id, &est);
        let anchor = "∫ Y^[q] e^{-tr Y} det(Y)^s dY_inv = (-1)^q C_q(-s) Γ_m(s) E";
        let n = est.value.nrows();
        for a in 0..n {
            for b in 0..n {
                let expected = if a == b { closed } else { 0.0 };
                report.push(Check::sigma(format!("{id}/({a},{b})"), anchor, expected, est.value[(a, b)], est.stderr[(a, b)], 3.0));
            }
        }
        if q == m {
            report.push(Check::relative(format!("{id}/shifted-gamma"), "(-1)^m C_m(-s) Γ_m(s) = Γ_m(s+1)", closed, gamma_m(m, s + 1.0)?, 1e-12));
        }
    }
    Ok(())
}

fn sturm(cfg: &SuiteConfig, report: &mut VerificationReport) -> Result<(), CliError> {
    let mut rng = cfg.rng(5);
    let m_max = cfg.max_genus.min(5);
    for m in 2..=m_max {
        for i in 0..cfg.count(20, 5) {
            let t = random_half_integral_form(m, &mut rng);
            let b = rng.random_range(0.5..2.0);
            let limit = sturm_limit(m, m as i64 - 1, &t, b)?;
            let phantom = phantom_coeff(m, &t, b)?;
            report.push(Check::relative(format!("sturm/phantom/m={m}/{i}"), "c(m,κ)^{-1} lim a(T,s) = -(4π)^m det(T) b(T)", phantom, limit.value, 1e-12));
            if i == 0 {
                let near = sturm_at(m, m as i64 - 1, 1e-7, &t, b)?;
                report.push(Check::relative(format!("sturm/phantom-small-s/m={m}"), "closed form at s = 1e-7 approaches the analytic limit", limit.value, near.value, 1e-5));
            }
        }
        for k in m as i64..=m as i64 + 3 {
            let v = limit_factor_exact(m, k)?;
            report.push(Check::exact(format!("sturm/vanishing/m={m}/k={k}"), "the limit vanishes for k >= m", 0.0, v.to_f64(), v.is_zero()));
        }
        let mut h = FourierExpansion::new(m, m as i64 - 1)?;
        for _ in 0..3 {
            h.insert(random_half_integral_form(m, &mut rng), rng.random_range(-2.0..2.0))?;
        }
        let image = phantom_series(&h)?;
        for (j, (t, b)) in h.terms().enumerate() {
            let expected = phantom_coeff(m, t, b)?;
            let got = image.coefficient(t).unwrap_or(f64::NAN);
            report.push(Check::exact(format!("sturm/phantom-series/m={m}/{j}"), "formal image series agrees termwise with the phantom coefficient", expected, got, expected == got));
        }
    }

    for i in 0..cfg.count(200, 20) {
        let m = rng.random_range(1..=m_max);
        let k = rng.random_range((m as i64 - 1).max(1)..=6);
        let s = rng.random_range(0.5..4.0);
        let b = rng.random_range(-2.0..2.0);
        let t = random_half_integral_form(m, &mut rng);
        let closed = a_closed(m, k, s, &t, b)?;
        let sum = a_closed_qsum(m, k, s, &t, b)?;
        report.push(Check::scaled(format!("sturm/q-sum/{i}"), "a(T,s) via P_m against the explicit sum over q", closed, sum.value, sum.magnitude, 1e-11));
    }

    let m = cfg.m.unwrap_or(2);
    let k = cfg.k.unwrap_or(m as i64 - 1);
    let s = cfg.s.unwrap_or(1.0);
    let t = random_half_integral_form(m, &mut rng);
    let closed = a_closed(m, k, s, &t, 1.0)?;
    let coeff = MaassCoefficient::new(k, &t, 1.0);
    let est = sturm_numeric(m, HalfInteger::from_int(k + 2), &coeff, &t, s, &cfg.mc(40))?;
    note_estimate(report, "sturm/numeric", &est);
    report.push(Check::sigma(
        format!("sturm/numeric/m={m}/k={k}"),
        "Monte Carlo Sturm integral of the Maass-shifted coefficient against a(T,s)",
        closed,
        est.scalar(),
        est.scalar_stderr(),
        3.0,
    ));

    let kappa = HalfInteger::from_int(m as i64 + 2);
    let t = random_half_integral_form(m, &mut rng);
    let b = rng.random_range(0.5..2.0);
    let est = sturm_coefficient_numeric(m, kappa, &HolomorphicCoefficient { b }, &t, 0.0, &cfg.mc(41))?;
    note_estimate(report, "sturm/holomorphic", &est);
    report.push(Check::sigma(
        format!("sturm/holomorphic/m={m}/kappa={kappa}"),
        "c(m,κ) normalises the Sturm integral to the identity on holomorphic coefficients",
        b,
        est.scalar(),
        est.scalar_stderr(),
        3.0,
    ));
    Ok(())
}
