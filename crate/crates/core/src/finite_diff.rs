//! Central-difference oracles for the symmetric-matrix derivative `∂_Y`, its
//! exterior powers `∂_Y^[q]`, and `det(∂_Z)` on the Siegel half-space.
//!
//! For a symmetric variable `Y`, `(∂_Y)_{μν} = ½(1 + δ_{μν}) ∂/∂y_{μν}` where
//! `y_{μν}` (`μ <= ν`) are the independent coordinates: an off-diagonal
//! perturbation moves `Y_{μν}` and `Y_{νμ}` together.

use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exterior::{ExteriorMatrix, SubsetBasis};
use crate::matrix::{SiegelPoint, SymmetricMatrix};

/// Difference scheme. `step = None` picks `1e-2 · (1 + max |entry|)` at the
/// evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdScheme {
    pub step: Option<f64>,
    pub richardson: bool,
    pub order: u8,
}

impl Default for FdScheme {
    fn default() -> Self {
        FdScheme { step: None, richardson: true, order: 2 }
    }
}

impl FdScheme {
    pub fn with_step(step: f64) -> Self {
        FdScheme { step: Some(step), ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.order != 2 && self.order != 4 {
            return Err(Error::invalid(format!("difference order must be 2 or 4, got {}", self.order)));
        }
        if let Some(h) = self.step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::invalid(format!("step must be positive, got {h}")));
            }
        }
        Ok(())
    }

    fn resolve_step(&self, scale: f64) -> f64 {
        self.step.unwrap_or(1e-2 * (1.0 + scale))
    }

    fn stencil(&self) -> &'static [(f64, f64)] {
        // (offset in units of h, weight in units of 1/h)
        const SECOND: [(f64, f64); 2] = [(-1.0, -0.5), (1.0, 0.5)];
        const FOURTH: [(f64, f64); 4] = [(-2.0, 1.0 / 12.0), (-1.0, -8.0 / 12.0), (1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)];
        if self.order == 2 { &SECOND } else { &FOURTH }
    }
}

/// Mixed partial `∂^n g / ∂t_1 .. ∂t_n` at `t = 0` of `g(t) = eval(t)`,
/// nested central differences with step `h` in every coordinate.
fn mixed_partial(eval: &dyn Fn(&[f64]) -> Complex64, n: usize, h: f64, scheme: &FdScheme) -> Complex64 {
    let stencil = scheme.stencil();
    let mut t = vec![0.0; n];
    let mut acc = Complex64::new(0.0, 0.0);
    for combo in (0..n).map(|_| 0..stencil.len()).multi_cartesian_product() {
        let mut weight = 1.0;
        for (slot, &idx) in combo.iter().enumerate() {
            let (off, w) = stencil[idx];
            t[slot] = off * h;
            weight *= w / h;
        }
        acc += eval(&t) * weight;
    }
    if n == 0 {
        acc = eval(&t);
    }
    acc
}

/// Mixed partial with optional Richardson extrapolation from `(h, h/2)`.
fn mixed_partial_extrapolated(eval: &dyn Fn(&[f64]) -> Complex64, n: usize, h: f64, scheme: &FdScheme) -> Complex64 {
    let coarse = mixed_partial(eval, n, h, scheme);
    if !scheme.richardson || n == 0 {
        return coarse;
    }
    let fine = mixed_partial(eval, n, h / 2.0, scheme);
    let factor = 2f64.powi(scheme.order as i32);
    (fine * factor - coarse) / (factor - 1.0)
}

/// Unit perturbation of the independent coordinate `y_{μν}` and the
/// `½(1 + δ_{μν})` weight of the corresponding operator entry.
fn direction(m: usize, mu: usize, nu: usize) -> (SymmetricMatrix, f64) {
    let mut d = DMatrix::zeros(m, m);
    d[(mu, nu)] = 1.0;
    d[(nu, mu)] = 1.0;
    let weight = if mu == nu { 1.0 } else { 0.5 };
    (SymmetricMatrix::new(d).expect("symmetric"), weight)
}

fn perturbed(base: &SymmetricMatrix, dirs: &[SymmetricMatrix], t: &[f64]) -> SymmetricMatrix {
    dirs.iter().zip(t).fold(base.clone(), |acc, (d, &ti)| acc.add_scaled(d, ti))
}

fn permutation_sign(perm: &[usize]) -> f64 {
    let mut inversions = 0;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 { 1.0 } else { -1.0 }
}

/// `(∂_Y)_{μν} f` at `Y`.
pub fn sym_partial(
    f: &dyn Fn(&SymmetricMatrix) -> f64,
    y: &SymmetricMatrix,
    mu: usize,
    nu: usize,
    scheme: &FdScheme,
) -> Result<f64> {
    scheme.validate()?;
    let m = y.dim();
    if mu >= m || nu >= m {
        return Err(Error::invalid(format!("index ({mu}, {nu}) out of range for {m}x{m}")));
    }
    let (dir, weight) = direction(m, mu.min(nu), mu.max(nu));
    let h = scheme.resolve_step(y.as_matrix().amax());
    let eval = |t: &[f64]| Complex64::new(f(&y.add_scaled(&dir, t[0])), 0.0);
    Ok(weight * mixed_partial_extrapolated(&eval, 1, h, scheme).re)
}

/// Numerical `∂_Y^[q] f` at `Y`: entry `(a, b)` is the determinant expansion
/// `Σ_σ sgn(σ) Π_i (∂_Y)_{a_i, b_σ(i)} f` over the rows `a` and columns `b`.
pub fn exterior_derivative_num(
    f: &dyn Fn(&SymmetricMatrix) -> f64,
    y: &SymmetricMatrix,
    q: usize,
    scheme: &FdScheme,
) -> Result<ExteriorMatrix> {
    scheme.validate()?;
    if q > 3 {
        return Err(Error::UnsupportedRegime(format!("mixed partials of order {q} > 3")));
    }
    let m = y.dim();
    let basis = SubsetBasis::new(m, q)?;
    let h = scheme.resolve_step(y.as_matrix().amax());
    let n = basis.len();
    let perms: Vec<(Vec<usize>, f64)> = (0..q).permutations(q).map(|p| {
        let s = permutation_sign(&p);
        (p, s)
    }).collect();
    let mut entries = DMatrix::zeros(n, n);
    for (i, rows) in basis.subsets().iter().enumerate() {
        for (j, cols) in basis.subsets().iter().enumerate() {
            let mut acc = 0.0;
            for (perm, sign) in &perms {
                let mut weight = *sign;
                let mut dirs = Vec::with_capacity(q);
                for (r, &c) in rows.iter().zip(perm.iter().map(|&p| &cols[p])) {
                    let (d, w) = direction(m, r.min(&c).to_owned(), *r.max(&c));
                    weight *= w;
                    dirs.push(d);
                }
                let eval = |t: &[f64]| Complex64::new(f(&perturbed(y, &dirs, t)), 0.0);
                acc += weight * mixed_partial_extrapolated(&eval, q, h, scheme).re;
            }
            entries[(i, j)] = acc;
        }
    }
    ExteriorMatrix::from_entries(m, q, entries)
}

/// Numerical `det(∂_Z) F` at `Z`, with `∂_Z = ½(∂_X - i ∂_Y)` entrywise.
///
/// Each product of `m` operator entries expands into `2^m` real mixed
/// partials in the `X` and `Y` coordinates, each taken by nested central
/// differences.
pub fn det_dz_numeric(
    f: &dyn Fn(&SiegelPoint) -> Complex64,
    z: &SiegelPoint,
    scheme: &FdScheme,
) -> Result<Complex64> {
    scheme.validate()?;
    let m = z.dim();
    if m > 3 {
        return Err(Error::UnsupportedRegime(format!("det(∂_Z) numerics limited to m <= 3, got {m}")));
    }
    let h = scheme.resolve_step(z.x.as_matrix().amax().max(z.y.as_matrix().amax()));
    let mut total = Complex64::new(0.0, 0.0);
    for perm in (0..m).permutations(m) {
        let sign = permutation_sign(&perm);
        let mut dirs = Vec::with_capacity(m);
        let mut weight = sign;
        for (r, &c) in perm.iter().enumerate() {
            let (d, w) = direction(m, r.min(c), r.max(c));
            dirs.push(d);
            weight *= 0.5 * w;
        }
        // choice[i] = false: ∂_X, true: -i ∂_Y
        for choice in (0..m).map(|_| [false, true]).multi_cartesian_product() {
            let imag_count = choice.iter().filter(|&&c| c).count();
            let coeff = Complex64::new(0.0, -1.0).powi(imag_count as i32) * weight;
            let eval = |t: &[f64]| {
                let mut x = z.x.clone();
                let mut y = z.y.clone();
                for ((d, &on_y), &ti) in dirs.iter().zip(&choice).zip(t) {
                    if on_y {
                        y = y.add_scaled(d, ti);
                    } else {
                        x = x.add_scaled(d, ti);
                    }
                }
                f(&SiegelPoint::new_unchecked(x, y))
            };
            total += coeff * mixed_partial_extrapolated(&eval, m, h, scheme);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::{exterior_power, sqcap};
    use crate::maass::{det_dz_closed, det_power_exponential};
    use crate::random::{random_half_integral_form, random_siegel_point, random_spd, random_symmetric};
    use crate::special::{binomial, c_poch};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn tr_prod(a: &SymmetricMatrix, b: &SymmetricMatrix) -> f64 {
        (a.as_matrix() * b.as_matrix()).trace()
    }

    #[test]
    fn rejects_bad_schemes() {
        let y = SymmetricMatrix::identity(2);
        let f = |_: &SymmetricMatrix| 1.0;
        let bad = FdScheme { order: 3, ..FdScheme::default() };
        assert!(sym_partial(&f, &y, 0, 0, &bad).is_err());
        assert!(sym_partial(&f, &y, 0, 0, &FdScheme::with_step(-1.0)).is_err());
        assert!(sym_partial(&f, &y, 0, 2, &FdScheme::default()).is_err());
        assert!(matches!(exterior_derivative_num(&f, &SymmetricMatrix::identity(4), 4, &FdScheme::default()), Err(Error::UnsupportedRegime(_))));
        let z = SiegelPoint::new(SymmetricMatrix::zeros(4), SymmetricMatrix::identity(4)).unwrap();
        assert!(matches!(det_dz_numeric(&|_| Complex64::new(1.0, 0.0), &z, &FdScheme::default()), Err(Error::UnsupportedRegime(_))));
    }

    #[test]
    fn sym_partial_of_linear_and_det() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = random_symmetric(3, &mut rng);
        let y = random_spd(3, 0.5, &mut rng);
        let scheme = FdScheme::default();
        for mu in 0..3 {
            for nu in 0..3 {
                let d = sym_partial(&|yy| tr_prod(&t, yy), &y, mu, nu, &scheme).unwrap();
                assert_relative_eq!(d, t.get(mu, nu), epsilon = 1e-12);
                // same perturbation path in either index order
                assert_eq!(d, sym_partial(&|yy| tr_prod(&t, yy), &y, nu, mu, &scheme).unwrap());
            }
        }
        let e = SymmetricMatrix::identity(3);
        for mu in 0..3 {
            for nu in 0..3 {
                let d = sym_partial(&|yy| yy.determinant(), &e, mu, nu, &scheme).unwrap();
                assert_relative_eq!(d, if mu == nu { 1.0 } else { 0.0 }, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn sym_partial_of_exponential() {
        let t = SymmetricMatrix::from_rows(&[vec![0.7, 0.2], vec![0.2, -0.4]]).unwrap();
        let y = SymmetricMatrix::from_rows(&[vec![1.0, 0.1], vec![0.1, 0.5]]).unwrap();
        let f = |yy: &SymmetricMatrix| tr_prod(&t, yy).exp();
        for (mu, nu) in [(0, 0), (0, 1), (1, 1)] {
            let d = sym_partial(&f, &y, mu, nu, &FdScheme::default()).unwrap();
            assert_relative_eq!(d, t.get(mu, nu) * f(&y), max_relative = 1e-9);
        }
    }

    #[test]
    fn second_order_accuracy() {
        let t = SymmetricMatrix::from_rows(&[vec![1.3, 0.6], vec![0.6, 0.9]]).unwrap();
        let y = SymmetricMatrix::from_rows(&[vec![0.4, -0.2], vec![-0.2, 0.3]]).unwrap();
        let f = |yy: &SymmetricMatrix| tr_prod(&t, yy).exp();
        let exact = t.get(0, 1) * f(&y);
        let err = |h: f64| {
            let s = FdScheme { step: Some(h), richardson: false, order: 2 };
            (sym_partial(&f, &y, 0, 1, &s).unwrap() - exact).abs()
        };
        let ratio = err(0.02) / err(0.01);
        assert!((2.0..=8.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn exterior_derivative_of_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (m, tol) in [(2usize, 1e-6), (3, 1e-4)] {
            let t = random_symmetric(m, &mut rng).scale(0.8);
            let y = random_spd(m, 0.5, &mut rng);
            let f = |yy: &SymmetricMatrix| tr_prod(&t, yy).exp();
            for q in 0..=m.min(3) {
                let num = exterior_derivative_num(&f, &y, q, &FdScheme::with_step(1e-2)).unwrap();
                let closed = exterior_power(t.as_matrix(), q).unwrap().scale(f(&y));
                assert!(closed.max_relative_diff(&num) < tol, "m={m} q={q}");
            }
        }
    }

    #[test]
    fn exterior_derivative_of_det_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for (m, tol) in [(2usize, 1e-6), (3, 1e-4)] {
            let y = random_spd(m, 0.8, &mut rng);
            let alpha = 1.35;
            let f = |yy: &SymmetricMatrix| yy.determinant().powf(alpha);
            let inv = y.inverse().unwrap();
            for q in 0..=m {
                let num = exterior_derivative_num(&f, &y, q, &FdScheme::with_step(1e-2)).unwrap();
                let closed = exterior_power(inv.as_matrix(), q).unwrap().scale(c_poch(q, alpha) * f(&y));
                assert!(closed.max_relative_diff(&num) < tol, "m={m} q={q}: {}", closed.max_relative_diff(&num));
            }
        }
    }

    #[test]
    fn product_rule_via_sqcap() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for (m, tol) in [(2usize, 1e-6), (3, 1e-4)] {
            let y = random_spd(m, 0.8, &mut rng);
            let t = random_symmetric(m, &mut rng).scale(0.5);
            let alpha = 0.8;
            let f = |yy: &SymmetricMatrix| yy.determinant().powf(alpha);
            let g = |yy: &SymmetricMatrix| tr_prod(&t, yy).exp();
            let inv = y.inverse().unwrap();
            for h in 0..=m {
                let num = exterior_derivative_num(&|yy| f(yy) * g(yy), &y, h, &FdScheme::with_step(1e-2)).unwrap();
                let mut assembled = ExteriorMatrix::from_entries(m, h, DMatrix::zeros(binomial(m, h) as usize, binomial(m, h) as usize)).unwrap();
                for p in 0..=h {
                    let df = exterior_power(inv.as_matrix(), p).unwrap().scale(c_poch(p, alpha) * f(&y));
                    let dg = exterior_power(t.as_matrix(), h - p).unwrap().scale(g(&y));
                    let term = sqcap(&df, &dg).unwrap().scale(binomial(h, p) as f64);
                    assembled = ExteriorMatrix::from_entries(m, h, assembled.entries() + term.entries()).unwrap();
                }
                assert!(assembled.max_relative_diff(&num) < tol, "m={m} h={h}: {}", assembled.max_relative_diff(&num));
            }
        }
    }

    fn lemma_integrand(j: f64, t: &SymmetricMatrix) -> impl Fn(&SiegelPoint) -> Complex64 + '_ {
        move |z: &SiegelPoint| det_power_exponential(j, t, z)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn det_dz_of_pure_exponential_and_pure_det_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let z = random_siegel_point(2, &mut rng);
        let t = random_half_integral_form(2, &mut rng).to_symmetric().scale(0.5);
        let scheme = FdScheme::with_step(1e-2);
        let f = lemma_integrand(0.0, &t);
        let num = det_dz_numeric(&f, &z, &scheme).unwrap();
        let expected = Complex64::new(0.0, 2.0 * PI).powi(2) * t.determinant() * f(&z);
        assert!(rel(num, expected) < 1e-6, "{}", rel(num, expected));

        let j = 1.6;
        let g = |p: &SiegelPoint| Complex64::new(p.y.determinant().powf(j), 0.0);
        let num = det_dz_numeric(&g, &z, &scheme).unwrap();
        let expected = Complex64::new(0.0, 2.0).powi(-2) * c_poch(2, j) * z.y.determinant().powf(j - 1.0);
        assert!(rel(num, expected) < 1e-6, "{}", rel(num, expected));
    }

    #[test]
    fn det_dz_numeric_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for (m, tol) in [(1usize, 1e-8), (2, 1e-6), (3, 1e-4)] {
            for _ in 0..3 {
                let z = random_siegel_point(m, &mut rng);
                let t = random_half_integral_form(m, &mut rng).to_symmetric().scale(0.25);
                let j = 0.5 + 2.0 * rand::Rng::random::<f64>(&mut rng);
                let num = det_dz_numeric(&lemma_integrand(j, &t), &z, &FdScheme::with_step(1e-2)).unwrap();
                let closed = det_dz_closed(j, &t, &z).unwrap();
                assert!(rel(num, closed) < tol, "m={m}: {}", rel(num, closed));
            }
        }
    }

    #[test]
    fn richardson_improves_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let z = random_siegel_point(2, &mut rng);
        let t = random_half_integral_form(2, &mut rng).to_symmetric().scale(0.25);
        let closed = det_dz_closed(1.3, &t, &z).unwrap();
        let f = lemma_integrand(1.3, &t);
        let plain = FdScheme { step: Some(1e-2), richardson: false, order: 2 };
        let extra = FdScheme { step: Some(1e-2), richardson: true, order: 2 };
        let e_plain = rel(det_dz_numeric(&f, &z, &plain).unwrap(), closed);
        let e_extra = rel(det_dz_numeric(&f, &z, &extra).unwrap(), closed);
        assert!(e_extra * 10.0 <= e_plain, "{e_plain} vs {e_extra}");
    }
}
