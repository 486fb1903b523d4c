//! Random test instances: general and symmetric matrices, SPD matrices,
//! half-integral forms and Siegel points.

use nalgebra::DMatrix;
use rand::Rng;

use crate::maass::HalfIntegralForm;
use crate::matrix::{SiegelPoint, SymmetricMatrix};

pub fn random_matrix<R: Rng + ?Sized>(m: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(m, m, |_, _| rng.random_range(-1.0..1.0))
}

pub fn random_symmetric<R: Rng + ?Sized>(m: usize, rng: &mut R) -> SymmetricMatrix {
    let a = random_matrix(m, rng);
    SymmetricMatrix::new((&a + a.transpose()) * 0.5).expect("symmetric by construction")
}

/// `A A^T / m + floor·E` with `A` uniform in `[-1, 1]`; eigenvalues lie in
/// `[floor, floor + m]`.
pub fn random_spd<R: Rng + ?Sized>(m: usize, floor: f64, rng: &mut R) -> SymmetricMatrix {
    let a = random_matrix(m, rng);
    let mut y = &a * a.transpose() / m as f64;
    for i in 0..m {
        y[(i, i)] += floor;
    }
    SymmetricMatrix::new(y).expect("symmetric by construction")
}

/// A random positive definite half-integral form: `2T` has even diagonal in
/// `[2, 2(m+2)]` and off-diagonal entries in `[-2, 2]`; non-definite draws
/// are rejected.
pub fn random_half_integral_form<R: Rng + ?Sized>(m: usize, rng: &mut R) -> HalfIntegralForm {
    loop {
        let mut rows = vec![vec![0i64; m]; m];
        for i in 0..m {
            rows[i][i] = 2 * rng.random_range(1..=(m as i64 + 2));
            for j in 0..i {
                let v = rng.random_range(-2..=2);
                rows[i][j] = v;
                rows[j][i] = v;
            }
        }
        if let Ok(t) = HalfIntegralForm::new(rows) {
            return t;
        }
    }
}

pub fn random_siegel_point<R: Rng + ?Sized>(m: usize, rng: &mut R) -> SiegelPoint {
    let x = random_symmetric(m, rng).scale(0.5);
    let y = random_spd(m, 0.6, rng);
    SiegelPoint::new(x, y).expect("imaginary part is positive definite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_instances_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in 1..=5 {
            for _ in 0..20 {
                assert!(random_spd(m, 0.3, &mut rng).is_positive_definite());
                let t = random_half_integral_form(m, &mut rng);
                assert!(t.to_symmetric().is_positive_definite());
                let z = random_siegel_point(m, &mut rng);
                assert!(z.y.is_positive_definite());
            }
        }
    }
}
