use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sturm_core::exterior::{exterior_power, sqcap, trace_sandwich, ExteriorMatrix};
use sturm_core::random::{random_matrix, random_spd};
use sturm_core::special::binomial;

fn power(m: &DMatrix<f64>, q: usize) -> ExteriorMatrix {
    exterior_power(m, q).unwrap()
}

fn setup() -> impl Strategy<Value = (usize, u64)> {
    (1usize..=5, any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn functoriality((m, seed) in setup()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(m, &mut rng);
        let b = random_matrix(m, &mut rng);
        for q in 0..=m {
            let lhs = power(&(&a * &b), q);
            let rhs = power(&a, q).compose(&power(&b, q)).unwrap();
            prop_assert!(lhs.max_relative_diff(&rhs) <= 1e-12);
        }
    }

    #[test]
    fn transpose_commutes((m, seed) in setup()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(m, &mut rng);
        for q in 0..=m {
            prop_assert!(power(&a.transpose(), q).max_relative_diff(&power(&a, q).transpose()) <= 1e-13);
        }
    }

    #[test]
    fn sqcap_closure((m, seed) in setup()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(m, &mut rng);
        for p in 0..=m {
            for q in 0..=m - p {
                let lhs = sqcap(&power(&a, p), &power(&a, q)).unwrap();
                prop_assert!(lhs.max_relative_diff(&power(&a, p + q)) <= 1e-10);
            }
        }
    }

    #[test]
    fn sqcap_is_symmetric_in_degrees((m, seed) in setup()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(m, &mut rng);
        let b = random_matrix(m, &mut rng);
        for p in 0..=m {
            for q in 0..=m - p {
                let ab = sqcap(&power(&a, p), &power(&b, q)).unwrap();
                let ba = sqcap(&power(&b, q), &power(&a, p)).unwrap();
                prop_assert!(ab.max_relative_diff(&ba) <= 1e-12);
            }
        }
    }

    #[test]
    fn full_degree_is_determinant((m, seed) in setup()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(m, &mut rng);
        let top = power(&a, m).scalar().unwrap();
        prop_assert!((top - a.determinant()).abs() <= 1e-12 * (1.0 + a.determinant().abs()));
        prop_assert_eq!(power(&a, 0).scalar(), Some(1.0));
    }

    #[test]
    fn powers_of_spd_are_spd((m, seed) in setup()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = random_spd(m, 0.1, &mut rng);
        for q in 1..=m {
            let e = power(y.as_matrix(), q).into_entries();
            prop_assert_eq!(e.nrows() as u64, binomial(m, q));
            prop_assert!((&e - e.transpose()).amax() <= 1e-14);
            prop_assert!(e.cholesky().is_some());
        }
    }

    #[test]
    fn inverse_identity((m, seed) in setup()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = random_spd(m, 0.2, &mut rng);
        let t = random_spd(m, 0.2, &mut rng);
        let (half, inv_half) = y.sqrt_pair().unwrap();
        let y_inv = y.inverse().unwrap();
        let sandwich = &half * t.as_matrix() * &half;
        for p in 0..=m {
            for q in 0..=m - p {
                let h = p + q;
                let lhs = sqcap(&power(y_inv.as_matrix(), p), &power(t.as_matrix(), q))
                    .unwrap()
                    .compose(&power(y.as_matrix(), h))
                    .unwrap();
                let inner = sqcap(&ExteriorMatrix::identity(m, p).unwrap(), &power(&sandwich, q)).unwrap();
                let rhs = power(&inv_half, h).compose(&inner).unwrap().compose(&power(&half, h)).unwrap();
                prop_assert!(lhs.max_relative_diff(&rhs) <= 1e-9, "m={} p={} q={}", m, p, q);
            }
        }
    }

    #[test]
    fn trace_sandwich_is_elementary_symmetric((m, seed) in setup()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = random_spd(m, 0.2, &mut rng);
        let t = random_spd(m, 0.2, &mut rng);
        let eig = (y.as_matrix() * t.as_matrix()).complex_eigenvalues();
        let mut e = vec![0.0; m + 1];
        e[0] = 1.0;
        for lambda in eig.iter() {
            for q in (1..=m).rev() {
                e[q] += e[q - 1] * lambda.re;
            }
        }
        for q in 0..=m {
            let v = trace_sandwich(&y, &t, q).unwrap();
            prop_assert!((v - e[q]).abs() <= 1e-10 * (1.0 + e[q].abs()));
        }
    }
}
