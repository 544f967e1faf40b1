use hopf_berger::curvature::CurvatureModel;
use hopf_berger::geodesics::{self, Branch};
use hopf_berger::liealg::{Family, Presentation};
use hopf_berger::subspace;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn family() -> impl Strategy<Value = (Family, usize)> {
    prop_oneof![Just((Family::C, 2)), Just((Family::H, 1)), Just((Family::H, 2)), Just((Family::O, 1))]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn curvature_symmetries((f, n) in family(), tau in 0.05f64..3.0, seed in any::<u64>()) {
        let m = CurvatureModel::new(Presentation::build(f, n, tau).unwrap());
        let p = m.presentation();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let [x, y, z, w] = std::array::from_fn(|_| p.random_pvector(&mut rng));
        let scale = x.norm() * y.norm() * z.norm() * w.norm() * (1.0 + 1.0 / tau);
        let tol = 1e-11 * scale;
        let rxyz = m.r(&x, &y, &z);
        prop_assert!((&rxyz + m.r(&y, &x, &z)).norm() <= tol);
        prop_assert!((&rxyz + m.r(&y, &z, &x) + m.r(&z, &x, &y)).norm() <= tol);
        prop_assert!((rxyz.dot(&w) + m.r(&x, &y, &w).dot(&z)).abs() <= tol);
        prop_assert!((rxyz.dot(&w) - m.r(&z, &w, &x).dot(&y)).abs() <= tol);
    }

    #[test]
    fn jacobi_operator_is_symmetric((f, n) in family(), tau in 0.05f64..3.0, seed in any::<u64>()) {
        let m = CurvatureModel::new(Presentation::build(f, n, tau).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = m.presentation().random_pvector(&mut rng);
        let j = m.jacobi(&x).unwrap();
        prop_assert!((&j - j.transpose()).amax() <= 1e-11 * j.amax().max(1.0));
        prop_assert!((&j * &x).norm() <= 1e-11 * j.amax().max(1.0) * x.norm());
    }

    #[test]
    fn positive_below_four_thirds((f, n) in family(), tau in 0.05f64..1.33, seed in any::<u64>()) {
        let m = CurvatureModel::new(Presentation::build(f, n, tau).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = m.presentation();
        let (x, y) = (p.random_pvector(&mut rng), p.random_pvector(&mut rng));
        prop_assert!(m.sectional(&x, &y).unwrap() > 0.0);
    }

    #[test]
    fn sectional_is_scale_invariant((f, n) in family(), tau in 0.05f64..3.0, seed in any::<u64>(), a in 0.1f64..10.0) {
        let m = CurvatureModel::new(Presentation::build(f, n, tau).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = m.presentation();
        let (x, y) = (p.random_pvector(&mut rng), p.random_pvector(&mut rng));
        let k = m.sectional(&x, &y).unwrap();
        let k2 = m.sectional(&(&x * a), &(&y + &x * 0.5)).unwrap();
        prop_assert!((k - k2).abs() <= 1e-9 * (1.0 + k.abs()));
    }

    #[test]
    fn slope_of_mixed_vector(tau in 0.05f64..3.0, s in 0.01f64..100.0, seed in any::<u64>()) {
        let p = Presentation::build(Family::H, 1, tau).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = p.random_pvector(&mut rng);
        let (v, h) = (p.p1_part(&r), p.p2_part(&r));
        let w = &v * (s / v.norm()) + &h / h.norm();
        prop_assert!((subspace::slope(&p, &w).unwrap() - s).abs() <= 1e-10 * s);
    }

    #[test]
    fn radius_round_trip(tau in 0.01f64..10.0) {
        prop_assume!((tau - 1.0).abs() > 1e-6);
        let r = geodesics::tau_to_radius(tau).unwrap();
        prop_assert_eq!(r.branch, if tau < 1.0 { Branch::Compact } else { Branch::NonCompact });
        prop_assert!((geodesics::radius_to_tau(r.t, r.branch) - tau).abs() <= 1e-12 * tau);
    }
}
