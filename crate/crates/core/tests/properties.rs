use proptest::prelude::*;
use rand::Rng;

use projcalc_core::calculus::{pc_build, pc_projection_distance, pc_unitary_distance, ScalarFunction};
use projcalc_core::geometry::pair_report;
use projcalc_core::homotopy::homotopy_close;
use projcalc_core::numeric::fixtures::{
    pair_from_angles_with, random_angles, random_operator, random_projection, random_projection_any_rank,
    random_unit_vector, seeded_rng, FixtureRng,
};
use projcalc_core::numeric::{hausdorff, hermitian_eig, spectrum_of_pair};
use projcalc_core::states::{excise, random_basis, transitivity_units, PureState};
use projcalc_core::support::{apply_function, left_support, quasi_inverse, right_support};
use projcalc_core::{OperatorMatrix, Tolerances};

const EQ: f64 = 1e-7;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn nonzero_sorted(s: &OperatorMatrix) -> Vec<f64> {
    hermitian_eig(s, &tol()).unwrap().eigenvalues.into_iter().filter(|&x| x > 1e-6).collect()
}

fn generic_pair(rng: &mut FixtureRng, n: usize) -> (OperatorMatrix, OperatorMatrix, Vec<f64>) {
    let a = rng.random_range(0..=n / 2);
    let left = n - 2 * a;
    let ep = rng.random_range(0..=left);
    let eq = rng.random_range(0..=left - ep);
    let ek = left - ep - eq;
    let angles = random_angles(a, 0.15, 1.42, rng);
    let (p, q) = pair_from_angles_with(&angles, ep, eq, ek, 0, rng).unwrap();
    (p, q, angles)
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 64, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn operator_norm_is_root_of_top_gram_eigenvalue(seed in any::<u64>(), n in 1usize..=10) {
        let mut rng = seeded_rng(seed);
        let t = random_operator(n, rng.random_range(0..=n), 0.1, 3.0, &mut rng);
        let gram = (t.adjoint() * &t).hermitian_part();
        let top = hermitian_eig(&gram, &tol()).unwrap().eigenvalues.last().copied().unwrap();
        prop_assert!((t.norm() - top.max(0.0).sqrt()).abs() <= EQ);
    }

    #[test]
    fn nonzero_spectra_of_pqp_and_qpq_agree(seed in any::<u64>(), n in 1usize..=12) {
        let mut rng = seeded_rng(seed);
        let p = random_projection_any_rank(n, &mut rng);
        let q = random_projection_any_rank(n, &mut rng);
        let a = nonzero_sorted(&(&p * &q * &p));
        let b = nonzero_sorted(&(&q * &p * &q));
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= tol().cluster);
        }
    }

    #[test]
    fn difference_norm_splits(seed in any::<u64>(), n in 1usize..=12) {
        let mut rng = seeded_rng(seed);
        let p = random_projection_any_rank(n, &mut rng);
        let q = random_projection_any_rank(n, &mut rng);
        let r = pair_report(&p, &q, &tol()).unwrap();
        prop_assert!((r.norm_diff - r.norm_p_qperp.max(r.norm_pperp_q)).abs() <= EQ);
    }

    #[test]
    fn complement_reflects_generic_spectrum(seed in any::<u64>(), n in 2usize..=12) {
        let mut rng = seeded_rng(seed);
        let (p, q, _) = generic_pair(&mut rng, n);
        let inner = |s: Vec<f64>| s.into_iter().filter(|&x| x > 0.0 && x < 1.0).collect::<Vec<_>>();
        let a = inner(spectrum_of_pair(&p, &q, &tol()).unwrap());
        let b: Vec<f64> = inner(spectrum_of_pair(&p, &q.complement(), &tol()).unwrap()).iter().map(|s| 1.0 - s).collect();
        prop_assert!(hausdorff(&a, &b) <= tol().cluster);
    }

    #[test]
    fn angles_round_trip(seed in any::<u64>(), n in 2usize..=12) {
        let mut rng = seeded_rng(seed);
        let (p, q, angles) = generic_pair(&mut rng, n);
        let got: Vec<f64> = spectrum_of_pair(&p, &q, &tol()).unwrap().into_iter().filter(|&x| x > 0.0 && x < 1.0).collect();
        let want: Vec<f64> = angles.iter().map(|t| t.cos().powi(2)).collect();
        prop_assert!(hausdorff(&got, &want) <= tol().cluster);
    }

    #[test]
    fn quasi_inverse_laws(seed in any::<u64>(), n in 1usize..=12) {
        let mut rng = seeded_rng(seed);
        let t = random_operator(n, rng.random_range(0..=n), 0.3, 2.0, &mut rng);
        let ti = quasi_inverse(&t, &tol()).unwrap();
        let (l, r) = (left_support(&t, &tol()).unwrap(), right_support(&t, &tol()).unwrap());
        prop_assert!((&t * &ti).distance(&l) <= EQ);
        prop_assert!((&ti * &t).distance(&r) <= EQ);
        prop_assert!((&t * &ti * &t).distance(&t) <= EQ);
        prop_assert!((&ti * &t * &ti).distance(&ti) <= EQ);
        prop_assert!(quasi_inverse(&ti, &tol()).unwrap().distance(&t) <= EQ);
    }

    #[test]
    fn squaring_intertwines(seed in any::<u64>(), n in 1usize..=12) {
        let mut rng = seeded_rng(seed);
        let t = random_operator(n, rng.random_range(0..=n), 0.3, 2.0, &mut rng);
        let (a, b) = (t.adjoint() * &t, &t * t.adjoint());
        let square = |x: f64| x * x;
        let ga = apply_function(&a.hermitian_part(), &square, &tol()).unwrap();
        prop_assert!(ga.distance(&(&a * &a)) <= EQ);
        let gb = apply_function(&b.hermitian_part(), &square, &tol()).unwrap();
        prop_assert!((&t * &ga).distance(&(&gb * &t)) <= EQ);
    }

    #[test]
    fn calculus_core_identity(seed in any::<u64>(), n in 2usize..=12, c in 0.05f64..0.95) {
        let mut rng = seeded_rng(seed);
        let (q, r, _) = generic_pair(&mut rng, n);
        let f = ScalarFunction::cap(c).unwrap();
        let out = pc_build(&q, &r, &f, &tol()).unwrap();
        let qrq = (&q * &r * &q).hermitian_part();
        let oracle = apply_function(&qrq, &|s: f64| if s <= 1e-7 { 0.0 } else { s.min(c) }, &tol()).unwrap();
        prop_assert!((&q * &out.p * &q).distance(&oracle) <= EQ);
        prop_assert!((out.u.adjoint() * &out.u).distance(&r) <= EQ);
        prop_assert_eq!(out.p.rank(), r.rank());
    }

    #[test]
    fn distance_formulas_match(seed in any::<u64>(), n in 2usize..=12, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let mut rng = seeded_rng(seed);
        let (q, r, _) = generic_pair(&mut rng, n);
        let (f, g) = (ScalarFunction::constant(a).unwrap(), ScalarFunction::cap(b).unwrap());
        let (pf, pg) = (pc_build(&q, &r, &f, &tol()).unwrap(), pc_build(&q, &r, &g, &tol()).unwrap());
        prop_assert!((pc_projection_distance(&q, &r, &f, &g, &tol()).unwrap() - pf.p.distance(&pg.p)).abs() <= EQ);
        prop_assert!((pc_unitary_distance(&q, &r, &f, &g, &tol()).unwrap() - pf.u.distance(&pg.u)).abs() <= EQ);
    }

    #[test]
    fn close_homotopy_is_a_path_of_projections(seed in any::<u64>(), n in 1usize..=10, steps in 2usize..=16) {
        let mut rng = seeded_rng(seed);
        let (a, b) = {
            let angles = random_angles(n / 2, 0.15, 1.42, &mut rng);
            pair_from_angles_with(&angles, 0, 0, n % 2, 0, &mut rng).unwrap()
        };
        let path = homotopy_close(&a, &b, steps, &tol()).unwrap();
        prop_assert_eq!(path.steps.len(), steps);
        prop_assert!(path.endpoint_error() <= EQ);
        prop_assert!(path.max_projection_residual() <= EQ);
        prop_assert!(path.max_step_distance() <= path.mesh_bound + EQ);
    }

    #[test]
    fn excision_is_exact(seed in any::<u64>(), n in 2usize..=12) {
        let mut rng = seeded_rng(seed);
        let k = rng.random_range(1..=n / 2);
        let q = random_projection(n, rng.random_range(k..=n - k), &mut rng);
        let v = random_unit_vector(n, &mut rng);
        let phi = PureState::new(v.clone(), &tol()).unwrap();
        let p = excise(&q, &phi, k, &tol()).unwrap();
        let lam = v.dotc(&q.apply(&v)).re;
        prop_assert!((&p * &q * &p - p.scale(lam)).norm() <= 1e-6);
        prop_assert!((p.apply(&v) - &v).norm() <= EQ);
        prop_assert_eq!(p.rank(), k);
    }

    #[test]
    fn matrix_units_obey_the_laws(seed in any::<u64>(), n in 1usize..=5, extra in 0usize..=5) {
        let mut rng = seeded_rng(seed);
        let big_n = (n + extra).max(2);
        let basis = random_basis(big_n, n, &mut rng);
        let s = transitivity_units(big_n, &basis, false, &tol()).unwrap();
        for i in 0..n {
            for j in 0..n {
                let e = s.unit(i, j);
                let moved = e.apply(&basis[j]);
                prop_assert!((moved - &basis[i]).norm() <= EQ);
            }
        }
        prop_assert!(s.law_residual() <= EQ);
        prop_assert_eq!(s.faithful_rank(&tol()), n * n);
    }

    #[test]
    fn matrix_json_round_trips(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = seeded_rng(seed);
        let t = random_operator(n, n, 0.1, 2.0, &mut rng);
        let back: OperatorMatrix = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        prop_assert_eq!(back, t);
    }
}
