use cklh::class_i4::{casimir, i4_F2, i4_constants, i4_hamiltonians, i4_superpose, riccati_mu, riccati_superpose, select_branch, I4System};
use cklh::class_p2::{p2_F2, p2_constants, p2_hamiltonians, p2_superpose_flat_candidates, P2System};
use cklh::cli::output::num;
use cklh::dynamics::TimeFunction;
use cklh::geometry::{constraint_residual, from_ambient, to_ambient, Chart, GeoPoint};
use cklh::ktrig::{atk, ck, identity_residuals, tk, wrap_angle};
use cklh::symplectic::LieHamiltonSystem;
use cklh::KappaSignature;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 256, rng_seed: RngSeed::Fixed(42), failure_persistence: None, ..ProptestConfig::default() }
}

fn off_diagonal() -> impl Strategy<Value = [f64; 2]> {
    (-1.2f64..1.2, -1.2f64..1.2).prop_filter("x != y", |(x, y)| (x - y).abs() > 0.1).prop_map(|(x, y)| [x, y])
}

fn off_axis() -> impl Strategy<Value = [f64; 2]> {
    (-1.0f64..1.0, 0.2f64..1.2).prop_map(|(x, y)| [x, y])
}

fn signature() -> impl Strategy<Value = KappaSignature> {
    (-1.5f64..1.5, -1.5f64..1.5).prop_map(|(a, b)| KappaSignature::new(a, b))
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn ktrig_identities_hold(kappa in -1.5f64..1.5, u in -1.0f64..1.0, v in -1.0f64..1.0) {
        // Tangent identities lose absolute accuracy as |T|² near a pole.
        prop_assume!([u, 2.0 * u, u + v, u - v].iter().all(|&a| ck(kappa, a).abs() > 0.05));
        let r = identity_residuals(kappa, u, v).unwrap();
        prop_assert!(r.max_residual <= 1e-12, "{:?}", r.residuals);
    }

    #[test]
    fn arctangent_inverts_tangent(kappa in -1.5f64..1.5, u in -1.2f64..1.2) {
        let t = tk(kappa, u).unwrap();
        prop_assert!((atk(kappa, t).unwrap() - u).abs() <= 1e-12 * (1.0 + u.abs()));
    }

    #[test]
    fn ambient_points_lie_on_the_quadric(k in signature(), a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let q = to_ambient(k, GeoPoint::new(Chart::ParallelI, a, b)).unwrap();
        prop_assert!(constraint_residual(k, q) <= 1e-10);
    }

    #[test]
    fn parallel_chart_round_trips(k in signature(), a in -0.8f64..0.8, b in -0.8f64..0.8) {
        let q = to_ambient(k, GeoPoint::new(Chart::ParallelI, a, b)).unwrap();
        let p = from_ambient(k, q, Chart::ParallelI).unwrap();
        prop_assert!((p.a - a).abs() <= 1e-10 && (p.b - b).abs() <= 1e-10, "{p:?}");
    }

    #[test]
    fn i4_casimir_is_minus_a_quarter(kappa in -1.0f64..1.0, p in off_diagonal()) {
        let h = i4_hamiltonians(kappa, p).unwrap();
        prop_assert!((casimir(kappa, h[0], h[1], h[2]) + 0.25).abs() <= 1e-10);
    }

    #[test]
    fn p2_casimir_is_kappa2(k in signature(), p in off_axis()) {
        let h = p2_hamiltonians(k, p).unwrap();
        prop_assert!((casimir(k.kappa1, h[0], h[1], h[2]) - k.kappa2).abs() <= 1e-10 * (1.0 + h.iter().map(|v| v.abs()).fold(0.0, f64::max).powi(2)));
    }

    #[test]
    fn hamiltonian_pairing(kappa in -1.0f64..1.0, k in signature(), p in off_diagonal(), q in off_axis()) {
        let (i4, p2) = (I4System { kappa }, P2System { kappas: k });
        prop_assert!(i4.pairing_residual(p).unwrap() <= 1e-8);
        prop_assert!(p2.pairing_residual(q).unwrap() <= 1e-8);
    }

    #[test]
    fn two_point_invariants_are_symmetric(kappa in -1.0f64..1.0, k in signature(), p in off_diagonal(), q in off_diagonal(), r in off_axis(), s in off_axis()) {
        let (a, b) = (i4_F2(kappa, p, q).unwrap(), i4_F2(kappa, q, p).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        let (a, b) = (p2_F2(k, r, s).unwrap(), p2_F2(k, s, r).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn i4_rule_rebuilds_the_first_state(kappa in -1.0f64..1.0, s1 in off_diagonal(), s2 in off_diagonal(), s3 in off_diagonal()) {
        prop_assume!((s2[0] - s3[0]).abs() > 0.1 && (s2[1] - s3[1]).abs() > 0.1);
        prop_assume!((s1[0] - s2[0]).abs() > 0.1 && (s1[0] - s3[0]).abs() > 0.1);
        let mu = i4_constants(kappa, s1, s2, s3).unwrap();
        let Ok(b) = select_branch(kappa, s2, s3, mu.mu1, mu.mu2, s1) else { return Ok(()) };
        let Ok(r) = i4_superpose(kappa, s2, s3, mu.mu1, mu.mu2, b) else { return Ok(()) };
        let d = wrap_angle(kappa, r[0] - s1[0]).abs().max(wrap_angle(kappa, r[1] - s1[1]).abs());
        prop_assert!(d <= 1e-6, "rebuilt {r:?} from {s1:?}");
    }

    #[test]
    fn riccati_rule_rebuilds_the_first_value(kappa in -1.0f64..1.0, x in prop::array::uniform4(-1.2f64..1.2)) {
        let sep = (0..4).all(|i| (i + 1..4).all(|j| (x[i] - x[j]).abs() > 0.1));
        prop_assume!(sep);
        let mu = riccati_mu(kappa, x[0], x[1], x[2], x[3]).unwrap();
        let r = riccati_superpose(kappa, x[1], x[2], x[3], mu).unwrap();
        prop_assert!(wrap_angle(kappa, r - x[0]).abs() <= 1e-9, "{r} vs {}", x[0]);
    }

    #[test]
    fn flat_p2_rule_keeps_the_first_state_among_candidates(kappa2 in -1.0f64..1.0, s1 in off_axis(), s2 in off_axis(), s3 in off_axis()) {
        prop_assume!((s2[1] - s3[1]).abs() > 0.1 && (s1[1] - s2[1]).abs() > 0.1 && (s1[0] - s2[0]).abs() > 0.1);
        let k = KappaSignature::new(0.0, kappa2);
        let mu = p2_constants(k, s1, s2, s3).unwrap();
        let c = p2_superpose_flat_candidates(kappa2, s2, s3, mu.mu1, mu.mu2, 1e-6);
        prop_assume!(!c.is_empty());
        let d = c.iter().map(|(_, _, r)| (r[0] - s1[0]).abs().max((r[1] - s1[1]).abs())).fold(f64::INFINITY, f64::min);
        prop_assert!(d <= 1e-6, "{c:?} vs {s1:?}");
    }

    #[test]
    fn csv_numbers_round_trip(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(num(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn time_functions_round_trip_through_json(o in -2.0f64..2.0, a in -1.0f64..1.0, w in 0.1f64..3.0, ph in -3.0f64..3.0) {
        let f = TimeFunction::sinusoid(o, a, w, ph);
        let back: TimeFunction = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        prop_assert_eq!(back, f);
    }
}
