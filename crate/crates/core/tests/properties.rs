use num_complex::Complex64;
use proptest::prelude::*;

use dsc_core::backstepping::z_jacobian;
use dsc_core::contraction::{estimate_lipschitz, steady_state_bound};
use dsc_core::harness::{format_sig9, ExperimentSpec};
use dsc_core::numerics::{
    generalized_jacobian, matrix_measure_2, matrix_measure_inf, symmetric_eigenvalues,
};
use dsc_core::{GridBox, Matrix, TuningFunctions};

/// Characteristic polynomial coefficients of a 3x3 matrix, monic:
/// `λ³ + c₂λ² + c₁λ + c₀`.
fn char_poly(a: &Matrix) -> [f64; 3] {
    let tr = a[(0, 0)] + a[(1, 1)] + a[(2, 2)];
    let minors = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)] + a[(0, 0)] * a[(2, 2)]
        - a[(0, 2)] * a[(2, 0)]
        + a[(1, 1)] * a[(2, 2)]
        - a[(1, 2)] * a[(2, 1)];
    let det = a[(0, 0)] * (a[(1, 1)] * a[(2, 2)] - a[(1, 2)] * a[(2, 1)])
        - a[(0, 1)] * (a[(1, 0)] * a[(2, 2)] - a[(1, 2)] * a[(2, 0)])
        + a[(0, 2)] * (a[(1, 0)] * a[(2, 1)] - a[(1, 1)] * a[(2, 0)]);
    [-det, minors, -tr]
}

/// Durand-Kerner roots of a monic cubic.
fn cubic_roots(c: [f64; 3]) -> [Complex64; 3] {
    let p = |z: Complex64| ((z + c[2]) * z + c[1]) * z + c[0];
    let seed = Complex64::new(0.4, 0.9);
    let scale = 1.0 + c.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut r = [seed * scale, seed.powi(2) * scale, seed.powi(3) * scale];
    for _ in 0..500 {
        for i in 0..3 {
            let denom: Complex64 = (0..3).filter(|&j| j != i).map(|j| r[i] - r[j]).product();
            r[i] -= p(r[i]) / denom;
        }
    }
    r
}

fn matrix3() -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-5.0f64..5.0, 9).prop_map(|v| Matrix::new(3, 3, v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn measure_2_is_largest_root_of_symmetric_part(a in matrix3()) {
        let s = a.symmetric_part().unwrap();
        let roots = cubic_roots(char_poly(&s));
        let largest = roots.iter().map(|r| r.re).fold(f64::NEG_INFINITY, f64::max);
        let m = matrix_measure_2(&a).unwrap();
        prop_assert!((m - largest).abs() < 1e-6 * (1.0 + largest.abs()), "{} vs {}", m, largest);
        let eig = symmetric_eigenvalues(&s).unwrap();
        prop_assert!((eig[2] - m).abs() < 1e-12 * (1.0 + m.abs()));
    }

    #[test]
    fn measures_dominate_spectral_abscissa(a in matrix3()) {
        let abscissa = cubic_roots(char_poly(&a)).iter().map(|r| r.re).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(matrix_measure_2(&a).unwrap() >= abscissa - 1e-6);
        prop_assert!(matrix_measure_inf(&a).unwrap() >= abscissa - 1e-6);
    }

    #[test]
    fn identity_metric_leaves_jacobian_unchanged(a in matrix3()) {
        let g = generalized_jacobian(&Matrix::identity(3), &Matrix::zeros(3, 3), &a).unwrap();
        prop_assert_eq!(g, a);
    }

    #[test]
    fn constant_metric_is_a_similarity(a in matrix3(), d in prop::collection::vec(0.5f64..2.0, 3)) {
        // (ΘJ)Θ⁻¹ has the spectrum of J
        let theta = Matrix::diag(&d);
        let g = generalized_jacobian(&theta, &Matrix::zeros(3, 3), &a).unwrap();
        let (ca, cg) = (char_poly(&a), char_poly(&g));
        for k in 0..3 {
            prop_assert!((ca[k] - cg[k]).abs() < 1e-9 * (1.0 + ca[k].abs()));
        }
    }

    #[test]
    fn skew_error_dynamics_contract_at_kc(
        kc in 0.1f64..100.0,
        b in prop::collection::vec(0.1f64..50.0, 3),
        z in prop::collection::vec(-10.0f64..10.0, 3),
    ) {
        let j = z_jacobian(&TuningFunctions::linear(3, kc), &b, &z).unwrap();
        prop_assert!((matrix_measure_2(&j).unwrap() + kc).abs() < 1e-9 * kc.max(1.0));
    }

    #[test]
    fn steady_state_bound_scaling(
        mu in 1e-4f64..1.0, l_v in 0.1f64..100.0, c in 0.1f64..100.0,
        lambda in 0.1f64..100.0, kappa in 0.01f64..10.0, s in 0.1f64..10.0,
    ) {
        let base = steady_state_bound(mu, 1.0, l_v, c, 0.0, lambda, kappa).unwrap();
        let tol = 1e-12 * base.abs().max(1e-300) * 10.0;
        prop_assert!((steady_state_bound(s * mu, 1.0, l_v, c, 0.0, lambda, kappa).unwrap() - s * base).abs() <= tol * s);
        prop_assert!((steady_state_bound(mu, 1.0, l_v, s * c, 0.0, lambda, kappa).unwrap() - s * base).abs() <= tol * s);
        prop_assert!((steady_state_bound(mu, 1.0, l_v, c, 0.0, s * lambda, kappa).unwrap() - base / s).abs() <= tol / s);
    }

    #[test]
    fn lipschitz_monotone_in_box_and_margin(h in 0.5f64..3.0, margin in 1.0f64..2.0) {
        let f = |v: &[f64]| Ok(vec![v[0].sin() * v[1], v[0] * v[0]]);
        let inner = GridBox::uniform(2, -h, h, 5).unwrap();
        let base = estimate_lipschitz(f, &inner, 1.0).unwrap();
        prop_assert!(estimate_lipschitz(f, &inner, margin).unwrap() >= base);
        // same spacing over twice the extent: every inner segment is an outer segment
        let outer = GridBox::uniform(2, -2.0 * h, 2.0 * h, 9).unwrap();
        prop_assert!(estimate_lipschitz(f, &outer, 1.0).unwrap() >= base - 1e-12);
    }

    #[test]
    fn sig9_round_trips(v in -1e9f64..1e9) {
        let parsed: f64 = format_sig9(v).parse().unwrap();
        prop_assert!((parsed - v).abs() <= 5e-9 * v.abs().max(1e-300) + f64::MIN_POSITIVE);
        prop_assert!(!format_sig9(v).contains('e'));
    }

    #[test]
    fn spec_text_round_trips(mu in 1e-3f64..1.0, kc in 0.5f64..100.0, k in 1.0f64..100.0) {
        let mut spec = ExperimentSpec::preset("fig2").unwrap();
        spec.mu = mu;
        spec.kc = kc;
        spec.k = k;
        prop_assert_eq!(ExperimentSpec::parse(&spec.to_text()).unwrap(), spec);
    }
}
