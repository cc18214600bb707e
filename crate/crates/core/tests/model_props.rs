mod common;

use finestruct::model::{
    bright_splitting, build_hamiltonian, dark_bright_splittings, fine_structure, k_eq2,
    perturbative_coefficients,
};
use finestruct::DotParameters;
use proptest::prelude::*;

use common::{jacobi_eigen, rel_err};

fn dot() -> impl Strategy<Value = DotParameters> {
    (50.0..800.0f64, -1.0..1.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(d0, s, g_e, g_h)| {
        let s0 = s * f64::min(300.0, 1.5 * d0);
        DotParameters::new(s0, d0, g_e, g_h).unwrap()
    })
}

/// Dots for which b = 0.4 T is well inside the series' radius of convergence.
fn perturbative_dot() -> impl Strategy<Value = DotParameters> {
    (
        150.0..800.0f64,
        -0.6..0.6f64,
        0.1..1.2f64,
        0.1..1.2f64,
        any::<bool>(),
    )
        .prop_map(|(d0, s, g_e, g_h, flip)| {
            let g_h = if flip { -g_h } else { g_h };
            DotParameters::new(s * d0, d0, g_e, g_h).unwrap()
        })
}

fn dot_with_sigma0() -> impl Strategy<Value = DotParameters> {
    (dot(), -0.5..0.5f64).prop_map(|(p, x)| p.to_builder().sigma0(x * p.d0()).build().unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn closed_form_matches_jacobi(p in dot(), b in 0.0..10.0f64) {
        let fs = fine_structure(&p, b).unwrap();
        let (values, vectors) = jacobi_eigen(&build_hamiltonian(&p, b));
        for st in &fs.states {
            let (i, _) = values
                .iter()
                .enumerate()
                .min_by(|x, y| (x.1 - st.energy).abs().total_cmp(&(y.1 - st.energy).abs()))
                .unwrap();
            prop_assert!((values[i] - st.energy).abs() <= 1e-9);
            let gap = values
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, v)| (v - values[i]).abs())
                .fold(f64::INFINITY, f64::min);
            if gap < 1e-6 {
                continue;
            }
            let overlap: f64 = st.vector.iter().zip(&vectors[i]).map(|(a, b)| a * b).sum();
            prop_assert!((overlap.abs() - 1.0).abs() <= 1e-9, "overlap {overlap}");
        }
    }

    #[test]
    fn trace_is_zero(p in dot_with_sigma0(), b in 0.0..10.0f64) {
        if let Ok(fs) = fine_structure(&p, b) {
            prop_assert!(fs.energies().iter().sum::<f64>().abs() <= 1e-9);
        }
    }

    #[test]
    fn splitting_is_even_in_b(p in dot(), b in 0.0..10.0f64) {
        prop_assert_eq!(bright_splitting(&p, b).unwrap(), bright_splitting(&p, -b).unwrap());
    }

    #[test]
    fn g_sign_and_swap_symmetry(p in dot(), b in 0.0..10.0f64) {
        let mut e = fine_structure(&p, b).unwrap().energies();
        e.sort_by(f64::total_cmp);
        let negated = DotParameters::new(p.s0(), p.d0(), -p.g_e(), -p.g_h()).unwrap();
        let swapped = DotParameters::new(p.s0(), p.d0(), p.g_h(), p.g_e()).unwrap();
        for q in [negated, swapped] {
            let mut eq = fine_structure(&q, b).unwrap().energies();
            eq.sort_by(f64::total_cmp);
            for (x, y) in e.iter().zip(&eq) {
                prop_assert!((x - y).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn curvature_matches_k_eq2(p in dot()) {
        let h = 1e-3;
        let s = |b| bright_splitting(&p, b).unwrap();
        let curvature = (s(h) - 2.0 * s(0.0) + s(-h)) / (h * h);
        let k = k_eq2(&p).unwrap();
        prop_assume!(k.abs() > 1e-2);
        prop_assert!(rel_err(curvature, 2.0 * k) <= 1e-4, "{curvature} vs 2*{k}");
    }

    #[test]
    fn perturbative_k_is_k_eq2(p in dot()) {
        let k = k_eq2(&p).unwrap();
        let pc = perturbative_coefficients(&p).unwrap();
        prop_assert!(rel_err(pc.k, k) < 1e-12);
    }

    #[test]
    fn quadrature_is_monotone(p in dot_with_sigma0(), b in 0.0..20.0f64, db in 0.0..5.0f64) {
        let (h0, v0) = dark_bright_splittings(&p, b);
        let (h1, v1) = dark_bright_splittings(&p, -(b + db));
        prop_assert!(h1 >= h0 && v1 >= v0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn series_residual_is_sixth_order(p in perturbative_dot()) {
        let pc = perturbative_coefficients(&p).unwrap();
        let residual = |b: f64| {
            let b2 = b * b;
            bright_splitting(&p, b).unwrap() - (p.s0() + pc.k * b2 + pc.k_prime * b2 * b2)
        };
        let (r1, r2) = (residual(0.4), residual(0.2));
        // Below ~1e-10 µeV the residual is float rounding of S (~1e-13), not b⁶.
        prop_assume!(r2.abs() > 1e-10);
        prop_assert!(r1.abs() >= 60.0 * r2.abs(), "r(0.4) = {r1:e}, r(0.2) = {r2:e}");
    }
}
