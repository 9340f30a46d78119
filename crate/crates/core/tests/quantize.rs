use anh_spectra::polycore::{Polynomial, SymbolExpr};
use anh_spectra::quantize::{
    converged_trace, grid_trace, kn_compose_exact, op_trace, quantize, PhaseGrid,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn bump(text: &str, power: f64) -> SymbolExpr {
    SymbolExpr::power(SymbolExpr::parse_poly(text, 1).unwrap(), power).unwrap()
}

fn small_grid() -> PhaseGrid {
    PhaseGrid::new(5.0, 48, 16.0, 512).unwrap()
}

#[test]
fn weyl_quantization_of_real_symbol_is_hermitian() {
    let a = bump("1 + x1^2 + xi1^2 + x1*xi1", -2.0);
    let g = small_grid();
    assert!(quantize(&a, 0.5, &g).unwrap().is_hermitian(1e-12));
    assert!(!quantize(&a, 0.0, &g).unwrap().is_hermitian(1e-6));
}

#[test]
fn trace_does_not_depend_on_t() {
    let a = bump("1 + x1^2 + xi1^2", -2.0);
    let g = small_grid();
    let direct = grid_trace(&a, &g).unwrap();
    for t in [0.0, 0.5, 1.0] {
        let tr = op_trace(&quantize(&a, t, &g).unwrap());
        assert!((tr.re - direct).abs() < 1e-12 * direct, "t={t}");
        assert!(tr.im.abs() < 1e-12);
    }
}

#[test]
fn refinement_error_bounds_the_true_error() {
    let a = bump("1 + x1^2 + xi1^2", -2.0);
    let report = converged_trace(&a, &PhaseGrid::new(2.0, 32, 4.0, 64).unwrap(), 0.0, 4).unwrap();
    let pi = std::f64::consts::PI;
    let errors: Vec<f64> = report.levels.iter().map(|(_, v)| (v - pi).abs()).collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    assert!((report.value - pi).abs() <= report.error_estimate);
}

#[test]
fn symbols_without_xi_decay_are_rejected() {
    let a = bump("1 + x1^2 + xi1^2", -0.5);
    assert!(quantize(&a, 0.5, &small_grid()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn quantization_is_linear(c in -3.0f64..3.0, t in prop::sample::select(vec![0.0, 0.5, 1.0])) {
        let a = bump("1 + x1^2 + xi1^2", -2.0);
        let b = bump("2 + x1^4 + xi1^4", -1.0);
        let scaled = SymbolExpr::product(vec![SymbolExpr::constant(1, c), b.clone()]).unwrap();
        let sum = SymbolExpr::sum(vec![a.clone(), scaled]).unwrap();
        let g = PhaseGrid::new(4.0, 24, 16.0, 256).unwrap();
        let lhs = quantize(&sum, t, &g).unwrap().matrix;
        let rhs = quantize(&a, t, &g).unwrap().matrix + quantize(&b, t, &g).unwrap().matrix * Complex64::new(c, 0.0);
        let scale = rhs.iter().map(|v| v.norm()).fold(1e-300, f64::max);
        prop_assert!((lhs - rhs).iter().all(|v| v.norm() <= 1e-12 * scale));
    }

    #[test]
    fn second_order_composition_matches_leibniz_terms(
        c0 in -2.0f64..2.0,
        c2 in -2.0f64..2.0,
        b1 in -2.0f64..2.0,
        b3 in -2.0f64..2.0,
        x in -3.0f64..3.0,
        xi in -3.0f64..3.0,
    ) {
        // a(ξ) = c0 + c2 ξ², b(x) = 1 + b1 x + b3 x³
        let a = Polynomial::from_terms(2, [(vec![0, 0], c0), (vec![0, 2], c2)]);
        let b = Polynomial::from_terms(2, [(vec![0, 0], 1.0), (vec![1, 0], b1), (vec![3, 0], b3)]);
        let comp = kn_compose_exact(&SymbolExpr::poly(1, a).unwrap(), &SymbolExpr::poly(1, b).unwrap()).unwrap();
        let bx = 1.0 + b1 * x + b3 * x.powi(3);
        let dbx = b1 + 3.0 * b3 * x * x;
        let ddbx = 6.0 * b3 * x;
        let pi = std::f64::consts::PI;
        let want = Complex64::new(
            c0 * bx + c2 * (xi * xi * bx - ddbx / (4.0 * pi * pi)),
            -c2 * xi * dbx / pi,
        );
        prop_assert_eq!(comp.max_order(), 2);
        prop_assert!((comp.eval(&[x, xi]) - want).norm() <= 1e-12 * want.norm().max(1.0));
    }
}
