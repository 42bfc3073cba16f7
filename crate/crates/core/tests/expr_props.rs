use geoquant::expr::{equiv, parse, Compiled, EquivConfig, Expr, SampleBox};
use num_complex::Complex64;
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        Just(Expr::sym("x")),
        Just(Expr::sym("y")),
        (-3i32..=3).prop_map(|k| Expr::real(k as f64 / 2.0)),
    ]
}

/// Smooth expressions on the box [0.5, 1.5]²: no division, no logarithm.
fn smooth() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            inner.clone().prop_map(Expr::sin),
            inner.clone().prop_map(Expr::cos),
            inner.clone().prop_map(|a| (a * Expr::real(0.3)).exp()),
            (inner, 0i32..=3).prop_map(|(a, k)| a.powi(k)),
        ]
    })
}

fn eval(e: &Expr, x: f64, y: f64) -> Complex64 {
    Compiled::new(e, &["x", "y"]).unwrap().eval_real(&[x, y]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn derivative_matches_central_difference(e in smooth(), x in 0.5f64..1.5, y in 0.5f64..1.5) {
        let h = 1e-5;
        let d = e.diff("x");
        let fd = (eval(&e, x + h, y) - eval(&e, x - h, y)) / (2.0 * h);
        let exact = eval(&d, x, y);
        prop_assert!((fd - exact).norm() <= 1e-6 * (1.0 + exact.norm()), "{e}: {fd} vs {exact}");
    }

    #[test]
    fn mixed_partials_commute(e in smooth()) {
        let bx = SampleBox::new().with_range("x", 0.5, 1.5).with_range("y", 0.5, 1.5);
        let a = e.diff("x").diff("y");
        let b = e.diff("y").diff("x");
        prop_assert!(equiv(&a, &b, &bx, &EquivConfig::default()).unwrap());
    }

    #[test]
    fn simplify_and_reparse_preserve_value(e in smooth()) {
        let bx = SampleBox::new().with_range("x", 0.5, 1.5).with_range("y", 0.5, 1.5);
        let back = parse(&e.simplify().to_string()).unwrap();
        prop_assert!(equiv(&e, &back, &bx, &EquivConfig::default()).unwrap());
    }
}

#[test]
fn equiv_distinguishes_nearby_functions() {
    let bx = SampleBox::new().with_range("x", -1.0, 1.0);
    let a = parse("sin(x)^2 + cos(x)^2").unwrap();
    assert!(equiv(&a, &Expr::one(), &bx, &EquivConfig::default()).unwrap());
    let b = parse("1 + 1e-6*x").unwrap();
    assert!(!equiv(&a, &b, &bx, &EquivConfig::default()).unwrap());
}
