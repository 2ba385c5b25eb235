//! Property tests: parser round trips, quadrature linearity/positivity, and
//! symmetrization linearity under random coefficients.

mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;

use symmlab::expr::{self, BinOp, Expr, Func, Var};
use symmlab::field::{self, Direction, ScalarField};
use symmlab::manifold::ModelManifold;
use symmlab::quadrature::{ball_integral, sphere_rule};
use symmlab::symmetrize::symmetrize;

fn arb_func() -> impl Strategy<Value = Func> {
    prop_oneof![
        Just(Func::Exp),
        Just(Func::Log),
        Just(Func::Sqrt),
        Just(Func::Sin),
        Just(Func::Cos),
        Just(Func::Sinh),
        Just(Func::Cosh),
        Just(Func::Abs),
    ]
}

fn arb_binop() -> impl Strategy<Value = BinOp> {
    prop_oneof![
        Just(BinOp::Add),
        Just(BinOp::Sub),
        Just(BinOp::Mul),
        Just(BinOp::Div),
        Just(BinOp::Pow),
    ]
}

/// Random well-formed expressions over r, x1..x3 with nonnegative literals
/// (negative values are spelled with unary minus, as the parser produces).
fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0.0..1000.0f64).prop_map(Expr::Number),
        Just(Expr::Var(Var::R)),
        (1usize..=3).prop_map(|i| Expr::Var(Var::X(i))),
    ];
    leaf.prop_recursive(8, 96, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (arb_binop(), inner.clone(), inner.clone())
                .prop_map(|(op, a, b)| Expr::Bin(op, Box::new(a), Box::new(b))),
            (arb_func(), inner).prop_map(|(f, e)| Expr::Call(f, Box::new(e))),
        ]
    })
}

proptest! {
    #[test]
    fn printed_expressions_reparse_identically(ast in arb_expr()) {
        let printed = ast.to_string();
        let reparsed = expr::parse(&printed, 3).expect("printer output must parse");
        prop_assert_eq!(ast, reparsed);
    }

    #[test]
    fn parser_never_panics_and_round_trips(text in "[ -~]{0,48}") {
        if let Ok(ast) = expr::parse(&text, 3) {
            // whatever parses must print and reparse to the same tree,
            // and evaluate without panicking
            let reparsed = expr::parse(&ast.to_string(), 3).unwrap();
            prop_assert_eq!(&ast, &reparsed);
            let _ = ast.eval(1.3, &[0.4, -0.2, 0.1]);
        }
    }

    #[test]
    fn directions_normalize(theta in -50.0..50.0f64) {
        if let Direction::Angle(t) = Direction::angle(theta) {
            prop_assert!((0.0..2.0 * std::f64::consts::PI).contains(&t));
        } else {
            prop_assert!(false);
        }
    }

    #[test]
    fn sphere_rules_are_positive_partitions(order in 4usize..48, dim in 2usize..=3) {
        let rule = sphere_rule(dim, order).unwrap();
        prop_assert!(rule.weights.iter().all(|&w| w > 0.0));
        let total: f64 = rule.weights.iter().sum();
        let expect = if dim == 2 { 2.0 } else { 4.0 } * std::f64::consts::PI;
        prop_assert!((total - expect).abs() < 1e-11);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ball_integral_is_linear(a in -3.0..3.0f64, b in -3.0..3.0f64, r in 0.5..4.0f64) {
        let m = ModelManifold::euclidean(2, 6.0).unwrap();
        let rule = sphere_rule(2, 32).unwrap();
        let u = field::catalog("exp_x1", &BTreeMap::new(), 2).unwrap();
        let g = field::catalog("x1_sq", &BTreeMap::new(), 2).unwrap();
        let comb = ScalarField::lincomb(a, &u, b, &g).unwrap();
        let lhs = ball_integral(&comb, &m, r, &rule, 32).unwrap();
        let rhs = a * ball_integral(&u, &m, r, &rule, 32).unwrap()
            + b * ball_integral(&g, &m, r, &rule, 32).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn symmetrization_is_linear_pointwise(a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let m = ModelManifold::euclidean(2, 6.0).unwrap();
        let rule = sphere_rule(2, 32).unwrap();
        let radii: Vec<f64> = (1..=6).map(|i| 0.7 * i as f64).collect();
        let u = field::catalog("exp_x1", &BTreeMap::new(), 2).unwrap();
        let g = field::catalog("one_plus_x1", &BTreeMap::new(), 2).unwrap();
        let comb = ScalarField::lincomb(a, &u, b, &g).unwrap();
        let pu = symmetrize(&u, &m, &radii, &rule).unwrap();
        let pg = symmetrize(&g, &m, &radii, &rule).unwrap();
        let pc = symmetrize(&comb, &m, &radii, &rule).unwrap();
        for i in 0..pc.len() {
            let want = a * pu.v[i] + b * pg.v[i];
            prop_assert!((pc.v[i] - want).abs() <= 1e-10 * want.abs().max(1.0));
            let want = a * pu.lap_v[i] + b * pg.lap_v[i];
            prop_assert!((pc.lap_v[i] - want).abs() <= 1e-9 * want.abs().max(1.0));
        }
    }

    #[test]
    fn exp_map_from_pole_reaches_the_stated_radius(t in 0.1..5.0f64, theta in 0.0..std::f64::consts::TAU) {
        let m = ModelManifold::hyperbolic(2, 1.0, 8.0).unwrap();
        let x = symmlab::PolarPoint { r: 0.0, xi: Direction::angle(theta) };
        let q = symmlab::exp_map(&m, &x, &symmlab::TangentVector::radial(t)).unwrap();
        prop_assert!((q.r - t).abs() < 1e-10);
    }
}
