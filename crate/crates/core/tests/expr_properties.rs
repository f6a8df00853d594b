use ordstat_core::expr::{
    build_selection_expr, cse, emit_slp, emit_text, eval_expr, form_of, lower_minmax_to_arith,
    parse_infix, parse_sexpr, Expr, ExprForm, ExprRef, Syntax,
};
use ordstat_core::{select_naive, EvalStats, Rank, RealSequence};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn build(len: usize, n: usize, form: ExprForm) -> ExprRef {
    build_selection_expr(len, Rank::new(n, len).unwrap(), form).unwrap()
}

fn infix(len: usize, n: usize) -> String {
    emit_text(&build(len, n, ExprForm::MinMax), Syntax::Infix)
}

/// The closed forms displayed for min of three and four terms.
fn min3_expanded(x: &[f64]) -> f64 {
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    let d = (x1 - x2).abs();
    (x1 + x2 + 2.0 * x3 - d - (x1 + x2 - 2.0 * x3 - d).abs()) / 4.0
}

fn min4_expanded(x: &[f64]) -> f64 {
    let (x1, x2, x3, x4) = (x[0], x[1], x[2], x[3]);
    let d = (x1 - x2).abs();
    let inner = (x1 + x2 - 2.0 * x3 - d).abs();
    (x1 + x2 + 2.0 * x3 + 4.0 * x4 - d - inner - (x1 + x2 + 2.0 * x3 - 4.0 * x4 - d - inner).abs())
        / 8.0
}

fn rel_close(a: f64, b: f64, tol: f64, xs: &[f64]) -> bool {
    let scale = xs.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    (a - b).abs() <= tol * scale
}

#[test]
fn golden_minmax_listings() {
    let golden = [
        ((1, 1), "x1"),
        ((2, 1), "min(x1, x2)"),
        ((2, 2), "max(x2, x1)"),
        ((3, 1), "min(min(x1, x2), x3)"),
        ((3, 2), "max(max(min(x2, x3), min(x1, x3)), min(x1, x2))"),
        ((3, 3), "max(max(x3, x2), max(x3, x1))"),
        ((4, 1), "min(min(min(x1, x2), x3), x4)"),
        (
            (4, 2),
            "max(max(max(min(min(x2, x3), x4), min(min(x1, x3), x4)), \
             min(min(x1, x2), x4)), min(min(x1, x2), x3))",
        ),
        (
            (4, 3),
            "max(max(\
             max(max(min(x3, x4), min(x2, x4)), min(x2, x3)), \
             max(max(min(x3, x4), min(x1, x4)), min(x1, x3))), \
             max(max(min(x2, x4), min(x1, x4)), min(x1, x2)))",
        ),
        (
            (4, 4),
            "max(max(max(x4, x3), max(x4, x2)), max(max(x4, x3), max(x4, x1)))",
        ),
    ];
    for ((len, n), want) in golden {
        assert_eq!(infix(len, n), want, "N={len} n={n}");
    }
}

#[test]
fn example_expansions_agree_numerically() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let min3 = build(3, 1, ExprForm::Arithmetic);
    let min4 = build(4, 1, ExprForm::Arithmetic);
    let min3_lowered = lower_minmax_to_arith(&build(3, 1, ExprForm::MinMax));
    assert_eq!(min3, min3_lowered);
    for _ in 0..1000 {
        let x: Vec<f64> = (0..4).map(|_| rng.random_range(-1e6..1e6)).collect();
        let a = eval_expr(&min3, &x[..3]).unwrap();
        assert!(rel_close(a, min3_expanded(&x), 1e-9, &x[..3]), "{x:?}");
        let b = eval_expr(&min4, &x).unwrap();
        assert!(rel_close(b, min4_expanded(&x), 1e-9, &x), "{x:?}");
    }
}

#[test]
fn selection_exprs_match_recursion_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for len in 1..=6 {
        for n in 1..=len {
            let e = build(len, n, ExprForm::MinMax);
            let r = Rank::new(n, len).unwrap();
            for _ in 0..200 {
                let x: Vec<f64> = (0..len).map(|_| rng.random_range(-1e6..1e6)).collect();
                let s = RealSequence::new(x.clone()).unwrap();
                let want = select_naive(r, &s, &mut EvalStats::default()).unwrap();
                assert_eq!(eval_expr(&e, &x).unwrap(), want);
            }
        }
    }
}

#[test]
fn lowering_sound_on_reals_and_exact_on_integers() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let big = (1i64 << 40) as f64;
    for len in 1..=6 {
        for n in 1..=len {
            let mm = build(len, n, ExprForm::MinMax);
            let ar = lower_minmax_to_arith(&mm);
            assert_eq!(form_of(&ar), Some(ExprForm::Arithmetic));
            for _ in 0..100 {
                let x: Vec<f64> = (0..len).map(|_| rng.random_range(-1e6..1e6)).collect();
                let (a, b) = (eval_expr(&mm, &x).unwrap(), eval_expr(&ar, &x).unwrap());
                assert!(rel_close(a, b, 1e-9, &x));
                let k: Vec<f64> = (0..len)
                    .map(|_| rng.random_range(-big..=big).round())
                    .collect();
                assert_eq!(eval_expr(&mm, &k), eval_expr(&ar, &k));
            }
        }
    }
}

#[test]
fn cse_and_slp_preserve_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (len, n) in [(2, 1), (3, 1), (4, 1), (4, 3), (5, 2), (6, 4)] {
        let e = build(len, n, ExprForm::Arithmetic);
        let (shared, m) = cse(&e);
        assert!(m.node_count_dag <= m.node_count_tree);
        let p = emit_slp(&shared).unwrap();
        for _ in 0..1000 {
            let x: Vec<f64> = (0..len).map(|_| rng.random_range(-1e6..1e6)).collect();
            let want = eval_expr(&e, &x).unwrap();
            assert_eq!(eval_expr(&shared, &x).unwrap(), want);
            assert_eq!(p.interpret(&x).unwrap(), want);
        }
    }
}

#[test]
fn min_of_three_dag_smaller_than_tree() {
    let (_, m) = cse(&build(3, 1, ExprForm::Arithmetic));
    assert!(m.node_count_dag < m.node_count_tree);
}

#[test]
fn text_round_trip_for_built_exprs() {
    for len in 1..=5 {
        for n in 1..=len {
            for form in [ExprForm::MinMax, ExprForm::Arithmetic] {
                let e = build(len, n, form);
                assert_eq!(parse_infix(&emit_text(&e, Syntax::Infix)).unwrap(), e);
                assert_eq!(parse_sexpr(&emit_text(&e, Syntax::Sexpr)).unwrap(), e);
            }
        }
    }
}

fn arb_expr() -> impl Strategy<Value = ExprRef> {
    let leaf = prop_oneof![
        (1usize..=6).prop_map(Expr::var),
        (-1000i32..=1000, 0u32..4)
            .prop_map(|(m, e)| Expr::constant(m as f64 / 10f64.powi(e as i32))),
    ];
    leaf.prop_recursive(6, 48, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sub(a, b)),
            inner.clone().prop_map(Expr::abs),
            inner.clone().prop_map(Expr::halve),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::min(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Expr::max(a, b)),
        ]
    })
}

proptest! {
    #[test]
    fn round_trip_arbitrary(e in arb_expr()) {
        let infix = emit_text(&e, Syntax::Infix);
        prop_assert_eq!(parse_infix(&infix).unwrap(), e.clone(), "{}", infix);
        let sexpr = emit_text(&e, Syntax::Sexpr);
        prop_assert_eq!(parse_sexpr(&sexpr).unwrap(), e, "{}", sexpr);
    }

    #[test]
    fn cse_preserves_arbitrary(e in arb_expr(), x in prop::collection::vec(-100.0f64..100.0, 6)) {
        let (shared, m) = cse(&e);
        prop_assert!(m.node_count_dag <= m.node_count_tree);
        prop_assert_eq!(eval_expr(&shared, &x), eval_expr(&e, &x));
        let lowered = lower_minmax_to_arith(&e);
        if let (Ok(a), Ok(b)) = (eval_expr(&e, &x), eval_expr(&lowered, &x)) {
            prop_assert!(rel_close(a, b, 1e-9, &[a, b, 1e3]));
        }
    }
}
