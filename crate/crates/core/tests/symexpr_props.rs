use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use jacobi_bound::corpus::{random_expr, ExprShape};
use jacobi_bound::order::Order;
use jacobi_bound::symexpr::{random_point, DerivVar, Expr, Point, ZeroTest};

fn point_for(rng: &mut ChaCha8Rng, exprs: &[&Expr]) -> Point {
    let symbols: Vec<DerivVar> = exprs.iter().flat_map(|e| e.symbols()).collect();
    random_point(rng, &symbols)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn commutation_rule(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_expr(&mut rng, &ExprShape::default());
        let j = rng.random_range(0..2);
        let k = rng.random_range(0..=3);
        let hi = DerivVar::new(j, k + 1);
        let lhs = e.total_derivative().partial(hi) - e.partial(hi).total_derivative();
        let diff = lhs - e.partial(DerivVar::new(j, k));
        let p = point_for(&mut rng, &[&diff, &e.total_derivative()]);
        let v = diff.eval(&p).unwrap();
        prop_assert!(v.abs() <= 1e-9, "{e}: {v}");
    }

    #[test]
    fn total_derivative_is_linear(seed in any::<u64>(), c in -5i64..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = ExprShape::default();
        let (a, b) = (random_expr(&mut rng, &shape), random_expr(&mut rng, &shape));
        let whole = (a.clone() + Expr::int(c) * b.clone()).total_derivative();
        let parts = a.total_derivative() + Expr::int(c) * b.total_derivative();
        let p = point_for(&mut rng, &[&whole, &parts]);
        let (x, y) = (whole.eval(&p).unwrap(), parts.eval(&p).unwrap());
        prop_assert!(close(x, y, 1e-9), "{x} vs {y}");
    }

    #[test]
    fn order_shifts_by_derivative_count(seed in any::<u64>(), s in 0u32..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let zt = ZeroTest::default();
        let e = random_expr(&mut rng, &ExprShape { depth: 2, ..ExprShape::default() });
        let d = e.nth_total_derivative(s);
        for j in 0..2 {
            let expected = match e.structural_order(j, &zt) {
                Order::Finite(o) => Order::Finite(o + s as i64),
                Order::NegInf => Order::NegInf,
            };
            prop_assert_eq!(d.structural_order(j, &zt), expected, "{}", e);
        }
    }

    #[test]
    fn partial_matches_central_difference(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_expr(&mut rng, &ExprShape::default());
        let Some(&v) = e.symbols().iter().next() else { return Ok(()) };
        let p = point_for(&mut rng, &[&e]);
        let h = 1e-5;
        let x = p.get(v).unwrap();
        let (mut lo, mut hi) = (p.clone(), p.clone());
        lo.set(v, x - h);
        hi.set(v, x + h);
        let fd = (e.eval(&hi).unwrap() - e.eval(&lo).unwrap()) / (2.0 * h);
        let exact = e.partial(v).eval(&p).unwrap();
        prop_assert!(close(fd, exact, 1e-4), "{e}: {fd} vs {exact}");
    }
}
