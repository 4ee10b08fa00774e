//! Seeded random generators for order matrices, expressions and systems.

use rand::Rng;

use crate::canon::OrderMatrix;
use crate::linear::{OperatorMatrix, Poly};
use crate::order::Order;
use crate::symexpr::{rat, Expr, Rational};

/// `rows x cols` matrix with entries `-inf` (probability `p_neg_inf`) or
/// uniform in `0..=max_entry`.
pub fn random_order_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    max_entry: i64,
    p_neg_inf: f64,
) -> OrderMatrix {
    let entries = (0..rows)
        .map(|_| (0..cols).map(|_| random_order(rng, max_entry, p_neg_inf)).collect())
        .collect();
    OrderMatrix::new(entries).expect("generated matrix is rectangular")
}

fn random_order<R: Rng + ?Sized>(rng: &mut R, max_entry: i64, p_neg_inf: f64) -> Order {
    if rng.random_bool(p_neg_inf) {
        Order::NegInf
    } else {
        Order::Finite(rng.random_range(0..=max_entry))
    }
}

fn nonzero_coefficient<R: Rng + ?Sized>(rng: &mut R) -> Rational {
    let c = rng.random_range(1..=9);
    rat(if rng.random_bool(0.5) { c } else { -c })
}

/// Dense polynomial of exactly `degree`, coefficients in `[-9, 9]` with a
/// nonzero leading one.
pub fn random_poly<R: Rng + ?Sized>(rng: &mut R, degree: Order) -> Poly {
    let Order::Finite(d) = degree else {
        return Poly::zero();
    };
    let mut coeffs: Vec<Rational> = (0..d).map(|_| rat(rng.random_range(-9..=9))).collect();
    coeffs.push(nonzero_coefficient(rng));
    Poly::from_coeffs(coeffs)
}

/// Square constant-coefficient system whose order matrix is drawn first
/// (`-inf` with probability 0.15, otherwise uniform in `0..=4`).
pub fn random_linear_system<R: Rng + ?Sized>(rng: &mut R, m: usize) -> OperatorMatrix {
    let orders = random_order_matrix(rng, m, m, 4, 0.15);
    let entries = (0..m)
        .map(|i| (0..m).map(|j| random_poly(rng, orders.get(i, j))).collect())
        .collect();
    OperatorMatrix::new(entries)
}

/// A random system followed by `ops` row operations
/// `row_k += c D^e row_i` with `e` in `1..=2`. The determinant is unchanged
/// while the order matrix grows, so the truncated determinant tends to
/// vanish.
pub fn mixed_linear_system<R: Rng + ?Sized>(rng: &mut R, m: usize, ops: usize) -> OperatorMatrix {
    let mut a = random_linear_system(rng, m);
    if m < 2 {
        return a;
    }
    for _ in 0..ops {
        let k = rng.random_range(0..m);
        let i = (k + rng.random_range(1..m)) % m;
        let e = rng.random_range(1..=2);
        let c = nonzero_coefficient(rng);
        for j in 0..m {
            let add = a.entries[i][j].shift(e).scale(&c);
            a.entries[k][j] = &a.entries[k][j] + &add;
        }
    }
    a
}

/// Shape of random expressions.
#[derive(Clone, Copy, Debug)]
pub struct ExprShape {
    pub vars: usize,
    pub max_order: u32,
    pub depth: u32,
    pub allow_time: bool,
}

impl Default for ExprShape {
    fn default() -> Self {
        ExprShape { vars: 2, max_order: 3, depth: 3, allow_time: true }
    }
}

/// Random expression that evaluates without domain errors anywhere:
/// logarithms and denominators only see positive arguments.
pub fn random_expr<R: Rng + ?Sized>(rng: &mut R, shape: &ExprShape) -> Expr {
    gen(rng, shape, shape.depth)
}

fn leaf<R: Rng + ?Sized>(rng: &mut R, shape: &ExprShape) -> Expr {
    match rng.random_range(0..10) {
        0 => Expr::int(rng.random_range(-3..=3)),
        1 if shape.allow_time => Expr::time(),
        _ => Expr::var(rng.random_range(0..shape.vars), rng.random_range(0..=shape.max_order)),
    }
}

fn gen<R: Rng + ?Sized>(rng: &mut R, shape: &ExprShape, depth: u32) -> Expr {
    if depth == 0 {
        return leaf(rng, shape);
    }
    let sub = |rng: &mut R| gen(rng, shape, depth - 1);
    match rng.random_range(0..10) {
        0 | 1 => Expr::sum([sub(rng), sub(rng)]),
        2 | 3 => Expr::product([sub(rng), sub(rng)]),
        4 => Expr::pow(sub(rng), rng.random_range(2..=3)),
        5 => Expr::sin(sub(rng)),
        6 => Expr::cos(sub(rng)),
        // bounded argument keeps exp well inside f64 range
        7 => Expr::exp(Expr::sin(sub(rng))),
        8 => Expr::log(Expr::int(1) + Expr::pow(sub(rng), 2)),
        _ => {
            let den = Expr::int(2) + Expr::cos(sub(rng));
            Expr::checked_div(sub(rng), den).expect("denominator is not identically zero")
        }
    }
}

/// Square nonlinear system: each equation is a sum of terms `c x_j^(k)`
/// with `k` in `0..=max_order` and `c` a constant or a bounded nonconstant
/// factor, plus a nonlinear perturbation in the undifferentiated unknowns.
pub fn random_nonlinear_system<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    max_order: u32,
) -> Vec<Expr> {
    let shape = ExprShape { vars: m, max_order, depth: 2, allow_time: true };
    (0..m)
        .map(|_| {
            let terms: Vec<Expr> = (0..m)
                .filter_map(|j| {
                    rng.random_bool(0.8).then(|| {
                        let k = rng.random_range(0..=max_order);
                        let c = if rng.random_bool(0.5) {
                            Expr::int(2) + Expr::cos(random_expr(rng, &ExprShape { depth: 1, ..shape }))
                        } else {
                            Expr::constant(nonzero_coefficient(rng))
                        };
                        Expr::product([c, Expr::var(j, k)])
                    })
                })
                .collect();
            let base = if terms.is_empty() { Expr::var(rng.random_range(0..m), 0) } else { Expr::sum(terms) };
            base + Expr::sin(random_expr(rng, &ExprShape { depth: 1, max_order: 0, ..shape }))
        })
        .collect()
}
