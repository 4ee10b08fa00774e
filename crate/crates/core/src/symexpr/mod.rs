//! Symbolic expressions over `t` and the derivative symbols `x_j^(k)`.
//!
//! Every constructor returns a simplified, canonically ordered tree:
//! sums and products are flattened and sorted, constants are folded,
//! neutral elements are absorbed, like terms are collected into a single
//! coefficient and repeated factors into a single integer power. Quotients
//! are products with negative integer powers. Nothing else (no trig
//! identities, no factoring) is attempted; `structural_order` falls back on
//! a seeded numeric zero test for whatever survives.

mod diff;
mod eval;
mod fmt;
mod zero;

use std::collections::{BTreeMap, BTreeSet};
use std::ops;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use diff::Wrt;
pub use eval::{EvalError, Point};
pub use fmt::Named;
pub use zero::{random_coordinate, random_point, ZeroTest};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// The symbol `x_j^(k)`: derivative of order `order` of unknown `var`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DerivVar {
    pub var: usize,
    pub order: u32,
}

impl DerivVar {
    pub const fn new(var: usize, order: u32) -> Self {
        DerivVar { var, order }
    }

    pub fn derivative(self) -> Self {
        DerivVar::new(self.var, self.order + 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            _ => None,
        }
    }
}

/// A simplified expression tree. Build values through the associated
/// constructors (or the operator impls) so the canonical form holds.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Const(Rational),
    Time,
    Var(DerivVar),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Box<Expr>, i64),
    Apply(Func, Box<Expr>),
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Const(Rational::zero())
    }

    pub fn one() -> Expr {
        Expr::Const(Rational::one())
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(rat(n))
    }

    pub fn constant(c: Rational) -> Expr {
        Expr::Const(c)
    }

    pub fn time() -> Expr {
        Expr::Time
    }

    pub fn var(var: usize, order: u32) -> Expr {
        Expr::Var(DerivVar::new(var, order))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_one())
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        let mut constant = Rational::zero();
        let mut collected: BTreeMap<Expr, Rational> = BTreeMap::new();
        let mut push = |term: Expr, constant: &mut Rational| {
            let (coef, rest) = split_coefficient(term);
            match rest {
                None => *constant += coef,
                Some(rest) => *collected.entry(rest).or_insert_with(Rational::zero) += coef,
            }
        };
        for term in terms {
            match term {
                Expr::Sum(inner) => inner.into_iter().for_each(|t| push(t, &mut constant)),
                other => push(other, &mut constant),
            }
        }

        let mut out = Vec::with_capacity(collected.len() + 1);
        if !constant.is_zero() {
            out.push(Expr::Const(constant));
        }
        for (rest, coef) in collected {
            if !coef.is_zero() {
                out.push(attach_coefficient(coef, rest));
            }
        }
        out.sort();
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::Sum(out),
        }
    }

    pub fn product<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        let mut coef = Rational::one();
        let mut powers: BTreeMap<Expr, i64> = BTreeMap::new();
        let mut pending: Vec<Expr> = factors.into_iter().collect();
        while let Some(f) = pending.pop() {
            match f {
                Expr::Const(c) => {
                    if c.is_zero() {
                        return Expr::zero();
                    }
                    coef *= c;
                }
                Expr::Product(inner) => pending.extend(inner),
                Expr::Pow(base, n) => *powers.entry(*base).or_insert(0) += n,
                other => *powers.entry(other).or_insert(0) += 1,
            }
        }

        let mut rebuilt: Vec<Expr> = Vec::with_capacity(powers.len());
        for (base, n) in powers {
            if n == 0 {
                continue;
            }
            match Expr::pow(base, n) {
                // pow of a zero constant base with negative exponent stays a Pow node
                Expr::Const(c) => coef *= c,
                Expr::Product(inner) => rebuilt.extend(inner),
                other => rebuilt.push(other),
            }
        }
        if coef.is_zero() {
            return Expr::zero();
        }
        if rebuilt.iter().any(|f| matches!(f, Expr::Product(_))) {
            // a power distributed over a product produced new factors; re-collect
            return Expr::product(std::iter::once(Expr::Const(coef)).chain(rebuilt));
        }
        if !coef.is_one() {
            rebuilt.push(Expr::Const(coef));
        }
        rebuilt.sort();
        match rebuilt.len() {
            0 => Expr::one(),
            1 => rebuilt.pop().unwrap(),
            _ => Expr::Product(rebuilt),
        }
    }

    /// Integer power. `0^n` with `n < 0` is kept as an explicit node and
    /// fails at evaluation.
    pub fn pow(base: Expr, n: i64) -> Expr {
        if n == 0 {
            return Expr::one();
        }
        if n == 1 {
            return base;
        }
        match base {
            Expr::Const(c) => {
                if c.is_zero() {
                    if n > 0 {
                        Expr::zero()
                    } else {
                        Expr::Pow(Box::new(Expr::Const(c)), n)
                    }
                } else {
                    Expr::Const(rational_pow(&c, n))
                }
            }
            Expr::Pow(inner, m) => Expr::pow(*inner, m * n),
            Expr::Product(factors) => Expr::product(factors.into_iter().map(|f| Expr::pow(f, n))),
            other => Expr::Pow(Box::new(other), n),
        }
    }

    pub fn apply(func: Func, arg: Expr) -> Expr {
        if let Expr::Const(c) = &arg {
            let folded = match func {
                Func::Sin if c.is_zero() => Some(Expr::zero()),
                Func::Cos if c.is_zero() => Some(Expr::one()),
                Func::Exp if c.is_zero() => Some(Expr::one()),
                Func::Log if c.is_one() => Some(Expr::zero()),
                _ => None,
            };
            if let Some(v) = folded {
                return v;
            }
        }
        Expr::Apply(func, Box::new(arg))
    }

    pub fn sin(arg: Expr) -> Expr {
        Expr::apply(Func::Sin, arg)
    }

    pub fn cos(arg: Expr) -> Expr {
        Expr::apply(Func::Cos, arg)
    }

    pub fn exp(arg: Expr) -> Expr {
        Expr::apply(Func::Exp, arg)
    }

    pub fn log(arg: Expr) -> Expr {
        Expr::apply(Func::Log, arg)
    }

    /// `num / den`, or `None` when `den` simplifies to the constant zero.
    pub fn checked_div(num: Expr, den: Expr) -> Option<Expr> {
        if den.is_zero() {
            return None;
        }
        Some(Expr::product([num, Expr::pow(den, -1)]))
    }

    pub fn scale(self, c: Rational) -> Expr {
        Expr::product([Expr::Const(c), self])
    }

    /// Every derivative symbol occurring in the tree.
    pub fn symbols(&self) -> BTreeSet<DerivVar> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expr::Var(v) = e {
                out.insert(*v);
            }
        });
        out
    }

    pub fn uses_time(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| found |= matches!(e, Expr::Time));
        found
    }

    /// Highest derivative order of unknown `var` present in the tree.
    pub fn max_order_of(&self, var: usize) -> Option<u32> {
        let mut best = None;
        self.visit(&mut |e| {
            if let Expr::Var(v) = e {
                if v.var == var {
                    best = best.max(Some(v.order));
                }
            }
        });
        best
    }

    /// Largest unknown index referenced, if any.
    pub fn max_var_index(&self) -> Option<usize> {
        self.symbols().iter().map(|v| v.var).max()
    }

    pub fn contains_symbol(&self, wrt: Wrt) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            found |= match (e, wrt) {
                (Expr::Time, Wrt::Time) => true,
                (Expr::Var(v), Wrt::Var(w)) => *v == w,
                _ => false,
            }
        });
        found
    }

    /// Pre-order traversal.
    pub fn visit<F: FnMut(&Expr)>(&self, f: &mut F) {
        f(self);
        match self {
            Expr::Sum(items) | Expr::Product(items) => items.iter().for_each(|c| c.visit(f)),
            Expr::Pow(b, _) | Expr::Apply(_, b) => b.visit(f),
            Expr::Const(_) | Expr::Time | Expr::Var(_) => {}
        }
    }

    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }
}

/// Splits a sum term into its rational coefficient and remaining factor.
fn split_coefficient(term: Expr) -> (Rational, Option<Expr>) {
    match term {
        Expr::Const(c) => (c, None),
        Expr::Product(mut factors) => {
            if let Some(Expr::Const(_)) = factors.first() {
                let Expr::Const(c) = factors.remove(0) else { unreachable!() };
                let rest = if factors.len() == 1 {
                    factors.pop().unwrap()
                } else {
                    Expr::Product(factors)
                };
                (c, Some(rest))
            } else {
                (Rational::one(), Some(Expr::Product(factors)))
            }
        }
        other => (Rational::one(), Some(other)),
    }
}

fn attach_coefficient(coef: Rational, rest: Expr) -> Expr {
    if coef.is_one() {
        return rest;
    }
    match rest {
        Expr::Product(mut factors) => {
            factors.insert(0, Expr::Const(coef));
            Expr::Product(factors)
        }
        other => Expr::Product(vec![Expr::Const(coef), other]),
    }
}

fn rational_pow(c: &Rational, n: i64) -> Rational {
    let exp = u32::try_from(n.unsigned_abs()).expect("exponent out of range");
    let p = num_traits::pow(c.clone(), exp as usize);
    if n < 0 {
        p.recip()
    } else {
        p
    }
}

pub(crate) fn rational_to_f64(c: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    c.to_f64().unwrap_or(if c.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::sum([self, rhs])
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sum([self, -rhs])
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::product([self, rhs])
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.scale(rat(-1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(j: usize, k: u32) -> Expr {
        Expr::var(j, k)
    }

    #[test]
    fn like_terms_collect() {
        let e = x(0, 1) + x(0, 1) - Expr::int(2) * x(0, 1);
        assert!(e.is_zero());
        let e = x(0, 0) * x(0, 0) * Expr::pow(x(0, 0), -2);
        assert!(e.is_one());
    }

    #[test]
    fn sums_flatten_and_sort() {
        let a = (x(1, 0) + x(0, 2)) + Expr::int(3);
        let b = Expr::int(3) + (x(0, 2) + x(1, 0));
        assert_eq!(a, b);
        match a {
            Expr::Sum(items) => {
                assert_eq!(items.len(), 3);
                assert!(matches!(items[0], Expr::Const(_)));
            }
            other => panic!("expected sum, got {other:?}"),
        }
    }

    #[test]
    fn constant_folding() {
        assert_eq!(Expr::exp(Expr::zero()), Expr::one());
        assert_eq!(Expr::log(Expr::one()), Expr::zero());
        assert_eq!(Expr::pow(Expr::int(2), -2), Expr::Const(ratio(1, 4)));
        assert_eq!(Expr::int(0) * Expr::sin(x(0, 0)), Expr::zero());
        assert_eq!(Expr::checked_div(x(0, 0), x(1, 0) - x(1, 0)), None);
    }

    #[test]
    fn powers_distribute_over_products() {
        let e = Expr::pow(Expr::int(2) * x(0, 0), 2);
        assert_eq!(e, Expr::int(4) * Expr::pow(x(0, 0), 2));
        assert_eq!(Expr::pow(Expr::pow(x(0, 0), 2), 3), Expr::pow(x(0, 0), 6));
    }

    #[test]
    fn symbol_queries() {
        let e = Expr::sin(x(1, 3)) * x(0, 1) + Expr::time();
        assert_eq!(e.max_order_of(1), Some(3));
        assert_eq!(e.max_order_of(0), Some(1));
        assert_eq!(e.max_order_of(2), None);
        assert!(e.uses_time());
        assert_eq!(e.symbols().len(), 2);
    }
}
