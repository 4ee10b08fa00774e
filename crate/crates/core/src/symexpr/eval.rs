use std::collections::BTreeMap;

use super::{rational_to_f64, DerivVar, Expr, Func};

/// Divisors (and bases of negative powers) smaller than this are rejected.
pub const DIVISION_GUARD: f64 = 1e-12;

/// Numeric values for `t` and for derivative symbols.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Point {
    pub t: Option<f64>,
    pub values: BTreeMap<DerivVar, f64>,
}

impl Point {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }

    pub fn with(mut self, v: DerivVar, value: f64) -> Self {
        self.values.insert(v, value);
        self
    }

    pub fn set(&mut self, v: DerivVar, value: f64) {
        self.values.insert(v, value);
    }

    pub fn get(&self, v: DerivVar) -> Option<f64> {
        self.values.get(&v).copied()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("no value for x{}^({})", .0.var + 1, .0.order)]
    Unbound(DerivVar),
    #[error("no value for t")]
    UnboundTime,
    #[error("domain error: {0}")]
    Domain(String),
}

impl Expr {
    pub fn eval(&self, p: &Point) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Const(c) => rational_to_f64(c),
            Expr::Time => p.t.ok_or(EvalError::UnboundTime)?,
            Expr::Var(v) => p.get(*v).ok_or(EvalError::Unbound(*v))?,
            Expr::Sum(terms) => {
                let mut acc = 0.0;
                for t in terms {
                    acc += t.eval(p)?;
                }
                acc
            }
            Expr::Product(factors) => {
                let mut acc = 1.0;
                for f in factors {
                    acc *= f.eval(p)?;
                }
                acc
            }
            Expr::Pow(base, n) => {
                let b = base.eval(p)?;
                if *n < 0 && b.abs() < DIVISION_GUARD {
                    return Err(EvalError::Domain(format!("division by {b:e}")));
                }
                match i32::try_from(*n) {
                    Ok(n) => b.powi(n),
                    Err(_) => b.powf(*n as f64),
                }
            }
            Expr::Apply(func, arg) => {
                let a = arg.eval(p)?;
                match func {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Log => {
                        if a <= 0.0 {
                            return Err(EvalError::Domain(format!("log of {a}")));
                        }
                        a.ln()
                    }
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::Domain("non-finite value".to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_sum_with_constant() {
        let e = Expr::var(0, 1) + Expr::int(2);
        let p = Point::new().with(DerivVar::new(0, 1), 3.0);
        assert_eq!(e.eval(&p).unwrap(), 5.0);
    }

    #[test]
    fn evaluates_time_product() {
        let e = Expr::time() * Expr::var(0, 0);
        let p = Point::new().with_time(2.0).with(DerivVar::new(0, 0), -1.0);
        assert_eq!(e.eval(&p).unwrap(), -2.0);
    }

    #[test]
    fn folded_exp_zero() {
        let e = Expr::exp(Expr::zero()) * Expr::var(1, 0);
        let p = Point::new().with(DerivVar::new(1, 0), 7.0);
        assert_eq!(e.eval(&p).unwrap(), 7.0);
    }

    #[test]
    fn unbound_and_domain_errors() {
        let p = Point::new().with(DerivVar::new(0, 0), 0.0);
        assert_eq!(
            Expr::var(0, 1).eval(&p),
            Err(EvalError::Unbound(DerivVar::new(0, 1)))
        );
        assert!(matches!(Expr::log(Expr::var(0, 0)).eval(&p), Err(EvalError::Domain(_))));
        let q = Expr::checked_div(Expr::one(), Expr::var(0, 0)).unwrap();
        assert!(matches!(q.eval(&p), Err(EvalError::Domain(_))));
        assert_eq!(Expr::time().eval(&p), Err(EvalError::UnboundTime));
    }
}
