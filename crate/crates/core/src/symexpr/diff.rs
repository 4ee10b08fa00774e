use super::{DerivVar, Expr, Func};

/// A symbol to differentiate with respect to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Wrt {
    Time,
    Var(DerivVar),
}

impl Expr {
    /// Formal partial derivative with respect to a single symbol.
    pub fn partial(&self, v: DerivVar) -> Expr {
        self.partial_wrt(Wrt::Var(v))
    }

    pub fn partial_wrt(&self, wrt: Wrt) -> Expr {
        if !self.contains_symbol(wrt) {
            return Expr::zero();
        }
        self.derive(&|leaf| match (leaf, wrt) {
            (Expr::Time, Wrt::Time) => Expr::one(),
            (Expr::Var(v), Wrt::Var(w)) if *v == w => Expr::one(),
            _ => Expr::zero(),
        })
    }

    /// The total derivative `δ = ∂/∂t + Σ x_j^(k+1) ∂/∂x_j^(k)`.
    pub fn total_derivative(&self) -> Expr {
        self.derive(&|leaf| match leaf {
            Expr::Time => Expr::one(),
            Expr::Var(v) => Expr::Var(v.derivative()),
            _ => Expr::zero(),
        })
    }

    /// `δ^s e`.
    pub fn nth_total_derivative(&self, s: u32) -> Expr {
        let mut e = self.clone();
        for _ in 0..s {
            e = e.total_derivative();
        }
        e
    }

    /// Derivation extending `leaf` (defined on `t` and the symbols) by the
    /// sum, Leibniz and chain rules.
    fn derive(&self, leaf: &dyn Fn(&Expr) -> Expr) -> Expr {
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Time | Expr::Var(_) => leaf(self),
            Expr::Sum(terms) => Expr::sum(terms.iter().map(|t| t.derive(leaf))),
            Expr::Product(factors) => {
                let mut terms = Vec::new();
                for (i, f) in factors.iter().enumerate() {
                    let df = f.derive(leaf);
                    if df.is_zero() {
                        continue;
                    }
                    let others = factors
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| *k != i)
                        .map(|(_, g)| g.clone());
                    terms.push(Expr::product(others.chain(std::iter::once(df))));
                }
                Expr::sum(terms)
            }
            Expr::Pow(base, n) => {
                let db = base.derive(leaf);
                if db.is_zero() {
                    return Expr::zero();
                }
                Expr::product([Expr::int(*n), Expr::pow((**base).clone(), n - 1), db])
            }
            Expr::Apply(func, arg) => {
                let da = arg.derive(leaf);
                if da.is_zero() {
                    return Expr::zero();
                }
                let a = (**arg).clone();
                let outer = match func {
                    Func::Sin => Expr::cos(a),
                    Func::Cos => -Expr::sin(a),
                    Func::Exp => Expr::exp(a),
                    Func::Log => Expr::pow(a, -1),
                };
                Expr::product([outer, da])
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(j: usize, k: u32) -> Expr {
        Expr::var(j, k)
    }

    #[test]
    fn partial_linear_term() {
        let e = x(0, 2) + x(1, 0);
        assert_eq!(e.partial(DerivVar::new(0, 2)), Expr::one());
    }

    #[test]
    fn partial_chain_rule() {
        let e = Expr::sin(x(0, 1));
        assert_eq!(e.partial(DerivVar::new(0, 1)), Expr::cos(x(0, 1)));
    }

    #[test]
    fn partial_product_rule() {
        let e = x(0, 1) * x(1, 0);
        assert_eq!(e.partial(DerivVar::new(1, 0)), x(0, 1));
    }

    #[test]
    fn total_derivative_leaf() {
        assert_eq!(x(0, 0).total_derivative(), x(0, 1));
        assert_eq!(Expr::time().total_derivative(), Expr::one());
    }

    #[test]
    fn total_derivative_leibniz() {
        let e = x(0, 1) * x(1, 0);
        assert_eq!(e.total_derivative(), x(0, 2) * x(1, 0) + x(0, 1) * x(1, 1));
    }

    #[test]
    fn total_derivative_chain() {
        let e = Expr::sin(x(0, 0));
        assert_eq!(e.total_derivative(), Expr::cos(x(0, 0)) * x(0, 1));
    }

    #[test]
    fn quotient_rule_via_negative_power() {
        let e = Expr::checked_div(Expr::one(), x(0, 0)).unwrap();
        assert_eq!(e.partial(DerivVar::new(0, 0)), -Expr::pow(x(0, 0), -2));
    }
}
