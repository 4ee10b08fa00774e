//! Printing in the system-file expression syntax, so printed expressions
//! parse back to the same tree.

use std::fmt;

use num_traits::{One, Signed};

use super::{rat, DerivVar, Expr, Rational};

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

/// An expression paired with display names for its unknowns.
pub struct Named<'a> {
    expr: &'a Expr,
    names: &'a [String],
}

impl Expr {
    pub fn named<'a>(&'a self, names: &'a [String]) -> Named<'a> {
        Named { expr: self, names }
    }
}

impl fmt::Display for Named<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self.expr, self.names).0)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self, &[]).0)
    }
}

impl fmt::Display for DerivVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&var_text(*self, &[]))
    }
}

pub(crate) fn var_name(var: usize, names: &[String]) -> String {
    names.get(var).cloned().unwrap_or_else(|| format!("x{}", var + 1))
}

fn var_text(v: DerivVar, names: &[String]) -> String {
    let name = var_name(v.var, names);
    if v.order == 0 {
        name
    } else {
        format!("d({name}, {})", v.order)
    }
}

fn wrap(item: (String, u8), min_level: u8) -> String {
    if item.1 >= min_level {
        item.0
    } else {
        format!("({})", item.0)
    }
}

fn const_text(c: &Rational) -> (String, u8) {
    if c.is_integer() {
        let s = c.numer().to_string();
        let level = if c.is_negative() { UNARY } else { ATOM };
        (s, level)
    } else {
        (format!("{}/{}", c.numer(), c.denom()), PRODUCT)
    }
}

fn is_negative_term(e: &Expr) -> bool {
    match e {
        Expr::Const(c) => c.is_negative(),
        Expr::Product(fs) => matches!(fs.first(), Some(Expr::Const(c)) if c.is_negative()),
        _ => false,
    }
}

fn render(e: &Expr, names: &[String]) -> (String, u8) {
    match e {
        Expr::Const(c) => const_text(c),
        Expr::Time => ("t".to_string(), ATOM),
        Expr::Var(v) => (var_text(*v, names), ATOM),
        Expr::Apply(func, arg) => (format!("{}({})", func.name(), render(arg, names).0), ATOM),
        Expr::Pow(base, n) if *n > 0 => {
            (format!("{}^{}", wrap(render(base, names), ATOM), n), POWER)
        }
        Expr::Pow(base, n) => {
            let den = Expr::Pow(base.clone(), -n);
            let den = if -n == 1 { (**base).clone() } else { den };
            (format!("1 / {}", wrap(render(&den, names), UNARY)), PRODUCT)
        }
        Expr::Sum(terms) => {
            let mut out = String::new();
            // constant term printed last
            let ordered = terms
                .iter()
                .filter(|t| !matches!(t, Expr::Const(_)))
                .chain(terms.iter().filter(|t| matches!(t, Expr::Const(_))));
            for (i, term) in ordered.enumerate() {
                if i == 0 {
                    out.push_str(&wrap(render(term, names), PRODUCT));
                } else if is_negative_term(term) {
                    out.push_str(" - ");
                    let flipped = term.clone().scale(rat(-1));
                    out.push_str(&wrap(render(&flipped, names), PRODUCT));
                } else {
                    out.push_str(" + ");
                    out.push_str(&wrap(render(term, names), PRODUCT));
                }
            }
            (out, SUM)
        }
        Expr::Product(factors) => render_product(factors, names),
    }
}

fn render_product(factors: &[Expr], names: &[String]) -> (String, u8) {
    let (coef, rest) = match factors.first() {
        Some(Expr::Const(c)) => (Some(c), &factors[1..]),
        _ => (None, factors),
    };
    let mut numer = Vec::new();
    let mut denom = Vec::new();
    for f in rest {
        match f {
            Expr::Pow(base, n) if *n < 0 => {
                let d = if *n == -1 { (**base).clone() } else { Expr::Pow(base.clone(), -n) };
                denom.push(wrap(render(&d, names), UNARY));
            }
            other => numer.push(wrap(render(other, names), UNARY)),
        }
    }

    let mut out = String::new();
    let mut level = PRODUCT;
    match coef {
        Some(c) if (-c.clone()).is_one() && !numer.is_empty() => {
            out.push('-');
            out.push_str(&numer.join(" * "));
            if numer.len() == 1 && denom.is_empty() {
                level = UNARY;
            }
        }
        Some(c) => {
            out.push_str(&const_text(c).0);
            for n in &numer {
                out.push_str(" * ");
                out.push_str(n);
            }
        }
        None if numer.is_empty() => out.push('1'),
        None => out.push_str(&numer.join(" * ")),
    }
    for d in &denom {
        out.push_str(" / ");
        out.push_str(d);
    }
    (out, level)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(j: usize, k: u32) -> Expr {
        Expr::var(j, k)
    }

    #[test]
    fn prints_system_syntax() {
        let e = x(0, 2) + x(1, 1);
        assert_eq!(e.to_string(), "d(x1, 2) + d(x2, 1)");
        let e = x(0, 1) - x(1, 0);
        assert_eq!(e.to_string(), "d(x1, 1) - x2");
        let e = Expr::checked_div(Expr::sin(x(0, 0)), x(0, 0) + Expr::one()).unwrap();
        assert_eq!(e.to_string(), "sin(x1) / (x1 + 1)");
        assert_eq!((-Expr::pow(x(0, 0), 2)).to_string(), "-x1^2");
        assert_eq!(Expr::Const(super::super::ratio(-1, 2)).to_string(), "-1/2");
    }

    #[test]
    fn uses_supplied_names() {
        let names = vec!["u".to_string(), "v".to_string()];
        let e = Expr::time() * x(1, 3);
        assert_eq!(e.named(&names).to_string(), "t * d(v, 3)");
    }
}
