//! Constant-coefficient linear systems `A(D) x = b`.
//!
//! This layer is exact (rational arithmetic throughout) and does not go
//! through the symbolic machinery beyond reading coefficients off the
//! equations, so it serves as an oracle for the order and truncation
//! layers: the order of a square system is `deg det A(D)`.

pub mod exact;
mod normal_form;
pub mod poly;

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::canon::{Canon, CanonError, OrderMatrix};
use crate::order::Order;
use crate::symexpr::{rat, Expr, Rational};

pub use normal_form::{normal_form, NormalForm, SolvedEquation};
pub use poly::Poly;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinearError {
    #[error("equation {equation} is not linear with constant coefficients: offending term `{term}`")]
    NotLinear { equation: usize, term: String },
    #[error("equation {equation} references unknown {var} outside 0..{arity}")]
    UnknownVariable { equation: usize, var: usize, arity: usize },
    #[error("operation needs a square system ({rows} equations, {cols} unknowns)")]
    NotSquare { rows: usize, cols: usize },
    #[error("det A(D) vanishes identically: the system is degenerate")]
    Degenerate,
    #[error(transparent)]
    Canon(#[from] CanonError),
}

/// `A_ij(D)` collects the coefficients of `x_j` and its derivatives in
/// `g_i`; constant terms go to the right-hand side, so the system reads
/// `A(D) x = rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    pub entries: Vec<Vec<Poly>>,
    pub rhs: Vec<Rational>,
}

impl OperatorMatrix {
    pub fn new(entries: Vec<Vec<Poly>>) -> Self {
        let rhs = vec![Rational::zero(); entries.len()];
        OperatorMatrix { entries, rhs }
    }

    /// Reads a linear system off its equations.
    pub fn from_system(system: &[Expr], arity: usize) -> Result<Self, LinearError> {
        let mut entries = vec![vec![Poly::zero(); arity]; system.len()];
        let mut rhs = vec![Rational::zero(); system.len()];
        for (i, g) in system.iter().enumerate() {
            let terms: &[Expr] = match g {
                Expr::Sum(ts) => ts,
                other => std::slice::from_ref(other),
            };
            for term in terms {
                let (coef, v) = match term {
                    Expr::Const(c) => {
                        rhs[i] -= c;
                        continue;
                    }
                    Expr::Var(v) => (rat(1), *v),
                    Expr::Product(fs) => match fs.as_slice() {
                        [Expr::Const(c), Expr::Var(v)] => (c.clone(), *v),
                        _ => return Err(not_linear(i, term)),
                    },
                    _ => return Err(not_linear(i, term)),
                };
                if v.var >= arity {
                    return Err(LinearError::UnknownVariable { equation: i, var: v.var, arity });
                }
                let add = Poly::monomial(coef, v.order as usize);
                entries[i][v.var] = &entries[i][v.var] + &add;
            }
        }
        Ok(OperatorMatrix { entries, rhs })
    }

    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.entries.first().map_or(0, Vec::len)
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    fn require_square(&self) -> Result<(), LinearError> {
        if self.is_square() {
            Ok(())
        } else {
            Err(LinearError::NotSquare { rows: self.rows(), cols: self.cols() })
        }
    }

    /// `a_ij = deg A_ij`.
    pub fn order_matrix(&self) -> Result<OrderMatrix, LinearError> {
        Ok(OrderMatrix::new(
            self.entries.iter().map(|r| r.iter().map(Poly::degree).collect()).collect(),
        )?)
    }

    /// Back to equations `Σ_j A_ij(D) x_j - rhs_i`.
    pub fn to_system(&self) -> Vec<Expr> {
        self.entries
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| {
                let mut terms = vec![Expr::Const(-b.clone())];
                for (j, p) in row.iter().enumerate() {
                    for (k, c) in p.coeffs().iter().enumerate() {
                        if !c.is_zero() {
                            terms.push(Expr::var(j, k as u32).scale(c.clone()));
                        }
                    }
                }
                Expr::sum(terms)
            })
            .collect()
    }

    /// The constant matrix `A(c)`.
    pub fn eval_at(&self, c: &Rational) -> Vec<Vec<Rational>> {
        self.entries.iter().map(|r| r.iter().map(|p| p.eval(c)).collect()).collect()
    }

    /// Upper bound `Σ_j max_i deg A_ij` on `deg det A`; `-inf` when a
    /// column vanishes.
    pub fn degree_bound(&self) -> Order {
        (0..self.cols())
            .map(|j| self.entries.iter().map(|r| r[j].degree()).max().unwrap_or(Order::NegInf))
            .fold(Order::ZERO, Order::plus)
    }

    /// `det A(D)` by evaluation at `bound + 1` integer points and Newton
    /// interpolation.
    pub fn determinant_interpolated(&self) -> Result<Poly, LinearError> {
        self.require_square()?;
        let Order::Finite(bound) = self.degree_bound() else {
            return Ok(Poly::zero());
        };
        let xs: Vec<Rational> = (0..=bound).map(rat).collect();
        let ys: Vec<Rational> = xs.iter().map(|x| exact::determinant(&self.eval_at(x))).collect();
        Ok(newton_interpolate(&xs, &ys))
    }

    /// `det A(D)` by fraction-free (Bareiss) elimination over `ℚ[D]`.
    pub fn determinant_bareiss(&self) -> Result<Poly, LinearError> {
        self.require_square()?;
        let n = self.rows();
        let mut a = self.entries.clone();
        let mut sign_negative = false;
        let mut prev = Poly::one();
        for k in 0..n {
            let Some(piv) = (k..n).find(|&r| !a[r][k].is_zero()) else {
                return Ok(Poly::zero());
            };
            if piv != k {
                a.swap(piv, k);
                sign_negative = !sign_negative;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &(&a[k][k] * &a[i][j]) - &(&a[i][k] * &a[k][j]);
                    a[i][j] = num.exact_div(&prev);
                }
                a[i][k] = Poly::zero();
            }
            prev = a[k][k].clone();
        }
        let det = a[n - 1][n - 1].clone();
        Ok(if sign_negative { -&det } else { det })
    }

    /// `deg det A(D)`, `-inf` when the determinant vanishes identically.
    pub fn det_degree(&self) -> Result<Order, LinearError> {
        Ok(self.determinant_interpolated()?.degree())
    }

    /// The constant matrix of coefficients of `D^(α_i + β_j)` in `A_ij`.
    pub fn truncated_matrix(&self, canon: &Canon) -> Vec<Vec<Rational>> {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, p)| p.coeff(canon.alpha[i] + canon.beta[j]))
                    .collect()
            })
            .collect()
    }

    pub fn truncated_determinant(&self, canon: &Canon) -> Result<Rational, LinearError> {
        self.require_square()?;
        Ok(exact::determinant(&self.truncated_matrix(canon)))
    }

    /// Exact order analysis of a square system.
    pub fn analyze(&self) -> Result<LinearAnalysis, LinearError> {
        self.require_square()?;
        let det = self.determinant_interpolated()?;
        let det_degree = det.degree();
        let canon = match self.order_matrix()?.minimal_canon() {
            Ok(c) => Some(c),
            Err(CanonError::NoTransversal { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        let jacobi_number = canon.as_ref().map_or(Order::NegInf, |c| Order::Finite(c.jacobi_number));
        let truncated_determinant = match &canon {
            Some(c) => self.truncated_determinant(c)?,
            None => Rational::zero(),
        };
        let case = if det.is_zero() {
            TheoremCase::Degenerate
        } else if truncated_determinant.is_zero() {
            TheoremCase::StrictDrop
        } else {
            TheoremCase::Attained
        };
        Ok(LinearAnalysis { determinant: det, det_degree, jacobi_number, truncated_determinant, case })
    }
}

fn not_linear(equation: usize, term: &Expr) -> LinearError {
    LinearError::NotLinear { equation, term: term.to_string() }
}

/// Interpolating polynomial through `(xs[k], ys[k])`, in monomial form.
pub fn newton_interpolate(xs: &[Rational], ys: &[Rational]) -> Poly {
    let n = xs.len();
    let mut dd: Vec<Rational> = ys.to_vec();
    for level in 1..n {
        for k in (level..n).rev() {
            dd[k] = (&dd[k] - &dd[k - 1]) / (&xs[k] - &xs[k - level]);
        }
    }
    // Horner on the Newton basis
    let mut p = Poly::zero();
    for k in (0..n).rev() {
        let factor = Poly::from_coeffs(vec![-xs[k].clone(), rat(1)]);
        p = &(&p * &factor) + &Poly::constant(dd[k].clone());
    }
    p
}

/// Which statement of the bound/attainment theorem a square linear system
/// falls under.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TheoremCase {
    /// Truncated determinant nonzero: the order equals `J`.
    #[serde(rename = "II-attained")]
    Attained,
    /// Truncated determinant zero, `det A ≢ 0`: the order is below `J`.
    #[serde(rename = "III-strict-drop")]
    StrictDrop,
    /// `det A ≡ 0`.
    #[serde(rename = "degenerate")]
    Degenerate,
}

impl fmt::Display for TheoremCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TheoremCase::Attained => "II-attained",
            TheoremCase::StrictDrop => "III-strict-drop",
            TheoremCase::Degenerate => "degenerate",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearAnalysis {
    pub determinant: Poly,
    pub det_degree: Order,
    pub jacobi_number: Order,
    pub truncated_determinant: Rational,
    pub case: TheoremCase,
}
