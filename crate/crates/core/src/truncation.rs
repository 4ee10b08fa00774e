//! The truncated Jacobian `∇ = (∂g_i / ∂x_j^(α_i + β_j))`.

use serde::{Deserialize, Serialize};

use crate::canon::Canon;
use crate::numeric;
use crate::symexpr::{DerivVar, EvalError, Expr, Point};

#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedJacobian {
    /// `r x m` symbolic entries, one row per actual equation.
    pub entries: Vec<Vec<Expr>>,
    /// `α_i` for the actual equations.
    pub alpha: Vec<i64>,
    pub beta: Vec<i64>,
}

/// `∇` evaluated at a point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncatedValue {
    pub matrix: Vec<Vec<f64>>,
    /// Present only for square systems.
    pub determinant: Option<f64>,
    pub rank: usize,
    pub full_rank: bool,
}

impl TruncatedJacobian {
    /// Builds `∇` for `system` from the minimal canon of its padded order
    /// matrix. Only the first `system.len()` rows of the canon are used.
    pub fn new(system: &[Expr], canon: &Canon) -> Self {
        let r = system.len();
        let alpha = canon.alpha[..r].to_vec();
        let beta = canon.beta.clone();
        let entries = system
            .iter()
            .zip(&alpha)
            .map(|(g, a)| {
                beta.iter()
                    .enumerate()
                    .map(|(j, b)| principal_symbol(j, a + b).map_or_else(Expr::zero, |v| g.partial(v)))
                    .collect()
            })
            .collect();
        TruncatedJacobian { entries, alpha, beta }
    }

    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.beta.len()
    }

    /// The derivative `x_j^(α_i + β_j)` for which entry `(i, j)` is taken.
    pub fn principal_derivative(&self, i: usize, j: usize) -> Option<DerivVar> {
        principal_symbol(j, self.alpha[i] + self.beta[j])
    }

    pub fn eval_matrix(&self, p: &Point) -> Result<Vec<Vec<f64>>, EvalError> {
        self.entries
            .iter()
            .map(|row| row.iter().map(|e| e.eval(p)).collect())
            .collect()
    }

    /// Numeric matrix, determinant (square case) and rank at `p`. For
    /// `r < m` full rank means rank `r`.
    pub fn evaluate(&self, p: &Point, rank_tol: f64) -> Result<TruncatedValue, EvalError> {
        let matrix = self.eval_matrix(p)?;
        let m = numeric::to_dmatrix(&matrix, self.cols());
        let determinant = (self.rows() == self.cols()).then(|| numeric::determinant(&m));
        let rank = numeric::numeric_rank(&m, rank_tol);
        Ok(TruncatedValue { matrix, determinant, rank, full_rank: rank == self.rows() })
    }
}

fn principal_symbol(var: usize, order: i64) -> Option<DerivVar> {
    u32::try_from(order).ok().map(|k| DerivVar::new(var, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::OrderMatrix;
    use crate::numeric::DEFAULT_RANK_TOL;
    use crate::symexpr::ZeroTest;

    fn x(j: usize, k: u32) -> Expr {
        Expr::var(j, k)
    }

    fn build(system: &[Expr], m: usize) -> TruncatedJacobian {
        let a = OrderMatrix::from_system(system, m, &ZeroTest::default()).unwrap();
        let canon = a.pad_square().unwrap().minimal_canon().unwrap();
        TruncatedJacobian::new(system, &canon)
    }

    fn consts(t: &TruncatedJacobian) -> Vec<Vec<i64>> {
        t.entries
            .iter()
            .map(|r| r.iter().map(|e| e.eval(&Point::new()).unwrap() as i64).collect())
            .collect()
    }

    #[test]
    fn attained_example() {
        let t = build(&[x(0, 2) + x(1, 1), x(0, 1) - x(1, 0)], 2);
        assert_eq!((t.alpha.clone(), t.beta.clone()), (vec![1, 0], vec![1, 0]));
        assert_eq!(consts(&t), vec![vec![1, 1], vec![1, -1]]);
        let v = t.evaluate(&Point::new(), DEFAULT_RANK_TOL).unwrap();
        assert!((v.determinant.unwrap() + 2.0).abs() < 1e-12);
        assert_eq!(v.rank, 2);
    }

    #[test]
    fn singular_example() {
        let t = build(&[x(0, 1) + x(1, 1), x(0, 1) + x(1, 1) + x(1, 0)], 2);
        assert_eq!((t.alpha.clone(), t.beta.clone()), (vec![0, 0], vec![1, 1]));
        assert_eq!(consts(&t), vec![vec![1, 1], vec![1, 1]]);
        let v = t.evaluate(&Point::new(), DEFAULT_RANK_TOL).unwrap();
        assert!(v.determinant.unwrap().abs() < 1e-12);
        assert_eq!(v.rank, 1);
        assert!(!v.full_rank);
    }

    #[test]
    fn single_equation() {
        let t = build(&[x(0, 3)], 1);
        assert_eq!(consts(&t), vec![vec![1]]);
    }

    #[test]
    fn underdetermined_rank() {
        // one equation in two unknowns: 1x2 row [1, 0]
        let t = build(&[x(0, 1) + Expr::time()], 2);
        assert_eq!(t.rows(), 1);
        let p = Point::new().with_time(0.3);
        let v = t.evaluate(&p, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(v.matrix, vec![vec![1.0, 0.0]]);
        assert_eq!(v.determinant, None);
        assert!(v.full_rank);
    }

    #[test]
    fn nonlinear_entries_depend_on_point() {
        let t = build(&[x(0, 1) * x(1, 0), x(1, 1) - Expr::sin(x(0, 0))], 2);
        let p = Point::new()
            .with(DerivVar::new(0, 0), 0.0)
            .with(DerivVar::new(0, 1), 2.0)
            .with(DerivVar::new(1, 0), 3.0);
        let v = t.evaluate(&p, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(v.matrix, vec![vec![3.0, 0.0], vec![0.0, 1.0]]);
    }
}
