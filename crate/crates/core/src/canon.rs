//! Order matrices, canons and the Jacobi number.
//!
//! A canon of a square matrix `(a_ij)` is a vector of row increments `λ`
//! such that `a_ij + λ_i` has one column maximum per column, all in
//! distinct rows. The minimal canon is the pointwise least nonnegative one.
//!
//! `minimal_canon` first finds an optimal assignment `σ₀` (Hungarian
//! method), which pins down the canons as the integer solutions of the
//! difference constraints `λ_i + a_ij ≤ λ_{σ₀⁻¹(j)} + a_{σ₀⁻¹(j) j}`. The least
//! nonnegative solution is then obtained by raising rows from zero along
//! those constraints until nothing moves (a longest-path fixpoint).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::matching;
use crate::order::Order;
use crate::symexpr::{Expr, ZeroTest};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CanonError {
    #[error("order matrix rows have different lengths")]
    Ragged,
    #[error("order matrix has no rows")]
    Empty,
    #[error("order matrix entry ({row}, {col}) is negative")]
    NegativeEntry { row: usize, col: usize },
    #[error("{rows} equations in {cols} unknowns: more equations than unknowns is not supported")]
    Overdetermined { rows: usize, cols: usize },
    #[error("equation {row} involves no unknown")]
    DegenerateEquation { row: usize },
    #[error("operation needs a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("no finite transversal; columns {columns:?} have too few finite rows")]
    NoTransversal { columns: Vec<usize> },
    #[error("vector {0:?} is not a canon")]
    NotACanon(Vec<i64>),
    #[error("vector has length {got}, expected {expected}")]
    Length { expected: usize, got: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Matrix of orders `a_ij` over `ℤ≥0 ∪ {-inf}`, optionally padded with zero
/// rows to make it square.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Order>,
    /// Number of trailing zero rows appended by `pad_square`.
    padding: usize,
}

impl OrderMatrix {
    pub fn new(rows: Vec<Vec<Order>>) -> Result<Self, CanonError> {
        let r = rows.len();
        if r == 0 {
            return Err(CanonError::Empty);
        }
        let m = rows[0].len();
        if m == 0 || rows.iter().any(|row| row.len() != m) {
            return Err(CanonError::Ragged);
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, a) in row.iter().enumerate() {
                if matches!(a, Order::Finite(k) if *k < 0) {
                    return Err(CanonError::NegativeEntry { row: i, col: j });
                }
            }
        }
        Ok(OrderMatrix { rows: r, cols: m, entries: rows.into_iter().flatten().collect(), padding: 0 })
    }

    /// Convenience constructor; `None` stands for `-inf`.
    pub fn from_options(rows: &[Vec<Option<i64>>]) -> Result<Self, CanonError> {
        OrderMatrix::new(
            rows.iter()
                .map(|r| r.iter().map(|a| a.map_or(Order::NegInf, Order::Finite)).collect())
                .collect(),
        )
    }

    /// The order matrix of a system in `arity` unknowns: entry `(i, j)` is
    /// the structural order of equation `i` in unknown `j`.
    pub fn from_system(system: &[Expr], arity: usize, zt: &ZeroTest) -> Result<Self, CanonError> {
        let rows: Vec<Vec<Order>> = system
            .iter()
            .map(|g| (0..arity).map(|j| g.structural_order(j, zt)).collect())
            .collect();
        if let Some(row) = rows.iter().position(|r| r.iter().all(|a| !a.is_finite())) {
            return Err(CanonError::DegenerateEquation { row });
        }
        OrderMatrix::new(rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Rows that came from actual equations (excludes padding).
    pub fn equations(&self) -> usize {
        self.rows - self.padding
    }

    pub fn is_padded(&self) -> bool {
        self.padding > 0
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Order {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Order] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Order>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Largest finite entry, if any.
    pub fn max_entry(&self) -> Option<i64> {
        self.entries.iter().filter_map(|a| a.finite()).max()
    }

    /// Appends `m - r` zero rows. Identity on square matrices.
    pub fn pad_square(&self) -> Result<OrderMatrix, CanonError> {
        if self.rows > self.cols {
            return Err(CanonError::Overdetermined { rows: self.rows, cols: self.cols });
        }
        let extra = self.cols - self.rows;
        let mut entries = self.entries.clone();
        entries.extend(std::iter::repeat_n(Order::ZERO, extra * self.cols));
        Ok(OrderMatrix {
            rows: self.cols,
            cols: self.cols,
            entries,
            padding: self.padding + extra,
        })
    }

    fn require_square(&self) -> Result<(), CanonError> {
        if self.is_square() {
            Ok(())
        } else {
            Err(CanonError::NotSquare { rows: self.rows, cols: self.cols })
        }
    }

    fn finite_pattern(&self) -> Vec<Vec<bool>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|a| a.is_finite()).collect())
            .collect()
    }

    /// Positions `(i, j)` where `a_ij + λ_i` is finite and maximal in its
    /// column. A column of `-inf` has no such position.
    fn column_maxima(&self, lambda: &[i64]) -> Vec<Vec<bool>> {
        let mut out = vec![vec![false; self.cols]; self.rows];
        for j in 0..self.cols {
            let best = (0..self.rows)
                .filter_map(|i| self.get(i, j).finite().map(|a| a + lambda[i]))
                .max();
            if let Some(best) = best {
                for (i, row) in out.iter_mut().enumerate() {
                    row[j] = self.get(i, j).finite().map(|a| a + lambda[i]) == Some(best);
                }
            }
        }
        out
    }

    /// The lexicographically smallest transversal of column maxima of
    /// `a_ij + λ_i`, when `λ` is a canon.
    pub fn canon_witness(&self, lambda: &[i64]) -> Option<Vec<usize>> {
        if !self.is_square() || lambda.len() != self.rows {
            return None;
        }
        matching::lex_smallest_perfect_matching(&self.column_maxima(lambda))
    }

    pub fn is_canon(&self, lambda: &[i64]) -> bool {
        if !self.is_square() || lambda.len() != self.rows {
            return false;
        }
        matching::has_perfect_matching(&self.column_maxima(lambda))
    }

    /// Componentwise minimum of two canons, which is again a canon.
    pub fn canon_meet(&self, l1: &[i64], l2: &[i64]) -> Result<Vec<i64>, CanonError> {
        self.require_square()?;
        for l in [l1, l2] {
            if l.len() != self.rows {
                return Err(CanonError::Length { expected: self.rows, got: l.len() });
            }
            if !self.is_canon(l) {
                return Err(CanonError::NotACanon(l.to_vec()));
            }
        }
        let meet: Vec<i64> = l1.iter().zip(l2).map(|(a, b)| *a.min(b)).collect();
        assert!(self.is_canon(&meet), "meet of two canons is not a canon: {meet:?}");
        Ok(meet)
    }

    /// The unique pointwise-minimal nonnegative canon, with its offsets and
    /// witness assignment.
    pub fn minimal_canon(&self) -> Result<Canon, CanonError> {
        self.require_square()?;
        let n = self.rows;
        let weights: Vec<Vec<Option<i64>>> =
            (0..n).map(|i| self.row(i).iter().map(|a| a.finite()).collect()).collect();
        let Some(optimal) = matching::max_weight_assignment(&weights) else {
            let columns = matching::hall_violator(&self.finite_pattern())
                .expect("no perfect matching implies a Hall violator");
            return Err(CanonError::NoTransversal { columns });
        };
        let mut owner = vec![0usize; n];
        for (i, &j) in optimal.iter().enumerate() {
            owner[j] = i;
        }

        // least λ ≥ 0 with λ_i + a_ij ≤ λ_owner(j) + a_owner(j),j
        let mut lambda = vec![0i64; n];
        let mut rounds = 0;
        loop {
            let mut changed = false;
            for j in 0..n {
                let o = owner[j];
                let top = self.get(o, j).finite().expect("assignment uses finite entries");
                for i in 0..n {
                    if let Some(a) = self.get(i, j).finite() {
                        let need = lambda[i] + a - top;
                        if need > lambda[o] {
                            lambda[o] = need;
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
            rounds += 1;
            assert!(rounds <= n + 1, "row raising did not converge; assignment not optimal");
        }

        let sigma = self
            .canon_witness(&lambda)
            .expect("raised rows always form a canon");
        Ok(Canon::from_lambda(self, lambda, sigma))
    }

    /// Jacobi number of an `r x m` matrix (`r ≤ m`): the maximum of
    /// `Σ a_i,σ(i)` over injections, or `-inf` when every injection meets a
    /// `-inf` entry.
    pub fn jacobi_number(&self) -> Result<Order, CanonError> {
        match self.pad_square()?.minimal_canon() {
            Ok(c) => Ok(Order::Finite(c.jacobi_number)),
            Err(CanonError::NoTransversal { .. }) => Ok(Order::NegInf),
            Err(e) => Err(e),
        }
    }

    /// Whitespace-separated text, one row per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|a| a.to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

impl FromStr for OrderMatrix {
    type Err = CanonError;

    /// One row per line, entries are nonnegative integers or `-inf`. Blank
    /// lines and `#` comments are ignored.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut rows = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<Order>().map_err(|e| CanonError::Parse { line: n + 1, message: e.to_string() })
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        OrderMatrix::new(rows).map_err(|e| match e {
            CanonError::NegativeEntry { row, col } => CanonError::Parse {
                line: row + 1,
                message: format!("entry {} is negative", col + 1),
            },
            other => other,
        })
    }
}

impl fmt::Display for OrderMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<Vec<String>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(|a| a.to_string()).collect())
            .collect();
        let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
        for (i, row) in cells.iter().enumerate() {
            let padded: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
            write!(f, "[{}]", padded.join(" "))?;
            if i >= self.equations() {
                write!(f, "  (padding)")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// A canon together with the quantities derived from it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Canon {
    pub lambda: Vec<i64>,
    /// `Λ = max λ_i`.
    #[serde(rename = "Lambda")]
    pub lambda_max: i64,
    /// `α_i = Λ - λ_i`.
    pub alpha: Vec<i64>,
    /// `β_j = max_i (a_ij - α_i)`.
    pub beta: Vec<i64>,
    /// Transversal of column maxima, `sigma[row] = column`.
    pub sigma: Vec<usize>,
    pub jacobi_number: i64,
}

impl Canon {
    fn from_lambda(a: &OrderMatrix, lambda: Vec<i64>, sigma: Vec<usize>) -> Canon {
        let lambda_max = *lambda.iter().max().expect("nonempty");
        let alpha: Vec<i64> = lambda.iter().map(|l| lambda_max - l).collect();
        let beta: Vec<i64> = (0..a.cols())
            .map(|j| {
                (0..a.rows())
                    .filter_map(|i| a.get(i, j).finite().map(|x| x - alpha[i]))
                    .max()
                    .expect("every column of a canon has a finite entry")
            })
            .collect();
        let jacobi_number = sigma
            .iter()
            .enumerate()
            .map(|(i, &j)| a.get(i, j).finite().expect("transversal is finite"))
            .sum();
        Canon { lambda, lambda_max, alpha, beta, sigma, jacobi_number }
    }

    /// Checks dual feasibility, complementary slackness on `σ`,
    /// `J = Σα + Σβ` and `min λ = 0` against `a`. Returns the first failure.
    pub fn check_identities(&self, a: &OrderMatrix) -> Result<(), String> {
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                if let Some(x) = a.get(i, j).finite() {
                    if x > self.alpha[i] + self.beta[j] {
                        return Err(format!("a[{i}][{j}] = {x} exceeds alpha + beta"));
                    }
                }
            }
            let j = self.sigma[i];
            if a.get(i, j) != Order::Finite(self.alpha[i] + self.beta[j]) {
                return Err(format!("slackness fails at ({i}, {j})"));
            }
        }
        let total: i64 = self.alpha.iter().sum::<i64>() + self.beta.iter().sum::<i64>();
        if total != self.jacobi_number {
            return Err(format!("sum alpha + sum beta = {total} but J = {}", self.jacobi_number));
        }
        if self.lambda.iter().min() != Some(&0) {
            return Err("min lambda is not 0".to_string());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const NI: Option<i64> = None;

    fn mat(rows: &[&[Option<i64>]]) -> OrderMatrix {
        OrderMatrix::from_options(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn fin(rows: &[&[i64]]) -> OrderMatrix {
        OrderMatrix::from_options(
            &rows.iter().map(|r| r.iter().map(|&x| Some(x)).collect()).collect::<Vec<_>>(),
        )
        .unwrap()
    }

    #[test]
    fn order_matrix_of_system() {
        let zt = ZeroTest::default();
        let x = Expr::var;
        let sys = vec![x(0, 2) + x(1, 1), x(0, 1) - x(1, 0)];
        let a = OrderMatrix::from_system(&sys, 2, &zt).unwrap();
        assert_eq!(a, fin(&[&[2, 1], &[1, 0]]));

        let sys = vec![x(0, 1) + Expr::time()];
        let a = OrderMatrix::from_system(&sys, 2, &zt).unwrap();
        assert_eq!(a, mat(&[&[Some(1), NI]]));

        let sys = vec![Expr::sin(x(0, 1)) - x(1, 0) * x(0, 1)];
        assert_eq!(OrderMatrix::from_system(&sys, 2, &zt).unwrap(), fin(&[&[1, 0]]));

        let sys = vec![Expr::time() + Expr::one()];
        assert_eq!(
            OrderMatrix::from_system(&sys, 2, &zt),
            Err(CanonError::DegenerateEquation { row: 0 })
        );
    }

    #[test]
    fn padding() {
        let a = mat(&[&[Some(1), NI]]).pad_square().unwrap();
        assert_eq!(a.to_rows(), mat(&[&[Some(1), NI], &[Some(0), Some(0)]]).to_rows());
        assert!(a.is_padded());
        assert_eq!(a.equations(), 1);

        let sq = fin(&[&[2, 1], &[1, 0]]);
        assert_eq!(sq.pad_square().unwrap(), sq);

        let wide = fin(&[&[1, 0, 2], &[0, 0, 1]]).pad_square().unwrap();
        assert_eq!(wide.row(2), &[Order::ZERO; 3]);

        let tall = fin(&[&[1], &[2]]);
        assert_eq!(tall.pad_square(), Err(CanonError::Overdetermined { rows: 2, cols: 1 }));
    }

    #[test]
    fn canon_checks() {
        let a = fin(&[&[2, 1], &[1, 0]]);
        assert_eq!(a.canon_witness(&[0, 1]), Some(vec![0, 1]));
        assert!(!a.is_canon(&[0, 0]));
        assert_eq!(fin(&[&[0, 0], &[0, 0]]).canon_witness(&[0, 0]), Some(vec![0, 1]));
        // a column of -inf has no maximum
        assert!(!mat(&[&[Some(1), NI], &[Some(1), NI]]).is_canon(&[0, 0]));
    }

    #[test]
    fn minimal_canon_examples() {
        let c = fin(&[&[2, 1], &[1, 0]]).minimal_canon().unwrap();
        assert_eq!(c.lambda, vec![0, 1]);
        assert_eq!(c.lambda_max, 1);
        assert_eq!(c.alpha, vec![1, 0]);
        assert_eq!(c.beta, vec![1, 0]);
        assert_eq!(c.jacobi_number, 2);

        let c = fin(&[&[0, 0], &[0, 0]]).minimal_canon().unwrap();
        assert_eq!((c.lambda, c.jacobi_number), (vec![0, 0], 0));

        let c = mat(&[&[Some(1), NI], &[NI, Some(3)]]).minimal_canon().unwrap();
        assert_eq!((c.lambda, c.jacobi_number), (vec![0, 0], 4));

        let blocked = mat(&[&[Some(1), NI], &[Some(1), NI]]);
        assert_eq!(
            blocked.minimal_canon(),
            Err(CanonError::NoTransversal { columns: vec![1] })
        );
        assert_eq!(blocked.jacobi_number(), Ok(Order::NegInf));
    }

    #[test]
    fn negative_beta_is_allowed() {
        let a = mat(&[&[Some(5), Some(0)], &[Some(0), NI]]);
        let c = a.minimal_canon().unwrap();
        assert_eq!(c.lambda, vec![0, 5]);
        assert_eq!(c.beta, vec![0, -5]);
        assert_eq!(c.jacobi_number, 0);
        c.check_identities(&a).unwrap();
    }

    #[test]
    fn meet_examples() {
        let a = fin(&[&[2, 0], &[0, 2]]);
        assert_eq!(a.canon_meet(&[2, 0], &[0, 2]), Ok(vec![0, 0]));
        assert_eq!(a.canon_meet(&[1, 1], &[1, 1]), Ok(vec![1, 1]));
        assert_eq!(a.canon_meet(&[0, 0], &[1, 1]), Ok(vec![0, 0]));
        let b = fin(&[&[2, 1], &[1, 0]]);
        assert_eq!(b.canon_meet(&[0, 0], &[0, 1]), Err(CanonError::NotACanon(vec![0, 0])));
    }

    #[test]
    fn jacobi_number_examples() {
        assert_eq!(fin(&[&[2, 1], &[1, 0]]).jacobi_number(), Ok(Order::Finite(2)));
        assert_eq!(mat(&[&[Some(1), NI]]).jacobi_number(), Ok(Order::Finite(1)));
        assert_eq!(fin(&[&[7]]).jacobi_number(), Ok(Order::Finite(7)));
    }

    #[test]
    fn text_format() {
        let a: OrderMatrix = "2 1\n# comment\n1 -inf\n".parse().unwrap();
        assert_eq!(a, mat(&[&[Some(2), Some(1)], &[Some(1), NI]]));
        assert_eq!(a.to_text().parse::<OrderMatrix>().unwrap(), a);
        assert!(matches!("1 2\n3\n".parse::<OrderMatrix>(), Err(CanonError::Ragged)));
        assert!(matches!("1 x\n".parse::<OrderMatrix>(), Err(CanonError::Parse { line: 1, .. })));
        assert!(matches!("1 -2\n".parse::<OrderMatrix>(), Err(CanonError::Parse { line: 1, .. })));
    }
}
