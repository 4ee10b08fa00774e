//! Exact linear algebra over ℚ on small dense matrices.

use num_traits::{One, Zero};

use crate::symexpr::Rational;

/// Determinant by Gaussian elimination with exact pivoting.
pub fn determinant(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= &a[col][col];
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &a[col][col];
            for c in col..n {
                let delta = &f * &a[col][c];
                a[r][c] -= delta;
            }
        }
    }
    det
}

pub fn rank(m: &[Vec<Rational>]) -> usize {
    let mut a = m.to_vec();
    row_reduce(&mut a, usize::MAX).len()
}

/// In-place reduced row echelon form over the first `pivot_cols` columns
/// (all columns when larger than the width). Returns the pivot columns.
pub fn row_reduce(a: &mut [Vec<Rational>], pivot_cols: usize) -> Vec<usize> {
    let rows = a.len();
    let width = a.first().map_or(0, Vec::len);
    let limit = pivot_cols.min(width);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..limit {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(p, r);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for k in 0..width {
                    let delta = &f * &a[r][k];
                    a[i][k] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Coefficients `c` with `Σ c_t rows[t] = target`, if the target lies in
/// the row span (unique when the rows are independent).
pub fn combination(rows: &[Vec<Rational>], target: &[Rational]) -> Option<Vec<Rational>> {
    let k = rows.len();
    let m = target.len();
    // one equation per column: Σ_t c_t rows[t][j] = target[j]
    let mut aug: Vec<Vec<Rational>> = (0..m)
        .map(|j| {
            let mut eq: Vec<Rational> = rows.iter().map(|r| r[j].clone()).collect();
            eq.push(target[j].clone());
            eq
        })
        .collect();
    let pivots = row_reduce(&mut aug, k);
    if aug.iter().skip(pivots.len()).any(|eq| !eq[k].is_zero()) {
        return None;
    }
    let mut c = vec![Rational::zero(); k];
    for (row, &col) in pivots.iter().enumerate() {
        c[col] = aug[row][k].clone();
    }
    Some(c)
}
