//! Dense floating-point helpers: numeric rank and determinants.

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::linear::exact;

/// Default relative threshold for numeric rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

pub fn to_dmatrix(rows: &[Vec<f64>], cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j])
}

/// Number of singular values above `rel_tol * σ_max`.
pub fn numeric_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0_f64, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

pub fn determinant(m: &DMatrix<f64>) -> f64 {
    assert!(m.is_square(), "determinant of a non-square matrix");
    if m.nrows() == 0 {
        return 1.0;
    }
    m.clone().lu().determinant()
}

/// Ruiz equilibration: rows and columns are repeatedly divided by the
/// square root of their largest absolute entry. The result differs from `m`
/// only by nonsingular diagonal factors on each side, so it has the same rank.
pub fn equilibrate(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut a = m.clone();
    for _ in 0..20 {
        let mut worst = 0.0_f64;
        for mut row in a.row_iter_mut() {
            let top = row.amax();
            if top > 0.0 {
                row /= top.sqrt();
                worst = worst.max((1.0 - top).abs());
            }
        }
        for mut col in a.column_iter_mut() {
            let top = col.amax();
            if top > 0.0 {
                col /= top.sqrt();
                worst = worst.max((1.0 - top).abs());
            }
        }
        if worst < 1e-3 {
            break;
        }
    }
    a
}

/// Numeric rank after [`equilibrate`], for matrices whose rows and columns
/// live on very different scales.
pub fn equilibrated_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    numeric_rank(&equilibrate(m), rel_tol)
}

/// Determinant of the matrix whose entries are exactly the given floats,
/// computed in rational arithmetic and rounded once. Falls back to LU when
/// an entry is not finite.
pub fn exact_determinant(rows: &[Vec<f64>]) -> f64 {
    let exact: Option<Vec<Vec<BigRational>>> =
        rows.iter().map(|r| r.iter().map(|&x| BigRational::from_float(x)).collect()).collect();
    match exact {
        Some(q) => exact::determinant(&q).to_f64().unwrap_or(f64::NAN),
        None => determinant(&to_dmatrix(rows, rows.len())),
    }
}

/// `|a - b| ≤ rel_tol · max(|a|, |b|)`; two exact zeros agree.
pub fn agree_relative(a: f64, b: f64, rel_tol: f64) -> bool {
    let scale = a.abs().max(b.abs());
    (a - b).abs() <= rel_tol * scale
}
