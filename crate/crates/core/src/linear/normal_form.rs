//! Solved, autoreduced form of a square constant-coefficient system.

use std::collections::BTreeMap;

use num_traits::Zero;

use super::exact;
use super::{LinearError, OperatorMatrix};
use crate::canon::Canon;
use crate::matching::lex_smallest_perfect_matching;
use crate::ranking::JacobiRanking;
use crate::symexpr::{DerivVar, Expr, Rational};

/// `x_var^(order) = rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct SolvedEquation {
    pub var: usize,
    pub order: u32,
    pub rhs: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalForm {
    /// Equation of the reduced system to the variable it is solved for.
    pub sigma: Vec<usize>,
    /// `γ_i = α_i + β_σ(i)` for the reduced system.
    pub gammas: Vec<i64>,
    /// One per variable, sorted by variable.
    pub equations: Vec<SolvedEquation>,
    pub order: i64,
    /// Row operations applied before the truncated determinant became nonzero.
    pub reductions: usize,
    /// The system the normal form was read from.
    pub reduced: OperatorMatrix,
}

impl NormalForm {
    /// No right-hand side mentions a principal derivative or one of its
    /// derivatives.
    pub fn is_autoreduced(&self) -> bool {
        let lead: BTreeMap<usize, u32> = self.equations.iter().map(|e| (e.var, e.order)).collect();
        self.equations.iter().all(|e| {
            e.rhs
                .symbols()
                .iter()
                .all(|v| lead.get(&v.var).is_none_or(|&k| v.order < k))
        })
    }

    /// Every right-hand side ranks strictly below its left-hand side.
    pub fn respects_ranking(&self, ranking: &JacobiRanking) -> bool {
        self.equations.iter().all(|e| {
            let lhs = DerivVar::new(e.var, e.order);
            e.rhs.symbols().iter().all(|&v| ranking.less(v, lhs))
        })
    }

    /// The solved equations as residuals `x^(γ) - rhs`.
    pub fn to_system(&self) -> Vec<Expr> {
        self.equations
            .iter()
            .map(|e| Expr::var(e.var, e.order) - e.rhs.clone())
            .collect()
    }
}

/// Normal form of a square linear system with `det A ≢ 0`.
pub fn normal_form(a: &OperatorMatrix) -> Result<NormalForm, LinearError> {
    a.require_square()?;
    if a.determinant_interpolated()?.is_zero() {
        return Err(LinearError::Degenerate);
    }
    let mut a = a.clone();
    let mut reductions = 0;
    let canon = loop {
        let canon = a.order_matrix()?.minimal_canon()?;
        if !reduce_once(&mut a, &canon) {
            break canon;
        }
        reductions += 1;
    };
    solve(a, &canon, reductions)
}

/// If the truncated matrix is singular, replaces the first dependent row
/// (equations taken by increasing `α`) by its difference with a combination
/// of derivatives of earlier rows, cancelling its leading part.
fn reduce_once(a: &mut OperatorMatrix, canon: &Canon) -> bool {
    let l = a.truncated_matrix(canon);
    let alpha = &canon.alpha;
    let mut by_alpha: Vec<usize> = (0..a.rows()).collect();
    by_alpha.sort_by_key(|&i| (alpha[i], i));
    for k in 0..by_alpha.len() {
        let earlier: Vec<Vec<Rational>> = by_alpha[..k].iter().map(|&t| l[t].clone()).collect();
        let target = by_alpha[k];
        let Some(c) = exact::combination(&earlier, &l[target]) else {
            continue;
        };
        for (&t, ct) in by_alpha[..k].iter().zip(&c) {
            if ct.is_zero() {
                continue;
            }
            let shift = (alpha[target] - alpha[t]) as usize;
            for j in 0..a.cols() {
                let sub = a.entries[t][j].shift(shift).scale(ct);
                a.entries[target][j] = &a.entries[target][j] - &sub;
            }
            if shift == 0 {
                let sub = &a.rhs[t] * ct;
                a.rhs[target] -= sub;
            }
        }
        return true;
    }
    false
}

/// Eliminates over the prolongation up to level `Λ` with columns in
/// decreasing Jacobi rank; the lowest pivot of each variable is its
/// principal derivative.
fn solve(a: OperatorMatrix, canon: &Canon, reductions: usize) -> Result<NormalForm, LinearError> {
    let m = a.cols();
    let (alpha, beta, big) = (&canon.alpha, &canon.beta, canon.lambda_max);
    let l = a.truncated_matrix(canon);
    let (priority, sigma) = principal_assignment(&l, alpha, &canon.sigma);
    let ranking = JacobiRanking::with_priority(beta.clone(), &priority);

    let mut columns: Vec<DerivVar> = (0..m)
        .flat_map(|j| (0..=(big + beta[j]).max(-1)).map(move |q| DerivVar::new(j, q as u32)))
        .collect();
    columns.sort_by(|x, y| ranking.compare(*y, *x));
    let index: BTreeMap<DerivVar, usize> = columns.iter().enumerate().map(|(c, v)| (*v, c)).collect();
    let width = columns.len();

    let mut g: Vec<Vec<Rational>> = Vec::new();
    for i in 0..a.rows() {
        for d in 0..=(big - alpha[i]) as usize {
            let mut row = vec![Rational::zero(); width + 1];
            for (j, p) in a.entries[i].iter().enumerate() {
                for (q, c) in p.shift(d).coeffs().iter().enumerate() {
                    if !c.is_zero() {
                        row[index[&DerivVar::new(j, q as u32)]] = c.clone();
                    }
                }
            }
            if d == 0 {
                row[width] = -a.rhs[i].clone();
            }
            g.push(row);
        }
    }
    let pivots = exact::row_reduce(&mut g, width);
    assert_eq!(pivots.len(), g.len(), "prolonged rows of a nondegenerate system are independent");

    // lowest pivot per variable, with its row
    let mut lowest: BTreeMap<usize, (u32, usize)> = BTreeMap::new();
    for (row, &c) in pivots.iter().enumerate() {
        let v = columns[c];
        let e = lowest.entry(v.var).or_insert((v.order, row));
        if v.order < e.0 {
            *e = (v.order, row);
        }
    }
    assert_eq!(lowest.len(), m, "every variable has a principal derivative");

    let is_pivot: Vec<bool> = {
        let mut f = vec![false; width];
        pivots.iter().for_each(|&c| f[c] = true);
        f
    };
    let equations: Vec<SolvedEquation> = lowest
        .iter()
        .map(|(&var, &(order, row))| {
            let mut terms = vec![Expr::Const(-g[row][width].clone())];
            for c in 0..width {
                if !is_pivot[c] && !g[row][c].is_zero() {
                    terms.push(Expr::Var(columns[c]).scale(-g[row][c].clone()));
                }
            }
            SolvedEquation { var, order, rhs: Expr::sum(terms) }
        })
        .collect();

    for (i, &j) in sigma.iter().enumerate() {
        assert_eq!(lowest[&j].0 as i64, alpha[i] + beta[j], "principal derivative follows the assignment");
    }
    let gammas: Vec<i64> = (0..m).map(|i| alpha[i] + beta[sigma[i]]).collect();
    let order = gammas.iter().sum();
    Ok(NormalForm { sigma, gammas, equations, order, reductions, reduced: a })
}

/// Splits the unknowns into levels matching the equation offsets: level `k`
/// receives as many unknowns as there are equations with `α_i = k`, chosen
/// so that every leading block `rows α ≤ k` x `columns level ≤ k` of the
/// truncated matrix is nonsingular. Among such choices the canon's
/// assignment is preferred, then blocks whose diagonal part admits a
/// nonzero transversal. Returns the tie-break priority (lower levels first)
/// and the equation-to-unknown assignment.
fn principal_assignment(
    l: &[Vec<Rational>],
    alpha: &[i64],
    canon_sigma: &[usize],
) -> (Vec<usize>, Vec<usize>) {
    let m = l.len();
    let mut levels: Vec<i64> = alpha.to_vec();
    levels.sort_unstable();
    levels.dedup();
    let groups: Vec<Vec<usize>> =
        levels.iter().map(|&k| (0..m).filter(|&i| alpha[i] == k).collect()).collect();

    let search = |strict: bool| {
        let mut chosen: Vec<Vec<usize>> = Vec::new();
        choose_levels(l, &groups, canon_sigma, strict, &mut chosen).then_some(chosen)
    };
    let chosen = search(true)
        .or_else(|| search(false))
        .expect("a nonsingular truncated matrix has a nested basis");

    let mut sigma = vec![usize::MAX; m];
    for (rows, cols) in groups.iter().zip(&chosen) {
        let canon_block: Vec<usize> = rows.iter().map(|&i| canon_sigma[i]).collect();
        let block = if same_set(&canon_block, cols) && rows.iter().all(|&i| !l[i][canon_sigma[i]].is_zero()) {
            canon_block
        } else {
            let allowed: Vec<Vec<bool>> =
                rows.iter().map(|&i| cols.iter().map(|&j| !l[i][j].is_zero()).collect()).collect();
            match lex_smallest_perfect_matching(&allowed) {
                Some(mt) => mt.into_iter().map(|t| cols[t]).collect(),
                None => cols.clone(),
            }
        };
        for (&i, j) in rows.iter().zip(block) {
            sigma[i] = j;
        }
    }
    (chosen.concat(), sigma)
}

fn same_set(a: &[usize], b: &[usize]) -> bool {
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    a.sort_unstable();
    b.sort_unstable();
    a == b
}

fn choose_levels(
    l: &[Vec<Rational>],
    groups: &[Vec<usize>],
    canon_sigma: &[usize],
    strict: bool,
    chosen: &mut Vec<Vec<usize>>,
) -> bool {
    let level = chosen.len();
    if level == groups.len() {
        return true;
    }
    let rows = &groups[level];
    let used: Vec<usize> = chosen.concat();
    let free: Vec<usize> = (0..l.len()).filter(|j| !used.contains(j)).collect();
    let mut canon_block: Vec<usize> = rows.iter().map(|&i| canon_sigma[i]).collect();
    canon_block.sort_unstable();
    let mut candidates = vec![canon_block.clone()];
    candidates.extend(subsets(&free, rows.len()).into_iter().filter(|c| *c != canon_block));

    let all_rows: Vec<usize> = groups[..=level].concat();
    for cols in candidates {
        if cols.iter().any(|j| used.contains(j)) {
            continue;
        }
        if strict && exact::determinant(&submatrix(l, rows, &cols)).is_zero() {
            continue;
        }
        let all_cols: Vec<usize> = used.iter().copied().chain(cols.iter().copied()).collect();
        if exact::determinant(&submatrix(l, &all_rows, &all_cols)).is_zero() {
            continue;
        }
        chosen.push(cols);
        if choose_levels(l, groups, canon_sigma, strict, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

fn submatrix(l: &[Vec<Rational>], rows: &[usize], cols: &[usize]) -> Vec<Vec<Rational>> {
    rows.iter().map(|&i| cols.iter().map(|&j| l[i][j].clone()).collect()).collect()
}

/// `k`-element subsets of `items` in lexicographic order.
fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if items.len() < k {
        return Vec::new();
    }
    let mut out: Vec<Vec<usize>> = subsets(&items[1..], k - 1)
        .into_iter()
        .map(|mut rest| {
            rest.insert(0, items[0]);
            rest
        })
        .collect();
    out.extend(subsets(&items[1..], k));
    out
}

impl OperatorMatrix {
    pub fn normal_form(&self) -> Result<NormalForm, LinearError> {
        normal_form(self)
    }
}
