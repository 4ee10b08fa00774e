//! Prolonged systems, numeric quasi-regularity, and the block-triangular
//! structure of the Jacobian of `G_s`.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::canon::Canon;
use crate::numeric;
use crate::symexpr::{random_point, DerivVar, EvalError, Expr, Point};
use crate::truncation::TruncatedJacobian;

/// Residual below which a point is considered to lie on the zero set.
pub const ON_VARIETY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProlongError {
    #[error("evaluating derivative {derivatives} of equation {equation}: {source}")]
    Eval {
        equation: usize,
        derivatives: u32,
        #[source]
        source: EvalError,
    },
    #[error("evaluating the truncated jacobian: {0}")]
    Truncated(#[source] EvalError),
    #[error("block determinant check needs a square system ({equations} equations, {unknowns} unknowns)")]
    NotSquare { equations: usize, unknowns: usize },
    #[error("no column order gives nonzero leading principal minors (stuck at minor {size})")]
    PrincipalMinorDegeneracy { size: usize },
    #[error("no random point could be evaluated in {draws} draws")]
    NoUsablePoint { draws: usize },
}

/// One member `δ^d g_i` of a prolonged system.
#[derive(Clone, Debug, PartialEq)]
pub struct Member {
    pub equation: usize,
    pub derivatives: u32,
    pub expr: Expr,
}

/// `G_s = { g_i^(k - α_i) | α_i ≤ k ≤ s }`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProlongedSystem {
    pub s: u32,
    pub members: Vec<Member>,
}

/// `{ δ^ℓ g_i | 0 ≤ ℓ ≤ s }`, ordered by equation then by `ℓ`.
pub fn prolong_raw(system: &[Expr], s: u32) -> Vec<Expr> {
    raw_members(system, s).into_iter().map(|m| m.expr).collect()
}

fn raw_members(system: &[Expr], s: u32) -> Vec<Member> {
    let mut out = Vec::with_capacity(system.len() * (s as usize + 1));
    for (i, g) in system.iter().enumerate() {
        let mut e = g.clone();
        for l in 0..=s {
            if l > 0 {
                e = e.total_derivative();
            }
            out.push(Member { equation: i, derivatives: l, expr: e.clone() });
        }
    }
    out
}

/// Equation indices sorted by increasing `α` (stable).
pub fn equations_by_alpha(alpha: &[i64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..alpha.len()).collect();
    order.sort_by_key(|&i| alpha[i]);
    order
}

/// The weighted prolongation `G_s`. Members come ordered by derivative
/// count, then by equation in increasing-`α` order.
pub fn prolong_weighted(system: &[Expr], alpha: &[i64], s: u32) -> ProlongedSystem {
    assert_eq!(system.len(), alpha.len(), "one alpha per equation");
    let order = equations_by_alpha(alpha);
    let mut derived: Vec<Expr> = system.to_vec();
    let mut members = Vec::new();
    for d in 0..=s as i64 {
        for &i in &order {
            if alpha[i] + d <= s as i64 {
                members.push(Member { equation: i, derivatives: d as u32, expr: derived[i].clone() });
            }
        }
        if d < s as i64 {
            for e in derived.iter_mut() {
                *e = e.total_derivative();
            }
        }
    }
    ProlongedSystem { s, members }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityLevel {
    pub s: u32,
    pub required: usize,
    pub achieved: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityVerdict {
    pub s_max: u32,
    pub levels: Vec<RegularityLevel>,
    /// All levels up to `s_max` reach rank `r(s+1)`.
    pub quasi_regular: bool,
    /// `max_i |g_i(p)|` over the unprolonged equations.
    pub max_residual: f64,
    pub on_variety: bool,
}

impl RegularityVerdict {
    pub fn first_failure(&self) -> Option<u32> {
        self.levels.iter().find(|l| !l.pass).map(|l| l.s)
    }
}

/// Every derivative symbol occurring in the prolongation up to `s_max`.
pub fn prolongation_symbols(system: &[Expr], s_max: u32) -> BTreeSet<DerivVar> {
    let mut out = BTreeSet::new();
    for e in prolong_raw(system, s_max) {
        out.extend(e.symbols());
    }
    out
}

/// Numeric rank of the Jacobian of `{δ^ℓ g_i | ℓ ≤ s}` with respect to all
/// derivative symbols occurring in it, for each `s ≤ s_max`.
pub fn quasi_regularity_check(
    system: &[Expr],
    p: &Point,
    s_max: u32,
    rank_tol: f64,
) -> Result<RegularityVerdict, ProlongError> {
    let r = system.len();
    let members = raw_members(system, s_max);
    let mut gradients: Vec<BTreeMap<DerivVar, f64>> = Vec::with_capacity(members.len());
    for m in &members {
        let mut row = BTreeMap::new();
        for v in m.expr.symbols() {
            let value = m.expr.partial(v).eval(p).map_err(|source| ProlongError::Eval {
                equation: m.equation,
                derivatives: m.derivatives,
                source,
            })?;
            row.insert(v, value);
        }
        gradients.push(row);
    }

    let mut levels = Vec::with_capacity(s_max as usize + 1);
    for s in 0..=s_max {
        let rows: Vec<&BTreeMap<DerivVar, f64>> = members
            .iter()
            .zip(&gradients)
            .filter(|(m, _)| m.derivatives <= s)
            .map(|(_, g)| g)
            .collect();
        let symbols: Vec<DerivVar> = rows
            .iter()
            .flat_map(|g| g.keys().copied())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let dense: Vec<Vec<f64>> = rows
            .iter()
            .map(|g| symbols.iter().map(|v| g.get(v).copied().unwrap_or(0.0)).collect())
            .collect();
        let achieved = numeric::equilibrated_rank(&numeric::to_dmatrix(&dense, symbols.len()), rank_tol);
        let required = r * (s as usize + 1);
        levels.push(RegularityLevel { s, required, achieved, pass: achieved == required });
    }

    let mut max_residual = 0.0_f64;
    for (i, g) in system.iter().enumerate() {
        let v = g.eval(p).map_err(|source| ProlongError::Eval { equation: i, derivatives: 0, source })?;
        max_residual = max_residual.max(v.abs());
    }
    Ok(RegularityVerdict {
        s_max,
        quasi_regular: levels.iter().all(|l| l.pass),
        levels,
        max_residual,
        on_variety: max_residual < ON_VARIETY_TOL,
    })
}

/// Runs the check at `draws` seeded random points and keeps, per level, the
/// best rank achieved. Points where evaluation fails are skipped.
pub fn quasi_regularity_random(
    system: &[Expr],
    s_max: u32,
    draws: usize,
    seed: u64,
    rank_tol: f64,
) -> Result<RegularityVerdict, ProlongError> {
    let symbols: Vec<DerivVar> = prolongation_symbols(system, s_max).into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<RegularityVerdict> = None;
    for _ in 0..draws {
        let p = random_point(&mut rng, &symbols);
        let Ok(v) = quasi_regularity_check(system, &p, s_max, rank_tol) else {
            continue;
        };
        best = Some(match best {
            None => v,
            Some(mut b) => {
                for (bl, l) in b.levels.iter_mut().zip(&v.levels) {
                    bl.achieved = bl.achieved.max(l.achieved);
                    bl.pass = bl.achieved == bl.required;
                }
                b.quasi_regular = b.levels.iter().all(|l| l.pass);
                if v.max_residual < b.max_residual {
                    b.max_residual = v.max_residual;
                    b.on_variety = v.on_variety;
                }
                b
            }
        });
    }
    best.ok_or(ProlongError::NoUsablePoint { draws })
}

/// Both sides of the block-triangular determinant identity for `G_s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockDeterminant {
    pub s: u32,
    /// Equations in increasing-`α` order.
    pub equation_order: Vec<usize>,
    /// Unknowns paired with `equation_order` so that every leading minor is nonzero.
    pub variable_order: Vec<usize>,
    /// `D_1 ..= D_m` of the reordered truncated jacobian.
    pub minors: Vec<f64>,
    pub product_of_minors: f64,
    pub direct_determinant: f64,
    pub agree: bool,
}

/// Greedy column choice on the reordered truncated jacobian: at each step
/// take the column maximising the absolute leading minor.
pub fn principal_reordering(
    nabla: &[Vec<f64>],
    equation_order: &[usize],
    rank_tol: f64,
) -> Result<(Vec<usize>, Vec<f64>), ProlongError> {
    let m = equation_order.len();
    let mut chosen: Vec<usize> = Vec::with_capacity(m);
    let mut minors = Vec::with_capacity(m);
    for step in 0..m {
        let rows = &equation_order[..=step];
        // Hadamard bound of the leading rows, restricted to any column choice
        let scale: f64 = rows
            .iter()
            .map(|&i| nabla[i].iter().map(|x| x * x).sum::<f64>().sqrt())
            .product();
        let mut best: Option<(usize, f64)> = None;
        for c in (0..m).filter(|c| !chosen.contains(c)) {
            let cols: Vec<usize> = chosen.iter().copied().chain(std::iter::once(c)).collect();
            let sub = nalgebra::DMatrix::from_fn(step + 1, step + 1, |a, b| nabla[rows[a]][cols[b]]);
            let d = numeric::determinant(&sub);
            if best.is_none_or(|(_, bd)| d.abs() > bd.abs()) {
                best = Some((c, d));
            }
        }
        let (c, d) = best.expect("a column remains");
        if scale == 0.0 || d.abs() <= rank_tol * scale {
            return Err(ProlongError::PrincipalMinorDegeneracy { size: step + 1 });
        }
        chosen.push(c);
        minors.push(d);
    }
    Ok((chosen, minors))
}

/// Compares `det` of the principal-derivative submatrix of `Jac(G_s)` with
/// `∏_{k=0}^{s} D_{#{i | α_i ≤ k}}` at `p`.
pub fn block_determinant_check(
    system: &[Expr],
    canon: &Canon,
    p: &Point,
    s: u32,
    rank_tol: f64,
    rel_tol: f64,
) -> Result<BlockDeterminant, ProlongError> {
    let m = canon.beta.len();
    if system.len() != m || canon.alpha.len() != m {
        return Err(ProlongError::NotSquare { equations: system.len(), unknowns: m });
    }
    let nabla = TruncatedJacobian::new(system, canon);
    let values = nabla.eval_matrix(p).map_err(ProlongError::Truncated)?;
    let alpha = &canon.alpha;
    let equation_order = equations_by_alpha(alpha);
    let (variable_order, minors) = principal_reordering(&values, &equation_order, rank_tol)?;

    let active = |k: i64| equation_order.iter().take_while(|&&i| alpha[i] <= k).count();
    let product_of_minors: f64 = (0..=s as i64).map(|k| minors[active(k) - 1]).product();

    // rows and columns grouped by block k, each block in the reordered sequence
    let mut derived: Vec<Vec<Expr>> = system.iter().map(|g| vec![g.clone()]).collect();
    let mut rows: Vec<(usize, u32)> = Vec::new();
    let mut cols: Vec<DerivVar> = Vec::new();
    for k in 0..=s as i64 {
        for t in 0..active(k) {
            let i = equation_order[t];
            rows.push((i, (k - alpha[i]) as u32));
            let j = variable_order[t];
            let order = canon.beta[j] + k;
            cols.push(DerivVar::new(j, u32::try_from(order).expect("principal order is nonnegative")));
        }
    }
    let n = rows.len();
    let mut dense = vec![vec![0.0; n]; n];
    for (a, &(i, d)) in rows.iter().enumerate() {
        while derived[i].len() <= d as usize {
            let next = derived[i].last().unwrap().total_derivative();
            derived[i].push(next);
        }
        let e = &derived[i][d as usize];
        for (b, &v) in cols.iter().enumerate() {
            dense[a][b] = e
                .partial(v)
                .eval(p)
                .map_err(|source| ProlongError::Eval { equation: i, derivatives: d, source })?;
        }
    }
    let direct_determinant = numeric::exact_determinant(&dense);
    Ok(BlockDeterminant {
        s,
        agree: numeric::agree_relative(direct_determinant, product_of_minors, rel_tol),
        equation_order,
        variable_order,
        minors,
        product_of_minors,
        direct_determinant,
    })
}
