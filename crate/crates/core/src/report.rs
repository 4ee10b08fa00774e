//! Whole-system analysis collected into one serializable report.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::canon::{Canon, CanonError, OrderMatrix};
use crate::dsl::{point_to_json, ParseError, PointError, SystemFile};
use crate::linear::{LinearError, NormalForm, OperatorMatrix, TheoremCase};
use crate::numeric::DEFAULT_RANK_TOL;
use crate::order::Order;
use crate::prolongation::{
    prolongation_symbols, quasi_regularity_check, quasi_regularity_random, ProlongError, RegularityVerdict,
};
use crate::symexpr::{random_point, DerivVar, EvalError, Point, ZeroTest};
use crate::truncation::{TruncatedJacobian, TruncatedValue};

#[derive(Clone, Debug)]
pub struct Options {
    pub point: Option<Point>,
    pub random_points: usize,
    pub seed: u64,
    pub s_max: u32,
    pub tol: f64,
}

impl Default for Options {
    fn default() -> Self {
        Options { point: None, random_points: 0, seed: 0, s_max: 4, tol: DEFAULT_RANK_TOL }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("point file: {0}")]
    Point(#[from] PointError),
    #[error("order matrix: {0}")]
    Order(CanonError),
    #[error("Jacobi number is -inf: {0}")]
    NoTransversal(CanonError),
    #[error("linear analysis: {0}")]
    Linear(LinearError),
    #[error("truncated jacobian: {0}")]
    Truncated(EvalError),
    #[error("quasi-regularity: {0}")]
    Prolongation(#[from] ProlongError),
}

impl AnalysisError {
    /// Process exit code for the error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            AnalysisError::Parse(_) | AnalysisError::Point(_) => 2,
            AnalysisError::Order(_) => 2,
            AnalysisError::NoTransversal(_) => 3,
            AnalysisError::Linear(LinearError::NotLinear { .. } | LinearError::UnknownVariable { .. }) => 4,
            AnalysisError::Linear(LinearError::NotSquare { .. }) => 4,
            AnalysisError::Linear(_) => 5,
            AnalysisError::Truncated(_) | AnalysisError::Prolongation(_) => 5,
        }
    }

    /// The analysis stage that raised the error.
    pub fn module(&self) -> &'static str {
        match self {
            AnalysisError::Parse(_) | AnalysisError::Point(_) => "cli",
            AnalysisError::Order(_) | AnalysisError::NoTransversal(_) => "jacobi_core",
            AnalysisError::Linear(_) => "linear_normal_form",
            AnalysisError::Truncated(_) => "truncation",
            AnalysisError::Prolongation(_) => "prolongation",
        }
    }
}

impl From<CanonError> for AnalysisError {
    fn from(e: CanonError) -> Self {
        match e {
            CanonError::NoTransversal { .. } | CanonError::DegenerateEquation { .. } => {
                AnalysisError::NoTransversal(e)
            }
            e => AnalysisError::Order(e),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquationReport {
    pub name: String,
    pub expr: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonReport {
    pub lambda: Vec<i64>,
    #[serde(rename = "Lambda")]
    pub lambda_max: i64,
    pub alpha: Vec<i64>,
    pub beta: Vec<i64>,
    pub sigma: Vec<usize>,
}

impl From<&Canon> for CanonReport {
    fn from(c: &Canon) -> Self {
        CanonReport {
            lambda: c.lambda.clone(),
            lambda_max: c.lambda_max,
            alpha: c.alpha.clone(),
            beta: c.beta.clone(),
            sigma: c.sigma.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericTruncated {
    /// `"point"` or `"random"`.
    pub source: String,
    pub point: serde_json::Value,
    #[serde(flatten)]
    pub value: TruncatedValue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncatedReport {
    pub symbolic: Vec<Vec<String>>,
    /// `x_j^(α_i + β_j)`, `null` where that order is negative.
    pub principal_derivatives: Vec<Vec<Option<String>>>,
    pub numeric: Option<NumericTruncated>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub source: String,
    #[serde(flatten)]
    pub verdict: RegularityVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolvedReport {
    pub variable: String,
    pub order: u32,
    pub rhs: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalFormReport {
    pub sigma: Vec<usize>,
    pub gammas: Vec<i64>,
    pub reductions: usize,
    pub equations: Vec<SolvedReport>,
}

impl NormalFormReport {
    pub fn new(f: &NormalForm, vars: &[String]) -> Self {
        NormalFormReport {
            sigma: f.sigma.clone(),
            gammas: f.gammas.clone(),
            reductions: f.reductions,
            equations: f
                .equations
                .iter()
                .map(|e| SolvedReport {
                    variable: vars[e.var].clone(),
                    order: e.order,
                    rhs: e.rhs.named(vars).to_string(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearReport {
    pub determinant: String,
    pub det_degree: Order,
    pub truncated_determinant: String,
    pub normal_form: Option<NormalFormReport>,
    /// `deg det A`, `-inf` when degenerate.
    pub order: Order,
    pub theorem_case: TheoremCase,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub description: Option<String>,
    pub variables: Vec<String>,
    pub equations: Vec<EquationReport>,
    pub order_matrix: Vec<Vec<Order>>,
    pub padded: bool,
    pub canon: CanonReport,
    pub jacobi_number: Order,
    pub truncated_jacobian: TruncatedReport,
    pub quasi_regularity: Option<RegularityReport>,
    pub linear: bool,
    pub linear_analysis: Option<LinearReport>,
    pub warnings: Vec<String>,
}

/// Order matrix of the system, padded to square, and its minimal canon.
pub fn bound(system: &SystemFile) -> Result<(OrderMatrix, Canon), AnalysisError> {
    let exprs = system.exprs();
    let a = OrderMatrix::from_system(&exprs, system.arity(), &ZeroTest::default())?;
    let padded = a.pad_square()?;
    let canon = padded.minimal_canon()?;
    Ok((padded, canon))
}

pub fn analyze(system: &SystemFile, opts: &Options) -> Result<Report, AnalysisError> {
    let vars = &system.vars;
    let exprs = system.exprs();
    let (padded, canon) = bound(system)?;
    let mut warnings = Vec::new();

    let nabla = TruncatedJacobian::new(&exprs, &canon);
    let symbolic = nabla
        .entries
        .iter()
        .map(|row| row.iter().map(|e| e.named(vars).to_string()).collect())
        .collect();
    let principal_derivatives = (0..nabla.rows())
        .map(|i| {
            (0..nabla.cols())
                .map(|j| nabla.principal_derivative(i, j).map(|v| system.derivative_name(v)))
                .collect()
        })
        .collect();
    let numeric = numeric_truncated(&nabla, system, opts)?;

    let quasi_regularity = if let Some(p) = &opts.point {
        require_values(p, prolongation_symbols(&exprs, opts.s_max), system)?;
        let verdict = quasi_regularity_check(&exprs, p, opts.s_max, opts.tol)?;
        if !verdict.on_variety {
            warnings.push(format!(
                "the point does not satisfy the equations (max residual {:e})",
                verdict.max_residual
            ));
        }
        Some(RegularityReport { source: "point".into(), verdict })
    } else if opts.random_points > 0 {
        let verdict = quasi_regularity_random(&exprs, opts.s_max, opts.random_points, opts.seed, opts.tol)?;
        Some(RegularityReport { source: "random".into(), verdict })
    } else {
        None
    };

    let operator = OperatorMatrix::from_system(&exprs, system.arity()).ok();
    let linear = operator.is_some();
    let linear_analysis = match &operator {
        Some(a) if a.is_square() => Some(linear_report(a, vars)?),
        Some(_) => {
            warnings.push("underdetermined system: J is an upper bound on the order".into());
            None
        }
        None => None,
    };
    if padded.is_padded() && !linear {
        warnings.push(format!("order matrix padded with {} zero rows", padded.rows() - exprs.len()));
    }

    Ok(Report {
        description: system.description.clone(),
        variables: vars.clone(),
        equations: system
            .equations
            .iter()
            .map(|e| EquationReport { name: e.name.clone(), expr: e.expr.named(vars).to_string() })
            .collect(),
        order_matrix: padded.to_rows(),
        padded: padded.is_padded(),
        canon: CanonReport::from(&canon),
        jacobi_number: Order::Finite(canon.jacobi_number),
        truncated_jacobian: TruncatedReport { symbolic, principal_derivatives, numeric },
        quasi_regularity,
        linear,
        linear_analysis,
        warnings,
    })
}

fn linear_report(a: &OperatorMatrix, vars: &[String]) -> Result<LinearReport, AnalysisError> {
    let r = a.analyze().map_err(AnalysisError::Linear)?;
    let normal_form = match r.case {
        TheoremCase::Degenerate => None,
        _ => Some(NormalFormReport::new(&a.normal_form().map_err(AnalysisError::Linear)?, vars)),
    };
    Ok(LinearReport {
        determinant: r.determinant.to_string(),
        det_degree: r.det_degree,
        truncated_determinant: r.truncated_determinant.to_string(),
        normal_form,
        order: r.det_degree,
        theorem_case: r.case,
    })
}

fn require_values(
    p: &Point,
    symbols: impl IntoIterator<Item = DerivVar>,
    system: &SystemFile,
) -> Result<(), AnalysisError> {
    let mut missing: Vec<DerivVar> = symbols.into_iter().filter(|v| p.get(*v).is_none()).collect();
    missing.sort();
    missing.dedup();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(PointError::Missing(missing.into_iter().map(|v| system.derivative_name(v)).collect()).into())
    }
}

fn numeric_truncated(
    nabla: &TruncatedJacobian,
    system: &SystemFile,
    opts: &Options,
) -> Result<Option<NumericTruncated>, AnalysisError> {
    if let Some(p) = &opts.point {
        require_values(p, nabla.entries.iter().flatten().flat_map(|e| e.symbols()), system)?;
        let value = nabla.evaluate(p, opts.tol).map_err(AnalysisError::Truncated)?;
        return Ok(Some(NumericTruncated {
            source: "point".into(),
            point: point_to_json(p, &system.vars),
            value,
        }));
    }
    if opts.random_points == 0 {
        return Ok(None);
    }
    // the generic rank is the largest one seen
    let symbols: Vec<DerivVar> = nabla
        .entries
        .iter()
        .flatten()
        .flat_map(|e| e.symbols())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<(Point, TruncatedValue)> = None;
    for _ in 0..opts.random_points {
        let p = random_point(&mut rng, &symbols);
        let Ok(v) = nabla.evaluate(&p, opts.tol) else {
            continue;
        };
        if best.as_ref().is_none_or(|(_, b)| v.rank > b.rank) {
            best = Some((p, v));
        }
    }
    let (p, value) = best.ok_or(ProlongError::NoUsablePoint { draws: opts.random_points })?;
    Ok(Some(NumericTruncated { source: "random".into(), point: point_to_json(&p, &system.vars), value }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_system;

    fn run(text: &str, opts: &Options) -> Report {
        analyze(&parse_system(text).unwrap(), opts).unwrap()
    }

    #[test]
    fn attained_fixture() {
        let r = run("vars: x1, x2; eq g1: d(x1,2) + d(x2,1); eq g2: d(x1,1) - x2;", &Options::default());
        assert_eq!(r.jacobi_number, Order::Finite(2));
        assert_eq!(r.canon.lambda, vec![0, 1]);
        assert!(r.linear);
        let l = r.linear_analysis.unwrap();
        assert_eq!(l.det_degree, Order::Finite(2));
        assert_eq!(l.theorem_case, TheoremCase::Attained);
        assert_eq!(r.truncated_jacobian.symbolic, vec![vec!["1", "1"], vec!["1", "-1"]]);
        assert!(r.truncated_jacobian.numeric.is_none());
        assert!(r.quasi_regularity.is_none());
    }

    #[test]
    fn strict_drop_fixture() {
        let r = run("vars: x1, x2; eq g1: d(x1,1) + d(x2,1); eq g2: d(x1,1) + d(x2,1) + x2;", &Options::default());
        let l = r.linear_analysis.unwrap();
        assert_eq!((r.jacobi_number, l.det_degree), (Order::Finite(2), Order::Finite(1)));
        assert_eq!(l.theorem_case, TheoremCase::StrictDrop);
        assert_eq!(l.normal_form.unwrap().equations.len(), 2);
    }

    #[test]
    fn degenerate_fixture() {
        let opts = Options { random_points: 3, ..Options::default() };
        let r = run("vars: x1, x2; eq g1: d(x1,2) + d(x2,1); eq g2: d(x1,1) + x2;", &opts);
        let l = r.linear_analysis.unwrap();
        assert_eq!(l.theorem_case, TheoremCase::Degenerate);
        assert!(l.normal_form.is_none());
        assert_eq!(r.quasi_regularity.unwrap().verdict.first_failure(), Some(1));
    }

    #[test]
    fn errors_map_to_exit_codes() {
        let s = parse_system("vars: x1, x2; eq g1: d(x1,1); eq g2: x1;").unwrap();
        let e = analyze(&s, &Options::default()).unwrap_err();
        assert_eq!(e.exit_code(), 3);
        let s = parse_system("vars: x; eq g: log(x);").unwrap();
        let p = Point::new().with(DerivVar::new(0, 0), -1.0);
        let opts = Options { point: Some(p.clone()), s_max: 0, ..Options::default() };
        assert_eq!(analyze(&s, &opts).unwrap_err().exit_code(), 5);
        // values for the prolongation are required up front
        let opts = Options { point: Some(p), s_max: 2, ..Options::default() };
        let e = analyze(&s, &opts).unwrap_err();
        assert_eq!(e, AnalysisError::Point(PointError::Missing(vec!["x^1".into(), "x^2".into()])));
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn nonlinear_and_underdetermined() {
        let r = run("vars: x, y; eq g: d(x,1) * y - sin(t);", &Options { random_points: 2, ..Options::default() });
        assert!(!r.linear);
        assert!(r.padded);
        assert_eq!(r.order_matrix.len(), 2);
        assert_eq!(r.truncated_jacobian.symbolic.len(), 1);
        assert!(r.truncated_jacobian.numeric.is_some());
    }

    #[test]
    fn json_is_deterministic() {
        let text = "vars: x1, x2; eq g1: d(x1,2) + x1 * x2; eq g2: d(x2,1) - cos(x1);";
        let opts = Options { random_points: 4, seed: 7, ..Options::default() };
        let a = serde_json::to_string(&run(text, &opts)).unwrap();
        let b = serde_json::to_string(&run(text, &opts)).unwrap();
        assert_eq!(a, b);
        let v: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["canon"]["Lambda"], 0);
        assert_eq!(v["jacobi_number"], 3);
    }
}
