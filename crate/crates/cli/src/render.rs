use std::fmt::Write;

use jacobi_bound::order::Order;
use jacobi_bound::report::{CanonReport, NormalFormReport, Report};

fn tuple<T: ToString>(xs: &[T]) -> String {
    format!("({})", xs.iter().map(T::to_string).collect::<Vec<_>>().join(", "))
}

fn table(out: &mut String, row_labels: &[String], col_labels: &[String], cells: &[Vec<String>]) {
    let first = row_labels.iter().map(String::len).max().unwrap_or(0);
    let width = col_labels
        .iter()
        .map(String::len)
        .chain(cells.iter().flatten().map(String::len))
        .max()
        .unwrap_or(1);
    let _ = write!(out, "  {:first$}", "");
    for c in col_labels {
        let _ = write!(out, "  {c:>width$}");
    }
    out.push('\n');
    for (label, row) in row_labels.iter().zip(cells) {
        let _ = write!(out, "  {label:first$}");
        for c in row {
            let _ = write!(out, "  {c:>width$}");
        }
        out.push('\n');
    }
}

fn order_table(out: &mut String, vars: &[String], rows: &[Vec<Order>], equations: Option<&[String]>) {
    let labels: Vec<String> = (0..rows.len())
        .map(|i| match equations.and_then(|e| e.get(i)) {
            Some(name) => name.clone(),
            None => format!("(pad {})", i + 1),
        })
        .collect();
    let cells: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(Order::to_string).collect()).collect();
    table(out, &labels, vars, &cells);
}

fn canon_lines(out: &mut String, c: &CanonReport, j: i64) {
    let _ = writeln!(out, "minimal canon:  lambda = {}  Lambda = {}", tuple(&c.lambda), c.lambda_max);
    let _ = writeln!(out, "                alpha = {}  beta = {}", tuple(&c.alpha), tuple(&c.beta));
    let _ = writeln!(out, "                sigma = {}", tuple(&c.sigma.iter().map(|j| j + 1).collect::<Vec<_>>()));
    let _ = writeln!(out, "Jacobi number:  J = {j}");
}

pub fn bound(vars: &[String], rows: &[Vec<Order>], padded: bool, c: &CanonReport, j: i64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "order matrix{}:", if padded { " (padded)" } else { "" });
    let labels: Vec<String> = (1..=rows.len()).map(|i| format!("g{i}")).collect();
    order_table(&mut out, vars, rows, Some(&labels));
    canon_lines(&mut out, c, j);
    out
}

pub fn normal_form(f: &NormalFormReport, order: i64) -> String {
    let mut out = String::new();
    let lhs: Vec<String> = f
        .equations
        .iter()
        .map(|e| if e.order == 0 { e.variable.clone() } else { format!("d({}, {})", e.variable, e.order) })
        .collect();
    let width = lhs.iter().map(String::len).max().unwrap_or(0);
    let _ = writeln!(out, "normal form (order {order}, {} reductions):", f.reductions);
    for (l, e) in lhs.iter().zip(&f.equations) {
        let _ = writeln!(out, "  {l:>width$} = {}", e.rhs);
    }
    out
}

fn source(s: &str) -> &'static str {
    if s == "point" {
        "the given point"
    } else {
        "random points"
    }
}

pub fn report(r: &Report) -> String {
    let mut out = String::new();
    if let Some(d) = &r.description {
        let _ = writeln!(out, "{d}");
    }
    let _ = writeln!(out, "unknowns:  {}", r.variables.join(", "));
    let _ = writeln!(out, "equations:");
    let width = r.equations.iter().map(|e| e.name.len()).max().unwrap_or(0);
    for e in &r.equations {
        let _ = writeln!(out, "  {:width$}  {}", e.name, e.expr);
    }

    let names: Vec<String> = r.equations.iter().map(|e| e.name.clone()).collect();
    let _ = writeln!(out, "order matrix{}:", if r.padded { " (padded)" } else { "" });
    order_table(&mut out, &r.variables, &r.order_matrix, Some(&names));
    canon_lines(&mut out, &r.canon, r.jacobi_number.finite().unwrap_or(i64::MIN));

    let _ = writeln!(out, "truncated jacobian:");
    table(&mut out, &names, &r.variables, &r.truncated_jacobian.symbolic);
    if let Some(n) = &r.truncated_jacobian.numeric {
        let det = n.value.determinant.map_or(String::new(), |d| format!("det = {d:.6e}, "));
        let full = if n.value.full_rank { "full" } else { "deficient" };
        let _ = writeln!(out, "  at {}: {det}rank {} ({full})", source(&n.source), n.value.rank);
    }

    if let Some(q) = &r.quasi_regularity {
        let v = &q.verdict;
        let verdict = match v.first_failure() {
            None => "quasi-regular".to_string(),
            Some(s) => format!("fails at s = {s}"),
        };
        let _ = writeln!(out, "quasi-regularity (s <= {}, {}): {verdict}", v.s_max, source(&q.source));
        for l in &v.levels {
            let mark = if l.pass { "ok" } else { "FAIL" };
            let _ = writeln!(out, "  s = {}  rank {:>3} / {:<3} {mark}", l.s, l.achieved, l.required);
        }
    }

    let _ = writeln!(out, "linear:  {}", if r.linear { "yes" } else { "no" });
    if let Some(l) = &r.linear_analysis {
        let _ = writeln!(out, "  det A(D) = {}  (degree {})", l.determinant, l.det_degree);
        let _ = writeln!(out, "  truncated determinant = {}", l.truncated_determinant);
        let _ = writeln!(out, "  order = {}  case: {}", l.order, l.theorem_case);
        if let Some(f) = &l.normal_form {
            for line in normal_form(f, l.order.finite().unwrap_or_default()).lines() {
                let _ = writeln!(out, "  {line}");
            }
        }
    }
    for w in &r.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}
