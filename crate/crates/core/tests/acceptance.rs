//! Acceptance run: one PASS/FAIL line per criterion. Exits nonzero if any
//! criterion fails.

use std::collections::HashSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use jacobi_bound::canon::{Canon, OrderMatrix};
use jacobi_bound::corpus::{
    mixed_linear_system, random_expr, random_linear_system, random_nonlinear_system, random_order_matrix, ExprShape,
};
use jacobi_bound::dsl::parse_system;
use jacobi_bound::linear::{OperatorMatrix, TheoremCase};
use jacobi_bound::numeric::DEFAULT_RANK_TOL;
use jacobi_bound::order::Order;
use jacobi_bound::prolongation::{block_determinant_check, prolongation_symbols};
use jacobi_bound::report::{analyze, Options};
use jacobi_bound::symexpr::{random_point, rat, DerivVar, ZeroTest};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn check(failures: &[String], detail: String) -> Outcome {
        match failures.first() {
            None => Outcome { pass: true, detail },
            Some(f) => Outcome { pass: false, detail: format!("{detail}; {} failures, first: {f}", failures.len()) },
        }
    }

    fn timed(self, elapsed: Duration, limit: Duration) -> Outcome {
        let detail = format!("{}, {:.2} s (limit {} s)", self.detail, elapsed.as_secs_f64(), limit.as_secs());
        Outcome { pass: self.pass && elapsed < limit, detail }
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn brute_force_jacobi(a: &OrderMatrix, perms: &[Vec<usize>]) -> Order {
    perms
        .iter()
        .filter_map(|p| (0..a.rows()).map(|i| a.get(i, p[i]).finite()).sum::<Option<i64>>())
        .max()
        .map_or(Order::NegInf, Order::Finite)
}

fn identities(a: &OrderMatrix, c: &Canon, failures: &mut Vec<String>) {
    if let Err(e) = c.check_identities(a) {
        failures.push(format!("{e} for\n{}", a.to_text()));
    }
}

fn assignment_duality(canons: &mut Vec<(OrderMatrix, Canon)>) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let perms: Vec<Vec<Vec<usize>>> = (0..=7).map(permutations).collect();
    let mut failures = Vec::new();
    let count = 600;
    for n in 0..count {
        let m = 2 + n % 6;
        let r = if rng.random_bool(0.5) { m } else { rng.random_range(1..=m) };
        let a = random_order_matrix(&mut rng, r, m, 9, 0.2);
        let padded = a.pad_square().unwrap();
        let expected = brute_force_jacobi(&padded, &perms[m]);
        let got = a.jacobi_number().unwrap();
        if got != expected {
            failures.push(format!("J = {got}, brute force {expected} for\n{}", a.to_text()));
        }
        if let Ok(c) = padded.minimal_canon() {
            canons.push((padded, c));
        }
    }
    Outcome::check(&failures, format!("{count} matrices, sizes 2-7"))
}

fn exhaustive_canons(a: &OrderMatrix, top: i64) -> Vec<Vec<i64>> {
    let m = a.rows();
    let mut out = Vec::new();
    let mut lambda = vec![0i64; m];
    loop {
        if a.is_canon(&lambda) {
            out.push(lambda.clone());
        }
        let mut i = 0;
        while i < m && lambda[i] == top {
            lambda[i] = 0;
            i += 1;
        }
        if i == m {
            return out;
        }
        lambda[i] += 1;
    }
}

fn minimal_canon_correct(canons: &mut Vec<(OrderMatrix, Canon)>, found: &mut Vec<(OrderMatrix, Vec<Vec<i64>>)>) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = Vec::new();
    let mut tested = 0;
    while tested < 120 {
        let m = 2 + tested % 3;
        let a = random_order_matrix(&mut rng, m, m, 9, 0.15);
        let Ok(c) = a.minimal_canon() else { continue };
        tested += 1;
        let all = exhaustive_canons(&a, 2 * a.max_entry().unwrap_or(0));
        if !a.is_canon(&c.lambda) {
            failures.push(format!("{:?} is not a canon", c.lambda));
        }
        if let Some(l) = all.iter().find(|l| c.lambda.iter().zip(*l).any(|(x, y)| x > y)) {
            failures.push(format!("{:?} is not below canon {l:?}", c.lambda));
        }
        canons.push((a.clone(), c));
        found.push((a, all));
    }
    Outcome::check(&failures, format!("{tested} matrices, sizes 2-4"))
}

fn lattice(found: &[(OrderMatrix, Vec<Vec<i64>>)]) -> Outcome {
    let mut failures = Vec::new();
    let mut pairs = 0usize;
    for (a, all) in found {
        let set: HashSet<&[i64]> = all.iter().map(Vec::as_slice).collect();
        for (n, l1) in all.iter().enumerate() {
            for l2 in &all[n + 1..] {
                pairs += 1;
                let meet: Vec<i64> = l1.iter().zip(l2).map(|(x, y)| *x.min(y)).collect();
                if !set.contains(meet.as_slice()) && !a.is_canon(&meet) {
                    failures.push(format!("min of {l1:?} and {l2:?} is not a canon"));
                }
            }
        }
    }
    Outcome::check(&failures, format!("{pairs} canon pairs over {} matrices", found.len()))
}

fn duality_identities(canons: &[(OrderMatrix, Canon)]) -> Outcome {
    let mut failures = Vec::new();
    for (a, c) in canons {
        identities(a, c, &mut failures);
    }
    Outcome::check(&failures, format!("{} minimal canons", canons.len()))
}

fn commutation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = Vec::new();
    let mut worst = 0.0_f64;
    for _ in 0..200 {
        let e = random_expr(&mut rng, &ExprShape::default());
        let j = rng.random_range(0..2);
        let k = rng.random_range(0..=3);
        let hi = DerivVar::new(j, k + 1);
        let diff = e.total_derivative().partial(hi) - e.partial(hi).total_derivative() - e.partial(DerivVar::new(j, k));
        let symbols: Vec<DerivVar> = diff.symbols().into_iter().chain(e.total_derivative().symbols()).collect();
        let p = random_point(&mut rng, &symbols);
        match diff.eval(&p) {
            Ok(v) if v.abs() <= 1e-9 => worst = worst.max(v.abs()),
            Ok(v) => failures.push(format!("residual {v:e} for {e}")),
            Err(err) => failures.push(format!("{err} for {e}")),
        }
    }
    Outcome::check(&failures, format!("200 expressions, max residual {worst:e}"))
}

fn order_shift() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let zt = ZeroTest::default();
    let mut failures = Vec::new();
    let mut tested = 0;
    while tested < 100 {
        let e = random_expr(&mut rng, &ExprShape { depth: 2, ..ExprShape::default() });
        let j = rng.random_range(0..2);
        let Order::Finite(o) = e.structural_order(j, &zt) else { continue };
        tested += 1;
        let mut d = e.clone();
        for s in 1..=3 {
            d = d.total_derivative();
            let got = d.structural_order(j, &zt);
            if got != Order::Finite(o + s) {
                failures.push(format!("order {got} after {s} derivatives of {e}, expected {}", o + s));
            }
        }
    }
    Outcome::check(&failures, format!("{tested} expressions, s = 1..3"))
}

fn linear_systems(count: usize) -> Vec<OperatorMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut out = Vec::new();
    let mut n = 0;
    while out.len() < count {
        n += 1;
        let m = 1 + n % 4;
        let a = if n % 2 == 0 {
            random_linear_system(&mut rng, m)
        } else {
            let ops = rng.random_range(1..=3);
            mixed_linear_system(&mut rng, m, ops)
        };
        if !a.determinant_interpolated().unwrap().is_zero() {
            out.push(a);
        }
    }
    out
}

fn linear_theorem(systems: &[OperatorMatrix]) -> Outcome {
    let mut failures = Vec::new();
    let (mut attained, mut dropped) = (0, 0);
    for a in systems {
        let r = match a.analyze() {
            Ok(r) => r,
            Err(e) => {
                failures.push(e.to_string());
                continue;
            }
        };
        let truncated_zero = r.truncated_determinant == rat(0);
        let ok = r.det_degree <= r.jacobi_number
            && ((r.det_degree == r.jacobi_number) == !truncated_zero)
            && (!truncated_zero || r.det_degree < r.jacobi_number);
        if !ok {
            failures.push(format!("degree {} J {} truncated det {}", r.det_degree, r.jacobi_number, r.truncated_determinant));
        }
        match r.case {
            TheoremCase::Attained => attained += 1,
            TheoremCase::StrictDrop => dropped += 1,
            TheoremCase::Degenerate => failures.push("nonzero determinant classified as degenerate".into()),
        }
    }
    Outcome::check(
        &failures,
        format!("{} systems, {attained} attain the bound, {dropped} drop below it", systems.len()),
    )
}

fn block_determinants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures = Vec::new();
    let (mut systems, mut instances, mut skipped) = (0, 0, 0);
    while systems < 60 {
        let m = rng.random_range(1..=3);
        let system = random_nonlinear_system(&mut rng, m, 2);
        let Ok(canon) = OrderMatrix::from_system(&system, m, &ZeroTest::default()).and_then(|a| a.minimal_canon())
        else {
            skipped += 1;
            continue;
        };
        let symbols: Vec<DerivVar> = prolongation_symbols(&system, 3).into_iter().collect();
        let p = random_point(&mut rng, &symbols);
        let mut counted = false;
        for s in 0..=3 {
            match block_determinant_check(&system, &canon, &p, s, DEFAULT_RANK_TOL, 1e-9) {
                Ok(b) => {
                    instances += 1;
                    counted = true;
                    if !b.agree {
                        failures.push(format!("s = {s}: {:e} vs {:e}", b.direct_determinant, b.product_of_minors));
                    }
                }
                Err(_) => skipped += 1,
            }
        }
        systems += usize::from(counted);
    }
    Outcome::check(
        &failures,
        format!("{systems} systems, {instances} checks with s <= 3, {skipped} skipped by preconditions"),
    )
}

fn normal_forms(systems: &[OperatorMatrix]) -> Outcome {
    let mut failures = Vec::new();
    let mut solved = 0;
    for a in systems {
        let Ok(f) = a.normal_form() else {
            failures.push(format!("normal form failed on a nonsingular system\n{:?}", a.order_matrix()));
            continue;
        };
        solved += 1;
        let degree = a.determinant_interpolated().unwrap().degree();
        if !f.is_autoreduced() {
            failures.push("solved system is not autoreduced".into());
        }
        if Order::Finite(f.gammas.iter().sum()) != degree {
            failures.push(format!("gammas {:?} do not sum to the determinant degree {degree}", f.gammas));
        }
    }
    Outcome::check(&failures, format!("{solved} normal forms"))
}

fn fixtures() -> Outcome {
    let cases = [
        ("vars: x1, x2; eq g1: d(x1,2) + d(x2,1); eq g2: d(x1,1) - x2;", Some(2), TheoremCase::Attained),
        ("vars: x1, x2; eq g1: d(x1,1) + d(x2,1); eq g2: d(x1,1) + d(x2,1) + x2;", Some(1), TheoremCase::StrictDrop),
        ("vars: x1, x2; eq g1: d(x1,2) + d(x2,1); eq g2: d(x1,1) + x2;", None, TheoremCase::Degenerate),
    ];
    let opts = Options { random_points: 5, seed: 0, ..Options::default() };
    let mut failures = Vec::new();
    for (text, degree, case) in cases {
        let r = analyze(&parse_system(text).unwrap(), &opts).unwrap();
        let l = r.linear_analysis.as_ref().expect("square linear system");
        let mut expect = |ok: bool, what: &str| {
            if !ok {
                failures.push(format!("{what} for {text}"));
            }
        };
        expect(r.jacobi_number == Order::Finite(2), "J != 2");
        expect(r.linear, "not linear");
        expect(l.theorem_case == case, "wrong case");
        expect(l.det_degree == degree.map_or(Order::NegInf, Order::Finite), "wrong determinant degree");
        match case {
            TheoremCase::Attained => {
                expect(r.canon.lambda == [0, 1], "lambda != (0, 1)");
                expect(l.order == Order::Finite(2), "order != J");
            }
            TheoremCase::StrictDrop => expect(l.order == Order::Finite(1), "order != 1"),
            TheoremCase::Degenerate => {
                let failure = r.quasi_regularity.as_ref().and_then(|q| q.verdict.first_failure());
                expect(failure == Some(1), "quasi-regularity does not fail at s = 1");
            }
        }
    }
    Outcome::check(&failures, "3 worked systems".into())
}

fn main() -> ExitCode {
    let mut canons = Vec::new();
    let mut found = Vec::new();
    let mut results = Vec::new();

    let start = Instant::now();
    let o = assignment_duality(&mut canons);
    results.push((1, "assignment duality", o.timed(start.elapsed(), Duration::from_secs(10))));

    let start = Instant::now();
    let o = minimal_canon_correct(&mut canons, &mut found);
    results.push((2, "minimal canon", o.timed(start.elapsed(), Duration::from_secs(60))));

    results.push((3, "canon lattice", lattice(&found)));
    results.push((4, "duality identities", duality_identities(&canons)));
    results.push((5, "commutation rule", commutation()));
    results.push((6, "order shift", order_shift()));

    let systems = linear_systems(250);
    let start = Instant::now();
    let o = linear_theorem(&systems);
    results.push((7, "linear order theorem", o.timed(start.elapsed(), Duration::from_secs(30))));

    results.push((8, "block determinant", block_determinants()));
    results.push((9, "normal form soundness", normal_forms(&systems)));
    results.push((10, "worked systems", fixtures()));

    let mut all = true;
    for (n, name, o) in &results {
        all &= o.pass;
        println!("criterion {n:>2} {}: {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
