//! Bipartite matching and assignment on small dense matrices.
//!
//! Rows are matched to columns. Iteration is always rows ascending, then
//! columns ascending, so results are reproducible.

/// Maximum matching by augmenting paths. `allowed[i][j]` marks usable edges.
/// Returns `row -> column` for matched rows.
pub fn maximum_matching(allowed: &[Vec<bool>], cols: usize) -> Vec<Option<usize>> {
    let rows = allowed.len();
    let mut col_owner: Vec<Option<usize>> = vec![None; cols];
    for i in 0..rows {
        let mut seen = vec![false; cols];
        augment(i, allowed, &mut seen, &mut col_owner);
    }
    let mut row_match = vec![None; rows];
    for (j, owner) in col_owner.iter().enumerate() {
        if let Some(i) = owner {
            row_match[*i] = Some(j);
        }
    }
    row_match
}

fn augment(
    row: usize,
    allowed: &[Vec<bool>],
    seen: &mut [bool],
    col_owner: &mut [Option<usize>],
) -> bool {
    for j in 0..col_owner.len() {
        if !allowed[row][j] || seen[j] {
            continue;
        }
        seen[j] = true;
        let free = match col_owner[j] {
            None => true,
            Some(other) => augment(other, allowed, seen, col_owner),
        };
        if free {
            col_owner[j] = Some(row);
            return true;
        }
    }
    false
}

pub fn has_perfect_matching(allowed: &[Vec<bool>]) -> bool {
    let n = allowed.len();
    maximum_matching(allowed, n).iter().all(Option::is_some)
}

/// Lexicographically smallest perfect matching (as the vector
/// `sigma[row] = column`) of a square allowed-pattern, if any exists.
pub fn lex_smallest_perfect_matching(allowed: &[Vec<bool>]) -> Option<Vec<usize>> {
    let n = allowed.len();
    if !has_perfect_matching(allowed) {
        return None;
    }
    let mut pattern: Vec<Vec<bool>> = allowed.to_vec();
    let mut sigma = Vec::with_capacity(n);
    for i in 0..n {
        let choice = (0..n).find(|&j| {
            if !pattern[i][j] {
                return false;
            }
            let mut trial = pattern.clone();
            pin(&mut trial, i, j);
            has_perfect_matching(&trial)
        })?;
        pin(&mut pattern, i, choice);
        sigma.push(choice);
    }
    Some(sigma)
}

// restrict row i to column j and column j to row i
fn pin(pattern: &mut [Vec<bool>], i: usize, j: usize) {
    for (r, row) in pattern.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            if (r == i) != (c == j) {
                *cell = false;
            }
        }
    }
}

/// A set of columns `C` whose neighbourhood has fewer than `|C|` rows,
/// witnessing that no perfect matching exists. `None` when one exists.
pub fn hall_violator(allowed: &[Vec<bool>]) -> Option<Vec<usize>> {
    let n = allowed.len();
    let row_match = maximum_matching(allowed, n);
    let mut col_owner = vec![None; n];
    for (i, m) in row_match.iter().enumerate() {
        if let Some(j) = m {
            col_owner[*j] = Some(i);
        }
    }
    let start = col_owner.iter().position(Option::is_none)?;

    // alternating search from an exposed column: column -> any row -> matched column
    let mut in_set = vec![false; n];
    let mut row_seen = vec![false; n];
    in_set[start] = true;
    let mut stack = vec![start];
    while let Some(j) = stack.pop() {
        for i in 0..n {
            if allowed[i][j] && !row_seen[i] {
                row_seen[i] = true;
                // a maximum matching has no augmenting path, so i is matched
                let next = row_match[i].expect("augmenting path in a maximum matching");
                if !in_set[next] {
                    in_set[next] = true;
                    stack.push(next);
                }
            }
        }
    }
    Some((0..n).filter(|&j| in_set[j]).collect())
}

/// Maximum-weight perfect assignment over finite entries (`None` entries are
/// forbidden). Returns `None` when no perfect assignment avoids them.
pub fn max_weight_assignment(weights: &[Vec<Option<i64>>]) -> Option<Vec<usize>> {
    let n = weights.len();
    if n == 0 {
        return Some(Vec::new());
    }
    let allowed: Vec<Vec<bool>> = weights
        .iter()
        .map(|r| r.iter().map(Option::is_some).collect())
        .collect();
    if !has_perfect_matching(&allowed) {
        return None;
    }
    // forbidden cells cost more than any assignment made of allowed cells
    let spread: i64 = weights.iter().flatten().flatten().map(|w| w.abs()).sum::<i64>() + 1;
    let forbidden = spread.saturating_mul(n as i64 + 1);
    let costs: Vec<Vec<i64>> = weights
        .iter()
        .map(|r| r.iter().map(|w| w.map_or(forbidden, |w| -w)).collect())
        .collect();
    Some(hungarian_min_cost(&costs))
}

/// Dense O(n^3) Hungarian method with potentials, minimising total cost.
pub fn hungarian_min_cost(costs: &[Vec<i64>]) -> Vec<usize> {
    let n = costs.len();
    let inf = i64::MAX / 4;
    // 1-based potentials; column 0 is the virtual start
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = costs[i0 - 1][j - 1] - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if owner[j] > 0 {
            assignment[owner[j] - 1] = j - 1;
        }
    }
    assignment
}
