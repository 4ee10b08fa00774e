//! Jacobi ranking on derivative symbols.

use std::cmp::Ordering;

use crate::symexpr::DerivVar;

/// Orders `x_j^(k)` by the weight `k - β_j`. Equal weights are broken by a
/// variable priority list: the variable listed earlier ranks greater. The
/// default priority is the natural index order, so `x_1` beats `x_2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JacobiRanking {
    beta: Vec<i64>,
    // rank_of[var] = position in the priority list
    rank_of: Vec<usize>,
}

impl JacobiRanking {
    pub fn new(beta: Vec<i64>) -> Self {
        let rank_of = (0..beta.len()).collect();
        JacobiRanking { beta, rank_of }
    }

    /// `priority` lists every variable once, highest tie priority first.
    pub fn with_priority(beta: Vec<i64>, priority: &[usize]) -> Self {
        assert_eq!(priority.len(), beta.len(), "priority must list every variable");
        let mut rank_of = vec![usize::MAX; beta.len()];
        for (pos, &v) in priority.iter().enumerate() {
            assert_eq!(rank_of[v], usize::MAX, "variable {v} listed twice");
            rank_of[v] = pos;
        }
        JacobiRanking { beta, rank_of }
    }

    pub fn beta(&self) -> &[i64] {
        &self.beta
    }

    pub fn weight(&self, v: DerivVar) -> i64 {
        v.order as i64 - self.beta[v.var]
    }

    pub fn compare(&self, a: DerivVar, b: DerivVar) -> Ordering {
        self.weight(a)
            .cmp(&self.weight(b))
            // earlier in the priority list means greater
            .then_with(|| self.rank_of[b.var].cmp(&self.rank_of[a.var]))
    }

    pub fn less(&self, a: DerivVar, b: DerivVar) -> bool {
        self.compare(a, b) == Ordering::Less
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(j: usize, k: u32) -> DerivVar {
        DerivVar::new(j, k)
    }

    #[test]
    fn tie_goes_to_smaller_index() {
        let r = JacobiRanking::new(vec![1, 0]);
        assert_eq!(r.compare(v(0, 2), v(1, 1)), Ordering::Greater);
        assert!(r.less(v(1, 1), v(0, 2)));
    }

    #[test]
    fn weights_decide_first() {
        let r = JacobiRanking::new(vec![1, 0]);
        assert!(r.less(v(0, 1), v(1, 1)));
    }

    #[test]
    fn irreflexive() {
        let r = JacobiRanking::new(vec![1, 0]);
        assert_eq!(r.compare(v(0, 3), v(0, 3)), Ordering::Equal);
        assert!(!r.less(v(0, 3), v(0, 3)));
    }

    #[test]
    fn custom_priority() {
        let r = JacobiRanking::with_priority(vec![1, 0], &[1, 0]);
        assert!(r.less(v(0, 1), v(1, 0)));
    }
}
