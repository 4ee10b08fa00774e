use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DerivVar, Expr, Point};
use crate::order::Order;

/// Seeded probabilistic zero test used when simplification cannot decide.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroTest {
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for ZeroTest {
    fn default() -> Self {
        ZeroTest { samples: 8, seed: 0, tolerance: 1e-9 }
    }
}

impl ZeroTest {
    pub fn with_seed(seed: u64) -> Self {
        ZeroTest { seed, ..Self::default() }
    }

    /// True when `e` is syntactically zero, or when every successful
    /// evaluation at the sample points is below tolerance. Samples hitting a
    /// domain error are redrawn (up to 8x the budget); if none succeeds the
    /// expression is treated as nonzero, which can only raise an order.
    pub fn is_zero(&self, e: &Expr) -> bool {
        if e.is_zero() {
            return true;
        }
        if matches!(e, Expr::Const(_)) {
            return false;
        }
        let symbols: Vec<DerivVar> = e.symbols().into_iter().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut ok = 0;
        for _ in 0..self.samples.max(1) * 8 {
            let p = random_point(&mut rng, &symbols);
            match e.eval(&p) {
                Ok(v) if v.abs() >= self.tolerance => return false,
                Ok(_) => {
                    ok += 1;
                    if ok >= self.samples {
                        return true;
                    }
                }
                Err(_) => {}
            }
        }
        ok > 0
    }
}

/// Uniform draw from `[-2, -0.5] ∪ [0.5, 2]`.
pub fn random_coordinate<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let magnitude = rng.random_range(0.5..=2.0);
    if rng.random_bool(0.5) {
        magnitude
    } else {
        -magnitude
    }
}

/// A point assigning `t` and each listed symbol a random coordinate.
pub fn random_point<R: Rng + ?Sized>(rng: &mut R, symbols: &[DerivVar]) -> Point {
    let mut p = Point::new().with_time(random_coordinate(rng));
    for v in symbols {
        p.set(*v, random_coordinate(rng));
    }
    p
}

impl Expr {
    /// Greatest `k` such that `∂e/∂x_var^(k)` is not identically zero, or
    /// `-inf` when there is none.
    pub fn structural_order(&self, var: usize, zt: &ZeroTest) -> Order {
        let Some(top) = self.max_order_of(var) else {
            return Order::NegInf;
        };
        for k in (0..=top).rev() {
            let d = self.partial(DerivVar::new(var, k));
            if !zt.is_zero(&d) {
                return Order::Finite(k as i64);
            }
        }
        Order::NegInf
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(j: usize, k: u32) -> Expr {
        Expr::var(j, k)
    }

    #[test]
    fn orders_read_off() {
        let zt = ZeroTest::default();
        let e = x(0, 2) + Expr::sin(x(1, 0));
        assert_eq!(e.structural_order(0, &zt), Order::Finite(2));
        assert_eq!(e.structural_order(1, &zt), Order::Finite(0));
        assert_eq!(x(0, 1).structural_order(1, &zt), Order::NegInf);
    }

    #[test]
    fn hidden_cancellation_detected_numerically() {
        let zt = ZeroTest::default();
        // exp(log(u)) - u is zero wherever it is defined; simplification keeps it
        let u = x(0, 3);
        let e = (Expr::exp(Expr::log(u.clone())) - u) * x(1, 0) + x(0, 1);
        let d = e.partial(DerivVar::new(0, 3));
        assert!(!d.is_zero());
        assert!(zt.is_zero(&d));
        assert_eq!(e.structural_order(0, &zt), Order::Finite(1));
        // x2 only multiplies the vanishing factor
        assert_eq!(e.structural_order(1, &zt), Order::NegInf);
    }

    #[test]
    fn symbolic_cancellation() {
        let zt = ZeroTest::default();
        let s = Expr::pow(Expr::sin(x(0, 3)), 2) + Expr::pow(Expr::cos(x(0, 3)), 2);
        let e = s * x(1, 0) + x(0, 1);
        assert_eq!(e.structural_order(0, &zt), Order::Finite(1));
    }

    #[test]
    fn coordinates_avoid_the_origin() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let c = random_coordinate(&mut rng);
            assert!((0.5..=2.0).contains(&c.abs()));
        }
    }
}
