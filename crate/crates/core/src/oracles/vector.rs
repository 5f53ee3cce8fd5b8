//! `(|X|^q X - |Y|^q Y)·(X - Y) >= ½(|X|^q + |Y|^q)|X - Y|^2` and
//! `||X|^q X - |Y|^q Y| <= (q + 1)(|X|^q + |Y|^q)|X - Y|` for `q >= 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::InequalityMargin;

pub const SWEEP_DIMS: [usize; 4] = [1, 2, 3, 8];
pub const SWEEP_EXPONENTS: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 6.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorInequality {
    Monotonicity,
    Lipschitz,
}

impl VectorInequality {
    pub fn name(self) -> &'static str {
        match self {
            VectorInequality::Monotonicity => "monotonicity",
            VectorInequality::Lipschitz => "lipschitz",
        }
    }

    pub fn check(self, x: &[f64], y: &[f64], q: f64) -> InequalityMargin {
        match self {
            VectorInequality::Monotonicity => check_monotonicity_inequality(x, y, q),
            VectorInequality::Lipschitz => check_lipschitz_inequality(x, y, q),
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn witness(x: &[f64], y: &[f64], q: f64) -> Vec<f64> {
    x.iter().chain(y).copied().chain([q]).collect()
}

/// `|X|^q` with the convention `|0|^0 = 1`.
fn weight(n: f64, q: f64) -> f64 {
    if q == 0.0 {
        1.0
    } else {
        n.powf(q)
    }
}

fn assert_compatible(x: &[f64], y: &[f64], q: f64) {
    assert_eq!(x.len(), y.len(), "vectors must share a dimension");
    assert!(q >= 0.0 && q.is_finite(), "exponent q = {q} must be finite and nonnegative");
}

pub fn check_monotonicity_inequality(x: &[f64], y: &[f64], q: f64) -> InequalityMargin {
    assert_compatible(x, y, q);
    let (wx, wy) = (weight(norm(x), q), weight(norm(y), q));
    let (mut diff2, mut rhs) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        diff2 += (a - b) * (a - b);
        rhs += (wx * a - wy * b) * (a - b);
    }
    let lhs = 0.5 * (wx + wy) * diff2;
    InequalityMargin::new(lhs, rhs, witness(x, y, q), 0)
}

pub fn check_lipschitz_inequality(x: &[f64], y: &[f64], q: f64) -> InequalityMargin {
    assert_compatible(x, y, q);
    let (wx, wy) = (weight(norm(x), q), weight(norm(y), q));
    let (mut diff2, mut lhs2) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        diff2 += (a - b) * (a - b);
        lhs2 += (wx * a - wy * b).powi(2);
    }
    let rhs = (q + 1.0) * (wx + wy) * diff2.sqrt();
    InequalityMargin::new(lhs2.sqrt(), rhs, witness(x, y, q), 0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorSweepCell {
    pub inequality: VectorInequality,
    pub dim: usize,
    pub q: f64,
    pub samples: usize,
    /// Samples whose margin fell below `-ROUNDING_TOLERANCE * scale`.
    pub failures: usize,
    pub worst: InequalityMargin,
}

/// Draw `samples` pairs per (inequality, dim, q) cell. Pairs are standard
/// Gaussian; every fourth pair puts `Y` within `1e-3` of `X` to probe the
/// near-diagonal regime. Each cell has its own stream seeded from `seed`
/// and the cell index, so results do not depend on scheduling.
pub fn sweep_vector_inequalities(dims: &[usize], exponents: &[f64], samples: usize, seed: u64) -> Vec<VectorSweepCell> {
    let mut cells = Vec::new();
    for inequality in [VectorInequality::Monotonicity, VectorInequality::Lipschitz] {
        for &dim in dims {
            for &q in exponents {
                cells.push((inequality, dim, q));
            }
        }
    }
    cells
        .par_iter()
        .enumerate()
        .map(|(index, &(inequality, dim, q))| {
            let cell_seed = seed.wrapping_add(index as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(cell_seed);
            let mut x = vec![0.0; dim];
            let mut y = vec![0.0; dim];
            let mut worst: Option<InequalityMargin> = None;
            let mut failures = 0;
            for k in 0..samples {
                for a in x.iter_mut() {
                    *a = rng.sample(StandardNormal);
                }
                let near = k % 4 == 3;
                for (b, a) in y.iter_mut().zip(&x) {
                    let g: f64 = rng.sample(StandardNormal);
                    *b = if near { a + 1e-3 * g } else { g };
                }
                let mut m = inequality.check(&x, &y, q);
                m.seed = cell_seed;
                if !m.holds() {
                    failures += 1;
                }
                worst = Some(match worst {
                    Some(w) => w.worse(m),
                    None => m,
                });
            }
            VectorSweepCell {
                inequality,
                dim,
                q,
                samples,
                failures,
                worst: worst.unwrap_or_else(|| InequalityMargin::new(0.0, 0.0, Vec::new(), cell_seed)),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn equal_vectors_give_zero_margin() {
        let x = [0.3, -1.2, 2.0];
        for q in SWEEP_EXPONENTS {
            for ineq in [VectorInequality::Monotonicity, VectorInequality::Lipschitz] {
                let m = ineq.check(&x, &x, q);
                assert_eq!((m.lhs, m.rhs, m.margin), (0.0, 0.0, 0.0));
            }
        }
    }

    #[test]
    fn q_zero_collapses_monotonicity() {
        let m = check_monotonicity_inequality(&[1.0, 2.0], &[-0.5, 0.25], 0.0);
        let d2 = 1.5f64.powi(2) + 1.75f64.powi(2);
        assert_abs_diff_eq!(m.lhs, d2, epsilon = 1e-15);
        assert_abs_diff_eq!(m.rhs, d2, epsilon = 1e-15);
        assert_abs_diff_eq!(m.margin, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn orthogonal_unit_vectors_are_the_equality_case() {
        let m = check_monotonicity_inequality(&[1.0, 0.0], &[0.0, 1.0], 2.0);
        assert_abs_diff_eq!(m.lhs, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.rhs, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.margin, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn lipschitz_with_zero_vector() {
        let x = [0.6, -0.8, 1.5];
        let n: f64 = norm(&x);
        for q in SWEEP_EXPONENTS {
            let m = check_lipschitz_inequality(&x, &[0.0; 3], q);
            assert_abs_diff_eq!(m.lhs, n.powf(q + 1.0), epsilon = 1e-12);
            // |0|^q = 0 for q > 0 and 1 for q = 0.
            let w0 = if q == 0.0 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(m.rhs, (q + 1.0) * (n.powf(q) + w0) * n, epsilon = 1e-12);
            assert!(m.margin >= q * n.powf(q + 1.0) - 1e-12);
        }
    }

    #[test]
    fn sweep_is_reproducible_and_clean() {
        let a = sweep_vector_inequalities(&[2, 3], &[0.5, 2.0], 2000, 9);
        let b = sweep_vector_inequalities(&[2, 3], &[0.5, 2.0], 2000, 9);
        assert_eq!(a, b);
        assert_eq!(a.len(), 8);
        assert!(a.iter().all(|c| c.failures == 0 && c.worst.holds()));
    }
}
