//! Deterministic sample points: uniform base points in the chart box,
//! Halton-sequence directions on the fiber unit sphere.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{Depth, FinslerEvaluator};
use crate::math;
use crate::metric::{MetricSpec, Point};

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPolicy {
    pub seed: u64,
    pub x_count: usize,
    pub y_count: usize,
    /// Fraction of samples that are also run through the finite-difference
    /// oracle.
    pub fd_fraction: f64,
}

impl Default for SamplingPolicy {
    fn default() -> Self {
        Self { seed: 42, x_count: 64, y_count: 32, fd_fraction: 0.1 }
    }
}

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut k: u64, base: u32) -> f64 {
    let b = base as u64;
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while k > 0 {
        out += (k % b) as f64 * inv;
        k /= b;
        inv /= base as f64;
    }
    out
}

/// Unit directions from the Halton sequence, starting after `*cursor`;
/// advances the cursor. Points of the cube are kept only inside the shell
/// `0.1 ≤ |p| ≤ 1` so the normalized directions are not biased toward corners.
pub fn next_direction(n: usize, cursor: &mut u64) -> Vec<f64> {
    loop {
        *cursor += 1;
        let p: Vec<f64> = (0..n)
            .map(|d| 2.0 * radical_inverse(*cursor, PRIMES[d % PRIMES.len()]) - 1.0)
            .collect();
        let r = math::norm2(&p);
        if (0.1..=1.0).contains(&r) {
            return p.into_iter().map(|v| v / r).collect();
        }
    }
}

/// Half-width of the excluded band around a degenerate coordinate hyperplane.
pub const DEGENERATE_CAP: f64 = 1e-3;

/// Coordinates `i` for which `g` fails at the direction with `y^i = 0` and
/// all other components equal.
fn degenerate_hyperplanes(eval: &FinslerEvaluator<'_>, x: &[f64], n: usize) -> Vec<usize> {
    if n < 2 {
        return Vec::new();
    }
    (0..n)
        .filter(|&i| {
            let y: Vec<f64> = (0..n).map(|j| if j == i { 0.0 } else { 1.0 }).collect();
            eval.at(x, &y).is_err()
        })
        .collect()
}

impl SamplingPolicy {
    pub fn with_counts(seed: u64, x_count: usize, y_count: usize) -> Self {
        Self { seed, x_count, y_count, ..Self::default() }
    }

    pub fn total(&self) -> usize {
        self.x_count * self.y_count
    }

    pub fn base_points(&self, chart_box: &[(f64, f64)]) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.x_count)
            .map(|_| chart_box.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>()).collect())
            .collect()
    }

    /// `x_count × y_count` points where `F²` evaluates to a positive value.
    /// Directions hitting a domain violation are skipped, as are directions
    /// within [`DEGENERATE_CAP`] of a coordinate hyperplane on which `g` is
    /// not positive definite.
    pub fn sample_points(&self, metric: &MetricSpec) -> Result<Vec<Point>> {
        let mut cursor = self.seed.wrapping_mul(7919) % 1_000_003;
        let mut out = Vec::with_capacity(self.total());
        let eval = FinslerEvaluator::new(metric, Depth::Metric)?;
        for x in self.base_points(&metric.chart_box) {
            let capped = degenerate_hyperplanes(&eval, &x, metric.dimension);
            let mut accepted = 0;
            let mut tries = 0;
            while accepted < self.y_count {
                tries += 1;
                if tries > 100 * self.y_count.max(1) {
                    return Err(Error::InvalidMetric(format!("no valid fiber directions at x={x:?}")));
                }
                let y = next_direction(metric.dimension, &mut cursor);
                if capped.iter().any(|&i| y[i].abs() < DEGENERATE_CAP) {
                    continue;
                }
                match metric.f_squared_at(&x, &y) {
                    Ok(v) if v > 0.0 && v.is_finite() => {
                        out.push(Point::new(x.clone(), y));
                        accepted += 1;
                    }
                    Ok(_) | Err(Error::Domain { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(out)
    }

    /// Indices of samples selected for the finite-difference cross-check.
    pub fn crosscheck_indices(&self, total: usize) -> Vec<usize> {
        if self.fd_fraction <= 0.0 || total == 0 {
            return Vec::new();
        }
        let stride = libm::round(1.0 / self.fd_fraction.min(1.0)).max(1.0) as usize;
        (0..total).step_by(stride).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;

    #[test]
    fn directions_are_unit_and_deterministic() {
        let mut c1 = 0;
        let mut c2 = 0;
        for _ in 0..50 {
            let a = next_direction(3, &mut c1);
            let b = next_direction(3, &mut c2);
            assert_eq!(a, b);
            assert!((math::norm2(&a) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn samples_stay_in_box() {
        let m = MetricSpec::new(2, Expr::y(0).square() + Expr::y(1).square(), alloc::vec![(0.0, 1.0), (2.0, 3.0)], "e")
            .unwrap();
        let p = SamplingPolicy::with_counts(7, 5, 4);
        let pts = p.sample_points(&m).unwrap();
        assert_eq!(pts.len(), 20);
        assert!(pts.iter().all(|q| (0.0..=1.0).contains(&q.x[0]) && (2.0..=3.0).contains(&q.x[1])));
        assert_eq!(pts, p.sample_points(&m).unwrap());
    }

    #[test]
    fn quartic_axes_are_capped() {
        let m = crate::catalog::quartic_minkowski(2);
        let pts = SamplingPolicy::with_counts(3, 4, 400).sample_points(&m).unwrap();
        assert!(pts.iter().all(|p| p.y.iter().all(|v| v.abs() >= DEGENERATE_CAP)));
        let e = crate::catalog::euclidean(2);
        let eval = FinslerEvaluator::new(&e, Depth::Metric).unwrap();
        assert!(degenerate_hyperplanes(&eval, &[0.5, 0.5], 2).is_empty());
    }

    #[test]
    fn crosscheck_stride() {
        let p = SamplingPolicy::default();
        assert_eq!(p.crosscheck_indices(25), alloc::vec![0, 10, 20]);
        let all = SamplingPolicy { fd_fraction: 1.0, ..p };
        assert_eq!(all.crosscheck_indices(3), alloc::vec![0, 1, 2]);
    }
}
