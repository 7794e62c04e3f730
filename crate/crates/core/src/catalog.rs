//! Built-in metrics used by tests, the acceptance suite and the CLI.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::expr::Expr;
use crate::metric::MetricSpec;

fn unit_box(n: usize) -> Vec<(f64, f64)> {
    vec![(0.0, 1.0); n]
}

fn norm_squared(n: usize, offset: usize) -> Expr {
    Expr::Sum((0..n).map(|i| Expr::y(offset + i).square()).collect())
}

/// `F² = Σ (y^i)²`.
pub fn euclidean(n: usize) -> MetricSpec {
    MetricSpec::new(n, norm_squared(n, 0), unit_box(n), format!("euclidean-{n}d")).unwrap()
}

/// `F² = e^{2x¹} ((y¹)² + (y²)²)`.
pub fn conformal() -> MetricSpec {
    let f2 = (2.0 * Expr::x(0)).exp() * norm_squared(2, 0);
    MetricSpec::new(2, f2, unit_box(2), "conformal-e2x1").unwrap()
}

/// A non-diagonal x-dependent Riemannian metric.
pub fn riemannian_mixed() -> MetricSpec {
    let f2 = (1.0 + Expr::x(0).square()) * Expr::y(0).square()
        + 0.5 * Expr::x(1) * Expr::y(0) * Expr::y(1)
        + (2.0 + Expr::x(0).sin()) * Expr::y(1).square();
    MetricSpec::new(2, f2, unit_box(2), "riemannian-mixed").unwrap()
}

/// Randers `F = |y| + b·y¹` with constant drift `b`.
pub fn randers(b: f64) -> MetricSpec {
    let f = norm_squared(2, 0).sqrt() + b * Expr::y(0);
    MetricSpec::new(2, f.square(), unit_box(2), format!("randers-b{b}")).unwrap()
}

/// Randers `F = |y| + b(x¹)·y¹` with `b(x¹) = 0.3 + 0.2x¹`.
pub fn randers_x() -> MetricSpec {
    let f = norm_squared(2, 0).sqrt() + (0.3 + 0.2 * Expr::x(0)) * Expr::y(0);
    MetricSpec::new(2, f.square(), unit_box(2), "randers-x1").unwrap()
}

/// `F = (Σ (y^i)⁴)^{1/4}`, so `F² = sqrt(Σ (y^i)⁴)`.
pub fn quartic_minkowski(n: usize) -> MetricSpec {
    let f2 = Expr::Sum((0..n).map(|i| Expr::y(i).powf(4.0)).collect()).sqrt();
    MetricSpec::new(n, f2, unit_box(n), format!("quartic-minkowski-{n}d")).unwrap()
}

/// The five metrics of the homogeneity/Euler suite.
pub fn standard_suite() -> Vec<MetricSpec> {
    vec![euclidean(2), conformal(), randers(0.5), randers_x(), quartic_minkowski(2)]
}
