//! Finite-difference oracle for mixed partial derivatives.
//!
//! Uses tensor products of second-order central stencils, evaluated at step
//! `h` and `h/2` and combined by Richardson extrapolation. Evaluation goes
//! through plain `f64` arithmetic only, never through jets, so it can
//! cross-check the jet engine.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::MultiIndex;
use crate::math;

/// Total derivative order the oracle accepts.
pub const FD_MAX_ORDER: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdEstimate {
    pub value: f64,
    /// Truncation estimate `|R - D(h/2)|` plus a round-off bound.
    pub error: f64,
    pub step: f64,
}

impl FdEstimate {
    /// Acceptance band for comparing another value against this estimate:
    /// `max(10·error, 1e-6·scale)`.
    pub fn tolerance(&self, scale: f64) -> f64 {
        (10.0 * self.error).max(1e-6 * scale)
    }

    pub fn agrees_with(&self, other: f64, scale: f64) -> bool {
        (self.value - other).abs() <= self.tolerance(scale)
    }
}

/// Central stencil `(offsets, weights)` for the k-th derivative, O(h²).
fn stencil(k: usize) -> (&'static [f64], &'static [f64]) {
    match k {
        1 => (&[-1.0, 1.0], &[-0.5, 0.5]),
        2 => (&[-1.0, 0.0, 1.0], &[1.0, -2.0, 1.0]),
        3 => (&[-2.0, -1.0, 1.0, 2.0], &[-0.5, 1.0, -1.0, 0.5]),
        4 => (&[-2.0, -1.0, 0.0, 1.0, 2.0], &[1.0, -4.0, 6.0, -4.0, 1.0]),
        5 => (&[-3.0, -2.0, -1.0, 1.0, 2.0, 3.0], &[-0.5, 2.0, -2.5, 2.5, -2.0, 0.5]),
        _ => (&[0.0], &[1.0]),
    }
}

/// Base step for a derivative of total order `k` at a point of scale
/// `max(1, |p|)`. Grows with `k` so round-off (∝ ε/h^k) stays below the
/// extrapolated truncation error.
pub fn base_step(order: usize, point_norm: f64) -> f64 {
    let eps_root = math::powf(f64::EPSILON, 1.0 / (order as f64 + 4.0));
    point_norm.max(1.0) * eps_root.max(1e-3)
}

/// Mixed partial of an arbitrary scalar function. `vars` is a multiset of
/// coordinate indices into `point`.
pub fn fd_partial<F>(mut f: F, point: &[f64], vars: &[usize]) -> Result<FdEstimate>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let est = fd_partial_vec(|p: &[f64]| Ok(vec![f(p)?]), point, vars)?;
    Ok(est[0])
}

/// Componentwise mixed partial of a vector-valued function; every stencil
/// point is evaluated once for all components.
pub fn fd_partial_vec<F>(mut f: F, point: &[f64], vars: &[usize]) -> Result<Vec<FdEstimate>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let order = vars.len();
    if order > FD_MAX_ORDER {
        return Err(Error::OracleFailure(format!("order {order} exceeds {FD_MAX_ORDER}")));
    }
    if let Some(&v) = vars.iter().find(|&&v| v >= point.len()) {
        return Err(Error::Dimension(format!("variable {} outside point of length {}", v + 1, point.len())));
    }
    if order == 0 {
        let v = f(point)?;
        return Ok(v.into_iter().map(|value| FdEstimate { value, error: 0.0, step: 0.0 }).collect());
    }
    let mut groups: Vec<(usize, usize)> = Vec::new();
    let mut sorted = vars.to_vec();
    sorted.sort_unstable();
    for v in sorted {
        match groups.last_mut() {
            Some((var, k)) if *var == v => *k += 1,
            _ => groups.push((v, 1)),
        }
    }
    let h = base_step(order, math::norm2(point));
    let (coarse, coarse_abs) = stencil_sum(&mut f, point, &groups, h)?;
    let (fine, fine_abs) = stencil_sum(&mut f, point, &groups, 0.5 * h)?;
    let mut out = Vec::with_capacity(coarse.len());
    for c in 0..coarse.len() {
        let value = (4.0 * fine[c] - coarse[c]) / 3.0;
        let roundoff = f64::EPSILON * (4.0 * fine_abs[c] + coarse_abs[c]) / 3.0;
        let error = (value - fine[c]).abs() + roundoff;
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::OracleFailure(format!("non-finite estimate for variables {vars:?}")));
        }
        out.push(FdEstimate { value, error, step: h });
    }
    Ok(out)
}

/// Returns the stencil approximation and `Σ |w f| / h^k` (round-off scale)
/// per output component.
fn stencil_sum<F>(f: &mut F, point: &[f64], groups: &[(usize, usize)], h: f64) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let stencils: Vec<_> = groups.iter().map(|&(_, k)| stencil(k)).collect();
    let order: usize = groups.iter().map(|g| g.1).sum();
    let scale = math::powi(h, order as u32);
    let mut idx = vec![0usize; groups.len()];
    let mut p = point.to_vec();
    let (mut sum, mut abs): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
    loop {
        let mut w = 1.0;
        p.copy_from_slice(point);
        for (g, &(var, _)) in groups.iter().enumerate() {
            let (offs, ws) = stencils[g];
            p[var] += offs[idx[g]] * h;
            w *= ws[idx[g]];
        }
        let v = f(&p)?;
        if sum.is_empty() {
            sum = vec![0.0; v.len()];
            abs = vec![0.0; v.len()];
        }
        for (c, vc) in v.iter().enumerate() {
            if !vc.is_finite() {
                return Err(Error::OracleFailure(format!("non-finite function value at {p:?}")));
            }
            sum[c] += w * vc;
            abs[c] += (w * vc).abs();
        }
        // odometer over the stencil product
        let mut g = 0;
        loop {
            if g == groups.len() {
                sum.iter_mut().for_each(|s| *s /= scale);
                abs.iter_mut().for_each(|s| *s /= scale);
                return Ok((sum, abs));
            }
            idx[g] += 1;
            if idx[g] < stencils[g].0.len() {
                break;
            }
            idx[g] = 0;
            g += 1;
        }
    }
}

/// Finite-difference estimate of `∂^α_x ∂^β_y expr` at `(x, y)`.
pub fn fd_derivative(expr: &Expr, x: &[f64], y: &[f64], idx: &MultiIndex) -> Result<FdEstimate> {
    expr.check_dimensions(x.len(), y.len())?;
    let nx = x.len();
    let point: Vec<f64> = x.iter().chain(y).copied().collect();
    let vars: Vec<usize> = idx.x.iter().copied().chain(idx.y.iter().map(|j| j + nx)).collect();
    fd_partial(|p: &[f64]| expr.eval(&p[..nx], &p[nx..]), &point, &vars)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_third_derivative_of_cube() {
        let e = Expr::y(0).powf(3.0);
        let d = fd_derivative(&e, &[], &[2.0], &MultiIndex::fiber(&[0, 0, 0])).unwrap();
        assert!((d.value - 6.0).abs() <= d.tolerance(6.0), "{d:?}");
        assert!(d.error < 1e-4);
    }

    #[test]
    fn exp_times_square_mixed() {
        let e = Expr::x(0).exp() * Expr::y(0).square();
        let d = fd_derivative(&e, &[0.0], &[1.0], &MultiIndex::mixed(&[0], &[0, 0])).unwrap();
        assert!((d.value - 2.0).abs() <= d.tolerance(2.0), "{d:?}");
        assert!((d.value - 2.0).abs() < 1e-6);
    }

    #[test]
    fn fifth_order_polynomial() {
        // d^5/dy^5 y^5 = 120; d^4/dy0^2 dy1^2 of y0^2 y1^2 sin? keep it polynomial
        let e = Expr::y(0).powf(5.0) + Expr::y(0).square() * Expr::y(1).powf(3.0);
        let d = fd_derivative(&e, &[], &[0.7, -0.3], &MultiIndex::fiber(&[0; 5])).unwrap();
        assert!((d.value - 120.0).abs() <= d.tolerance(120.0), "{d:?}");
        let d = fd_derivative(&e, &[], &[0.7, -0.3], &MultiIndex::fiber(&[0, 0, 1, 1, 1])).unwrap();
        assert!((d.value - 12.0).abs() <= d.tolerance(12.0), "{d:?}");
    }

    #[test]
    fn rejects_high_order_and_domain_errors() {
        let e = Expr::y(0);
        assert!(fd_derivative(&e, &[], &[1.0], &MultiIndex::fiber(&[0; 6])).is_err());
        let s = Expr::y(0).sqrt();
        assert!(matches!(
            fd_derivative(&s, &[], &[1e-4], &MultiIndex::fiber(&[0])),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn zero_order_is_plain_value() {
        let e = Expr::y(0).exp();
        let d = fd_derivative(&e, &[], &[0.3], &MultiIndex::fiber(&[])).unwrap();
        assert_eq!(d.value, libm::exp(0.3));
        assert_eq!(d.error, 0.0);
    }
}
