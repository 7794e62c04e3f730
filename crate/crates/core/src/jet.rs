//! Truncated Taylor jets of scalar expressions in `(x, y)`.
//!
//! A jet carries every mixed partial `∂^α_x ∂^β_y` with `|α| ≤ x_order`
//! (at most 1) and `|β| ≤ y_order`. Internally it is `1 + nx·x_order` blocks,
//! each a truncated polynomial in the fiber displacement: block 0 is the
//! value part, block `1 + i` the coefficient of the base displacement `ε_i`
//! (with `ε_i ε_j = 0`). Arithmetic propagates through the expression tree,
//! so results are exact up to round-off.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{DomainViolation, Error, NodePath, Result};
use crate::expr::{integer_exponent, Expr, Univariate};
use crate::math;
use crate::poly::PolySpace;

/// Largest number of base-coordinate derivatives a jet can carry.
pub const X_ORDER_CAP: usize = 1;
/// Largest number of fiber-coordinate derivatives a jet can carry.
pub const Y_ORDER_CAP: usize = 6;

/// Sorted multiset of coordinate indices (0-based) naming a mixed partial.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
}

impl MultiIndex {
    pub fn new(mut x: Vec<usize>, mut y: Vec<usize>) -> Self {
        x.sort_unstable();
        y.sort_unstable();
        Self { x, y }
    }

    pub fn fiber(y: &[usize]) -> Self {
        Self::new(Vec::new(), y.to_vec())
    }

    pub fn mixed(x: &[usize], y: &[usize]) -> Self {
        Self::new(x.to_vec(), y.to_vec())
    }

    pub fn order(&self) -> usize {
        self.x.len() + self.y.len()
    }
}

#[derive(Debug, Clone)]
pub struct JetSpace {
    nx: usize,
    x_order: usize,
    poly: Arc<PolySpace>,
}

impl JetSpace {
    pub fn new(nx: usize, ny: usize, x_order: usize, y_order: usize) -> Result<Self> {
        if x_order > X_ORDER_CAP || y_order > Y_ORDER_CAP {
            return Err(Error::OrderExceeded {
                x_order,
                y_order,
                x_cap: X_ORDER_CAP,
                y_cap: Y_ORDER_CAP,
            });
        }
        Ok(Self { nx, x_order, poly: Arc::new(PolySpace::new(ny, y_order)) })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.poly.nvars()
    }

    pub fn x_order(&self) -> usize {
        self.x_order
    }

    pub fn y_order(&self) -> usize {
        self.poly.order()
    }

    pub fn poly(&self) -> &Arc<PolySpace> {
        &self.poly
    }

    fn blocks(&self) -> usize {
        1 + self.nx * self.x_order
    }

    fn block_len(&self) -> usize {
        self.poly.len()
    }

    fn constant(&self, c: f64) -> Vec<f64> {
        let mut v = vec![0.0; self.blocks() * self.block_len()];
        v[0] = c;
        v
    }

    fn mul(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let m = self.block_len();
        let mut out = vec![0.0; a.len()];
        let (a0, b0) = (&a[..m], &b[..m]);
        self.poly.mul_acc(a0, b0, &mut out[..m]);
        for blk in 1..self.blocks() {
            let r = blk * m..(blk + 1) * m;
            let o = &mut out[r.clone()];
            self.poly.mul_acc(a0, &b[r.clone()], o);
            self.poly.mul_acc(&a[r], b0, o);
        }
        out
    }

    /// `Σ_k t_k (a - a(0))^k` where `t_k = f^{(k)}(a(0))/k!`.
    fn compose(&self, a: &[f64], taylor: &[f64]) -> Vec<f64> {
        let mut h = a.to_vec();
        h[0] = 0.0;
        let mut acc = self.constant(*taylor.last().unwrap_or(&0.0));
        for &t in taylor.iter().rev().skip(1) {
            acc = self.mul(&acc, &h);
            acc[0] += t;
        }
        acc
    }

    fn terms(&self) -> usize {
        self.x_order + self.poly.order()
    }

    /// Raw coefficient vector of the jet of `expr` at `(x, y)`.
    pub(crate) fn evaluate_raw(&self, expr: &Expr, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.nx || y.len() != self.ny() {
            return Err(Error::Dimension(alloc::format!(
                "jet space expects ({}, {}) coordinates, got ({}, {})",
                self.nx,
                self.ny(),
                x.len(),
                y.len()
            )));
        }
        expr.check_dimensions(self.nx, self.ny())?;
        let mut path = Vec::new();
        self.eval_node(expr, x, y, &mut path)
    }

    pub fn evaluate(&self, expr: &Expr, x: &[f64], y: &[f64]) -> Result<Jet> {
        let coeffs = self.evaluate_raw(expr, x, y)?;
        Ok(Jet { space: self.clone(), x: x.to_vec(), y: y.to_vec(), coeffs })
    }

    fn eval_node(&self, e: &Expr, x: &[f64], y: &[f64], path: &mut Vec<usize>) -> Result<Vec<f64>> {
        let m = self.block_len();
        let mut child = |c: &Expr, k: usize| -> Result<Vec<f64>> {
            path.push(k);
            let v = self.eval_node(c, x, y, path);
            path.pop();
            v
        };
        let fail = |path: &Vec<usize>, node: &'static str, violation| Error::Domain {
            path: NodePath(path.clone()),
            node,
            violation,
        };
        Ok(match e {
            Expr::Const(c) => self.constant(*c),
            Expr::X(i) => {
                let mut v = self.constant(x[*i]);
                if self.x_order == 1 {
                    v[(1 + i) * m] = 1.0;
                }
                v
            }
            Expr::Y(i) => {
                let mut v = self.constant(y[*i]);
                if self.poly.order() >= 1 {
                    v[1 + i] = 1.0;
                }
                v
            }
            Expr::Sum(items) => {
                let mut acc = self.constant(0.0);
                for (k, c) in items.iter().enumerate() {
                    let v = child(c, k)?;
                    acc.iter_mut().zip(&v).for_each(|(a, b)| *a += b);
                }
                acc
            }
            Expr::Product(items) => {
                let mut acc = self.constant(1.0);
                for (k, c) in items.iter().enumerate() {
                    let v = child(c, k)?;
                    acc = self.mul(&acc, &v);
                }
                acc
            }
            Expr::Pow(base, p) => {
                let b = child(base, 0)?;
                match integer_exponent(*p) {
                    Some(k) => {
                        let mut acc = self.constant(1.0);
                        let mut sq = b;
                        let mut k = k;
                        while k > 0 {
                            if k & 1 == 1 {
                                acc = self.mul(&acc, &sq);
                            }
                            k >>= 1;
                            if k > 0 {
                                sq = self.mul(&sq, &sq);
                            }
                        }
                        acc
                    }
                    None => {
                        if b[0] <= 0.0 {
                            return Err(fail(path, "pow", DomainViolation::NonPositivePowBase(b[0])));
                        }
                        self.compose(&b, &pow_taylor(b[0], *p, self.terms()))
                    }
                }
            }
            Expr::Quotient(num, den) => {
                let a = child(num, 0)?;
                let b = child(den, 1)?;
                if b[0] == 0.0 {
                    return Err(fail(path, "quotient", DomainViolation::ZeroDenominator));
                }
                let r = self.compose(&b, &pow_taylor(b[0], -1.0, self.terms()));
                let mut q = self.mul(&a, &r);
                q[0] = a[0] / b[0];
                q
            }
            Expr::Exp(a) => {
                let v = child(a, 0)?;
                let e0 = math::exp(v[0]);
                let t: Vec<f64> = (0..=self.terms()).map(|k| e0 / math::factorial(k)).collect();
                self.compose(&v, &t)
            }
            Expr::Sqrt(a) => {
                let v = child(a, 0)?;
                if v[0] <= 0.0 {
                    return Err(fail(path, "sqrt", DomainViolation::NonPositiveSqrt(v[0])));
                }
                let mut t = pow_taylor(v[0], 0.5, self.terms());
                t[0] = math::sqrt(v[0]);
                self.compose(&v, &t)
            }
            Expr::Func(u, a) => {
                let v = child(a, 0)?;
                let n = self.terms();
                let t: Vec<f64> = match u {
                    Univariate::Ln => {
                        if v[0] <= 0.0 {
                            return Err(fail(path, "ln", DomainViolation::NonPositiveLog(v[0])));
                        }
                        (0..=n)
                            .map(|k| {
                                if k == 0 {
                                    math::ln(v[0])
                                } else {
                                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                                    sign / (k as f64 * math::powi(v[0], k as u32))
                                }
                            })
                            .collect()
                    }
                    Univariate::Sin | Univariate::Cos => {
                        let (s, c) = (math::sin(v[0]), math::cos(v[0]));
                        // derivative cycle of sin: s, c, -s, -c
                        let cycle = match u {
                            Univariate::Sin => [s, c, -s, -c],
                            _ => [c, -s, -c, s],
                        };
                        (0..=n).map(|k| cycle[k % 4] / math::factorial(k)).collect()
                    }
                };
                self.compose(&v, &t)
            }
        })
    }
}

/// Taylor coefficients of `t ↦ t^p` at `t = a`: `C(p, k) a^{p-k}`.
fn pow_taylor(a: f64, p: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut binom = 1.0;
    for k in 0..=n {
        out.push(binom * math::powf(a, p - k as f64));
        binom *= (p - k as f64) / (k as f64 + 1.0);
    }
    out
}

/// Mixed partials of a scalar expression at one point.
#[derive(Debug, Clone)]
pub struct Jet {
    space: JetSpace,
    x: Vec<f64>,
    y: Vec<f64>,
    coeffs: Vec<f64>,
}

impl Jet {
    pub fn base_point(&self) -> &[f64] {
        &self.x
    }

    pub fn fiber_point(&self) -> &[f64] {
        &self.y
    }

    pub fn orders(&self) -> (usize, usize) {
        (self.space.x_order(), self.space.y_order())
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Plain derivative value `∂^α_x ∂^β_y` (not divided by factorials).
    /// Indices may be given in any order.
    pub fn derivative(&self, idx: &MultiIndex) -> Result<f64> {
        let (xo, yo) = self.orders();
        if idx.x.len() > xo || idx.y.len() > yo {
            return Err(Error::OrderExceeded {
                x_order: idx.x.len(),
                y_order: idx.y.len(),
                x_cap: xo,
                y_cap: yo,
            });
        }
        let m = self.space.block_len();
        let block = match idx.x.first() {
            None => 0,
            Some(&i) if i < self.space.nx() => 1 + i,
            Some(&i) => {
                return Err(Error::CoordinateIndex { kind: 'x', index: i + 1, dimension: self.space.nx() })
            }
        };
        if let Some(&j) = idx.y.iter().find(|&&j| j >= self.space.ny()) {
            return Err(Error::CoordinateIndex { kind: 'y', index: j + 1, dimension: self.space.ny() });
        }
        let poly = &self.coeffs[block * m..(block + 1) * m];
        Ok(self.space.poly().derivative_at_origin(poly, &idx.y))
    }

    /// Every stored coefficient as `(multi-index, derivative value)`, one entry
    /// per sorted multi-index.
    pub fn coefficients(&self) -> Vec<(MultiIndex, f64)> {
        let poly = self.space.poly();
        let m = poly.len();
        let mut out = Vec::with_capacity(self.coeffs.len());
        for blk in 0..self.space.blocks() {
            let x: Vec<usize> = if blk == 0 { Vec::new() } else { vec![blk - 1] };
            for r in 0..m {
                let y: Vec<usize> = poly
                    .monomial(r)
                    .iter()
                    .enumerate()
                    .flat_map(|(v, &e)| core::iter::repeat_n(v, e as usize))
                    .collect();
                out.push((MultiIndex::new(x.clone(), y), self.coeffs[blk * m + r] * poly.multiplicity(r)));
            }
        }
        out
    }
}

/// Evaluates all mixed partials of `expr` at `(x, y)` up to the given orders.
pub fn jet_eval(expr: &Expr, x: &[f64], y: &[f64], x_order: usize, y_order: usize) -> Result<Jet> {
    JetSpace::new(x.len(), y.len(), x_order, y_order)?.evaluate(expr, x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn square_second_derivative() {
        let j = jet_eval(&Expr::y(0).square(), &[0.0], &[3.0], 0, 2).unwrap();
        assert_eq!(j.derivative(&MultiIndex::fiber(&[0, 0])).unwrap(), 2.0);
        assert_eq!(j.value(), 9.0);
    }

    #[test]
    fn mixed_base_fiber_derivative() {
        let e = Expr::x(0) * Expr::y(0).square();
        let j = jet_eval(&e, &[2.0], &[3.0], 1, 1).unwrap();
        assert_eq!(j.derivative(&MultiIndex::mixed(&[0], &[0])).unwrap(), 6.0);
    }

    #[test]
    fn euclidean_norm_gradient() {
        let e = (Expr::y(0).square() + Expr::y(1).square()).sqrt();
        let j = jet_eval(&e, &[], &[3.0, 4.0], 0, 1).unwrap();
        assert!(close(j.derivative(&MultiIndex::fiber(&[0])).unwrap(), 0.6, 1e-15));
    }

    #[test]
    fn unsorted_requests_agree() {
        let e = (Expr::y(0).powf(3.0) * Expr::y(1) + Expr::y(1).exp()).sqrt();
        let j = jet_eval(&e, &[], &[1.2, 0.4], 0, 4).unwrap();
        let a = j.derivative(&MultiIndex { x: vec![], y: vec![1, 0, 0, 1] }).unwrap();
        let b = j.derivative(&MultiIndex::fiber(&[0, 0, 1, 1])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exp_and_log_chain() {
        // d^4/dy^4 exp(2y) = 16 exp(2y); d^3/dy^3 ln(y) = 2/y^3
        let j = jet_eval(&(2.0 * Expr::y(0)).exp(), &[], &[0.5], 0, 4).unwrap();
        let want = 16.0 * libm::exp(1.0);
        assert!(close(j.derivative(&MultiIndex::fiber(&[0; 4])).unwrap(), want, 1e-12 * want));
        let j = jet_eval(&Expr::y(0).ln(), &[], &[2.0], 0, 3).unwrap();
        assert!(close(j.derivative(&MultiIndex::fiber(&[0; 3])).unwrap(), 0.25, 1e-15));
    }

    #[test]
    fn trig_derivatives() {
        let j = jet_eval(&Expr::y(0).sin(), &[], &[0.3], 0, 5).unwrap();
        let d5 = j.derivative(&MultiIndex::fiber(&[0; 5])).unwrap();
        assert!(close(d5, libm::cos(0.3), 1e-14));
        let j = jet_eval(&Expr::x(0).cos(), &[0.3], &[], 1, 0).unwrap();
        assert!(close(j.derivative(&MultiIndex::mixed(&[0], &[])).unwrap(), -libm::sin(0.3), 1e-15));
    }

    #[test]
    fn quotient_and_power_rules() {
        // f = y0 / (1 + y0^2); f' = (1 - y0^2)/(1 + y0^2)^2
        let e = Expr::y(0) / (1.0 + Expr::y(0).square());
        let j = jet_eval(&e, &[], &[0.5], 0, 1).unwrap();
        assert!(close(j.derivative(&MultiIndex::fiber(&[0])).unwrap(), 0.75 / 1.5625, 1e-15));
        // (y0)^{2.5}: second derivative 3.75 y^{0.5}
        let j = jet_eval(&Expr::y(0).powf(2.5), &[], &[4.0], 0, 2).unwrap();
        assert!(close(j.derivative(&MultiIndex::fiber(&[0, 0])).unwrap(), 7.5, 1e-13));
    }

    #[test]
    fn caps_are_enforced() {
        assert!(matches!(
            jet_eval(&Expr::y(0), &[0.0], &[1.0], 2, 1),
            Err(Error::OrderExceeded { .. })
        ));
        assert!(matches!(
            jet_eval(&Expr::y(0), &[0.0], &[1.0], 0, 7),
            Err(Error::OrderExceeded { .. })
        ));
    }

    #[test]
    fn domain_error_propagates() {
        let e = (Expr::y(0).square() + Expr::y(1).square()).sqrt();
        assert!(matches!(jet_eval(&e, &[], &[0.0, 0.0], 0, 2), Err(Error::Domain { .. })));
    }

    #[test]
    fn zero_multi_index_is_plain_value() {
        let e = Expr::x(0).exp() * (Expr::y(0).square() + 1.0).sqrt();
        let j = jet_eval(&e, &[0.2], &[0.7], 1, 3).unwrap();
        let plain = e.eval(&[0.2], &[0.7]).unwrap();
        assert_eq!(j.derivative(&MultiIndex::fiber(&[])).unwrap(), plain);
        assert_eq!(j.coefficients()[0].1, plain);
    }
}
