//! Closed-form scalar expressions over base coordinates `x` and fiber
//! coordinates `y`.
//!
//! Every metric, warping function and reconstruction coefficient in this crate
//! is an [`Expr`]. Trees are finite by construction (owned boxes, no sharing).
//! Coordinate indices are 0-based in memory; `Display` and the JSON format
//! use 1-based indices.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{DomainViolation, Error, NodePath, Result};
use crate::math;

/// Named univariate functions beyond `exp` and `sqrt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Univariate {
    Ln,
    Sin,
    Cos,
}

impl Univariate {
    pub fn name(self) -> &'static str {
        match self {
            Self::Ln => "ln",
            Self::Sin => "sin",
            Self::Cos => "cos",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "ln" | "log" => Some(Self::Ln),
            "sin" => Some(Self::Sin),
            "cos" => Some(Self::Cos),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// Base coordinate `x^i` (0-based).
    X(usize),
    /// Fiber coordinate `y^i` (0-based).
    Y(usize),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    /// `base^exponent` for a real exponent. Non-integer exponents require a
    /// strictly positive base.
    Pow(Box<Expr>, f64),
    Quotient(Box<Expr>, Box<Expr>),
    Exp(Box<Expr>),
    Sqrt(Box<Expr>),
    Func(Univariate, Box<Expr>),
}

/// Exponents that are small non-negative integers are evaluated by repeated
/// multiplication and accept any base.
pub(crate) fn integer_exponent(p: f64) -> Option<u32> {
    if (0.0..=64.0).contains(&p) && p == (p as u32) as f64 {
        Some(p as u32)
    } else {
        None
    }
}

impl Expr {
    pub fn x(i: usize) -> Self {
        Expr::X(i)
    }

    pub fn y(i: usize) -> Self {
        Expr::Y(i)
    }

    pub fn constant(c: f64) -> Self {
        Expr::Const(c)
    }

    pub fn powf(self, p: f64) -> Self {
        Expr::Pow(Box::new(self), p)
    }

    pub fn square(self) -> Self {
        self.powf(2.0)
    }

    pub fn exp(self) -> Self {
        Expr::Exp(Box::new(self))
    }

    pub fn sqrt(self) -> Self {
        Expr::Sqrt(Box::new(self))
    }

    pub fn ln(self) -> Self {
        Expr::Func(Univariate::Ln, Box::new(self))
    }

    pub fn sin(self) -> Self {
        Expr::Func(Univariate::Sin, Box::new(self))
    }

    pub fn cos(self) -> Self {
        Expr::Func(Univariate::Cos, Box::new(self))
    }

    /// Short name of the node kind, as used in the JSON format.
    pub fn kind(&self) -> &'static str {
        match self {
            Expr::Const(_) => "const",
            Expr::X(_) => "x",
            Expr::Y(_) => "y",
            Expr::Sum(_) => "sum",
            Expr::Product(_) => "product",
            Expr::Pow(..) => "pow",
            Expr::Quotient(..) => "quotient",
            Expr::Exp(_) => "exp",
            Expr::Sqrt(_) => "sqrt",
            Expr::Func(u, _) => u.name(),
        }
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Const(_) | Expr::X(_) | Expr::Y(_) => Vec::new(),
            Expr::Sum(v) | Expr::Product(v) => v.iter().collect(),
            Expr::Pow(a, _) | Expr::Exp(a) | Expr::Sqrt(a) | Expr::Func(_, a) => vec![&**a],
            Expr::Quotient(a, b) => vec![&**a, &**b],
        }
    }

    /// One past the largest base-coordinate index referenced (0 when none).
    pub fn x_extent(&self) -> usize {
        match self {
            Expr::X(i) => i + 1,
            _ => self.children().iter().map(|c| c.x_extent()).max().unwrap_or(0),
        }
    }

    /// One past the largest fiber-coordinate index referenced (0 when none).
    pub fn y_extent(&self) -> usize {
        match self {
            Expr::Y(i) => i + 1,
            _ => self.children().iter().map(|c| c.y_extent()).max().unwrap_or(0),
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(|c| c.node_count()).sum::<usize>()
    }

    /// Checks that every coordinate index fits the declared dimensions.
    pub fn check_dimensions(&self, nx: usize, ny: usize) -> Result<()> {
        let (ex, ey) = (self.x_extent(), self.y_extent());
        if ex > nx {
            return Err(Error::CoordinateIndex { kind: 'x', index: ex, dimension: nx });
        }
        if ey > ny {
            return Err(Error::CoordinateIndex { kind: 'y', index: ey, dimension: ny });
        }
        Ok(())
    }

    /// Rewrites coordinate indices: `x^i -> x^{x_map(i)}`, `y^i -> y^{y_map(i)}`.
    pub fn remap(&self, x_map: &dyn Fn(usize) -> usize, y_map: &dyn Fn(usize) -> usize) -> Expr {
        let r = |e: &Expr| Box::new(e.remap(x_map, y_map));
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::X(i) => Expr::X(x_map(*i)),
            Expr::Y(i) => Expr::Y(y_map(*i)),
            Expr::Sum(v) => Expr::Sum(v.iter().map(|e| e.remap(x_map, y_map)).collect()),
            Expr::Product(v) => Expr::Product(v.iter().map(|e| e.remap(x_map, y_map)).collect()),
            Expr::Pow(a, p) => Expr::Pow(r(a), *p),
            Expr::Quotient(a, b) => Expr::Quotient(r(a), r(b)),
            Expr::Exp(a) => Expr::Exp(r(a)),
            Expr::Sqrt(a) => Expr::Sqrt(r(a)),
            Expr::Func(u, a) => Expr::Func(*u, r(a)),
        }
    }

    /// Shifts all coordinate indices by `offset` (used to embed a factor's
    /// expression into a product chart).
    pub fn shifted(&self, offset: usize) -> Expr {
        self.remap(&|i| i + offset, &|i| i + offset)
    }

    /// Plain floating-point evaluation.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let mut path = Vec::new();
        self.eval_at(x, y, &mut path)
    }

    fn eval_at(&self, x: &[f64], y: &[f64], path: &mut Vec<usize>) -> Result<f64> {
        let child = |e: &Expr, k: usize, path: &mut Vec<usize>| -> Result<f64> {
            path.push(k);
            let v = e.eval_at(x, y, path)?;
            path.pop();
            Ok(v)
        };
        let fail = |path: &Vec<usize>, node: &'static str, violation| Error::Domain {
            path: NodePath(path.clone()),
            node,
            violation,
        };
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::X(i) => *x.get(*i).ok_or(Error::CoordinateIndex {
                kind: 'x',
                index: i + 1,
                dimension: x.len(),
            })?,
            Expr::Y(i) => *y.get(*i).ok_or(Error::CoordinateIndex {
                kind: 'y',
                index: i + 1,
                dimension: y.len(),
            })?,
            Expr::Sum(v) => {
                let mut s = 0.0;
                for (k, e) in v.iter().enumerate() {
                    s += child(e, k, path)?;
                }
                s
            }
            Expr::Product(v) => {
                let mut s = 1.0;
                for (k, e) in v.iter().enumerate() {
                    s *= child(e, k, path)?;
                }
                s
            }
            Expr::Pow(a, p) => {
                let b = child(a, 0, path)?;
                match integer_exponent(*p) {
                    Some(k) => math::powi(b, k),
                    None if b > 0.0 => math::powf(b, *p),
                    None => return Err(fail(path, "pow", DomainViolation::NonPositivePowBase(b))),
                }
            }
            Expr::Quotient(a, b) => {
                let num = child(a, 0, path)?;
                let den = child(b, 1, path)?;
                if den == 0.0 {
                    return Err(fail(path, "quotient", DomainViolation::ZeroDenominator));
                }
                num / den
            }
            Expr::Exp(a) => math::exp(child(a, 0, path)?),
            Expr::Sqrt(a) => {
                let v = child(a, 0, path)?;
                if v <= 0.0 {
                    return Err(fail(path, "sqrt", DomainViolation::NonPositiveSqrt(v)));
                }
                math::sqrt(v)
            }
            Expr::Func(u, a) => {
                let v = child(a, 0, path)?;
                match u {
                    Univariate::Ln => {
                        if v <= 0.0 {
                            return Err(fail(path, "ln", DomainViolation::NonPositiveLog(v)));
                        }
                        math::ln(v)
                    }
                    Univariate::Sin => math::sin(v),
                    Univariate::Cos => math::cos(v),
                }
            }
        })
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, v: &[Expr], sep: &str| -> fmt::Result {
            f.write_str("(")?;
            for (k, e) in v.iter().enumerate() {
                if k > 0 {
                    f.write_str(sep)?;
                }
                write!(f, "{e}")?;
            }
            f.write_str(")")
        };
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::X(i) => write!(f, "x{}", i + 1),
            Expr::Y(i) => write!(f, "y{}", i + 1),
            Expr::Sum(v) => join(f, v, " + "),
            Expr::Product(v) => join(f, v, "*"),
            Expr::Pow(a, p) => write!(f, "{a}^{p}"),
            Expr::Quotient(a, b) => write!(f, "({a} / {b})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
            Expr::Func(u, a) => write!(f, "{}({a})", u.name()),
        }
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Self {
        Expr::Const(c)
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        match self {
            Expr::Sum(mut v) => {
                v.push(rhs);
                Expr::Sum(v)
            }
            lhs => Expr::Sum(vec![lhs, rhs]),
        }
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        match self {
            Expr::Product(mut v) => {
                v.push(rhs);
                Expr::Product(v)
            }
            lhs => Expr::Product(vec![lhs, rhs]),
        }
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Product(vec![Expr::Const(-1.0), self])
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        self + (-rhs)
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Quotient(Box::new(self), Box::new(rhs))
    }
}

impl Mul<Expr> for f64 {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Product(vec![Expr::Const(self), rhs])
    }
}

impl Add<Expr> for f64 {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Sum(vec![Expr::Const(self), rhs])
    }
}

impl Add<f64> for Expr {
    type Output = Expr;
    fn add(self, rhs: f64) -> Expr {
        self + Expr::Const(rhs)
    }
}

impl Sub<f64> for Expr {
    type Output = Expr;
    fn sub(self, rhs: f64) -> Expr {
        self + Expr::Const(-rhs)
    }
}

impl Mul<f64> for Expr {
    type Output = Expr;
    fn mul(self, rhs: f64) -> Expr {
        self * Expr::Const(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_randers_norm() {
        let f = (Expr::y(0).square() + Expr::y(1).square()).sqrt() + 0.5 * Expr::y(0);
        let v = f.eval(&[], &[3.0, 4.0]).unwrap();
        assert!((v - 6.5).abs() < 1e-15);
    }

    #[test]
    fn sqrt_of_zero_reports_offending_node() {
        let f = Expr::constant(2.0) + (Expr::y(0).square() + Expr::y(1).square()).sqrt();
        let err = f.eval(&[], &[0.0, 0.0]).unwrap_err();
        match err {
            Error::Domain { path, node, violation } => {
                assert_eq!(path, NodePath(vec![1]));
                assert_eq!(node, "sqrt");
                assert_eq!(violation, DomainViolation::NonPositiveSqrt(0.0));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn quotient_by_zero_is_domain_error() {
        let f = Expr::constant(1.0) / Expr::y(0);
        assert!(matches!(
            f.eval(&[], &[0.0]),
            Err(Error::Domain { violation: DomainViolation::ZeroDenominator, .. })
        ));
    }

    #[test]
    fn integer_powers_accept_negative_bases() {
        let f = Expr::y(0).powf(3.0);
        assert_eq!(f.eval(&[], &[-2.0]).unwrap(), -8.0);
        let g = Expr::y(0).powf(0.5);
        assert!(g.eval(&[], &[-2.0]).is_err());
    }

    #[test]
    fn extents_and_remap() {
        let f = Expr::x(1) * Expr::y(0);
        assert_eq!((f.x_extent(), f.y_extent()), (2, 1));
        assert!(f.check_dimensions(1, 1).is_err());
        let g = f.shifted(2);
        assert_eq!(g, Expr::x(3) * Expr::y(2));
        assert_eq!(alloc::format!("{g}"), "(x4*y3)");
    }
}
