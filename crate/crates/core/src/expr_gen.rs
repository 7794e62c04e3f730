//! Seeded random expression trees for engine cross-validation.
//!
//! Every generated tree is smooth on all of `ℝⁿ`: square roots, logarithms
//! and quotients only ever see arguments of the form `1 + e²`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::expr::{Expr, Univariate};
use crate::jet::MultiIndex;

fn leaf<R: Rng>(rng: &mut R, nx: usize, ny: usize) -> Expr {
    let pick = rng.random_range(0..nx + ny + 1);
    if pick < nx {
        Expr::x(pick)
    } else if pick < nx + ny {
        Expr::y(pick - nx)
    } else {
        Expr::constant(libm::round(rng.random_range(-2.0..2.0) * 100.0) / 100.0)
    }
}

fn positive(e: Expr) -> Expr {
    1.0 + e.square()
}

/// Random tree of at most `depth` levels. With `polynomial` set only sums,
/// products and integer powers are used.
pub fn random_expr<R: Rng>(rng: &mut R, depth: usize, nx: usize, ny: usize, polynomial: bool) -> Expr {
    if depth == 0 || rng.random_bool(0.25) {
        return leaf(rng, nx, ny);
    }
    let kinds = if polynomial { 3 } else { 9 };
    let sub = |rng: &mut R| random_expr(rng, depth - 1, nx, ny, polynomial);
    match rng.random_range(0..kinds) {
        0 => Expr::Sum(vec![sub(rng), sub(rng)]),
        1 => Expr::Product(vec![sub(rng), sub(rng)]),
        2 => Expr::Pow(Box::new(sub(rng)), rng.random_range(2..=3) as f64),
        3 => Expr::Exp(Box::new(0.5 * sub(rng))),
        4 => Expr::Sqrt(Box::new(positive(sub(rng)))),
        5 => Expr::Quotient(Box::new(sub(rng)), Box::new(positive(sub(rng)))),
        6 => Expr::Func(Univariate::Sin, Box::new(sub(rng))),
        7 => Expr::Func(Univariate::Cos, Box::new(sub(rng))),
        _ => Expr::Func(Univariate::Ln, Box::new(positive(sub(rng)))),
    }
}

/// Uniform point in `[-1, 1]ⁿ`.
pub fn random_point<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// Mixed index with at most `max_x` base and `max_y` fiber slots.
pub fn random_multi_index<R: Rng>(rng: &mut R, nx: usize, ny: usize, max_x: usize, max_y: usize) -> MultiIndex {
    let kx = if nx == 0 { 0 } else { rng.random_range(0..=max_x) };
    let ky = rng.random_range(0..=max_y);
    let x = (0..kx).map(|_| rng.random_range(0..nx)).collect();
    let y = (0..ky).map(|_| rng.random_range(0..ny)).collect();
    MultiIndex::new(x, y)
}
