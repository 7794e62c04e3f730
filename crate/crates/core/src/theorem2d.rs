//! The two-dimensional rigidity pipeline: a nonconstant `f` with
//! `∂g^{ij}/∂y^k ∂f/∂x^i = 0` forces `g^{ij} ∂_j f = c^i(x)`, whence `F²`
//! solves the characteristic equation
//!
//! ```text
//! c¹ ∂u/∂y¹ + c² ∂u/∂y² = 2A₁y¹ + 2A₂y²,   A = ∇f,
//! ```
//!
//! whose 2-homogeneous solutions are
//! `u = (A₁/c¹)(y¹)² + (A₂/c²)(y²)² + a(c²y¹ − c¹y²)²`, a quadratic form.
//! This module rebuilds `u` from `(c, A, a)` and checks every step
//! numerically, ending with the vanishing Cartan tensor.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fd::fd_partial;
use crate::geometry::{Depth, FinslerEvaluator};
use crate::jet::{jet_eval, MultiIndex};
use crate::linalg::symmetric_eigenvalues;
use crate::math;
use crate::metric::{MetricSpec, Point};
use crate::sampling::{next_direction, SamplingPolicy};
use crate::warped::value_and_gradient;

/// Stage tolerances of [`verify_main_theorem`].
pub const CHARACTERISTIC_TOLERANCE: f64 = 1e-10;
pub const CONDITION_TOLERANCE: f64 = 1e-8;
pub const CARTAN_TOLERANCE: f64 = 1e-8;
pub const CONSISTENCY_TOLERANCE: f64 = 1e-9;
pub const FIBER_INDEPENDENCE_TOLERANCE: f64 = 1e-10;
pub const HOMOGENEITY_TOLERANCE: f64 = 1e-10;
pub const INTEGRABILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem2DCase {
    /// `c¹, c²` over `x`.
    pub c: [Expr; 2],
    /// `A₁, A₂` over `x`; must form a gradient.
    pub a_grad: [Expr; 2],
    /// Coefficient of `φ(t) = a t²`.
    pub a: f64,
    pub chart_box: Vec<(f64, f64)>,
}

impl Theorem2DCase {
    pub fn new(c: [Expr; 2], a_grad: [Expr; 2], a: f64, chart_box: Vec<(f64, f64)>) -> Result<Self> {
        if chart_box.len() != 2 {
            return Err(Error::InvalidCase(format!("chart box has {} intervals, expected 2", chart_box.len())));
        }
        if !a.is_finite() {
            return Err(Error::InvalidCase("a is not finite".into()));
        }
        for e in c.iter().chain(&a_grad) {
            e.check_dimensions(2, 0)?;
        }
        Ok(Self { c, a_grad, a, chart_box })
    }

    pub fn c_at(&self, x: &[f64]) -> Result<[f64; 2]> {
        Ok([self.c[0].eval(x, &[])?, self.c[1].eval(x, &[])?])
    }

    pub fn a_at(&self, x: &[f64]) -> Result<[f64; 2]> {
        Ok([self.a_grad[0].eval(x, &[])?, self.a_grad[1].eval(x, &[])?])
    }

    /// Row-major matrix `Q` with `u = yᵀQy`.
    pub fn quadratic_form(&self, x: &[f64]) -> Result<[f64; 4]> {
        let [c1, c2] = self.c_at(x)?;
        let [a1, a2] = self.a_at(x)?;
        if c1 == 0.0 || c2 == 0.0 {
            return Err(Error::NotFinsler(format!("c = ({c1:e}, {c2:e}) has a zero component at x = {x:?}")));
        }
        let a = self.a;
        Ok([a1 / c1 + a * c2 * c2, -a * c1 * c2, -a * c1 * c2, a2 / c2 + a * c1 * c1])
    }

    /// `u(x, y)` as an expression over the whole chart.
    pub fn f_squared_expr(&self) -> Expr {
        let [c1, c2] = self.c.clone();
        let [a1, a2] = self.a_grad.clone();
        let t = c2.clone() * Expr::y(0) - c1.clone() * Expr::y(1);
        a1 / c1 * Expr::y(0).square() + a2 / c2 * Expr::y(1).square() + self.a * t.square()
    }

    /// Largest `|∂A₁/∂x² − ∂A₂/∂x¹|` over `points`.
    pub fn integrability_defect(&self, points: &[Vec<f64>]) -> Result<f64> {
        let mut worst = 0.0_f64;
        for x in points {
            let (_, g1) = value_and_gradient(&self.a_grad[0], x)?;
            let (_, g2) = value_and_gradient(&self.a_grad[1], x)?;
            worst = worst.max((g1[1] - g2[0]).abs());
        }
        Ok(worst)
    }

    /// `A_i/c^i > 0`, `c ≠ 0` and `Q` positive definite at `x`.
    pub fn check_admissible(&self, x: &[f64]) -> Result<[f64; 2]> {
        let [c1, c2] = self.c_at(x)?;
        let [a1, a2] = self.a_at(x)?;
        if c1 == 0.0 && c2 == 0.0 {
            return Err(Error::NotFinsler(format!("c vanishes at x = {x:?}")));
        }
        let q = self.quadratic_form(x)?;
        for (i, r) in [a1 / c1, a2 / c2].into_iter().enumerate() {
            if !(r > 0.0) {
                return Err(Error::NotFinsler(format!("A{0}/c{0} = {r:e} is not positive at x = {x:?}", i + 1)));
            }
        }
        let ev = symmetric_eigenvalues(&q, 2);
        if !(ev[0] > 0.0) {
            return Err(Error::NotFinsler(format!(
                "reconstructed form is not positive definite at x = {x:?}: eigenvalues {ev:?}"
            )));
        }
        Ok([ev[0], ev[1]])
    }
}

/// `R^j_k = Σ_i ∂g^{ij}/∂y^k ∂f/∂x^i` at one point, row-major `[j][k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionResidual {
    pub point: Point,
    pub residual: Vec<f64>,
    pub sup_norm: f64,
}

pub fn condition_star_residual_from_gradient(m: &MetricSpec, grad: &[f64], x: &[f64], y: &[f64]) -> Result<ConditionResidual> {
    let n = m.dimension;
    if grad.len() != n {
        return Err(Error::Dimension(format!("gradient has {} entries for dimension {n}", grad.len())));
    }
    let (_, dginv) = FinslerEvaluator::new(m, Depth::Metric)?.at(x, y)?.cartan_raised();
    let mut residual = vec![0.0; n * n];
    for j in 0..n {
        for k in 0..n {
            residual[j * n + k] = (0..n).map(|i| dginv.get(&[i, j, k]) * grad[i]).sum();
        }
    }
    let sup_norm = math::max_abs(&residual);
    Ok(ConditionResidual { point: Point::new(x.to_vec(), y.to_vec()), residual, sup_norm })
}

/// Residual of condition (*) for an `x`-only function `f`.
pub fn condition_star_residual(m: &MetricSpec, f: &Expr, x: &[f64], y: &[f64]) -> Result<ConditionResidual> {
    f.check_dimensions(m.dimension, 0)?;
    let (_, grad) = value_and_gradient(f, x)?;
    condition_star_residual_from_gradient(m, &grad, x, y)
}

/// `c¹∂u/∂y¹ + c²∂u/∂y² − 2A₁y¹ − 2A₂y²`.
pub fn characteristic_residual(u: &Expr, case: &Theorem2DCase, x: &[f64], y: &[f64]) -> Result<f64> {
    u.check_dimensions(2, 2)?;
    let jet = jet_eval(u, x, y, 0, 1)?;
    let [c1, c2] = case.c_at(x)?;
    let [a1, a2] = case.a_at(x)?;
    let du1 = jet.derivative(&MultiIndex::fiber(&[0]))?;
    let du2 = jet.derivative(&MultiIndex::fiber(&[1]))?;
    Ok(c1 * du1 + c2 * du2 - 2.0 * a1 * y[0] - 2.0 * a2 * y[1])
}

/// The reconstructed `F²` frozen at `x`: a constant-coefficient metric on
/// the degenerate box `{x}`.
pub fn reconstruct_f2(case: &Theorem2DCase, x: &[f64]) -> Result<MetricSpec> {
    case.check_admissible(x)?;
    let q = case.quadratic_form(x)?;
    let f2 = Expr::Sum(vec![
        q[0] * Expr::y(0).square(),
        (2.0 * q[1]) * (Expr::y(0) * Expr::y(1)),
        q[3] * Expr::y(1).square(),
    ]);
    MetricSpec::new(2, f2, vec![(x[0], x[0]), (x[1], x[1])], format!("reconstructed@{x:?}"))
}

/// `f(x) = ∫ A·dx` along the axis-parallel path from the lower box corner
/// (first along x¹, then x²), by the composite midpoint rule.
#[derive(Debug, Clone)]
pub struct PathPotential<'c> {
    case: &'c Theorem2DCase,
    steps: usize,
}

impl<'c> PathPotential<'c> {
    pub fn new(case: &'c Theorem2DCase, steps: usize) -> Self {
        Self { case, steps: steps.max(1) }
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        let (x0, y0) = (self.case.chart_box[0].0, self.case.chart_box[1].0);
        let leg = |from: f64, to: f64, f: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
            let h = (to - from) / self.steps as f64;
            let mut acc = 0.0;
            for k in 0..self.steps {
                acc += f(from + (k as f64 + 0.5) * h)?;
            }
            Ok(acc * h)
        };
        let first = leg(x0, x[0], &|t| self.case.a_grad[0].eval(&[t, y0], &[]))?;
        let second = leg(y0, x[1], &|s| self.case.a_grad[1].eval(&[x[0], s], &[]))?;
        Ok(first + second)
    }

    /// Central-difference gradient of [`Self::value`].
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        (0..2).map(|i| Ok(fd_partial(|p: &[f64]| self.value(p), x, &[i])?.value)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem2DReport {
    pub seed: u64,
    pub base_points: usize,
    pub samples: usize,
    pub integrability_defect: f64,
    pub min_eigenvalue: f64,
    pub characteristic_residual: f64,
    pub condition_residual: f64,
    pub cartan_sup_norm: f64,
    /// `sup |g⁻¹A − c| / max(1, |c|)`.
    pub consistency: f64,
    /// `sup |g(x, y) − g(x, y')|` for two fiber points.
    pub fiber_independence: f64,
    pub homogeneity: f64,
    /// `sup |∇f_path − A|`, diagnostic only.
    pub gradient_error: f64,
    /// First stage whose bound was exceeded.
    pub failing_stage: Option<&'static str>,
}

impl Theorem2DReport {
    pub fn passed(&self) -> bool {
        self.failing_stage.is_none()
    }

    /// `(stage, value, tolerance)` in pipeline order.
    pub fn stages(&self) -> [(&'static str, f64, f64); 6] {
        [
            ("characteristic", self.characteristic_residual, CHARACTERISTIC_TOLERANCE),
            ("homogeneity", self.homogeneity, HOMOGENEITY_TOLERANCE),
            ("consistency", self.consistency, CONSISTENCY_TOLERANCE),
            ("fiber_independence", self.fiber_independence, FIBER_INDEPENDENCE_TOLERANCE),
            ("condition", self.condition_residual, CONDITION_TOLERANCE),
            ("cartan", self.cartan_sup_norm, CARTAN_TOLERANCE),
        ]
    }
}

/// Runs the full pipeline on `policy.x_count` base points with
/// `policy.y_count` fiber directions each.
pub fn verify_main_theorem(case: &Theorem2DCase, policy: &SamplingPolicy) -> Result<Theorem2DReport> {
    let bases = policy.base_points(&case.chart_box);
    let defect = case.integrability_defect(&bases)?;
    if defect > INTEGRABILITY_TOLERANCE {
        return Err(Error::InvalidCase(format!(
            "A is not a gradient: |∂A1/∂x2 − ∂A2/∂x1| = {defect:e} > {INTEGRABILITY_TOLERANCE:e}"
        )));
    }
    let potential = PathPotential::new(case, 1024);
    let u = case.f_squared_expr();
    let mut report = Theorem2DReport {
        seed: policy.seed,
        base_points: bases.len(),
        samples: 0,
        integrability_defect: defect,
        min_eigenvalue: f64::INFINITY,
        characteristic_residual: 0.0,
        condition_residual: 0.0,
        cartan_sup_norm: 0.0,
        consistency: 0.0,
        fiber_independence: 0.0,
        homogeneity: 0.0,
        gradient_error: 0.0,
        failing_stage: None,
    };
    let mut cursor = policy.seed.wrapping_mul(7919) % 1_000_003;
    for x in &bases {
        let ev = case.check_admissible(x)?;
        report.min_eigenvalue = report.min_eigenvalue.min(ev[0]);
        let m = reconstruct_f2(case, x)?;
        let eval = FinslerEvaluator::new(&m, Depth::Metric)?;
        let grad = potential.gradient(x)?;
        let a = case.a_at(x)?;
        let c = case.c_at(x)?;
        report.gradient_error = report.gradient_error.max((grad[0] - a[0]).abs().max((grad[1] - a[1]).abs()));

        let mut reference: Option<Vec<f64>> = None;
        for _ in 0..policy.y_count {
            let y = next_direction(2, &mut cursor);
            report.samples += 1;
            report.characteristic_residual =
                report.characteristic_residual.max(characteristic_residual(&u, case, x, &y)?.abs());
            let uy = u.eval(x, &y)?;
            for lambda in [0.5, 2.0, 3.0] {
                let ys = [lambda * y[0], lambda * y[1]];
                let err = (u.eval(x, &ys)? - lambda * lambda * uy).abs() / (lambda * lambda * uy.abs().max(1.0));
                report.homogeneity = report.homogeneity.max(err);
            }
            let geo = eval.at(x, &y)?;
            report.cartan_sup_norm = report.cartan_sup_norm.max(geo.cartan().sup_norm());
            let r = condition_star_residual_from_gradient(&m, &grad, x, &y)?;
            report.condition_residual = report.condition_residual.max(r.sup_norm);
            let gi = geo.g_inverse();
            let scale = c[0].abs().max(c[1].abs()).max(1.0);
            for i in 0..2 {
                let v = gi[i * 2] * a[0] + gi[i * 2 + 1] * a[1];
                report.consistency = report.consistency.max((v - c[i]).abs() / scale);
            }
            match &reference {
                None => reference = Some(geo.g().to_vec()),
                Some(g0) => {
                    let d = g0.iter().zip(geo.g()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
                    report.fiber_independence = report.fiber_independence.max(d);
                }
            }
        }
    }
    report.failing_stage = report.stages().iter().find(|(_, v, t)| !(v <= t)).map(|(s, _, _)| *s);
    Ok(report)
}

fn random_poly(rng: &mut ChaCha8Rng, degree: usize) -> (Vec<(usize, usize, f64)>, Expr) {
    let mut terms = Vec::new();
    for total in 0..=degree {
        for p in 0..=total {
            terms.push((p, total - p, rng.random_range(-1.0..=1.0)));
        }
    }
    let expr = poly_expr(&terms);
    (terms, expr)
}

fn poly_expr(terms: &[(usize, usize, f64)]) -> Expr {
    let monomial = |p: usize, q: usize| -> Expr {
        let mut factors = Vec::new();
        if p > 0 {
            factors.push(Expr::x(0).powf(p as f64));
        }
        if q > 0 {
            factors.push(Expr::x(1).powf(q as f64));
        }
        match factors.len() {
            0 => Expr::constant(1.0),
            1 => factors.remove(0),
            _ => Expr::Product(factors),
        }
    };
    Expr::Sum(terms.iter().map(|&(p, q, k)| k * monomial(p, q)).collect())
}

/// Gradient of `Σ k x^p y^q`, as polynomial terms.
fn gradient_terms(terms: &[(usize, usize, f64)]) -> [Vec<(usize, usize, f64)>; 2] {
    let d1 = terms.iter().filter(|t| t.0 > 0).map(|&(p, q, k)| (p - 1, q, k * p as f64)).collect();
    let d2 = terms.iter().filter(|t| t.1 > 0).map(|&(p, q, k)| (p, q - 1, k * q as f64)).collect();
    [d1, d2]
}

/// Margin demanded on the 11×11 grid when accepting a random case.
const ADMISSIBILITY_MARGIN: f64 = 0.05;

fn comfortably_admissible(case: &Theorem2DCase) -> bool {
    let grid: Vec<Vec<f64>> = (0..=10).flat_map(|i| (0..=10).map(move |j| vec![i as f64 / 10.0, j as f64 / 10.0])).collect();
    grid.iter().all(|x| {
        let (Ok([c1, c2]), Ok([a1, a2])) = (case.c_at(x), case.a_at(x)) else { return false };
        if c1.abs() < ADMISSIBILITY_MARGIN || c2.abs() < ADMISSIBILITY_MARGIN {
            return false;
        }
        if a1 / c1 < ADMISSIBILITY_MARGIN || a2 / c2 < ADMISSIBILITY_MARGIN {
            return false;
        }
        match case.quadratic_form(x) {
            Ok(q) => {
                let ev = symmetric_eigenvalues(&q, 2);
                ev[0] > ADMISSIBILITY_MARGIN && ev[1] / ev[0] < 1e6
            }
            Err(_) => false,
        }
    })
}

/// `count` admissible cases on `[0,1]²`: `f` a random cubic with `A = ∇f`,
/// `c` random polynomials of degree ≤ 2 (coefficients uniform in
/// `[−1, 1]`), `a` uniform in `[−0.2, 1]`; rejection-sampled on a grid.
pub fn random_admissible_cases(seed: u64, count: usize) -> Vec<Theorem2DCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (f_terms, _) = random_poly(&mut rng, 3);
        let [g1, g2] = gradient_terms(&f_terms);
        let (_, c1) = random_poly(&mut rng, 2);
        let (_, c2) = random_poly(&mut rng, 2);
        let a = rng.random_range(-0.2..=1.0);
        let case = Theorem2DCase {
            c: [c1, c2],
            a_grad: [poly_expr(&g1), poly_expr(&g2)],
            a,
            chart_box: vec![(0.0, 1.0), (0.0, 1.0)],
        };
        if comfortably_admissible(&case) {
            out.push(case);
        }
    }
    out
}

/// Three-dimensional families searched by [`probe_n3`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeFamily {
    /// `F = |y| + b(x)·y`, `b_i = p_i + q_i x¹`.
    Randers,
    /// `F² = sqrt(Σ w_i (y^i)⁴)`.
    QuarticMinkowski,
    /// `F² = Σ d_i (y^i)²`; a control with `C = 0`.
    Riemannian,
}

impl ProbeFamily {
    pub fn name(self) -> &'static str {
        match self {
            ProbeFamily::Randers => "randers3",
            ProbeFamily::QuarticMinkowski => "quartic_minkowski3",
            ProbeFamily::Riemannian => "riemannian3",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeCandidate {
    pub index: usize,
    pub family: ProbeFamily,
    pub parameters: Vec<f64>,
    /// Constant gradient of the linear `f`.
    pub f_gradient: [f64; 3],
    pub residual: f64,
    pub cartan_norm: f64,
    /// `‖C‖ ≥ 0.01`.
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProbeRecord {
    pub seed: u64,
    pub candidates: Vec<ProbeCandidate>,
    /// Index into `candidates` of the feasible candidate with the smallest
    /// residual (ties to the lower index).
    pub best: Option<usize>,
}

/// Minimum Cartan sup-norm for a candidate to count.
pub const PROBE_CARTAN_FLOOR: f64 = 0.01;

fn probe_metric(family: ProbeFamily, rng: &mut ChaCha8Rng) -> (Vec<f64>, Expr) {
    let sq = |i: usize| Expr::y(i).square();
    match family {
        ProbeFamily::Randers => {
            let raw: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let total: f64 = raw.iter().map(|v| v.abs()).sum::<f64>().max(1e-12);
            let params: Vec<f64> = raw.iter().map(|v| 0.6 * v / total).collect();
            let beta = Expr::Sum(
                (0..3).map(|i| (params[i] + params[3 + i] * Expr::x(0)) * Expr::y(i)).collect(),
            );
            let alpha = Expr::Sum((0..3).map(sq).collect()).sqrt();
            (params, (alpha + beta).square())
        }
        ProbeFamily::QuarticMinkowski => {
            let params: Vec<f64> = (0..3).map(|_| rng.random_range(0.5..=2.0)).collect();
            let f2 = Expr::Sum((0..3).map(|i| params[i] * Expr::y(i).powf(4.0)).collect()).sqrt();
            (params, f2)
        }
        ProbeFamily::Riemannian => {
            let params: Vec<f64> = (0..3).map(|_| rng.random_range(0.5..=2.0)).collect();
            (params.clone(), Expr::Sum((0..3).map(|i| params[i] * sq(i)).collect()))
        }
    }
}

/// Searches three-dimensional metric families and linear `f` for small
/// condition-(*) residuals among metrics with `‖C‖ ≥ 0.01`. Exploratory:
/// the record makes no claim either way.
pub fn probe_n3(seed: u64, budget: usize) -> Result<ProbeRecord> {
    let families = [ProbeFamily::Randers, ProbeFamily::QuarticMinkowski, ProbeFamily::Riemannian];
    let mut record = ProbeRecord { seed, candidates: Vec::with_capacity(budget), best: None };
    for index in 0..budget {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let family = families[index % families.len()];
        let (parameters, f2) = probe_metric(family, &mut rng);
        let mut grad = [0.0; 3];
        while math::norm2(&grad) < 0.1 {
            grad = [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)];
        }
        let m = MetricSpec::new(3, f2, vec![(0.0, 1.0); 3], String::from(family.name()))?;
        let eval = FinslerEvaluator::new(&m, Depth::Metric)?;
        let policy = SamplingPolicy::with_counts(seed.wrapping_add(index as u64), 4, 4);
        let (mut residual, mut cartan_norm) = (0.0_f64, 0.0_f64);
        for p in policy.sample_points(&m)? {
            let geo = eval.at(&p.x, &p.y)?;
            cartan_norm = cartan_norm.max(geo.cartan().sup_norm());
            residual = residual.max(condition_star_residual_from_gradient(&m, &grad, &p.x, &p.y)?.sup_norm);
        }
        let feasible = cartan_norm >= PROBE_CARTAN_FLOOR;
        record.candidates.push(ProbeCandidate {
            index,
            family,
            parameters,
            f_gradient: grad,
            residual,
            cartan_norm,
            feasible,
        });
        if feasible {
            let better = match record.best {
                None => true,
                Some(b) => residual < record.candidates[b].residual,
            };
            if better {
                record.best = Some(index);
            }
        }
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn case(c: [f64; 2], a: [f64; 2], phi: f64) -> Theorem2DCase {
        Theorem2DCase::new(
            [Expr::constant(c[0]), Expr::constant(c[1])],
            [Expr::constant(a[0]), Expr::constant(a[1])],
            phi,
            vec![(0.0, 1.0); 2],
        )
        .unwrap()
    }

    #[test]
    fn euclidean_reconstruction() {
        let q = case([1.0, 1.0], [1.0, 1.0], 0.0).quadratic_form(&[0.5, 0.5]).unwrap();
        assert_eq!(q, [1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn reconstruction_with_phi_term() {
        let k = case([1.0, 1.0], [1.0, 1.0], 1.0);
        let m = reconstruct_f2(&k, &[0.2, 0.2]).unwrap();
        let g = FinslerEvaluator::new(&m, Depth::Metric).unwrap().at(&[0.2, 0.2], &[0.3, 0.9]).unwrap();
        let ev = symmetric_eigenvalues(g.g(), 2);
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12, "{ev:?}");
    }

    #[test]
    fn mixed_coefficients_reconstruction() {
        let k = case([1.0, 2.0], [2.0, 1.0], 0.1);
        let y = [0.7, -0.4];
        let expected = 2.0 * 0.49 + 0.5 * 0.16 + 0.1 * (2.0f64 * 0.7 + 0.4).powi(2);
        let u = k.f_squared_expr();
        assert!((u.eval(&[0.5, 0.5], &y).unwrap() - expected).abs() < 1e-14);
        assert!(characteristic_residual(&u, &k, &[0.5, 0.5], &y).unwrap().abs() <= 1e-10);
    }

    #[test]
    fn characteristic_residual_of_non_solution() {
        let k = case([1.0, 1.0], [1.0, 1.0], 0.0);
        let r = characteristic_residual(&Expr::y(0).square(), &k, &[0.5, 0.5], &[0.0, 1.0]).unwrap();
        assert!((r + 2.0).abs() < 1e-14);
    }

    #[test]
    fn non_quadratic_phi_still_solves_the_pde() {
        let k = case([1.0, 2.0], [2.0, 1.0], 0.0);
        let t = 2.0 * Expr::y(0) - Expr::y(1);
        let u = k.f_squared_expr() + t.clone() * t.square().sqrt();
        for y in [[0.7, -0.4], [0.1, 0.9], [-0.5, 0.2]] {
            assert!(characteristic_residual(&u, &k, &[0.5, 0.5], &y).unwrap().abs() <= 1e-10);
        }
    }

    #[test]
    fn riemannian_residual_is_zero() {
        let m = catalog::riemannian_mixed();
        let f = Expr::x(0).sin() + Expr::x(1).square();
        let r = condition_star_residual(&m, &f, &[0.3, 0.6], &[0.8, -0.6]).unwrap();
        assert!(r.sup_norm <= 1e-12);
    }

    #[test]
    fn randers_residual_is_nonzero() {
        let r = condition_star_residual(&catalog::randers(0.5), &Expr::x(0), &[0.3, 0.6], &[0.8, -0.6]).unwrap();
        assert!(r.sup_norm > 1e-2);
    }

    #[test]
    fn path_potential_recovers_gradient() {
        let k = Theorem2DCase::new(
            [Expr::constant(1.0), Expr::constant(1.0)],
            [2.0 * Expr::x(0) * Expr::x(1), Expr::x(0).square()],
            0.0,
            vec![(0.0, 1.0); 2],
        )
        .unwrap();
        let p = PathPotential::new(&k, 1024);
        assert!((p.value(&[0.5, 0.8]).unwrap() - 0.2).abs() < 1e-6);
        let g = p.gradient(&[0.5, 0.8]).unwrap();
        assert!((g[0] - 0.8).abs() < 1e-6 && (g[1] - 0.25).abs() < 1e-6, "{g:?}");
    }

    #[test]
    fn euclidean_case_passes() {
        let k = case([1.0, 1.0], [1.0, 1.0], 0.0);
        let r = verify_main_theorem(&k, &SamplingPolicy::with_counts(1, 4, 4)).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn non_gradient_is_invalid() {
        let k = Theorem2DCase::new(
            [Expr::constant(1.0), Expr::constant(1.0)],
            [1.0 + Expr::x(1), Expr::constant(1.0)],
            0.0,
            vec![(0.0, 1.0); 2],
        )
        .unwrap();
        assert!(matches!(verify_main_theorem(&k, &SamplingPolicy::default()), Err(Error::InvalidCase(_))));
    }

    #[test]
    fn inadmissible_sign_is_not_finsler() {
        let k = case([1.0, -1.0], [1.0, 1.0], 0.0);
        assert!(matches!(reconstruct_f2(&k, &[0.5, 0.5]), Err(Error::NotFinsler(_))));
    }

    #[test]
    fn random_cases_are_deterministic() {
        assert_eq!(random_admissible_cases(5, 3), random_admissible_cases(5, 3));
    }

    #[test]
    fn probe_budget_zero_is_empty() {
        let r = probe_n3(1, 0).unwrap();
        assert!(r.candidates.is_empty() && r.best.is_none());
    }

    #[test]
    fn probe_excludes_riemannian_controls() {
        let r = probe_n3(2, 6).unwrap();
        for c in &r.candidates {
            if c.family == ProbeFamily::Riemannian {
                assert!(!c.feasible && c.residual == 0.0 && c.cartan_norm == 0.0);
            }
        }
        assert!(r.best.is_some());
    }
}
