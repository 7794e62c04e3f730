//! Finite-difference counterparts of the jet tensors.
//!
//! `g` and `C` difference `F²` directly; `G` differences `F²` in `x` and `y`
//! and inverts the differenced `g`. Higher tensors difference the jet-built
//! spray (itself checked against the fully differenced one), which keeps
//! every stencil at order ≤ 4.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fd::{fd_derivative, fd_partial_vec, FdEstimate};
use crate::geometry::{douglas_from_parts, Depth, FinslerEvaluator, PointGeometry};
use crate::jet::MultiIndex;
use crate::linalg::inverse;
use crate::metric::{MetricSpec, Point};
use crate::tensor::{Provenance, TensorSample};

/// Outcome of comparing one jet tensor with its finite-difference estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorComparison {
    pub tensor: &'static str,
    pub point: Point,
    /// Largest `|jet − fd|` over components.
    pub max_deviation: f64,
    /// Largest `|jet − fd| / tolerance`; at most 1 when the check passes.
    pub worst_ratio: f64,
    pub passed: bool,
}

fn fd_sample(name: &'static str, upper: usize, lower: usize, point: &Point, est: Vec<FdEstimate>) -> TensorSample {
    let n = point.y.len();
    TensorSample {
        name,
        upper,
        lower,
        dim: n,
        point: point.clone(),
        components: est.iter().map(|e| e.value).collect(),
        provenance: Provenance::FiniteDifference,
        error_estimates: est.iter().map(|e| e.error).collect(),
    }
}

/// Sorted multi-indices `[a₁ ≤ … ≤ a_k]` over `0..n`.
fn sorted_indices(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; k];
    loop {
        out.push(cur.clone());
        let mut pos = k;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if cur[pos] + 1 < n {
                cur[pos] += 1;
                let v = cur[pos];
                cur[pos..].iter_mut().for_each(|c| *c = v);
                break;
            }
        }
    }
}

/// Flat row-major offset for every permutation of `idx` within a tensor
/// whose last `idx.len()` slots are symmetric, prefixed by `head`.
fn symmetric_offsets(n: usize, head: &[usize], idx: &[usize]) -> Vec<usize> {
    let mut perms: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..idx.len() {
        let mut next = Vec::new();
        for p in &perms {
            for slot in (0..idx.len()).filter(|s| !p.contains(s)) {
                let mut q = p.clone();
                q.push(slot);
                next.push(q);
            }
        }
        perms = next;
    }
    let mut offs: Vec<usize> = perms
        .iter()
        .map(|p| head.iter().copied().chain(p.iter().map(|&s| idx[s])).fold(0, |acc, i| acc * n + i))
        .collect();
    offs.sort_unstable();
    offs.dedup();
    offs
}

/// Fiber derivatives of order `k` of a vector function `f(y)`, laid out as
/// `[component, j₁, …, j_k]`.
fn fiber_derivatives<F>(n: usize, components: usize, y: &[f64], k: usize, mut f: F) -> Result<Vec<FdEstimate>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let blank = FdEstimate { value: 0.0, error: 0.0, step: 0.0 };
    let mut out = vec![blank; components * n.pow(k as u32)];
    for idx in sorted_indices(n, k) {
        let est = fd_partial_vec(&mut f, y, &idx)?;
        for (c, e) in est.iter().enumerate() {
            for off in symmetric_offsets(n, &[c], &idx) {
                out[off] = *e;
            }
        }
    }
    Ok(out)
}

fn f2_fiber(metric: &MetricSpec, x: &[f64], y: &[f64], k: usize) -> Result<Vec<FdEstimate>> {
    fiber_derivatives(metric.dimension, 1, y, k, |yy| Ok(vec![metric.f_squared_at(x, yy)?]))
}

fn scaled(est: Vec<FdEstimate>, s: f64) -> Vec<FdEstimate> {
    est.into_iter().map(|e| FdEstimate { value: s * e.value, error: s.abs() * e.error, step: e.step }).collect()
}

pub fn fd_fundamental(metric: &MetricSpec, x: &[f64], y: &[f64]) -> Result<TensorSample> {
    let p = Point::new(x.to_vec(), y.to_vec());
    Ok(fd_sample("g", 0, 2, &p, scaled(f2_fiber(metric, x, y, 2)?, 0.5)))
}

pub fn fd_cartan(metric: &MetricSpec, x: &[f64], y: &[f64]) -> Result<TensorSample> {
    let p = Point::new(x.to_vec(), y.to_vec());
    Ok(fd_sample("C", 0, 3, &p, scaled(f2_fiber(metric, x, y, 3)?, 0.25)))
}

/// `∂g^{ij}/∂y^k` by differencing the jet inverse in the fiber.
pub fn fd_ginv_derivative(metric: &MetricSpec, x: &[f64], y: &[f64]) -> Result<TensorSample> {
    let eval = FinslerEvaluator::new(metric, Depth::Metric)?;
    let n = metric.dimension;
    let est = fiber_derivatives(n, n * n, y, 1, |yy| Ok(eval.at(x, yy)?.g_inverse().to_vec()))?;
    let p = Point::new(x.to_vec(), y.to_vec());
    Ok(fd_sample("dginv_dy", 2, 1, &p, est))
}

/// Spray from differenced `F²` partials and a numeric inverse of the
/// differenced `g`.
pub fn fd_spray(metric: &MetricSpec, x: &[f64], y: &[f64]) -> Result<TensorSample> {
    let n = metric.dimension;
    let g = fd_fundamental(metric, x, y)?;
    let ginv = inverse(&g.components, n)?;
    let mut w = vec![0.0; n];
    let mut w_err = vec![0.0; n];
    for l in 0..n {
        let d = fd_derivative(&metric.f_squared, x, y, &MultiIndex::mixed(&[l], &[]))?;
        w[l] -= d.value;
        w_err[l] += d.error;
        for k in 0..n {
            let d = fd_derivative(&metric.f_squared, x, y, &MultiIndex::mixed(&[k], &[l]))?;
            w[l] += d.value * y[k];
            w_err[l] += d.error * y[k].abs();
        }
    }
    let g_err = &g.error_estimates;
    let mut est = Vec::with_capacity(n);
    for i in 0..n {
        let value = 0.25 * (0..n).map(|l| ginv[i * n + l] * w[l]).sum::<f64>();
        // first-order propagation of the w and g errors
        let mut error = 0.25 * (0..n).map(|l| ginv[i * n + l].abs() * w_err[l]).sum::<f64>();
        for a in 0..n {
            for b in 0..n {
                let gw: f64 = (0..n).map(|l| ginv[b * n + l] * w[l]).sum();
                error += 0.25 * (ginv[i * n + a] * g_err[a * n + b] * gw).abs();
            }
        }
        error += f64::EPSILON * value.abs();
        est.push(FdEstimate { value, error, step: 0.0 });
    }
    Ok(fd_sample("G", 1, 0, &Point::new(x.to_vec(), y.to_vec()), est))
}

fn spray_fn<'a>(eval: &'a FinslerEvaluator<'a>, x: &'a [f64]) -> impl FnMut(&[f64]) -> Result<Vec<f64>> + 'a {
    move |yy: &[f64]| Ok(eval.at(x, yy)?.spray()?.components)
}

/// `B^i_jkl` as third fiber differences of the jet spray.
pub fn fd_berwald(metric: &MetricSpec, x: &[f64], y: &[f64]) -> Result<TensorSample> {
    let eval = FinslerEvaluator::new(metric, Depth::Spray)?;
    let n = metric.dimension;
    let est = fiber_derivatives(n, n, y, 3, spray_fn(&eval, x))?;
    Ok(fd_sample("B", 1, 3, &Point::new(x.to_vec(), y.to_vec()), est))
}

/// `E_jk = ½ B^m_jkm`, contracted from a differenced `B`.
pub fn fd_mean_berwald(b: &TensorSample) -> TensorSample {
    let n = b.dim;
    let mut est = Vec::with_capacity(n * n);
    for j in 0..n {
        for k in 0..n {
            let (mut value, mut error) = (0.0, 0.0);
            for m in 0..n {
                let off = b.offset(&[m, j, k, m]);
                value += 0.5 * b.components[off];
                error += 0.5 * b.error_estimates[off];
            }
            est.push(FdEstimate { value, error, step: 0.0 });
        }
    }
    fd_sample("E", 0, 2, &b.point, est)
}

/// `∂E_jk/∂y^l` from fourth fiber differences of the jet spray.
pub fn fd_mean_berwald_derivative(metric: &MetricSpec, x: &[f64], y: &[f64]) -> Result<TensorSample> {
    let eval = FinslerEvaluator::new(metric, Depth::Spray)?;
    let n = metric.dimension;
    let blank = FdEstimate { value: 0.0, error: 0.0, step: 0.0 };
    let mut est = vec![blank; n * n * n];
    let mut f = spray_fn(&eval, x);
    for j in 0..n {
        for k in j..n {
            for l in 0..n {
                let (mut value, mut error) = (0.0, 0.0);
                for m in 0..n {
                    let d = fd_partial_vec(&mut f, y, &[j, k, m, l])?;
                    value += 0.5 * d[m].value;
                    error += 0.5 * d[m].error;
                }
                let e = FdEstimate { value, error, step: 0.0 };
                est[(j * n + k) * n + l] = e;
                est[(k * n + j) * n + l] = e;
            }
        }
    }
    Ok(fd_sample("dE_dy", 0, 3, &Point::new(x.to_vec(), y.to_vec()), est))
}

/// Douglas tensor assembled from differenced `B`, `E` and `∂E`.
pub fn fd_douglas(b: &TensorSample, e: &TensorSample, de: &TensorSample) -> TensorSample {
    let n = b.dim;
    let y = &b.point.y;
    let components = douglas_from_parts(b, e, de, y);
    let c = 2.0 / (n as f64 + 1.0);
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut errors = vec![0.0; n.pow(4)];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let ee = |p: usize, q: usize| e.error_estimates[p * n + q];
                    let trace = ee(j, k) * delta(i, l)
                        + ee(j, l) * delta(i, k)
                        + ee(k, l) * delta(i, j)
                        + de.error_estimates[(j * n + k) * n + l] * y[i].abs();
                    let off = ((i * n + j) * n + k) * n + l;
                    errors[off] = b.error_estimates[off] + c * trace;
                }
            }
        }
    }
    TensorSample {
        name: "D",
        upper: 1,
        lower: 3,
        dim: n,
        point: b.point.clone(),
        components,
        provenance: Provenance::FiniteDifference,
        error_estimates: errors,
    }
}

/// Compares componentwise with band `max(10·fd_error, 1e-6·scale)`, where
/// `scale = max(1, sup|jet|)`.
pub fn compare(jet: &TensorSample, fd: &TensorSample) -> Result<TensorComparison> {
    if jet.components.len() != fd.components.len() || fd.error_estimates.len() != fd.components.len() {
        return Err(Error::Dimension(format!("cannot compare {} with its oracle: shape mismatch", jet.name)));
    }
    let scale = jet.sup_norm().max(1.0);
    let mut max_deviation = 0.0_f64;
    let mut worst_ratio = 0.0_f64;
    for ((a, b), err) in jet.components.iter().zip(&fd.components).zip(&fd.error_estimates) {
        let dev = (a - b).abs();
        let tol = (10.0 * err).max(1e-6 * scale);
        max_deviation = max_deviation.max(dev);
        worst_ratio = worst_ratio.max(dev / tol);
    }
    Ok(TensorComparison {
        tensor: jet.name,
        point: jet.point.clone(),
        max_deviation,
        worst_ratio,
        passed: worst_ratio <= 1.0,
    })
}

/// Every tensor available at `depth`, jet versus finite differences.
pub fn crosscheck_point(metric: &MetricSpec, geo: &PointGeometry, depth: Depth) -> Result<Vec<TensorComparison>> {
    let Point { x, y } = geo.point();
    let mut out = vec![
        compare(&geo.fundamental(), &fd_fundamental(metric, x, y)?)?,
        compare(&geo.cartan(), &fd_cartan(metric, x, y)?)?,
        compare(&geo.cartan_raised().1, &fd_ginv_derivative(metric, x, y)?)?,
    ];
    if depth >= Depth::Spray {
        out.push(compare(&geo.spray()?, &fd_spray(metric, x, y)?)?);
    }
    if depth >= Depth::Berwald {
        let b = fd_berwald(metric, x, y)?;
        let e = fd_mean_berwald(&b);
        out.push(compare(&geo.berwald()?, &b)?);
        out.push(compare(&geo.mean_berwald()?, &e)?);
        if depth >= Depth::Douglas {
            let de = fd_mean_berwald_derivative(metric, x, y)?;
            out.push(compare(&geo.mean_berwald_derivative()?, &de)?);
            out.push(compare(&geo.douglas()?, &fd_douglas(&b, &e, &de))?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn sorted_indices_count() {
        assert_eq!(sorted_indices(2, 3).len(), 4);
        assert_eq!(sorted_indices(4, 3).len(), 20);
        assert_eq!(sorted_indices(3, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn symmetric_offsets_cover_permutations() {
        assert_eq!(symmetric_offsets(2, &[], &[0, 1]), vec![1, 2]);
        assert_eq!(symmetric_offsets(2, &[1], &[0, 0]), vec![4]);
        assert_eq!(symmetric_offsets(3, &[], &[0, 1, 2]).len(), 6);
    }

    #[test]
    fn randers_x_passes_all_crosschecks() {
        let m = catalog::randers_x();
        let eval = FinslerEvaluator::new(&m, Depth::Douglas).unwrap();
        let geo = eval.at(&[0.4, 0.7], &[0.6, -0.8]).unwrap();
        for c in crosscheck_point(&m, &geo, Depth::Douglas).unwrap() {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn detects_a_wrong_value() {
        let m = catalog::randers(0.5);
        let geo = FinslerEvaluator::new(&m, Depth::Metric).unwrap().at(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
        let mut g = geo.fundamental();
        g.components[0] += 1e-3;
        let c = compare(&g, &fd_fundamental(&m, &[0.0, 0.0], &[1.0, 0.0]).unwrap()).unwrap();
        assert!(!c.passed);
    }
}
