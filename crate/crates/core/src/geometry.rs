//! Fundamental tensor, Cartan torsion, spray and the Berwald family.
//!
//! One jet of `F²` at `(x, y)` carries every partial the tensors need. From
//! it the evaluator builds truncated Taylor series in the fiber displacement
//! `δ` of `g_ij(x, y+δ)`, of the inverse `g^{ij}(x, y+δ)` (Neumann series
//! around `g(x,y)`), and of the spray
//!
//! ```text
//! G^i = ¼ g^{il} ( [F²]_{x^k y^l} y^k − [F²]_{x^l} ),
//! ```
//!
//! so fiber derivatives of `G` (Berwald curvature and its trace) are read
//! off as series coefficients rather than nested differentiation.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::jet::JetSpace;
use crate::linalg::{inverse, symmetric_eigenvalues, CONDITION_LIMIT};
use crate::metric::{MetricSpec, Point};
use crate::poly::PolySpace;
use crate::tensor::TensorSample;

/// How many fiber derivatives of the spray an evaluator provides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Depth {
    /// `g`, `g⁻¹`, `C`, `∂g⁻¹/∂y`.
    Metric,
    /// Adds `G^i`.
    Spray,
    /// Adds `B` and `E` (third fiber derivatives of `G`).
    Berwald,
    /// Adds `∂E/∂y` and `D` (fourth fiber derivatives of `G`).
    Douglas,
}

impl Depth {
    /// Order of the δ-series kept for `g⁻¹` and `G`.
    fn series_order(self) -> usize {
        match self {
            Depth::Metric | Depth::Spray => 1,
            Depth::Berwald => 3,
            Depth::Douglas => 4,
        }
    }

    fn jet_orders(self) -> (usize, usize) {
        match self {
            Depth::Metric => (0, 3),
            Depth::Spray => (1, 3),
            Depth::Berwald => (1, 5),
            Depth::Douglas => (1, 6),
        }
    }
}

/// Reusable evaluator for one metric; builds the polynomial tables once.
#[derive(Debug, Clone)]
pub struct FinslerEvaluator<'m> {
    metric: &'m MetricSpec,
    depth: Depth,
    jets: JetSpace,
    series: Arc<PolySpace>,
}

impl<'m> FinslerEvaluator<'m> {
    pub fn new(metric: &'m MetricSpec, depth: Depth) -> Result<Self> {
        let n = metric.dimension;
        let (xo, yo) = depth.jet_orders();
        let jets = JetSpace::new(n, n, xo, yo)?;
        let series = Arc::new(PolySpace::new(n, depth.series_order()));
        Ok(Self { metric, depth, jets, series })
    }

    pub fn metric(&self) -> &MetricSpec {
        self.metric
    }

    pub fn depth(&self) -> Depth {
        self.depth
    }

    pub fn at(&self, x: &[f64], y: &[f64]) -> Result<PointGeometry> {
        let n = self.metric.dimension;
        let jet = self.jets.evaluate_raw(&self.metric.f_squared, x, y)?;
        let ps = self.jets.poly();
        let m = ps.len();
        let p0 = &jet[..m];
        let f2 = p0[0];
        if !(f2 > 0.0) {
            return Err(Error::InvalidMetric(format!("F² = {f2:e} is not positive at x={x:?}, y={y:?}")));
        }

        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                g[i * n + j] = 0.5 * ps.derivative_at_origin(p0, &[i, j]);
            }
        }
        let ev = symmetric_eigenvalues(&g, n);
        if !(ev[0] > 0.0) {
            return Err(Error::MetricDegeneracy { eigenvalues: ev });
        }
        let condition = ev[n - 1] / ev[0];
        if condition > CONDITION_LIMIT {
            return Err(Error::IllConditioned { condition, limit: CONDITION_LIMIT });
        }
        let ginv = inverse(&g, n)?;
        let mut cartan = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    cartan[(i * n + j) * n + k] = 0.25 * ps.derivative_at_origin(p0, &[i, j, k]);
                }
            }
        }

        // δ-series, truncated to the series order (a prefix in graded order)
        let s = &self.series;
        let order = s.order();
        let trunc = |v: Vec<f64>| -> Vec<f64> { v[..s.len()].to_vec() };
        let mut g_series = Vec::with_capacity(n * n);
        for i in 0..n {
            let di = ps.derivative(p0, i);
            for j in 0..n {
                let mut gij = trunc(ps.derivative(&di, j));
                gij.iter_mut().for_each(|c| *c *= 0.5);
                g_series.push(gij);
            }
        }
        let nilpotent: Vec<Vec<f64>> = g_series
            .iter()
            .map(|p| {
                let mut q = p.clone();
                q[0] = 0.0;
                q
            })
            .collect();
        let mut term: Vec<Vec<f64>> = ginv.iter().map(|&c| s.constant(c)).collect();
        let mut ginv_series = term.clone();
        for _ in 0..order {
            let nt = poly_matmul(s, &nilpotent, &term, n);
            term = const_matmul(s, &ginv, &nt, n, -1.0);
            for (acc, t) in ginv_series.iter_mut().zip(&term) {
                acc.iter_mut().zip(t).for_each(|(a, b)| *a += b);
            }
        }

        let spray_series = if self.jets.x_order() == 1 {
            let block = |k: usize| &jet[(1 + k) * m..(2 + k) * m];
            let mut w = vec![s.zero(); n];
            for (l, wl) in w.iter_mut().enumerate() {
                let ql = trunc(block(l).to_vec());
                wl.iter_mut().zip(&ql).for_each(|(a, b)| *a -= b);
                for (k, &yk) in y.iter().enumerate() {
                    let dq = trunc(ps.derivative(block(k), l));
                    s.mul_acc(&dq, &s.variable(k, yk), wl);
                }
            }
            let mut spray = vec![s.zero(); n];
            for (i, gi) in spray.iter_mut().enumerate() {
                for (l, wl) in w.iter().enumerate() {
                    s.mul_acc(&ginv_series[i * n + l], wl, gi);
                }
                gi.iter_mut().for_each(|c| *c *= 0.25);
            }
            Some(spray)
        } else {
            None
        };

        Ok(PointGeometry {
            n,
            point: Point::new(x.to_vec(), y.to_vec()),
            f2,
            g,
            ginv,
            cartan,
            series: self.series.clone(),
            ginv_series,
            spray_series,
        })
    }
}

fn poly_matmul(s: &PolySpace, a: &[Vec<f64>], b: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let mut out = vec![s.zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                s.mul_acc(&a[i * n + k], &b[k * n + j], &mut out[i * n + j]);
            }
        }
    }
    out
}

fn const_matmul(s: &PolySpace, c: &[f64], b: &[Vec<f64>], n: usize, factor: f64) -> Vec<Vec<f64>> {
    let mut out = vec![s.zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            let cik = factor * c[i * n + k];
            if cik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j].iter_mut().zip(&b[k * n + j]).for_each(|(o, v)| *o += cik * v);
            }
        }
    }
    out
}

/// Every tensor available at one point of the slit tangent bundle.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    n: usize,
    point: Point,
    f2: f64,
    g: Vec<f64>,
    ginv: Vec<f64>,
    cartan: Vec<f64>,
    series: Arc<PolySpace>,
    ginv_series: Vec<Vec<f64>>,
    spray_series: Option<Vec<Vec<f64>>>,
}

impl PointGeometry {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn point(&self) -> &Point {
        &self.point
    }

    pub fn f_squared(&self) -> f64 {
        self.f2
    }

    /// Row-major `g_ij`.
    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn g_inverse(&self) -> &[f64] {
        &self.ginv
    }

    /// Flat `C_ijk` at `(i*n + j)*n + k`.
    pub fn cartan_components(&self) -> &[f64] {
        &self.cartan
    }

    fn sample(&self, name: &'static str, upper: usize, lower: usize, c: Vec<f64>) -> TensorSample {
        TensorSample::from_jet(name, upper, lower, self.n, self.point.clone(), c)
    }

    pub fn fundamental(&self) -> TensorSample {
        self.sample("g", 0, 2, self.g.clone())
    }

    pub fn inverse(&self) -> TensorSample {
        self.sample("g_inv", 2, 0, self.ginv.clone())
    }

    pub fn cartan(&self) -> TensorSample {
        self.sample("C", 0, 3, self.cartan.clone())
    }

    /// `∂^{|β|} g^{ij} / ∂y^β` from the inverse-metric series.
    pub fn ginv_derivative(&self, i: usize, j: usize, vars: &[usize]) -> Result<f64> {
        if vars.len() > self.series.order() {
            return Err(Error::DepthUnavailable { tensor: "fiber derivative of g^ij" });
        }
        Ok(self.series.derivative_at_origin(&self.ginv_series[i * self.n + j], vars))
    }

    /// `(C^{ij}_k, ∂g^{ij}/∂y^k)`. The first raises `C_abk` with `g⁻¹`; the
    /// second is read from the Neumann series of `g⁻¹`, an independent
    /// route. They satisfy `∂g^{ij}/∂y^k = −2 C^{ij}_k`.
    pub fn cartan_raised(&self) -> (TensorSample, TensorSample) {
        let n = self.n;
        let mut raised = vec![0.0; n * n * n];
        let mut dginv = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut acc = 0.0;
                    for a in 0..n {
                        for b in 0..n {
                            acc += self.ginv[i * n + a] * self.ginv[j * n + b] * self.cartan[(a * n + b) * n + k];
                        }
                    }
                    raised[(i * n + j) * n + k] = acc;
                    dginv[(i * n + j) * n + k] = self.series.derivative_at_origin(&self.ginv_series[i * n + j], &[k]);
                }
            }
        }
        (self.sample("C_raised", 2, 1, raised), self.sample("dginv_dy", 2, 1, dginv))
    }

    fn spray_polys(&self, needed: usize, tensor: &'static str) -> Result<&[Vec<f64>]> {
        match &self.spray_series {
            Some(s) if self.series.order() >= needed => Ok(s),
            _ => Err(Error::DepthUnavailable { tensor }),
        }
    }

    /// `∂^{|β|} G^i / ∂y^β`.
    pub fn spray_derivative(&self, i: usize, vars: &[usize]) -> Result<f64> {
        let s = self.spray_polys(vars.len(), "spray derivative")?;
        Ok(self.series.derivative_at_origin(&s[i], vars))
    }

    pub fn spray(&self) -> Result<TensorSample> {
        let s = self.spray_polys(0, "G")?;
        Ok(self.sample("G", 1, 0, s.iter().map(|p| p[0]).collect()))
    }

    pub fn berwald(&self) -> Result<TensorSample> {
        let s = self.spray_polys(3, "B")?;
        let n = self.n;
        let mut b = vec![0.0; n.pow(4)];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        b[((i * n + j) * n + k) * n + l] = self.series.derivative_at_origin(&s[i], &[j, k, l]);
                    }
                }
            }
        }
        Ok(self.sample("B", 1, 3, b))
    }

    /// `E_jk = ½ B^m_jkm`.
    pub fn mean_berwald(&self) -> Result<TensorSample> {
        let b = self.berwald()?;
        let n = self.n;
        let mut e = vec![0.0; n * n];
        for j in 0..n {
            for k in 0..n {
                e[j * n + k] = 0.5 * (0..n).map(|m| b.get(&[m, j, k, m])).sum::<f64>();
            }
        }
        Ok(self.sample("E", 0, 2, e))
    }

    /// `∂E_jk/∂y^l = ½ Σ_m ∂⁴G^m/∂y^j∂y^k∂y^m∂y^l`, flat at `(j*n + k)*n + l`.
    pub fn mean_berwald_derivative(&self) -> Result<TensorSample> {
        let s = self.spray_polys(4, "dE/dy")?;
        let n = self.n;
        let mut de = vec![0.0; n * n * n];
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    de[(j * n + k) * n + l] =
                        0.5 * (0..n).map(|m| self.series.derivative_at_origin(&s[m], &[j, k, m, l])).sum::<f64>();
                }
            }
        }
        Ok(self.sample("dE_dy", 0, 3, de))
    }

    pub fn douglas(&self) -> Result<TensorSample> {
        let b = self.berwald()?;
        let e = self.mean_berwald()?;
        let de = self.mean_berwald_derivative()?;
        Ok(self.sample("D", 1, 3, douglas_from_parts(&b, &e, &de, &self.point.y)))
    }
}

/// `D^i_jkl = B^i_jkl − 2/(n+1) (E_jk δ^i_l + E_jl δ^i_k + E_kl δ^i_j + ∂_l E_jk y^i)`.
pub fn douglas_from_parts(b: &TensorSample, e: &TensorSample, de: &TensorSample, y: &[f64]) -> Vec<f64> {
    let n = b.dim;
    let c = 2.0 / (n as f64 + 1.0);
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut d = vec![0.0; n.pow(4)];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let trace = e.get(&[j, k]) * delta(i, l)
                        + e.get(&[j, l]) * delta(i, k)
                        + e.get(&[k, l]) * delta(i, j)
                        + de.get(&[j, k, l]) * y[i];
                    d[((i * n + j) * n + k) * n + l] = b.get(&[i, j, k, l]) - c * trace;
                }
            }
        }
    }
    d
}

pub fn fundamental_tensor(m: &MetricSpec, x: &[f64], y: &[f64]) -> Result<TensorSample> {
    Ok(FinslerEvaluator::new(m, Depth::Metric)?.at(x, y)?.fundamental())
}

pub fn inverse_fundamental_tensor(m: &MetricSpec, x: &[f64], y: &[f64]) -> Result<TensorSample> {
    Ok(FinslerEvaluator::new(m, Depth::Metric)?.at(x, y)?.inverse())
}

pub fn cartan_tensor(m: &MetricSpec, x: &[f64], y: &[f64]) -> Result<TensorSample> {
    Ok(FinslerEvaluator::new(m, Depth::Metric)?.at(x, y)?.cartan())
}

pub fn cartan_raised(m: &MetricSpec, x: &[f64], y: &[f64]) -> Result<(TensorSample, TensorSample)> {
    Ok(FinslerEvaluator::new(m, Depth::Metric)?.at(x, y)?.cartan_raised())
}

pub fn spray_coefficients(m: &MetricSpec, x: &[f64], y: &[f64]) -> Result<TensorSample> {
    FinslerEvaluator::new(m, Depth::Spray)?.at(x, y)?.spray()
}

pub fn berwald_curvature(m: &MetricSpec, x: &[f64], y: &[f64]) -> Result<TensorSample> {
    FinslerEvaluator::new(m, Depth::Berwald)?.at(x, y)?.berwald()
}

pub fn mean_berwald(m: &MetricSpec, x: &[f64], y: &[f64]) -> Result<TensorSample> {
    FinslerEvaluator::new(m, Depth::Berwald)?.at(x, y)?.mean_berwald()
}

pub fn douglas_curvature(m: &MetricSpec, x: &[f64], y: &[f64]) -> Result<TensorSample> {
    FinslerEvaluator::new(m, Depth::Douglas)?.at(x, y)?.douglas()
}
