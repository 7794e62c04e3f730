//! Finsler metrics declared by a closed-form `F²` on a single chart.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{Depth, FinslerEvaluator};
use crate::linalg::symmetric_eigenvalues;
use crate::sampling::SamplingPolicy;

/// A point of the slit tangent bundle in chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Point {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    pub dimension: usize,
    /// `F²(x, y)`, positively 2-homogeneous in `y`.
    pub f_squared: Expr,
    /// Per base coordinate `[lo, hi]`.
    pub chart_box: Vec<(f64, f64)>,
    pub label: String,
}

/// Homogeneity factors checked by [`MetricSpec::validate`].
pub const HOMOGENEITY_FACTORS: [f64; 3] = [0.5, 2.0, 3.0];

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationSummary {
    pub samples: usize,
    /// Largest `|F²(x,λy) − λ²F²(x,y)| / max(1, |F²|)`.
    pub homogeneity_error: f64,
    /// Largest `|g_y(y,y) − F²| / max(1, |F²|)`.
    pub euler_error: f64,
    pub min_eigenvalue: f64,
}

impl MetricSpec {
    pub fn new(dimension: usize, f_squared: Expr, chart_box: Vec<(f64, f64)>, label: impl Into<String>) -> Result<Self> {
        if dimension < 1 {
            return Err(Error::InvalidMetric("dimension must be positive".into()));
        }
        if chart_box.len() != dimension {
            return Err(Error::Dimension(format!(
                "chart box has {} intervals for dimension {dimension}",
                chart_box.len()
            )));
        }
        if let Some((k, _)) = chart_box.iter().enumerate().find(|(_, (lo, hi))| !(lo <= hi)) {
            return Err(Error::InvalidMetric(format!("chart box interval {} is empty", k + 1)));
        }
        f_squared.check_dimensions(dimension, dimension)?;
        Ok(Self { dimension, f_squared, chart_box, label: label.into() })
    }

    pub fn f_squared_at(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.f_squared.eval(x, y)
    }

    /// Checks positivity, positive 2-homogeneity, the Euler identity
    /// `g_y(y,y) = F²` and positive definiteness on the policy's samples.
    pub fn validate(&self, policy: &SamplingPolicy) -> Result<ValidationSummary> {
        let points = policy.sample_points(self)?;
        let eval = FinslerEvaluator::new(self, Depth::Metric)?;
        let mut summary = ValidationSummary {
            samples: points.len(),
            homogeneity_error: 0.0,
            euler_error: 0.0,
            min_eigenvalue: f64::INFINITY,
        };
        let n = self.dimension;
        for p in &points {
            let f2 = self.f_squared_at(&p.x, &p.y)?;
            if !(f2 > 0.0) {
                return Err(Error::InvalidMetric(format!("F² = {f2:e} is not positive at x={:?}, y={:?}", p.x, p.y)));
            }
            let scale = f2.abs().max(1.0);
            for lambda in HOMOGENEITY_FACTORS {
                let ys: Vec<f64> = p.y.iter().map(|v| lambda * v).collect();
                let scaled = self.f_squared_at(&p.x, &ys)?;
                let err = (scaled - lambda * lambda * f2).abs() / (lambda * lambda * scale);
                summary.homogeneity_error = summary.homogeneity_error.max(err);
                if err > 1e-9 {
                    return Err(Error::InvalidMetric(format!(
                        "F² not 2-homogeneous: relative error {err:e} at λ={lambda}, x={:?}, y={:?}",
                        p.x, p.y
                    )));
                }
            }
            let geo = eval.at(&p.x, &p.y)?;
            let g = geo.g();
            let gyy: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| g[i * n + j] * p.y[i] * p.y[j]).sum();
            let euler = (gyy - f2).abs() / scale;
            summary.euler_error = summary.euler_error.max(euler);
            if euler > 1e-8 {
                return Err(Error::InvalidMetric(format!("Euler identity g(y,y)=F² off by {euler:e} at y={:?}", p.y)));
            }
            let ev = symmetric_eigenvalues(g, n);
            summary.min_eigenvalue = summary.min_eigenvalue.min(ev[0]);
        }
        Ok(summary)
    }
}
