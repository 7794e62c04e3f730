//! Doubly warped products `F² = f₂(u)² F₁(x,y)² + f₁(x)² F₂(u,v)²` and the
//! closed-form block formulas of the warped (`f₂ ≡ 1`) case.
//!
//! Composite coordinates are ordered `(x¹…x^{n₁}, u¹…u^{n₂})`, fibers
//! `(y, v)` likewise. Latin indices address the first factor, Greek indices
//! the second.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::classify::{classify, ClassificationReport, Tolerances};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{Depth, FinslerEvaluator, PointGeometry};
use crate::jet::{jet_eval, MultiIndex};
use crate::math;
use crate::metric::{MetricSpec, Point};
use crate::sampling::SamplingPolicy;

/// Threshold on `|∇f|` below which a warping function counts as constant.
const CONSTANT_GRADIENT: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DWPSpec {
    pub m1: MetricSpec,
    pub m2: MetricSpec,
    /// Over the base coordinates of `m1`.
    pub f1: Expr,
    /// Over the base coordinates of `m2`.
    pub f2: Expr,
    /// Optional `σ(x, u)` for the isotropic mean Berwald premise
    /// `E = ½(n+1) σ F⁻¹ h`.
    pub isotropic_scalar: Option<Expr>,
}

/// Value and gradient of an `x`-only expression.
pub fn value_and_gradient(f: &Expr, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    let jet = jet_eval(f, x, &[], 1, 0)?;
    let grad = (0..x.len()).map(|i| jet.derivative(&MultiIndex::mixed(&[i], &[]))).collect::<Result<_>>()?;
    Ok((jet.value(), grad))
}

impl DWPSpec {
    pub fn new(m1: MetricSpec, m2: MetricSpec, f1: Expr, f2: Expr) -> Result<Self> {
        f1.check_dimensions(m1.dimension, 0)
            .map_err(|e| Error::InvalidWarping { which: "f1", detail: format!("{e}") })?;
        f2.check_dimensions(m2.dimension, 0)
            .map_err(|e| Error::InvalidWarping { which: "f2", detail: format!("{e}") })?;
        Ok(Self { m1, m2, f1, f2, isotropic_scalar: None })
    }

    pub fn with_isotropic_scalar(mut self, sigma: Expr) -> Result<Self> {
        sigma.check_dimensions(self.dimension(), 0)?;
        self.isotropic_scalar = Some(sigma);
        Ok(self)
    }

    pub fn n1(&self) -> usize {
        self.m1.dimension
    }

    pub fn n2(&self) -> usize {
        self.m2.dimension
    }

    pub fn dimension(&self) -> usize {
        self.n1() + self.n2()
    }

    /// Base points at which the flags and positivity are decided: the box
    /// center plus 32 seeded points.
    fn probe_points(chart_box: &[(f64, f64)]) -> Vec<Vec<f64>> {
        let mut pts = SamplingPolicy::with_counts(0, 32, 1).base_points(chart_box);
        pts.push(chart_box.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect());
        pts
    }

    fn is_constant(f: &Expr, chart_box: &[(f64, f64)]) -> Result<bool> {
        for x in Self::probe_points(chart_box) {
            let (_, g) = value_and_gradient(f, &x)?;
            if math::max_abs(&g) > CONSTANT_GRADIENT {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn f1_constant(&self) -> Result<bool> {
        Self::is_constant(&self.f1, &self.m1.chart_box)
    }

    pub fn f2_constant(&self) -> Result<bool> {
        Self::is_constant(&self.f2, &self.m2.chart_box)
    }

    /// Warped product: `f₂ ≡ 1`.
    pub fn is_wp(&self) -> Result<bool> {
        for u in Self::probe_points(&self.m2.chart_box) {
            let (v, g) = value_and_gradient(&self.f2, &u)?;
            if (v - 1.0).abs() > CONSTANT_GRADIENT || math::max_abs(&g) > CONSTANT_GRADIENT {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Neither warping function is constant.
    pub fn is_proper(&self) -> Result<bool> {
        Ok(!self.f1_constant()? && !self.f2_constant()?)
    }

    /// Proper in the warped case: `f₂ ≡ 1` and `f₁` nonconstant.
    pub fn is_proper_wp(&self) -> Result<bool> {
        Ok(self.is_wp()? && !self.f1_constant()?)
    }

    fn check_positive(&self, policy: &SamplingPolicy) -> Result<()> {
        let sides = [("f1", &self.f1, &self.m1.chart_box), ("f2", &self.f2, &self.m2.chart_box)];
        for (which, f, chart_box) in sides {
            let mut pts = policy.base_points(chart_box);
            pts.extend(Self::probe_points(chart_box));
            for x in pts {
                let v = f.eval(&x, &[]).map_err(|e| Error::InvalidWarping { which, detail: format!("{e}") })?;
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::InvalidWarping {
                        which,
                        detail: format!("{which} = {v:e} at {x:?}"),
                    });
                }
            }
        }
        Ok(())
    }

    /// Splits a composite point into the factor points `((x,y), (u,v))`.
    pub fn split(&self, p: &Point) -> (Point, Point) {
        let n1 = self.n1();
        (
            Point::new(p.x[..n1].to_vec(), p.y[..n1].to_vec()),
            Point::new(p.x[n1..].to_vec(), p.y[n1..].to_vec()),
        )
    }
}

/// `F² = f₂(u)² F₁² + f₁(x)² F₂²` over the concatenated coordinates,
/// validated on 100 samples.
pub fn dwp_construct(spec: &DWPSpec) -> Result<MetricSpec> {
    let validation = SamplingPolicy::with_counts(42, 10, 10);
    spec.check_positive(&validation)?;
    let n1 = spec.n1();
    let f2 = spec.f2.shifted(n1);
    let big_f2 = spec.m2.f_squared.shifted(n1);
    let f_squared = f2.square() * spec.m1.f_squared.clone() + spec.f1.clone().square() * big_f2;
    let mut chart_box = spec.m1.chart_box.clone();
    chart_box.extend_from_slice(&spec.m2.chart_box);
    let label = format!("dwp({},{})", spec.m1.label, spec.m2.label);
    let m = MetricSpec::new(spec.dimension(), f_squared, chart_box, label)?;
    m.validate(&validation)?;
    Ok(m)
}

/// Latin (first factor) or Greek (second factor) slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    L,
    G,
}

/// One index block of a composite tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub name: &'static str,
    pub shape: Vec<usize>,
    pub components: Vec<f64>,
}

impl Block {
    pub fn sup_norm(&self) -> f64 {
        math::max_abs(&self.components)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockTensorSample {
    pub tensor: &'static str,
    pub n1: usize,
    pub n2: usize,
    pub point: Point,
    pub blocks: Vec<Block>,
}

impl BlockTensorSample {
    pub fn block(&self, name: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.name == name)
    }
}

/// Formula-versus-direct comparison of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCheck {
    pub block: &'static str,
    /// For formula blocks `sup|formula − direct| / max(1, sup|direct|)`; for
    /// declared-zero blocks `sup|direct|`.
    pub deviation: f64,
    pub tolerance: f64,
    pub declared_zero: bool,
    /// Flat offset of the worst entry within the block.
    pub worst_entry: usize,
}

impl BlockCheck {
    pub fn passed(&self) -> bool {
        self.deviation <= self.tolerance
    }

    pub fn violation(&self) -> Option<Error> {
        (!self.passed()).then(|| Error::FormulaViolation {
            block: self.block.into(),
            deviation: self.deviation,
            tolerance: self.tolerance,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockReport {
    pub formula: BlockTensorSample,
    pub direct: BlockTensorSample,
    pub checks: Vec<BlockCheck>,
}

impl BlockReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(BlockCheck::passed)
    }

    /// First failing block as an error.
    pub fn into_result(self) -> Result<Self> {
        match self.checks.iter().find_map(BlockCheck::violation) {
            Some(e) => Err(e),
            None => Ok(self),
        }
    }

    pub fn worst(&self) -> Option<&BlockCheck> {
        self.checks.iter().max_by(|a, b| (a.deviation / a.tolerance).total_cmp(&(b.deviation / b.tolerance)))
    }
}

fn block_shape(pattern: &[Slot], n1: usize, n2: usize) -> Vec<usize> {
    pattern.iter().map(|s| if *s == Slot::L { n1 } else { n2 }).collect()
}

/// Fills a block by calling `f` with the block-local multi-index.
fn build_block(name: &'static str, pattern: &[Slot], n1: usize, n2: usize, mut f: impl FnMut(&[usize]) -> f64) -> Block {
    let shape = block_shape(pattern, n1, n2);
    let len: usize = shape.iter().product();
    let mut idx = vec![0usize; shape.len()];
    let mut components = Vec::with_capacity(len);
    for flat in 0..len {
        let mut rem = flat;
        for k in (0..shape.len()).rev() {
            idx[k] = rem % shape[k];
            rem /= shape[k];
        }
        components.push(f(&idx));
    }
    Block { name, shape, components }
}

/// Extracts a block from a dense composite tensor of dimension `n1 + n2`.
fn extract_block(name: &'static str, pattern: &[Slot], n1: usize, n2: usize, dense: &[f64]) -> Block {
    let n = n1 + n2;
    build_block(name, pattern, n1, n2, |idx| {
        let off = idx
            .iter()
            .zip(pattern)
            .fold(0, |acc, (&i, s)| acc * n + if *s == Slot::L { i } else { n1 + i });
        dense[off]
    })
}

fn compare_blocks(formula: &Block, direct: &Block, tolerance: f64, declared_zero: bool) -> BlockCheck {
    let (deviation, worst_entry) = if declared_zero {
        worst(direct.components.iter().map(|v| v.abs()))
    } else {
        let scale = direct.sup_norm().max(1.0);
        let (d, w) = worst(formula.components.iter().zip(&direct.components).map(|(a, b)| (a - b).abs()));
        (d / scale, w)
    };
    BlockCheck { block: formula.name, deviation, tolerance, declared_zero, worst_entry }
}

fn worst(values: impl Iterator<Item = f64>) -> (f64, usize) {
    values.enumerate().fold((0.0, 0), |(m, w), (i, v)| if v > m { (v, i) } else { (m, w) })
}

/// Component data shared by the block formulas at one composite point.
struct WarpedParts {
    n1: usize,
    n2: usize,
    geo1: PointGeometry,
    geo2: PointGeometry,
    f1_squared: f64,
    /// `∂f₁²/∂x^h`.
    df1_squared: Vec<f64>,
    /// `F₂²(u, v)` and `∂F₂²/∂v^β`.
    big_f2: f64,
    dbig_f2: Vec<f64>,
    y: Vec<f64>,
}

fn require_wp(spec: &DWPSpec) -> Result<()> {
    if spec.is_wp()? {
        Ok(())
    } else {
        Err(Error::HypothesisViolation {
            theorem: "warped-product block formulas",
            detail: "the formulas are stated for f2 ≡ 1".into(),
        })
    }
}

fn warped_parts(spec: &DWPSpec, p: &Point, depth: Depth) -> Result<WarpedParts> {
    let (p1, p2) = spec.split(p);
    let geo1 = FinslerEvaluator::new(&spec.m1, depth)?.at(&p1.x, &p1.y)?;
    let geo2 = FinslerEvaluator::new(&spec.m2, depth)?.at(&p2.x, &p2.y)?;
    let (f1, grad) = value_and_gradient(&spec.f1, &p1.x)?;
    let jet2 = jet_eval(&spec.m2.f_squared, &p2.x, &p2.y, 0, 1)?;
    let dbig_f2 = (0..spec.n2()).map(|b| jet2.derivative(&MultiIndex::fiber(&[b]))).collect::<Result<_>>()?;
    Ok(WarpedParts {
        n1: spec.n1(),
        n2: spec.n2(),
        geo1,
        geo2,
        f1_squared: f1 * f1,
        df1_squared: grad.iter().map(|g| 2.0 * f1 * g).collect(),
        big_f2: jet2.value(),
        dbig_f2,
        y: p1.y,
    })
}

fn check_point(spec: &DWPSpec, p: &Point) -> Result<()> {
    if p.x.len() != spec.dimension() || p.y.len() != spec.dimension() {
        return Err(Error::Dimension(format!(
            "composite point needs {} base and fiber coordinates",
            spec.dimension()
        )));
    }
    Ok(())
}

/// Block assembly of the composite fundamental tensor versus direct
/// evaluation: `g_ij`, `f₁² g_αβ`, zero mixed blocks (tolerance 1e-9).
pub fn dwp_fundamental_blocks(spec: &DWPSpec, composite: &MetricSpec, p: &Point) -> Result<BlockReport> {
    require_wp(spec)?;
    check_point(spec, p)?;
    let parts = warped_parts(spec, p, Depth::Metric)?;
    let direct_geo = FinslerEvaluator::new(composite, Depth::Metric)?.at(&p.x, &p.y)?;
    let (n1, n2) = (parts.n1, parts.n2);
    let g1 = parts.geo1.g();
    let g2 = parts.geo2.g();
    let layout: [(&'static str, [Slot; 2], bool); 4] = [
        ("ij", [Slot::L, Slot::L], false),
        ("alpha_beta", [Slot::G, Slot::G], false),
        ("i_beta", [Slot::L, Slot::G], true),
        ("alpha_j", [Slot::G, Slot::L], true),
    ];
    let mut formula = Vec::new();
    let mut direct = Vec::new();
    let mut checks = Vec::new();
    for (name, pattern, zero) in layout {
        let fb = build_block(name, &pattern, n1, n2, |idx| match pattern {
            [Slot::L, Slot::L] => g1[idx[0] * n1 + idx[1]],
            [Slot::G, Slot::G] => parts.f1_squared * g2[idx[0] * n2 + idx[1]],
            _ => 0.0,
        });
        let db = extract_block(name, &pattern, n1, n2, direct_geo.g());
        checks.push(compare_blocks(&fb, &db, 1e-9, zero));
        formula.push(fb);
        direct.push(db);
    }
    Ok(assemble("g", spec, p, formula, direct, checks))
}

fn assemble(
    tensor: &'static str,
    spec: &DWPSpec,
    p: &Point,
    formula: Vec<Block>,
    direct: Vec<Block>,
    checks: Vec<BlockCheck>,
) -> BlockReport {
    let sample = |blocks| BlockTensorSample { tensor, n1: spec.n1(), n2: spec.n2(), point: p.clone(), blocks };
    BlockReport { formula: sample(formula), direct: sample(direct), checks }
}

/// Product spray from the component sprays:
///
/// ```text
/// G^i = G₁^i − ¼ g₁^{ih} ∂_h f₁² F₂²
/// G^α = G₂^α + (4f₁²)⁻¹ g₂^{αλ} ∂_l f₁² ∂_λ F₂² y^l
/// ```
///
/// compared with the spray of the composite (1e-6 relative).
pub fn wp_spray(spec: &DWPSpec, composite: &MetricSpec, p: &Point) -> Result<BlockReport> {
    require_wp(spec)?;
    check_point(spec, p)?;
    let parts = warped_parts(spec, p, Depth::Spray)?;
    let direct_geo = FinslerEvaluator::new(composite, Depth::Spray)?.at(&p.x, &p.y)?;
    let (n1, n2) = (parts.n1, parts.n2);
    let ginv1 = parts.geo1.g_inverse();
    let ginv2 = parts.geo2.g_inverse();
    let s1 = parts.geo1.spray()?.components;
    let s2 = parts.geo2.spray()?.components;
    let dy: f64 = (0..n1).map(|l| parts.df1_squared[l] * parts.y[l]).sum();

    let fi = build_block("i", &[Slot::L], n1, n2, |idx| {
        let i = idx[0];
        let corr: f64 = (0..n1).map(|h| ginv1[i * n1 + h] * parts.df1_squared[h]).sum();
        s1[i] - 0.25 * corr * parts.big_f2
    });
    let fa = build_block("alpha", &[Slot::G], n1, n2, |idx| {
        let a = idx[0];
        let corr: f64 = (0..n2).map(|l| ginv2[a * n2 + l] * parts.dbig_f2[l]).sum();
        s2[a] + corr * dy / (4.0 * parts.f1_squared)
    });
    let spray = direct_geo.spray()?.components;
    let di = extract_block("i", &[Slot::L], n1, n2, &spray);
    let da = extract_block("alpha", &[Slot::G], n1, n2, &spray);
    let checks = vec![compare_blocks(&fi, &di, 1e-6, false), compare_blocks(&fa, &da, 1e-6, false)];
    Ok(assemble("G", spec, p, vec![fi, fa], vec![di, da], checks))
}

/// Names of the eight Berwald blocks, in report order.
pub const BERWALD_BLOCKS: [&str; 8] = [
    "k_i_j_l",
    "gamma_alpha_beta_lambda",
    "k_i_beta_l",
    "gamma_i_beta_lambda",
    "k_alpha_beta_l",
    "gamma_i_j_lambda",
    "k_alpha_beta_lambda",
    "gamma_i_j_k",
];

/// Formula tolerance for nonzero Berwald blocks, and the bound on blocks
/// declared zero.
pub const BERWALD_BLOCK_TOLERANCE: f64 = 1e-5;
pub const ZERO_BLOCK_TOLERANCE: f64 = 1e-7;

/// The eight Berwald blocks from component data versus the Berwald tensor
/// of the composite:
///
/// ```text
/// B^k_ijl = B₁^k_ijl − ¼ ∂³g₁^{kh}/∂y^i∂y^j∂y^l ∂_h f₁² F₂²
/// B^γ_αβλ = B₂^γ_αβλ
/// B^k_iβl = −¼ ∂²g₁^{kh}/∂y^i∂y^l ∂_h f₁² ∂_β F₂²
/// B^k_αβl = −½ ∂g₁^{kh}/∂y^l ∂_h f₁² g₂_αβ
/// B^k_αβλ = −∂_h f₁² g₁^{kh} C₂_αβλ
/// B^γ_iβλ = B^γ_ijλ = B^γ_ijk = 0
/// ```
pub fn wp_berwald_blocks(spec: &DWPSpec, composite: &MetricSpec, p: &Point) -> Result<BlockReport> {
    require_wp(spec)?;
    check_point(spec, p)?;
    let parts = warped_parts(spec, p, Depth::Berwald)?;
    let direct_geo = FinslerEvaluator::new(composite, Depth::Berwald)?.at(&p.x, &p.y)?;
    let dense = direct_geo.berwald()?.components;
    let (n1, n2) = (parts.n1, parts.n2);
    let g1 = &parts.geo1;
    let b1 = g1.berwald()?;
    let b2 = parts.geo2.berwald()?;
    let g2 = parts.geo2.g();
    let c2 = parts.geo2.cartan_components();
    let ginv1 = g1.g_inverse();
    let df = &parts.df1_squared;
    // Σ_h ∂^β g₁^{kh} ∂_h f₁²
    let contracted = |k: usize, vars: &[usize]| -> Result<f64> {
        let mut acc = 0.0;
        for (h, d) in df.iter().enumerate() {
            acc += g1.ginv_derivative(k, h, vars)? * d;
        }
        Ok(acc)
    };

    use Slot::{G, L};
    let patterns: [[Slot; 4]; 8] = [
        [L, L, L, L],
        [G, G, G, G],
        [L, L, G, L],
        [G, L, G, G],
        [L, G, G, L],
        [G, L, L, G],
        [L, G, G, G],
        [G, L, L, L],
    ];
    let mut formula = Vec::new();
    let mut direct = Vec::new();
    let mut checks = Vec::new();
    let mut failure = None;
    for (name, pattern) in BERWALD_BLOCKS.iter().zip(patterns) {
        let declared_zero = name.starts_with("gamma_i");
        let eval = |idx: &[usize]| -> Result<f64> {
            Ok(match *name {
                "k_i_j_l" => {
                    b1.get(idx) - 0.25 * contracted(idx[0], &[idx[1], idx[2], idx[3]])? * parts.big_f2
                }
                "gamma_alpha_beta_lambda" => b2.get(idx),
                "k_i_beta_l" => -0.25 * contracted(idx[0], &[idx[1], idx[3]])? * parts.dbig_f2[idx[2]],
                "k_alpha_beta_l" => -0.5 * contracted(idx[0], &[idx[3]])? * g2[idx[1] * n2 + idx[2]],
                "k_alpha_beta_lambda" => {
                    let s: f64 = (0..n1).map(|h| df[h] * ginv1[idx[0] * n1 + h]).sum();
                    -s * c2[(idx[1] * n2 + idx[2]) * n2 + idx[3]]
                }
                _ => 0.0,
            })
        };
        let fb = build_block(name, &pattern, n1, n2, |idx| match eval(idx) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        });
        let db = extract_block(name, &pattern, n1, n2, &dense);
        let tol = if declared_zero { ZERO_BLOCK_TOLERANCE } else { BERWALD_BLOCK_TOLERANCE };
        checks.push(compare_blocks(&fb, &db, tol, declared_zero));
        formula.push(fb);
        direct.push(db);
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(assemble("B", spec, p, formula, direct, checks))
}

/// Sup-norms of the contraction conditions over component samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionNorms {
    /// `sup |C₁^{ij}_k ∂f₁/∂x^i|`.
    pub cartan_f1: f64,
    /// `sup |∂g₁^{ij}/∂y^k ∂f₁/∂x^i|`.
    pub dginv_f1: f64,
    /// `sup |C₂^{αβ}_γ ∂f₂/∂u^α|`.
    pub cartan_f2: f64,
    /// `sup |C₂^{γν}_γ ∂f₂/∂u^ν|`.
    pub trace_f2: f64,
    pub tolerance: f64,
}

fn contraction_norms(m: &MetricSpec, f: &Expr, policy: &SamplingPolicy) -> Result<(f64, f64, f64)> {
    let eval = FinslerEvaluator::new(m, Depth::Metric)?;
    let n = m.dimension;
    let (mut cartan, mut dginv, mut trace) = (0.0_f64, 0.0_f64, 0.0_f64);
    for p in policy.sample_points(m)? {
        let (_, df) = value_and_gradient(f, &p.x)?;
        let (raised, dg) = eval.at(&p.x, &p.y)?.cartan_raised();
        let mut tr = 0.0;
        for j in 0..n {
            for k in 0..n {
                let c: f64 = (0..n).map(|i| raised.get(&[i, j, k]) * df[i]).sum();
                let d: f64 = (0..n).map(|i| dg.get(&[i, j, k]) * df[i]).sum();
                cartan = cartan.max(c.abs());
                dginv = dginv.max(d.abs());
            }
            // C^{γν}_γ ∂_ν f with ν = j
            tr += (0..n).map(|g| raised.get(&[g, j, g])).sum::<f64>() * df[j];
        }
        trace = trace.max(tr.abs());
    }
    Ok((cartan, dginv, trace))
}

pub fn condition_norms(spec: &DWPSpec, policy: &SamplingPolicy, tolerance: f64) -> Result<ConditionNorms> {
    let (cartan_f1, dginv_f1, _) = contraction_norms(&spec.m1, &spec.f1, policy)?;
    let (cartan_f2, _, trace_f2) = contraction_norms(&spec.m2, &spec.f2, policy)?;
    Ok(ConditionNorms { cartan_f1, dginv_f1, cartan_f2, trace_f2, tolerance })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Theorem {
    /// Composite Berwald ⇔ `M₁` Riemannian, `M₂` Berwald, `C₁^{ij}_k ∂_i f₁ = 0`.
    T1,
    /// Composite Berwald ⇔ `M₂` Riemannian, `M₁` Berwald, `C₂^{ij}_k ∂_i f₂ = 0`.
    T1Dual,
    /// Proper WP: composite Berwald ⇔ `M₂` Riemannian, `M₁` Berwald, `∂g₁^{ij}/∂y^k ∂_i f₁ = 0`.
    Cor1,
    /// Proper DWP: composite weakly Berwald ⇔ both factors weakly Berwald,
    /// `C₁^{ij}_k ∂_i f₁ = 0` and `C₂^{γν}_γ ∂_ν f₂ = 0`.
    T2,
    /// Proper WP: composite Douglas ⇔ `M₂` Riemannian, `M₁` Berwald, `C₁^{ij}_k ∂_i f₁ = 0`.
    Cor2,
    /// Isotropic mean Berwald curvature and either contraction vanishing ⇒
    /// composite weakly Berwald.
    T3,
}

impl Theorem {
    pub const ALL: [Theorem; 6] = [Theorem::T1, Theorem::T1Dual, Theorem::Cor1, Theorem::T2, Theorem::Cor2, Theorem::T3];

    pub fn name(self) -> &'static str {
        match self {
            Theorem::T1 => "theorem1",
            Theorem::T1Dual => "theorem1_dual",
            Theorem::Cor1 => "corollary1",
            Theorem::T2 => "theorem2",
            Theorem::Cor2 => "corollary2",
            Theorem::T3 => "theorem3",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Selection {
    All,
    Only(Theorem),
}

#[derive(Debug, Clone, PartialEq)]
pub enum EntryStatus {
    /// Both sides evaluated.
    Evaluated { left: bool, right: bool },
    /// Premise not met or data missing; the reason is recorded.
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceEntry {
    pub theorem: Theorem,
    pub status: EntryStatus,
}

impl EquivalenceEntry {
    /// `None` when skipped. For the one-directional theorem, agreement means
    /// the implication holds on the samples.
    pub fn agrees(&self) -> Option<bool> {
        match self.status {
            EntryStatus::Evaluated { left, right } => {
                Some(if self.theorem == Theorem::T3 { !left || right } else { left == right })
            }
            EntryStatus::Skipped(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub composite: ClassificationReport,
    pub m1: ClassificationReport,
    pub m2: ClassificationReport,
    pub conditions: ConditionNorms,
    /// `sup |E − ½(n+1) σ F⁻¹ h|` when `σ` is supplied.
    pub isotropy_residual: Option<f64>,
    pub entries: Vec<EquivalenceEntry>,
}

fn isotropy_residual(composite: &MetricSpec, sigma: &Expr, policy: &SamplingPolicy) -> Result<f64> {
    let eval = FinslerEvaluator::new(composite, Depth::Berwald)?;
    let n = composite.dimension;
    let mut worst = 0.0_f64;
    for p in policy.sample_points(composite)? {
        let geo = eval.at(&p.x, &p.y)?;
        let e = geo.mean_berwald()?;
        let g = geo.g();
        let f2 = geo.f_squared();
        let s = sigma.eval(&p.x, &[])?;
        let yl: Vec<f64> = (0..n).map(|i| (0..n).map(|j| g[i * n + j] * p.y[j]).sum()).collect();
        for j in 0..n {
            for k in 0..n {
                let h = g[j * n + k] - yl[j] * yl[k] / f2;
                let target = 0.5 * (n as f64 + 1.0) * s * h / math::sqrt(f2);
                worst = worst.max((e.get(&[j, k]) - target).abs());
            }
        }
    }
    Ok(worst)
}

/// Evaluates both sides of the product theorems on samples. Disagreements
/// are reported, not raised; with [`Selection::Only`] an unmet premise is a
/// [`Error::HypothesisViolation`].
pub fn check_theorem_equivalences(
    spec: &DWPSpec,
    policy: &SamplingPolicy,
    tol: &Tolerances,
    selection: Selection,
) -> Result<EquivalenceReport> {
    let composite = dwp_construct(spec)?;
    let proper = spec.is_proper()?;
    let proper_wp = spec.is_proper_wp()?;
    if let Selection::Only(t) = &selection {
        let unmet = match t {
            Theorem::T1 | Theorem::T1Dual => None,
            Theorem::Cor1 | Theorem::Cor2 => (!proper_wp).then_some("requires a proper warped product (f2 ≡ 1, f1 nonconstant)"),
            Theorem::T2 => (!proper).then_some("requires a proper doubly warped product"),
            Theorem::T3 => spec.isotropic_scalar.is_none().then_some("requires an isotropic scalar σ"),
        };
        if let Some(detail) = unmet {
            return Err(Error::HypothesisViolation { theorem: t.name(), detail: detail.into() });
        }
    }
    let c = classify(&composite, policy, tol)?;
    let r1 = classify(&spec.m1, policy, tol)?;
    let r2 = classify(&spec.m2, policy, tol)?;
    let cond = condition_norms(spec, policy, tol.cartan)?;
    let zero = |v: f64| v <= cond.tolerance;
    let iso = match &spec.isotropic_scalar {
        Some(sigma) => Some(isotropy_residual(&composite, sigma, policy)?),
        None => None,
    };

    let mut entries = Vec::new();
    for t in Theorem::ALL {
        if let Selection::Only(only) = &selection {
            if *only != t {
                continue;
            }
        }
        let skip = |why: &str| EntryStatus::Skipped(why.into());
        let status = match t {
            Theorem::T1 => EntryStatus::Evaluated {
                left: c.berwald.verdict,
                right: r1.riemannian.verdict && r2.berwald.verdict && zero(cond.cartan_f1),
            },
            Theorem::T1Dual => EntryStatus::Evaluated {
                left: c.berwald.verdict,
                right: r2.riemannian.verdict && r1.berwald.verdict && zero(cond.cartan_f2),
            },
            Theorem::Cor1 if proper_wp => EntryStatus::Evaluated {
                left: c.berwald.verdict,
                right: r2.riemannian.verdict && r1.berwald.verdict && zero(cond.dginv_f1),
            },
            Theorem::T2 if proper => EntryStatus::Evaluated {
                left: c.weakly_berwald.verdict,
                right: r1.weakly_berwald.verdict
                    && r2.weakly_berwald.verdict
                    && zero(cond.cartan_f1)
                    && zero(cond.trace_f2),
            },
            Theorem::Cor2 if proper_wp => EntryStatus::Evaluated {
                left: c.douglas.verdict,
                right: r2.riemannian.verdict && r1.berwald.verdict && zero(cond.cartan_f1),
            },
            Theorem::T3 => match iso {
                None => skip("no isotropic scalar supplied; isotropic mean Berwald curvature is undefined without it"),
                Some(res) if res > tol.mean_berwald => {
                    if matches!(selection, Selection::Only(_)) {
                        return Err(Error::HypothesisViolation {
                            theorem: t.name(),
                            detail: format!("mean Berwald curvature is not isotropic for σ (residual {res:e})"),
                        });
                    }
                    skip("mean Berwald curvature is not isotropic for the supplied σ")
                }
                Some(_) => EntryStatus::Evaluated {
                    left: zero(cond.cartan_f1) || zero(cond.trace_f2),
                    right: c.weakly_berwald.verdict,
                },
            },
            Theorem::Cor1 | Theorem::Cor2 => skip("not a proper warped product"),
            Theorem::T2 => skip("not a proper doubly warped product"),
        };
        entries.push(EquivalenceEntry { theorem: t, status });
    }
    Ok(EquivalenceReport { composite: c, m1: r1, m2: r2, conditions: cond, isotropy_residual: iso, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn exp_warp() -> DWPSpec {
        DWPSpec::new(catalog::euclidean(2), catalog::euclidean(2), Expr::x(0).exp(), Expr::constant(1.0)).unwrap()
    }

    #[test]
    fn flags() {
        let s = exp_warp();
        assert!(s.is_wp().unwrap());
        assert!(!s.f1_constant().unwrap());
        assert!(s.f2_constant().unwrap());
        assert!(!s.is_proper().unwrap());
        assert!(s.is_proper_wp().unwrap());
    }

    #[test]
    fn unit_warpings_give_direct_product() {
        let s = DWPSpec::new(catalog::euclidean(2), catalog::randers(0.5), Expr::constant(1.0), Expr::constant(1.0))
            .unwrap();
        let m = dwp_construct(&s).unwrap();
        let x = [0.2, 0.3, 0.4, 0.5];
        let y = [0.3, -0.4, 0.8, 0.1];
        let direct = 0.3f64 * 0.3 + 0.4 * 0.4 + s.m2.f_squared_at(&x[2..], &y[2..]).unwrap();
        assert!((m.f_squared_at(&x, &y).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn nonpositive_warping_rejected() {
        let s = DWPSpec::new(catalog::euclidean(2), catalog::euclidean(2), Expr::x(0) - 0.5, Expr::constant(1.0))
            .unwrap();
        assert!(matches!(dwp_construct(&s), Err(Error::InvalidWarping { which: "f1", .. })));
    }

    #[test]
    fn spray_of_exponential_warp() {
        let s = exp_warp();
        let m = dwp_construct(&s).unwrap();
        let p = Point::new(vec![0.3, 0.1, 0.5, 0.5], vec![0.2, 0.5, -0.6, 0.4]);
        let r = wp_spray(&s, &m, &p).unwrap().into_result().unwrap();
        let f2sq = 0.6f64 * 0.6 + 0.4 * 0.4;
        let g1 = r.direct.block("i").unwrap().components[0];
        assert!((g1 + 0.5 * (0.6f64).exp() * f2sq).abs() < 1e-12);
        assert!(r.direct.block("i").unwrap().components[1].abs() < 1e-12);
    }

    #[test]
    fn requires_wp() {
        let s = DWPSpec::new(catalog::euclidean(2), catalog::euclidean(2), Expr::constant(1.0), 1.0 + Expr::x(0))
            .unwrap();
        let m = dwp_construct(&s).unwrap();
        let p = Point::new(vec![0.3; 4], vec![0.5; 4]);
        assert!(matches!(wp_berwald_blocks(&s, &m, &p), Err(Error::HypothesisViolation { .. })));
    }
}
