//! Sampled classification: Riemannian, Berwald, weakly Berwald, Douglas.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::crosscheck::{crosscheck_point, TensorComparison};
use crate::error::{Error, Result};
use crate::geometry::{Depth, FinslerEvaluator};
use crate::metric::{MetricSpec, Point};
use crate::sampling::SamplingPolicy;

/// Sup-norm thresholds below which a tensor counts as zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub cartan: f64,
    pub berwald: f64,
    pub mean_berwald: f64,
    pub douglas: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { cartan: 1e-8, berwald: 1e-7, mean_berwald: 1e-7, douglas: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredicateResult {
    pub verdict: bool,
    pub sup_norm: f64,
    pub tolerance: f64,
    /// Sample where the sup norm was attained.
    pub worst_point: Option<Point>,
}

impl PredicateResult {
    fn new(tolerance: f64) -> Self {
        Self { verdict: true, sup_norm: 0.0, tolerance, worst_point: None }
    }

    fn record(&mut self, norm: f64, p: &Point) {
        if self.worst_point.is_none() || norm > self.sup_norm {
            self.sup_norm = norm;
            self.worst_point = Some(p.clone());
        }
    }

    fn finish(&mut self) {
        self.verdict = self.sup_norm <= self.tolerance;
    }
}

/// Jet-versus-finite-difference comparisons run on a subset of samples.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CrosscheckSummary {
    pub samples: usize,
    pub comparisons: usize,
    /// Largest deviation-to-tolerance ratio seen.
    pub worst_ratio: f64,
    pub failures: Vec<TensorComparison>,
}

impl CrosscheckSummary {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn absorb(&mut self, checks: Vec<TensorComparison>) {
        self.samples += 1;
        for c in checks {
            self.comparisons += 1;
            self.worst_ratio = self.worst_ratio.max(c.worst_ratio);
            if !c.passed {
                self.failures.push(c);
            }
        }
    }

    pub fn merge(&mut self, other: CrosscheckSummary) {
        self.samples += other.samples;
        self.comparisons += other.comparisons;
        self.worst_ratio = self.worst_ratio.max(other.worst_ratio);
        self.failures.extend(other.failures);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub label: String,
    pub seed: u64,
    pub samples: usize,
    pub riemannian: PredicateResult,
    pub berwald: PredicateResult,
    pub weakly_berwald: PredicateResult,
    pub douglas: PredicateResult,
    pub crosscheck: CrosscheckSummary,
}

impl ClassificationReport {
    /// `(name, result)` in a fixed order.
    pub fn predicates(&self) -> [(&'static str, &PredicateResult); 4] {
        [
            ("riemannian", &self.riemannian),
            ("berwald", &self.berwald),
            ("weakly_berwald", &self.weakly_berwald),
            ("douglas", &self.douglas),
        ]
    }

    fn check_consistency(&self) -> Result<()> {
        let implications = [
            ("riemannian", self.riemannian.verdict, "berwald", self.berwald.verdict),
            ("berwald", self.berwald.verdict, "weakly_berwald", self.weakly_berwald.verdict),
            ("berwald", self.berwald.verdict, "douglas", self.douglas.verdict),
        ];
        for (p, pv, q, qv) in implications {
            if pv && !qv {
                return Err(Error::InconsistentVerdicts(format!(
                    "{p} holds but {q} fails for {}; tolerances are misconfigured",
                    self.label
                )));
            }
        }
        Ok(())
    }
}

/// Samples `C`, `B`, `E` and `D` over the policy's points and thresholds
/// their sup norms. A `policy.fd_fraction` share of the samples is also run
/// through the finite-difference oracle.
pub fn classify(m: &MetricSpec, policy: &SamplingPolicy, tol: &Tolerances) -> Result<ClassificationReport> {
    let points = policy.sample_points(m)?;
    let eval = FinslerEvaluator::new(m, Depth::Douglas)?;
    let mut report = ClassificationReport {
        label: m.label.clone(),
        seed: policy.seed,
        samples: points.len(),
        riemannian: PredicateResult::new(tol.cartan),
        berwald: PredicateResult::new(tol.berwald),
        weakly_berwald: PredicateResult::new(tol.mean_berwald),
        douglas: PredicateResult::new(tol.douglas),
        crosscheck: CrosscheckSummary::default(),
    };
    let checked = policy.crosscheck_indices(points.len());
    for (idx, p) in points.iter().enumerate() {
        let geo = eval.at(&p.x, &p.y)?;
        report.riemannian.record(geo.cartan().sup_norm(), p);
        report.berwald.record(geo.berwald()?.sup_norm(), p);
        report.weakly_berwald.record(geo.mean_berwald()?.sup_norm(), p);
        report.douglas.record(geo.douglas()?.sup_norm(), p);
        if checked.binary_search(&idx).is_ok() {
            report.crosscheck.absorb(crosscheck_point(m, &geo, Depth::Douglas)?);
        }
    }
    report.riemannian.finish();
    report.berwald.finish();
    report.weakly_berwald.finish();
    report.douglas.finish();
    report.check_consistency()?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn small() -> SamplingPolicy {
        SamplingPolicy::with_counts(42, 6, 4)
    }

    #[test]
    fn euclidean_is_everything() {
        let r = classify(&catalog::euclidean(2), &small(), &Tolerances::default()).unwrap();
        assert!(r.predicates().iter().all(|(_, p)| p.verdict));
        assert!(r.crosscheck.passed());
        assert_eq!(r.samples, 24);
    }

    #[test]
    fn quartic_is_berwald_not_riemannian() {
        let r = classify(&catalog::quartic_minkowski(2), &small(), &Tolerances::default()).unwrap();
        assert!(!r.riemannian.verdict);
        assert!(r.berwald.verdict && r.weakly_berwald.verdict && r.douglas.verdict);
        assert!(r.riemannian.sup_norm > 0.01);
    }

    #[test]
    fn randers_x_is_douglas_not_berwald() {
        let r = classify(&catalog::randers_x(), &small(), &Tolerances::default()).unwrap();
        assert!(!r.riemannian.verdict && !r.berwald.verdict);
        // closed drift form: projectively flat direction, D = 0
        assert!(r.douglas.verdict, "{:?}", r.douglas);
        assert!(r.crosscheck.passed(), "{:?}", r.crosscheck.failures);
    }

    #[test]
    fn contradictory_tolerances_are_flagged() {
        let tol = Tolerances { cartan: 1.0, berwald: 1e-7, ..Tolerances::default() };
        assert!(matches!(classify(&catalog::randers_x(), &small(), &tol), Err(Error::InconsistentVerdicts(_))));
    }
}
