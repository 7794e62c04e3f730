use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Why an expression node could not be evaluated at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainViolation {
    /// `sqrt` argument was not strictly positive.
    NonPositiveSqrt(f64),
    /// Non-integer power of a non-positive base.
    NonPositivePowBase(f64),
    /// Logarithm of a non-positive argument.
    NonPositiveLog(f64),
    /// Quotient with a zero denominator.
    ZeroDenominator,
}

impl fmt::Display for DomainViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonPositiveSqrt(v) => write!(f, "sqrt of non-positive value {v:e}"),
            Self::NonPositivePowBase(v) => write!(f, "real power of non-positive base {v:e}"),
            Self::NonPositiveLog(v) => write!(f, "log of non-positive value {v:e}"),
            Self::ZeroDenominator => f.write_str("division by zero"),
        }
    }
}

/// Location of a node inside an expression tree: child positions from the root.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NodePath(pub Vec<usize>);

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("root")?;
        for c in &self.0 {
            write!(f, "/{}", c + 1)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("evaluation-domain error at {path} ({node}): {violation}")]
    Domain {
        path: NodePath,
        node: &'static str,
        violation: DomainViolation,
    },

    #[error("{kind}-coordinate index {index} outside declared dimension {dimension}")]
    CoordinateIndex {
        kind: char,
        index: usize,
        dimension: usize,
    },

    #[error("requested derivative order (x: {x_order}, y: {y_order}) exceeds engine caps (x: {x_cap}, y: {y_cap})")]
    OrderExceeded {
        x_order: usize,
        y_order: usize,
        x_cap: usize,
        y_cap: usize,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("finite-difference oracle failure: {0}")]
    OracleFailure(String),

    #[error("metric degeneracy: fundamental tensor not positive definite (eigenvalues {eigenvalues:?})")]
    MetricDegeneracy { eigenvalues: Vec<f64> },

    #[error("ill-conditioned metric: condition number {condition:e} exceeds {limit:e}")]
    IllConditioned { condition: f64, limit: f64 },

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("tensor {tensor} needs deeper fiber expansion than this evaluator provides")]
    DepthUnavailable { tensor: &'static str },

    #[error("invalid warping function {which}: {detail}")]
    InvalidWarping { which: &'static str, detail: String },

    #[error("formula violation in block {block}: deviation {deviation:e} > tolerance {tolerance:e}")]
    FormulaViolation {
        block: String,
        deviation: f64,
        tolerance: f64,
    },

    #[error("inconsistent verdicts: {0}")]
    InconsistentVerdicts(String),

    #[error("hypothesis violation for {theorem}: {detail}")]
    HypothesisViolation {
        theorem: &'static str,
        detail: String,
    },

    #[error("invalid case: {0}")]
    InvalidCase(String),

    #[error("not a Finsler metric: {0}")]
    NotFinsler(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
