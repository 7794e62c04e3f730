//! Numerical Finsler geometry on a single chart.
//!
//! Metrics are closed-form expressions for `F²(x, y)`. Mixed partials come
//! from truncated Taylor jets ([`jet`]); a finite-difference oracle ([`fd`])
//! checks them independently. On top of that sit the fundamental tensor,
//! Cartan torsion, spray and Berwald-family curvatures ([`geometry`]),
//! sampled classification ([`classify`]), doubly warped products
//! ([`warped`]) and the two-dimensional reconstruction pipeline
//! ([`theorem2d`]).
//!
//! The crate is `no_std` and needs only `alloc`.

#![cfg_attr(not(test), no_std)]
// Negated float comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod catalog;
pub mod classify;
pub mod crosscheck;
pub mod error;
pub mod expr;
pub mod expr_gen;
pub mod fd;
pub mod geometry;
pub mod jet;
pub mod linalg;
pub mod math;
pub mod metric;
pub mod poly;
pub mod sampling;
pub mod tensor;
pub mod theorem2d;
pub mod warped;

pub use error::{DomainViolation, Error, NodePath, Result};
pub use expr::{Expr, Univariate};
pub use fd::{fd_derivative, FdEstimate};
pub use geometry::{Depth, FinslerEvaluator, PointGeometry};
pub use jet::{jet_eval, Jet, JetSpace, MultiIndex};
pub use metric::{MetricSpec, Point};
pub use sampling::SamplingPolicy;
pub use tensor::{Provenance, TensorSample};
