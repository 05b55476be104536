//! Numerical complex Finsler geometry: Wirtinger derivatives on jet space,
//! Chern–Finsler curvature, Riemannian comparison on model spaces, Kähler
//! identity checks and Schwarz-lemma verification.

pub mod error;
pub mod scalar;
pub mod jet;
pub mod wirtinger;
pub mod expr;
pub mod maps;
pub mod linalg;
pub mod sampling;
pub mod metric;
pub mod chern;
pub mod quadrature;
pub mod comparison;
pub mod kahler;
pub mod schwarz;
pub mod report;

pub use error::{FinslerError, Result};
pub use metric::{evaluate_metric, levi_matrix, validate_metric, Metric, MetricDescriptor};
pub use scalar::{c64, Scalar, C64};
pub use wirtinger::{DerivativeRequest, DifferentiationPlan, JetPoint, Var};
