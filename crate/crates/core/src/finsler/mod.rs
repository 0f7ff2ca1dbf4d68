//! Metric and nonlinear-connection data on tangent-bundle charts.

mod dmetric;
mod frames;
mod geodesic;
mod mdr;
mod sasaki;
mod spray;

pub use dmetric::{signature, DMetricField, DMetricJets, ExprDMetric, SignatureGuard, DET_TOL};
pub use frames::{nonholonomic_frames, FrameData};
pub use geodesic::{geodesic_integrate, GeodesicSample};
pub use mdr::{dispersion_omega2, finsler_from_mdr, MdrSpec};
pub use sasaki::{sasaki_assemble, sasaki_jets};
pub use spray::{hessian_metric, semi_spray_and_nconnection, FinslerDMetric, FinslerFunction, FinslerJets, SprayData};

use thiserror::Error;

use crate::exprkit::ExprError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("degenerate {block} block: |det| = {det:e}")]
    Degenerate { block: &'static str, det: f64 },
    #[error("{block} block is not symmetric at ({row}, {col})")]
    Asymmetric {
        block: &'static str,
        row: usize,
        col: usize,
    },
    #[error("fiber point lies on the zero section, where the Hessian of a non-quadratic F is undefined")]
    ZeroSection,
    #[error("degenerate Hessian along the geodesic at tau = {tau}: |det| = {det:e}")]
    GeodesicDegenerate { tau: f64, det: f64 },
    #[error("signature of g changed from {expected:?} to {found:?}")]
    SignatureChange {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}
