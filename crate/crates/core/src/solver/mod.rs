//! Separated field equations on the three-shell ansatz: residuals,
//! exact solutions by quadrature, zero-torsion constraints, source algebra
//! and polarizations.

mod ansatz;
mod constraints;
mod embed;
mod field;
mod generate;
mod polarization;
mod residuals;

pub use ansatz::{
    coord, source_algebra, source_inverse, source_matrix, Axis, Grid, ShellAnsatz, SourceSpec, COORD_NAMES,
};
pub use constraints::{lc_constraints_check, LcReport, CONSTRAINTS};
pub use embed::{cross_module_check, CrossCheck, ShellZeroMetric};
pub use field::{FieldFn, Integral, CELL_WIDTH, QUAD_TOL};
pub use generate::{generate_solution, liouville_psi, GeneratingData};
pub use polarization::{polarization_deform, Polarization};
pub use residuals::{
    residuals_at, shell_residuals, shell_residuals_with, Excluded, OuterShellForm, PointResiduals, ResidualReport,
    DEGENERACY_TOL, FAMILIES,
};

use thiserror::Error;

use crate::exprkit::ExprError;
use crate::finsler::GeometryError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("degenerate data: {0}")]
    Degenerate(String),
    #[error("jet order {0} exceeds the supported maximum")]
    Order(usize),
    #[error("{0}")]
    Config(String),
}
