use finslerforge_core::brane::BraneError;
use finslerforge_core::exprkit::ExprError;
use finslerforge_core::finsler::GeometryError;
use finslerforge_core::hl::HlError;
use finslerforge_core::solver::SolverError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("{context}: {message}")]
    Numeric { context: String, message: String },
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl ToString) -> CliError {
        CliError::Config {
            path: path.into(),
            message: message.to_string(),
        }
    }

    pub fn numeric(context: impl Into<String>, message: impl ToString) -> CliError {
        CliError::Numeric {
            context: context.into(),
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Io { .. } => 2,
            CliError::Numeric { .. } => 3,
        }
    }
}

/// Attaches a config path or a module name to errors from the core crate.
pub trait Context<T> {
    fn at(self, path: &str) -> Result<T, CliError>;
}

fn expr_is_config(e: &ExprError) -> bool {
    matches!(e, ExprError::Syntax { .. } | ExprError::Undeclared(_) | ExprError::Chart(_))
}

impl<T> Context<T> for Result<T, ExprError> {
    fn at(self, path: &str) -> Result<T, CliError> {
        self.map_err(|e| {
            if expr_is_config(&e) {
                CliError::config(path, e)
            } else {
                CliError::numeric(format!("exprkit ({path})"), e)
            }
        })
    }
}

impl<T> Context<T> for Result<T, GeometryError> {
    fn at(self, path: &str) -> Result<T, CliError> {
        self.map_err(|e| match e {
            GeometryError::Expr(inner) if expr_is_config(&inner) => CliError::config(path, inner),
            GeometryError::Dimension(_) | GeometryError::Asymmetric { .. } => CliError::config(path, e),
            other => CliError::numeric(format!("finsler_core ({path})"), other),
        })
    }
}

impl<T> Context<T> for Result<T, SolverError> {
    fn at(self, path: &str) -> Result<T, CliError> {
        self.map_err(|e| match e {
            SolverError::Config(_) => CliError::config(path, e),
            SolverError::Expr(inner) if expr_is_config(&inner) => CliError::config(path, inner),
            other => CliError::numeric(format!("solver ({path})"), other),
        })
    }
}

impl<T> Context<T> for Result<T, HlError> {
    fn at(self, path: &str) -> Result<T, CliError> {
        self.map_err(|e| match e {
            HlError::Pole { .. } | HlError::Invalid(_) | HlError::NotProjectable(_) => CliError::config(path, e),
            HlError::Expr(inner) if expr_is_config(&inner) => CliError::config(path, inner),
            other => CliError::numeric(format!("hl_model ({path})"), other),
        })
    }
}

impl<T> Context<T> for Result<T, BraneError> {
    fn at(self, path: &str) -> Result<T, CliError> {
        self.map_err(|e| match e {
            BraneError::Invalid(_) => CliError::config(path, e),
            BraneError::Solver(inner) => CliError::numeric(format!("brane ({path})"), inner),
            other => CliError::numeric(format!("brane ({path})"), other),
        })
    }
}
