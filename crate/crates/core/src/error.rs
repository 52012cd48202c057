use thiserror::Error;

use crate::cell::CellViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid material `{name}`: {reason}")]
    InvalidMaterial { name: String, reason: String },

    #[error("invalid cell: {}", format_violations(.0))]
    InvalidCell(Vec<CellViolation>),

    #[error("invalid mesh request: {0}")]
    InvalidMesh(String),

    #[error("inclusion {index} is not resolved by any element at this resolution")]
    UnresolvedInclusion { index: usize },

    #[error("no elasticity tensor for material `{0}`")]
    MissingMaterial(String),

    #[error("singular cell system: {0}")]
    SingularSystem(String),

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("field does not belong to this mesh: {0}")]
    MeshMismatch(String),

    #[error("missing corrector for mode {0}")]
    MissingMode(String),

    #[error("degenerate in-plane rigidity for pair {0}")]
    DegenerateRigidity(String),

    #[error("zero-magnitude mode cannot be normalised")]
    ZeroMagnitude,

    #[error("{0}")]
    Analysis(String),

    #[error("incongruent zones: {0}")]
    IncongruentZones(String),

    #[error("config: {0}")]
    Config(String),

    #[error("unsupported export format `{0}`")]
    UnsupportedFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(v: &[CellViolation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

impl Error {
    /// Whether this error came from the solve stage rather than from input validation.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::SingularSystem(_) | Error::NotConverged { .. }
        )
    }
}
