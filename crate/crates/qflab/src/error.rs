use thiserror::Error;

pub type Result<T> = std::result::Result<T, QfError>;

#[derive(Debug, Error)]
pub enum QfError {
    #[error("Fock dimension {dim} exceeds the limit {limit} (set QFLAB_MAX_DIM to raise it)")]
    DimensionOverflow { dim: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not a density matrix: {0}")]
    NotADensityMatrix(String),

    #[error("cutoff unsafe: occupation mass {mass:.3e} above level {level} exceeds {threshold:.1e}")]
    CutoffUnsafe { mass: f64, level: usize, threshold: f64 },

    #[error("invalid Bogoliubov map: relation residual {residual:.3e}")]
    InvalidBogoliubov { residual: f64 },

    #[error("matrix logarithm branch ambiguity: {0}")]
    BranchAmbiguity(String),

    #[error("state is not pure: residual {residual:.3e} exceeds tolerance")]
    NotPure { residual: f64 },

    #[error("matrix is not antisymmetric: residual {residual:.3e}")]
    NotAntisymmetric { residual: f64 },

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("statistics mismatch: {0}")]
    SpeciesMismatch(String),

    #[error("norm violation: {0}")]
    NormViolation(String),

    #[error("optimizer did not converge: {0}")]
    NonConvergence(String),

    #[error("shape mismatch: {0}")]
    Shape(String),
}

impl QfError {
    /// True for failures that come from numerics rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            QfError::CutoffUnsafe { .. }
                | QfError::BranchAmbiguity(_)
                | QfError::NonConvergence(_)
        )
    }
}
