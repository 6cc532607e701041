use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: String,
        expected: String,
        found: String,
    },

    #[error("{what} is not symmetric (max asymmetry {asymmetry:.3e})")]
    NotSymmetric { what: String, asymmetry: f64 },

    #[error("{0} is singular")]
    Singular(String),

    #[error("transform is not canonical: max |S J S^T - J| = {residual:.3e} exceeds {tol:.1e}")]
    NotSymplectic { residual: f64, tol: f64 },

    #[error("invalid mode system: {0}")]
    InvalidSystem(String),

    #[error("invalid division: {0}")]
    InvalidDivision(String),

    #[error("Hamiltonian matrix is not positive definite: eigenvalue {eigenvalue:.6e}")]
    NotPositiveDefinite { eigenvalue: f64 },

    #[error(
        "Hamiltonian eigenvalue {eigenvalue:.6e} is not positive: the Hamiltonian has a free or unstable \
         direction; add a confining trap or prepare that mode as a wavepacket"
    )]
    UnconfinedMode { eigenvalue: f64 },

    #[error("covariance violates the uncertainty bound: min symplectic eigenvalue {min_nu:.12} < 1/2")]
    InvalidState { min_nu: f64 },

    #[error("state is mixed (max symplectic eigenvalue {max_nu:.12}); {context}")]
    MixedState { max_nu: f64, context: String },

    #[error(
        "transform is complementary (new positions depend on old momenta): positions and momenta \
         lack simultaneous sharp values, so moments cannot be inverted through it"
    )]
    ComplementaryTransform,

    #[error("unreachable divisions, missing transforms: {}", missing.join(", "))]
    UnreachableDivision { missing: Vec<String> },

    #[error("division {0} carries no entanglement to lose")]
    NoEntanglement(String),

    #[error("step size underflow at t = {t}: dt = {dt:.3e} cannot keep the state valid")]
    StepUnderflow { t: f64, dt: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("wavefunction norm {norm} deviates from 1")]
    NotNormalized { norm: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("invalid config ({} problem{}):\n  {}", issues.len(), if issues.len() == 1 { "" } else { "s" }, issues.join("\n  "))]
    Config { issues: Vec<String> },

    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn dim(what: impl Into<String>, expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            what: what.into(),
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    /// Process exit code used by the CLI: 3 for physics-validity failures,
    /// 4 for numerical failures, 2 for malformed input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DimensionMismatch { .. }
            | Error::InvalidSystem(_)
            | Error::InvalidDivision(_)
            | Error::InvalidArgument(_)
            | Error::UnreachableDivision { .. }
            | Error::Parse { .. }
            | Error::Config { .. }
            | Error::Io { .. } => 2,
            Error::NotSymmetric { .. }
            | Error::NotSymplectic { .. }
            | Error::NotPositiveDefinite { .. }
            | Error::UnconfinedMode { .. }
            | Error::InvalidState { .. }
            | Error::MixedState { .. }
            | Error::ComplementaryTransform
            | Error::NoEntanglement(_)
            | Error::Singular(_) => 3,
            Error::StepUnderflow { .. } | Error::NotNormalized { .. } | Error::Numerical(_) => 4,
        }
    }
}
