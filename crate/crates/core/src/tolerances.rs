//! Numerical tolerances shared across the crate.
//!
//! All values assume ħ = 1 and the vacuum convention σ_vac = ½·I, so a pure
//! mode has symplectic eigenvalue exactly ½.

/// Max-norm bound on `S J Sᵀ − J` for a transform to count as canonical.
pub const CANONICITY: f64 = 1e-10;

/// Symmetry check for Hamiltonian and covariance matrices.
pub const SYMMETRY: f64 = 1e-12;

/// Slack below ½ allowed on symplectic eigenvalues of a valid state.
pub const VALIDITY: f64 = 1e-9;

/// Purity check used when transporting states.
pub const PURITY: f64 = 1e-9;

/// Purity check required before computing an entropy of entanglement.
/// Looser than [`PURITY`] because entropy is steep near ν = ½.
pub const ENTROPY_PURITY: f64 = 1e-6;

/// PPT separability threshold on the smallest transposed symplectic eigenvalue.
pub const PPT: f64 = 1e-9;

/// Upper-right block threshold separating point-like from complementary transforms.
pub const POINT_LIKE: f64 = 1e-12;

/// Default integrator step.
pub const DEFAULT_DT: f64 = 1e-3;

/// Relative tolerance on decoherence-time bisection.
pub const DECOHERENCE_BISECTION: f64 = 1e-3;

/// Default evolution horizon.
pub const DEFAULT_HORIZON: f64 = 10.0;

/// Default grid resolution of the wavefunction oracle.
pub const DEFAULT_GRID_POINTS: usize = 512;

/// Default grid half-extent, in units of the largest marginal standard deviation.
pub const DEFAULT_GRID_EXTENT: f64 = 6.0;

/// Agreement required between Gaussian formulas and the grid oracle.
pub const ORACLE_AGREEMENT: f64 = 1e-3;

/// Normalization check on Schmidt spectra.
pub const SCHMIDT_NORM: f64 = 1e-6;
