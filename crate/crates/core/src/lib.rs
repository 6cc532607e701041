//! Division-relative analysis of continuous-variable quantum systems.
//!
//! A composite system of `n` canonical modes can be split into subsystems in
//! many ways: any linear canonical (symplectic) change of coordinates defines
//! new subsystems. This crate re-partitions quadratic Hamiltonians under such
//! changes, tracks Gaussian states through them, and measures how
//! entanglement, interaction and decoherence depend on the chosen division.
//! A product state in one division is generally entangled in another.
//!
//! Conventions: ħ = 1, phase-space vectors ordered `(x_1..x_n, p_1..p_n)`,
//! vacuum covariance `½·I`, natural logarithms.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod entanglement;
pub mod error;
pub mod gaussian_state;
pub mod hamiltonian;
pub mod linalg;
pub mod open_system;
pub mod oracle;
pub mod phase_space;
pub mod report;
pub mod tolerances;

pub use entanglement::{EntanglementReport, RegisteredDivision, Verdict};
pub use error::{Error, Result};
pub use gaussian_state::{FreeWidth, GaussianState};
pub use hamiltonian::{NormalModeResult, PartitionBlocks, QuadraticHamiltonian};
pub use phase_space::{DivisionKind, DivisionSpec, ModeSystem, Part, SymplecticTransform, TransformRegistry};
