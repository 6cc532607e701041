//! Phase-space conventions, linear canonical transformations and divisions.
//!
//! Phase-space vectors use block ordering `z = (x_1..x_n, p_1..p_n)`, so the
//! symplectic form is `J = [[0, I], [-I, 0]]` and a transform `S` is canonical
//! iff `S J Sᵀ = J`. New coordinates are `ζ = S z + d`.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, max_abs};
use crate::tolerances;

/// Ordered canonical degrees of freedom with their labels and masses.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSystem {
    labels: Vec<String>,
    masses: Vec<f64>,
}

impl ModeSystem {
    pub fn new(labels: Vec<String>, masses: Vec<f64>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidSystem("at least one mode is required".into()));
        }
        if labels.len() != masses.len() {
            return Err(Error::dim("masses", labels.len(), masses.len()));
        }
        let unique: BTreeSet<&String> = labels.iter().collect();
        if unique.len() != labels.len() {
            return Err(Error::InvalidSystem("mode labels must be unique".into()));
        }
        if let Some((i, m)) = masses.iter().enumerate().find(|(_, m)| !(**m > 0.0) || !m.is_finite()) {
            return Err(Error::InvalidSystem(format!(
                "mass of mode {} must be positive and finite, got {m}",
                labels[i]
            )));
        }
        Ok(Self { labels, masses })
    }

    /// Unit-mass modes labelled `1..=n`.
    pub fn unit_masses(n: usize) -> Result<Self> {
        Self::new((1..=n).map(|i| i.to_string()).collect(), vec![1.0; n])
    }

    pub fn n_modes(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// The symplectic form `J` for `n` modes in block ordering.
pub fn symplectic_form(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, i + n)] = 1.0;
        j[(i + n, i)] = -1.0;
    }
    j
}

fn phase_dim(s: &DMatrix<f64>, what: &str) -> Result<usize> {
    let d = linalg::require_square(s, what)?;
    if d == 0 || d % 2 != 0 {
        return Err(Error::dim(what, "even, nonzero dimension", d));
    }
    Ok(d / 2)
}

/// `‖S J Sᵀ − J‖_max`.
pub fn canonicity_residual(s: &DMatrix<f64>) -> Result<f64> {
    let n = phase_dim(s, "symplectic matrix")?;
    let j = symplectic_form(n);
    Ok(max_abs(&(s * &j * s.transpose() - j)))
}

/// True iff `s` is canonical within `tol` for the given mode system.
pub fn validate_symplectic(system: &ModeSystem, s: &DMatrix<f64>, tol: f64) -> Result<bool> {
    let n = phase_dim(s, "symplectic matrix")?;
    if n != system.n_modes() {
        return Err(Error::dim(
            "symplectic matrix",
            format!("{0}x{0}", 2 * system.n_modes()),
            format!("{0}x{0}", 2 * n),
        ));
    }
    Ok(canonicity_residual(s)? <= tol)
}

/// Whether a division's new positions are functions of old positions only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivisionKind {
    PointLike,
    Complementary,
}

/// A validated linear canonical transformation `ζ = S z + d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticTransform {
    matrix: DMatrix<f64>,
    displacement: DVector<f64>,
    source: String,
    target: String,
}

impl SymplecticTransform {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(matrix, tolerances::CANONICITY)
    }

    pub fn with_tolerance(matrix: DMatrix<f64>, tol: f64) -> Result<Self> {
        let residual = canonicity_residual(&matrix)?;
        if !(residual <= tol) {
            return Err(Error::NotSymplectic { residual, tol });
        }
        let dim = matrix.nrows();
        Ok(Self {
            matrix,
            displacement: DVector::zeros(dim),
            source: "native".into(),
            target: "transformed".into(),
        })
    }

    pub fn identity(n_modes: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * n_modes, 2 * n_modes),
            displacement: DVector::zeros(2 * n_modes),
            source: "native".into(),
            target: "native".into(),
        }
    }

    /// The linear flow `exp(J K)` generated by a symmetric quadratic form `K`.
    pub fn from_generator(generator: &DMatrix<f64>) -> Result<Self> {
        let n = phase_dim(generator, "generator")?;
        linalg::require_symmetric(generator, "generator", tolerances::SYMMETRY)?;
        let flow = (symplectic_form(n) * linalg::symmetrize(generator)).exp();
        Self::with_tolerance(flow, 1e-9)
    }

    pub fn with_displacement(mut self, displacement: DVector<f64>) -> Result<Self> {
        if displacement.len() != self.matrix.nrows() {
            return Err(Error::dim("displacement", self.matrix.nrows(), displacement.len()));
        }
        self.displacement = displacement;
        Ok(self)
    }

    pub fn with_labels(mut self, source: impl Into<String>, target: impl Into<String>) -> Self {
        self.source = source.into();
        self.target = target.into();
        self
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn displacement(&self) -> &DVector<f64> {
        &self.displacement
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn residual(&self) -> f64 {
        let j = symplectic_form(self.n_modes());
        max_abs(&(&self.matrix * &j * self.matrix.transpose() - j))
    }

    /// `S⁻¹ = −J Sᵀ J`, with the displacement mapped back as well.
    pub fn inverse(&self) -> Self {
        let j = symplectic_form(self.n_modes());
        let inv = -(&j * self.matrix.transpose() * &j);
        let displacement = -(&inv * &self.displacement);
        Self {
            matrix: inv,
            displacement,
            source: self.target.clone(),
            target: self.source.clone(),
        }
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &SymplecticTransform) -> Result<Self> {
        if first.n_modes() != self.n_modes() {
            return Err(Error::dim("composed transform", self.n_modes(), first.n_modes()));
        }
        Ok(Self {
            matrix: &self.matrix * &first.matrix,
            displacement: &self.matrix * &first.displacement + &self.displacement,
            source: first.source.clone(),
            target: self.target.clone(),
        })
    }

    pub fn apply(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        if z.len() != self.matrix.nrows() {
            return Err(Error::dim("phase-space vector", self.matrix.nrows(), z.len()));
        }
        Ok(&self.matrix * z + &self.displacement)
    }

    /// The n×n block giving new positions from old positions.
    pub fn position_block(&self) -> DMatrix<f64> {
        let n = self.n_modes();
        self.matrix.view((0, 0), (n, n)).into_owned()
    }

    /// The n×n block giving new positions from old momenta.
    pub fn position_from_momentum_block(&self) -> DMatrix<f64> {
        let n = self.n_modes();
        self.matrix.view((0, n), (n, n)).into_owned()
    }

    pub fn classify(&self) -> DivisionKind {
        classify_division(self)
    }
}

/// Completes a configuration-space map `x' = T x` to the canonical
/// transform `blockdiag(T, T⁻ᵀ)`.
pub fn extend_point_transform(position_map: &DMatrix<f64>) -> Result<SymplecticTransform> {
    let n = linalg::require_square(position_map, "position map")?;
    if n == 0 {
        return Err(Error::dim("position map", "nonempty", 0));
    }
    let inv = linalg::inverse(position_map, "position map")?;
    let det = position_map.determinant();
    if !det.is_finite() || det.abs() < 1e-14 * max_abs(position_map).powi(n as i32) {
        return Err(Error::Singular("position map".into()));
    }
    SymplecticTransform::new(linalg::block_diag(position_map, &inv.transpose()))
}

/// Centre-of-mass / relative-coordinate transform for two modes:
/// `X = (m1 x1 + m2 x2)/(m1 + m2)`, `r = x1 − x2`, with conjugate momenta
/// `P = p1 + p2` and `p_r = (m2 p1 − m1 p2)/(m1 + m2)`.
pub fn two_body_transform(m1: f64, m2: f64) -> Result<SymplecticTransform> {
    if !(m1 > 0.0 && m2 > 0.0) || !m1.is_finite() || !m2.is_finite() {
        return Err(Error::InvalidSystem(format!(
            "two-body masses must be positive, got ({m1}, {m2})"
        )));
    }
    let total = m1 + m2;
    let t = DMatrix::from_row_slice(2, 2, &[m1 / total, m2 / total, 1.0, -1.0]);
    // T⁻ᵀ in closed form, exact for any masses
    let momentum = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, m2 / total, -m1 / total]);
    Ok(SymplecticTransform::new(linalg::block_diag(&t, &momentum))?.with_labels("particles", "cm+relative"))
}

/// [`two_body_transform`] using the masses of a two-mode system.
pub fn two_body_transform_for(system: &ModeSystem) -> Result<SymplecticTransform> {
    if system.n_modes() != 2 {
        return Err(Error::InvalidSystem(format!(
            "two-body transform needs exactly 2 modes, system has {}",
            system.n_modes()
        )));
    }
    two_body_transform(system.masses()[0], system.masses()[1])
}

pub fn classify_division(s: &SymplecticTransform) -> DivisionKind {
    if max_abs(&s.position_from_momentum_block()) <= tolerances::POINT_LIKE {
        DivisionKind::PointLike
    } else {
        DivisionKind::Complementary
    }
}

/// First and second moments, either over positions only (length n) or over
/// the full phase space (length 2n).
fn moment_frame(
    means: &DVector<f64>,
    covars: &DMatrix<f64>,
    s: &SymplecticTransform,
) -> Result<bool> {
    let n = s.n_modes();
    let full = match means.len() {
        l if l == n => false,
        l if l == 2 * n => true,
        l => return Err(Error::dim("means", format!("{n} or {}", 2 * n), l)),
    };
    if covars.shape() != (means.len(), means.len()) {
        return Err(Error::dim(
            "covariance",
            format!("{0}x{0}", means.len()),
            format!("{}x{}", covars.nrows(), covars.ncols()),
        ));
    }
    linalg::require_symmetric(covars, "covariance", tolerances::SYMMETRY)?;
    let min = linalg::sym_eigenvalues(covars).first().copied().unwrap_or(0.0);
    if min < -1e-12 * max_abs(covars).max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "covariance is not positive semidefinite (eigenvalue {min:.3e})"
        )));
    }
    Ok(full)
}

fn propagate(
    means: &DVector<f64>,
    covars: &DMatrix<f64>,
    map: &DMatrix<f64>,
    shift: &DVector<f64>,
) -> (DVector<f64>, DMatrix<f64>) {
    (map * means + shift, map * covars * map.transpose())
}

/// Maps moments from the old coordinates into the new ones (`ζ = S z + d`).
pub fn forward_moments(
    means: &DVector<f64>,
    covars: &DMatrix<f64>,
    s: &SymplecticTransform,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let full = moment_frame(means, covars, s)?;
    if full {
        return Ok(propagate(means, covars, s.matrix(), s.displacement()));
    }
    if classify_division(s) == DivisionKind::Complementary {
        return Err(Error::ComplementaryTransform);
    }
    let n = s.n_modes();
    let shift = s.displacement().rows(0, n).into_owned();
    Ok(propagate(means, covars, &s.position_block(), &shift))
}

/// Recovers old-coordinate moments from moments measured in the new
/// coordinates. Refuses complementary transforms.
pub fn invert_moments(
    means: &DVector<f64>,
    covars: &DMatrix<f64>,
    s: &SymplecticTransform,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if classify_division(s) == DivisionKind::Complementary {
        return Err(Error::ComplementaryTransform);
    }
    let full = moment_frame(means, covars, s)?;
    let inv = s.inverse();
    if full {
        return Ok(propagate(means, covars, inv.matrix(), inv.displacement()));
    }
    // point-like: x = Dᵀ (ξ − d_x), where D is the momentum block of S
    let n = s.n_modes();
    let back = inv.position_block();
    let shifted = means - s.displacement().rows(0, n);
    Ok(propagate(&shifted, covars, &back, &DVector::zeros(n)))
}

/// A named subsystem: a set of mode indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Part {
    pub name: String,
    pub modes: Vec<usize>,
}

impl Part {
    pub fn new(name: impl Into<String>, modes: Vec<usize>) -> Self {
        Self {
            name: name.into(),
            modes,
        }
    }
}

/// A named assignment of all modes to disjoint, nonempty subsystems.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisionSpec {
    name: String,
    parts: Vec<Part>,
    n_modes: usize,
}

impl DivisionSpec {
    pub fn new(name: impl Into<String>, parts: Vec<Part>, n_modes: usize) -> Result<Self> {
        let name = name.into();
        if parts.is_empty() {
            return Err(Error::InvalidDivision(format!("{name}: no parts")));
        }
        let mut seen = vec![false; n_modes];
        let mut names = BTreeSet::new();
        for part in &parts {
            if !names.insert(part.name.as_str()) {
                return Err(Error::InvalidDivision(format!(
                    "{name}: duplicate part name {}",
                    part.name
                )));
            }
            if part.modes.is_empty() {
                return Err(Error::InvalidDivision(format!("{name}: part {} is empty", part.name)));
            }
            for &m in &part.modes {
                if m >= n_modes {
                    return Err(Error::InvalidDivision(format!(
                        "{name}: part {} refers to mode {m}, system has {n_modes}",
                        part.name
                    )));
                }
                if seen[m] {
                    return Err(Error::InvalidDivision(format!(
                        "{name}: mode {m} assigned to more than one part"
                    )));
                }
                seen[m] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidDivision(format!("{name}: mode {missing} is not assigned")));
        }
        Ok(Self { name, parts, n_modes })
    }

    /// Two-part division from explicit mode lists.
    pub fn bipartition(
        name: impl Into<String>,
        first: (&str, Vec<usize>),
        second: (&str, Vec<usize>),
        n_modes: usize,
    ) -> Result<Self> {
        Self::new(
            name,
            vec![Part::new(first.0, first.1), Part::new(second.0, second.1)],
            n_modes,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn bipartite(&self) -> Result<(&Part, &Part)> {
        match self.parts.as_slice() {
            [a, b] => Ok((a, b)),
            other => Err(Error::InvalidDivision(format!(
                "{}: a bipartition is required, found {} parts",
                self.name,
                other.len()
            ))),
        }
    }

    pub fn part(&self, name: &str) -> Result<&Part> {
        self.parts
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::InvalidDivision(format!("{}: no part named {name}", self.name)))
    }
}

/// Named transforms from the native coordinates; `identity` always resolves.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TransformRegistry {
    transforms: std::collections::BTreeMap<String, SymplecticTransform>,
}

impl TransformRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, transform: SymplecticTransform) {
        self.transforms.insert(name.into(), transform);
    }

    pub fn get(&self, name: &str, n_modes: usize) -> Option<SymplecticTransform> {
        match self.transforms.get(name) {
            Some(t) => Some(t.clone()),
            None if name == "identity" => Some(SymplecticTransform::identity(n_modes)),
            None => None,
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.transforms.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &SymplecticTransform)> {
        self.transforms.iter().map(|(k, v)| (k.as_str(), v))
    }
}
