//! Entanglement of a Gaussian state relative to a chosen division.
//!
//! Logarithms are natural. Separability is decided by the PPT criterion,
//! which is exact for Gaussian 1×N splits; wider splits that pass PPT are
//! reported as [`Verdict::Undecided`].

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian_state::{symplectic_spectrum, GaussianState};
use crate::phase_space::{DivisionSpec, TransformRegistry};
use crate::tolerances;

/// `σ̃ = Λ σ Λ`, where `Λ` flips the sign of the momenta of `part`.
pub fn partial_transpose(sigma: &DMatrix<f64>, division: &DivisionSpec, part: &str) -> Result<DMatrix<f64>> {
    let n = division.n_modes();
    if sigma.shape() != (2 * n, 2 * n) {
        return Err(Error::dim(
            "covariance",
            format!("{0}x{0}", 2 * n),
            format!("{}x{}", sigma.nrows(), sigma.ncols()),
        ));
    }
    division.bipartite()?;
    let flipped = &division.part(part)?.modes;
    let mut out = sigma.clone();
    for &m in flipped {
        let p = m + n;
        out.row_mut(p).neg_mut();
        out.column_mut(p).neg_mut();
    }
    Ok(out)
}

/// Symplectic spectrum of the covariance partially transposed on the first part.
pub fn transposed_spectrum(state: &GaussianState, division: &DivisionSpec) -> Result<Vec<f64>> {
    let (first, _) = division.bipartite()?;
    let pt = partial_transpose(state.covariance(), division, &first.name)?;
    symplectic_spectrum(&pt)
}

/// `E_N = Σ_k max(0, −ln 2ν̃_k)`.
pub fn log_negativity_from_spectrum(transposed: &[f64]) -> f64 {
    transposed.iter().map(|nu| (-(2.0 * nu).ln()).max(0.0)).sum()
}

pub fn log_negativity(state: &GaussianState, division: &DivisionSpec) -> Result<f64> {
    check_modes(state, division)?;
    Ok(log_negativity_from_spectrum(&transposed_spectrum(state, division)?))
}

/// `f(ν) = (ν+½) ln(ν+½) − (ν−½) ln(ν−½)`, with `f(½) = 0`.
pub fn entropy_term(nu: f64) -> f64 {
    let up = nu + 0.5;
    let down = nu - 0.5;
    let lower = if down > 0.0 { down * down.ln() } else { 0.0 };
    up * up.ln() - lower
}

/// Von Neumann entropy of a Gaussian state from its symplectic spectrum.
pub fn von_neumann_entropy(spectrum: &[f64]) -> f64 {
    spectrum.iter().map(|&nu| entropy_term(nu).max(0.0)).sum()
}

/// Entropy of entanglement of a pure state across the division.
pub fn entanglement_entropy(state: &GaussianState, division: &DivisionSpec) -> Result<f64> {
    check_modes(state, division)?;
    let (first, _) = division.bipartite()?;
    require_pure(state, "entropy of entanglement is undefined for mixed states")?;
    Ok(von_neumann_entropy(&state.reduce(&first.modes)?.symplectic_spectrum()))
}

fn require_pure(state: &GaussianState, context: &str) -> Result<()> {
    let max_nu = state.symplectic_spectrum()[0];
    if (max_nu - 0.5).abs() > tolerances::ENTROPY_PURITY {
        return Err(Error::MixedState {
            max_nu,
            context: context.to_string(),
        });
    }
    Ok(())
}

fn check_modes(state: &GaussianState, division: &DivisionSpec) -> Result<()> {
    if state.n_modes() != division.n_modes() {
        return Err(Error::dim(
            format!("division {}", division.name()),
            state.n_modes(),
            division.n_modes(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Separable,
    Entangled,
    /// Passes PPT, but PPT is not sufficient for this split.
    Undecided,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Separable => "separable",
            Verdict::Entangled => "entangled",
            Verdict::Undecided => "undecided",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub division: String,
    pub log_negativity: f64,
    /// Present only for pure global states.
    pub entropy_of_entanglement: Option<f64>,
    pub min_ppt_symplectic_eigenvalue: f64,
    pub verdict: Verdict,
    pub first_reduced_spectrum: Vec<f64>,
    pub second_reduced_spectrum: Vec<f64>,
    pub transposed_spectrum: Vec<f64>,
}

/// Full entanglement analysis of `state` (already in the division's frame).
pub fn analyze(state: &GaussianState, division: &DivisionSpec) -> Result<EntanglementReport> {
    check_modes(state, division)?;
    let (first, second) = division.bipartite()?;
    let transposed = transposed_spectrum(state, division)?;
    let min_nu = transposed.last().copied().unwrap_or(0.5);
    let ppt_exact = first.modes.len() == 1 || second.modes.len() == 1;
    let verdict = if min_nu < 0.5 - tolerances::PPT {
        Verdict::Entangled
    } else if ppt_exact {
        Verdict::Separable
    } else {
        Verdict::Undecided
    };
    let first_reduced = state.reduce(&first.modes)?.symplectic_spectrum();
    let second_reduced = state.reduce(&second.modes)?.symplectic_spectrum();
    let entropy = require_pure(state, "")
        .ok()
        .map(|_| von_neumann_entropy(&first_reduced));
    Ok(EntanglementReport {
        division: division.name().to_string(),
        log_negativity: log_negativity_from_spectrum(&transposed),
        entropy_of_entanglement: entropy,
        min_ppt_symplectic_eigenvalue: min_nu,
        verdict,
        first_reduced_spectrum: first_reduced,
        second_reduced_spectrum: second_reduced,
        transposed_spectrum: transposed,
    })
}

/// A division whose modes are the coordinates produced by a named transform.
#[derive(Debug, Clone, PartialEq)]
pub struct RegisteredDivision {
    pub division: DivisionSpec,
    pub transform: String,
}

/// One report per division, each computed after carrying `state` into the
/// division's frame.
pub fn compare_divisions(
    state: &GaussianState,
    divisions: &[RegisteredDivision],
    registry: &TransformRegistry,
) -> Result<Vec<EntanglementReport>> {
    let n = state.n_modes();
    let missing: Vec<String> = divisions
        .iter()
        .filter(|d| registry.get(&d.transform, n).is_none())
        .map(|d| format!("{} (needs {})", d.division.name(), d.transform))
        .collect();
    if !missing.is_empty() {
        return Err(Error::UnreachableDivision { missing });
    }
    divisions
        .iter()
        .map(|d| {
            let s = registry.get(&d.transform, n).expect("checked above");
            analyze(&state.apply_transform(&s)?, &d.division)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::QuadraticHamiltonian;
    use crate::linalg::max_abs;
    use crate::phase_space::{extend_point_transform, ModeSystem, SymplecticTransform};
    use approx::assert_abs_diff_eq;

    fn split() -> DivisionSpec {
        DivisionSpec::bipartition("1|2", ("1", vec![0]), ("2", vec![1]), 2).unwrap()
    }

    fn pair_ground(c: f64) -> GaussianState {
        let sys = ModeSystem::unit_masses(2).unwrap();
        let h = QuadraticHamiltonian::build(&sys, &DMatrix::from_row_slice(2, 2, &[1.0, c, c, 1.0])).unwrap();
        GaussianState::ground_state(&h).unwrap()
    }

    #[test]
    fn product_is_unaffected_by_transpose() {
        let prod = GaussianState::product(&[
            GaussianState::wavepacket(0.4).unwrap(),
            GaussianState::isotropic(1, 0.9).unwrap(),
        ])
        .unwrap();
        let mut before = prod.symplectic_spectrum();
        let mut after = transposed_spectrum(&prod, &split()).unwrap();
        before.sort_by(f64::total_cmp);
        after.sort_by(f64::total_cmp);
        for (a, b) in before.iter().zip(&after) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        assert_eq!(log_negativity(&prod, &split()).unwrap(), 0.0);
        assert_abs_diff_eq!(entanglement_entropy(&GaussianState::vacuum(2), &split()).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn transpose_is_an_involution() {
        let g = pair_ground(0.5);
        let once = partial_transpose(g.covariance(), &split(), "2").unwrap();
        let twice = partial_transpose(&once, &split(), "2").unwrap();
        assert_eq!(&twice, g.covariance());
        assert!(partial_transpose(g.covariance(), &split(), "3").is_err());
    }

    #[test]
    fn coupled_ground_state_violates_ppt() {
        let g = pair_ground(0.5);
        let spec = transposed_spectrum(&g, &split()).unwrap();
        assert!(*spec.last().unwrap() < 0.5 - 1e-3);
        // flipping p₂ swaps p₊ and p₋, so ν̃ = √(var q₊ · var p₋) = ½√(ω₋/ω₊)
        let (wp, wm) = (1.5_f64.sqrt(), 0.5_f64.sqrt());
        let expected = 0.5 * (wm / wp).sqrt();
        assert_abs_diff_eq!(*spec.last().unwrap(), expected, epsilon = 1e-12);
        let report = analyze(&g, &split()).unwrap();
        assert_eq!(report.verdict, Verdict::Entangled);
        assert_abs_diff_eq!(report.log_negativity, -(2.0 * expected).ln(), epsilon = 1e-12);
    }

    #[test]
    fn entropy_is_symmetric_and_requires_purity() {
        let g = pair_ground(0.5);
        let a = entanglement_entropy(&g, &split()).unwrap();
        let flipped = DivisionSpec::bipartition("2|1", ("2", vec![1]), ("1", vec![0]), 2).unwrap();
        let b = entanglement_entropy(&g, &flipped).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        assert!(a > 0.0);
        let mixed = GaussianState::isotropic(2, 1.0).unwrap();
        assert!(matches!(
            entanglement_entropy(&mixed, &split()),
            Err(Error::MixedState { .. })
        ));
    }

    #[test]
    fn entropy_term_limits() {
        assert_eq!(entropy_term(0.5), 0.0);
        // ν = 1: (3/2) ln(3/2) − (1/2) ln(1/2)
        assert_abs_diff_eq!(entropy_term(1.0), 1.5 * 1.5_f64.ln() - 0.5 * 0.5_f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn normal_mode_division_is_separable() {
        let g = pair_ground(0.5);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let rot = extend_point_transform(&DMatrix::from_row_slice(2, 2, &[h, h, h, -h])).unwrap();
        let mut registry = TransformRegistry::new();
        registry.insert("normal_rotation", rot);
        let q = DivisionSpec::bipartition("Q1|Q2", ("Q1", vec![0]), ("Q2", vec![1]), 2).unwrap();
        let reports = compare_divisions(
            &g,
            &[
                RegisteredDivision { division: split(), transform: "identity".into() },
                RegisteredDivision { division: q, transform: "normal_rotation".into() },
            ],
            &registry,
        )
        .unwrap();
        assert_eq!(reports[0].verdict, Verdict::Entangled);
        assert_eq!(reports[1].verdict, Verdict::Separable);
        assert!(reports[1].log_negativity < 1e-10);
    }

    #[test]
    fn unreachable_division_lists_missing_transforms() {
        let g = pair_ground(0.2);
        let err = compare_divisions(
            &g,
            &[RegisteredDivision { division: split(), transform: "nowhere".into() }],
            &TransformRegistry::new(),
        )
        .unwrap_err();
        match err {
            Error::UnreachableDivision { missing } => assert!(missing[0].contains("nowhere")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wide_split_reports_undecided() {
        let div = DivisionSpec::bipartition("12|34", ("a", vec![0, 1]), ("b", vec![2, 3]), 4).unwrap();
        let report = analyze(&GaussianState::vacuum(4), &div).unwrap();
        assert_eq!(report.verdict, Verdict::Undecided);
        assert_eq!(report.log_negativity, 0.0);
    }

    #[test]
    fn local_transforms_keep_negativity() {
        let g = pair_ground(0.4);
        let before = log_negativity(&g, &split()).unwrap();
        let local = SymplecticTransform::from_generator(&DMatrix::from_row_slice(
            4,
            4,
            &[0.3, 0.0, 0.2, 0.0, 0.0, -0.5, 0.0, 0.1, 0.2, 0.0, 0.4, 0.0, 0.0, 0.1, 0.0, 0.2],
        ))
        .unwrap();
        let after = log_negativity(&g.apply_transform(&local).unwrap(), &split()).unwrap();
        assert_abs_diff_eq!(before, after, epsilon = 1e-9);
        assert!(max_abs(local.matrix()) > 1.0);
    }
}
