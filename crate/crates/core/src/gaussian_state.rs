//! Gaussian states: first and second moments over phase space.
//!
//! Covariances are symmetrized, `σ_ij = ½⟨{Δz_i, Δz_j}⟩`, so the vacuum is
//! `½·I` and every valid state has symplectic eigenvalues `ν ≥ ½`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hamiltonian::QuadraticHamiltonian;
use crate::linalg::{self, max_abs, phase_indices, submatrix, subvector};
use crate::phase_space::{symplectic_form, SymplecticTransform};
use crate::tolerances;

/// Symplectic eigenvalues of a symmetric `2n×2n` matrix: the magnitudes of
/// the eigenvalues of `iJσ`, one per mode, descending.
pub fn symplectic_spectrum(sigma: &DMatrix<f64>) -> Result<Vec<f64>> {
    let dim = linalg::require_square(sigma, "covariance")?;
    if dim == 0 || dim % 2 != 0 {
        return Err(Error::dim("covariance", "even, nonzero dimension", dim));
    }
    linalg::require_symmetric(sigma, "covariance", tolerances::SYMMETRY)?;
    let n = dim / 2;
    let j = symplectic_form(n);
    let mut pairs: Vec<f64> = match linalg::sym_sqrt(sigma) {
        // σ^{1/2} J σ^{1/2} is antisymmetric with singular values ν, ν, ...
        Ok(root) => (&root * &j * &root).singular_values().iter().copied().collect(),
        Err(_) => (j * linalg::symmetrize(sigma))
            .complex_eigenvalues()
            .iter()
            .map(|c| c.norm())
            .collect(),
    };
    pairs.sort_by(|a, b| b.total_cmp(a));
    Ok(pairs.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
}

impl GaussianState {
    /// Validates symmetry and the uncertainty bound `ν_min ≥ ½ − 1e−9`.
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        if covariance.shape() != (mean.len(), mean.len()) {
            return Err(Error::dim(
                "covariance",
                format!("{0}x{0}", mean.len()),
                format!("{}x{}", covariance.nrows(), covariance.ncols()),
            ));
        }
        let nu = symplectic_spectrum(&covariance)?;
        let min_nu = nu.last().copied().unwrap_or(0.5);
        if min_nu < 0.5 - tolerances::VALIDITY {
            return Err(Error::InvalidState { min_nu });
        }
        // eigenvalues of iJσ alone do not catch indefinite σ
        let min_eig = linalg::sym_eigenvalues(&covariance)[0];
        if !(min_eig > 0.0) {
            return Err(Error::InvalidState { min_nu: min_eig });
        }
        Ok(Self {
            mean,
            covariance: linalg::symmetrize(&covariance),
        })
    }

    pub fn vacuum(n_modes: usize) -> Self {
        Self {
            mean: DVector::zeros(2 * n_modes),
            covariance: DMatrix::identity(2 * n_modes, 2 * n_modes) * 0.5,
        }
    }

    /// Thermal-like state `σ = ν·I`, `ν ≥ ½`.
    pub fn isotropic(n_modes: usize, nu: f64) -> Result<Self> {
        Self::new(
            DVector::zeros(2 * n_modes),
            DMatrix::identity(2 * n_modes, 2 * n_modes) * nu,
        )
    }

    /// Single-mode minimum-uncertainty wavepacket with position spread `width`.
    pub fn wavepacket(width: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::InvalidArgument(format!("wavepacket width must be positive, got {width}")));
        }
        let var = width * width;
        Ok(Self {
            mean: DVector::zeros(2),
            covariance: DMatrix::from_diagonal(&DVector::from_vec(vec![var, 0.25 / var])),
        })
    }

    /// Ground state of a confining quadratic Hamiltonian, computed as the
    /// vacuum of its normal modes carried back to the native coordinates.
    pub fn ground_state(h: &QuadraticHamiltonian) -> Result<Self> {
        let modes = h.normal_modes().map_err(|e| match e {
            Error::NotPositiveDefinite { eigenvalue } => Error::UnconfinedMode { eigenvalue },
            other => other,
        })?;
        let back = modes.transform.inverse();
        let s = back.matrix();
        let covariance = linalg::symmetrize(&(s * s.transpose() * 0.5));
        let mean = match h.linear() {
            Some(b) => -linalg::inverse(h.matrix(), "Hamiltonian matrix")? * b,
            None => DVector::zeros(h.matrix().nrows()),
        };
        Ok(Self { mean, covariance })
    }

    /// Tensor product of single- or multi-mode states, modes in the given order.
    pub fn product(factors: &[GaussianState]) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument("product of zero states".into()));
        }
        let n: usize = factors.iter().map(|f| f.n_modes()).sum();
        let mut mean = DVector::zeros(2 * n);
        let mut cov = DMatrix::zeros(2 * n, 2 * n);
        let mut offset = 0;
        for f in factors {
            let k = f.n_modes();
            let target = phase_indices(&(offset..offset + k).collect::<Vec<_>>(), n);
            for (i, &r) in target.iter().enumerate() {
                mean[r] = f.mean[i];
                for (j, &c) in target.iter().enumerate() {
                    cov[(r, c)] = f.covariance[(i, j)];
                }
            }
            offset += k;
        }
        Ok(Self { mean, covariance: cov })
    }

    /// Product state in the frame reached by `frame`: every mode of the
    /// transformed Hamiltonian that is confined gets its ground state, every
    /// free mode gets a wavepacket of width `free_width`. The result is
    /// expressed in native coordinates. Fails if the frame does not decouple
    /// the modes.
    pub fn product_in_frame(
        h: &QuadraticHamiltonian,
        frame: &SymplecticTransform,
        free_width: FreeWidth,
    ) -> Result<Self> {
        let local = h.transform(frame)?;
        let n = local.n_modes();
        let m = local.matrix();
        let mut factors = Vec::with_capacity(n);
        let mut free = Vec::new();
        let mut confined_widths = Vec::new();
        for k in 0..n {
            let idx = [k, k + n];
            let others: Vec<usize> = (0..2 * n).filter(|i| !idx.contains(i)).collect();
            let cross = submatrix(m, &idx, &others);
            if max_abs(&cross) > 1e-10 * max_abs(m) {
                return Err(Error::InvalidArgument(format!(
                    "frame {} does not decouple mode {k} (cross coupling {:.3e})",
                    frame.target(),
                    max_abs(&cross)
                )));
            }
            let block = submatrix(m, &idx, &idx);
            if block[(0, 0)].abs() <= 1e-12 * max_abs(m) && block[(0, 1)].abs() <= 1e-12 * max_abs(m) {
                free.push(k);
                factors.push(None);
            } else {
                let g = Self::ground_state(&QuadraticHamiltonian::new(block, None)?)?;
                confined_widths.push(g.covariance[(0, 0)].sqrt());
                factors.push(Some(g));
            }
        }
        let width = match free_width {
            _ if free.is_empty() => 0.0,
            FreeWidth::Absolute(w) => w,
            FreeWidth::RelativeToConfined(ratio) => match confined_widths.as_slice() {
                [w] => ratio * w,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "a relative free width needs exactly one confined mode, frame has {}",
                        other.len()
                    )))
                }
            },
        };
        let factors = factors
            .into_iter()
            .map(|f| f.map_or_else(|| Self::wavepacket(width), Ok))
            .collect::<Result<Vec<_>>>()?;
        let local_state = Self::product(&factors)?;
        local_state.apply_transform(&frame.inverse())
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn n_modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn symplectic_spectrum(&self) -> Vec<f64> {
        symplectic_spectrum(&self.covariance).expect("state covariance is validated")
    }

    pub fn min_symplectic_eigenvalue(&self) -> f64 {
        self.symplectic_spectrum().last().copied().unwrap_or(0.5)
    }

    /// `Tr` form of purity, `Π (2ν_k)⁻¹`.
    pub fn purity(&self) -> f64 {
        self.symplectic_spectrum().iter().map(|nu| 0.5 / nu).product()
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        self.symplectic_spectrum().iter().all(|nu| (nu - 0.5).abs() <= tol)
    }

    /// `mean' = S·mean + d`, `σ' = S σ Sᵀ`.
    pub fn apply_transform(&self, s: &SymplecticTransform) -> Result<Self> {
        if s.n_modes() != self.n_modes() {
            return Err(Error::dim("transform", self.n_modes(), s.n_modes()));
        }
        let m = s.matrix();
        Ok(Self {
            mean: m * &self.mean + s.displacement(),
            covariance: linalg::symmetrize(&(m * &self.covariance * m.transpose())),
        })
    }

    /// Marginal state of the given modes, in the order listed.
    pub fn reduce(&self, modes: &[usize]) -> Result<Self> {
        let n = self.n_modes();
        if modes.is_empty() {
            return Err(Error::InvalidArgument("cannot reduce to an empty set of modes".into()));
        }
        let mut seen = vec![false; n];
        for &m in modes {
            if m >= n || std::mem::replace(&mut seen[m], true) {
                return Err(Error::InvalidArgument(format!(
                    "mode {m} is out of range or repeated (system has {n} modes)"
                )));
            }
        }
        let idx = phase_indices(modes, n);
        Ok(Self {
            mean: subvector(&self.mean, &idx),
            covariance: submatrix(&self.covariance, &idx, &idx),
        })
    }

    /// `‖Aσ + σAᵀ‖_max` with `A = J M`; zero for stationary states.
    pub fn stationarity_residual(&self, h: &QuadraticHamiltonian) -> f64 {
        let a = h.drift();
        max_abs(&(&a * &self.covariance + &self.covariance * a.transpose()))
    }
}

/// Width prescription for free (unconfined) modes in [`GaussianState::product_in_frame`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FreeWidth {
    Absolute(f64),
    /// Multiple of the position spread of the single confined mode's ground state.
    RelativeToConfined(f64),
}
