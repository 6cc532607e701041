//! Brute-force check of the Gaussian entanglement formulas.
//!
//! A pure two-mode Gaussian state is sampled as a position-space
//! wavefunction `ψ(x₁, x₂)` on a grid; the singular values of the amplitude
//! matrix are its Schmidt coefficients. Nothing here uses symplectic
//! eigenvalues, so agreement with [`crate::entanglement`] is a genuine
//! cross-check.

use nalgebra::{DMatrix, Matrix2, Vector2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian_state::GaussianState;
use crate::phase_space::{DivisionKind, SymplecticTransform};
use crate::tolerances;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSettings {
    pub points: usize,
    /// Half-extent of each axis in units of the largest marginal standard deviation.
    pub extent_factor: f64,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self {
            points: tolerances::DEFAULT_GRID_POINTS,
            extent_factor: tolerances::DEFAULT_GRID_EXTENT,
        }
    }
}

/// Uniform lattice `center − half_extent ..= center + half_extent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub center: f64,
    pub half_extent: f64,
    pub points: usize,
}

impl Grid {
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_extent / (self.points - 1) as f64
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        self.center - self.half_extent + i as f64 * self.spacing()
    }
}

/// Closed-form wavefunction of a pure two-mode Gaussian state,
/// `ψ(x) = N exp(−½ δᵀ(Γ_R − iΓ_I)δ + i p̄·δ)` with `δ = x − x̄`,
/// `Γ_R = ½ σ_xx⁻¹` and `Γ_I = σ_xx⁻¹ σ_xp`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureGaussianWavefunction {
    mean_position: Vector2<f64>,
    mean_momentum: Vector2<f64>,
    gamma_re: Matrix2<f64>,
    gamma_im: Matrix2<f64>,
    normalization: f64,
    position_covariance: Matrix2<f64>,
}

impl PureGaussianWavefunction {
    pub fn from_state(state: &GaussianState) -> Result<Self> {
        if state.n_modes() != 2 {
            return Err(Error::InvalidArgument(format!(
                "the wavefunction oracle handles two modes, state has {}",
                state.n_modes()
            )));
        }
        let max_nu = state.symplectic_spectrum()[0];
        if (max_nu - 0.5).abs() > tolerances::ENTROPY_PURITY {
            return Err(Error::MixedState {
                max_nu,
                context: "the wavefunction oracle needs a pure state".into(),
            });
        }
        let c = state.covariance();
        let sxx = Matrix2::new(c[(0, 0)], c[(0, 1)], c[(1, 0)], c[(1, 1)]);
        let sxp = Matrix2::new(c[(0, 2)], c[(0, 3)], c[(1, 2)], c[(1, 3)]);
        let inv = sxx
            .try_inverse()
            .ok_or_else(|| Error::Singular("position covariance".into()))?;
        let gamma_re = inv * 0.5;
        let gi = inv * sxp;
        let gamma_im = (gi + gi.transpose()) * 0.5;
        let det = gamma_re.determinant();
        let m = state.mean();
        Ok(Self {
            mean_position: Vector2::new(m[0], m[1]),
            mean_momentum: Vector2::new(m[2], m[3]),
            gamma_re,
            gamma_im,
            normalization: (det / std::f64::consts::PI.powi(2)).powf(0.25),
            position_covariance: sxx,
        })
    }

    pub fn eval(&self, x: [f64; 2]) -> Complex64 {
        let d = Vector2::new(x[0], x[1]) - self.mean_position;
        let re = -0.5 * d.dot(&(self.gamma_re * d));
        let im = 0.5 * d.dot(&(self.gamma_im * d)) + self.mean_momentum.dot(&d);
        Complex64::from_polar(self.normalization * re.exp(), im)
    }

    pub fn marginal_std(&self) -> [f64; 2] {
        [
            self.position_covariance[(0, 0)].sqrt(),
            self.position_covariance[(1, 1)].sqrt(),
        ]
    }

    pub fn has_phase(&self) -> bool {
        self.gamma_im.amax() > 0.0 || self.mean_momentum.amax() > 0.0
    }
}

/// `ψ_old(x) = |det T|^{1/2} ψ_new(T x + d_x) e^{−i d_p·(T x + d_x)}` for a
/// point-like transform `S = blockdiag(T, T⁻ᵀ)`: evaluates a wavefunction
/// expressed in new coordinates at old-coordinate points.
pub fn pull_back(psi_new: &PureGaussianWavefunction, s: &SymplecticTransform, x: [f64; 2]) -> Result<Complex64> {
    if s.n_modes() != 2 {
        return Err(Error::dim("transform", 2, s.n_modes()));
    }
    if s.classify() != DivisionKind::PointLike {
        return Err(Error::ComplementaryTransform);
    }
    let t = s.position_block();
    let d = s.displacement();
    let xi = [
        t[(0, 0)] * x[0] + t[(0, 1)] * x[1] + d[0],
        t[(1, 0)] * x[0] + t[(1, 1)] * x[1] + d[1],
    ];
    let phase = -(d[2] * xi[0] + d[3] * xi[1]);
    Ok(psi_new.eval(xi) * t.determinant().abs().sqrt() * Complex64::from_polar(1.0, phase))
}

/// A two-particle wavefunction sampled on a product grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWavefunction {
    pub grids: [Grid; 2],
    /// `amplitudes[(i, j)] = ψ(x₁ᵢ, x₂ⱼ)`, normalized so `Σ|ψ|² Δx₁ Δx₂ = 1`.
    pub amplitudes: DMatrix<Complex64>,
    /// Discrete norm before normalization.
    pub norm: f64,
    pub real: bool,
}

impl GridWavefunction {
    pub fn discrete_norm(&self) -> f64 {
        let cell = self.grids[0].spacing() * self.grids[1].spacing();
        (self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * cell).sqrt()
    }
}

/// Samples the wavefunction of a pure two-mode state, optionally after
/// carrying it into the coordinates of `frame`.
pub fn synthesize(
    state: &GaussianState,
    frame: Option<&SymplecticTransform>,
    settings: GridSettings,
) -> Result<GridWavefunction> {
    let state = match frame {
        Some(s) => state.apply_transform(s)?,
        None => state.clone(),
    };
    let psi = PureGaussianWavefunction::from_state(&state)?;
    sample(&psi, settings)
}

/// Samples a closed-form wavefunction on the grid set by `settings`.
pub fn sample(psi: &PureGaussianWavefunction, settings: GridSettings) -> Result<GridWavefunction> {
    if settings.points < 2 {
        return Err(Error::InvalidArgument("grid needs at least 2 points".into()));
    }
    let mut factor = settings.extent_factor;
    if !(factor >= tolerances::DEFAULT_GRID_EXTENT) {
        log::warn!(
            "grid extent {factor} standard deviations is too small; expanding to {}",
            tolerances::DEFAULT_GRID_EXTENT
        );
        factor = tolerances::DEFAULT_GRID_EXTENT;
    }
    let std = psi.marginal_std();
    let half = factor * std[0].max(std[1]);
    let grids = [0, 1].map(|k| Grid {
        center: psi.mean_position[k],
        half_extent: half,
        points: settings.points,
    });
    let n = settings.points;
    let mut amplitudes = DMatrix::from_fn(n, n, |i, j| psi.eval([grids[0].coordinate(i), grids[1].coordinate(j)]));
    let mut wf = GridWavefunction {
        grids,
        amplitudes: amplitudes.clone(),
        norm: 1.0,
        real: !psi.has_phase(),
    };
    let norm = wf.discrete_norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::NotNormalized { norm });
    }
    amplitudes /= Complex64::new(norm, 0.0);
    wf.amplitudes = amplitudes;
    wf.norm = norm;
    Ok(wf)
}

/// Schmidt coefficients `C_i`, descending, with `Σ C_i² = 1`.
pub fn schmidt_spectrum(psi: &GridWavefunction) -> Result<Vec<f64>> {
    let norm = psi.discrete_norm();
    if (norm * norm - 1.0).abs() > tolerances::SCHMIDT_NORM {
        return Err(Error::NotNormalized { norm });
    }
    let scale = (psi.grids[0].spacing() * psi.grids[1].spacing()).sqrt();
    let values: Vec<f64> = if psi.real {
        psi.amplitudes.map(|a| a.re * scale).singular_values().iter().copied().collect()
    } else {
        psi.amplitudes
            .map(|a| a * scale)
            .singular_values()
            .iter()
            .copied()
            .collect()
    };
    let mut values = values;
    values.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = values.iter().map(|c| c * c).sum();
    if (total - 1.0).abs() > tolerances::SCHMIDT_NORM {
        return Err(Error::NotNormalized { norm: total.sqrt() });
    }
    Ok(values)
}

/// Entropy `−Σ C² ln C²` and log-negativity `2 ln Σ C` of a pure state
/// from its Schmidt coefficients.
pub fn oracle_measures(spectrum: &[f64]) -> Result<(f64, f64)> {
    if spectrum.is_empty() {
        return Err(Error::InvalidArgument("empty Schmidt spectrum".into()));
    }
    let entropy: f64 = spectrum
        .iter()
        .map(|c| c * c)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum();
    let negativity = 2.0 * spectrum.iter().sum::<f64>().ln();
    Ok((entropy.max(0.0), negativity.max(0.0)))
}
