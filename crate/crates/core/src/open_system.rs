//! Gaussian open-system dynamics and decoherence-avoiding division search.
//!
//! The environment is phenomenological: diffusion `D` and an optional
//! damping rate `γ` acting on chosen modes. Moments obey
//!
//! ```text
//! μ̇ = A μ + J b,    σ̇ = A σ + σ Aᵀ + D,    A = J M − (γ/2)·I_target
//! ```
//!
//! integrated with fixed-step RK4; a step that would leave the set of valid
//! states is retried as two half steps.

use nalgebra::{DMatrix, DVector};

use crate::entanglement::log_negativity;
use crate::error::{Error, Result};
use crate::gaussian_state::GaussianState;
use crate::hamiltonian::QuadraticHamiltonian;
use crate::linalg::{self, phase_indices};
use crate::phase_space::{symplectic_form, DivisionSpec, SymplecticTransform};
use crate::tolerances;

const MIN_STEP: f64 = 1e-12;

/// Entanglement drop rates closer than this are ranked as ties.
pub const RATE_TIE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    target_modes: Vec<usize>,
    diffusion: DMatrix<f64>,
    damping: f64,
}

impl NoiseSpec {
    /// `diffusion` is `2k×2k` over the target modes in block order
    /// `(x_t1..x_tk, p_t1..p_tk)`, in covariance per unit time.
    pub fn new(target_modes: Vec<usize>, diffusion: DMatrix<f64>, damping: f64) -> Result<Self> {
        let k = target_modes.len();
        if diffusion.shape() != (2 * k, 2 * k) {
            return Err(Error::dim(
                "diffusion",
                format!("{0}x{0}", 2 * k),
                format!("{}x{}", diffusion.nrows(), diffusion.ncols()),
            ));
        }
        let mut sorted = target_modes.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != k {
            return Err(Error::InvalidArgument("noise target modes repeat".into()));
        }
        if k > 0 {
            linalg::require_symmetric(&diffusion, "diffusion", tolerances::SYMMETRY)?;
            let min = linalg::sym_eigenvalues(&diffusion)[0];
            if min < -1e-12 * linalg::max_abs(&diffusion).max(1.0) {
                return Err(Error::InvalidArgument(format!(
                    "diffusion is not positive semidefinite (eigenvalue {min:.3e})"
                )));
            }
        }
        if !(damping >= 0.0) || !damping.is_finite() {
            return Err(Error::InvalidArgument(format!("damping must be nonnegative, got {damping}")));
        }
        Ok(Self {
            target_modes,
            diffusion,
            damping,
        })
    }

    pub fn silent() -> Self {
        Self {
            target_modes: Vec::new(),
            diffusion: DMatrix::zeros(0, 0),
            damping: 0.0,
        }
    }

    /// Position diffusion at `rate` on one mode.
    pub fn position_diffusion(mode: usize, rate: f64) -> Result<Self> {
        Self::new(
            vec![mode],
            DMatrix::from_diagonal(&DVector::from_vec(vec![rate, 0.0])),
            0.0,
        )
    }

    pub fn target_modes(&self) -> &[usize] {
        &self.target_modes
    }

    pub fn diffusion(&self) -> &DMatrix<f64> {
        &self.diffusion
    }

    pub fn damping(&self) -> f64 {
        self.damping
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.target_modes.clone(), &self.diffusion * factor, self.damping)
    }

    fn check(&self, n_modes: usize) -> Result<()> {
        match self.target_modes.iter().find(|&&m| m >= n_modes) {
            Some(m) => Err(Error::InvalidArgument(format!(
                "noise targets mode {m}, system has {n_modes}"
            ))),
            None => Ok(()),
        }
    }

    fn embedded(&self, n_modes: usize) -> DMatrix<f64> {
        let idx = phase_indices(&self.target_modes, n_modes);
        let mut d = DMatrix::zeros(2 * n_modes, 2 * n_modes);
        for (i, &r) in idx.iter().enumerate() {
            for (j, &c) in idx.iter().enumerate() {
                d[(r, c)] = self.diffusion[(i, j)];
            }
        }
        d
    }
}

/// Time-independent generator of the moment equations.
#[derive(Debug, Clone)]
struct Generator {
    drift: DMatrix<f64>,
    forcing: DVector<f64>,
    diffusion: DMatrix<f64>,
}

impl Generator {
    fn new(h: &QuadraticHamiltonian, noise: &NoiseSpec) -> Result<Self> {
        let n = h.n_modes();
        noise.check(n)?;
        let j = symplectic_form(n);
        let mut drift = &j * h.matrix();
        for i in phase_indices(&noise.target_modes, n) {
            drift[(i, i)] -= 0.5 * noise.damping;
        }
        let forcing = h.linear().map_or_else(|| DVector::zeros(2 * n), |b| &j * b);
        Ok(Self {
            drift,
            forcing,
            diffusion: noise.embedded(n),
        })
    }

    fn rate(&self, mean: &DVector<f64>, cov: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let a = &self.drift;
        (a * mean + &self.forcing, a * cov + cov * a.transpose() + &self.diffusion)
    }

    fn rk4(&self, state: &GaussianState, dt: f64) -> (DVector<f64>, DMatrix<f64>) {
        let (m0, c0) = (state.mean(), state.covariance());
        let (k1m, k1c) = self.rate(m0, c0);
        let (k2m, k2c) = self.rate(&(m0 + &k1m * (0.5 * dt)), &(c0 + &k1c * (0.5 * dt)));
        let (k3m, k3c) = self.rate(&(m0 + &k2m * (0.5 * dt)), &(c0 + &k2c * (0.5 * dt)));
        let (k4m, k4c) = self.rate(&(m0 + &k3m * dt), &(c0 + &k3c * dt));
        let mean = m0 + (k1m + k2m * 2.0 + k3m * 2.0 + k4m) * (dt / 6.0);
        let cov = c0 + (k1c + k2c * 2.0 + k3c * 2.0 + k4c) * (dt / 6.0);
        (mean, linalg::symmetrize(&cov))
    }

    /// Advances by exactly `dt`, halving on validity violations.
    fn advance(&self, state: &GaussianState, dt: f64, t: f64) -> Result<GaussianState> {
        let (mean, cov) = self.rk4(state, dt);
        match GaussianState::new(mean, cov) {
            Ok(next) => Ok(next),
            Err(Error::InvalidState { .. }) => {
                let half = 0.5 * dt;
                if half < MIN_STEP {
                    return Err(Error::StepUnderflow { t, dt: half });
                }
                let mid = self.advance(state, half, t)?;
                self.advance(&mid, half, t + half)
            }
            Err(e) => Err(e),
        }
    }
}

fn check_times(t: f64, dt: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("evolution time must be nonnegative, got {t}")));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    Ok(())
}

/// Evolves the state for time `t` with nominal step `dt`.
pub fn evolve(
    state: &GaussianState,
    h: &QuadraticHamiltonian,
    noise: &NoiseSpec,
    t: f64,
    dt: f64,
) -> Result<GaussianState> {
    let mut out = None;
    for_each_step(state, h, noise, t, dt, |_, s| {
        out = Some(s.clone());
        true
    })?;
    Ok(out.unwrap_or_else(|| state.clone()))
}

/// States at every step boundary, starting with `(0, state)`.
pub fn trajectory(
    state: &GaussianState,
    h: &QuadraticHamiltonian,
    noise: &NoiseSpec,
    t: f64,
    dt: f64,
) -> Result<Vec<(f64, GaussianState)>> {
    let mut out = vec![(0.0, state.clone())];
    for_each_step(state, h, noise, t, dt, |time, s| {
        out.push((time, s.clone()));
        true
    })?;
    Ok(out)
}

// Calls `visit(t_k, state_k)` after every step; stops early when it returns false.
fn for_each_step(
    state: &GaussianState,
    h: &QuadraticHamiltonian,
    noise: &NoiseSpec,
    t: f64,
    dt: f64,
    mut visit: impl FnMut(f64, &GaussianState) -> bool,
) -> Result<()> {
    check_times(t, dt)?;
    if state.n_modes() != h.n_modes() {
        return Err(Error::dim("state", h.n_modes(), state.n_modes()));
    }
    let generator = Generator::new(h, noise)?;
    let steps = (t / dt).ceil() as usize;
    let mut current = state.clone();
    let mut now = 0.0;
    for k in 0..steps {
        let next_time = if k + 1 == steps { t } else { (k + 1) as f64 * dt };
        let h_step = next_time - now;
        if h_step <= 0.0 {
            break;
        }
        current = generator.advance(&current, h_step, now)?;
        now = next_time;
        if !visit(now, &current) {
            break;
        }
    }
    Ok(())
}

/// First time at which the division's log-negativity drops below `1/e` of
/// its initial value, or `None` if that does not happen within `horizon`.
/// `frame` carries native coordinates into the division's coordinates.
pub fn decoherence_time(
    state: &GaussianState,
    h: &QuadraticHamiltonian,
    noise: &NoiseSpec,
    frame: &SymplecticTransform,
    division: &DivisionSpec,
    horizon: f64,
    dt: f64,
) -> Result<Option<f64>> {
    let measure = |s: &GaussianState| -> Result<f64> { log_negativity(&s.apply_transform(frame)?, division) };
    let initial = measure(state)?;
    if initial <= tolerances::PPT {
        return Err(Error::NoEntanglement(division.name().to_string()));
    }
    let threshold = initial / std::f64::consts::E;
    let generator = Generator::new(h, noise)?;

    let mut bracket: Option<(f64, GaussianState, f64)> = None;
    let mut previous = (0.0, state.clone());
    let mut failure = None;
    for_each_step(state, h, noise, horizon, dt, |t, s| match measure(s) {
        Ok(value) if value < threshold => {
            bracket = Some((previous.0, previous.1.clone(), t - previous.0));
            false
        }
        Ok(_) => {
            previous = (t, s.clone());
            true
        }
        Err(e) => {
            failure = Some(e);
            false
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let Some((start, start_state, width)) = bracket else {
        return Ok(None);
    };

    // bisect inside the bracketing step; each probe is a single sub-step
    let (mut lo, mut hi) = (0.0, width);
    while hi - lo > tolerances::DECOHERENCE_BISECTION * (start + 0.5 * (lo + hi)) && hi - lo > MIN_STEP {
        let mid = 0.5 * (lo + hi);
        let probe = generator.advance(&start_state, mid, start)?;
        if measure(&probe)? < threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(start + hi))
}

/// A candidate division reached from native coordinates by `transform`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShieldCandidate {
    pub name: String,
    pub transform: SymplecticTransform,
    pub division: DivisionSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShieldRanking {
    pub name: String,
    pub initial_log_negativity: f64,
    /// `(E_N(0) − E_N(δt)) / δt`.
    pub degradation_rate: f64,
}

/// Ranks candidates by how fast their log-negativity degrades at `t = 0⁺`,
/// best (slowest) first. Ties keep declaration order.
pub fn shielded_division_search(
    state: &GaussianState,
    h: &QuadraticHamiltonian,
    noise: &NoiseSpec,
    candidates: &[ShieldCandidate],
    dt: f64,
) -> Result<Vec<ShieldRanking>> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("no candidate divisions to rank".into()));
    }
    let later = evolve(state, h, noise, dt, dt)?;
    let mut ranked = candidates
        .iter()
        .map(|c| {
            let before = log_negativity(&state.apply_transform(&c.transform)?, &c.division)?;
            let after = log_negativity(&later.apply_transform(&c.transform)?, &c.division)?;
            Ok(ShieldRanking {
                name: c.name.clone(),
                initial_log_negativity: before,
                degradation_rate: (before - after) / dt,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by_key(|r| (r.degradation_rate / RATE_TIE).round() as i64);
    Ok(ranked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::phase_space::{extend_point_transform, ModeSystem};
    use approx::assert_abs_diff_eq;

    fn pair(c: f64) -> QuadraticHamiltonian {
        let sys = ModeSystem::unit_masses(2).unwrap();
        QuadraticHamiltonian::build(&sys, &DMatrix::from_row_slice(2, 2, &[1.0, c, c, 1.0])).unwrap()
    }

    fn split() -> DivisionSpec {
        DivisionSpec::bipartition("1|2", ("1", vec![0]), ("2", vec![1]), 2).unwrap()
    }

    fn normal_rotation() -> SymplecticTransform {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        extend_point_transform(&DMatrix::from_row_slice(2, 2, &[h, h, h, -h])).unwrap()
    }

    #[test]
    fn closed_evolution_matches_flow() {
        let h = pair(0.5);
        let start = GaussianState::wavepacket(0.6)
            .and_then(|a| GaussianState::product(&[a, GaussianState::vacuum(1)]))
            .unwrap();
        let end = evolve(&start, &h, &NoiseSpec::silent(), 1.0, 1e-3).unwrap();
        let exact = start.apply_transform(&h.flow(1.0).unwrap()).unwrap();
        assert!(max_abs(&(end.covariance() - exact.covariance())) < 1e-6);
        assert!(end.is_pure(1e-9));
    }

    #[test]
    fn zero_time_is_identity() {
        let g = GaussianState::vacuum(2);
        assert_eq!(evolve(&g, &pair(0.1), &NoiseSpec::silent(), 0.0, 1e-3).unwrap(), g);
        assert!(evolve(&g, &pair(0.1), &NoiseSpec::silent(), 1.0, 0.0).is_err());
        assert!(evolve(&g, &pair(0.1), &NoiseSpec::silent(), -1.0, 1e-3).is_err());
    }

    #[test]
    fn damping_without_diffusion_underflows() {
        let noise = NoiseSpec::new(vec![0], DMatrix::zeros(2, 2), 1.0).unwrap();
        let err = evolve(&GaussianState::vacuum(2), &pair(0.0), &noise, 1.0, 1e-2).unwrap_err();
        assert!(matches!(err, Error::StepUnderflow { .. }));
    }

    #[test]
    fn noise_spec_validation() {
        assert!(NoiseSpec::new(vec![0], DMatrix::zeros(4, 4), 0.0).is_err());
        assert!(NoiseSpec::new(vec![0], DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, 0.0])), 0.0).is_err());
        assert!(NoiseSpec::new(vec![0, 0], DMatrix::zeros(4, 4), 0.0).is_err());
        assert!(NoiseSpec::new(vec![0], DMatrix::zeros(2, 2), -0.1).is_err());
        let far = NoiseSpec::position_diffusion(5, 1.0).unwrap();
        assert!(evolve(&GaussianState::vacuum(2), &pair(0.0), &far, 1.0, 1e-2).is_err());
    }

    #[test]
    fn silent_environment_never_decoheres() {
        let g = GaussianState::ground_state(&pair(0.5)).unwrap();
        let t = decoherence_time(&g, &pair(0.5), &NoiseSpec::silent(), &SymplecticTransform::identity(2), &split(), 2.0, 1e-2).unwrap();
        assert_eq!(t, None);
    }

    #[test]
    fn decoherence_requires_entanglement() {
        let g = GaussianState::vacuum(2);
        let noise = NoiseSpec::position_diffusion(0, 1.0).unwrap();
        assert!(matches!(
            decoherence_time(&g, &pair(0.0), &noise, &SymplecticTransform::identity(2), &split(), 1.0, 1e-2),
            Err(Error::NoEntanglement(_))
        ));
    }

    #[test]
    fn normal_modes_are_shielded_from_local_noise() {
        let h = pair(0.5);
        let g = GaussianState::ground_state(&h).unwrap();
        let noise = NoiseSpec::position_diffusion(0, 0.5).unwrap();
        let q = DivisionSpec::bipartition("Q1|Q2", ("Q1", vec![0]), ("Q2", vec![1]), 2).unwrap();
        let later = evolve(&g, &h, &noise, 2.0, 1e-3).unwrap();
        let eq = log_negativity(&later.apply_transform(&normal_rotation()).unwrap(), &q).unwrap();
        assert!(eq < 1e-10);
        let before = log_negativity(&g, &split()).unwrap();
        let after = log_negativity(&later, &split()).unwrap();
        assert!(after < before);

        let candidates = vec![
            ShieldCandidate { name: "1|2".into(), transform: SymplecticTransform::identity(2), division: split() },
            ShieldCandidate { name: "Q1|Q2".into(), transform: normal_rotation(), division: q },
        ];
        let ranking = shielded_division_search(&g, &h, &noise, &candidates, 1e-3).unwrap();
        assert_eq!(ranking[0].name, "Q1|Q2");
        assert!(ranking[1].degradation_rate > ranking[0].degradation_rate);
    }

    #[test]
    fn silent_search_ties_in_declaration_order() {
        let h = pair(0.5);
        let g = GaussianState::ground_state(&h).unwrap();
        let q = DivisionSpec::bipartition("Q1|Q2", ("Q1", vec![0]), ("Q2", vec![1]), 2).unwrap();
        let candidates = vec![
            ShieldCandidate { name: "1|2".into(), transform: SymplecticTransform::identity(2), division: split() },
            ShieldCandidate { name: "Q1|Q2".into(), transform: normal_rotation(), division: q },
        ];
        let ranking = shielded_division_search(&g, &h, &NoiseSpec::silent(), &candidates, 1e-3).unwrap();
        assert_eq!(ranking[0].name, "1|2");
        for r in &ranking {
            assert_abs_diff_eq!(r.degradation_rate, 0.0, epsilon = RATE_TIE);
        }
        assert!(shielded_division_search(&g, &h, &NoiseSpec::silent(), &[], 1e-3).is_err());
    }
}
