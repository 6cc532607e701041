//! Command dispatch behind the `bipartition` binary.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::config::{ConfigDocument, IDENTITY};
use crate::entanglement::{self, Verdict};
use crate::error::{Error, Result};
use crate::gaussian_state::GaussianState;
use crate::hamiltonian::QuadraticHamiltonian;
use crate::linalg::max_abs;
use crate::open_system::{self, NoiseSpec, ShieldCandidate};
use crate::oracle::{self, GridSettings};
use crate::phase_space::{self, canonicity_residual, classify_division, DivisionKind, SymplecticTransform};
use crate::report::{Report, Value};
use crate::tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Validate,
    Partition,
    NormalModes,
    GroundState,
    Entangle,
    Compare,
    InvertMeans,
    Evolve,
    ShieldSearch,
    OracleCheck,
}

impl Command {
    pub const ALL: [Command; 10] = [
        Command::Validate,
        Command::Partition,
        Command::NormalModes,
        Command::GroundState,
        Command::Entangle,
        Command::Compare,
        Command::InvertMeans,
        Command::Evolve,
        Command::ShieldSearch,
        Command::OracleCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Partition => "partition",
            Command::NormalModes => "normal-modes",
            Command::GroundState => "ground-state",
            Command::Entangle => "entangle",
            Command::Compare => "compare",
            Command::InvertMeans => "invert-means",
            Command::Evolve => "evolve",
            Command::ShieldSearch => "shield-search",
            Command::OracleCheck => "oracle-check",
        }
    }

    /// Exit code when the command runs but one of its checks fails.
    pub fn failure_code(self) -> i32 {
        match self {
            Command::OracleCheck => 4,
            _ => 3,
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Command::ALL.iter().map(|c| c.name()).collect();
            Error::InvalidArgument(format!("unknown command {s:?} (expected one of: {})", names.join(", ")))
        })
    }
}

/// Command-line overrides of the config's `[run]` section.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub grid: Option<usize>,
    pub horizon: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, doc: &mut ConfigDocument) -> Result<()> {
        if let Some(tol) = self.tol {
            if !(tol > 0.0) {
                return Err(Error::InvalidArgument(format!("--tol must be positive, got {tol}")));
            }
            doc.run.tol = tol;
        }
        if let Some(grid) = self.grid {
            if grid < 2 {
                return Err(Error::InvalidArgument(format!("--grid must be at least 2, got {grid}")));
            }
            doc.run.grid = grid;
        }
        if let Some(horizon) = self.horizon {
            if !(horizon > 0.0) {
                return Err(Error::InvalidArgument(format!("--horizon must be positive, got {horizon}")));
            }
            doc.run.horizon = horizon;
        }
        Ok(())
    }
}

pub fn tolerance_table(doc: &ConfigDocument) -> BTreeMap<String, f64> {
    [
        ("canonicity", doc.run.tol),
        ("symmetry", tolerances::SYMMETRY),
        ("validity", tolerances::VALIDITY),
        ("purity", tolerances::PURITY),
        ("entropy_purity", tolerances::ENTROPY_PURITY),
        ("ppt", tolerances::PPT),
        ("point_like", tolerances::POINT_LIKE),
        ("oracle_agreement", tolerances::ORACLE_AGREEMENT),
        ("schmidt_norm", tolerances::SCHMIDT_NORM),
        ("decoherence_bisection", tolerances::DECOHERENCE_BISECTION),
        ("dt", doc.run.dt),
        ("horizon", doc.run.horizon),
        ("grid_points", doc.run.grid as f64),
        ("grid_extent", doc.run.extent),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

pub fn run(command: Command, doc: &ConfigDocument, config_name: &str) -> Result<Report> {
    let mut report = Report::new(command.name(), config_name, tolerance_table(doc));
    let r = &mut report;
    match command {
        Command::Validate => validate(doc, r)?,
        Command::Partition => partition(doc, r)?,
        Command::NormalModes => normal_modes(doc, r)?,
        Command::GroundState => ground_state(doc, r)?,
        Command::Entangle => entangle(doc, r, false)?,
        Command::Compare => entangle(doc, r, true)?,
        Command::InvertMeans => invert_means(doc, r)?,
        Command::Evolve => evolve(doc, r)?,
        Command::ShieldSearch => shield_search(doc, r)?,
        Command::OracleCheck => oracle_check(doc, r)?,
    }
    Ok(report)
}

fn validate(doc: &ConfigDocument, r: &mut Report) -> Result<()> {
    r.push("system", "masses", Value::Vector(doc.system.masses().to_vec()), "config::parse");
    let h = doc.hamiltonian()?;
    match h.symplectic_spectrum() {
        Ok(freqs) => r.push("hamiltonian", "frequencies", Value::Vector(freqs), "hamiltonian::symplectic_spectrum"),
        Err(_) => r.push(
            "hamiltonian",
            "frequencies",
            Value::Text("free or unstable direction present".into()),
            "hamiltonian::symplectic_spectrum",
        ),
    }
    for def in &doc.transforms {
        let section = format!("transform {}", def.name);
        match doc.expand(def) {
            Ok((matrix, _)) => {
                let residual = canonicity_residual(&matrix)?;
                r.number(&section, "residual", residual, "phase_space::canonicity_residual");
                let ok = phase_space::validate_symplectic(&doc.system, &matrix, doc.run.tol)?;
                r.check(&section, "canonical", ok, "phase_space::validate_symplectic");
                if ok {
                    let s = SymplecticTransform::with_tolerance(matrix, doc.run.tol)?;
                    r.push(&section, "kind", Value::Text(kind_name(classify_division(&s)).into()), "phase_space::classify_division");
                }
            }
            Err(e) => {
                r.push(&section, "error", Value::Text(e.to_string()), "config::expand");
                r.check(&section, "canonical", false, "config::expand");
            }
        }
    }
    for d in &doc.divisions {
        let section = format!("division {}", d.division.name());
        r.push(&section, "transform", Value::Text(d.transform.clone()), "config::parse");
        for part in d.division.parts() {
            let modes = part.modes.iter().map(|&m| m as f64).collect();
            r.push(&section, format!("part {}", part.name), Value::Vector(modes), "phase_space::DivisionSpec::new");
        }
    }
    Ok(())
}

fn kind_name(kind: DivisionKind) -> &'static str {
    match kind {
        DivisionKind::PointLike => "point_like",
        DivisionKind::Complementary => "complementary",
    }
}

fn partition(doc: &ConfigDocument, r: &mut Report) -> Result<()> {
    let h = doc.hamiltonian()?;
    let registry = doc.registry()?;
    for d in &doc.divisions {
        let section = d.division.name().to_string();
        if d.division.parts().len() != 2 {
            r.push(&section, "skipped", Value::Text("not a bipartition".into()), "hamiltonian::partition_blocks");
            continue;
        }
        let local = h.transform(&doc.lookup(&registry, &d.transform)?)?;
        let blocks = local.partition_blocks(&d.division)?;
        r.number(&section, "coupling_norm", blocks.coupling_norm, "hamiltonian::partition_blocks");
        r.push(&section, format!("h_{}", blocks.first), Value::matrix(&blocks.h_first), "hamiltonian::partition_blocks");
        r.push(&section, format!("h_{}", blocks.second), Value::matrix(&blocks.h_second), "hamiltonian::partition_blocks");
        r.push(&section, "h_cross", Value::matrix(&blocks.h_cross), "hamiltonian::partition_blocks");
    }
    Ok(())
}

fn normal_modes(doc: &ConfigDocument, r: &mut Report) -> Result<()> {
    let h = doc.hamiltonian()?;
    let nm = h.normal_modes()?;
    let local = h.transform(&nm.transform)?;
    let n = h.n_modes();
    let mut target = nalgebra::DMatrix::zeros(2 * n, 2 * n);
    for (k, w) in nm.frequencies.iter().enumerate() {
        target[(k, k)] = *w;
        target[(k + n, k + n)] = *w;
    }
    r.push("normal_modes", "frequencies", Value::Vector(nm.frequencies.clone()), "hamiltonian::normal_modes");
    r.push("normal_modes", "transform", Value::matrix(nm.transform.matrix()), "hamiltonian::normal_modes");
    r.push("normal_modes", "position_map", Value::matrix(&nm.position_map()), "hamiltonian::NormalModeResult::position_map");
    r.number("normal_modes", "canonicity_residual", nm.transform.residual(), "phase_space::canonicity_residual");
    r.number(
        "normal_modes",
        "decoupling_residual",
        max_abs(&(local.matrix() - target)),
        "hamiltonian::QuadraticHamiltonian::transform",
    );
    Ok(())
}

fn ground_state(doc: &ConfigDocument, r: &mut Report) -> Result<()> {
    let h = doc.hamiltonian()?;
    let registry = doc.registry()?;
    let state = doc.state(&h, &registry)?;
    let kind = match &doc.state {
        crate::config::StateDef::Ground => "ground".to_string(),
        crate::config::StateDef::Product { transform, .. } => format!("product in {transform}"),
    };
    r.push("state", "kind", Value::Text(kind), "config::parse");
    r.push("state", "mean", Value::vector(state.mean()), "gaussian_state::GaussianState");
    r.push("state", "covariance", Value::matrix(state.covariance()), "gaussian_state::GaussianState");
    r.push("state", "symplectic_spectrum", Value::Vector(state.symplectic_spectrum()), "gaussian_state::symplectic_spectrum");
    r.number("state", "purity", state.purity(), "gaussian_state::GaussianState::purity");
    r.number(
        "state",
        "stationarity_residual",
        state.stationarity_residual(&h),
        "gaussian_state::GaussianState::stationarity_residual",
    );
    Ok(())
}

fn entangle(doc: &ConfigDocument, r: &mut Report, compact: bool) -> Result<()> {
    let h = doc.hamiltonian()?;
    let registry = doc.registry()?;
    let state = doc.state(&h, &registry)?;
    let reports = entanglement::compare_divisions(&state, &doc.registered_divisions(), &registry)?;
    let prov = if compact { "entanglement::compare_divisions" } else { "entanglement::analyze" };
    for rep in &reports {
        let s = rep.division.as_str();
        r.number(s, "log_negativity", rep.log_negativity, prov);
        r.push(
            s,
            "entropy_of_entanglement",
            rep.entropy_of_entanglement.map_or(Value::Absent, Value::Number),
            "entanglement::von_neumann_entropy",
        );
        r.push(s, "verdict", Value::Text(rep.verdict.as_str().into()), prov);
        if !compact {
            r.number(s, "min_ppt_symplectic_eigenvalue", rep.min_ppt_symplectic_eigenvalue, "entanglement::transposed_spectrum");
            r.push(s, "transposed_spectrum", Value::Vector(rep.transposed_spectrum.clone()), "entanglement::transposed_spectrum");
            r.push(s, "first_reduced_spectrum", Value::Vector(rep.first_reduced_spectrum.clone()), "gaussian_state::symplectic_spectrum");
            r.push(s, "second_reduced_spectrum", Value::Vector(rep.second_reduced_spectrum.clone()), "gaussian_state::symplectic_spectrum");
        }
    }
    if compact {
        let separable = reports.iter().any(|x| x.verdict == Verdict::Separable);
        let entangled = reports.iter().any(|x| x.verdict == Verdict::Entangled);
        r.push("summary", "hidden_entanglement", Value::Flag(separable && entangled), "entanglement::compare_divisions");
    }
    Ok(())
}

fn invert_means(doc: &ConfigDocument, r: &mut Report) -> Result<()> {
    let m = doc
        .moments
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("config has no [moments] section".into()))?;
    let registry = doc.registry()?;
    let s = doc.lookup(&registry, &m.frame)?;
    r.push("moments", "kind", Value::Text(kind_name(classify_division(&s)).into()), "phase_space::classify_division");
    let (means, covars) = phase_space::invert_moments(&m.means, &m.covariance, &s)?;
    let (back_means, back_covars) = phase_space::forward_moments(&means, &covars, &s)?;
    let err = (back_means - &m.means).amax().max(max_abs(&(back_covars - &m.covariance)));
    r.push("moments", "native_means", Value::vector(&means), "phase_space::invert_moments");
    r.push("moments", "native_covariance", Value::matrix(&covars), "phase_space::invert_moments");
    r.number("moments", "round_trip_error", err, "phase_space::forward_moments");
    Ok(())
}

/// Everything needed to evolve in the noise frame: state and Hamiltonian in
/// frame coordinates, and the frame itself.
struct NoisyScenario {
    state: GaussianState,
    h: QuadraticHamiltonian,
    noise: NoiseSpec,
    frame: SymplecticTransform,
    registry: phase_space::TransformRegistry,
}

fn noisy_scenario(doc: &ConfigDocument) -> Result<NoisyScenario> {
    let h = doc.hamiltonian()?;
    let registry = doc.registry()?;
    let state = doc.state(&h, &registry)?;
    let (frame_name, noise) = match &doc.noise {
        Some(n) => (n.frame.as_str(), n.noise.clone()),
        None => (IDENTITY, NoiseSpec::silent()),
    };
    let frame = doc.lookup(&registry, frame_name)?;
    Ok(NoisyScenario {
        state: state.apply_transform(&frame)?,
        h: h.transform(&frame)?,
        noise,
        frame,
        registry,
    })
}

impl NoisyScenario {
    /// Map from noise-frame coordinates into a division's coordinates.
    fn view(&self, doc: &ConfigDocument, transform: &str) -> Result<SymplecticTransform> {
        doc.lookup(&self.registry, transform)?.after(&self.frame.inverse())
    }
}

fn evolve(doc: &ConfigDocument, r: &mut Report) -> Result<()> {
    let sc = noisy_scenario(doc)?;
    let (horizon, dt, k) = (doc.run.horizon, doc.run.dt, doc.run.checkpoints);
    let mut times = vec![0.0];
    let mut states = vec![sc.state.clone()];
    for i in 1..=k {
        let t = horizon * i as f64 / k as f64;
        let span = t - times[i - 1];
        states.push(open_system::evolve(&states[i - 1], &sc.h, &sc.noise, span, dt.min(span))?);
        times.push(t);
    }
    r.push("evolve", "times", Value::Vector(times), "open_system::evolve");
    for d in &doc.divisions {
        let section = d.division.name().to_string();
        let view = sc.view(doc, &d.transform)?;
        let local: Vec<GaussianState> = states.iter().map(|s| s.apply_transform(&view)).collect::<Result<_>>()?;
        if d.division.parts().len() == 2 {
            let series: Vec<f64> = local
                .iter()
                .map(|s| entanglement::log_negativity(s, &d.division))
                .collect::<Result<_>>()?;
            let decreasing = series.windows(2).all(|w| w[1] < w[0]);
            r.push(&section, "log_negativity", Value::Vector(series.clone()), "entanglement::log_negativity");
            r.push(&section, "strictly_decreasing", Value::Flag(decreasing), "entanglement::log_negativity");
            let time = if series[0] > tolerances::PPT {
                open_system::decoherence_time(&sc.state, &sc.h, &sc.noise, &view, &d.division, horizon, dt)?
                    .map_or(Value::Absent, Value::Number)
            } else {
                Value::Text("no entanglement".into())
            };
            r.push(&section, "decoherence_time", time, "open_system::decoherence_time");
        }
        for part in d.division.parts() {
            let first = local[0].reduce(&part.modes)?;
            let last = local[k].reduce(&part.modes)?;
            let drift = max_abs(&(last.covariance() - first.covariance())) / horizon;
            r.number(&section, format!("drift_rate {}", part.name), drift, "gaussian_state::GaussianState::reduce");
            r.number(&section, format!("purity {}", part.name), last.purity(), "gaussian_state::GaussianState::purity");
        }
    }
    Ok(())
}

fn shield_search(doc: &ConfigDocument, r: &mut Report) -> Result<()> {
    let sc = noisy_scenario(doc)?;
    let candidates = doc
        .divisions
        .iter()
        .filter(|d| d.division.parts().len() == 2)
        .map(|d| {
            Ok(ShieldCandidate {
                name: d.division.name().to_string(),
                transform: sc.view(doc, &d.transform)?,
                division: d.division.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ranking = open_system::shielded_division_search(&sc.state, &sc.h, &sc.noise, &candidates, doc.run.dt)?;
    for (i, rank) in ranking.iter().enumerate() {
        let section = format!("rank {}", i + 1);
        r.push(&section, "division", Value::Text(rank.name.clone()), "open_system::shielded_division_search");
        r.number(&section, "degradation_rate", rank.degradation_rate, "open_system::shielded_division_search");
        r.number(&section, "initial_log_negativity", rank.initial_log_negativity, "entanglement::log_negativity");
    }
    Ok(())
}

fn oracle_check(doc: &ConfigDocument, r: &mut Report) -> Result<()> {
    let h = doc.hamiltonian()?;
    let registry = doc.registry()?;
    let state = doc.state(&h, &registry)?;
    let settings = GridSettings {
        points: doc.run.grid,
        extent_factor: doc.run.extent,
    };
    for d in &doc.divisions {
        let section = d.division.name().to_string();
        let parts = d.division.parts();
        if state.n_modes() != 2 || parts.len() != 2 {
            r.push(&section, "skipped", Value::Text("oracle handles 1|1 two-mode divisions".into()), "oracle::synthesize");
            continue;
        }
        let local = state.apply_transform(&doc.lookup(&registry, &d.transform)?)?;
        let entropy = entanglement::entanglement_entropy(&local, &d.division)?;
        let negativity = entanglement::log_negativity(&local, &d.division)?;
        let spectrum = oracle::schmidt_spectrum(&oracle::synthesize(&local, None, settings)?)?;
        let (oracle_entropy, oracle_negativity) = oracle::oracle_measures(&spectrum)?;
        let de = (entropy - oracle_entropy).abs();
        let dn = (negativity - oracle_negativity).abs();
        r.number(&section, "entropy_gaussian", entropy, "entanglement::entanglement_entropy");
        r.number(&section, "entropy_oracle", oracle_entropy, "oracle::oracle_measures");
        r.number(&section, "entropy_difference", de, "oracle::oracle_measures");
        r.number(&section, "log_negativity_gaussian", negativity, "entanglement::log_negativity");
        r.number(&section, "log_negativity_oracle", oracle_negativity, "oracle::oracle_measures");
        r.number(&section, "log_negativity_difference", dn, "oracle::oracle_measures");
        r.push(
            &section,
            "leading_schmidt",
            Value::Vector(spectrum.iter().take(4).copied().collect()),
            "oracle::schmidt_spectrum",
        );
        r.check(&section, "agrees", de < tolerances::ORACLE_AGREEMENT && dn < tolerances::ORACLE_AGREEMENT, "oracle::oracle_measures");
    }
    Ok(())
}
