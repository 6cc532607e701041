#![allow(dead_code)]

use bipartition::phase_space::symplectic_form;
use bipartition::{DivisionSpec, GaussianState, ModeSystem, QuadraticHamiltonian, SymplecticTransform};
use nalgebra::DMatrix;
use rand::Rng;

pub fn symmetric_from(values: &[f64], dim: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(dim, dim, |i, j| values[i * dim + j]);
    (&m + m.transpose()) * 0.5
}

pub fn random_generator<R: Rng>(rng: &mut R, n: usize, scale: f64) -> DMatrix<f64> {
    let values: Vec<f64> = (0..4 * n * n).map(|_| rng.random_range(-scale..scale)).collect();
    symmetric_from(&values, 2 * n)
}

pub fn random_symplectic<R: Rng>(rng: &mut R, n: usize, scale: f64) -> SymplecticTransform {
    SymplecticTransform::from_generator(&random_generator(rng, n, scale)).unwrap()
}

/// A generator acting only inside the given modes, so `exp(JK)` is local to them.
pub fn restrict_generator(k: &DMatrix<f64>, modes: &[usize], n: usize) -> DMatrix<f64> {
    let idx: Vec<usize> = modes.iter().copied().chain(modes.iter().map(|m| m + n)).collect();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| if idx.contains(&i) && idx.contains(&j) { k[(i, j)] } else { 0.0 })
}

/// Product of random transforms local to each part of the division.
pub fn random_local<R: Rng>(rng: &mut R, division: &DivisionSpec, scale: f64) -> SymplecticTransform {
    let n = division.n_modes();
    let mut k = DMatrix::zeros(2 * n, 2 * n);
    for part in division.parts() {
        k += restrict_generator(&random_generator(rng, n, scale), &part.modes, n);
    }
    SymplecticTransform::from_generator(&k).unwrap()
}

/// Ground state of a random positive-definite coupled system, scrambled by a
/// random canonical transform.
pub fn random_pure_state<R: Rng>(rng: &mut R, n: usize) -> GaussianState {
    let h = random_hamiltonian(rng, n);
    let g = GaussianState::ground_state(&h).unwrap();
    g.apply_transform(&random_symplectic(rng, n, 0.3)).unwrap()
}

pub fn random_hamiltonian<R: Rng>(rng: &mut R, n: usize) -> QuadraticHamiltonian {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let v = &a * a.transpose() + DMatrix::identity(n, n) * 0.5;
    let masses = (0..n).map(|_| rng.random_range(0.5..3.0)).collect();
    let sys = ModeSystem::new((1..=n).map(|i| i.to_string()).collect(), masses).unwrap();
    QuadraticHamiltonian::build(&sys, &v).unwrap()
}

pub fn coupled_pair(k: f64, c: f64) -> QuadraticHamiltonian {
    let sys = ModeSystem::unit_masses(2).unwrap();
    QuadraticHamiltonian::build(&sys, &DMatrix::from_row_slice(2, 2, &[k, c, c, k])).unwrap()
}

pub fn split(n: usize, first: Vec<usize>) -> DivisionSpec {
    let second: Vec<usize> = (0..n).filter(|m| !first.contains(m)).collect();
    DivisionSpec::bipartition("A|B", ("A", first), ("B", second), n).unwrap()
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.amax()
}

pub fn symplectic_residual(s: &DMatrix<f64>) -> f64 {
    let j = symplectic_form(s.nrows() / 2);
    (s * &j * s.transpose() - j).amax()
}
