//! Quadratic Hamiltonians `H(z) = ½ zᵀ M z + bᵀ z`, their block structure
//! relative to a division, and normal-mode decoupling.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::gaussian_state::symplectic_spectrum;
use crate::linalg::{self, max_abs, phase_indices, submatrix};
use crate::phase_space::{symplectic_form, DivisionSpec, ModeSystem, SymplecticTransform};
use crate::tolerances;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian {
    matrix: DMatrix<f64>,
    linear: Option<DVector<f64>>,
}

impl QuadraticHamiltonian {
    pub fn new(matrix: DMatrix<f64>, linear: Option<DVector<f64>>) -> Result<Self> {
        let dim = linalg::require_square(&matrix, "Hamiltonian matrix")?;
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::dim("Hamiltonian matrix", "even, nonzero dimension", dim));
        }
        linalg::require_symmetric(&matrix, "Hamiltonian matrix", tolerances::SYMMETRY)?;
        if let Some(b) = &linear {
            if b.len() != dim {
                return Err(Error::dim("linear term", dim, b.len()));
            }
        }
        Ok(Self { matrix, linear })
    }

    /// `M = blockdiag(V, diag(1/m))`: kinetic energy `Σ p²/2m` plus the
    /// quadratic potential `½ xᵀ V x`.
    pub fn build(system: &ModeSystem, potential: &DMatrix<f64>) -> Result<Self> {
        let n = system.n_modes();
        if potential.shape() != (n, n) {
            return Err(Error::dim(
                "potential matrix",
                format!("{n}x{n}"),
                format!("{}x{}", potential.nrows(), potential.ncols()),
            ));
        }
        linalg::require_symmetric(potential, "potential matrix", tolerances::SYMMETRY)?;
        let kinetic = DMatrix::from_diagonal(&DVector::from_iterator(
            n,
            system.masses().iter().map(|m| 1.0 / m),
        ));
        Self::new(linalg::block_diag(potential, &kinetic), None)
    }

    pub fn with_linear(mut self, linear: DVector<f64>) -> Result<Self> {
        if linear.len() != self.matrix.nrows() {
            return Err(Error::dim("linear term", self.matrix.nrows(), linear.len()));
        }
        self.linear = Some(linear);
        Ok(self)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn linear(&self) -> Option<&DVector<f64>> {
        self.linear.as_ref()
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn energy(&self, z: &DVector<f64>) -> f64 {
        let quad = 0.5 * z.dot(&(&self.matrix * z));
        quad + self.linear.as_ref().map_or(0.0, |b| b.dot(z))
    }

    /// Drift matrix `A = J M` of the equations of motion `ż = A z + J b`.
    pub fn drift(&self) -> DMatrix<f64> {
        symplectic_form(self.n_modes()) * &self.matrix
    }

    /// Magnitudes of the eigenvalues of `J M`, descending, one per mode.
    /// For positive-definite `M` these are the normal-mode frequencies.
    pub fn symplectic_spectrum(&self) -> Result<Vec<f64>> {
        symplectic_spectrum(&self.matrix)
    }

    /// The Hamiltonian flow `exp(J M t)`.
    pub fn flow(&self, t: f64) -> Result<SymplecticTransform> {
        SymplecticTransform::from_generator(&(&self.matrix * t))
    }

    /// Rewrites `H` in the coordinates `ζ = S z + d`:
    /// `M' = S⁻ᵀ M S⁻¹`, `b' = S⁻ᵀ (b − M S⁻¹ d)`.
    pub fn transform(&self, s: &SymplecticTransform) -> Result<Self> {
        if s.n_modes() != self.n_modes() {
            return Err(Error::dim("transform", self.n_modes(), s.n_modes()));
        }
        let inv = s.inverse();
        let back = inv.matrix();
        let matrix = linalg::symmetrize(&(back.transpose() * &self.matrix * back));
        let shift = back * s.displacement();
        let has_shift = shift.amax() > 0.0;
        let linear = match (&self.linear, has_shift) {
            (None, false) => None,
            (b, _) => {
                let b = b.clone().unwrap_or_else(|| DVector::zeros(matrix.nrows()));
                Some(back.transpose() * (b - &self.matrix * shift))
            }
        };
        Ok(Self { matrix, linear })
    }

    pub fn partition_blocks(&self, division: &DivisionSpec) -> Result<PartitionBlocks> {
        if division.n_modes() != self.n_modes() {
            return Err(Error::dim("division", self.n_modes(), division.n_modes()));
        }
        let (e, f) = division.bipartite()?;
        let n = self.n_modes();
        let e_index = phase_indices(&e.modes, n);
        let f_index = phase_indices(&f.modes, n);
        let cross = submatrix(&self.matrix, &e_index, &f_index);
        Ok(PartitionBlocks {
            first: e.name.clone(),
            second: f.name.clone(),
            h_first: submatrix(&self.matrix, &e_index, &e_index),
            h_second: submatrix(&self.matrix, &f_index, &f_index),
            coupling_norm: cross.norm(),
            h_cross: cross,
            first_index: e_index,
            second_index: f_index,
        })
    }

    /// Decouples `H` into independent oscillators. The returned transform
    /// maps `M` to `diag(ω) ⊕ diag(ω)`.
    pub fn normal_modes(&self) -> Result<NormalModeResult> {
        let eig = linalg::sym_eigenvalues(&self.matrix);
        let min = eig[0];
        if !(min > 0.0) {
            return Err(Error::NotPositiveDefinite { eigenvalue: min });
        }
        let n = self.n_modes();
        let xp = self.matrix.view((0, n), (n, n));
        let raw = if xp.amax() <= tolerances::SYMMETRY * max_abs(&self.matrix) {
            mass_weighted_modes(&self.matrix)?
        } else {
            williamson_modes(&self.matrix)?
        };
        let (frequencies, matrix) = canonical_order(raw.0, raw.1);
        let transform = SymplecticTransform::with_tolerance(matrix, tolerances::CANONICITY)?
            .with_labels("native", "normal-modes");
        Ok(NormalModeResult {
            frequencies,
            transform,
        })
    }
}

/// Blocks of `M` for a bipartition E|F; `H = H_E + H_F + H_EF`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionBlocks {
    pub first: String,
    pub second: String,
    pub h_first: DMatrix<f64>,
    pub h_second: DMatrix<f64>,
    pub h_cross: DMatrix<f64>,
    /// Frobenius norm of the cross block.
    pub coupling_norm: f64,
    first_index: Vec<usize>,
    second_index: Vec<usize>,
}

impl PartitionBlocks {
    /// Scatters the blocks back into a full `2n×2n` matrix.
    pub fn reassemble(&self) -> DMatrix<f64> {
        let dim = self.first_index.len() + self.second_index.len();
        let mut m = DMatrix::zeros(dim, dim);
        let (e, f) = (&self.first_index, &self.second_index);
        for (i, &r) in e.iter().enumerate() {
            for (j, &c) in e.iter().enumerate() {
                m[(r, c)] = self.h_first[(i, j)];
            }
            for (j, &c) in f.iter().enumerate() {
                m[(r, c)] = self.h_cross[(i, j)];
                m[(c, r)] = self.h_cross[(i, j)];
            }
        }
        for (i, &r) in f.iter().enumerate() {
            for (j, &c) in f.iter().enumerate() {
                m[(r, c)] = self.h_second[(i, j)];
            }
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalModeResult {
    /// Descending.
    pub frequencies: Vec<f64>,
    pub transform: SymplecticTransform,
}

impl NormalModeResult {
    /// Position map `q = T x` of the decoupling transform.
    pub fn position_map(&self) -> DMatrix<f64> {
        self.transform.position_block()
    }
}

// M = blockdiag(V, K): mass-weight with K^{-1/2}, diagonalize, then scale
// each coordinate by √ω so both quadratures carry the same frequency.
fn mass_weighted_modes(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = m.nrows() / 2;
    let v = m.view((0, 0), (n, n)).into_owned();
    let k = m.view((n, n), (n, n)).into_owned();
    let k_half = linalg::sym_sqrt(&k)?;
    let k_inv_half = linalg::sym_function(&k, |x| 1.0 / x.sqrt())?;
    let eig = SymmetricEigen::new(linalg::symmetrize(&(&k_half * v * &k_half)));
    let mut freqs = Vec::with_capacity(n);
    for &w2 in eig.eigenvalues.iter() {
        if !(w2 > 0.0) {
            return Err(Error::NotPositiveDefinite { eigenvalue: w2 });
        }
        freqs.push(w2.sqrt());
    }
    let scale = DMatrix::from_diagonal(&DVector::from_iterator(n, freqs.iter().map(|w| w.sqrt())));
    let inv_scale = DMatrix::from_diagonal(&DVector::from_iterator(n, freqs.iter().map(|w| 1.0 / w.sqrt())));
    let ot = eig.eigenvectors.transpose();
    let position = &scale * &ot * k_inv_half;
    let momentum = inv_scale * ot * k_half;
    Ok((freqs, linalg::block_diag(&position, &momentum)))
}

// General positive-definite M: with A = M^{-1/2} J M^{-1/2} antisymmetric,
// find orthonormal pairs (u, v = −A u/d) so that Oᵀ A O = [[0, D], [−D, 0]];
// then S = D̃ Oᵀ M^{1/2} with D̃ = diag(√D, √D) and ω = 1/d.
fn williamson_modes(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let dim = m.nrows();
    let n = dim / 2;
    let m_half = linalg::sym_sqrt(m)?;
    let m_inv_half = linalg::sym_function(m, |x| 1.0 / x.sqrt())?;
    let a = &m_inv_half * symplectic_form(n) * &m_inv_half;
    let a = (&a - a.transpose()) * 0.5;
    let gram = linalg::symmetrize(&(a.transpose() * &a));
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let scale = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);

    let mut us: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut vs: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut ds: Vec<f64> = Vec::with_capacity(n);
    let mut used = vec![false; dim];
    while us.len() < n {
        let Some(lead) = order.iter().copied().find(|&i| !used[i]) else {
            return Err(Error::Numerical("Williamson pairing ran out of eigenvectors".into()));
        };
        let lambda = eig.eigenvalues[lead];
        let cluster: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&i| !used[i] && (eig.eigenvalues[i] - lambda).abs() <= 1e-8 * scale)
            .collect();
        let project = |c: DVector<f64>| {
            let mut r = c;
            for _ in 0..2 {
                for basis in us.iter().chain(vs.iter()) {
                    let overlap = basis.dot(&r);
                    r -= basis * overlap;
                }
            }
            r
        };
        let (best, residual) = cluster
            .iter()
            .map(|&i| (i, project(eig.eigenvectors.column(i).into_owned())))
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .expect("cluster contains lead");
        used[best] = true;
        if residual.norm() < 1e-6 {
            continue;
        }
        let u = residual.normalize();
        let au = &a * &u;
        let d = au.norm();
        if !(d > 0.0) {
            return Err(Error::Numerical("degenerate symplectic direction".into()));
        }
        let v = project(-au / d).normalize();
        us.push(u);
        vs.push(v);
        ds.push(d);
    }
    let mut o = DMatrix::zeros(dim, dim);
    for k in 0..n {
        o.set_column(k, &us[k]);
        o.set_column(k + n, &vs[k]);
    }
    let half = DVector::from_iterator(dim, ds.iter().chain(ds.iter()).map(|d| d.sqrt()));
    let s = DMatrix::from_diagonal(&half) * o.transpose() * m_half;
    Ok((ds.iter().map(|d| 1.0 / d).collect(), s))
}

fn participation(s: &DMatrix<f64>, k: usize) -> Vec<f64> {
    let n = s.nrows() / 2;
    let mut p: Vec<f64> = (0..n)
        .map(|j| {
            s[(k, j)].powi(2) + s[(k, j + n)].powi(2) + s[(k + n, j)].powi(2) + s[(k + n, j + n)].powi(2)
        })
        .collect();
    let total: f64 = p.iter().sum();
    if total > 0.0 {
        p.iter_mut().for_each(|x| *x /= total);
    }
    p
}

// Descending frequency; near-ties broken by descending lexicographic
// participation. Each mode's largest coefficient is made positive.
fn canonical_order(freqs: Vec<f64>, s: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = freqs.len();
    let top = freqs.iter().copied().fold(0.0_f64, f64::max);
    let parts: Vec<Vec<f64>> = (0..n).map(|k| participation(&s, k)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        if (freqs[a] - freqs[b]).abs() > 1e-9 * top {
            return freqs[b].total_cmp(&freqs[a]);
        }
        for (pa, pb) in parts[a].iter().zip(&parts[b]) {
            if (pa - pb).abs() > 1e-9 {
                return pb.total_cmp(pa);
            }
        }
        Ordering::Equal
    });
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for (new, &old) in order.iter().enumerate() {
        let mut row_x = s.row(old).into_owned();
        let mut row_p = s.row(old + n).into_owned();
        let pivot = row_x
            .iter()
            .chain(row_p.iter())
            .copied()
            .fold(0.0_f64, |best, v| if v.abs() > best.abs() + 1e-12 { v } else { best });
        if pivot < 0.0 {
            row_x = -row_x;
            row_p = -row_p;
        }
        out.set_row(new, &row_x);
        out.set_row(new + n, &row_p);
    }
    (order.iter().map(|&k| freqs[k]).collect(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::{extend_point_transform, two_body_transform};
    use approx::assert_abs_diff_eq;

    fn pair(c: f64) -> QuadraticHamiltonian {
        let sys = ModeSystem::unit_masses(2).unwrap();
        QuadraticHamiltonian::build(&sys, &DMatrix::from_row_slice(2, 2, &[1.0, c, c, 1.0])).unwrap()
    }

    fn atom(m1: f64, m2: f64, k: f64) -> QuadraticHamiltonian {
        let sys = ModeSystem::new(vec!["e".into(), "p".into()], vec![m1, m2]).unwrap();
        QuadraticHamiltonian::build(&sys, &DMatrix::from_row_slice(2, 2, &[k, -k, -k, k])).unwrap()
    }

    fn normal_rotation() -> SymplecticTransform {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        extend_point_transform(&DMatrix::from_row_slice(2, 2, &[h, h, h, -h])).unwrap()
    }

    fn split() -> DivisionSpec {
        DivisionSpec::bipartition("1|2", ("1", vec![0]), ("2", vec![1]), 2).unwrap()
    }

    #[test]
    fn single_oscillator() {
        let sys = ModeSystem::unit_masses(1).unwrap();
        let h = QuadraticHamiltonian::build(&sys, &DMatrix::from_element(1, 1, 1.0)).unwrap();
        assert_eq!(h.matrix(), &DMatrix::<f64>::identity(2, 2));
        let nm = h.normal_modes().unwrap();
        assert_abs_diff_eq!(nm.frequencies[0], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn build_rejects_asymmetric_potential() {
        let sys = ModeSystem::unit_masses(2).unwrap();
        let v = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(matches!(
            QuadraticHamiltonian::build(&sys, &v),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn free_mode_builds_but_has_no_normal_modes() {
        let sys = ModeSystem::unit_masses(2).unwrap();
        let v = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let h = QuadraticHamiltonian::build(&sys, &v).unwrap();
        match h.normal_modes() {
            Err(Error::NotPositiveDefinite { eigenvalue }) => assert_abs_diff_eq!(eigenvalue, 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn coupled_pair_blocks() {
        let h = pair(0.5);
        let blocks = h.partition_blocks(&split()).unwrap();
        assert_abs_diff_eq!(blocks.coupling_norm, 0.5, epsilon = 1e-15);
        assert_eq!(blocks.h_cross[(0, 0)], 0.5);
        let free = pair(0.0).partition_blocks(&split()).unwrap();
        assert_eq!(free.coupling_norm, 0.0);
    }

    #[test]
    fn reassembly_is_exact() {
        let h = atom(1.0, 1836.0, 0.7).transform(&normal_rotation()).unwrap();
        let blocks = h.partition_blocks(&split()).unwrap();
        assert_eq!(&blocks.reassemble(), h.matrix());
    }

    #[test]
    fn cm_relative_division_decouples_atom() {
        let (m1, m2, k) = (1.0, 1836.0, 1.0);
        let h = atom(m1, m2, k);
        let ep = h.partition_blocks(&DivisionSpec::bipartition("e+p", ("e", vec![0]), ("p", vec![1]), 2).unwrap()).unwrap();
        assert!(ep.coupling_norm > 0.1);
        let s = two_body_transform(m1, m2).unwrap();
        let cm = h.transform(&s).unwrap();
        let blocks = cm
            .partition_blocks(&DivisionSpec::bipartition("CM+R", ("CM", vec![0]), ("R", vec![1]), 2).unwrap())
            .unwrap();
        assert!(blocks.coupling_norm < 1e-12);
        // CM: free particle of mass m1 + m2; R: reduced mass, spring k
        let mu = m1 * m2 / (m1 + m2);
        let mp = cm.matrix();
        assert_abs_diff_eq!(mp[(0, 0)], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mp[(2, 2)], 1.0 / (m1 + m2), epsilon = 1e-15);
        assert_abs_diff_eq!(mp[(1, 1)], k, epsilon = 1e-12);
        assert_abs_diff_eq!(mp[(3, 3)], 1.0 / mu, epsilon = 1e-12);
    }

    #[test]
    fn identity_transform_leaves_matrix() {
        let h = pair(0.3);
        let t = h.transform(&SymplecticTransform::identity(2)).unwrap();
        assert_eq!(t.matrix(), h.matrix());
    }

    #[test]
    fn rotation_decouples_equal_mass_pair() {
        let h = pair(0.5).transform(&normal_rotation()).unwrap();
        let blocks = h.partition_blocks(&split()).unwrap();
        assert!(blocks.coupling_norm < 1e-12, "{}", blocks.coupling_norm);
    }

    #[test]
    fn normal_mode_frequencies_of_coupled_pair() {
        let nm = pair(0.5).normal_modes().unwrap();
        assert_abs_diff_eq!(nm.frequencies[0], 1.5_f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(nm.frequencies[1], 0.5_f64.sqrt(), epsilon = 1e-12);
        let diag = pair(0.5).transform(&nm.transform).unwrap();
        let w = &nm.frequencies;
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![w[0], w[1], w[0], w[1]]));
        assert!(max_abs(&(diag.matrix() - expected)) < 1e-9);
        // |ω₊² − ω₋²| = 2|C|/m
        assert_abs_diff_eq!((w[0] * w[0] - w[1] * w[1]).abs(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn equal_mass_position_map_matches_rotation() {
        let nm = pair(0.5).normal_modes().unwrap();
        let t = nm.position_map();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let rows = [[h, h], [h, -h]];
        for k in 0..2 {
            let r = t.row(k).into_owned();
            let r = &r / r.norm();
            let hit = rows.iter().any(|target| {
                let dot = r[0] * target[0] + r[1] * target[1];
                (dot.abs() - 1.0).abs() < 1e-10
            });
            assert!(hit, "row {k} = {r}");
        }
    }

    #[test]
    fn uncoupled_pair_gives_permutation() {
        let sys = ModeSystem::unit_masses(2).unwrap();
        let h = QuadraticHamiltonian::build(&sys, &DMatrix::identity(2, 2)).unwrap();
        let nm = h.normal_modes().unwrap();
        assert_eq!(nm.frequencies.len(), 2);
        assert!(nm.frequencies.iter().all(|w| (w - 1.0).abs() < 1e-12));
        let m = nm.transform.matrix();
        for i in 0..4 {
            let ones = m.row(i).iter().filter(|v| (v.abs() - 1.0).abs() < 1e-12).count();
            let zeros = m.row(i).iter().filter(|v| v.abs() < 1e-12).count();
            assert_eq!((ones, zeros), (1, 3));
        }
        // distinct frequencies come out sorted
        let h = QuadraticHamiltonian::build(&sys, &DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 4.0])).unwrap();
        let nm = h.normal_modes().unwrap();
        assert_abs_diff_eq!(nm.frequencies[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(nm.frequencies[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn williamson_route_handles_position_momentum_mixing() {
        let k = DMatrix::from_row_slice(
            4,
            4,
            &[0.2, 0.1, 0.0, 0.3, 0.1, -0.1, 0.2, 0.0, 0.0, 0.2, 0.1, 0.1, 0.3, 0.0, 0.1, -0.2],
        );
        let mixer = SymplecticTransform::from_generator(&k).unwrap();
        let h = pair(0.4).transform(&mixer).unwrap();
        let nm = h.normal_modes().unwrap();
        let reference = pair(0.4).normal_modes().unwrap();
        for (a, b) in nm.frequencies.iter().zip(&reference.frequencies) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
        let diag = h.transform(&nm.transform).unwrap();
        let w = &nm.frequencies;
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![w[0], w[1], w[0], w[1]]));
        assert!(max_abs(&(diag.matrix() - expected)) < 1e-9);
    }

    #[test]
    fn spectrum_survives_transform() {
        let h = pair(0.5);
        let before = h.symplectic_spectrum().unwrap();
        let after = h.transform(&two_body_transform(1.0, 3.0).unwrap()).unwrap().symplectic_spectrum().unwrap();
        for (a, b) in before.iter().zip(&after) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn linear_term_follows_displacement() {
        let h = pair(0.5).with_linear(DVector::from_vec(vec![0.1, 0.0, 0.0, 0.2])).unwrap();
        let s = normal_rotation().with_displacement(DVector::from_vec(vec![1.0, -0.5, 0.3, 0.0])).unwrap();
        let t = h.transform(&s).unwrap();
        let z = DVector::from_vec(vec![0.3, -0.7, 0.2, 0.9]);
        let zeta = s.apply(&z).unwrap();
        // energies agree up to the dropped constant
        let z0 = DVector::zeros(4);
        let offset = h.energy(&z0) - t.energy(&s.apply(&z0).unwrap());
        assert_abs_diff_eq!(h.energy(&z), t.energy(&zeta) + offset, epsilon = 1e-12);
    }
}
