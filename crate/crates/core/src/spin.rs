//! Exact finite-size treatment of the isolated LMG model in the maximal
//! angular-momentum sector `j = N/2`.
//!
//! Matrices are stored in the Dicke basis `|j, m>` with `m` ascending from
//! `-j` to `j`, so basis index `i` carries `m = i - j`. `Jz` is diagonal, `Jx`
//! couples neighbours and `Jx^2` couples `m` to `m +- 2`; any combination of
//! `Jz` and `Jx^2` therefore splits into two tridiagonal parity blocks.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::model::LmgParams;
use crate::tridiagonal::SymTridiagonal;

/// Largest particle number accepted when building a Hamiltonian.
pub const MAX_SPINS: usize = 5000;

/// Largest particle number for which full spectra (Gibbs averages) are formed.
pub const FULL_SPECTRUM_MAX_SPINS: usize = 2000;

/// Symmetric real matrix of bandwidth two in the Dicke basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinMatrix {
    n_spins: usize,
    diag: Vec<f64>,
    /// `off1[i]` couples indices `i` and `i + 1`.
    off1: Vec<f64>,
    /// `off2[i]` couples indices `i` and `i + 2`.
    off2: Vec<f64>,
}

fn check_capacity(n_spins: usize) -> Result<()> {
    if n_spins == 0 {
        return Err(Error::invalid("n_spins", "must be at least 1"));
    }
    if n_spins > MAX_SPINS {
        return Err(Error::Capacity {
            n_spins,
            max: MAX_SPINS,
        });
    }
    Ok(())
}

/// `j(j+1) - m(m+1)`, the squared `J+` matrix element out of `|m>`.
fn ladder_up(j: f64, m: f64) -> f64 {
    (j * (j + 1.0) - m * (m + 1.0)).max(0.0)
}

impl SpinMatrix {
    pub fn zeros(n_spins: usize) -> Result<Self> {
        check_capacity(n_spins)?;
        let dim = n_spins + 1;
        Ok(Self {
            n_spins,
            diag: vec![0.0; dim],
            off1: vec![0.0; dim - 1],
            off2: vec![0.0; dim.saturating_sub(2)],
        })
    }

    pub fn jz(n_spins: usize) -> Result<Self> {
        let mut out = Self::zeros(n_spins)?;
        let j = out.j();
        for (i, d) in out.diag.iter_mut().enumerate() {
            *d = i as f64 - j;
        }
        Ok(out)
    }

    pub fn jx(n_spins: usize) -> Result<Self> {
        let mut out = Self::zeros(n_spins)?;
        let j = out.j();
        for (i, o) in out.off1.iter_mut().enumerate() {
            *o = 0.5 * ladder_up(j, i as f64 - j).sqrt();
        }
        Ok(out)
    }

    /// `Jx^2 = (J+^2 + J-^2 + J+J- + J-J+) / 4`.
    pub fn jx_squared(n_spins: usize) -> Result<Self> {
        let mut out = Self::zeros(n_spins)?;
        let j = out.j();
        let jj = j * (j + 1.0);
        for (i, d) in out.diag.iter_mut().enumerate() {
            let m = i as f64 - j;
            *d = 0.5 * (jj - m * m);
        }
        for (i, o) in out.off2.iter_mut().enumerate() {
            let m = i as f64 - j;
            *o = 0.25 * (ladder_up(j, m) * ladder_up(j, m + 1.0)).sqrt();
        }
        Ok(out)
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, factor: f64, other: &SpinMatrix) -> Result<SpinMatrix> {
        if self.n_spins != other.n_spins {
            return Err(Error::invalid(
                "other",
                format!("N mismatch: {} vs {}", self.n_spins, other.n_spins),
            ));
        }
        let combine = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + factor * y).collect();
        Ok(SpinMatrix {
            n_spins: self.n_spins,
            diag: combine(&self.diag, &other.diag),
            off1: combine(&self.off1, &other.off1),
            off2: combine(&self.off2, &other.off2),
        })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn j(&self) -> f64 {
        self.n_spins as f64 / 2.0
    }

    pub fn dimension(&self) -> usize {
        self.n_spins + 1
    }

    /// Magnetic quantum number of basis index `i`.
    pub fn m_value(&self, i: usize) -> f64 {
        i as f64 - self.j()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let (i, k) = if row <= col { (row, col) } else { (col, row) };
        match k - i {
            0 => self.diag[i],
            1 => self.off1[i],
            2 => self.off2[i],
            _ => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dimension();
        assert_eq!(x.len(), n, "vector length must match the matrix dimension");
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for (i, &o) in self.off1.iter().enumerate() {
            y[i] += o * x[i + 1];
            y[i + 1] += o * x[i];
        }
        for (i, &o) in self.off2.iter().enumerate() {
            y[i] += o * x[i + 2];
            y[i + 2] += o * x[i];
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dimension();
        DMatrix::from_fn(n, n, |r, c| self.get(r, c))
    }

    /// True when no element couples `m` to `m +- 1`.
    pub fn conserves_parity(&self) -> bool {
        self.off1.iter().all(|&o| o == 0.0)
    }

    /// The even-index and odd-index blocks as tridiagonal matrices, or `None`
    /// when the matrix mixes parities. The odd block is absent for `N = 0`
    /// and never empty otherwise.
    pub fn parity_blocks(&self) -> Option<Vec<SymTridiagonal>> {
        if !self.conserves_parity() {
            return None;
        }
        let blocks = (0..2)
            .filter(|&p| p < self.dimension())
            .map(|p| {
                let diag: Vec<f64> = self.diag.iter().skip(p).step_by(2).copied().collect();
                let off: Vec<f64> = self.off2.iter().skip(p).step_by(2).copied().collect();
                SymTridiagonal::new(diag, off).expect("parity block shapes are consistent")
            })
            .collect();
        Some(blocks)
    }
}

/// `H = -h Jz - (gamma_x / N) Jx^2`.
pub fn build_lmg_hamiltonian(params: &LmgParams) -> Result<SpinMatrix> {
    let n = params.n_spins();
    let jz = SpinMatrix::jz(n)?;
    let jx2 = SpinMatrix::jx_squared(n)?;
    SpinMatrix::zeros(n)?
        .add_scaled(-params.h(), &jz)?
        .add_scaled(-params.gamma_x() / n as f64, &jx2)
}

/// Lowest eigenvalues in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
}

impl SpectrumResult {
    pub fn count(&self) -> usize {
        self.eigenvalues.len()
    }
}

fn dense_eigen(matrix: &SpinMatrix) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    let n = matrix.dimension();
    SymmetricEigen::try_new(matrix.to_dense(), f64::EPSILON, 1000 * n).ok_or_else(|| {
        Error::Convergence(format!("dense symmetric eigensolver failed for dimension {n}"))
    })
}

/// The `k` smallest eigenvalues of `matrix`.
///
/// Parity-conserving matrices are split into their two tridiagonal blocks
/// and solved by bisection; anything else falls back to a dense solver.
pub fn lowest_eigenvalues(matrix: &SpinMatrix, k: usize) -> Result<SpectrumResult> {
    if k == 0 || k > matrix.dimension() {
        return Err(Error::invalid(
            "k",
            format!("must lie in 1..={}, got {k}", matrix.dimension()),
        ));
    }
    let mut eigenvalues = match matrix.parity_blocks() {
        Some(blocks) => {
            let mut all = Vec::with_capacity(2 * k);
            for block in &blocks {
                all.extend(block.lowest_eigenvalues(k.min(block.dim()))?);
            }
            all
        }
        None => dense_eigen(matrix)?.eigenvalues.iter().copied().collect(),
    };
    eigenvalues.sort_by(f64::total_cmp);
    eigenvalues.truncate(k);
    Ok(SpectrumResult { eigenvalues })
}

/// All eigenvalues, ascending.
pub fn all_eigenvalues(matrix: &SpinMatrix) -> Result<Vec<f64>> {
    let mut values = match matrix.parity_blocks() {
        Some(blocks) => {
            let mut all = Vec::with_capacity(matrix.dimension());
            for block in &blocks {
                all.extend(block.eigenvalues()?);
            }
            all
        }
        None => dense_eigen(matrix)?.eigenvalues.iter().copied().collect(),
    };
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// An eigenstate's energy and `<Jz>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub energy: f64,
    pub jz: f64,
}

/// Complete spectrum of an LMG Hamiltonian with per-level `<Jz>`, from which
/// Gibbs averages at any temperature follow.
#[derive(Debug, Clone)]
pub struct GibbsSpectrum {
    params: LmgParams,
    levels: Vec<Level>,
}

fn check_full_spectrum(params: &LmgParams) -> Result<()> {
    if params.n_spins() > FULL_SPECTRUM_MAX_SPINS {
        return Err(Error::Capacity {
            n_spins: params.n_spins(),
            max: FULL_SPECTRUM_MAX_SPINS,
        });
    }
    Ok(())
}

impl GibbsSpectrum {
    pub fn new(params: &LmgParams) -> Result<Self> {
        check_full_spectrum(params)?;
        let h = build_lmg_hamiltonian(params)?;
        let j = h.j();
        let blocks = h.parity_blocks().expect("LMG Hamiltonian conserves parity");
        let mut levels = Vec::with_capacity(h.dimension());
        for (parity, block) in blocks.iter().enumerate() {
            let sys = block.eigensystem()?;
            for (energy, v) in sys.values.iter().zip(&sys.vectors) {
                let jz = v
                    .iter()
                    .enumerate()
                    .map(|(r, c)| c * c * ((parity + 2 * r) as f64 - j))
                    .sum();
                levels.push(Level {
                    energy: *energy,
                    jz,
                });
            }
        }
        levels.sort_by(|a, b| a.energy.total_cmp(&b.energy));
        Ok(Self {
            params: *params,
            levels,
        })
    }

    pub fn params(&self) -> &LmgParams {
        &self.params
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn ground_state(&self) -> Level {
        self.levels[0]
    }

    /// Boltzmann weights relative to the ground state and their sum.
    fn weights(&self, beta: f64) -> (Vec<f64>, f64) {
        let e0 = self.levels[0].energy;
        let w: Vec<f64> = self
            .levels
            .iter()
            .map(|l| (-beta * (l.energy - e0)).exp())
            .collect();
        let z = w.iter().sum();
        (w, z)
    }

    pub fn log_partition(&self, beta: f64) -> f64 {
        let (_, z) = self.weights(beta);
        -beta * self.levels[0].energy + z.ln()
    }

    pub fn thermal_jz(&self, beta: f64) -> f64 {
        let (w, z) = self.weights(beta);
        w.iter().zip(&self.levels).map(|(w, l)| w * l.jz).sum::<f64>() / z
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0) || beta.is_nan() {
        return Err(Error::Domain {
            quantity: "beta",
            value: beta,
            expected: "beta > 0",
        });
    }
    Ok(())
}

/// Gibbs `<Jz>` of the isolated model at inverse temperature `beta`, from the
/// eigenvectors. `beta = inf` gives the ground-state value.
pub fn thermal_expectation_jz(params: &LmgParams, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let spectrum = GibbsSpectrum::new(params)?;
    if beta.is_infinite() {
        return Ok(spectrum.ground_state().jz);
    }
    Ok(spectrum.thermal_jz(beta))
}

/// `ln Z` from the eigenvalues alone.
pub fn log_partition(params: &LmgParams, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    check_full_spectrum(params)?;
    let energies = all_eigenvalues(&build_lmg_hamiltonian(params)?)?;
    let e0 = energies[0];
    let z: f64 = energies.iter().map(|e| (-beta * (e - e0)).exp()).sum();
    Ok(-beta * e0 + z.ln())
}

/// Relative step of the field derivative in [`thermal_expectation_jz_from_partition`].
pub const PARTITION_FD_STEP: f64 = 1e-5;

/// Eigenvector-free `<Jz> = (1/beta) d ln Z / dh` by a central difference.
pub fn thermal_expectation_jz_from_partition(params: &LmgParams, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let step = PARTITION_FD_STEP * params.h();
    let up = log_partition(&params.with_h(params.h() + step)?, beta)?;
    let down = log_partition(&params.with_h(params.h() - step)?, beta)?;
    Ok((up - down) / (2.0 * step * beta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(h: f64, g: f64, n: usize) -> LmgParams {
        LmgParams::new(h, g, n).unwrap()
    }

    fn dense_sorted(m: &SpinMatrix) -> Vec<f64> {
        let mut v: Vec<f64> = m.to_dense().symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn jx_squared_matches_dense_product() {
        for n in [1, 2, 5, 8] {
            let jx = SpinMatrix::jx(n).unwrap().to_dense();
            let jx2 = SpinMatrix::jx_squared(n).unwrap().to_dense();
            assert!((&jx * &jx - jx2).abs().max() < 1e-12, "N = {n}");
        }
    }

    #[test]
    fn casimir_in_dicke_basis() {
        // Jx^2 + Jy^2 + Jz^2 = j(j+1); with Jy = (J+ - J-)/2i, Jx^2 + Jy^2 = (J+J- + J-J+)/2,
        // whose diagonal is twice that of Jx^2.
        let n = 7;
        let j = n as f64 / 2.0;
        let jx2 = SpinMatrix::jx_squared(n).unwrap();
        for i in 0..=n {
            let m = i as f64 - j;
            assert!((2.0 * jx2.get(i, i) + m * m - j * (j + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn single_spin_hamiltonian() {
        let (h, g) = (1.3, 0.7);
        let m = build_lmg_hamiltonian(&params(h, g, 1)).unwrap();
        assert_eq!(m.dimension(), 2);
        let e = lowest_eigenvalues(&m, 2).unwrap().eigenvalues;
        assert!((e[0] - (-h / 2.0 - g / 4.0)).abs() < 1e-14);
        assert!((e[1] - (h / 2.0 - g / 4.0)).abs() < 1e-14);
    }

    #[test]
    fn free_spin_ladder() {
        let n = 12;
        let m = build_lmg_hamiltonian(&params(0.8, 0.0, n)).unwrap();
        let all = all_eigenvalues(&m).unwrap();
        for (k, e) in all.iter().enumerate() {
            assert!((e - (-0.8 * n as f64 / 2.0 + 0.8 * k as f64)).abs() < 1e-12);
        }
        let low = lowest_eigenvalues(&m, 3).unwrap();
        assert_eq!(low.count(), 3);
        assert!((low.eigenvalues[2] - (-4.8 + 1.6)).abs() < 1e-12);
    }

    #[test]
    fn pure_interaction_three_level() {
        // h = 0 is outside LmgParams, build the matrix by hand: -(g/2) Jx^2 for j = 1
        let g = 1.7;
        let m = SpinMatrix::zeros(2)
            .unwrap()
            .add_scaled(-g / 2.0, &SpinMatrix::jx_squared(2).unwrap())
            .unwrap();
        let e = lowest_eigenvalues(&m, 3).unwrap().eigenvalues;
        // Jx has eigenvalues -1, 0, 1
        assert!((e[0] + g / 2.0).abs() < 1e-14);
        assert!((e[1] + g / 2.0).abs() < 1e-14);
        assert!(e[2].abs() < 1e-14);
        let dense = dense_sorted(&m);
        for (a, b) in e.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn parity_blocks_reproduce_full_spectrum() {
        for (g, n) in [(0.4, 30), (1.7, 41), (3.0, 64)] {
            let m = build_lmg_hamiltonian(&params(1.0, g, n)).unwrap();
            let blocks = all_eigenvalues(&m).unwrap();
            let dense = dense_sorted(&m);
            let scale = dense.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            for (a, b) in blocks.iter().zip(&dense) {
                assert!((a - b).abs() < 1e-10 * scale, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn parity_mixing_matrix_uses_dense_path() {
        let n = 9;
        let m = build_lmg_hamiltonian(&params(1.0, 0.5, n))
            .unwrap()
            .add_scaled(0.3, &SpinMatrix::jx(n).unwrap())
            .unwrap();
        assert!(m.parity_blocks().is_none());
        let low = lowest_eigenvalues(&m, 4).unwrap().eigenvalues;
        let dense = dense_sorted(&m);
        for (a, b) in low.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn matvec_matches_dense() {
        let m = build_lmg_hamiltonian(&params(1.0, 1.5, 11))
            .unwrap()
            .add_scaled(0.2, &SpinMatrix::jx(11).unwrap())
            .unwrap();
        let x: Vec<f64> = (0..12).map(|i| (i as f64 * 0.37).sin()).collect();
        let y = m.matvec(&x);
        let yd = m.to_dense() * nalgebra::DVector::from_column_slice(&x);
        for (a, b) in y.iter().zip(yd.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn capacity_and_k_errors() {
        assert!(matches!(
            build_lmg_hamiltonian(&params(1.0, 0.5, MAX_SPINS + 1)),
            Err(Error::Capacity { .. })
        ));
        let m = build_lmg_hamiltonian(&params(1.0, 0.5, 4)).unwrap();
        assert!(lowest_eigenvalues(&m, 6).is_err());
        assert!(lowest_eigenvalues(&m, 0).is_err());
        assert!(matches!(
            GibbsSpectrum::new(&params(1.0, 0.5, FULL_SPECTRUM_MAX_SPINS + 1)),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn two_level_gibbs_magnetization() {
        let h = 0.9;
        for beta in [0.1, 1.0, 4.0] {
            let jz = thermal_expectation_jz(&params(h, 0.0, 1), beta).unwrap();
            assert!((jz - 0.5 * (beta * h / 2.0).tanh()).abs() < 1e-14);
        }
    }

    #[test]
    fn polarized_ground_state_at_zero_temperature() {
        let n = 40;
        let jz = thermal_expectation_jz(&params(1.0, 0.0, n), f64::INFINITY).unwrap();
        assert!((jz - n as f64 / 2.0).abs() < 1e-12);
        let jz = thermal_expectation_jz(&params(1.0, 0.3, n), 200.0).unwrap();
        assert!(jz > 0.99 * n as f64 / 2.0);
    }

    #[test]
    fn eigenvector_and_partition_routes_agree() {
        for (g, beta) in [(0.5, 2.0), (1.0, 0.7), (2.0, 5.0)] {
            let p = params(1.0, g, 60);
            let a = thermal_expectation_jz(&p, beta).unwrap();
            let b = thermal_expectation_jz_from_partition(&p, beta).unwrap();
            assert!(((a - b) / a).abs() < 1e-7, "g = {g}: {a} vs {b}");
        }
    }

    #[test]
    fn hellmann_feynman_ground_state() {
        for g in [0.5, 2.0] {
            let p = params(1.0, g, 200);
            let step = 1e-5;
            let e = |h: f64| {
                lowest_eigenvalues(&build_lmg_hamiltonian(&p.with_h(h).unwrap()).unwrap(), 1)
                    .unwrap()
                    .eigenvalues[0]
            };
            let fd = -(e(1.0 + step) - e(1.0 - step)) / (2.0 * step);
            let jz = GibbsSpectrum::new(&p).unwrap().ground_state().jz;
            assert!(((fd - jz) / jz).abs() < 1e-6, "g = {g}: {fd} vs {jz}");
        }
    }

    #[test]
    fn broken_phase_levels_pair_up_with_size() {
        let gap = |n: usize| {
            let m = build_lmg_hamiltonian(&params(1.0, 2.0, n)).unwrap();
            let e = lowest_eigenvalues(&m, 2).unwrap().eigenvalues;
            e[1] - e[0]
        };
        // Tunnelling splitting shrinks exponentially; past N ~ 60 it is below
        // double precision.
        assert!(gap(10) > 0.03);
        assert!(gap(20) < 0.05 * gap(10));
        assert!(gap(40) < 1e-3 * gap(20));
        assert!(gap(200) < 1e-12);
    }
}
