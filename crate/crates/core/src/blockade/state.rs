use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec3};

/// Index layout of the basis truncated at double excitations:
/// `[g, r_0 .. r_{N-1}, r_0 r_1, r_0 r_2, .., r_{N-2} r_{N-1}]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Basis {
    atoms: usize,
}

impl Basis {
    pub fn new(atoms: usize) -> Self {
        Self { atoms }
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn pair_count(&self) -> usize {
        self.atoms * self.atoms.saturating_sub(1) / 2
    }

    pub fn dim(&self) -> usize {
        1 + self.atoms + self.pair_count()
    }

    pub const GROUND: usize = 0;

    pub fn single(&self, j: usize) -> usize {
        debug_assert!(j < self.atoms);
        1 + j
    }

    /// Lexicographic position of the pair `(j, k)`, `j < k`.
    pub fn pair_index(&self, j: usize, k: usize) -> usize {
        debug_assert!(j < k && k < self.atoms);
        let n = self.atoms;
        j * (2 * n - j - 1) / 2 + (k - j - 1)
    }

    pub fn double(&self, j: usize, k: usize) -> usize {
        1 + self.atoms + self.pair_index(j, k)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.atoms;
        (0..n).flat_map(move |j| (j + 1..n).map(move |k| (j, k)))
    }
}

/// Internal level holding the excitations of a collective state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExcitedLevel {
    /// Rydberg level |r>.
    Rydberg,
    /// Lower hyperfine ground state |a>, reached from |r> by the omega' pulse.
    GroundA,
    /// Upper hyperfine ground state |b>, reached from |r> when the ensemble
    /// starts in |a>.
    GroundB,
    /// Intermediate level |e>, reached from |r> by the omega_3 pulse.
    Intermediate,
}

/// Amplitudes over `{g, r_j, r_j r_k}`.
///
/// Amplitudes are stored in the lab frame (the `c~` amplitudes). Traveling-wave
/// phases can be absorbed with [`CollectiveState::rotated_amplitudes`], which
/// returns `c_j = c~_j e^{-i phi_j}` and `c_jk = c~_jk e^{-i (phi_j + phi_k)}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollectiveState {
    basis: Basis,
    amplitudes: Vec<Complex64>,
    excited_level: ExcitedLevel,
}

impl CollectiveState {
    /// All atoms in the ground state, `c_g = 1`.
    pub fn ground(atoms: usize) -> Self {
        let basis = Basis::new(atoms);
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.dim()];
        amplitudes[Basis::GROUND] = Complex64::new(1.0, 0.0);
        Self {
            basis,
            amplitudes,
            excited_level: ExcitedLevel::Rydberg,
        }
    }

    /// `|s> = N^{-1/2} sum_j e^{i phi_j} |r_j>`.
    pub fn symmetric(phases: &[f64]) -> Self {
        let basis = Basis::new(phases.len());
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.dim()];
        let norm = (phases.len() as f64).sqrt().recip();
        for (j, &phi) in phases.iter().enumerate() {
            amplitudes[basis.single(j)] = Complex64::from_polar(norm, phi);
        }
        Self {
            basis,
            amplitudes,
            excited_level: ExcitedLevel::Rydberg,
        }
    }

    pub fn from_amplitudes(atoms: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let basis = Basis::new(atoms);
        if amplitudes.len() != basis.dim() {
            return Err(Error::invalid(
                "amplitudes",
                format!("expected {} entries, got {}", basis.dim(), amplitudes.len()),
            ));
        }
        Ok(Self {
            basis,
            amplitudes,
            excited_level: ExcitedLevel::Rydberg,
        })
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn atoms(&self) -> usize {
        self.basis.atoms()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn excited_level(&self) -> ExcitedLevel {
        self.excited_level
    }

    pub(crate) fn set_excited_level(&mut self, level: ExcitedLevel) {
        self.excited_level = level;
    }

    pub fn ground_amplitude(&self) -> Complex64 {
        self.amplitudes[Basis::GROUND]
    }

    pub fn singles(&self) -> &[Complex64] {
        let n = self.atoms();
        &self.amplitudes[1..1 + n]
    }

    pub fn doubles(&self) -> &[Complex64] {
        let n = self.atoms();
        &self.amplitudes[1 + n..]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn p_zero(&self) -> f64 {
        self.ground_amplitude().norm_sqr()
    }

    pub fn p_single(&self) -> f64 {
        self.singles().iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn p_double(&self) -> f64 {
        self.doubles().iter().map(|c| c.norm_sqr()).sum()
    }

    /// Amplitudes with the traveling-wave phases removed.
    pub fn rotated_amplitudes(&self, phases: &[f64]) -> Vec<Complex64> {
        assert_eq!(phases.len(), self.atoms());
        let mut out = self.amplitudes.clone();
        for (j, &phi) in phases.iter().enumerate() {
            out[self.basis.single(j)] *= Complex64::from_polar(1.0, -phi);
        }
        for (j, k) in self.basis.pairs() {
            out[self.basis.double(j, k)] *= Complex64::from_polar(1.0, -(phases[j] + phases[k]));
        }
        out
    }

    /// `|<s|psi>|^2` for the symmetric state with the given phases.
    pub fn symmetric_overlap(&self, phases: &[f64]) -> f64 {
        let n = self.atoms() as f64;
        let overlap: Complex64 = self
            .singles()
            .iter()
            .zip(phases)
            .map(|(c, &phi)| Complex64::from_polar(1.0, -phi) * c)
            .sum();
        overlap.norm_sqr() / n
    }
}

/// Per-atom phases `k . r_j`.
pub fn traveling_wave_phases(wavevector: &Vec3, positions: &[Vec3]) -> Vec<f64> {
    positions.iter().map(|r| wavevector.dot(r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_indices_are_lexicographic_and_dense() {
        let b = Basis::new(5);
        let idx: Vec<usize> = b.pairs().map(|(j, k)| b.pair_index(j, k)).collect();
        assert_eq!(idx, (0..10).collect::<Vec<_>>());
        assert_eq!(b.dim(), 16);
        assert_eq!(b.double(3, 4), b.dim() - 1);
    }

    #[test]
    fn symmetric_state_is_normalized() {
        let s = CollectiveState::symmetric(&[0.1, 2.0, -1.3, 0.7]);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
        assert!((s.symmetric_overlap(&[0.1, 2.0, -1.3, 0.7]) - 1.0).abs() < 1e-14);
        assert!((s.p_single() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rotation_removes_phases() {
        let phases = [0.3, -1.1, 2.2];
        let s = CollectiveState::symmetric(&phases);
        let rotated = s.rotated_amplitudes(&phases);
        let expected = 3f64.sqrt().recip();
        for c in &rotated[1..4] {
            assert!((c.re - expected).abs() < 1e-15 && c.im.abs() < 1e-15);
        }
    }
}
