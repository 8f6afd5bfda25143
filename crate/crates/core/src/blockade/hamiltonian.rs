use nalgebra::DMatrix;
use num_complex::Complex64;

use super::pulse::PulseSpec;
use super::state::Basis;
use crate::ensemble::{AtomCloud, RydbergCoupling};
use crate::Result;

/// Sparse Hermitian operator `H / hbar` (rad/s) on the truncated basis.
///
/// Rows are stored in compressed form with both triangles present, so the
/// matrix-vector product needs no symmetry bookkeeping.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    basis: Basis,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<Complex64>,
    max_rabi: f64,
    min_pair_shift: Option<f64>,
}

/// Collective Hamiltonian `V_d + V_dd` for a frozen cloud under one pulse.
///
/// * `<r_j|H|g> = Omega_j / 2`
/// * `<r_j r_k|H|r_j> = Omega_k / 2`, `<r_j r_k|H|r_k> = Omega_j / 2`
/// * `<r_j r_k|H|r_j r_k> = Delta_jk`
///
/// with `Omega_j = |Omega| e^{i k . r_j}` and zero atom-field detuning.
pub fn build_hamiltonian(
    cloud: &AtomCloud,
    coupling: &RydbergCoupling,
    pulse: &PulseSpec,
) -> Result<Hamiltonian> {
    let n = cloud.len();
    let basis = Basis::new(n);
    let rabi: Vec<Complex64> = cloud
        .positions
        .iter()
        .map(|r| Complex64::from_polar(0.5 * pulse.rabi, pulse.wavevector.dot(r)))
        .collect();
    let mut rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); basis.dim()];
    let mut min_shift = f64::INFINITY;

    for j in 0..n {
        let s = basis.single(j);
        rows[s].push((Basis::GROUND, rabi[j]));
        rows[Basis::GROUND].push((s, rabi[j].conj()));
    }
    for (j, k) in basis.pairs() {
        let d = basis.double(j, k);
        let shift = coupling.pair_shift(&cloud.positions[j], &cloud.positions[k])?;
        min_shift = min_shift.min(shift.abs());
        let (sj, sk) = (basis.single(j), basis.single(k));
        rows[d].push((sj, rabi[k]));
        rows[sj].push((d, rabi[k].conj()));
        rows[d].push((sk, rabi[j]));
        rows[sk].push((d, rabi[j].conj()));
        rows[d].push((d, Complex64::new(shift, 0.0)));
    }

    let mut row_start = Vec::with_capacity(basis.dim() + 1);
    let mut cols = Vec::new();
    let mut values = Vec::new();
    row_start.push(0);
    for mut row in rows {
        row.sort_by_key(|&(c, _)| c);
        for (c, v) in row {
            cols.push(c);
            values.push(v);
        }
        row_start.push(cols.len());
    }
    Ok(Hamiltonian {
        basis,
        row_start,
        cols,
        values,
        max_rabi: pulse.rabi,
        min_pair_shift: (n >= 2).then_some(min_shift),
    })
}

impl Hamiltonian {
    /// The zero operator, useful for free evolution.
    pub fn zero(atoms: usize) -> Self {
        let basis = Basis::new(atoms);
        Self {
            basis,
            row_start: vec![0; basis.dim() + 1],
            cols: Vec::new(),
            values: Vec::new(),
            max_rabi: 0.0,
            min_pair_shift: None,
        }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn max_rabi(&self) -> f64 {
        self.max_rabi
    }

    /// Smallest `|Delta_jk|`, or `None` below two atoms.
    pub fn min_pair_shift(&self) -> Option<f64> {
        self.min_pair_shift
    }

    /// `|Omega| / min |Delta_jk|`, the small parameter behind the truncation.
    pub fn truncation_ratio(&self) -> f64 {
        match self.min_pair_shift {
            Some(d) if d > 0.0 => self.max_rabi / d,
            _ => 0.0,
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let range = self.row_start[i]..self.row_start[i + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn element(&self, i: usize, j: usize) -> Complex64 {
        let range = self.row_start[i]..self.row_start[i + 1];
        match self.cols[range.clone()].binary_search(&j) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// `out = H x`
    pub fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for p in self.row_start[i]..self.row_start[i + 1] {
                acc += self.values[p] * x[self.cols[p]];
            }
            *o = acc;
        }
    }

    /// Maximum absolute row sum, an upper bound on the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.row(i).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `max |H_ij - conj(H_ji)|` over stored entries.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim() {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.element(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        let mut m = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
        for i in 0..d {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }
}
