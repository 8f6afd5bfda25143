//! Collective Rydberg excitation under dipole blockade.
//!
//! The reduced model keeps only `c_g` and the symmetric amplitude `c_s`, with
//! the doubly excited manifold adiabatically eliminated. Its closed forms live
//! here; the full truncated-basis dynamics live in [`hamiltonian`] and
//! [`evolve`].

pub mod evolve;
pub mod hamiltonian;
pub mod pulse;
pub mod scan;
pub mod sequence;
pub mod state;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use evolve::{evolve, EvolveOptions, EvolveReport, Evolution, Method};
pub use hamiltonian::{build_hamiltonian, Hamiltonian};
pub use pulse::{PulseSpec, Transition};
pub use scan::{fig1_scan, linear_fit, Fig1Params, Fig1Row, LinearFit};
pub use sequence::{run_preparation_sequence, BlockadeSummary};
pub use state::{Basis, CollectiveState, ExcitedLevel};

fn check_atoms_and_shift(atoms: usize, mean_shift: f64) -> Result<()> {
    if atoms == 0 {
        return Err(Error::TooFewAtoms { required: 1, got: 0 });
    }
    if atoms >= 2 && !(mean_shift > 0.0) {
        return Err(Error::invalid(
            "mean_shift",
            format!("must be positive, got {mean_shift}"),
        ));
    }
    Ok(())
}

/// `l = 1 + (N-1)^2 |Omega|^2 / (4 N Delta_dd^2)`; exactly 1 for a single atom.
pub fn l_factor(atoms: usize, rabi: f64, mean_shift: f64) -> Result<f64> {
    check_atoms_and_shift(atoms, mean_shift)?;
    if atoms == 1 {
        return Ok(1.0);
    }
    let n = atoms as f64;
    let x = rabi / mean_shift;
    Ok(1.0 + (n - 1.0).powi(2) * x * x / (4.0 * n))
}

/// `(P_ground, P_single)` at time `t` from `|c_s|^2 = l^-1 sin^2(sqrt(N l) |Omega| t / 2)`.
pub fn analytic_excitation(atoms: usize, rabi: f64, mean_shift: f64, t: f64) -> Result<(f64, f64)> {
    let l = l_factor(atoms, rabi, mean_shift)?;
    let omega = (atoms as f64 * l).sqrt() * rabi.abs();
    let p_single = (0.5 * omega * t).sin().powi(2) / l;
    Ok((1.0 - p_single, p_single))
}

/// `t = pi / (sqrt(N l) |Omega|)`.
pub fn pi_pulse_time(atoms: usize, rabi: f64, mean_shift: f64) -> Result<f64> {
    if !(rabi.abs() > 0.0) {
        return Err(Error::invalid("rabi", "pi pulse needs a nonzero Rabi frequency"));
    }
    let l = l_factor(atoms, rabi, mean_shift)?;
    Ok(PI / ((atoms as f64 * l).sqrt() * rabi.abs()))
}

/// Leakage estimate `P_double ~ ((N-1) / 2l) |Omega|^2 / Delta_dd^2`.
pub fn p_double_estimate(atoms: usize, rabi: f64, mean_shift: f64) -> Result<f64> {
    if atoms < 2 {
        return Ok(0.0);
    }
    let l = l_factor(atoms, rabi, mean_shift)?;
    let x = rabi / mean_shift;
    Ok((atoms as f64 - 1.0) / (2.0 * l) * x * x)
}

/// Order of the spontaneous-emission correction, `N gamma_R / Delta_dd`.
/// Reported as a diagnostic; it is not applied to any probability.
pub fn spontaneous_correction(atoms: usize, rydberg_decay: f64, mean_shift: f64) -> Result<f64> {
    if !(rydberg_decay >= 0.0 && mean_shift > 0.0) {
        return Err(Error::invalid(
            "spontaneous_correction",
            "decay rate must be >= 0 and mean shift > 0",
        ));
    }
    Ok(atoms as f64 * rydberg_decay / mean_shift)
}

/// Timing of the m-atom pulse source.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleReport {
    pub atoms: usize,
    pub excitations: usize,
    /// Time to build the m-fold excited state, s.
    pub preparation_time: f64,
    /// Preparation plus ejection, s.
    pub cycle_time: f64,
    /// Deterministic atom pulses before the trap must be reloaded.
    pub repetitions: usize,
    /// Atom pulses per second.
    pub pulse_rate: f64,
}

/// m sequential blockade cycles, cycle `i` driven at the collective Rabi
/// frequency `sqrt(N - i) |Omega|`, followed by ejection.
pub fn m_excitation_schedule(
    atoms: usize,
    excitations: usize,
    rabi: f64,
    eject_time: f64,
) -> Result<ScheduleReport> {
    if excitations == 0 || excitations > atoms {
        return Err(Error::invalid(
            "m",
            format!("need 1 <= m <= N, got m = {excitations}, N = {atoms}"),
        ));
    }
    if !(rabi.abs() > 0.0) {
        return Err(Error::invalid("rabi", "must be nonzero"));
    }
    if !(eject_time >= 0.0) {
        return Err(Error::invalid("eject_time", "must be >= 0"));
    }
    let preparation_time: f64 = (0..excitations)
        .map(|i| PI / (((atoms - i) as f64).sqrt() * rabi.abs()))
        .sum();
    let cycle_time = preparation_time + eject_time;
    Ok(ScheduleReport {
        atoms,
        excitations,
        preparation_time,
        cycle_time,
        repetitions: atoms / excitations,
        pulse_rate: 1.0 / cycle_time,
    })
}
