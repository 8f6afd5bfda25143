use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::evolve::{evolve, EvolveOptions};
use super::hamiltonian::build_hamiltonian;
use super::pulse::{PulseSpec, Transition};
use super::state::{traveling_wave_phases, CollectiveState, ExcitedLevel};
use super::{l_factor, pi_pulse_time, spontaneous_correction};
use crate::ensemble::{mean_blockade_shift, AtomCloud, RydbergCoupling};
use crate::{Error, Result};

/// Slack allowed when comparing consecutive pulse windows, s.
const TIMING_SLACK: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockadeSummary {
    pub l_factor: f64,
    /// Collective pi-pulse time of the first excitation pulse; `None` when
    /// the sequence has no excitation pulse.
    pub t_pi: Option<f64>,
    pub p_zero: f64,
    pub p_single: f64,
    pub p_double: f64,
    pub spontaneous_correction: f64,
    /// Harmonic-mean pair shift, rad/s; `None` below two atoms.
    pub mean_shift: Option<f64>,
}

/// Applies `pulses` in order to an ensemble starting in its ground state.
///
/// Excitation pulses are integrated in the truncated basis. Transfer pulses
/// (`omega'` and `omega_3`) are ideal pi pulses: each excitation is relabeled
/// and picks up `-i e^{-i k . r_j}`.
pub fn run_preparation_sequence(
    cloud: &AtomCloud,
    coupling: &RydbergCoupling,
    pulses: &[PulseSpec],
    options: &EvolveOptions,
) -> Result<(CollectiveState, BlockadeSummary)> {
    let mut previous_end = f64::NEG_INFINITY;
    for (index, p) in pulses.iter().enumerate() {
        p.validate()?;
        if p.start + TIMING_SLACK < previous_end {
            return Err(Error::OverlappingPulses {
                index,
                start: p.start,
                previous_end,
            });
        }
        previous_end = p.end();
    }
    let excitations: Vec<&PulseSpec> = pulses.iter().filter(|p| p.transition.is_excitation()).collect();
    if excitations
        .windows(2)
        .any(|w| w[0].transition != w[1].transition)
    {
        return Err(Error::UnsupportedSequence(
            "excitation from both ground states in one sequence".into(),
        ));
    }

    let atoms = cloud.len();
    let mean_shift = if atoms >= 2 {
        Some(mean_blockade_shift(cloud, coupling)?)
    } else {
        None
    };

    let mut state = CollectiveState::ground(atoms);
    for p in pulses {
        if state.excited_level() != ExcitedLevel::Rydberg {
            return Err(Error::UnsupportedSequence(format!(
                "{:?} pulse after excitations were transferred to {:?}",
                p.transition,
                state.excited_level()
            )));
        }
        match p.transition {
            Transition::GroundToRydberg | Transition::TwoPhoton => {
                let h = build_hamiltonian(cloud, coupling, p)?;
                state = evolve(&state, &h, p.duration, options)?.state;
            }
            Transition::RydbergToGroundA => transfer(&mut state, cloud, p, ExcitedLevel::GroundA),
            Transition::RydbergToIntermediate => {
                transfer(&mut state, cloud, p, ExcitedLevel::Intermediate)
            }
        }
    }

    let shift = mean_shift.unwrap_or(f64::INFINITY);
    let (l, t_pi) = match excitations.first() {
        Some(p) if p.rabi > 0.0 => (
            l_factor(atoms, p.rabi, shift)?,
            Some(pi_pulse_time(atoms, p.rabi, shift)?),
        ),
        _ => (1.0, None),
    };
    let summary = BlockadeSummary {
        l_factor: l,
        t_pi,
        p_zero: state.p_zero(),
        p_single: state.p_single(),
        p_double: state.p_double(),
        spontaneous_correction: match mean_shift {
            Some(d) => spontaneous_correction(atoms, cloud.species.rydberg_decay, d)?,
            None => 0.0,
        },
        mean_shift,
    };
    Ok((state, summary))
}

fn transfer(state: &mut CollectiveState, cloud: &AtomCloud, pulse: &PulseSpec, level: ExcitedLevel) {
    let phases = traveling_wave_phases(&pulse.wavevector, &cloud.positions);
    let basis = state.basis();
    let minus_i = Complex64::new(0.0, -1.0);
    let amps = state.amplitudes_mut();
    for (j, &phi) in phases.iter().enumerate() {
        amps[basis.single(j)] *= minus_i * Complex64::from_polar(1.0, -phi);
    }
    for (j, k) in basis.pairs() {
        amps[basis.double(j, k)] *= -Complex64::from_polar(1.0, -(phases[j] + phases[k]));
    }
    state.set_excited_level(level);
}
