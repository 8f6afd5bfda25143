use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec3};

/// Which optical transition a pulse drives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Transition {
    /// |b> -> |r> at omega; blockade-limited excitation.
    GroundToRydberg,
    /// |r> -> |a> at omega'; ideal transfer pulse.
    RydbergToGroundA,
    /// |a> -> |e> -> |r> two-photon excitation at omega_1 + omega_2.
    TwoPhoton,
    /// |r> -> |e> at omega_3; ideal transfer pulse.
    RydbergToIntermediate,
}

impl Transition {
    /// Pulses that drive collective excitation into the Rydberg manifold.
    pub fn is_excitation(&self) -> bool {
        matches!(self, Transition::GroundToRydberg | Transition::TwoPhoton)
    }
}

/// A square pulse with uniform intensity and traveling-wave phase
/// `Omega_j = |Omega| e^{i k . r_j}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub transition: Transition,
    /// |Omega|, rad/s.
    pub rabi: f64,
    /// rad/m
    pub wavevector: Vec3,
    /// s
    pub start: f64,
    /// s
    pub duration: f64,
}

impl PulseSpec {
    pub fn new(transition: Transition, rabi: f64, wavevector: Vec3, duration: f64) -> Result<Self> {
        let pulse = Self {
            transition,
            rabi,
            wavevector,
            start: 0.0,
            duration,
        };
        pulse.validate()?;
        Ok(pulse)
    }

    /// Effective two-photon pulse: wavevector `k1 + k2`,
    /// Rabi frequency `|Omega_1| |Omega_2| / Delta_e`.
    pub fn two_photon(
        rabi_1: f64,
        rabi_2: f64,
        intermediate_detuning: f64,
        k1: Vec3,
        k2: Vec3,
        duration: f64,
    ) -> Result<Self> {
        if intermediate_detuning == 0.0 || !intermediate_detuning.is_finite() {
            return Err(Error::invalid(
                "intermediate_detuning",
                "must be nonzero and finite",
            ));
        }
        Self::new(
            Transition::TwoPhoton,
            (rabi_1 * rabi_2 / intermediate_detuning).abs(),
            k1 + k2,
            duration,
        )
    }

    pub fn starting_at(mut self, start: f64) -> Self {
        self.start = start;
        self
    }

    pub fn end(&self) -> f64 {
        self.start + self.duration
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rabi >= 0.0 && self.rabi.is_finite()) {
            return Err(Error::invalid("rabi", format!("must be >= 0, got {}", self.rabi)));
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(Error::invalid(
                "duration",
                format!("must be >= 0, got {}", self.duration),
            ));
        }
        if !self.start.is_finite() {
            return Err(Error::invalid("start", "must be finite"));
        }
        Ok(())
    }
}

/// Lays pulses end to end starting at t = 0.
pub fn back_to_back(pulses: &[PulseSpec]) -> Vec<PulseSpec> {
    let mut t = 0.0;
    pulses
        .iter()
        .map(|p| {
            let placed = p.starting_at(t);
            t = placed.end();
            placed
        })
        .collect()
}
