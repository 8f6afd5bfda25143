//! Atomic species parameters.

use serde::{Deserialize, Serialize};

use crate::constants::hz_to_angular;
use crate::{Error, Result};

/// Two-level optical line plus the few extra numbers the protocols need.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomicSpecies {
    /// kg
    pub mass: f64,
    /// Natural linewidth of the optical line, rad/s.
    pub linewidth: f64,
    /// W/m^2
    pub saturation_intensity: f64,
    /// m
    pub line_wavelength: f64,
    /// Splitting between the two hyperfine ground states |a> and |b>, rad/s.
    pub ground_hyperfine_splitting: f64,
    /// Spontaneous decay rate of the Rydberg level, rad/s.
    pub rydberg_decay: f64,
}

impl AtomicSpecies {
    /// 87Rb on the D2 line.
    pub fn rubidium_87() -> Self {
        Self {
            mass: 1.443e-25,
            linewidth: hz_to_angular(6.07e6),
            saturation_intensity: 16.7,
            line_wavelength: 780e-9,
            ground_hyperfine_splitting: hz_to_angular(6.8e9),
            rydberg_decay: hz_to_angular(1.0e3),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("mass", self.mass),
            ("linewidth", self.linewidth),
            ("saturation_intensity", self.saturation_intensity),
            ("line_wavelength", self.line_wavelength),
            ("ground_hyperfine_splitting", self.ground_hyperfine_splitting),
            ("rydberg_decay", self.rydberg_decay),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(name, format!("must be positive, got {value}")));
            }
        }
        Ok(())
    }

    /// Resonant photon momentum hbar k of the optical line, kg m/s.
    pub fn photon_momentum(&self) -> f64 {
        crate::constants::PLANCK / self.line_wavelength
    }
}

impl Default for AtomicSpecies {
    fn default() -> Self {
        Self::rubidium_87()
    }
}
