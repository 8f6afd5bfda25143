//! Strict JSON experiment configuration. Every physical value carries a unit.

use blockade_sources::constants::hz_to_angular;
use blockade_sources::ensemble::{CalibrationAnchor, RydbergCoupling};
use blockade_sources::species::AtomicSpecies;
use blockade_sources::Vec3;
use serde::{Deserialize, Serialize};

use crate::units::{Angle, Frequency, Intensity, Length, Mass, Power, Temperature, Time};
use crate::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed; `--seed` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub species: Option<SpeciesOverrides>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rydberg: Option<RydbergConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fig1: Option<Fig1Config>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eject: Option<EjectSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emission: Option<EmissionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleConfig>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<Mass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linewidth: Option<Frequency>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub saturation_intensity: Option<Intensity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line_wavelength: Option<Length>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_hyperfine_splitting: Option<Frequency>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rydberg_decay: Option<Frequency>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RydbergConfig {
    pub n: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<AnchorConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorConfig {
    pub n: u32,
    pub separation: Length,
    /// Magnitude of the pair shift.
    pub shift: Frequency,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig1Config {
    pub atoms: Vec<usize>,
    pub diameter: Length,
    pub trials: usize,
    /// |Omega| / 2 pi
    pub rabi: Frequency,
    /// Excitation wavelength; the wavevector points along +z.
    pub wavelength: Length,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator_cap: Option<usize>,
    /// Atom-number window for the linear fit.
    pub fit_range: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamConfig {
    pub power: Power,
    pub waist: Length,
    pub wavelength: Length,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EjectBeamConfig {
    pub power: Power,
    pub waist: Length,
    /// Eject focus relative to the FORT focus.
    pub offset: [Length; 3],
    /// Detuning from the |b> line.
    pub detuning_b: Frequency,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub from: Length,
    pub to: Length,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EjectSection {
    pub fort: BeamConfig,
    pub eject_beam: EjectBeamConfig,
    pub temperature: Temperature,
    pub cloud_diameter: Length,
    pub trajectories: usize,
    pub duration: Time,
    pub tolerance: f64,
    pub recoil_kicks: bool,
    #[serde(default)]
    pub gravity: bool,
    /// Trajectories written to trajectories.csv, per state.
    pub export_trajectories: usize,
    pub profile: ProfileConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryKind {
    Collinear,
    Tilted,
    CounterPropagating,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Polar cap around the expected peak direction.
    pub theta_max: Angle,
    pub n_theta: usize,
    pub n_azimuth: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmissionConfig {
    pub atoms: Vec<usize>,
    pub diameter: Length,
    pub lambda4: Length,
    pub geometry: GeometryKind,
    /// Tilt of k3 (tilted) or its polar angle (counter_propagating).
    pub tilt: Angle,
    /// Clouds averaged for the metrics; the first one is also exported alone.
    pub seeds: usize,
    pub grid: GridConfig,
    pub temperature: Temperature,
    pub prep_time: Time,
    /// Jitter trials for the motional dephasing study; 0 skips it.
    pub jitter_trials: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub atoms: usize,
    pub excitations: usize,
    pub rabi: Frequency,
    pub eject_time: Time,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn species(&self) -> Result<AtomicSpecies, CliError> {
        let mut s = AtomicSpecies::default();
        if let Some(o) = &self.species {
            if let Some(v) = o.mass {
                s.mass = v.si();
            }
            if let Some(v) = o.linewidth {
                s.linewidth = hz_to_angular(v.si());
            }
            if let Some(v) = o.saturation_intensity {
                s.saturation_intensity = v.si();
            }
            if let Some(v) = o.line_wavelength {
                s.line_wavelength = v.si();
            }
            if let Some(v) = o.ground_hyperfine_splitting {
                s.ground_hyperfine_splitting = hz_to_angular(v.si());
            }
            if let Some(v) = o.rydberg_decay {
                s.rydberg_decay = hz_to_angular(v.si());
            }
        }
        s.validate().map_err(CliError::from_core)?;
        Ok(s)
    }

    pub fn coupling(&self) -> Result<RydbergCoupling, CliError> {
        let Some(r) = &self.rydberg else {
            return Ok(RydbergCoupling::rubidium_n50());
        };
        let anchor = match &r.anchor {
            Some(a) => CalibrationAnchor {
                principal_n: a.n,
                separation: a.separation.si(),
                shift: hz_to_angular(a.shift.si()),
            },
            None => CalibrationAnchor::rubidium_n50(),
        };
        RydbergCoupling::calibrated(r.n, anchor).map_err(CliError::from_core)
    }

    pub fn section<'a, T>(&self, section: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        section
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("config has no `{name}` section")))
    }
}

pub fn vector(v: &[Length; 3]) -> Vec3 {
    Vec3::new(v[0].si(), v[1].si(), v[2].si())
}

/// Bundled configs reproducing the published parameter sets.
pub fn bundled(command: &str) -> &'static str {
    match command {
        "fig1" => include_str!("../configs/fig1.json"),
        "eject" => include_str!("../configs/eject.json"),
        "emission" => include_str!("../configs/emission.json"),
        _ => include_str!("../configs/schedule.json"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_configs_parse() {
        for c in ["fig1", "eject", "emission", "schedule"] {
            ExperimentConfig::parse(bundled(c)).unwrap();
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = ExperimentConfig::parse(r#"{"schedule": {"atoms": 5, "excitations": 1, "rabi": "1 MHz", "eject_time": "40 us", "extra": 1}}"#);
        assert!(matches!(e, Err(CliError::Config(m)) if m.contains("extra")));
        assert!(ExperimentConfig::parse(r#"{"sede": 3}"#).is_err());
    }

    #[test]
    fn bare_numbers_are_rejected_for_quantities() {
        let e = ExperimentConfig::parse(r#"{"schedule": {"atoms": 5, "excitations": 1, "rabi": 1e6, "eject_time": "40 us"}}"#);
        assert!(e.is_err());
    }
}
