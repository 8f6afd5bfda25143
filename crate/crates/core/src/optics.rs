//! Focused Gaussian beams and the two-level light shifts and scattering they
//! produce on the two hyperfine ground states.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{optical_angular_frequency, HBAR};
use crate::species::AtomicSpecies;
use crate::{Error, Result, Vec3};

/// TEM00 beam: `I = 2P / (pi w(z)^2) exp(-2 rho^2 / w(z)^2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianBeam {
    /// W
    pub power: f64,
    /// 1/e^2 intensity radius at the focus, m.
    pub waist: f64,
    /// m
    pub wavelength: f64,
    /// Unit propagation direction.
    pub axis: Vec3,
    /// m
    pub focus: Vec3,
}

impl GaussianBeam {
    pub fn new(power: f64, waist: f64, wavelength: f64, axis: Vec3, focus: Vec3) -> Result<Self> {
        if !(power >= 0.0 && power.is_finite()) {
            return Err(Error::invalid("power", format!("must be >= 0, got {power}")));
        }
        if !(waist > 0.0) {
            return Err(Error::invalid("waist", format!("must be positive, got {waist}")));
        }
        if !(wavelength > 0.0) {
            return Err(Error::invalid("wavelength", "must be positive"));
        }
        let norm = axis.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invalid("axis", "must be a nonzero vector"));
        }
        Ok(Self {
            power,
            waist,
            wavelength,
            axis: axis / norm,
            focus,
        })
    }

    pub fn rayleigh_range(&self) -> f64 {
        PI * self.waist * self.waist / self.wavelength
    }

    pub fn peak_intensity(&self) -> f64 {
        2.0 * self.power / (PI * self.waist * self.waist)
    }

    /// Axial and transverse coordinates of `r` in the beam frame.
    fn local(&self, r: &Vec3) -> (f64, Vec3) {
        let d = r - self.focus;
        let z = d.dot(&self.axis);
        (z, d - z * self.axis)
    }

    pub fn intensity(&self, r: &Vec3) -> f64 {
        if self.power == 0.0 {
            return 0.0;
        }
        let (z, perp) = self.local(r);
        let zr = self.rayleigh_range();
        let w2 = self.waist * self.waist * (1.0 + (z / zr).powi(2));
        2.0 * self.power / (PI * w2) * (-2.0 * perp.norm_squared() / w2).exp()
    }

    /// Analytic gradient of [`GaussianBeam::intensity`], W/m^3.
    pub fn intensity_gradient(&self, r: &Vec3) -> Vec3 {
        if self.power == 0.0 {
            return Vec3::zeros();
        }
        let (z, perp) = self.local(r);
        let zr = self.rayleigh_range();
        let w02 = self.waist * self.waist;
        let w2 = w02 * (1.0 + (z / zr).powi(2));
        let rho2 = perp.norm_squared();
        let i = 2.0 * self.power / (PI * w2) * (-2.0 * rho2 / w2).exp();
        let dw2_dz = 2.0 * w02 * z / (zr * zr);
        let di_dz = i * dw2_dz / w2 * (2.0 * rho2 / w2 - 1.0);
        let di_dperp = perp * (-4.0 * i / w2);
        di_dperp + self.axis * di_dz
    }
}

/// Two-level light shift with rotating-wave approximation,
/// `U = (hbar delta / 2) ln(1 + s / (1 + (2 delta / Gamma)^2))`, J.
pub fn dipole_potential(intensity: f64, detuning: f64, species: &AtomicSpecies) -> Result<f64> {
    if detuning == 0.0 {
        return Err(Error::ResonantLight);
    }
    let s = intensity / species.saturation_intensity;
    let d = 2.0 * detuning / species.linewidth;
    Ok(0.5 * HBAR * detuning * (s / (1.0 + d * d)).ln_1p())
}

/// `dU/dI` of [`dipole_potential`], J m^2 / W.
pub fn dipole_potential_slope(intensity: f64, detuning: f64, species: &AtomicSpecies) -> Result<f64> {
    if detuning == 0.0 {
        return Err(Error::ResonantLight);
    }
    let d = 2.0 * detuning / species.linewidth;
    let denom = species.saturation_intensity * (1.0 + d * d);
    Ok(0.5 * HBAR * detuning / denom / (1.0 + intensity / denom))
}

/// Photon scattering rate `(Gamma/2) s / (1 + s + (2 delta / Gamma)^2)`, 1/s.
pub fn scattering_rate(intensity: f64, detuning: f64, species: &AtomicSpecies) -> f64 {
    let s = intensity / species.saturation_intensity;
    let d = 2.0 * detuning / species.linewidth;
    0.5 * species.linewidth * s / (1.0 + s + d * d)
}

/// The two hyperfine ground states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroundState {
    A,
    B,
}

/// Detuning of one field from the `|e> <- |a>` and `|e> <- |b>` resonances, rad/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateDetunings {
    pub detuning_a: f64,
    pub detuning_b: f64,
}

impl StateDetunings {
    /// Field detuned by `detuning_b` from `omega_eb`; `|a>` lies one ground
    /// splitting lower, so its detuning is smaller by that splitting.
    pub fn from_b(detuning_b: f64, species: &AtomicSpecies) -> Self {
        Self {
            detuning_a: detuning_b - species.ground_hyperfine_splitting,
            detuning_b,
        }
    }

    /// Far-off-resonance field at `wavelength`, detuned identically for both
    /// states from the species' line.
    pub fn far_off_resonance(wavelength: f64, species: &AtomicSpecies) -> Self {
        let detuning = optical_angular_frequency(wavelength)
            - optical_angular_frequency(species.line_wavelength);
        Self {
            detuning_a: detuning,
            detuning_b: detuning,
        }
    }

    pub fn for_state(&self, state: GroundState) -> f64 {
        match state {
            GroundState::A => self.detuning_a,
            GroundState::B => self.detuning_b,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetunedBeam {
    pub beam: GaussianBeam,
    pub detunings: StateDetunings,
}

/// State-dependent potentials and forces summed over a list of beams.
/// Immutable once built and safe to share between threads.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatePotentialField {
    pub beams: Vec<DetunedBeam>,
    pub species: AtomicSpecies,
}

impl StatePotentialField {
    pub fn new(beams: Vec<DetunedBeam>, species: AtomicSpecies) -> Result<Self> {
        if beams.is_empty() {
            return Err(Error::invalid("beams", "need at least one beam"));
        }
        species.validate()?;
        for b in &beams {
            if b.detunings.detuning_a == 0.0 || b.detunings.detuning_b == 0.0 {
                return Err(Error::ResonantLight);
            }
        }
        Ok(Self { beams, species })
    }

    /// J
    pub fn potential(&self, state: GroundState, r: &Vec3) -> f64 {
        self.beams
            .iter()
            .map(|b| {
                dipole_potential(b.beam.intensity(r), b.detunings.for_state(state), &self.species)
                    .expect("detunings checked at construction")
            })
            .sum()
    }

    /// `-grad U`, N.
    pub fn force(&self, state: GroundState, r: &Vec3) -> Vec3 {
        self.beams
            .iter()
            .map(|b| {
                let slope = dipole_potential_slope(
                    b.beam.intensity(r),
                    b.detunings.for_state(state),
                    &self.species,
                )
                .expect("detunings checked at construction");
                -slope * b.beam.intensity_gradient(r)
            })
            .sum()
    }

    pub fn acceleration(&self, state: GroundState, r: &Vec3) -> Vec3 {
        self.force(state, r) / self.species.mass
    }

    /// Total photon scattering rate from all beams, 1/s.
    pub fn scattering_rate(&self, state: GroundState, r: &Vec3) -> f64 {
        self.beams
            .iter()
            .map(|b| scattering_rate(b.beam.intensity(r), b.detunings.for_state(state), &self.species))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::BOLTZMANN;
    use proptest::prelude::*;

    fn fort() -> GaussianBeam {
        GaussianBeam::new(0.1, 5e-6, 1.06e-6, Vec3::z(), Vec3::zeros()).unwrap()
    }

    #[test]
    fn peak_intensity_matches_closed_form() {
        let b = fort();
        let i0 = b.intensity(&Vec3::zeros());
        assert!((i0 - 2.546e9).abs() / 2.546e9 < 1e-3);
        let edge = b.intensity(&Vec3::new(5e-6, 0.0, 0.0));
        assert!((edge - i0 * (-2.0f64).exp()).abs() / edge < 1e-14);
        let dark = GaussianBeam::new(0.0, 5e-6, 1.06e-6, Vec3::z(), Vec3::zeros()).unwrap();
        assert_eq!(dark.intensity(&Vec3::new(1e-6, 2e-6, 3e-6)), 0.0);
    }

    #[test]
    fn transverse_plane_carries_full_power() {
        // midpoint rule in polar coordinates at z = z_R
        let b = fort();
        let z = b.rayleigh_range();
        let w = b.waist * 2f64.sqrt();
        let (nr, rmax) = (4000, 6.0 * w);
        let dr = rmax / nr as f64;
        let total: f64 = (0..nr)
            .map(|i| {
                let rho = (i as f64 + 0.5) * dr;
                2.0 * PI * rho * dr * b.intensity(&Vec3::new(rho, 0.0, z))
            })
            .sum();
        assert!((total - b.power).abs() / b.power < 1e-6, "{total}");
    }

    #[test]
    fn gradient_matches_finite_difference_off_axis() {
        let b = GaussianBeam::new(0.05, 3e-6, 0.8e-6, Vec3::new(1.0, 1.0, 0.3), Vec3::new(1e-6, 0.0, 0.0))
            .unwrap();
        let r = Vec3::new(2e-6, -1e-6, 9e-6);
        let g = b.intensity_gradient(&r);
        let h = 1e-10;
        for axis in 0..3 {
            let mut e = Vec3::zeros();
            e[axis] = h;
            let fd = (b.intensity(&(r + e)) - b.intensity(&(r - e))) / (2.0 * h);
            assert!((fd - g[axis]).abs() <= 1e-6 * g.norm());
        }
    }

    #[test]
    fn eject_light_shift_on_b_is_repulsive_sub_millikelvin() {
        let rb = AtomicSpecies::default();
        let u = dipole_potential(5.73e4, 2.0 * PI * 1e9, &rb).unwrap();
        // far-detuned hand value hbar Gamma^2 I / (8 delta I_sat) = 0.75 mK
        let far = HBAR * rb.linewidth.powi(2) * 5.73e4 / (8.0 * 2.0 * PI * 1e9 * rb.saturation_intensity);
        assert!((far / BOLTZMANN - 0.75e-3).abs() < 0.01e-3);
        assert!(u > 0.0);
        assert!((u / BOLTZMANN - 0.7e-3).abs() < 0.1e-3);
        assert!((u - far).abs() / far < 0.03);
        // deeper than the 1.06 um trap it must overcome
        let fort_detuning = StateDetunings::far_off_resonance(1.06e-6, &rb).detuning_b;
        let depth = dipole_potential(fort().peak_intensity(), fort_detuning, &rb).unwrap();
        assert!(u > depth.abs());
    }

    #[test]
    fn dipole_potential_edge_cases() {
        let rb = AtomicSpecies::default();
        assert_eq!(dipole_potential(0.0, 1e9, &rb).unwrap(), 0.0);
        assert!(matches!(dipole_potential(1.0, 0.0, &rb), Err(Error::ResonantLight)));
        let up = dipole_potential(5.73e4, 2.0 * PI * 1e12, &rb).unwrap();
        let down = dipole_potential(5.73e4, -2.0 * PI * 1e12, &rb).unwrap();
        assert_eq!(up, -down);
    }

    #[test]
    fn scattering_rate_basics() {
        let rb = AtomicSpecies::default();
        assert_eq!(scattering_rate(0.0, 1e9, &rb), 0.0);
        // saturated on resonance -> Gamma / 2
        let sat = scattering_rate(1e12, 0.0, &rb);
        assert!((sat - 0.5 * rb.linewidth).abs() / sat < 1e-9);
    }

    #[test]
    fn fort_detuning_is_about_minus_100_thz() {
        let rb = AtomicSpecies::default();
        let d = StateDetunings::far_off_resonance(1.06e-6, &rb);
        assert_eq!(d.detuning_a, d.detuning_b);
        assert!((d.detuning_a / (2.0 * PI) + 1.015e14).abs() < 0.01e14);
        let e = StateDetunings::from_b(2.0 * PI * 1e9, &rb);
        assert!((e.detuning_a / (2.0 * PI) + 5.8e9).abs() < 1.0);
    }

    proptest! {
        #[test]
        fn potential_sign_follows_detuning(i in 1e-3f64..1e10, delta in -1e15f64..1e15) {
            prop_assume!(delta.abs() > 1.0);
            let u = dipole_potential(i, delta, &AtomicSpecies::default()).unwrap();
            prop_assert_eq!(u.signum(), delta.signum());
        }

        #[test]
        fn far_detuned_scattering_falls_as_inverse_square(i in 1.0f64..1e3, k in 1.0f64..4.0) {
            let rb = AtomicSpecies::default();
            let d1 = 2.0 * PI * 10f64.powf(10.0 + k);
            let d2 = 2.0 * d1;
            let a = scattering_rate(i, d1, &rb) * d1 * d1;
            let b = scattering_rate(i, d2, &rb) * d2 * d2;
            prop_assert!((a - b).abs() / a < 1e-6);
        }
    }
}
