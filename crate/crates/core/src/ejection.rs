//! Classical trajectories of atoms pushed out of the FORT by the eject beam.

use std::f64::consts::PI;

use rand::Rng as _;
use rand_distr::{Distribution, Normal, Poisson, UnitSphere};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{hz_to_angular, BOLTZMANN, PLANCK};
use crate::ensemble::AtomCloud;
use crate::optics::{DetunedBeam, GaussianBeam, GroundState, StateDetunings, StatePotentialField};
use crate::species::AtomicSpecies;
use crate::{seeding, Error, Result, Vec3};

const STANDARD_GRAVITY: f64 = 9.806_65;

/// FORT plus eject beam, both propagating along +z, with the eject focus
/// displaced transversely from the FORT focus at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapSetup {
    pub fort_power: f64,
    pub fort_waist: f64,
    pub fort_wavelength: f64,
    pub eject_power: f64,
    pub eject_waist: f64,
    /// Eject focus relative to the FORT focus, m.
    pub eject_offset: Vec3,
    /// Eject detuning from `omega_eb`, rad/s.
    pub eject_detuning_b: f64,
    pub species: AtomicSpecies,
}

impl TrapSetup {
    /// 100 mW / 5 um FORT at 1.06 um; 9 uW / 10 um eject beam 3 um to the
    /// left, 1 GHz blue of the |b> line.
    pub fn fig2() -> Self {
        Self {
            fort_power: 0.1,
            fort_waist: 5e-6,
            fort_wavelength: 1.06e-6,
            eject_power: 9e-6,
            eject_waist: 10e-6,
            eject_offset: Vec3::new(-3e-6, 0.0, 0.0),
            eject_detuning_b: hz_to_angular(1e9),
            species: AtomicSpecies::default(),
        }
    }

    pub fn fort_beam(&self) -> Result<GaussianBeam> {
        GaussianBeam::new(
            self.fort_power,
            self.fort_waist,
            self.fort_wavelength,
            Vec3::z(),
            Vec3::zeros(),
        )
    }

    /// The eject beam sits near the optical line, so its wavelength is the line's.
    pub fn eject_beam(&self) -> Result<GaussianBeam> {
        GaussianBeam::new(
            self.eject_power,
            self.eject_waist,
            self.species.line_wavelength,
            Vec3::z(),
            self.eject_offset,
        )
    }

    pub fn eject_detunings(&self) -> StateDetunings {
        StateDetunings::from_b(self.eject_detuning_b, &self.species)
    }

    pub fn field(&self) -> Result<StatePotentialField> {
        StatePotentialField::new(
            vec![
                DetunedBeam {
                    beam: self.fort_beam()?,
                    detunings: StateDetunings::far_off_resonance(self.fort_wavelength, &self.species),
                },
                DetunedBeam {
                    beam: self.eject_beam()?,
                    detunings: self.eject_detunings(),
                },
            ],
            self.species,
        )
    }

    /// Momentum of one eject photon, kg m/s.
    pub fn photon_momentum(&self) -> f64 {
        PLANCK / self.species.line_wavelength
    }

    /// Photons scattered in `duration` at the eject beam's peak intensity.
    pub fn photons_at_peak(&self, state: GroundState, duration: f64) -> Result<f64> {
        let beam = self.eject_beam()?;
        let rate = crate::optics::scattering_rate(
            beam.peak_intensity(),
            self.eject_detunings().for_state(state),
            &self.species,
        );
        Ok(rate * duration)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EjectConfig {
    /// K
    pub temperature: f64,
    /// s
    pub duration: f64,
    /// Relative local error of the adaptive integrator.
    pub tolerance: f64,
    pub include_recoil_kicks: bool,
    /// Adds `-g y` to the dynamics.
    pub gravity: bool,
    /// Displacement that counts as swept out of the FORT, m (`w_FORT`).
    pub sweep_distance: f64,
    /// `|r|` beyond which an unbound atom counts as escaped, m (`3 w_FORT`).
    pub escape_radius: f64,
    /// Trajectories are truncated outside this radius, m.
    pub region_radius: f64,
}

impl EjectConfig {
    pub fn for_setup(setup: &TrapSetup) -> Self {
        Self {
            temperature: 30e-6,
            duration: 200e-6,
            tolerance: 1e-10,
            include_recoil_kicks: false,
            gravity: false,
            sweep_distance: setup.fort_waist,
            escape_radius: 3.0 * setup.fort_waist,
            region_radius: 40.0 * setup.fort_waist,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) {
            return Err(Error::invalid("duration", "must be positive"));
        }
        if !(self.temperature >= 0.0) {
            return Err(Error::invalid("temperature", "must be >= 0"));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::invalid("tolerance", "must lie in (0, 1)"));
        }
        if !(self.escape_radius > 0.0 && self.region_radius >= self.escape_radius) {
            return Err(Error::invalid(
                "escape_radius",
                "need 0 < escape_radius <= region_radius",
            ));
        }
        Ok(())
    }
}

/// `t1 = sqrt(2 w / a)` from `a t1^2 / 2 = w`.
pub fn characteristic_eject_time(acceleration: f64, fort_waist: f64) -> Result<f64> {
    if !(acceleration > 0.0) {
        return Err(Error::NotEjected(acceleration));
    }
    Ok((2.0 * fort_waist / acceleration).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialCondition {
    pub position: Vec3,
    pub velocity: Vec3,
}

/// Positions uniform in a sphere around `center`, velocities Maxwell-Boltzmann at `temperature`.
pub fn sample_thermal_initial(
    temperature: f64,
    mass: f64,
    diameter: f64,
    center: Vec3,
    count: usize,
    seed: u64,
) -> Result<Vec<InitialCondition>> {
    if !(temperature >= 0.0) {
        return Err(Error::invalid("temperature", "must be >= 0"));
    }
    let mut rng = seeding::master_rng(seed);
    let cloud = AtomCloud::sample_with(count, diameter, seed, &mut rng)?;
    let sigma = (BOLTZMANN * temperature / mass).sqrt();
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::invalid("temperature", e.to_string()))?;
    Ok(cloud
        .positions
        .iter()
        .map(|p| InitialCondition {
            position: p + center,
            velocity: Vec3::new(
                normal.sample(&mut rng),
                normal.sample(&mut rng),
                normal.sample(&mut rng),
            ),
        })
        .collect())
}

/// Mean thermal speed `sqrt(8 k_B T / (pi m))`, m/s.
pub fn mean_thermal_speed(temperature: f64, mass: f64) -> f64 {
    (8.0 * BOLTZMANN * temperature / (PI * mass)).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryResult {
    pub state: GroundState,
    pub times: Vec<f64>,
    pub positions: Vec<Vec3>,
    pub velocities: Vec<Vec3>,
    /// Cumulative expected photon number at each sample.
    pub photons: Vec<f64>,
    /// Expected photons scattered over the whole run.
    pub photons_expected: f64,
    /// Realized photon count when recoil kicks are enabled.
    pub photons_sampled: Option<u64>,
    pub escaped: bool,
    /// Velocity direction when the escape criterion was met.
    pub exit_direction: Option<Vec3>,
    /// First time the displacement from the start reaches the sweep distance.
    pub escape_time: Option<f64>,
    /// Left the simulated region while still bound.
    pub truncated: bool,
    pub initial_acceleration: Vec3,
    /// `|E(t_end) - E(0)| / |E(0)|` for runs without kicks.
    pub energy_drift: Option<f64>,
}

impl TrajectoryResult {
    pub fn final_velocity(&self) -> Vec3 {
        *self.velocities.last().expect("trajectory has samples")
    }

    /// Cumulative expected photons at `t`, linearly interpolated.
    pub fn photons_by(&self, t: f64) -> f64 {
        match self.times.iter().position(|&s| s >= t) {
            Some(0) => self.photons[0],
            Some(i) => {
                let (t0, t1) = (self.times[i - 1], self.times[i]);
                let f = (t - t0) / (t1 - t0);
                self.photons[i - 1] + f * (self.photons[i] - self.photons[i - 1])
            }
            None => *self.photons.last().unwrap(),
        }
    }
}

struct Dynamics<'a> {
    field: &'a StatePotentialField,
    state: GroundState,
    gravity: bool,
}

/// Phase-space vector `[r, v, n_scattered]`.
type Phase = [f64; 7];

impl Dynamics<'_> {
    fn derivative(&self, y: &Phase) -> Phase {
        let r = Vec3::new(y[0], y[1], y[2]);
        let mut a = self.field.acceleration(self.state, &r);
        if self.gravity {
            a.y -= STANDARD_GRAVITY;
        }
        [y[3], y[4], y[5], a.x, a.y, a.z, self.field.scattering_rate(self.state, &r)]
    }

    fn energy(&self, r: &Vec3, v: &Vec3) -> f64 {
        let m = self.field.species.mass;
        let mut e = 0.5 * m * v.norm_squared() + self.field.potential(self.state, r);
        if self.gravity {
            e += m * STANDARD_GRAVITY * r.y;
        }
        e
    }
}

// Dormand-Prince 5(4) tableau; the field is autonomous so the nodes are not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One DP5 step; returns the 5th-order solution and the scaled error norm.
fn dp5_step(dyn_: &Dynamics, y: &Phase, h: f64, atol: &Phase, rtol: f64) -> (Phase, f64) {
    let mut k = [[0.0; 7]; 7];
    k[0] = dyn_.derivative(y);
    for s in 1..7 {
        let mut ys = *y;
        for (i, yi) in ys.iter_mut().enumerate() {
            for j in 0..s {
                *yi += h * A[s][j] * k[j][i];
            }
        }
        k[s] = dyn_.derivative(&ys);
    }
    let mut y5 = *y;
    let mut err = 0.0;
    for i in 0..7 {
        let mut d5 = 0.0;
        let mut d4 = 0.0;
        for s in 0..7 {
            d5 += B5[s] * k[s][i];
            d4 += B4[s] * k[s][i];
        }
        y5[i] += h * d5;
        let scale = atol[i] + rtol * y[i].abs().max(y5[i].abs());
        err += (h * (d5 - d4) / scale).powi(2);
    }
    (y5, (err / 7.0).sqrt())
}

/// Integrates `m r'' = F_state(r)` (optionally with gravity and recoil kicks)
/// until escape, truncation or the configured duration.
pub fn simulate_trajectory(
    initial: &InitialCondition,
    field: &StatePotentialField,
    state: GroundState,
    config: &EjectConfig,
    seed: u64,
) -> Result<TrajectoryResult> {
    config.validate()?;
    let dynamics = Dynamics {
        field,
        state,
        gravity: config.gravity,
    };
    let mut rng = seeding::master_rng(seed);
    let mass = field.species.mass;
    let rtol = config.tolerance;
    let atol: Phase = [
        rtol * 1e-6,
        rtol * 1e-6,
        rtol * 1e-6,
        rtol * 1e-2,
        rtol * 1e-2,
        rtol * 1e-2,
        rtol,
    ];

    let start = initial.position;
    let mut y: Phase = [
        start.x,
        start.y,
        start.z,
        initial.velocity.x,
        initial.velocity.y,
        initial.velocity.z,
        0.0,
    ];
    let mut t = 0.0;
    let mut h = config.duration * 1e-4;
    let mut max_step = config.duration / 500.0;
    let e0 = dynamics.energy(&start, &initial.velocity);

    let mut result = TrajectoryResult {
        state,
        times: vec![0.0],
        positions: vec![start],
        velocities: vec![initial.velocity],
        photons: vec![0.0],
        photons_expected: 0.0,
        photons_sampled: config.include_recoil_kicks.then_some(0),
        escaped: false,
        exit_direction: None,
        escape_time: None,
        truncated: false,
        initial_acceleration: field.acceleration(state, &start),
        energy_drift: None,
    };
    if config.include_recoil_kicks {
        // keep the expected photon number per step well below one
        let rate = field.scattering_rate(state, &start).max(1.0);
        max_step = max_step.min(0.05 / rate);
    }
    let photon_momentum = field
        .beams
        .iter()
        .map(|b| PLANCK / b.beam.wavelength)
        .collect::<Vec<_>>();

    while t < config.duration {
        h = h.min(max_step).min(config.duration - t);
        if h < config.duration * 1e-16 {
            return Err(Error::StepUnderflow {
                time: t,
                duration: config.duration,
                step: h,
                steps: result.times.len() as u64,
                norm: f64::NAN,
            });
        }
        let (mut y_new, err) = dp5_step(&dynamics, &y, h, &atol, rtol);
        if err > 1.0 {
            h *= (0.9 * err.powf(-0.2)).max(0.1);
            continue;
        }
        let t_new = t + h;
        let r_old = Vec3::new(y[0], y[1], y[2]);
        let v_old = Vec3::new(y[3], y[4], y[5]);
        let r_new = Vec3::new(y_new[0], y_new[1], y_new[2]);
        let v_new = Vec3::new(y_new[3], y_new[4], y_new[5]);

        if result.escape_time.is_none() && (r_new - start).norm() >= config.sweep_distance {
            result.escape_time = Some(hermite_crossing(
                t,
                h,
                (&r_old, &v_old),
                (&r_new, &v_new),
                &start,
                config.sweep_distance,
            ));
        }

        if config.include_recoil_kicks {
            let expected = y_new[6] - y[6];
            let events = if expected > 0.0 {
                Poisson::new(expected).map(|p| p.sample(&mut rng) as u64).unwrap_or(0)
            } else {
                0
            };
            if events > 0 {
                let rates: Vec<f64> = field
                    .beams
                    .iter()
                    .map(|b| {
                        crate::optics::scattering_rate(
                            b.beam.intensity(&r_new),
                            b.detunings.for_state(state),
                            &field.species,
                        )
                    })
                    .collect();
                let total: f64 = rates.iter().sum();
                let mut kick = Vec3::zeros();
                for _ in 0..events {
                    let mut pick = rng.random::<f64>() * total;
                    let mut beam = rates.len() - 1;
                    for (i, r) in rates.iter().enumerate() {
                        if pick < *r {
                            beam = i;
                            break;
                        }
                        pick -= r;
                    }
                    let p = photon_momentum[beam];
                    let emitted: [f64; 3] = UnitSphere.sample(&mut rng);
                    kick += p * field.beams[beam].beam.axis + p * Vec3::from(emitted);
                }
                let dv = kick / mass;
                y_new[3] += dv.x;
                y_new[4] += dv.y;
                y_new[5] += dv.z;
                result.photons_sampled = result.photons_sampled.map(|n| n + events);
            }
        }

        y = y_new;
        t = t_new;
        let r = Vec3::new(y[0], y[1], y[2]);
        let v = Vec3::new(y[3], y[4], y[5]);
        result.times.push(t);
        result.positions.push(r);
        result.velocities.push(v);
        result.photons.push(y[6]);

        if r.norm() > config.escape_radius && dynamics.energy(&r, &v) > 0.0 && r.dot(&v) > 0.0 {
            result.escaped = true;
            result.exit_direction = Some(v.normalize());
            break;
        }
        if r.norm() > config.region_radius {
            result.truncated = true;
            break;
        }
        h *= (0.9 * err.max(1e-10).powf(-0.2)).min(5.0);
    }

    result.photons_expected = y[6];
    if !config.include_recoil_kicks {
        let r = Vec3::new(y[0], y[1], y[2]);
        let v = Vec3::new(y[3], y[4], y[5]);
        let e1 = dynamics.energy(&r, &v);
        result.energy_drift = Some(if e0 != 0.0 {
            (e1 - e0).abs() / e0.abs()
        } else {
            (e1 - e0).abs()
        });
    }
    Ok(result)
}

/// Time within a step at which `|r(t) - start|` first reaches `distance`,
/// using the cubic Hermite interpolant of the step.
fn hermite_crossing(
    t0: f64,
    h: f64,
    (r0, v0): (&Vec3, &Vec3),
    (r1, v1): (&Vec3, &Vec3),
    start: &Vec3,
    distance: f64,
) -> f64 {
    let at = |s: f64| {
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        r0 * h00 + v0 * (h10 * h) + r1 * h01 + v1 * (h11 * h)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    if (at(lo) - start).norm() >= distance {
        return t0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if (at(mid) - start).norm() >= distance {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    t0 + hi * h
}

/// Runs independent trajectories in parallel with per-index seeds; output
/// order follows `initials`.
pub fn simulate_ensemble(
    initials: &[InitialCondition],
    field: &StatePotentialField,
    state: GroundState,
    config: &EjectConfig,
    master_seed: u64,
) -> Result<Vec<TrajectoryResult>> {
    initials
        .par_iter()
        .enumerate()
        .map(|(i, ic)| {
            simulate_trajectory(ic, field, state, config, seeding::derive_seed(master_seed, i as u64))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollimationStats {
    pub escaped: usize,
    pub mean_exit_direction: Vec3,
    /// rms velocity perpendicular to the mean exit direction, m/s.
    pub rms_transverse_velocity: f64,
    pub mean_exit_speed: f64,
    /// Mean initial acceleration along the exit direction, m/s^2.
    pub mean_acceleration: f64,
    /// `sqrt(2 w / a)` from the mean acceleration, s.
    pub characteristic_time: f64,
    /// Mean expected photons scattered by the characteristic time.
    pub photons_by_characteristic_time: f64,
    /// `sqrt(n_scat) hbar k / (m a t1)`.
    pub recoil_to_coherent_ratio: f64,
}

pub fn collimation_stats(
    trajectories: &[TrajectoryResult],
    mass: f64,
    photon_momentum: f64,
    sweep_distance: f64,
) -> Result<CollimationStats> {
    let escaped: Vec<&TrajectoryResult> = trajectories.iter().filter(|t| t.escaped).collect();
    if escaped.is_empty() {
        return Err(Error::NoEscapedTrajectories);
    }
    let n = escaped.len() as f64;
    let direction_sum: Vec3 = escaped.iter().filter_map(|t| t.exit_direction).sum();
    let mean_dir = if direction_sum.norm() > 0.0 {
        direction_sum.normalize()
    } else {
        Vec3::x()
    };
    let transverse_sq: f64 = escaped
        .iter()
        .map(|t| {
            let v = t.final_velocity();
            (v - v.dot(&mean_dir) * mean_dir).norm_squared()
        })
        .sum::<f64>()
        / n;
    let mean_exit_speed = escaped.iter().map(|t| t.final_velocity().norm()).sum::<f64>() / n;
    let mean_acceleration = escaped
        .iter()
        .map(|t| t.initial_acceleration.dot(&mean_dir))
        .sum::<f64>()
        / n;
    let t1 = characteristic_eject_time(mean_acceleration, sweep_distance)?;
    let photons = escaped.iter().map(|t| t.photons_by(t1)).sum::<f64>() / n;
    Ok(CollimationStats {
        escaped: escaped.len(),
        mean_exit_direction: mean_dir,
        rms_transverse_velocity: transverse_sq.sqrt(),
        mean_exit_speed,
        mean_acceleration,
        characteristic_time: t1,
        photons_by_characteristic_time: photons,
        recoil_to_coherent_ratio: photons.sqrt() * photon_momentum / (mass * mean_acceleration * t1),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub trajectories: usize,
    pub escape_fraction: f64,
    pub median_escape_time: Option<f64>,
    pub mean_photons_expected: f64,
    pub mean_photons_sampled: Option<f64>,
}

pub fn summarize(trajectories: &[TrajectoryResult]) -> EnsembleSummary {
    let n = trajectories.len().max(1) as f64;
    let escaped = trajectories.iter().filter(|t| t.escaped).count();
    let mut times: Vec<f64> = trajectories
        .iter()
        .filter(|t| t.escaped)
        .filter_map(|t| t.escape_time)
        .collect();
    times.sort_by(f64::total_cmp);
    let median = (!times.is_empty()).then(|| {
        let m = times.len() / 2;
        if times.len() % 2 == 0 {
            0.5 * (times[m - 1] + times[m])
        } else {
            times[m]
        }
    });
    let sampled: Vec<u64> = trajectories.iter().filter_map(|t| t.photons_sampled).collect();
    EnsembleSummary {
        trajectories: trajectories.len(),
        escape_fraction: escaped as f64 / n,
        median_escape_time: median,
        mean_photons_expected: trajectories.iter().map(|t| t.photons_expected).sum::<f64>() / n,
        mean_photons_sampled: (!sampled.is_empty())
            .then(|| sampled.iter().sum::<u64>() as f64 / sampled.len() as f64),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    /// Coordinate along the scan line, m.
    pub x: f64,
    /// U_a / k_B, uK.
    pub u_a: f64,
    /// U_b / k_B, uK.
    pub u_b: f64,
    /// Acceleration along the scan line, m/s^2.
    pub a_a: f64,
    pub a_b: f64,
}

/// Potentials and accelerations along `origin + x direction` for `x` in `[x_min, x_max]`.
pub fn scan_fig2(
    field: &StatePotentialField,
    origin: Vec3,
    direction: Vec3,
    x_min: f64,
    x_max: f64,
    samples: usize,
) -> Vec<ProfileRow> {
    let dir = direction.normalize();
    let n = samples.max(2);
    (0..n)
        .map(|i| {
            let x = x_min + (x_max - x_min) * i as f64 / (n - 1) as f64;
            let r = origin + x * dir;
            ProfileRow {
                x,
                u_a: field.potential(GroundState::A, &r) / BOLTZMANN * 1e6,
                u_b: field.potential(GroundState::B, &r) / BOLTZMANN * 1e6,
                a_a: field.acceleration(GroundState::A, &r).dot(&dir),
                a_b: field.acceleration(GroundState::B, &r).dot(&dir),
            }
        })
        .collect()
}

/// Position of the potential minimum along a line, found by golden-section
/// search inside `[x_min, x_max]` around the best sample of a coarse scan.
pub fn potential_minimum_along(
    field: &StatePotentialField,
    state: GroundState,
    origin: Vec3,
    direction: Vec3,
    x_min: f64,
    x_max: f64,
) -> f64 {
    let dir = direction.normalize();
    let u = |x: f64| field.potential(state, &(origin + x * dir));
    let n = 400;
    let step = (x_max - x_min) / n as f64;
    let best = (0..=n)
        .map(|i| x_min + step * i as f64)
        .min_by(|a, b| u(*a).total_cmp(&u(*b)))
        .unwrap();
    let (mut a, mut b) = ((best - step).max(x_min), (best + step).min(x_max));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if u(c) < u(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2() -> (TrapSetup, StatePotentialField, EjectConfig) {
        let s = TrapSetup::fig2();
        let f = s.field().unwrap();
        let c = EjectConfig::for_setup(&s);
        (s, f, c)
    }

    fn at_rest(p: Vec3) -> InitialCondition {
        InitialCondition { position: p, velocity: Vec3::zeros() }
    }

    #[test]
    fn characteristic_time_basics() {
        assert!((characteristic_eject_time(2.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let a = characteristic_eject_time(3.0, 1e-6).unwrap();
        let b = characteristic_eject_time(12.0, 1e-6).unwrap();
        assert!((a - 2.0 * b).abs() < 1e-18);
        assert!(matches!(characteristic_eject_time(0.0, 1.0), Err(Error::NotEjected(_))));
        assert!(characteristic_eject_time(-1.0, 1.0).is_err());
    }

    #[test]
    fn fig2_characteristic_time_near_40_us() {
        let (s, f, _) = fig2();
        let a = f.acceleration(GroundState::B, &Vec3::zeros());
        assert!(a.x > 0.0);
        let t1 = characteristic_eject_time(a.x, s.fort_waist).unwrap();
        assert!(t1 > 20e-6 && t1 < 60e-6, "{t1}");
    }

    #[test]
    fn zero_temperature_has_zero_velocity() {
        let ics = sample_thermal_initial(0.0, 1.443e-25, 5e-6, Vec3::zeros(), 50, 3).unwrap();
        assert!(ics.iter().all(|ic| ic.velocity == Vec3::zeros()));
        assert!(ics.iter().all(|ic| ic.position.norm() <= 2.5e-6));
    }

    #[test]
    fn thermal_kinetic_energy_is_equipartition() {
        let (m, t) = (1.443e-25, 30e-6);
        let n = 10_000;
        let ics = sample_thermal_initial(t, m, 5e-6, Vec3::zeros(), n, 17).unwrap();
        let ke: Vec<f64> = ics.iter().map(|ic| 0.5 * m * ic.velocity.norm_squared()).collect();
        let mean = ke.iter().sum::<f64>() / n as f64;
        let expected = 1.5 * BOLTZMANN * t;
        // KE ~ (k_B T / 2) chi^2_3 has standard deviation sqrt(3/2) k_B T
        let sigma = 1.5f64.sqrt() * BOLTZMANN * t / (n as f64).sqrt();
        assert!((mean - expected).abs() < 3.0 * sigma);
    }

    #[test]
    fn mean_speed_at_30_microkelvin() {
        // sqrt(8 k_B 30e-6 / (pi 1.443e-25)) = 0.0855 m/s
        let v = mean_thermal_speed(30e-6, 1.443e-25);
        assert!((v - 0.0855).abs() < 0.001, "{v}");
    }

    #[test]
    fn free_flight_is_a_straight_line() {
        let mut s = TrapSetup::fig2();
        s.fort_power = 0.0;
        s.eject_power = 0.0;
        let f = s.field().unwrap();
        let mut c = EjectConfig::for_setup(&s);
        c.duration = 20e-6;
        let v = Vec3::new(0.05, -0.02, 0.01);
        let r = simulate_trajectory(&InitialCondition { position: Vec3::zeros(), velocity: v }, &f, GroundState::B, &c, 1)
            .unwrap();
        let t_end = *r.times.last().unwrap();
        let expected = v * t_end;
        assert!((r.positions.last().unwrap() - expected).norm() < 1e-15);
        assert!(r.energy_drift.unwrap() <= 1e-9);
        assert_eq!(r.photons_expected, 0.0);
    }

    #[test]
    fn state_a_stays_trapped_near_shifted_minimum() {
        let (_, f, mut c) = fig2();
        c.duration = 100e-6;
        let x0 = potential_minimum_along(&f, GroundState::A, Vec3::zeros(), Vec3::x(), -3e-6, 3e-6);
        assert!(x0 < 0.0 && x0.abs() < 1e-6, "{x0}");
        let start = Vec3::new(x0 + 0.3e-6, 0.0, 0.0);
        let r = simulate_trajectory(&at_rest(start), &f, GroundState::A, &c, 1).unwrap();
        assert!(!r.escaped);
        assert!(r.positions.iter().all(|p| (p - Vec3::new(x0, 0.0, 0.0)).norm() < 1e-6));
        assert!(r.energy_drift.unwrap() <= 1e-6, "{:?}", r.energy_drift);
    }

    #[test]
    fn state_b_is_swept_out() {
        let (_, f, c) = fig2();
        let r = simulate_trajectory(&at_rest(Vec3::zeros()), &f, GroundState::B, &c, 1).unwrap();
        assert!(r.escaped);
        let t = r.escape_time.unwrap();
        assert!(t > 20e-6 && t < 60e-6, "{t}");
        assert!(r.exit_direction.unwrap().x > 0.9);
        assert!(r.energy_drift.unwrap() <= 1e-6);
        // expected photons equal the quadrature of the rate along the path
        let mut quad = 0.0;
        for i in 1..r.times.len() {
            let dt = r.times[i] - r.times[i - 1];
            let mid = 0.5 * (r.positions[i] + r.positions[i - 1]);
            quad += dt * f.scattering_rate(GroundState::B, &mid);
        }
        assert!((quad - r.photons_expected).abs() / r.photons_expected < 1e-3);
    }

    #[test]
    fn kicks_are_seed_deterministic() {
        let (_, f, mut c) = fig2();
        c.include_recoil_kicks = true;
        let a = simulate_trajectory(&at_rest(Vec3::zeros()), &f, GroundState::B, &c, 77).unwrap();
        let b = simulate_trajectory(&at_rest(Vec3::zeros()), &f, GroundState::B, &c, 77).unwrap();
        assert_eq!(a, b);
        assert!(a.photons_sampled.unwrap() > 0);
    }

    #[test]
    fn single_atom_without_kicks_has_no_transverse_spread() {
        let (s, f, mut c) = fig2();
        c.temperature = 0.0;
        let r = simulate_trajectory(&at_rest(Vec3::zeros()), &f, GroundState::B, &c, 1).unwrap();
        let stats = collimation_stats(&[r], s.species.mass, s.photon_momentum(), s.fort_waist).unwrap();
        assert!(stats.rms_transverse_velocity < 1e-12);
    }

    #[test]
    fn collimation_needs_an_escaped_atom() {
        let (s, f, mut c) = fig2();
        c.duration = 20e-6;
        let r = simulate_trajectory(&at_rest(Vec3::zeros()), &f, GroundState::A, &c, 1).unwrap();
        assert!(matches!(
            collimation_stats(&[r], s.species.mass, s.photon_momentum(), s.fort_waist),
            Err(Error::NoEscapedTrajectories)
        ));
    }

    #[test]
    fn stronger_eject_beam_gives_faster_atoms() {
        let speed = |power: f64| {
            let mut s = TrapSetup::fig2();
            s.eject_power = power;
            let f = s.field().unwrap();
            let c = EjectConfig::for_setup(&s);
            let r = simulate_trajectory(&at_rest(Vec3::zeros()), &f, GroundState::B, &c, 1).unwrap();
            assert!(r.escaped);
            r.final_velocity().norm()
        };
        assert!(speed(18e-6) > speed(9e-6));
    }

    #[test]
    fn profile_shapes() {
        let (_, f, _) = fig2();
        let rows = scan_fig2(&f, Vec3::zeros(), Vec3::x(), -2.5e-6, 2.5e-6, 51);
        assert!(rows.iter().all(|r| r.a_b > 0.0));
        // barrier-free path to the right of the eject center
        let right = scan_fig2(&f, Vec3::zeros(), Vec3::x(), -3e-6, 20e-6, 231);
        assert!(right.windows(2).all(|w| w[1].u_b < w[0].u_b));

        let mut s = TrapSetup::fig2();
        s.eject_power = 0.0;
        let plain = s.field().unwrap();
        let rows = scan_fig2(&plain, Vec3::zeros(), Vec3::x(), -5e-6, 5e-6, 41);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.u_a, r.u_b);
            assert!((r.u_a - rows[40 - i].u_a).abs() < 1e-9);
        }
    }

    #[test]
    fn mirrored_offset_mirrors_profile() {
        let mut s = TrapSetup::fig2();
        let a = scan_fig2(&s.field().unwrap(), Vec3::zeros(), Vec3::x(), -6e-6, 6e-6, 25);
        s.eject_offset = -s.eject_offset;
        let b = scan_fig2(&s.field().unwrap(), Vec3::zeros(), Vec3::x(), -6e-6, 6e-6, 25);
        for (i, r) in a.iter().enumerate() {
            let m = &b[24 - i];
            assert!((r.u_b - m.u_b).abs() < 1e-9 * r.u_b.abs().max(1.0));
            assert!((r.a_b + m.a_b).abs() < 1e-9 * r.a_b.abs().max(1.0));
        }
    }
}
