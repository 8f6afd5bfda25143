//! Far-field pattern of the single photon emitted by a phased ensemble.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_distr::{Distribution, Normal, UnitSphere};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::BOLTZMANN;
use crate::ensemble::AtomCloud;
use crate::seeding::{self, Rng};
use crate::{Error, Result, Vec3};

/// Minimum number of grid spacings across the FWHM.
pub const MIN_POINTS_ACROSS_LOBE: usize = 8;

fn wavenumber(wavelength: f64) -> f64 {
    2.0 * PI / wavelength
}

/// Beam wavevectors of the preparation/readout sequence and the emitted wavelength.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmissionGeometry {
    pub k1: Vec3,
    pub k2: Vec3,
    pub k3: Vec3,
    pub lambda4: f64,
    /// Angle between `k3` and the `k1 + k2` axis, rad.
    pub tilt: f64,
}

impl EmissionGeometry {
    pub fn new(k1: Vec3, k2: Vec3, k3: Vec3, lambda4: f64) -> Result<Self> {
        if !(lambda4 > 0.0) {
            return Err(Error::invalid("lambda4", "must be positive"));
        }
        let axis = k1 + k2;
        let tilt = if axis.norm() > 0.0 && k3.norm() > 0.0 {
            axis.angle(&k3)
        } else {
            0.0
        };
        Ok(Self { k1, k2, k3, lambda4, tilt })
    }

    /// Wavevector of length `2 pi / wavelength` along `direction`.
    pub fn beam(wavelength: f64, direction: Vec3) -> Vec3 {
        wavenumber(wavelength) * direction.normalize()
    }

    /// All beams along +z at `lambda`; phase matched with emission along +z.
    pub fn collinear(lambda: f64) -> Result<Self> {
        let k = Self::beam(lambda, Vec3::z());
        Self::new(k, k, k, lambda)
    }

    /// `k1 = k2` along z with `|k1 + k2| = 2 k4 cos(tilt)` and `k3` (`lambda3 = lambda4`)
    /// tilted by `tilt` in the x-z plane, so the phase-matched photon leaves at
    /// `-tilt` from the z axis.
    pub fn tilted(lambda4: f64, tilt: f64) -> Result<Self> {
        if !(tilt.abs() < PI / 2.0) {
            return Err(Error::invalid("tilt", "must lie in (-90, 90) degrees"));
        }
        let k4 = wavenumber(lambda4);
        let k1 = Vec3::new(0.0, 0.0, k4 * tilt.cos());
        let k3 = k4 * Vec3::new(tilt.sin(), 0.0, tilt.cos());
        Ok(Self { k1, k2: k1, k3, lambda4, tilt })
    }

    /// Counter-propagating `k1`, `k2` along z; emission is phase matched along `-k3`.
    pub fn counter_propagating(lambda: f64, k3_direction: Vec3) -> Result<Self> {
        let k = Self::beam(lambda, Vec3::z());
        Self::new(k, -k, Self::beam(lambda, k3_direction), lambda)
    }

    pub fn k4(&self) -> f64 {
        wavenumber(self.lambda4)
    }

    /// `k1 + k2 - k3`, the phase written into the ensemble.
    pub fn written_phase(&self) -> Vec3 {
        self.k1 + self.k2 - self.k3
    }

    /// `2(k1 + k2) - k3`, the phase of the doubly excited channel.
    pub fn double_channel_phase(&self) -> Vec3 {
        2.0 * (self.k1 + self.k2) - self.k3
    }

    pub fn with_k1_k2_swapped(&self) -> Self {
        Self { k1: self.k2, k2: self.k1, ..*self }
    }

    /// True when the doubly excited channel is itself phase matched in some direction.
    pub fn double_channel_matched(&self) -> bool {
        let q = self.double_channel_phase().norm();
        (q - self.k4()).abs() <= 1e-9 * self.k4()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakDirection {
    pub direction: Vec3,
    /// `| |k1 + k2 - k3| - k4 |`, rad/m.
    pub mismatch: f64,
}

pub fn expected_peak_direction(geometry: &EmissionGeometry) -> Result<PeakDirection> {
    let q = geometry.written_phase();
    if q.norm() <= 1e-12 * geometry.k4() {
        return Err(Error::DegenerateGeometry);
    }
    Ok(PeakDirection {
        direction: q.normalize(),
        mismatch: (q.norm() - geometry.k4()).abs(),
    })
}

/// Polar grid about `pole`: `n_theta` polar angles spanning `[0, theta_max]`
/// and `n_azimuth` azimuths spanning `[0, 2 pi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularGrid {
    pub pole: Vec3,
    pub theta_max: f64,
    pub n_theta: usize,
    pub n_azimuth: usize,
}

impl AngularGrid {
    pub fn around(pole: Vec3, theta_max: f64, n_theta: usize, n_azimuth: usize) -> Result<Self> {
        if pole.norm() == 0.0 {
            return Err(Error::invalid("pole", "must be nonzero"));
        }
        if !(theta_max > 0.0 && theta_max <= PI) {
            return Err(Error::invalid("theta_max", "must lie in (0, pi]"));
        }
        if n_theta < 2 || n_azimuth < 4 {
            return Err(Error::invalid("grid", "need n_theta >= 2 and n_azimuth >= 4"));
        }
        Ok(Self { pole: pole.normalize(), theta_max, n_theta, n_azimuth })
    }

    pub fn full_sphere(n_theta: usize, n_azimuth: usize) -> Result<Self> {
        Self::around(Vec3::z(), PI, n_theta, n_azimuth)
    }

    pub fn theta_step(&self) -> f64 {
        self.theta_max / (self.n_theta - 1) as f64
    }

    pub fn azimuth_step(&self) -> f64 {
        2.0 * PI / self.n_azimuth as f64
    }

    pub fn theta(&self, i: usize) -> f64 {
        self.theta_step() * i as f64
    }

    pub fn azimuth(&self, j: usize) -> f64 {
        self.azimuth_step() * j as f64
    }

    /// Orthonormal `(e1, e2)` spanning the plane normal to the pole; for a
    /// z pole this is `(x, y)`, so grid angles coincide with lab spherical angles.
    pub fn frame(&self) -> (Vec3, Vec3) {
        let p = self.pole;
        let helper = if p.cross(&Vec3::y()).norm() > 1e-6 { Vec3::y() } else { Vec3::z() };
        let e1 = helper.cross(&p).normalize();
        (e1, p.cross(&e1))
    }

    pub fn direction(&self, i: usize, j: usize) -> Vec3 {
        let (e1, e2) = self.frame();
        let (st, ct) = self.theta(i).sin_cos();
        let (sp, cp) = self.azimuth(j).sin_cos();
        ct * self.pole + st * (cp * e1 + sp * e2)
    }

    /// Grid coordinates `(theta, azimuth)` of a direction.
    pub fn coordinates(&self, direction: &Vec3) -> (f64, f64) {
        let d = direction.normalize();
        let (e1, e2) = self.frame();
        let theta = d.dot(&self.pole).clamp(-1.0, 1.0).acos();
        let az = d.dot(&e2).atan2(d.dot(&e1)).rem_euclid(2.0 * PI);
        (theta, az)
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_azimuth
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Solid-angle weight of node `i` (trapezoid in theta).
    pub fn weight(&self, i: usize) -> f64 {
        let end = if i == 0 || i + 1 == self.n_theta { 0.5 } else { 1.0 };
        end * self.theta(i).sin() * self.theta_step() * self.azimuth_step()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularPattern {
    pub grid: AngularGrid,
    pub atoms: usize,
    /// Row-major over `(theta, azimuth)`.
    pub values: Vec<f64>,
}

impl AngularPattern {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.n_azimuth + j]
    }

    /// Bilinear interpolation; `None` outside the grid cap.
    pub fn value_at(&self, direction: &Vec3) -> Option<f64> {
        let g = &self.grid;
        let (theta, az) = g.coordinates(direction);
        if theta > g.theta_max + 1e-12 {
            return None;
        }
        let x = (theta / g.theta_step()).min((g.n_theta - 1) as f64);
        let i0 = (x.floor() as usize).min(g.n_theta - 2);
        let fx = x - i0 as f64;
        let y = az / g.azimuth_step();
        let j0 = (y.floor() as usize) % g.n_azimuth;
        let j1 = (j0 + 1) % g.n_azimuth;
        let fy = y - y.floor();
        let v = |i, j| self.value(i, j);
        Some(
            (1.0 - fx) * ((1.0 - fy) * v(i0, j0) + fy * v(i0, j1))
                + fx * ((1.0 - fy) * v(i0 + 1, j0) + fy * v(i0 + 1, j1)),
        )
    }

    pub fn argmax(&self) -> (usize, usize) {
        let k = self
            .values
            .iter()
            .enumerate()
            .fold(0, |best, (k, v)| if *v > self.values[best] { k } else { best });
        (k / self.grid.n_azimuth, k % self.grid.n_azimuth)
    }

    /// Solid-angle weighted mean over the grid cap.
    pub fn mean(&self) -> f64 {
        let (mut sum, mut area) = (0.0, 0.0);
        for i in 0..self.grid.n_theta {
            let w = self.grid.weight(i);
            for j in 0..self.grid.n_azimuth {
                sum += w * self.value(i, j);
                area += w;
            }
        }
        sum / area
    }

    /// Rows of `(theta, azimuth, value)`.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.grid.n_theta).flat_map(move |i| {
            (0..self.grid.n_azimuth).map(move |j| (self.grid.theta(i), self.grid.azimuth(j), self.value(i, j)))
        })
    }
}

/// `(1/N) |sum_j exp(i (k4 d - q) . r_j)|^2`.
pub fn array_factor(positions: &[Vec3], q: &Vec3, k4: f64, direction: &Vec3) -> f64 {
    if positions.is_empty() {
        return 0.0;
    }
    let kv = k4 * direction.normalize() - q;
    let sum: Complex64 = positions
        .iter()
        .map(|r| {
            let (s, c) = kv.dot(r).sin_cos();
            Complex64::new(c, s)
        })
        .sum();
    sum.norm_sqr() / positions.len() as f64
}

fn phase_pattern(positions: &[Vec3], q: Vec3, k4: f64, grid: &AngularGrid) -> AngularPattern {
    let values = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let d = grid.direction(k / grid.n_azimuth, k % grid.n_azimuth);
            array_factor(positions, &q, k4, &d)
        })
        .collect();
    AngularPattern { grid: *grid, atoms: positions.len(), values }
}

/// Pattern for atoms that moved from `written` to `emitting` between the
/// preparation pulses and the read-out.
fn displaced_pattern(
    written: &[Vec3],
    emitting: &[Vec3],
    q: Vec3,
    k4: f64,
    grid: &AngularGrid,
) -> Vec<f64> {
    let n = written.len() as f64;
    (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let d = k4 * grid.direction(k / grid.n_azimuth, k % grid.n_azimuth);
            let sum: Complex64 = written
                .iter()
                .zip(emitting)
                .map(|(w, e)| {
                    let (s, c) = (d.dot(e) - q.dot(w)).sin_cos();
                    Complex64::new(c, s)
                })
                .sum();
            sum.norm_sqr() / n
        })
        .collect()
}

pub fn single_photon_pattern(
    cloud: &AtomCloud,
    geometry: &EmissionGeometry,
    grid: &AngularGrid,
) -> AngularPattern {
    phase_pattern(&cloud.positions, geometry.written_phase(), geometry.k4(), grid)
}

pub fn double_excitation_pattern(
    cloud: &AtomCloud,
    geometry: &EmissionGeometry,
    grid: &AngularGrid,
) -> AngularPattern {
    phase_pattern(&cloud.positions, geometry.double_channel_phase(), geometry.k4(), grid)
}

/// Exact solid-angle average of the single-photon pattern,
/// `(1/N) sum_jk cos(q . r_jk) sinc(k4 |r_jk|)`.
pub fn sphere_average(cloud: &AtomCloud, geometry: &EmissionGeometry) -> f64 {
    let q = geometry.written_phase();
    let k4 = geometry.k4();
    let n = cloud.len();
    let mut sum = n as f64;
    for (_, _, rj, rk) in cloud.pairs() {
        let r = rj - rk;
        let x = k4 * r.norm();
        let sinc = if x == 0.0 { 1.0 } else { x.sin() / x };
        sum += 2.0 * q.dot(&r).cos() * sinc;
    }
    sum / n as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternMetrics {
    pub peak_direction: Vec3,
    pub peak_value: f64,
    /// FWHM along two orthogonal great-circle cuts, rad.
    pub fwhm: [f64; 2],
    /// Solid-angle weighted mean beyond `3 x FWHM` from the peak, if the grid reaches that far.
    pub background: Option<f64>,
    pub peak_to_background: Option<f64>,
}

impl PatternMetrics {
    pub fn mean_fwhm(&self) -> f64 {
        0.5 * (self.fwhm[0] + self.fwhm[1])
    }
}

/// Angular distance from the peak to the half-maximum crossing along `tangent`.
fn half_width(pattern: &AngularPattern, peak: &Vec3, tangent: &Vec3, half: f64, step: f64) -> Result<f64> {
    let mut prev = (0.0, pattern.value_at(peak).ok_or(Error::LobeNotContained)?);
    let mut alpha = 0.0;
    loop {
        alpha += step;
        if alpha > PI {
            return Err(Error::LobeNotContained);
        }
        let d = alpha.cos() * peak + alpha.sin() * tangent;
        let v = pattern.value_at(&d).ok_or(Error::LobeNotContained)?;
        if v <= half {
            let f = (prev.1 - half) / (prev.1 - v);
            return Ok(prev.0 + f * (alpha - prev.0));
        }
        prev = (alpha, v);
    }
}

pub fn pattern_metrics(pattern: &AngularPattern) -> Result<PatternMetrics> {
    let g = &pattern.grid;
    let (ip, jp) = pattern.argmax();
    let peak = g.direction(ip, jp);
    let peak_value = pattern.value(ip, jp);
    let half = 0.5 * peak_value;

    // arc spacing of the grid around the peak
    let spacing = g.theta_step().max(g.theta(ip).sin() * g.azimuth_step());
    let (e1, _) = g.frame();
    let mut t1 = e1 - e1.dot(&peak) * peak;
    if t1.norm() < 1e-6 {
        t1 = g.pole - g.pole.dot(&peak) * peak;
    }
    let t1 = t1.normalize();
    let t2 = peak.cross(&t1);
    let step = 0.25 * g.theta_step();
    let mut fwhm = [0.0; 2];
    for (f, t) in fwhm.iter_mut().zip([t1, t2]) {
        *f = half_width(pattern, &peak, &t, half, step)? + half_width(pattern, &peak, &(-t), half, step)?;
    }
    let width = 0.5 * (fwhm[0] + fwhm[1]);
    let points = width / spacing;
    if points < MIN_POINTS_ACROSS_LOBE as f64 {
        return Err(Error::UnderResolved { points, required: MIN_POINTS_ACROSS_LOBE });
    }

    let (mut sum, mut area) = (0.0, 0.0);
    for i in 0..g.n_theta {
        let w = g.weight(i);
        for j in 0..g.n_azimuth {
            if g.direction(i, j).angle(&peak) > 3.0 * width {
                sum += w * pattern.value(i, j);
                area += w;
            }
        }
    }
    let background = (area > 0.0).then(|| sum / area);
    Ok(PatternMetrics {
        peak_direction: peak,
        peak_value,
        fwhm,
        background,
        peak_to_background: background.map(|b| peak_value / b),
    })
}

/// Locates the lobe on a coarse full-sphere grid, then re-grids a cap around
/// it until the FWHM is resolved by `points_across` spacings and the cap
/// reaches `cap_in_fwhm` widths.
pub fn resolve_lobe(
    cloud: &AtomCloud,
    geometry: &EmissionGeometry,
    points_across: usize,
    cap_in_fwhm: f64,
) -> Result<(AngularPattern, PatternMetrics)> {
    let coarse = single_photon_pattern(cloud, geometry, &AngularGrid::full_sphere(91, 180)?);
    let (i, j) = coarse.argmax();
    let pole = coarse.grid.direction(i, j);
    let mut theta_max = 0.5_f64;
    let mut n_theta = 65;
    for _ in 0..12 {
        let grid = AngularGrid::around(pole, theta_max.min(PI), n_theta, 128)?;
        let pattern = single_photon_pattern(cloud, geometry, &grid);
        match pattern_metrics(&pattern) {
            Ok(m) => {
                let width = m.mean_fwhm();
                let wanted_cap = (cap_in_fwhm * width).min(PI);
                let wanted_points = ((wanted_cap / width) * points_across as f64).ceil() as usize + 1;
                if theta_max + 1e-12 >= wanted_cap && n_theta >= wanted_points {
                    return Ok((pattern, m));
                }
                theta_max = wanted_cap;
                n_theta = wanted_points.max(n_theta);
            }
            Err(Error::LobeNotContained) => theta_max *= 2.0,
            Err(Error::UnderResolved { .. }) => n_theta = 2 * n_theta - 1,
            Err(e) => return Err(e),
        }
    }
    Err(Error::UnderResolved { points: 0.0, required: points_across })
}

/// Mean pattern value over `samples` uniformly random directions outside a
/// cone of half-angle `exclusion` about `center`.
pub fn random_direction_background(
    cloud: &AtomCloud,
    geometry: &EmissionGeometry,
    center: &Vec3,
    exclusion: f64,
    samples: usize,
    rng: &mut Rng,
) -> f64 {
    let q = geometry.written_phase();
    let k4 = geometry.k4();
    let c = center.normalize();
    let mut sum = 0.0;
    let mut taken = 0;
    while taken < samples {
        let d = Vec3::from(UnitSphere.sample(rng));
        if d.angle(&c) <= exclusion {
            continue;
        }
        sum += array_factor(&cloud.positions, &q, k4, &d);
        taken += 1;
    }
    sum / samples.max(1) as f64
}

/// Displacement over the preparation sequence at the one-dimensional thermal
/// speed `sqrt(k_B T / m)`; returns `(dx, dx / lambda4)`.
pub fn motional_blur(temperature: f64, prep_time: f64, mass: f64, lambda4: f64) -> Result<(f64, f64)> {
    if !(temperature >= 0.0) || !(prep_time >= 0.0) {
        return Err(Error::invalid("temperature", "temperature and time must be >= 0"));
    }
    let dx = (BOLTZMANN * temperature / mass).sqrt() * prep_time;
    Ok((dx, dx / lambda4))
}

/// Pattern averaged over `trials` Gaussian displacements of every atom
/// (standard deviation `sigma` per axis) between writing and emission.
pub fn jittered_pattern(
    cloud: &AtomCloud,
    geometry: &EmissionGeometry,
    grid: &AngularGrid,
    sigma: f64,
    trials: usize,
    seed: u64,
) -> Result<AngularPattern> {
    if !(sigma >= 0.0) {
        return Err(Error::invalid("sigma", "must be >= 0"));
    }
    if sigma == 0.0 || trials == 0 {
        return Ok(single_photon_pattern(cloud, geometry, grid));
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::invalid("sigma", e.to_string()))?;
    let mut total = vec![0.0; grid.len()];
    for t in 0..trials {
        let mut rng = seeding::stream_rng(seed, t as u64);
        let moved: Vec<Vec3> = cloud
            .positions
            .iter()
            .map(|r| r + Vec3::new(normal.sample(&mut rng), normal.sample(&mut rng), normal.sample(&mut rng)))
            .collect();
        let p = displaced_pattern(&cloud.positions, &moved, geometry.written_phase(), geometry.k4(), grid);
        for (acc, v) in total.iter_mut().zip(&p) {
            *acc += v;
        }
    }
    total.iter_mut().for_each(|v| *v /= trials as f64);
    Ok(AngularPattern { grid: *grid, atoms: cloud.len(), values: total })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedAveragedMetrics {
    pub atoms: usize,
    pub diameter: f64,
    pub seeds: usize,
    pub per_seed: Vec<PatternMetrics>,
    pub mean_fwhm: f64,
    pub fwhm_stderr: f64,
    pub mean_peak_to_background: Option<f64>,
}

/// Lobe metrics for `seeds` independent clouds, in seed order.
pub fn seed_averaged_metrics(
    atoms: usize,
    diameter: f64,
    geometry: &EmissionGeometry,
    seeds: usize,
    master_seed: u64,
) -> Result<SeedAveragedMetrics> {
    let per_seed = (0..seeds)
        .into_par_iter()
        .map(|s| {
            let cloud = AtomCloud::sample(atoms, diameter, seeding::derive_seed(master_seed, s as u64))?;
            resolve_lobe(&cloud, geometry, 16, 4.0).map(|(_, m)| m)
        })
        .collect::<Result<Vec<_>>>()?;
    let widths: Vec<f64> = per_seed.iter().map(PatternMetrics::mean_fwhm).collect();
    let n = widths.len().max(1) as f64;
    let mean = widths.iter().sum::<f64>() / n;
    let var = widths.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let ratios: Vec<f64> = per_seed.iter().filter_map(|m| m.peak_to_background).collect();
    Ok(SeedAveragedMetrics {
        atoms,
        diameter,
        seeds,
        per_seed,
        mean_fwhm: mean,
        fwhm_stderr: (var / n).sqrt(),
        mean_peak_to_background: (ratios.len() == widths.len() && !ratios.is_empty())
            .then(|| ratios.iter().sum::<f64>() / ratios.len() as f64),
    })
}
