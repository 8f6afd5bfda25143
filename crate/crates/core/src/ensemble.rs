//! Atom clouds and the dipole-dipole shifts between Rydberg pairs.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::constants::{coulomb_energy_scale, hz_to_angular, BOHR_RADIUS, HBAR};
use crate::seeding;
use crate::species::AtomicSpecies;
use crate::{Error, Result, Vec3};

/// Closest approach allowed between two sampled atoms, m.
pub const MIN_SEPARATION: f64 = 10e-9;

/// Total rejection-loop budget for [`AtomCloud::sample`].
pub const MAX_SAMPLING_ATTEMPTS: u64 = 1_000_000;

/// One known pair shift used to fix the n^6 prefactor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationAnchor {
    pub principal_n: u32,
    /// m
    pub separation: f64,
    /// Magnitude of the pair shift, rad/s.
    pub shift: f64,
}

impl CalibrationAnchor {
    /// n = 50 pair at 5 um shifted by 2 pi x 100 MHz.
    pub fn rubidium_n50() -> Self {
        Self {
            principal_n: 50,
            separation: 5e-6,
            shift: hz_to_angular(100e6),
        }
    }
}

/// Dipole-dipole coupling for parallel-aligned Rydberg dipoles,
/// `Delta = -f(n) e^2 a0^2 / (4 pi eps0 hbar r^3)` with `f(n) = f_coefficient n^6`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RydbergCoupling {
    pub principal_n: u32,
    pub f_coefficient: f64,
    pub anchor: CalibrationAnchor,
}

impl RydbergCoupling {
    /// Fixes `f_coefficient` so that the anchor pair reproduces the anchor shift,
    /// then evaluates at `principal_n`.
    pub fn calibrated(principal_n: u32, anchor: CalibrationAnchor) -> Result<Self> {
        if principal_n == 0 || anchor.principal_n == 0 {
            return Err(Error::invalid("principal_n", "must be >= 1"));
        }
        if !(anchor.separation > 0.0 && anchor.shift > 0.0) {
            return Err(Error::invalid(
                "calibration_anchor",
                "separation and shift must be positive",
            ));
        }
        let f_anchor = anchor.shift * HBAR * anchor.separation.powi(3)
            / (coulomb_energy_scale() * BOHR_RADIUS * BOHR_RADIUS);
        let f_coefficient = f_anchor / f64::from(anchor.principal_n).powi(6);
        Ok(Self {
            principal_n,
            f_coefficient,
            anchor,
        })
    }

    pub fn rubidium_n50() -> Self {
        Self::calibrated(50, CalibrationAnchor::rubidium_n50()).expect("valid anchor")
    }

    /// Same `f_coefficient`, different Rydberg level.
    pub fn at_level(&self, principal_n: u32) -> Self {
        Self {
            principal_n,
            ..*self
        }
    }

    /// f(n), dimensionless.
    pub fn f_factor(&self) -> f64 {
        self.f_coefficient * f64::from(self.principal_n).powi(6)
    }

    /// `|Delta| r^3` in rad s^-1 m^3.
    pub fn c3(&self) -> f64 {
        self.f_factor() * coulomb_energy_scale() * BOHR_RADIUS * BOHR_RADIUS / HBAR
    }

    /// Signed shift of a pair at the given separation, rad/s.
    pub fn shift_at_separation(&self, separation: f64) -> Result<f64> {
        if !(separation > 0.0) {
            return Err(Error::ZeroSeparation);
        }
        Ok(-self.c3() / separation.powi(3))
    }

    /// Signed dipole-dipole shift of atoms at `rj` and `rk`, rad/s (negative).
    pub fn pair_shift(&self, rj: &Vec3, rk: &Vec3) -> Result<f64> {
        self.shift_at_separation((rj - rk).norm())
    }
}

/// Sampled atom positions inside a sphere centred at the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomCloud {
    pub positions: Vec<Vec3>,
    pub diameter: f64,
    pub master_seed: u64,
    pub species: AtomicSpecies,
}

impl AtomCloud {
    /// Draws `n` points i.i.d. uniform in the ball of the given diameter,
    /// redrawing any point closer than [`MIN_SEPARATION`] to an earlier one.
    pub fn sample(n: usize, diameter: f64, seed: u64) -> Result<Self> {
        let mut rng = seeding::master_rng(seed);
        Self::sample_with(n, diameter, seed, &mut rng)
    }

    pub fn sample_with(n: usize, diameter: f64, seed: u64, rng: &mut seeding::Rng) -> Result<Self> {
        if n == 0 {
            return Err(Error::TooFewAtoms { required: 1, got: 0 });
        }
        if !(diameter > 0.0 && diameter.is_finite()) {
            return Err(Error::invalid("diameter", format!("must be positive, got {diameter}")));
        }
        let radius = 0.5 * diameter;
        let min_sq = MIN_SEPARATION * MIN_SEPARATION;
        let mut positions: Vec<Vec3> = Vec::with_capacity(n);
        let mut attempts = 0u64;
        while positions.len() < n {
            if attempts >= MAX_SAMPLING_ATTEMPTS {
                return Err(Error::SamplingExhausted {
                    requested: n,
                    placed: positions.len(),
                    diameter,
                    attempts,
                });
            }
            attempts += 1;
            let u = Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            if u.norm_squared() > 1.0 {
                continue;
            }
            let p = u * radius;
            if positions.iter().all(|q| (p - q).norm_squared() >= min_sq) {
                positions.push(p);
            }
        }
        Ok(Self {
            positions,
            diameter,
            master_seed: seed,
            species: AtomicSpecies::default(),
        })
    }

    /// Wraps explicit positions, checking the cloud invariants.
    pub fn from_positions(positions: Vec<Vec3>, diameter: f64) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::TooFewAtoms { required: 1, got: 0 });
        }
        let radius = 0.5 * diameter;
        if let Some(p) = positions.iter().find(|p| p.norm() > radius * (1.0 + 1e-12)) {
            return Err(Error::invalid(
                "positions",
                format!("point at |r| = {:e} m lies outside the {diameter:e} m sphere", p.norm()),
            ));
        }
        for (j, a) in positions.iter().enumerate() {
            if positions[j + 1..].iter().any(|b| a == b) {
                return Err(Error::ZeroSeparation);
            }
        }
        Ok(Self {
            positions,
            diameter,
            master_seed: 0,
            species: AtomicSpecies::default(),
        })
    }

    pub fn with_species(mut self, species: AtomicSpecies) -> Self {
        self.species = species;
        self
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Rigidly shifted copy; the enclosing diameter grows to keep the invariant.
    pub fn translated(&self, offset: &Vec3) -> Self {
        let positions: Vec<Vec3> = self.positions.iter().map(|p| p + offset).collect();
        let extent = positions.iter().map(|p| p.norm()).fold(0.0, f64::max);
        Self {
            positions,
            diameter: self.diameter.max(2.0 * extent * (1.0 + 1e-12)),
            ..self.clone()
        }
    }

    /// Iterates `(j, k, r_j, r_k)` over pairs with `j < k` in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, &Vec3, &Vec3)> + '_ {
        let n = self.positions.len();
        (0..n).flat_map(move |j| {
            (j + 1..n).map(move |k| (j, k, &self.positions[j], &self.positions[k]))
        })
    }

    pub fn empirical_mean(&self) -> Vec3 {
        self.positions.iter().sum::<Vec3>() / self.positions.len() as f64
    }
}

/// Harmonic mean of `|Delta_jk|` over all pairs, rad/s.
pub fn mean_blockade_shift(cloud: &AtomCloud, coupling: &RydbergCoupling) -> Result<f64> {
    let n = cloud.len();
    if n < 2 {
        return Err(Error::TooFewAtoms { required: 2, got: n });
    }
    let mut inverse_sum = 0.0;
    for (_, _, rj, rk) in cloud.pairs() {
        inverse_sum += 1.0 / coupling.pair_shift(rj, rk)?.abs();
    }
    let pairs = (n * (n - 1) / 2) as f64;
    Ok(pairs / inverse_sum)
}

/// Smallest and largest `|Delta_jk|` over all pairs, rad/s.
pub fn pair_shift_range(cloud: &AtomCloud, coupling: &RydbergCoupling) -> Result<(f64, f64)> {
    let n = cloud.len();
    if n < 2 {
        return Err(Error::TooFewAtoms { required: 2, got: n });
    }
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for (_, _, rj, rk) in cloud.pairs() {
        let s = coupling.pair_shift(rj, rk)?.abs();
        lo = lo.min(s);
        hi = hi.max(s);
    }
    Ok((lo, hi))
}
