//! Monte Carlo scan of blockade imperfection versus atom number.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::evolve::{evolve, EvolveOptions};
use super::hamiltonian::build_hamiltonian;
use super::pulse::{PulseSpec, Transition};
use super::state::CollectiveState;
use super::{l_factor, p_double_estimate, pi_pulse_time};
use crate::ensemble::{mean_blockade_shift, AtomCloud, RydbergCoupling};
use crate::{seeding, Result, Vec3};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig1Params {
    /// Cloud diameter, m.
    pub diameter: f64,
    pub coupling: RydbergCoupling,
    /// |Omega|, rad/s.
    pub rabi: f64,
    /// Excitation wavevector, rad/m. Only sets the phase pattern.
    pub wavevector: Vec3,
    pub trials: usize,
    pub master_seed: u64,
    /// Also integrate the full truncated dynamics for N up to this cap.
    pub integrator_cap: Option<usize>,
    pub evolve: EvolveOptions,
}

/// Mean and standard error over trials.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    /// Sequential reduction in slice order.
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        if samples.is_empty() {
            return Self { mean: f64::NAN, stderr: f64::NAN };
        }
        let mean = samples.iter().sum::<f64>() / n;
        if samples.len() < 2 {
            return Self { mean, stderr: 0.0 };
        }
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self { mean, stderr: (var / n).sqrt() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorColumns {
    pub p_zero: Estimate,
    pub p_single: Estimate,
    pub p_double: Estimate,
    /// Per-trial `P_double(full) / P_double(estimate)`.
    pub double_ratio: Estimate,
    pub max_double_ratio: f64,
    pub min_double_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig1Row {
    pub atoms: usize,
    pub trials: usize,
    pub p_zero: Estimate,
    pub p_double: Estimate,
    /// Harmonic-mean shift averaged over trials, rad/s; NaN for one atom.
    pub mean_shift: Estimate,
    pub integrator: Option<IntegratorColumns>,
}

impl Fig1Row {
    pub fn imperfection(&self) -> f64 {
        self.p_zero.mean + self.p_double.mean
    }
}

struct Trial {
    mean_shift: f64,
    p_zero: f64,
    p_double: f64,
    full: Option<(f64, f64, f64)>,
}

fn run_trial(atoms: usize, trial: usize, params: &Fig1Params) -> Result<Trial> {
    let seed = seeding::derive_seed(params.master_seed, atoms as u64);
    let mut rng = seeding::stream_rng(seed, trial as u64);
    let cloud = AtomCloud::sample_with(atoms, params.diameter, seed, &mut rng)?;
    let shift = if atoms >= 2 {
        mean_blockade_shift(&cloud, &params.coupling)?
    } else {
        f64::NAN
    };
    let (p_zero, p_double) = if atoms >= 2 {
        let l = l_factor(atoms, params.rabi, shift)?;
        (1.0 - 1.0 / l, p_double_estimate(atoms, params.rabi, shift)?)
    } else {
        (0.0, 0.0)
    };
    let full = match params.integrator_cap {
        Some(cap) if atoms <= cap => {
            let t = pi_pulse_time(atoms, params.rabi, if atoms >= 2 { shift } else { 1.0 })?;
            let pulse = PulseSpec::new(Transition::GroundToRydberg, params.rabi, params.wavevector, t)?;
            let h = build_hamiltonian(&cloud, &params.coupling, &pulse)?;
            let s = evolve(&CollectiveState::ground(atoms), &h, t, &params.evolve)?.state;
            Some((s.p_zero(), s.p_single(), s.p_double()))
        }
        _ => None,
    };
    Ok(Trial { mean_shift: shift, p_zero, p_double, full })
}

/// For each N: sample `trials` clouds, evaluate the closed-form `P_zero = 1 - 1/l`
/// and the leakage estimate, optionally alongside the full dynamics.
///
/// Trials run in parallel on per-trial random streams and are reduced in
/// trial order, so the table is bit-reproducible for a given seed.
pub fn fig1_scan(atom_counts: &[usize], params: &Fig1Params) -> Result<Vec<Fig1Row>> {
    if params.trials == 0 {
        return Err(crate::Error::invalid("trials", "must be >= 1"));
    }
    atom_counts
        .iter()
        .map(|&atoms| {
            let trials: Vec<Trial> = (0..params.trials)
                .into_par_iter()
                .map(|t| run_trial(atoms, t, params))
                .collect::<Result<_>>()?;
            let column = |f: &dyn Fn(&Trial) -> f64| {
                Estimate::from_samples(&trials.iter().map(f).collect::<Vec<_>>())
            };
            let integrator = if trials.iter().all(|t| t.full.is_some()) && !trials.is_empty() {
                let full = |i: usize| {
                    Estimate::from_samples(
                        &trials
                            .iter()
                            .map(|t| {
                                let f = t.full.unwrap();
                                [f.0, f.1, f.2][i]
                            })
                            .collect::<Vec<_>>(),
                    )
                };
                let ratios: Vec<f64> = trials
                    .iter()
                    .filter(|t| t.p_double > 0.0)
                    .map(|t| t.full.unwrap().2 / t.p_double)
                    .collect();
                Some(IntegratorColumns {
                    p_zero: full(0),
                    p_single: full(1),
                    p_double: full(2),
                    double_ratio: Estimate::from_samples(&ratios),
                    max_double_ratio: ratios.iter().copied().fold(f64::NAN, f64::max),
                    min_double_ratio: ratios.iter().copied().fold(f64::NAN, f64::min),
                })
            } else {
                None
            };
            Ok(Fig1Row {
                atoms,
                trials: params.trials,
                p_zero: column(&|t| t.p_zero),
                p_double: column(&|t| t.p_double),
                mean_shift: column(&|t| t.mean_shift),
                integrator,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = slope x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared: if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 },
    }
}
