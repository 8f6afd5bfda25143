//! Time evolution `i d/dt psi = (H / hbar) psi` for piecewise-constant pulses.

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::hamiltonian::Hamiltonian;
use super::state::CollectiveState;
use crate::{Error, Result};

/// Largest basis handled by the spectral propagator under [`Method::Auto`].
pub const SPECTRAL_DIM_LIMIT: usize = 800;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// Spectral below [`SPECTRAL_DIM_LIMIT`], Taylor above.
    Auto,
    /// Dense Hermitian eigendecomposition, `psi(t) = V e^{-i L t} V^+ psi(0)`.
    Spectral,
    /// Adaptive-order Taylor series stepping on the sparse operator.
    Taylor,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub method: Method,
    /// Local truncation tolerance of a Taylor step, relative to the state norm.
    pub tolerance: f64,
    /// Largest accepted `| |psi(t)|^2 - |psi(0)|^2 |`.
    pub norm_tolerance: f64,
    pub max_steps: u64,
    /// Allowed `|Omega| / min |Delta_jk|` before the double-excitation
    /// truncation is considered invalid.
    pub truncation_limit: f64,
    pub allow_truncation_breakdown: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            tolerance: 1e-14,
            norm_tolerance: 1e-9,
            max_steps: 20_000_000,
            truncation_limit: 0.3,
            allow_truncation_breakdown: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolveReport {
    pub method: Method,
    pub steps: u64,
    pub matvecs: u64,
    /// `|psi(t)|^2 - |psi(0)|^2`; never corrected away.
    pub norm_drift: f64,
}

#[derive(Clone, Debug)]
pub struct Evolution {
    pub state: CollectiveState,
    pub report: EvolveReport,
}

pub fn check_truncation(hamiltonian: &Hamiltonian, options: &EvolveOptions) -> Result<()> {
    let ratio = hamiltonian.truncation_ratio();
    if !options.allow_truncation_breakdown && ratio > options.truncation_limit {
        return Err(Error::TruncationInvalid {
            ratio,
            limit: options.truncation_limit,
        });
    }
    Ok(())
}

pub fn evolve(
    state: &CollectiveState,
    hamiltonian: &Hamiltonian,
    duration: f64,
    options: &EvolveOptions,
) -> Result<Evolution> {
    if state.basis() != hamiltonian.basis() {
        return Err(Error::invalid(
            "state",
            format!(
                "basis of {} atoms does not match Hamiltonian for {}",
                state.atoms(),
                hamiltonian.basis().atoms()
            ),
        ));
    }
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::invalid("duration", format!("must be >= 0, got {duration}")));
    }
    check_truncation(hamiltonian, options)?;

    let norm0 = state.norm_sqr();
    let method = match options.method {
        Method::Auto if hamiltonian.dim() <= SPECTRAL_DIM_LIMIT => Method::Spectral,
        Method::Auto => Method::Taylor,
        m => m,
    };
    let mut out = state.clone();
    let (steps, matvecs) = match method {
        Method::Spectral => {
            spectral(out.amplitudes_mut(), hamiltonian, duration);
            (1, 0)
        }
        _ => taylor(out.amplitudes_mut(), hamiltonian, duration, options)?,
    };
    let norm_drift = out.norm_sqr() - norm0;
    if norm_drift.abs() > options.norm_tolerance {
        return Err(Error::NormDrift {
            drift: norm_drift,
            tolerance: options.norm_tolerance,
        });
    }
    Ok(Evolution {
        state: out,
        report: EvolveReport {
            method,
            steps,
            matvecs,
            norm_drift,
        },
    })
}

fn spectral(psi: &mut [Complex64], hamiltonian: &Hamiltonian, t: f64) {
    if t == 0.0 || hamiltonian.nnz() == 0 {
        return;
    }
    let eigen = SymmetricEigen::new(hamiltonian.to_dense());
    let v = &eigen.eigenvectors;
    let psi0 = DVector::from_column_slice(psi);
    let mut coeffs = v.adjoint() * psi0;
    for (c, &lambda) in coeffs.iter_mut().zip(eigen.eigenvalues.iter()) {
        *c *= Complex64::from_polar(1.0, -lambda * t);
    }
    let result = v * coeffs;
    psi.copy_from_slice(result.as_slice());
}

/// Largest `|H| h` per step; keeps the alternating series well conditioned.
const STEP_PHASE: f64 = 2.0;
const MAX_ORDER: usize = 40;

fn taylor(
    psi: &mut [Complex64],
    hamiltonian: &Hamiltonian,
    duration: f64,
    options: &EvolveOptions,
) -> Result<(u64, u64)> {
    let bound = hamiltonian.norm_inf();
    if duration == 0.0 || bound == 0.0 {
        return Ok((0, 0));
    }
    let dim = psi.len();
    let mut term = vec![Complex64::new(0.0, 0.0); dim];
    let mut next = vec![Complex64::new(0.0, 0.0); dim];
    let mut sum = vec![Complex64::new(0.0, 0.0); dim];
    let mut t = 0.0;
    let mut h = (STEP_PHASE / bound).min(duration);
    let min_step = duration * 1e-14;
    let (mut steps, mut matvecs) = (0u64, 0u64);

    while t < duration {
        if steps >= options.max_steps || h < min_step {
            return Err(Error::StepUnderflow {
                time: t,
                duration,
                step: h,
                steps,
                norm: psi.iter().map(|c| c.norm_sqr()).sum(),
            });
        }
        let step = h.min(duration - t);
        let scale: f64 = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        term.copy_from_slice(psi);
        sum.copy_from_slice(psi);
        let mut converged = false;
        for order in 1..=MAX_ORDER {
            hamiltonian.apply(&term, &mut next);
            matvecs += 1;
            // (-i h / order) H term
            let factor = Complex64::new(0.0, -step / order as f64);
            let mut size = 0.0;
            for (tm, nx) in term.iter_mut().zip(&next) {
                *tm = factor * nx;
                size += tm.norm_sqr();
            }
            for (s, tm) in sum.iter_mut().zip(&term) {
                *s += tm;
            }
            if size.sqrt() <= options.tolerance * scale {
                converged = true;
                break;
            }
        }
        if !converged {
            h *= 0.5;
            continue;
        }
        psi.copy_from_slice(&sum);
        t += step;
        steps += 1;
    }
    Ok((steps, matvecs))
}
