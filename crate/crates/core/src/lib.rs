//! Simulations of dipole-blockade protocols in mesoscopic Rydberg ensembles.
//!
//! The crate covers three connected pieces of physics:
//!
//! * [`ensemble`] and [`blockade`]: collective excitation of an `N` atom
//!   cloud into the singly excited symmetric state, both through the reduced
//!   closed-form model and through full Schrödinger dynamics in the basis
//!   truncated at double excitations.
//! * [`optics`] and [`ejection`]: state-selective optical dipole forces that
//!   sweep atoms in one hyperfine ground state out of a far-off-resonance trap.
//! * [`emission`]: the far-field angular pattern of the single photon emitted
//!   by a phased ensemble.
//!
//! All quantities are SI; frequencies are angular (rad/s).

pub mod blockade;
pub mod constants;
pub mod ejection;
pub mod emission;
pub mod ensemble;
mod error;
pub mod optics;
pub mod seeding;
pub mod species;

pub use error::{Error, Result};

/// Cartesian 3-vector used for positions, wavevectors and forces.
pub type Vec3 = nalgebra::Vector3<f64>;
