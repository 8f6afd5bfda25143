//! Browser demo: three interactive operations exported through wasm-bindgen.
//!
//! Each export wraps a plain Rust function of the same name with an `_impl`
//! suffix, which the native tests call directly.

use std::f64::consts::PI;

use blockade_sources::blockade::{
    build_hamiltonian, evolve, pi_pulse_time, CollectiveState, EvolveOptions, Method, PulseSpec, Transition,
};
use blockade_sources::constants::hz_to_angular;
use blockade_sources::ejection::{scan_fig2, TrapSetup};
use blockade_sources::emission::{array_factor, expected_peak_direction, EmissionGeometry};
use blockade_sources::ensemble::{mean_blockade_shift, AtomCloud, RydbergCoupling};
use blockade_sources::Vec3;
use wasm_bindgen::prelude::*;

/// Largest ensemble the in-browser integrator will evolve.
pub const MAX_DEMO_ATOMS: usize = 40;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// `pixels x pixels` map of the single-photon pattern over the tangent plane
/// at the phase-matched direction, row-major, in units of the N = 1 value.
pub fn emission_heatmap_impl(
    atoms: usize,
    diameter_um: f64,
    lambda_um: f64,
    tilt_deg: f64,
    half_angle_deg: f64,
    pixels: usize,
    seed: u64,
) -> Result<Vec<f64>, String> {
    if pixels < 2 {
        return Err("pixels must be >= 2".into());
    }
    let geometry = EmissionGeometry::tilted(lambda_um * 1e-6, tilt_deg.to_radians()).map_err(err)?;
    let cloud = AtomCloud::sample(atoms, diameter_um * 1e-6, seed).map_err(err)?;
    let peak = expected_peak_direction(&geometry).map_err(err)?.direction;
    let e1 = Vec3::y().cross(&peak).normalize();
    let e2 = peak.cross(&e1);
    let half = half_angle_deg.to_radians().tan();
    let q = geometry.written_phase();
    let mut out = Vec::with_capacity(pixels * pixels);
    for row in 0..pixels {
        let v = half * (1.0 - 2.0 * row as f64 / (pixels - 1) as f64);
        for col in 0..pixels {
            let u = half * (2.0 * col as f64 / (pixels - 1) as f64 - 1.0);
            out.push(array_factor(&cloud.positions, &q, geometry.k4(), &(peak + u * e1 + v * e2)));
        }
    }
    Ok(out)
}

/// `[t_us, P_zero, P_single, P_double]` at `points` times over two collective
/// pi-pulse durations, flattened.
pub fn excitation_curve_impl(
    atoms: usize,
    diameter_um: f64,
    rabi_mhz: f64,
    points: usize,
    seed: u64,
) -> Result<Vec<f64>, String> {
    if !(2..=MAX_DEMO_ATOMS).contains(&atoms) {
        return Err(format!("atoms must lie in 2..={MAX_DEMO_ATOMS}"));
    }
    if points < 2 {
        return Err("points must be >= 2".into());
    }
    let coupling = RydbergCoupling::rubidium_n50();
    let cloud = AtomCloud::sample(atoms, diameter_um * 1e-6, seed).map_err(err)?;
    let rabi = hz_to_angular(rabi_mhz * 1e6);
    let shift = mean_blockade_shift(&cloud, &coupling).map_err(err)?;
    let t_end = 2.0 * pi_pulse_time(atoms, rabi, shift).map_err(err)?;
    let k = 2.0 * PI / 0.78e-6 * Vec3::z();
    let pulse = PulseSpec::new(Transition::GroundToRydberg, rabi, k, t_end).map_err(err)?;
    let h = build_hamiltonian(&cloud, &coupling, &pulse).map_err(err)?;
    let options = EvolveOptions { method: Method::Taylor, ..EvolveOptions::default() };
    let dt = t_end / (points - 1) as f64;
    let mut state = CollectiveState::ground(atoms);
    let mut out = Vec::with_capacity(4 * points);
    for i in 0..points {
        if i > 0 {
            state = evolve(&state, &h, dt, &options).map_err(err)?.state;
        }
        out.extend([i as f64 * dt * 1e6, state.p_zero(), state.p_single(), state.p_double()]);
    }
    Ok(out)
}

/// `[x_um, U_a/k_B (uK), U_b/k_B (uK)]` rows along the push axis, flattened,
/// for the published trap with the given eject beam.
pub fn eject_profile_impl(
    eject_power_uw: f64,
    detuning_ghz: f64,
    offset_um: f64,
    points: usize,
) -> Result<Vec<f64>, String> {
    let setup = TrapSetup {
        eject_power: eject_power_uw * 1e-6,
        eject_detuning_b: hz_to_angular(detuning_ghz * 1e9),
        eject_offset: Vec3::new(-offset_um * 1e-6, 0.0, 0.0),
        ..TrapSetup::fig2()
    };
    let field = setup.field().map_err(err)?;
    Ok(scan_fig2(&field, Vec3::zeros(), Vec3::x(), -10e-6, 10e-6, points)
        .iter()
        .flat_map(|r| [r.x * 1e6, r.u_a, r.u_b])
        .collect())
}

#[wasm_bindgen]
pub fn emission_heatmap(
    atoms: usize,
    diameter_um: f64,
    lambda_um: f64,
    tilt_deg: f64,
    half_angle_deg: f64,
    pixels: usize,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    emission_heatmap_impl(atoms, diameter_um, lambda_um, tilt_deg, half_angle_deg, pixels, u64::from(seed))
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn excitation_curve(atoms: usize, diameter_um: f64, rabi_mhz: f64, points: usize, seed: u32) -> Result<Vec<f64>, JsError> {
    excitation_curve_impl(atoms, diameter_um, rabi_mhz, points, u64::from(seed)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn eject_profile(eject_power_uw: f64, detuning_ghz: f64, offset_um: f64, points: usize) -> Result<Vec<f64>, JsError> {
    eject_profile_impl(eject_power_uw, detuning_ghz, offset_um, points).map_err(|e| JsError::new(&e))
}
