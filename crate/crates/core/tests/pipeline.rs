//! The phase written by the preparation pulses fixes the emission direction.

use std::f64::consts::PI;

use blockade_sources::blockade::{run_preparation_sequence, EvolveOptions, PulseSpec, Transition};
use blockade_sources::emission::{expected_peak_direction, EmissionGeometry};
use blockade_sources::ensemble::{AtomCloud, RydbergCoupling};
use blockade_sources::Vec3;
use num_complex::Complex64;

/// `|sum_j c_j exp(-i k4 d . r_j)|^2 / sum_j |c_j|^2`: collective emission
/// from the singly excited amplitudes into direction `d`.
fn emission_from_state(amplitudes: &[Complex64], positions: &[Vec3], k4: f64, d: &Vec3) -> f64 {
    let sum: Complex64 = amplitudes
        .iter()
        .zip(positions)
        .map(|(c, r)| c * Complex64::from_polar(1.0, -k4 * d.dot(r)))
        .sum();
    sum.norm_sqr() / amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>()
}

#[test]
fn prepared_state_radiates_into_the_phase_matched_direction() {
    let n = 10;
    let cloud = AtomCloud::sample(n, 5e-6, 77).unwrap();
    let coupling = RydbergCoupling::rubidium_n50();
    let geometry = EmissionGeometry::tilted(LAMBDA4, 12f64.to_radians()).unwrap();
    let rabi = 2.0 * PI * 1e6;
    let excite = PulseSpec::new(Transition::TwoPhoton, rabi, geometry.k1 + geometry.k2, 1e-9).unwrap();
    let shift = blockade_sources::ensemble::mean_blockade_shift(&cloud, &coupling).unwrap();
    let t_pi = blockade_sources::blockade::pi_pulse_time(n, rabi, shift).unwrap();
    let excite = PulseSpec { duration: t_pi, ..excite };
    let transfer = PulseSpec::new(Transition::RydbergToIntermediate, rabi, geometry.k3, 1e-9)
        .unwrap()
        .starting_at(t_pi);
    let (state, summary) =
        run_preparation_sequence(&cloud, &coupling, &[excite, transfer], &EvolveOptions::default()).unwrap();
    assert!(summary.p_single > 0.99);

    let peak = expected_peak_direction(&geometry).unwrap().direction;
    let at_peak = emission_from_state(state.singles(), &cloud.positions, geometry.k4(), &peak);
    assert!((at_peak / n as f64 - 1.0).abs() < 1e-3, "{at_peak}");
    // and not along the excitation axis
    let off = emission_from_state(state.singles(), &cloud.positions, geometry.k4(), &Vec3::z());
    assert!(off < 0.5 * n as f64, "{off}");
}

const LAMBDA4: f64 = 0.78e-6;
