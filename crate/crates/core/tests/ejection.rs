use blockade_sources::ejection::{
    characteristic_eject_time, mean_thermal_speed, sample_thermal_initial, simulate_ensemble, summarize,
    EjectConfig, TrapSetup,
};
use blockade_sources::optics::GroundState;
use blockade_sources::Vec3;

#[test]
fn characteristic_time_tracks_zero_temperature_sweep_time() {
    let setup = TrapSetup::fig2();
    let field = setup.field().unwrap();
    let a = field.acceleration(GroundState::B, &Vec3::zeros()).x;
    let t1 = characteristic_eject_time(a, setup.fort_waist).unwrap();
    let config = EjectConfig { temperature: 0.0, ..EjectConfig::for_setup(&setup) };
    let ics = sample_thermal_initial(0.0, setup.species.mass, 2e-6, Vec3::zeros(), 60, 21).unwrap();
    let runs = simulate_ensemble(&ics, &field, GroundState::B, &config, 21).unwrap();
    let s = summarize(&runs);
    assert_eq!(s.escape_fraction, 1.0);
    let median = s.median_escape_time.unwrap();
    assert!((median / t1 - 1.0).abs() < 0.3, "median {median:e}, t1 {t1:e}");
}

#[test]
fn sampled_photon_counts_match_expectation() {
    let setup = TrapSetup::fig2();
    let field = setup.field().unwrap();
    let config = EjectConfig { include_recoil_kicks: true, ..EjectConfig::for_setup(&setup) };
    let ics = sample_thermal_initial(30e-6, setup.species.mass, 2e-6, Vec3::zeros(), 200, 4).unwrap();
    let runs = simulate_ensemble(&ics, &field, GroundState::B, &config, 4).unwrap();
    let n = runs.len() as f64;
    let expected = runs.iter().map(|r| r.photons_expected).sum::<f64>() / n;
    let sampled = runs.iter().map(|r| r.photons_sampled.unwrap() as f64).sum::<f64>() / n;
    // Poisson: the variance of each count equals its mean
    let sigma = (expected / n).sqrt();
    assert!((sampled - expected).abs() < 3.0 * sigma, "{sampled} vs {expected} +- {sigma}");
}

#[test]
fn state_a_stays_trapped_at_30_microkelvin() {
    let setup = TrapSetup::fig2();
    let field = setup.field().unwrap();
    let config = EjectConfig { temperature: 30e-6, ..EjectConfig::for_setup(&setup) };
    let ics = sample_thermal_initial(30e-6, setup.species.mass, 2e-6, Vec3::zeros(), 100, 8).unwrap();
    let runs = simulate_ensemble(&ics, &field, GroundState::A, &config, 8).unwrap();
    assert!(summarize(&runs).escape_fraction < 0.05);
    // trap depth well above the thermal energy
    let depth = -field.potential(GroundState::A, &Vec3::zeros());
    assert!(depth > 10.0 * blockade_sources::constants::BOLTZMANN * 30e-6);
}

#[test]
fn mean_speed_hand_value() {
    // sqrt(8 k_B T / (pi m)) at 30 uK for 87Rb is 0.0855 m/s
    let v = mean_thermal_speed(30e-6, TrapSetup::fig2().species.mass);
    assert!((v - 0.084).abs() < 0.002, "{v}");
}
