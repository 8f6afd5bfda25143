use blockade_sources::constants::{hz_to_angular, BOLTZMANN};
use blockade_sources::ejection::{
    characteristic_eject_time, collimation_stats, sample_thermal_initial, scan_fig2, simulate_ensemble,
    summarize, CollimationStats, EjectConfig, EnsembleSummary, TrajectoryResult, TrapSetup,
};
use blockade_sources::optics::GroundState;
use blockade_sources::{seeding, Vec3};
use serde::Serialize;

use crate::config::vector;
use crate::{CliError, Context};

#[derive(Serialize)]
struct ProfileCsv {
    x_um: f64,
    u_a_uk: f64,
    u_b_uk: f64,
    a_a: f64,
    a_b: f64,
}

#[derive(Serialize)]
struct TrajectoryCsv {
    state: &'static str,
    trajectory: usize,
    t_us: f64,
    x_um: f64,
    y_um: f64,
    z_um: f64,
    vx: f64,
    vy: f64,
    vz: f64,
    photons: f64,
}

#[derive(Serialize)]
struct StateReport {
    potential_at_center_uk: f64,
    acceleration_at_center: f64,
    photons_at_peak_over_t1: Option<f64>,
    ensemble: EnsembleSummary,
    truncated: usize,
    max_energy_drift: Option<f64>,
}

#[derive(Serialize)]
struct Summary {
    push_direction: Vec3,
    t1_us: Option<f64>,
    state_b: StateReport,
    state_a: StateReport,
    collimation: Option<CollimationStats>,
    warnings: Vec<String>,
}

fn label(state: GroundState) -> &'static str {
    match state {
        GroundState::A => "a",
        GroundState::B => "b",
    }
}

pub fn run(ctx: &Context) -> Result<(), CliError> {
    let cfg = ctx.config.section(&ctx.config.eject, "eject")?;
    let species = ctx.config.species()?;
    let setup = TrapSetup {
        fort_power: cfg.fort.power.si(),
        fort_waist: cfg.fort.waist.si(),
        fort_wavelength: cfg.fort.wavelength.si(),
        eject_power: cfg.eject_beam.power.si(),
        eject_waist: cfg.eject_beam.waist.si(),
        eject_offset: vector(&cfg.eject_beam.offset),
        eject_detuning_b: hz_to_angular(cfg.eject_beam.detuning_b.si()),
        species,
    };
    let field = setup.field().map_err(CliError::from_core)?;
    let config = EjectConfig {
        temperature: cfg.temperature.si(),
        duration: cfg.duration.si(),
        tolerance: cfg.tolerance,
        include_recoil_kicks: cfg.recoil_kicks,
        gravity: cfg.gravity,
        ..EjectConfig::for_setup(&setup)
    };
    config.validate().map_err(CliError::from_core)?;
    if cfg.profile.points < 2 {
        return Err(CliError::Config("eject.profile.points must be >= 2".into()));
    }
    let mut warnings = Vec::new();

    // the eject beam pushes away from its own focus
    let push = if setup.eject_offset.norm() > 0.0 { -setup.eject_offset.normalize() } else { Vec3::x() };
    let profile = scan_fig2(&field, Vec3::zeros(), push, cfg.profile.from.si(), cfg.profile.to.si(), cfg.profile.points);

    let accel_b = field.acceleration(GroundState::B, &Vec3::zeros()).dot(&push);
    let t1 = match characteristic_eject_time(accel_b, setup.fort_waist) {
        Ok(t) => Some(t),
        Err(e) => {
            warnings.push(format!("no characteristic eject time: {e}"));
            None
        }
    };

    let initials = sample_thermal_initial(
        config.temperature,
        species.mass,
        cfg.cloud_diameter.si(),
        Vec3::zeros(),
        cfg.trajectories,
        seeding::derive_seed(ctx.seed, 0),
    )
    .map_err(CliError::from_core)?;

    let mut reports = Vec::new();
    let mut exported = Vec::new();
    for (index, state) in [GroundState::B, GroundState::A].into_iter().enumerate() {
        let runs = simulate_ensemble(&initials, &field, state, &config, seeding::derive_seed(ctx.seed, 1 + index as u64))
            .map_err(CliError::from_core)?;
        let photons = match t1 {
            Some(t) => Some(setup.photons_at_peak(state, t).map_err(CliError::from_core)?),
            None => None,
        };
        let truncated = runs.iter().filter(|r| r.truncated).count();
        if truncated > 0 {
            warnings.push(format!("{truncated} |{}> trajectories left the simulated region while bound", label(state)));
        }
        reports.push(StateReport {
            potential_at_center_uk: field.potential(state, &Vec3::zeros()) / BOLTZMANN * 1e6,
            acceleration_at_center: field.acceleration(state, &Vec3::zeros()).dot(&push),
            photons_at_peak_over_t1: photons,
            ensemble: summarize(&runs),
            truncated,
            max_energy_drift: runs.iter().filter_map(|r| r.energy_drift).reduce(f64::max),
        });
        exported.push((state, runs));
    }

    let (_, runs_b) = &exported[0];
    let collimation = match collimation_stats(runs_b, species.mass, setup.photon_momentum(), setup.fort_waist) {
        Ok(s) => Some(s),
        Err(e) => {
            warnings.push(format!("no collimation statistics: {e}"));
            None
        }
    };
    let state_a = reports.pop().unwrap();
    let state_b = reports.pop().unwrap();
    if state_a.ensemble.escape_fraction > 0.05 {
        warnings.push(format!("{:.0}% of |a> atoms escaped", 100.0 * state_a.ensemble.escape_fraction));
    }

    ctx.writer.csv(
        "eject_profile.csv",
        profile.iter().map(|r| ProfileCsv { x_um: r.x * 1e6, u_a_uk: r.u_a, u_b_uk: r.u_b, a_a: r.a_a, a_b: r.a_b }),
    )?;
    ctx.writer.csv(
        "trajectories.csv",
        exported.iter().flat_map(|(state, runs)| {
            runs.iter()
                .take(cfg.export_trajectories)
                .enumerate()
                .flat_map(move |(i, r)| trajectory_rows(*state, i, r))
        }),
    )?;
    ctx.writer.json(
        "eject_summary.json",
        &Summary { push_direction: push, t1_us: t1.map(|t| t * 1e6), state_b, state_a, collimation, warnings: warnings.clone() },
    )?;
    ctx.finish(&warnings)
}

fn trajectory_rows(state: GroundState, index: usize, r: &TrajectoryResult) -> impl Iterator<Item = TrajectoryCsv> + '_ {
    (0..r.times.len()).map(move |k| TrajectoryCsv {
        state: label(state),
        trajectory: index,
        t_us: r.times[k] * 1e6,
        x_um: r.positions[k].x * 1e6,
        y_um: r.positions[k].y * 1e6,
        z_um: r.positions[k].z * 1e6,
        vx: r.velocities[k].x,
        vy: r.velocities[k].y,
        vz: r.velocities[k].z,
        photons: r.photons[k],
    })
}
