use blockade_sources::blockade::m_excitation_schedule;
use blockade_sources::constants::hz_to_angular;
use serde::Serialize;

use crate::{CliError, Context};

#[derive(Serialize)]
struct Schedule {
    atoms: usize,
    excitations: usize,
    preparation_time_us: f64,
    cycle_time_us: f64,
    repetitions: usize,
    pulse_rate_hz: f64,
}

pub fn run(ctx: &Context) -> Result<(), CliError> {
    let cfg = ctx.config.section(&ctx.config.schedule, "schedule")?;
    let r = m_excitation_schedule(cfg.atoms, cfg.excitations, hz_to_angular(cfg.rabi.si()), cfg.eject_time.si())
        .map_err(CliError::from_core)?;
    ctx.writer.json(
        "schedule.json",
        &Schedule {
            atoms: r.atoms,
            excitations: r.excitations,
            preparation_time_us: r.preparation_time * 1e6,
            cycle_time_us: r.cycle_time * 1e6,
            repetitions: r.repetitions,
            pulse_rate_hz: r.pulse_rate,
        },
    )?;
    ctx.finish(&[])
}
