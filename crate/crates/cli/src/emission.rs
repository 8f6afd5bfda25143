use blockade_sources::emission::{
    array_factor, expected_peak_direction, jittered_pattern, motional_blur, seed_averaged_metrics,
    single_photon_pattern, AngularGrid, AngularPattern, EmissionGeometry,
};
use blockade_sources::ensemble::AtomCloud;
use blockade_sources::{seeding, Vec3};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::GeometryKind;
use crate::{CliError, Context};

#[derive(Serialize)]
struct PatternCsv {
    theta: f64,
    phi_az: f64,
    p: f64,
}

#[derive(Serialize)]
struct LobeMetrics {
    mean_fwhm: f64,
    fwhm_stderr: f64,
    fwhm_over_lambda_d: f64,
    mean_peak_to_background: Option<f64>,
}

#[derive(Serialize)]
struct AtomsReport {
    atoms: usize,
    pattern_file: String,
    mean_pattern_file: String,
    /// First cloud, evaluated at the expected peak direction.
    peak_value: f64,
    lobe: Option<LobeMetrics>,
    /// Cloud-averaged doubly excited channel at the single-photon peak.
    double_channel_at_peak: f64,
    /// Peak after Gaussian jitter of the motional scale, relative to N.
    jittered_peak_fraction: Option<f64>,
}

#[derive(Serialize)]
struct Metrics {
    peak_direction: Vec3,
    mismatch: f64,
    lambda_over_d: f64,
    motional_blur_um: f64,
    motional_blur_over_lambda4: f64,
    double_channel_matched: bool,
    atoms: Vec<AtomsReport>,
    warnings: Vec<String>,
}

fn geometry(kind: GeometryKind, lambda4: f64, tilt: f64) -> Result<EmissionGeometry, CliError> {
    let g = match kind {
        GeometryKind::Collinear => EmissionGeometry::collinear(lambda4),
        GeometryKind::Tilted => EmissionGeometry::tilted(lambda4, tilt),
        GeometryKind::CounterPropagating => {
            EmissionGeometry::counter_propagating(lambda4, Vec3::new(tilt.sin(), 0.0, tilt.cos()))
        }
    };
    g.map_err(CliError::from_core)
}

fn rows(p: &AngularPattern) -> impl Iterator<Item = PatternCsv> + '_ {
    p.rows().map(|(theta, phi_az, p)| PatternCsv { theta, phi_az, p })
}

pub fn run(ctx: &Context) -> Result<(), CliError> {
    let cfg = ctx.config.section(&ctx.config.emission, "emission")?;
    let species = ctx.config.species()?;
    if cfg.atoms.is_empty() || cfg.atoms.contains(&0) {
        return Err(CliError::Config("emission.atoms must be a non-empty list of positive counts".into()));
    }
    if cfg.seeds == 0 {
        return Err(CliError::Config("emission.seeds must be >= 1".into()));
    }
    let lambda4 = cfg.lambda4.si();
    let diameter = cfg.diameter.si();
    let geometry = geometry(cfg.geometry, lambda4, cfg.tilt.si())?;
    let peak = expected_peak_direction(&geometry).map_err(CliError::from_core)?;
    let grid = AngularGrid::around(peak.direction, cfg.grid.theta_max.si(), cfg.grid.n_theta, cfg.grid.n_azimuth)
        .map_err(CliError::from_core)?;
    let (blur, blur_fraction) = motional_blur(cfg.temperature.si(), cfg.prep_time.si(), species.mass, lambda4)
        .map_err(CliError::from_core)?;
    let mut warnings = Vec::new();
    if peak.mismatch > 1e-9 * geometry.k4() {
        warnings.push(format!("geometry is not phase matched: mismatch {:.3e} rad/m", peak.mismatch));
    }
    if geometry.double_channel_matched() {
        warnings.push("the doubly excited channel is phase matched as well".into());
    }

    let mut reports = Vec::new();
    for &atoms in &cfg.atoms {
        let seed = seeding::derive_seed(ctx.seed, atoms as u64);
        let clouds = (0..cfg.seeds)
            .map(|s| AtomCloud::sample(atoms, diameter, seeding::derive_seed(seed, s as u64)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(CliError::from_core)?;
        let patterns: Vec<AngularPattern> =
            clouds.par_iter().map(|c| single_photon_pattern(c, &geometry, &grid)).collect();
        let mut mean = patterns[0].clone();
        for (k, v) in mean.values.iter_mut().enumerate() {
            *v = patterns.iter().map(|p| p.values[k]).sum::<f64>() / patterns.len() as f64;
        }

        let lobe = if atoms >= 2 {
            let m = seed_averaged_metrics(atoms, diameter, &geometry, cfg.seeds, seed).map_err(CliError::from_core)?;
            Some(LobeMetrics {
                mean_fwhm: m.mean_fwhm,
                fwhm_stderr: m.fwhm_stderr,
                fwhm_over_lambda_d: m.mean_fwhm / (lambda4 / diameter),
                mean_peak_to_background: m.mean_peak_to_background,
            })
        } else {
            None
        };
        let double = clouds
            .iter()
            .map(|c| array_factor(&c.positions, &geometry.double_channel_phase(), geometry.k4(), &peak.direction))
            .sum::<f64>()
            / clouds.len() as f64;
        let jittered = if cfg.jitter_trials > 0 && atoms >= 2 {
            let pole = AngularGrid::around(peak.direction, 1e-3, 2, 4).map_err(CliError::from_core)?;
            let p = jittered_pattern(&clouds[0], &geometry, &pole, blur, cfg.jitter_trials, seed)
                .map_err(CliError::from_core)?;
            Some(p.value(0, 0) / atoms as f64)
        } else {
            None
        };

        let pattern_file = format!("pattern_N{atoms}.csv");
        let mean_pattern_file = format!("pattern_N{atoms}_mean.csv");
        ctx.writer.csv(&pattern_file, rows(&patterns[0]))?;
        ctx.writer.csv(&mean_pattern_file, rows(&mean))?;
        reports.push(AtomsReport {
            atoms,
            pattern_file,
            mean_pattern_file,
            peak_value: array_factor(&clouds[0].positions, &geometry.written_phase(), geometry.k4(), &peak.direction),
            lobe,
            double_channel_at_peak: double,
            jittered_peak_fraction: jittered,
        });
    }

    ctx.writer.json(
        "emission_metrics.json",
        &Metrics {
            peak_direction: peak.direction,
            mismatch: peak.mismatch,
            lambda_over_d: lambda4 / diameter,
            motional_blur_um: blur * 1e6,
            motional_blur_over_lambda4: blur_fraction,
            double_channel_matched: geometry.double_channel_matched(),
            atoms: reports,
            warnings: warnings.clone(),
        },
    )?;
    ctx.finish(&warnings)
}
