//! Named presets shipped in the binary so reference runs need no external
//! data: a decaying Taylor-Green vortex, a seeded 3D broadband field and a
//! weakly forced low-mode run from rest.

use quatflow_core::besov::BesovParams;
use quatflow_core::field::{QField, Repr};
use quatflow_core::grid::GridSpec;
use quatflow_core::solver::{ForcingSpec, NonlinearityMode, SimConfig};
use quatflow_core::synth;

use crate::config::CliConfig;
use crate::error::{CliError, CliResult};

pub const PRESET_NAMES: [&str; 3] = ["taylor-green-2d", "broadband-3d", "forced-low-mode"];

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

fn base_config(grid: GridSpec, nu: f64, t_end: f64, dt: f64) -> SimConfig {
    SimConfig {
        grid,
        nu,
        t_end,
        dt,
        nonlinearity_mode: NonlinearityMode::Advective,
        linear_only: false,
        forcing: ForcingSpec::None,
        diag_every: 1,
        besov: BesovParams::new(1.0, 2.0, 2.0).expect("valid defaults"),
        r_exponent: 2.0,
    }
}

/// Builds a preset's configuration and initial field.
pub fn preset(name: &str) -> CliResult<(CliConfig, QField)> {
    match name {
        "taylor-green-2d" => {
            let grid = GridSpec::square(64, TWO_PI).map_err(CliError::Core)?;
            let sim = base_config(grid.clone(), 0.1, 0.1, 1e-3);
            let q0 = synth::taylor_green_2d(&grid, 1.0).map_err(CliError::Core)?;
            Ok((
                CliConfig {
                    sim,
                    snapshot_every: 0,
                },
                q0,
            ))
        }
        "broadband-3d" => {
            let grid = GridSpec::cube(32, TWO_PI).map_err(CliError::Core)?;
            let mut sim = base_config(grid.clone(), 0.05, 0.02, 2e-3);
            sim.diag_every = 1;
            let q0 = synth::random_broadband(&grid, 42, 1.0, 1.0).map_err(CliError::Core)?;
            Ok((
                CliConfig {
                    sim,
                    snapshot_every: 0,
                },
                q0,
            ))
        }
        "forced-low-mode" => {
            let grid = GridSpec::square(64, TWO_PI).map_err(CliError::Core)?;
            let mut sim = base_config(grid.clone(), 0.1, 0.25, 1e-3);
            sim.forcing = ForcingSpec::SteadyLowMode {
                amplitude: 1e-3,
                mode: vec![0, 1],
            };
            sim.diag_every = 5;
            let q0 = QField::zeros(&grid, Repr::Physical);
            Ok((
                CliConfig {
                    sim,
                    snapshot_every: 0,
                },
                q0,
            ))
        }
        other => Err(CliError::Usage(format!(
            "unknown preset \"{other}\" (available: {})",
            PRESET_NAMES.join(", ")
        ))),
    }
}
