//! `quatflow simulate`: run a configuration or preset, streaming NDJSON
//! diagnostics, periodic snapshots, a final snapshot and a manifest into an
//! output directory the run owns exclusively.

use std::path::{Path, PathBuf};

use clap::Args;
use quatflow_core::field::{QField, Repr};
use quatflow_core::solver::{RunOutcome, Solver};

use crate::config::{parse_config, render_resolved, CliConfig};
use crate::error::{CliError, CliResult};
use crate::manifest::{digest_text, RunManifest};
use crate::ndjson::NdjsonWriter;
use crate::presets::preset;
use crate::snapshot::{expect_grid, read_snapshot, write_state_snapshot};

pub const DIAGNOSTICS_FILE: &str = "diagnostics.ndjson";
pub const RESOLVED_CONFIG_FILE: &str = "config.resolved.toml";
pub const FINAL_SNAPSHOT_FILE: &str = "final.qfld";

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Configuration file (TOML). Mutually exclusive with --preset.
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,

    /// Built-in preset: taylor-green-2d, broadband-3d or forced-low-mode.
    #[arg(long)]
    pub preset: Option<String>,

    /// Initial field snapshot; without it a --config run starts from rest.
    #[arg(long, conflicts_with = "preset")]
    pub initial: Option<PathBuf>,

    /// Output directory (created if missing; its parent must exist).
    #[arg(long)]
    pub output: PathBuf,
}

/// What the process should report.
pub enum SimulateStatus {
    Completed,
    BlowUp,
}

fn prepare_output_dir(path: &Path) -> CliResult<()> {
    if path.is_dir() {
        return Ok(());
    }
    if path.exists() {
        return Err(CliError::Usage(format!(
            "output path {} exists and is not a directory",
            path.display()
        )));
    }
    match path.parent() {
        Some(parent) if parent.as_os_str().is_empty() || parent.exists() => {
            std::fs::create_dir(path)?;
            Ok(())
        }
        _ => Err(CliError::Usage(format!(
            "cannot create output directory {}: parent does not exist",
            path.display()
        ))),
    }
}

fn resolve_inputs(args: &SimulateArgs) -> CliResult<(CliConfig, QField)> {
    match (&args.preset, &args.config) {
        (Some(name), None) => preset(name),
        (None, Some(path)) => {
            let cfg = parse_config(path)?;
            let q0 = match &args.initial {
                Some(snap) => {
                    let field = read_snapshot(snap)?;
                    expect_grid(&field, &cfg.sim.grid, snap)?;
                    field
                }
                None => QField::zeros(&cfg.sim.grid, Repr::Physical),
            };
            Ok((cfg, q0))
        }
        _ => Err(CliError::Usage(
            "exactly one of --preset or --config is required".into(),
        )),
    }
}

pub fn run(args: &SimulateArgs) -> CliResult<SimulateStatus> {
    let (cfg, q0) = resolve_inputs(args)?;
    prepare_output_dir(&args.output)?;
    let started_at = chrono::Utc::now().to_rfc3339();

    let resolved = render_resolved(&cfg);
    let config_digest = digest_text(&resolved);
    std::fs::write(args.output.join(RESOLVED_CONFIG_FILE), &resolved)?;
    let mut files = vec![
        RESOLVED_CONFIG_FILE.to_string(),
        DIAGNOSTICS_FILE.to_string(),
    ];

    let run = || -> CliResult<(RunOutcome, Vec<String>)> {
        let solver = Solver::new(cfg.sim.clone()).map_err(CliError::Core)?;
        let mut writer = NdjsonWriter::create(&args.output.join(DIAGNOSTICS_FILE))?;
        let mut sink_err: Option<CliError> = None;
        let mut snapshots: Vec<String> = Vec::new();
        let outcome = solver
            .simulate(&q0, |rec, state| {
                if sink_err.is_some() {
                    return;
                }
                if let Err(e) = writer.write(rec) {
                    sink_err = Some(e);
                    return;
                }
                let wants_snapshot = cfg.snapshot_every > 0
                    && rec.step_index > 0
                    && rec.step_index % cfg.snapshot_every == 0
                    && !rec.blow_up;
                if wants_snapshot {
                    let name = format!("snapshot_{:06}.qfld", rec.step_index);
                    match write_state_snapshot(&state.q_hat, &args.output.join(&name)) {
                        Ok(()) => snapshots.push(name),
                        Err(e) => sink_err = Some(e),
                    }
                }
            })
            .map_err(CliError::Core)?;
        if let Some(e) = sink_err {
            return Err(e);
        }
        writer.finish()?;
        write_state_snapshot(
            &outcome.final_state.q_hat,
            &args.output.join(FINAL_SNAPSHOT_FILE),
        )?;
        snapshots.push(FINAL_SNAPSHOT_FILE.to_string());
        println!(
            "run finished: outcome = {}, records = {}, forcing L^r norm = {:.6e}",
            match outcome.outcome {
                RunOutcome::Completed => "completed".to_string(),
                RunOutcome::BlowUp {
                    step_index,
                    last_besov,
                } => format!("blow_up at step {step_index} (last Besov norm {last_besov:.6e})"),
            },
            outcome.records_emitted,
            outcome.forcing_lr_norm,
        );
        Ok((outcome.outcome, snapshots))
    };

    let result = run();
    let (outcome_tag, status) = match &result {
        Ok((RunOutcome::Completed, _)) => ("completed", Ok(SimulateStatus::Completed)),
        Ok((RunOutcome::BlowUp { .. }, _)) => ("blow_up", Ok(SimulateStatus::BlowUp)),
        Err(_) => ("error", Err(())),
    };
    if let Ok((_, snapshots)) = &result {
        files.extend(snapshots.iter().cloned());
    }
    let manifest = RunManifest {
        config_digest,
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        started_at,
        finished_at: chrono::Utc::now().to_rfc3339(),
        outcome: outcome_tag.to_string(),
        files,
    };
    manifest.write(&args.output)?;
    println!("manifest: {}", args.output.join("manifest.json").display());

    match (result, status) {
        (Ok(_), Ok(s)) => Ok(s),
        (Err(e), _) => Err(e),
        _ => unreachable!(),
    }
}
