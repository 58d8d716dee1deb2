//! `quatflow analyze`: the dissipation scaling fit (slope + per-band
//! Bernstein bracket) and the Gronwall envelope report for a recorded
//! diagnostics stream, as human text and JSON.

use std::path::PathBuf;

use clap::Args;
use quatflow_core::diagnostics::{
    dissipation_scaling_fit, gronwall_monitor, GronwallReport, ScalingFit,
};
use quatflow_core::lp::FilterBank;
use quatflow_core::solver::forcing_eval;
use serde::Serialize;

use crate::config::{parse_config, CliConfig};
use crate::error::{CliError, CliResult};
use crate::ndjson::read_records;

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Diagnostics NDJSON stream produced by `simulate`.
    pub ndjson: PathBuf,

    /// Viscosity used by the run (needed for the dissipation bracket).
    /// Falls back to --config, then to config.resolved.toml next to the
    /// stream.
    #[arg(long)]
    pub nu: Option<f64>,

    /// Configuration of the run, for viscosity and the forcing L^r norm.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Emit a JSON document instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Serialize)]
pub struct AnalyzeReport {
    pub scaling_fit: Option<ScalingFit>,
    pub scaling_fit_error: Option<String>,
    pub gronwall: GronwallReport,
    /// (∫‖f‖_B^r dτ)^{1/r} recomputed from the configuration at record
    /// times; present only when a configuration is available.
    pub forcing_lr_norm: Option<f64>,
    pub r_exponent: Option<f64>,
}

fn load_config(args: &AnalyzeArgs) -> Option<CliConfig> {
    if let Some(path) = &args.config {
        return parse_config(path).ok();
    }
    let sibling = args.ndjson.parent()?.join("config.resolved.toml");
    if sibling.exists() {
        return parse_config(&sibling).ok();
    }
    None
}

pub fn compute(args: &AnalyzeArgs) -> CliResult<AnalyzeReport> {
    let records = read_records(&args.ndjson)?;
    if records.is_empty() {
        return Err(CliError::Core(quatflow_core::Error::InsufficientData(
            format!("{} holds no diagnostics records", args.ndjson.display()),
        )));
    }

    let cfg = load_config(args);
    let nu = args
        .nu
        .or_else(|| cfg.as_ref().map(|c| c.sim.nu))
        .ok_or_else(|| {
            CliError::Usage(
                "viscosity unknown: pass --nu or --config (or keep config.resolved.toml next to the stream)"
                    .into(),
            )
        })?;

    let (scaling_fit, scaling_fit_error) = match dissipation_scaling_fit(&records, nu) {
        Ok(fit) => (Some(fit), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let gronwall = gronwall_monitor(&records).map_err(CliError::Core)?;

    // Forcing L^r-in-time norm, recomputed analytically at record times.
    let mut forcing_lr_norm = None;
    let mut r_exponent = None;
    if let Some(cfg) = &cfg {
        r_exponent = Some(cfg.sim.r_exponent);
        if !cfg.sim.forcing.is_none() {
            let bank = FilterBank::build(&cfg.sim.grid).map_err(CliError::Core)?;
            let r = cfg.sim.r_exponent;
            let mut integral = 0.0;
            let mut prev: Option<(f64, f64)> = None;
            for rec in records.iter().filter(|r| !r.blow_up) {
                let f =
                    forcing_eval(&cfg.sim.forcing, rec.t, &cfg.sim.grid).map_err(CliError::Core)?;
                let norm = quatflow_core::besov::besov_norm(&f, &bank, &cfg.sim.besov)
                    .map_err(CliError::Core)?;
                if let Some((t0, n0)) = prev {
                    integral += 0.5 * (n0.powf(r) + norm.powf(r)) * (rec.t - t0);
                }
                prev = Some((rec.t, norm));
            }
            forcing_lr_norm = Some(integral.powf(1.0 / cfg.sim.r_exponent));
        }
    }

    Ok(AnalyzeReport {
        scaling_fit,
        scaling_fit_error,
        gronwall,
        forcing_lr_norm,
        r_exponent,
    })
}

pub fn run(args: &AnalyzeArgs) -> CliResult<()> {
    let report = compute(args)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
        return Ok(());
    }

    println!("== dissipation scaling ==");
    match (&report.scaling_fit, &report.scaling_fit_error) {
        (Some(fit), _) => {
            println!(
                "slope = {:.4} (intercept {:.4}, residual rms {:.3e}, {} points)",
                fit.slope, fit.intercept, fit.residual_rms, fit.points
            );
            for b in &fit.bands {
                println!(
                    "  band {:>3}: ratio in [{:.4e}, {:.4e}], bracket [{:.4e}, {:.4e}] -> {}",
                    b.j,
                    b.ratio_min,
                    b.ratio_max,
                    b.lower,
                    b.upper,
                    if b.inside { "PASS" } else { "FAIL" }
                );
            }
            println!("bracket: {}", if fit.all_inside { "PASS" } else { "FAIL" });
        }
        (None, Some(err)) => println!("not available: {err}"),
        (None, None) => unreachable!(),
    }

    println!("== gronwall envelope ==");
    println!(
        "minimal C = {:.6} (tightest contact at t = {:.6}, {} records{})",
        report.gronwall.minimal_c,
        report.gronwall.contact_time,
        report.gronwall.records_used,
        if report.gronwall.censored {
            ", censored at blow-up"
        } else {
            ""
        }
    );
    if let (Some(norm), Some(r)) = (report.forcing_lr_norm, report.r_exponent) {
        println!("forcing L^r norm (r = {r}) = {norm:.6e}");
    }
    Ok(())
}
