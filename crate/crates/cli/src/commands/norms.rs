//! `quatflow norms`: L^p and Besov norms of a snapshot with per-band
//! weighted contributions, as human text or JSON.

use std::path::PathBuf;

use clap::Args;
use quatflow_core::besov::{besov_norm_of_decomposition, lp_norm, weighted_terms, BesovParams};
use quatflow_core::diagnostics::BandScalars;
use quatflow_core::lp::FilterBank;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::snapshot::read_snapshot;

#[derive(Args, Debug)]
pub struct NormsArgs {
    /// Field snapshot to measure.
    pub snapshot: PathBuf,

    /// Smoothness index s.
    #[arg(long, default_value_t = 1.0)]
    pub s: f64,

    /// Integrability index p (number or "inf").
    #[arg(long, default_value = "2")]
    pub p: String,

    /// Band summability index (number or "inf").
    #[arg(long = "q-idx", default_value = "2")]
    pub q_idx: String,

    /// Scale the field by this factor before measuring.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,

    /// Emit a JSON document instead of text.
    #[arg(long)]
    pub json: bool,
}

fn parse_index(text: &str, name: &str) -> CliResult<f64> {
    if text == "inf" || text == "infinity" {
        return Ok(f64::INFINITY);
    }
    text.parse::<f64>()
        .map_err(|_| CliError::Usage(format!("--{name} must be a number or \"inf\", got {text}")))
}

#[derive(Serialize)]
pub struct NormReport {
    pub s: f64,
    pub p: f64,
    pub q_idx: f64,
    pub scale: f64,
    pub lp_norm: f64,
    pub besov_norm: f64,
    /// Weighted contribution 2^{js}·‖Δ_j f‖_{L^p} per band plus low block.
    pub band_terms: BandScalars,
}

pub fn compute(args: &NormsArgs) -> CliResult<NormReport> {
    let p = parse_index(&args.p, "p")?;
    let q_idx = parse_index(&args.q_idx, "q-idx")?;
    let params = BesovParams::new(args.s, p, q_idx).map_err(CliError::Core)?;

    let field = read_snapshot(&args.snapshot)?.scaled(args.scale);
    let bank = FilterBank::build(field.grid()).map_err(CliError::Core)?;
    let decomp = bank.decompose(&field).map_err(CliError::Core)?;

    let lp = lp_norm(&field, p).map_err(CliError::Core)?;
    let besov = besov_norm_of_decomposition(&decomp, &params).map_err(CliError::Core)?;
    let terms = weighted_terms(&decomp, &params).map_err(CliError::Core)?;
    let band_terms = BandScalars {
        low: terms[0],
        bands: decomp
            .bands()
            .iter()
            .map(|(j, _)| *j)
            .zip(terms[1..].iter().copied())
            .collect(),
    };

    Ok(NormReport {
        s: args.s,
        p,
        q_idx,
        scale: args.scale,
        lp_norm: lp,
        besov_norm: besov,
        band_terms,
    })
}

pub fn run(args: &NormsArgs) -> CliResult<()> {
    let report = compute(args)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
        return Ok(());
    }
    println!(
        "L^{} norm        = {:.12e}",
        if report.p.is_infinite() {
            "inf".to_string()
        } else {
            format!("{}", report.p)
        },
        report.lp_norm
    );
    println!(
        "Besov norm (s = {}, p = {}, q = {}) = {:.12e}",
        report.s, report.p, report.q_idx, report.besov_norm
    );
    println!("band contributions (2^(js)·|Δ_j f|_p):");
    println!("  low: {:.6e}", report.band_terms.low);
    for (j, v) in &report.band_terms.bands {
        println!("  {j:>4}: {v:.6e}");
    }
    Ok(())
}
