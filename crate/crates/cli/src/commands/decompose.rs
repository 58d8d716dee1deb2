//! `quatflow decompose`: per-band energy table of a snapshot as CSV, with
//! per-component and whole-field columns plus the reconstruction error.

use std::path::PathBuf;

use clap::Args;
use quatflow_core::diagnostics::{band_energy, band_energy_component};
use quatflow_core::lp::FilterBank;

use crate::error::{CliError, CliResult};
use crate::snapshot::read_snapshot;

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    /// Field snapshot to decompose.
    pub snapshot: PathBuf,

    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Builds the CSV text: header, low block, one row per band, then a final
/// `recon_error` row carrying the relative L² reconstruction error in the
/// e_total column.
pub fn render_csv(args: &DecomposeArgs) -> CliResult<String> {
    let field = read_snapshot(&args.snapshot)?;
    let bank = FilterBank::build(field.grid()).map_err(CliError::Core)?;
    let f_hat = field.forward_transform().map_err(CliError::Core)?;
    let decomp = bank.decompose(&f_hat).map_err(CliError::Core)?;

    let whole = band_energy(&decomp);
    let per_comp: Vec<_> = (0..4).map(|c| band_energy_component(&decomp, c)).collect();

    let recon = decomp.reconstruct().map_err(CliError::Core)?;
    let norm = f_hat.l2_norm();
    let recon_error = if norm > 0.0 {
        f_hat.sub(&recon).map_err(CliError::Core)?.l2_norm() / norm
    } else {
        0.0
    };

    let mut out = String::from("band,e_w,e_x,e_y,e_z,e_total\n");
    out.push_str(&format!(
        "low,{:e},{:e},{:e},{:e},{:e}\n",
        per_comp[0].low, per_comp[1].low, per_comp[2].low, per_comp[3].low, whole.low
    ));
    for (j, total) in &whole.bands {
        out.push_str(&format!(
            "{j},{:e},{:e},{:e},{:e},{:e}\n",
            per_comp[0].get(*j).unwrap_or(0.0),
            per_comp[1].get(*j).unwrap_or(0.0),
            per_comp[2].get(*j).unwrap_or(0.0),
            per_comp[3].get(*j).unwrap_or(0.0),
            total
        ));
    }
    out.push_str(&format!("recon_error,,,,,{recon_error:e}\n"));
    Ok(out)
}

pub fn run(args: &DecomposeArgs) -> CliResult<()> {
    let csv = render_csv(args)?;
    match &args.output {
        Some(path) => std::fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}
