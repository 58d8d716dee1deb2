//! Newline-delimited JSON for the diagnostics stream: one record per line,
//! keys matching the record's field names, band associations as nested
//! objects keyed by the stringified band index. Streamable during long
//! runs, trivially diffable afterwards.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use quatflow_core::diagnostics::DiagnosticsRecord;

use crate::error::{CliError, CliResult};

/// Single-writer streaming NDJSON sink.
pub struct NdjsonWriter {
    out: BufWriter<File>,
}

impl NdjsonWriter {
    pub fn create(path: &Path) -> CliResult<Self> {
        Ok(NdjsonWriter {
            out: BufWriter::new(File::create(path)?),
        })
    }

    pub fn write(&mut self, record: &DiagnosticsRecord) -> CliResult<()> {
        serde_json::to_writer(&mut self.out, record)?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> CliResult<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Reads a full diagnostics stream; parse failures name the line.
pub fn read_records(path: &Path) -> CliResult<Vec<DiagnosticsRecord>> {
    let file = File::open(path)?;
    let mut records = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: DiagnosticsRecord = serde_json::from_str(&line).map_err(|e| {
            CliError::Config(format!(
                "{}:{}: bad diagnostics record: {e}",
                path.display(),
                lineno + 1
            ))
        })?;
        records.push(rec);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use quatflow_core::diagnostics::{BandScalars, ComponentScalars, GronwallTerms};

    fn record(t: f64) -> DiagnosticsRecord {
        DiagnosticsRecord {
            t,
            step_index: (t * 10.0) as usize,
            total_energy: 1.0,
            band_energy: BandScalars {
                low: 0.25,
                bands: vec![(0, 0.5), (1, 0.25)],
            },
            band_dissipation: BandScalars {
                low: 0.0,
                bands: vec![(0, 0.1), (1, 0.2)],
            },
            besov_weighted_energy: ComponentScalars {
                w: 0.0,
                x: 0.5,
                y: 0.5,
                z: 0.0,
            },
            besov_norm: 1.5,
            gronwall_lhs: 1.5,
            gronwall_rhs_terms: GronwallTerms {
                initial_norm: 1.5,
                forcing_integral: 0.0,
                exponent_integral: 0.3,
            },
            energy_balance_residual: 1e-8,
            blow_up: false,
        }
    }

    #[test]
    fn roundtrip_preserves_records() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("diag.ndjson");
        let records = vec![record(0.0), record(0.1), record(0.2)];
        let mut w = NdjsonWriter::create(&path).unwrap();
        for r in &records {
            w.write(r).unwrap();
        }
        w.finish().unwrap();
        let back = read_records(&path).unwrap();
        assert_eq!(records, back);
    }

    #[test]
    fn keys_follow_record_field_names() {
        let json = serde_json::to_string(&record(0.0)).unwrap();
        for key in [
            "\"t\":",
            "\"step_index\":",
            "\"total_energy\":",
            "\"band_energy\":",
            "\"band_dissipation\":",
            "\"besov_weighted_energy\":",
            "\"besov_norm\":",
            "\"gronwall_lhs\":",
            "\"gronwall_rhs_terms\":",
            "\"energy_balance_residual\":",
            "\"blow_up\":",
        ] {
            assert!(json.contains(key), "missing {key} in {json}");
        }
        assert!(json.contains("\"band_energy\":{\"low\":0.25,\"0\":0.5,\"1\":0.25}"));
    }

    #[test]
    fn empty_file_reads_empty() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.ndjson");
        std::fs::write(&path, b"").unwrap();
        assert!(read_records(&path).unwrap().is_empty());
    }
}
