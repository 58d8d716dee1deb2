//! Strict configuration parsing.
//!
//! Runs are configured by a nested key-value TOML file. Unknown keys are
//! rejected (a silent typo in `nu` or `dt` would invalidate an experiment);
//! rejection messages suggest the nearest known key within edit distance 2,
//! resolving aliases like `viscosity` to the canonical `nu`.

use std::path::Path;

use quatflow_core::besov::BesovParams;
use quatflow_core::grid::GridSpec;
use quatflow_core::solver::{ForcingSpec, NonlinearityMode, SimConfig};
use toml::{Table, Value};

use crate::error::{CliError, CliResult};

/// Parsed configuration: the solver part plus CLI-level output options.
#[derive(Clone, Debug)]
pub struct CliConfig {
    pub sim: SimConfig,
    /// Write a field snapshot at every diagnostics record whose step index
    /// is a multiple of this; 0 writes only the final snapshot.
    pub snapshot_every: usize,
}

const TOP_KEYS: &[&str] = &[
    "nu",
    "t_end",
    "dt",
    "nonlinearity_mode",
    "linear_only",
    "diag_every",
    "r_exponent",
    "snapshot_every",
    "grid",
    "forcing",
    "besov",
];
const TOP_ALIASES: &[(&str, &str)] = &[
    ("viscosity", "nu"),
    ("visc", "nu"),
    ("tend", "t_end"),
    ("t_final", "t_end"),
    ("timestep", "dt"),
    ("time_step", "dt"),
];

const GRID_KEYS: &[&str] = &["dim", "sizes", "domain_length"];
const GRID_ALIASES: &[(&str, &str)] = &[
    ("length", "domain_length"),
    ("lengths", "domain_length"),
    ("size", "sizes"),
];

const FORCING_KEYS: &[&str] = &["kind", "amplitude", "mode", "decay_rate"];
const FORCING_ALIASES: &[(&str, &str)] = &[("amp", "amplitude"), ("decay", "decay_rate")];

const BESOV_KEYS: &[&str] = &["s", "p", "q_idx"];
const BESOV_ALIASES: &[(&str, &str)] = &[("q", "q_idx")];

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut prev = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let cost = if ca == cb { 0 } else { 1 };
            let next = (prev + cost).min(row[j] + 1).min(row[j + 1] + 1);
            prev = row[j + 1];
            row[j + 1] = next;
        }
    }
    row[b.len()]
}

fn reject_unknown_keys(
    table: &Table,
    section: &str,
    known: &[&str],
    aliases: &[(&str, &str)],
) -> CliResult<()> {
    for key in table.keys() {
        if known.contains(&key.as_str()) {
            continue;
        }
        let path = if section.is_empty() {
            key.clone()
        } else {
            format!("{section}.{key}")
        };
        // Nearest candidate among canonical keys and aliases, distance <= 2;
        // an alias match suggests its canonical target.
        let mut best: Option<(usize, &str)> = None;
        for &candidate in known {
            let d = levenshtein(key, candidate);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, candidate));
            }
        }
        for &(alias, canonical) in aliases {
            let d = levenshtein(key, alias);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, canonical));
            }
        }
        let suggestion = match best {
            Some((d, canonical)) if d <= 2 => format!(" (did you mean \"{canonical}\"?)"),
            _ => String::new(),
        };
        return Err(CliError::Config(format!(
            "unknown key \"{path}\"{suggestion}"
        )));
    }
    Ok(())
}

fn value_f64(v: &Value, path: &str) -> CliResult<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(CliError::Config(format!("key \"{path}\" must be a number"))),
    }
}

fn value_f64_or_inf(v: &Value, path: &str) -> CliResult<f64> {
    match v {
        Value::String(s) if s == "inf" || s == "infinity" => Ok(f64::INFINITY),
        Value::String(s) => Err(CliError::Config(format!(
            "key \"{path}\": string \"{s}\" is not a number (use \"inf\" for infinity)"
        ))),
        other => value_f64(other, path),
    }
}

fn value_usize(v: &Value, path: &str) -> CliResult<usize> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        _ => Err(CliError::Config(format!(
            "key \"{path}\" must be a non-negative integer"
        ))),
    }
}

fn value_bool(v: &Value, path: &str) -> CliResult<bool> {
    match v {
        Value::Boolean(b) => Ok(*b),
        _ => Err(CliError::Config(format!(
            "key \"{path}\" must be a boolean"
        ))),
    }
}

fn value_string<'v>(v: &'v Value, path: &str) -> CliResult<&'v str> {
    match v {
        Value::String(s) => Ok(s),
        _ => Err(CliError::Config(format!("key \"{path}\" must be a string"))),
    }
}

fn value_array<'v>(v: &'v Value, path: &str) -> CliResult<&'v [Value]> {
    match v {
        Value::Array(a) => Ok(a),
        _ => Err(CliError::Config(format!("key \"{path}\" must be an array"))),
    }
}

fn require<'t>(table: &'t Table, key: &str, section: &str) -> CliResult<&'t Value> {
    table.get(key).ok_or_else(|| {
        let path = if section.is_empty() {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        CliError::Config(format!("missing required key \"{path}\""))
    })
}

fn parse_grid(table: &Table) -> CliResult<GridSpec> {
    reject_unknown_keys(table, "grid", GRID_KEYS, GRID_ALIASES)?;
    let sizes_v = require(table, "sizes", "grid")?;
    let sizes: Vec<usize> = value_array(sizes_v, "grid.sizes")?
        .iter()
        .map(|v| value_usize(v, "grid.sizes"))
        .collect::<CliResult<_>>()?;
    if let Some(dim_v) = table.get("dim") {
        let dim = value_usize(dim_v, "grid.dim")?;
        if dim != sizes.len() {
            return Err(CliError::Config(format!(
                "grid.dim = {dim} disagrees with grid.sizes ({} axes)",
                sizes.len()
            )));
        }
    }
    let lengths = match table.get("domain_length") {
        None => vec![1.0; sizes.len()],
        Some(Value::Array(a)) => a
            .iter()
            .map(|v| value_f64(v, "grid.domain_length"))
            .collect::<CliResult<_>>()?,
        Some(v) => vec![value_f64(v, "grid.domain_length")?; sizes.len()],
    };
    GridSpec::new(&sizes, &lengths).map_err(|e| CliError::Config(e.to_string()))
}

fn parse_forcing(table: &Table) -> CliResult<ForcingSpec> {
    reject_unknown_keys(table, "forcing", FORCING_KEYS, FORCING_ALIASES)?;
    let kind = value_string(require(table, "kind", "forcing")?, "forcing.kind")?;
    if kind == "none" {
        return Ok(ForcingSpec::None);
    }
    let amplitude = value_f64(require(table, "amplitude", "forcing")?, "forcing.amplitude")?;
    let mode: Vec<i64> = value_array(require(table, "mode", "forcing")?, "forcing.mode")?
        .iter()
        .map(|v| match v {
            Value::Integer(i) => Ok(*i),
            _ => Err(CliError::Config(
                "key \"forcing.mode\" must be an array of integers".into(),
            )),
        })
        .collect::<CliResult<_>>()?;
    match kind {
        "steady_low_mode" => Ok(ForcingSpec::SteadyLowMode { amplitude, mode }),
        "time_decaying_low_mode" => {
            let decay_rate = value_f64(
                require(table, "decay_rate", "forcing")?,
                "forcing.decay_rate",
            )?;
            Ok(ForcingSpec::TimeDecayingLowMode {
                amplitude,
                mode,
                decay_rate,
            })
        }
        other => Err(CliError::Config(format!(
            "forcing.kind \"{other}\" is not one of none, steady_low_mode, time_decaying_low_mode"
        ))),
    }
}

fn parse_besov(table: &Table) -> CliResult<BesovParams> {
    reject_unknown_keys(table, "besov", BESOV_KEYS, BESOV_ALIASES)?;
    let s = table
        .get("s")
        .map(|v| value_f64(v, "besov.s"))
        .transpose()?
        .unwrap_or(1.0);
    let p = table
        .get("p")
        .map(|v| value_f64_or_inf(v, "besov.p"))
        .transpose()?
        .unwrap_or(2.0);
    let q_idx = table
        .get("q_idx")
        .map(|v| value_f64_or_inf(v, "besov.q_idx"))
        .transpose()?
        .unwrap_or(2.0);
    BesovParams::new(s, p, q_idx).map_err(|e| CliError::Config(e.to_string()))
}

/// Parses and validates a configuration file. Unset keys take documented
/// defaults; unknown keys, type errors and constraint violations are all
/// rejected with the offending key named.
pub fn parse_config(path: &Path) -> CliResult<CliConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_str(&text)
}

/// Parses configuration text (see [`parse_config`]).
pub fn parse_config_str(text: &str) -> CliResult<CliConfig> {
    let table: Table =
        toml::from_str(text).map_err(|e| CliError::Config(format!("syntax error: {e}")))?;
    reject_unknown_keys(&table, "", TOP_KEYS, TOP_ALIASES)?;

    let grid_v = require(&table, "grid", "")?;
    let grid = match grid_v {
        Value::Table(t) => parse_grid(t)?,
        _ => return Err(CliError::Config("key \"grid\" must be a table".into())),
    };

    let nu = value_f64(require(&table, "nu", "")?, "nu")?;
    let t_end = value_f64(require(&table, "t_end", "")?, "t_end")?;
    let dt = value_f64(require(&table, "dt", "")?, "dt")?;

    let nonlinearity_mode = match table.get("nonlinearity_mode") {
        None => NonlinearityMode::Advective,
        Some(v) => match value_string(v, "nonlinearity_mode")? {
            "advective" => NonlinearityMode::Advective,
            "hamilton" => NonlinearityMode::Hamilton,
            other => {
                return Err(CliError::Config(format!(
                    "nonlinearity_mode \"{other}\" is not one of advective, hamilton"
                )))
            }
        },
    };
    let linear_only = table
        .get("linear_only")
        .map(|v| value_bool(v, "linear_only"))
        .transpose()?
        .unwrap_or(false);
    let diag_every = table
        .get("diag_every")
        .map(|v| value_usize(v, "diag_every"))
        .transpose()?
        .unwrap_or(1);
    let r_exponent = table
        .get("r_exponent")
        .map(|v| value_f64(v, "r_exponent"))
        .transpose()?
        .unwrap_or(2.0);
    let snapshot_every = table
        .get("snapshot_every")
        .map(|v| value_usize(v, "snapshot_every"))
        .transpose()?
        .unwrap_or(0);

    let forcing = match table.get("forcing") {
        None => ForcingSpec::None,
        Some(Value::Table(t)) => parse_forcing(t)?,
        Some(_) => return Err(CliError::Config("key \"forcing\" must be a table".into())),
    };
    let besov = match table.get("besov") {
        None => BesovParams::new(1.0, 2.0, 2.0).expect("default besov params"),
        Some(Value::Table(t)) => parse_besov(t)?,
        Some(_) => return Err(CliError::Config("key \"besov\" must be a table".into())),
    };

    let sim = SimConfig {
        grid,
        nu,
        t_end,
        dt,
        nonlinearity_mode,
        linear_only,
        forcing,
        diag_every,
        besov,
        r_exponent,
    };
    sim.validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(CliConfig {
        sim,
        snapshot_every,
    })
}

fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        "\"inf\"".to_string()
    } else {
        let s = format!("{v:?}");
        if s.contains('.') || s.contains('e') || s.contains("inf") {
            s
        } else {
            format!("{s}.0")
        }
    }
}

/// Deterministic TOML rendering of a resolved configuration (every default
/// filled in). The run's config digest hashes this text.
pub fn render_resolved(cfg: &CliConfig) -> String {
    let sim = &cfg.sim;
    let mut out = String::new();
    out.push_str(&format!("nu = {}\n", fmt_f64(sim.nu)));
    out.push_str(&format!("t_end = {}\n", fmt_f64(sim.t_end)));
    out.push_str(&format!("dt = {}\n", fmt_f64(sim.dt)));
    out.push_str(&format!(
        "nonlinearity_mode = \"{}\"\n",
        match sim.nonlinearity_mode {
            NonlinearityMode::Advective => "advective",
            NonlinearityMode::Hamilton => "hamilton",
        }
    ));
    out.push_str(&format!("linear_only = {}\n", sim.linear_only));
    out.push_str(&format!("diag_every = {}\n", sim.diag_every));
    out.push_str(&format!("r_exponent = {}\n", fmt_f64(sim.r_exponent)));
    out.push_str(&format!("snapshot_every = {}\n", cfg.snapshot_every));

    out.push_str("\n[grid]\n");
    out.push_str(&format!("dim = {}\n", sim.grid.dim()));
    out.push_str(&format!(
        "sizes = [{}]\n",
        sim.grid
            .sizes()
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    ));
    out.push_str(&format!(
        "domain_length = [{}]\n",
        sim.grid
            .domain_length()
            .iter()
            .map(|l| fmt_f64(*l))
            .collect::<Vec<_>>()
            .join(", ")
    ));

    out.push_str("\n[forcing]\n");
    match &sim.forcing {
        ForcingSpec::None => out.push_str("kind = \"none\"\n"),
        ForcingSpec::SteadyLowMode { amplitude, mode } => {
            out.push_str("kind = \"steady_low_mode\"\n");
            out.push_str(&format!("amplitude = {}\n", fmt_f64(*amplitude)));
            out.push_str(&format!(
                "mode = [{}]\n",
                mode.iter()
                    .map(|m| m.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            ));
        }
        ForcingSpec::TimeDecayingLowMode {
            amplitude,
            mode,
            decay_rate,
        } => {
            out.push_str("kind = \"time_decaying_low_mode\"\n");
            out.push_str(&format!("amplitude = {}\n", fmt_f64(*amplitude)));
            out.push_str(&format!(
                "mode = [{}]\n",
                mode.iter()
                    .map(|m| m.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            ));
            out.push_str(&format!("decay_rate = {}\n", fmt_f64(*decay_rate)));
        }
    }

    out.push_str("\n[besov]\n");
    out.push_str(&format!("s = {}\n", fmt_f64(sim.besov.s)));
    out.push_str(&format!("p = {}\n", fmt_f64(sim.besov.p)));
    out.push_str(&format!("q_idx = {}\n", fmt_f64(sim.besov.q_idx)));
    out
}
