//! Frequency-banded energy accounting, dissipation scaling fits, Gronwall
//! envelope monitoring and energy-balance residuals.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lp::{BandDecomposition, ANNULUS_INNER, ANNULUS_OUTER};
use crate::solver::{forcing_eval, SimConfig, SolverState};

/// Bands with energy at or below this floor are ignored by fits and
/// relative-error checks.
pub const ENERGY_FLOOR: f64 = 1e-12;

/// Scalar per band plus one low-block entry. Serializes as an object keyed
/// by "low" and the stringified band index.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct BandScalars {
    pub low: f64,
    /// (j, value) in ascending j.
    pub bands: Vec<(i32, f64)>,
}

impl BandScalars {
    pub fn get(&self, j: i32) -> Option<f64> {
        self.bands.iter().find(|(jj, _)| *jj == j).map(|(_, v)| *v)
    }

    /// Sum of every band entry plus the low block.
    pub fn total(&self) -> f64 {
        self.low + self.bands.iter().map(|(_, v)| v).sum::<f64>()
    }
}

impl Serialize for BandScalars {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.bands.len() + 1))?;
        map.serialize_entry("low", &self.low)?;
        for (j, v) in &self.bands {
            map.serialize_entry(&j.to_string(), v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for BandScalars {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct BandVisitor;

        impl<'de> Visitor<'de> for BandVisitor {
            type Value = BandScalars;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a map of band index (or \"low\") to scalar")
            }

            fn visit_map<A: MapAccess<'de>>(
                self,
                mut access: A,
            ) -> std::result::Result<BandScalars, A::Error> {
                let mut low = 0.0;
                let mut bands = BTreeMap::new();
                while let Some((key, value)) = access.next_entry::<String, f64>()? {
                    if key == "low" {
                        low = value;
                    } else {
                        let j: i32 = key.parse().map_err(|_| {
                            serde::de::Error::custom(format!("band key {key} is not an integer"))
                        })?;
                        bands.insert(j, value);
                    }
                }
                Ok(BandScalars {
                    low,
                    bands: bands.into_iter().collect(),
                })
            }
        }

        deserializer.deserialize_map(BandVisitor)
    }
}

/// One scalar per quaternion component.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct ComponentScalars {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Pieces of the Gronwall envelope at one record time: ‖q₀‖_B and the
/// trapezoid integrals ∫₀ᵗ‖f‖_B dτ and ∫₀ᵗ‖q‖_B dτ over records.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct GronwallTerms {
    pub initial_norm: f64,
    pub forcing_integral: f64,
    pub exponent_integral: f64,
}

/// One timestamped row of scalar diagnostics emitted by the simulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub step_index: usize,
    pub total_energy: f64,
    pub band_energy: BandScalars,
    pub band_dissipation: BandScalars,
    pub besov_weighted_energy: ComponentScalars,
    pub besov_norm: f64,
    pub gronwall_lhs: f64,
    pub gronwall_rhs_terms: GronwallTerms,
    pub energy_balance_residual: f64,
    pub blow_up: bool,
}

/// Band energies E_j = ½‖Δ_j q‖²_{L²} plus the low-block entry.
pub fn band_energy(decomp: &BandDecomposition) -> BandScalars {
    BandScalars {
        low: 0.5 * decomp.low_block().l2_norm_sq(),
        bands: decomp
            .bands()
            .iter()
            .map(|(j, b)| (*j, 0.5 * b.l2_norm_sq()))
            .collect(),
    }
}

/// Band energies of a single quaternion component.
pub fn band_energy_component(decomp: &BandDecomposition, component: usize) -> BandScalars {
    BandScalars {
        low: 0.5 * decomp.low_block().component_l2_norm_sq(component),
        bands: decomp
            .bands()
            .iter()
            .map(|(j, b)| (*j, 0.5 * b.component_l2_norm_sq(component)))
            .collect(),
    }
}

/// Viscous dissipation magnitude ν‖∇Δ_j q‖²_{L²} per band (plus the low
/// block). Under pure heat flow this equals −dE_j/dt.
pub fn dissipation_rate(decomp: &BandDecomposition, nu: f64) -> Result<BandScalars> {
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::parameter("nu", format!("{nu} must be positive")));
    }
    Ok(BandScalars {
        low: nu * decomp.low_block().grad_l2_norm_sq()?,
        bands: decomp
            .bands()
            .iter()
            .map(|(j, b)| Ok((*j, nu * b.grad_l2_norm_sq()?)))
            .collect::<Result<Vec<_>>>()?,
    })
}

/// Per-component weighted band sums Σ_j 2^{js}‖Δ_j q_k‖²_{L²}, low block
/// included at weight 2^{j_min·s}. At s = 0 this brackets the component's
/// L² energy up to the filter-bank frame constants; for s ≠ 0 it is a
/// distinct quantity reported alongside the true energy.
pub fn besov_weighted_energy(decomp: &BandDecomposition, s: f64) -> ComponentScalars {
    let mut out = [0.0f64; 4];
    let low_weight = (s * decomp.j_min() as f64).exp2();
    for (c, v) in out.iter_mut().enumerate() {
        *v = low_weight * decomp.low_block().component_l2_norm_sq(c);
        for (j, band) in decomp.bands() {
            *v += (s * *j as f64).exp2() * band.component_l2_norm_sq(c);
        }
    }
    ComponentScalars {
        w: out[0],
        x: out[1],
        y: out[2],
        z: out[3],
    }
}

/// Per-band Bernstein bracket check: for band-localized fields the ratio
/// dissipation_j / (2νE_j) = ‖∇Δ_j q‖²/‖Δ_j q‖² must lie in
/// [(3/4)², (8/3)²]·4^j (wavenumbers in the physical ξ = 2πk/L units the
/// bank is built on).
#[derive(Clone, Debug, Serialize)]
pub struct BandBracket {
    pub j: i32,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub lower: f64,
    pub upper: f64,
    pub inside: bool,
}

/// Result of regressing log₂(dissipation_j / E_j) against j over every
/// usable (record, band) pair.
#[derive(Clone, Debug, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub points: usize,
    pub bands: Vec<BandBracket>,
    pub all_inside: bool,
}

/// Fits the dissipation-to-energy scaling across bands and checks every
/// band against the Bernstein bracket. Needs at least 3 distinct bands with
/// energy above [`ENERGY_FLOOR`].
pub fn dissipation_scaling_fit(records: &[DiagnosticsRecord], nu: f64) -> Result<ScalingFit> {
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::parameter("nu", format!("{nu} must be positive")));
    }
    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut per_band: BTreeMap<i32, (f64, f64)> = BTreeMap::new();
    for rec in records.iter().filter(|r| !r.blow_up) {
        for &(j, e) in &rec.band_energy.bands {
            if e <= ENERGY_FLOOR {
                continue;
            }
            let Some(d) = rec.band_dissipation.get(j) else {
                continue;
            };
            // A band whose content sits entirely on Nyquist bins has zero
            // spectral-derivative dissipation; it carries no slope point.
            if d <= 0.0 {
                continue;
            }
            points.push((j as f64, (d / e).log2()));
            let ratio = d / (2.0 * nu * e);
            per_band
                .entry(j)
                .and_modify(|(lo, hi)| {
                    *lo = lo.min(ratio);
                    *hi = hi.max(ratio);
                })
                .or_insert((ratio, ratio));
        }
    }
    if per_band.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "scaling fit needs >= 3 bands with energy above {ENERGY_FLOOR:.0e}, got {}",
            per_band.len()
        )));
    }

    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|(x, _)| x).sum();
    let sy: f64 = points.iter().map(|(_, y)| y).sum();
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let residual_rms = (points
        .iter()
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();

    let bands: Vec<BandBracket> = per_band
        .into_iter()
        .map(|(j, (ratio_min, ratio_max))| {
            let four_j = (2.0 * j as f64).exp2();
            let lower = ANNULUS_INNER * ANNULUS_INNER * four_j;
            let upper = ANNULUS_OUTER * ANNULUS_OUTER * four_j;
            let slack = 1.0 + 1e-9;
            let inside = ratio_min >= lower / slack && ratio_max <= upper * slack;
            BandBracket {
                j,
                ratio_min,
                ratio_max,
                lower,
                upper,
                inside,
            }
        })
        .collect();
    let all_inside = bands.iter().all(|b| b.inside);

    Ok(ScalingFit {
        slope,
        intercept,
        residual_rms,
        points: points.len(),
        bands,
        all_inside,
    })
}

/// Smallest C ≥ 0 with ‖q(t)‖ ≤ C(‖q₀‖ + ∫‖f‖)·exp(C∫‖q‖) at every record,
/// found by bisection to 1e-6.
#[derive(Clone, Debug, Serialize)]
pub struct GronwallReport {
    pub minimal_c: f64,
    /// Record time where the envelope touches the trajectory most tightly.
    pub contact_time: f64,
    /// True when the trajectory blew up and the envelope covers only the
    /// finite prefix.
    pub censored: bool,
    pub records_used: usize,
}

fn envelope_feasible(records: &[&DiagnosticsRecord], c: f64) -> bool {
    records.iter().all(|rec| {
        let g = &rec.gronwall_rhs_terms;
        let rhs = c * (g.initial_norm + g.forcing_integral) * (c * g.exponent_integral).exp();
        rec.gronwall_lhs <= rhs
    })
}

/// Bisects for the minimal envelope constant over a recorded trajectory.
pub fn gronwall_monitor(records: &[DiagnosticsRecord]) -> Result<GronwallReport> {
    let censored = records.iter().any(|r| r.blow_up);
    let usable: Vec<&DiagnosticsRecord> = records
        .iter()
        .take_while(|r| !r.blow_up)
        .filter(|r| r.gronwall_lhs.is_finite())
        .collect();
    if usable.is_empty() {
        return Err(Error::InsufficientData(
            "no finite records before blow-up".into(),
        ));
    }
    if usable.iter().all(|r| r.gronwall_lhs == 0.0) {
        return Ok(GronwallReport {
            minimal_c: 0.0,
            contact_time: usable[0].t,
            censored,
            records_used: usable.len(),
        });
    }
    if usable.iter().any(|r| {
        r.gronwall_lhs > 0.0
            && r.gronwall_rhs_terms.initial_norm + r.gronwall_rhs_terms.forcing_integral == 0.0
    }) {
        return Err(Error::InsufficientData(
            "envelope prefactor vanishes on a record with nonzero norm".into(),
        ));
    }

    let mut hi = 1.0f64;
    while !envelope_feasible(&usable, hi) {
        hi *= 2.0;
        if hi > 1e30 {
            return Err(Error::InsufficientData(
                "no finite envelope constant below 1e30".into(),
            ));
        }
    }
    let mut lo = 0.0f64;
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if envelope_feasible(&usable, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    // Tightest contact at the feasible endpoint.
    let mut contact_time = usable[0].t;
    let mut best = f64::NEG_INFINITY;
    for rec in &usable {
        let g = &rec.gronwall_rhs_terms;
        let rhs = hi * (g.initial_norm + g.forcing_integral) * (hi * g.exponent_integral).exp();
        let tightness = if rhs > 0.0 {
            rec.gronwall_lhs / rhs
        } else {
            f64::NEG_INFINITY
        };
        if tightness > best {
            best = tightness;
            contact_time = rec.t;
        }
    }

    Ok(GronwallReport {
        minimal_c: hi,
        contact_time,
        censored,
        records_used: usable.len(),
    })
}

/// Discrete energy-budget residual |ΔE/dt + ν‖∇q‖² − ⟨f, q⟩| for two
/// consecutive states, with the dissipation and injection terms evaluated
/// at the midpoint (average of the two states).
pub fn energy_balance_residual(
    prev: &SolverState,
    next: &SolverState,
    cfg: &SimConfig,
) -> Result<f64> {
    let dt = next.t - prev.t;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::parameter(
            "dt",
            format!("states are not consecutive (Δt = {dt})"),
        ));
    }
    let de = next.q_hat.energy() - prev.q_hat.energy();
    let g_prev = prev.q_hat.grad_l2_norm_sq()?;
    let g_next = next.q_hat.grad_l2_norm_sq()?;
    let f_prev = forcing_eval(&cfg.forcing, prev.t, &cfg.grid)?;
    let f_next = forcing_eval(&cfg.forcing, next.t, &cfg.grid)?;
    let inj_prev = f_prev.inner_product(&prev.q_hat)?;
    let inj_next = f_next.inner_product(&next.q_hat)?;
    Ok((de / dt + cfg.nu * 0.5 * (g_prev + g_next) - 0.5 * (inj_prev + inj_next)).abs())
}
