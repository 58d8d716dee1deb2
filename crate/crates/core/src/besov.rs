//! Besov norms over band decompositions, with empirical embedding and
//! product-estimate checks.
//!
//! The inhomogeneous norm is the ℓ^q sum over bands of 2^{js}·‖Δ_j f‖_{L^p};
//! the low-frequency block contributes one extra term at weight 2^{j_min·s}.
//! Pointwise moduli are whole-quaternion magnitudes, and L^p integrals are
//! grid quadrature. p = ∞ takes the max over grid points, q = ∞ the max
//! over bands.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{QField, Repr};
use crate::lp::{BandDecomposition, FilterBank};
use crate::quat::Quaternion;

/// Besov indices (s, p, q). `q_idx` is the summability index over bands,
/// renamed from the usual q to avoid clashing with the velocity field.
/// Infinite p or q_idx is expressed as `f64::INFINITY`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovParams {
    pub s: f64,
    pub p: f64,
    pub q_idx: f64,
}

impl BesovParams {
    pub fn new(s: f64, p: f64, q_idx: f64) -> Result<Self> {
        let params = BesovParams { s, p, q_idx };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.s.is_finite() {
            return Err(Error::parameter("s", "must be finite"));
        }
        if self.p.is_nan() || self.p < 1.0 {
            return Err(Error::parameter("p", format!("{} is below 1", self.p)));
        }
        if self.q_idx.is_nan() || self.q_idx < 1.0 {
            return Err(Error::parameter(
                "q_idx",
                format!("{} is below 1", self.q_idx),
            ));
        }
        Ok(())
    }

    /// The product-estimate hypothesis s > n/p.
    pub fn satisfies_product_hypothesis(&self, dim: usize) -> bool {
        self.s > dim as f64 / self.p
    }
}

/// Grid-quadrature L^p norm of the pointwise quaternion magnitude;
/// p = ∞ gives the max over samples. Requires a physical field.
pub fn lp_norm(f: &QField, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::parameter("p", format!("{p} is below 1")));
    }
    let comps = f.physical()?;
    let n = f.grid().num_points();
    if p.is_infinite() {
        return f.max_magnitude();
    }
    let cell = f.grid().cell_volume();
    let mut sum = 0.0;
    for flat in 0..n {
        let sq: f64 = comps.iter().map(|c| c[flat] * c[flat]).sum();
        sum += if p == 2.0 { sq } else { sq.powf(0.5 * p) };
    }
    Ok((sum * cell).powf(1.0 / p))
}

/// L^p norm of one band held spectrally; p = 2 goes through Parseval,
/// anything else inverse-transforms first. Bands come from decompositions
/// of validated fields, so the inverse skips the symmetry check (an almost
/// empty band is pure rounding noise and has no meaningful symmetry of its
/// own).
fn band_lp_norm(band: &QField, p: f64) -> Result<f64> {
    if p == 2.0 && band.repr() == Repr::Spectral {
        return Ok(band.l2_norm());
    }
    let physical = match band.repr() {
        Repr::Physical => band.clone(),
        Repr::Spectral => band.inverse_transform_unchecked()?,
    };
    lp_norm(&physical, p)
}

/// Weighted band terms (2^{js}·‖Δ_j f‖_{L^p}), low block first at weight
/// 2^{j_min·s}, then bands in ascending j.
pub fn weighted_terms(decomp: &BandDecomposition, params: &BesovParams) -> Result<Vec<f64>> {
    let mut terms = Vec::with_capacity(decomp.bands().len() + 1);
    let low_weight = (params.s * decomp.j_min() as f64).exp2();
    terms.push(low_weight * band_lp_norm(decomp.low_block(), params.p)?);
    for (j, band) in decomp.bands() {
        let weight = (params.s * *j as f64).exp2();
        terms.push(weight * band_lp_norm(band, params.p)?);
    }
    Ok(terms)
}

fn lq_combine(terms: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        terms.iter().cloned().fold(0.0, f64::max)
    } else if q == 1.0 {
        terms.iter().sum()
    } else {
        terms.iter().map(|t| t.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// Besov norm of an existing decomposition.
pub fn besov_norm_of_decomposition(
    decomp: &BandDecomposition,
    params: &BesovParams,
) -> Result<f64> {
    params.validate()?;
    let terms = weighted_terms(decomp, params)?;
    Ok(lq_combine(&terms, params.q_idx))
}

/// Besov norm of a field under a filter bank.
pub fn besov_norm(f: &QField, bank: &FilterBank, params: &BesovParams) -> Result<f64> {
    params.validate()?;
    let decomp = bank.decompose(f)?;
    besov_norm_of_decomposition(&decomp, params)
}

/// Outcome of an embedding comparison between two parameter sets on the
/// same field. `k_structural` and `termwise_monotone` are present only for
/// the same-p, same-q case where the bound is structural.
#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingReport {
    pub norm_source: f64,
    pub norm_target: f64,
    /// norm_target / norm_source (1 when both vanish).
    pub ratio: f64,
    /// Measured smallest K with norm_target ≤ K·norm_source.
    pub measured_k: f64,
    /// 2^{j_min(s₂−s₁)} for the equal-p, equal-q case.
    pub k_structural: Option<f64>,
    /// Whether every weighted band term of the target is ≤ K_structural
    /// times the source term.
    pub termwise_monotone: Option<bool>,
}

/// Compares the `target` (lower-s) norm against the `source` (higher-s)
/// norm of one field. Requires source.s ≥ target.s and source.p ≤ target.p.
pub fn check_embedding(
    f: &QField,
    bank: &FilterBank,
    source: &BesovParams,
    target: &BesovParams,
) -> Result<EmbeddingReport> {
    source.validate()?;
    target.validate()?;
    if source.s < target.s {
        return Err(Error::parameter(
            "s",
            format!(
                "embedding needs source s ≥ target s ({} < {})",
                source.s, target.s
            ),
        ));
    }
    if source.p > target.p {
        return Err(Error::parameter(
            "p",
            format!(
                "embedding needs source p ≤ target p ({} > {})",
                source.p, target.p
            ),
        ));
    }
    let decomp = bank.decompose(f)?;
    let norm_source = besov_norm_of_decomposition(&decomp, source)?;
    let norm_target = besov_norm_of_decomposition(&decomp, target)?;
    let ratio = if norm_source == 0.0 {
        if norm_target == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        norm_target / norm_source
    };

    let structural = source.p == target.p && source.q_idx == target.q_idx;
    let (k_structural, termwise_monotone) = if structural {
        let k = ((target.s - source.s) * decomp.j_min() as f64).exp2();
        let terms_source = weighted_terms(&decomp, source)?;
        let terms_target = weighted_terms(&decomp, target)?;
        let monotone = terms_source
            .iter()
            .zip(terms_target.iter())
            .all(|(a, b)| *b <= k * a * (1.0 + 1e-12) + 1e-300);
        (Some(k), Some(monotone))
    } else {
        (None, None)
    };

    Ok(EmbeddingReport {
        norm_source,
        norm_target,
        ratio,
        measured_k: ratio,
        k_structural,
        termwise_monotone,
    })
}

/// Pointwise Hamilton product of two physical fields.
pub fn hamilton_pointwise_product(f: &QField, g: &QField) -> Result<QField> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch("product across grids".into()));
    }
    let fc = f.physical()?;
    let gc = g.physical()?;
    let mut out = QField::zeros(f.grid(), Repr::Physical);
    {
        let oc = out.physical_mut()?;
        for flat in 0..f.grid().num_points() {
            let a = Quaternion::new(fc[0][flat], fc[1][flat], fc[2][flat], fc[3][flat]);
            let b = Quaternion::new(gc[0][flat], gc[1][flat], gc[2][flat], gc[3][flat]);
            let p = a * b;
            oc[0][flat] = p.w;
            oc[1][flat] = p.x;
            oc[2][flat] = p.y;
            oc[3][flat] = p.z;
        }
    }
    Ok(out)
}

/// Empirical product-estimate constant: besov(f·g) / (besov(f)·besov(g))
/// with the product formed pointwise in physical space and dealiased.
/// Errors when the hypothesis s > n/p fails.
pub fn product_ratio(
    f: &QField,
    g: &QField,
    bank: &FilterBank,
    params: &BesovParams,
) -> Result<f64> {
    params.validate()?;
    if !params.satisfies_product_hypothesis(bank.grid().dim()) {
        return Err(Error::parameter(
            "s",
            format!(
                "product estimate needs s > n/p: s = {}, n/p = {}",
                params.s,
                bank.grid().dim() as f64 / params.p
            ),
        ));
    }
    let f_phys = match f.repr() {
        Repr::Physical => f.clone(),
        Repr::Spectral => f.inverse_transform()?,
    };
    let g_phys = match g.repr() {
        Repr::Physical => g.clone(),
        Repr::Spectral => g.inverse_transform()?,
    };
    let product = hamilton_pointwise_product(&f_phys, &g_phys)?
        .forward_transform()?
        .dealias()?;
    let nf = besov_norm(&f_phys, bank, params)?;
    let ng = besov_norm(&g_phys, bank, params)?;
    let np = besov_norm(&product, bank, params)?;
    Ok(np / (nf * ng))
}
