//! Discrete Littlewood-Paley filter bank.
//!
//! The radial profile is built from the standard smooth step
//! s(t) = e^{−1/t}/(e^{−1/t} + e^{−1/(1−t)}): χ(r) is 1 for r ≤ 3/4, 0 for
//! r ≥ 4/3 and smooth in between, and the band bump φ(r) = χ(r/2) − χ(r) is
//! supported in the annulus [3/4, 8/3] with φ ≡ 1 on [4/3, 3/2]. Because the
//! bumps telescope, Σ_j φ(2^{−j}ξ) = 1 holds exactly for every ξ ≠ 0.
//!
//! Grids are finite, so the decomposition is inhomogeneous: bands j_min..=
//! j_max cover every representable nonzero wavenumber and an explicit
//! low-frequency block χ(2^{−j_min}ξ) holds everything below the lowest
//! annulus, mean mode included. The frequency variable is the physical
//! wavenumber ξ = 2πk/L.

use crate::error::{Error, Result};
use crate::field::{QField, Repr};
use crate::grid::GridSpec;

/// Inner edge of the band annulus: φ(r) = 0 for r ≤ 3/4.
pub const ANNULUS_INNER: f64 = 0.75;

/// Outer edge of the band annulus: φ(r) = 0 for r ≥ 8/3.
pub const ANNULUS_OUTER: f64 = 8.0 / 3.0;

/// φ ≡ 1 on [4/3, 3/2]; a mode there belongs to exactly one band.
pub const PLATEAU_LO: f64 = 4.0 / 3.0;
pub const PLATEAU_HI: f64 = 1.5;

const CHI_ONE_BELOW: f64 = 0.75;
const CHI_ZERO_ABOVE: f64 = 4.0 / 3.0;

/// C∞ step: 0 for t ≤ 0, 1 for t ≥ 1, e^{−1/t}/(e^{−1/t} + e^{−1/(1−t)})
/// in between.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// Low-pass profile: 1 for r ≤ 3/4, 0 for r ≥ 4/3, smooth and decreasing.
pub fn chi(r: f64) -> f64 {
    1.0 - smooth_step((r - CHI_ONE_BELOW) / (CHI_ZERO_ABOVE - CHI_ONE_BELOW))
}

/// Annulus bump φ(r) = χ(r/2) − χ(r), supported in [3/4, 8/3].
pub fn phi(r: f64) -> f64 {
    chi(0.5 * r) - chi(r)
}

/// Precomputed dyadic filter bank for one grid. Immutable after
/// construction and safe to share across workers.
#[derive(Clone, Debug)]
pub struct FilterBank {
    grid: GridSpec,
    j_min: i32,
    j_max: i32,
    kappa_mag: Vec<f64>,
    band_multipliers: Vec<Vec<f64>>,
    low_multiplier: Vec<f64>,
}

impl FilterBank {
    /// Chooses j_min as the lowest band holding any representable nonzero
    /// wavenumber and j_max so the reconstruction multiplier is exactly one
    /// on the whole grid, then precomputes every multiplier table.
    pub fn build(grid: &GridSpec) -> Result<Self> {
        let kappa_mag = grid.kappa_magnitudes();
        let xi_min = grid.min_nonzero_kappa();
        let xi_max = grid.max_kappa();

        // χ(2^{−(j_max+1)}ξ) = 1 for all representable ξ.
        let mut j_max = -60i32;
        while PLATEAU_HI * pow2(j_max) < xi_max {
            j_max += 1;
        }
        // Lowest band whose bump is nonzero somewhere on the grid.
        let mut j_min = (xi_min.log2() - ANNULUS_OUTER.log2()).floor() as i32 - 1;
        'search: loop {
            for &k in &kappa_mag {
                if k > 0.0 && phi(k * pow2(-j_min)) > 0.0 {
                    break 'search;
                }
            }
            j_min += 1;
            if j_min > j_max {
                return Err(Error::InvalidConfig(
                    "grid holds no nonzero wavenumber in any dyadic band".into(),
                ));
            }
        }
        if j_max - j_min + 1 < 2 {
            return Err(Error::InvalidConfig(format!(
                "grid too small to host at least 2 dyadic bands (got [{j_min}, {j_max}])"
            )));
        }

        let band_multipliers = (j_min..=j_max)
            .map(|j| {
                let scale = pow2(-j);
                kappa_mag.iter().map(|&k| phi(k * scale)).collect()
            })
            .collect();
        let low_scale = pow2(-j_min);
        let low_multiplier = kappa_mag.iter().map(|&k| chi(k * low_scale)).collect();

        Ok(FilterBank {
            grid: grid.clone(),
            j_min,
            j_max,
            kappa_mag,
            band_multipliers,
            low_multiplier,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    /// Band indices j_min..=j_max.
    pub fn bands(&self) -> impl Iterator<Item = i32> {
        self.j_min..=self.j_max
    }

    pub fn num_bands(&self) -> usize {
        (self.j_max - self.j_min + 1) as usize
    }

    /// Multiplier table φ(2^{−j}|ξ|) for one band.
    pub fn band_multiplier(&self, j: i32) -> Result<&[f64]> {
        if j < self.j_min || j > self.j_max {
            return Err(Error::BandOutOfRange {
                j,
                j_min: self.j_min,
                j_max: self.j_max,
            });
        }
        Ok(&self.band_multipliers[(j - self.j_min) as usize])
    }

    /// Multiplier table χ(2^{−j_min}|ξ|) of the low-frequency block.
    pub fn low_multiplier(&self) -> &[f64] {
        &self.low_multiplier
    }

    fn ensure_spectral(&self, f: &QField) -> Result<QField> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch(
                "field grid does not match filter bank".into(),
            ));
        }
        match f.repr() {
            Repr::Spectral => Ok(f.clone()),
            Repr::Physical => f.forward_transform(),
        }
    }

    /// Band projection Δ_j f (spectral output). Errors when j is outside
    /// [j_min, j_max].
    pub fn project_band(&self, f: &QField, j: i32) -> Result<QField> {
        let f_hat = self.ensure_spectral(f)?;
        f_hat.apply_multiplier(self.band_multiplier(j)?)
    }

    /// Low-block projection (spectral output).
    pub fn project_low(&self, f: &QField) -> Result<QField> {
        let f_hat = self.ensure_spectral(f)?;
        f_hat.apply_multiplier(&self.low_multiplier)
    }

    /// Full decomposition into the low block plus every band.
    pub fn decompose(&self, f: &QField) -> Result<BandDecomposition> {
        let f_hat = self.ensure_spectral(f)?;
        let low_block = f_hat.apply_multiplier(&self.low_multiplier)?;
        let bands = self
            .bands()
            .map(|j| {
                let field = f_hat.apply_multiplier(self.band_multiplier(j)?)?;
                Ok((j, field))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BandDecomposition {
            grid: self.grid.clone(),
            j_min: self.j_min,
            low_block,
            bands,
        })
    }

    /// Largest deviation of Σ_j φ(2^{−j}|ξ|) from 1 over every representable
    /// nonzero wavenumber, summing every band of the infinite family that
    /// touches the grid (not just the stored range).
    pub fn partition_deviation(&self) -> f64 {
        let j_lo = self.j_min - 8;
        let j_hi = self.j_max + 8;
        let mut worst = 0.0f64;
        for &k in &self.kappa_mag {
            if k == 0.0 {
                continue;
            }
            let mut sum = 0.0;
            for j in j_lo..=j_hi {
                sum += phi(k * pow2(-j));
            }
            worst = worst.max((sum - 1.0).abs());
        }
        worst
    }

    /// (min, max) over modes of Σ_j φ_j² / (Σ_j φ_j)², restricted to modes
    /// the bands actually see. Brackets Σ_j‖Δ_j f‖² against the energy of
    /// the high (non-low-block) part of f.
    pub fn band_frame_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for flat in 0..self.kappa_mag.len() {
            let mut s1 = 0.0;
            let mut s2 = 0.0;
            for table in &self.band_multipliers {
                let w = table[flat];
                s1 += w;
                s2 += w * w;
            }
            if s1 > 0.0 {
                let ratio = s2 / (s1 * s1);
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
        }
        (lo, hi)
    }

    /// (min, max) over all modes of m_low² + Σ_j φ_j². Brackets the s = 0,
    /// p = q = 2 Besov norm squared against ‖f‖²_{L²}.
    pub fn besov_l2_frame_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for flat in 0..self.kappa_mag.len() {
            let mut s2 = self.low_multiplier[flat] * self.low_multiplier[flat];
            for table in &self.band_multipliers {
                s2 += table[flat] * table[flat];
            }
            lo = lo.min(s2);
            hi = hi.max(s2);
        }
        (lo, hi)
    }
}

/// The Littlewood-Paley view of one field: band-filtered copies Δ_j f plus
/// the low-frequency remainder. Bands are stored spectrally.
#[derive(Clone, Debug)]
pub struct BandDecomposition {
    grid: GridSpec,
    j_min: i32,
    low_block: QField,
    bands: Vec<(i32, QField)>,
}

impl BandDecomposition {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn low_block(&self) -> &QField {
        &self.low_block
    }

    /// (j, Δ_j f) pairs in ascending j.
    pub fn bands(&self) -> &[(i32, QField)] {
        &self.bands
    }

    pub fn band(&self, j: i32) -> Option<&QField> {
        self.bands.iter().find(|(jj, _)| *jj == j).map(|(_, f)| f)
    }

    /// low_block + Σ_j Δ_j f (spectral).
    pub fn reconstruct(&self) -> Result<QField> {
        let mut acc = self.low_block.clone();
        for (_, band) in &self.bands {
            acc = acc.add(band)?;
        }
        Ok(acc)
    }
}

fn pow2(j: i32) -> f64 {
    (j as f64).exp2()
}
