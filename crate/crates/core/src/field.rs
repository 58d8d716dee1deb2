//! Quaternion-valued fields on periodic grids: Fourier transforms, spectral
//! derivatives, Leray projection and two-thirds dealiasing.
//!
//! A field is stored as four scalar component arrays (w, x, y, z) in either
//! physical samples or spectral coefficients, with an explicit representation
//! tag. Physical data are real, so spectral data satisfy the Hermitian
//! symmetry coeff(−k) = conj(coeff(k)) per component.
//!
//! The advecting velocity lives in the first `dim` imaginary components
//! (x, y in 2D; x, y, z in 3D); w is a passively transported scalar and, in
//! 2D, so is z.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::quat::Quaternion;

/// Number of quaternion components.
pub const NUM_COMPONENTS: usize = 4;

/// Component names in storage order.
pub const COMPONENT_NAMES: [&str; NUM_COMPONENTS] = ["w", "x", "y", "z"];

/// Relative tolerance for the Hermitian-symmetry check in
/// [`QField::inverse_transform`].
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Representation tag of a field's data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Repr {
    Physical,
    Spectral,
}

#[derive(Clone, Debug)]
enum Data {
    Physical([Vec<f64>; NUM_COMPONENTS]),
    Spectral([Vec<Complex64>; NUM_COMPONENTS]),
}

/// Quaternion-valued field sampled on a periodic grid.
#[derive(Clone, Debug)]
pub struct QField {
    grid: GridSpec,
    data: Data,
}

/// Component indices of the advecting velocity: the first `dim` imaginary
/// components.
pub fn advecting_components(dim: usize) -> std::ops::Range<usize> {
    1..dim + 1
}

impl QField {
    /// All-zero field in the given representation.
    pub fn zeros(grid: &GridSpec, repr: Repr) -> Self {
        let n = grid.num_points();
        let data = match repr {
            Repr::Physical => Data::Physical(std::array::from_fn(|_| vec![0.0; n])),
            Repr::Spectral => {
                Data::Spectral(std::array::from_fn(|_| vec![Complex64::default(); n]))
            }
        };
        QField {
            grid: grid.clone(),
            data,
        }
    }

    /// Physical field built by evaluating `f` at every grid point.
    pub fn from_fn_physical(grid: &GridSpec, f: impl Fn(&[f64]) -> Quaternion) -> Self {
        let mut field = QField::zeros(grid, Repr::Physical);
        let dim = grid.dim();
        let mut idx = [0usize; 3];
        let mut coords = [0.0f64; 3];
        for flat in 0..grid.num_points() {
            grid.unravel(flat, &mut idx[..dim]);
            grid.coords_of(&idx[..dim], &mut coords[..dim]);
            let q = f(&coords[..dim]);
            let comps = field.physical_mut().unwrap();
            comps[0][flat] = q.w;
            comps[1][flat] = q.x;
            comps[2][flat] = q.y;
            comps[3][flat] = q.z;
        }
        field
    }

    /// Physical field from four component arrays (w, x, y, z order).
    pub fn from_physical(grid: &GridSpec, comps: [Vec<f64>; NUM_COMPONENTS]) -> Result<Self> {
        let n = grid.num_points();
        if comps.iter().any(|c| c.len() != n) {
            return Err(Error::GridMismatch(format!(
                "component length does not match {n} grid points"
            )));
        }
        Ok(QField {
            grid: grid.clone(),
            data: Data::Physical(comps),
        })
    }

    /// Spectral field from four coefficient arrays (w, x, y, z order).
    pub fn from_spectral(grid: &GridSpec, comps: [Vec<Complex64>; NUM_COMPONENTS]) -> Result<Self> {
        let n = grid.num_points();
        if comps.iter().any(|c| c.len() != n) {
            return Err(Error::GridMismatch(format!(
                "component length does not match {n} grid points"
            )));
        }
        Ok(QField {
            grid: grid.clone(),
            data: Data::Spectral(comps),
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn repr(&self) -> Repr {
        match self.data {
            Data::Physical(_) => Repr::Physical,
            Data::Spectral(_) => Repr::Spectral,
        }
    }

    /// Physical component arrays; error if the field is spectral.
    pub fn physical(&self) -> Result<&[Vec<f64>; NUM_COMPONENTS]> {
        match &self.data {
            Data::Physical(c) => Ok(c),
            Data::Spectral(_) => Err(Error::Representation {
                expected: Repr::Physical,
                found: Repr::Spectral,
            }),
        }
    }

    pub fn physical_mut(&mut self) -> Result<&mut [Vec<f64>; NUM_COMPONENTS]> {
        match &mut self.data {
            Data::Physical(c) => Ok(c),
            Data::Spectral(_) => Err(Error::Representation {
                expected: Repr::Physical,
                found: Repr::Spectral,
            }),
        }
    }

    /// Spectral component arrays; error if the field is physical.
    pub fn spectral(&self) -> Result<&[Vec<Complex64>; NUM_COMPONENTS]> {
        match &self.data {
            Data::Spectral(c) => Ok(c),
            Data::Physical(_) => Err(Error::Representation {
                expected: Repr::Spectral,
                found: Repr::Physical,
            }),
        }
    }

    pub fn spectral_mut(&mut self) -> Result<&mut [Vec<Complex64>; NUM_COMPONENTS]> {
        match &mut self.data {
            Data::Spectral(c) => Ok(c),
            Data::Physical(_) => Err(Error::Representation {
                expected: Repr::Spectral,
                found: Repr::Physical,
            }),
        }
    }

    /// Quaternion value at a flat physical index.
    pub fn value_at(&self, flat: usize) -> Result<Quaternion> {
        let c = self.physical()?;
        Ok(Quaternion::new(
            c[0][flat], c[1][flat], c[2][flat], c[3][flat],
        ))
    }

    /// Component-wise discrete Fourier transform (Fourier-series
    /// normalization: a unit cosine gives two coefficients of magnitude 1/2).
    pub fn forward_transform(&self) -> Result<QField> {
        let comps = self.physical()?;
        let sizes = self.grid.sizes().to_vec();
        let spectral: Vec<Vec<Complex64>> = comps
            .par_iter()
            .map(|c| {
                let mut buf: Vec<Complex64> = c.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                crate::fft::forward(&mut buf, &sizes);
                buf
            })
            .collect();
        let mut it = spectral.into_iter();
        Ok(QField {
            grid: self.grid.clone(),
            data: Data::Spectral(std::array::from_fn(|_| it.next().unwrap())),
        })
    }

    /// Exact inverse of [`Self::forward_transform`]. Fails if the
    /// coefficients violate Hermitian symmetry beyond [`HERMITIAN_TOL`]
    /// (relative to the largest coefficient magnitude).
    pub fn inverse_transform(&self) -> Result<QField> {
        let comps = self.spectral()?;
        let violation = self.hermitian_violation();
        if violation > HERMITIAN_TOL {
            return Err(Error::HermitianSymmetry {
                max_violation: violation,
                tolerance: HERMITIAN_TOL,
            });
        }
        let sizes = self.grid.sizes().to_vec();
        let physical: Vec<Vec<f64>> = comps
            .par_iter()
            .map(|c| {
                let mut buf = c.clone();
                crate::fft::inverse(&mut buf, &sizes);
                buf.iter().map(|v| v.re).collect()
            })
            .collect();
        let mut it = physical.into_iter();
        Ok(QField {
            grid: self.grid.clone(),
            data: Data::Physical(std::array::from_fn(|_| it.next().unwrap())),
        })
    }

    /// Inverse transform without the symmetry check, for fields built by
    /// real multipliers from already-validated spectral data (their absolute
    /// asymmetry stays at the parent's rounding level, but near-empty bands
    /// would fail a check relative to their own scale).
    pub(crate) fn inverse_transform_unchecked(&self) -> Result<QField> {
        let comps = self.spectral()?;
        let sizes = self.grid.sizes().to_vec();
        let physical: Vec<Vec<f64>> = comps
            .par_iter()
            .map(|c| {
                let mut buf = c.clone();
                crate::fft::inverse(&mut buf, &sizes);
                buf.iter().map(|v| v.re).collect()
            })
            .collect();
        let mut it = physical.into_iter();
        Ok(QField {
            grid: self.grid.clone(),
            data: Data::Physical(std::array::from_fn(|_| it.next().unwrap())),
        })
    }

    /// Largest deviation from coeff(−k) = conj(coeff(k)), relative to the
    /// largest coefficient magnitude. Zero for physical fields.
    pub fn hermitian_violation(&self) -> f64 {
        let comps = match &self.data {
            Data::Spectral(c) => c,
            Data::Physical(_) => return 0.0,
        };
        let mut max_coeff = 0.0f64;
        let mut max_dev = 0.0f64;
        for c in comps.iter() {
            for (flat, v) in c.iter().enumerate() {
                max_coeff = max_coeff.max(v.norm());
                let mirrored = c[self.grid.mirror(flat)];
                max_dev = max_dev.max((mirrored - v.conj()).norm());
            }
        }
        if max_coeff == 0.0 {
            0.0
        } else {
            max_dev / max_coeff
        }
    }

    /// Spectral derivative along one axis: multiplication by i·2πk/L with
    /// the Nyquist bin zeroed.
    pub fn gradient_axis(&self, axis: usize) -> Result<QField> {
        let comps = self.spectral()?;
        let kappa = self.grid.kappa_axis_deriv(axis);
        let dim = self.grid.dim();
        let mut out = QField::zeros(&self.grid, Repr::Spectral);
        let mut idx = [0usize; 3];
        for c in 0..NUM_COMPONENTS {
            let dst = &mut out.spectral_mut()?[c];
            for (flat, v) in comps[c].iter().enumerate() {
                self.grid.unravel(flat, &mut idx[..dim]);
                let k = kappa[idx[axis]];
                dst[flat] = Complex64::new(-k * v.im, k * v.re);
            }
        }
        Ok(out)
    }

    /// All spatial derivatives, one field per axis.
    pub fn gradient(&self) -> Result<Vec<QField>> {
        (0..self.grid.dim())
            .map(|a| self.gradient_axis(a))
            .collect()
    }

    /// Projects the advecting components onto divergence-free fields:
    /// û ← û − k(k·û)/|k|² for every k ≠ 0. Idempotent; w (and z in 2D)
    /// pass through unchanged.
    pub fn leray_project(&self) -> Result<QField> {
        let _ = self.spectral()?;
        let mut out = self.clone();
        let dim = self.grid.dim();
        let tables: Vec<Vec<f64>> = (0..dim).map(|a| self.grid.kappa_axis_deriv(a)).collect();
        let grid = self.grid.clone();
        let comps = match &mut out.data {
            Data::Spectral(c) => c,
            Data::Physical(_) => unreachable!(),
        };
        let mut idx = [0usize; 3];
        let mut kv = [0.0f64; 3];
        for flat in 0..grid.num_points() {
            grid.unravel(flat, &mut idx[..dim]);
            let mut k2 = 0.0;
            for axis in 0..dim {
                kv[axis] = tables[axis][idx[axis]];
                k2 += kv[axis] * kv[axis];
            }
            if k2 == 0.0 {
                continue;
            }
            let mut dot = Complex64::default();
            for (axis, comp) in advecting_components(dim).enumerate() {
                dot += comps[comp][flat] * kv[axis];
            }
            let scale = dot / k2;
            for (axis, comp) in advecting_components(dim).enumerate() {
                comps[comp][flat] -= scale * kv[axis];
            }
        }
        Ok(out)
    }

    /// Two-thirds rule: zeroes every coefficient with any |k_m| above
    /// floor(size_m/3).
    pub fn dealias(&self) -> Result<QField> {
        let _ = self.spectral()?;
        let mut out = self.clone();
        let dim = self.grid.dim();
        let cutoffs: Vec<i64> = (0..dim).map(|a| self.grid.dealias_cutoff(a)).collect();
        let sizes = self.grid.sizes().to_vec();
        let grid = self.grid.clone();
        let comps = match &mut out.data {
            Data::Spectral(c) => c,
            Data::Physical(_) => unreachable!(),
        };
        let mut idx = [0usize; 3];
        for flat in 0..grid.num_points() {
            grid.unravel(flat, &mut idx[..dim]);
            let truncated = (0..dim)
                .any(|axis| GridSpec::signed_freq(sizes[axis], idx[axis]).abs() > cutoffs[axis]);
            if truncated {
                for comp in comps.iter_mut() {
                    comp[flat] = Complex64::default();
                }
            }
        }
        Ok(out)
    }

    /// Multiplies every mode of a spectral field by a real weight table.
    pub fn apply_multiplier(&self, weights: &[f64]) -> Result<QField> {
        let comps = self.spectral()?;
        if weights.len() != self.grid.num_points() {
            return Err(Error::GridMismatch(
                "multiplier table does not match grid".into(),
            ));
        }
        let mut out = QField::zeros(&self.grid, Repr::Spectral);
        for c in 0..NUM_COMPONENTS {
            let dst = &mut out.spectral_mut()?[c];
            for (flat, v) in comps[c].iter().enumerate() {
                dst[flat] = v * weights[flat];
            }
        }
        Ok(out)
    }

    /// Squared L² norm over all four components (grid quadrature in physical
    /// space, Parseval sum in spectral space — the two agree).
    pub fn l2_norm_sq(&self) -> f64 {
        match &self.data {
            Data::Physical(comps) => {
                let cell = self.grid.cell_volume();
                comps
                    .iter()
                    .map(|c| c.iter().map(|v| v * v).sum::<f64>())
                    .sum::<f64>()
                    * cell
            }
            Data::Spectral(comps) => {
                let vol = self.grid.volume();
                comps
                    .iter()
                    .map(|c| c.iter().map(|v| v.norm_sqr()).sum::<f64>())
                    .sum::<f64>()
                    * vol
            }
        }
    }

    /// L² norm over all four components.
    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// Squared L² norm of a single component.
    pub fn component_l2_norm_sq(&self, c: usize) -> f64 {
        match &self.data {
            Data::Physical(comps) => {
                comps[c].iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()
            }
            Data::Spectral(comps) => {
                comps[c].iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.volume()
            }
        }
    }

    /// Total energy ½‖q‖²_{L²} over all four components.
    pub fn energy(&self) -> f64 {
        0.5 * self.l2_norm_sq()
    }

    /// Squared L² norm of the full gradient, computed spectrally as
    /// Σ_k |κ̃(k)|² |coeff|² · V with the Nyquist-zeroed wavenumbers.
    pub fn grad_l2_norm_sq(&self) -> Result<f64> {
        let comps = self.spectral()?;
        let dim = self.grid.dim();
        let tables: Vec<Vec<f64>> = (0..dim).map(|a| self.grid.kappa_axis_deriv(a)).collect();
        let mut idx = [0usize; 3];
        let mut sum = 0.0;
        for flat in 0..self.grid.num_points() {
            self.grid.unravel(flat, &mut idx[..dim]);
            let mut k2 = 0.0;
            for axis in 0..dim {
                let k = tables[axis][idx[axis]];
                k2 += k * k;
            }
            if k2 == 0.0 {
                continue;
            }
            let mag: f64 = comps.iter().map(|c| c[flat].norm_sqr()).sum();
            sum += k2 * mag;
        }
        Ok(sum * self.grid.volume())
    }

    /// Largest |k̃·û(k)| over all modes: the spectral divergence of the
    /// advecting components.
    pub fn max_abs_divergence(&self) -> Result<f64> {
        let comps = self.spectral()?;
        let dim = self.grid.dim();
        let tables: Vec<Vec<f64>> = (0..dim).map(|a| self.grid.kappa_axis_deriv(a)).collect();
        let mut idx = [0usize; 3];
        let mut max_div = 0.0f64;
        for flat in 0..self.grid.num_points() {
            self.grid.unravel(flat, &mut idx[..dim]);
            let mut div = Complex64::default();
            for (axis, comp) in advecting_components(dim).enumerate() {
                div += comps[comp][flat] * tables[axis][idx[axis]];
            }
            max_div = max_div.max(div.norm());
        }
        Ok(max_div)
    }

    /// L² inner product ⟨a, b⟩ summed over components. Both fields must be
    /// in the same representation.
    pub fn inner_product(&self, other: &QField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("inner product across grids".into()));
        }
        match (&self.data, &other.data) {
            (Data::Physical(a), Data::Physical(b)) => {
                let cell = self.grid.cell_volume();
                Ok(a.iter()
                    .zip(b.iter())
                    .map(|(ca, cb)| ca.iter().zip(cb.iter()).map(|(x, y)| x * y).sum::<f64>())
                    .sum::<f64>()
                    * cell)
            }
            (Data::Spectral(a), Data::Spectral(b)) => {
                let vol = self.grid.volume();
                Ok(a.iter()
                    .zip(b.iter())
                    .map(|(ca, cb)| {
                        ca.iter()
                            .zip(cb.iter())
                            .map(|(x, y)| (x * y.conj()).re)
                            .sum::<f64>()
                    })
                    .sum::<f64>()
                    * vol)
            }
            _ => Err(Error::Representation {
                expected: self.repr(),
                found: other.repr(),
            }),
        }
    }

    /// Elementwise sum; fields must share grid and representation.
    pub fn add(&self, other: &QField) -> Result<QField> {
        self.zip_with(other, |a, b| a + b, |a, b| a + b)
    }

    /// Elementwise difference; fields must share grid and representation.
    pub fn sub(&self, other: &QField) -> Result<QField> {
        self.zip_with(other, |a, b| a - b, |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &QField,
        fr: impl Fn(f64, f64) -> f64,
        fc: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<QField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("elementwise op across grids".into()));
        }
        match (&self.data, &other.data) {
            (Data::Physical(a), Data::Physical(b)) => {
                let comps = std::array::from_fn(|c| {
                    a[c].iter()
                        .zip(b[c].iter())
                        .map(|(x, y)| fr(*x, *y))
                        .collect()
                });
                Ok(QField {
                    grid: self.grid.clone(),
                    data: Data::Physical(comps),
                })
            }
            (Data::Spectral(a), Data::Spectral(b)) => {
                let comps = std::array::from_fn(|c| {
                    a[c].iter()
                        .zip(b[c].iter())
                        .map(|(x, y)| fc(*x, *y))
                        .collect()
                });
                Ok(QField {
                    grid: self.grid.clone(),
                    data: Data::Spectral(comps),
                })
            }
            _ => Err(Error::Representation {
                expected: self.repr(),
                found: other.repr(),
            }),
        }
    }

    /// Field scaled by a real constant.
    pub fn scaled(&self, a: f64) -> QField {
        let mut out = self.clone();
        match &mut out.data {
            Data::Physical(comps) => {
                for c in comps.iter_mut() {
                    for v in c.iter_mut() {
                        *v *= a;
                    }
                }
            }
            Data::Spectral(comps) => {
                for c in comps.iter_mut() {
                    for v in c.iter_mut() {
                        *v *= a;
                    }
                }
            }
        }
        out
    }

    /// True when every stored value is finite.
    pub fn is_finite(&self) -> bool {
        match &self.data {
            Data::Physical(comps) => comps.iter().all(|c| c.iter().all(|v| v.is_finite())),
            Data::Spectral(comps) => comps
                .iter()
                .all(|c| c.iter().all(|v| v.re.is_finite() && v.im.is_finite())),
        }
    }

    /// Largest pointwise quaternion magnitude (physical representation).
    pub fn max_magnitude(&self) -> Result<f64> {
        let comps = self.physical()?;
        let mut max = 0.0f64;
        for flat in 0..self.grid.num_points() {
            let sq: f64 = comps.iter().map(|c| c[flat] * c[flat]).sum();
            max = max.max(sq);
        }
        Ok(max.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn grid64() -> GridSpec {
        GridSpec::square(64, 1.0).unwrap()
    }

    #[test]
    fn constant_field_transforms_to_dc_mode() {
        let grid = grid64();
        let c = Quaternion::new(2.0, -1.0, 0.5, 3.0);
        let f = QField::from_fn_physical(&grid, |_| c);
        let f_hat = f.forward_transform().unwrap();
        let comps = f_hat.spectral().unwrap();
        for (ci, &expect) in [c.w, c.x, c.y, c.z].iter().enumerate() {
            assert!((comps[ci][0].re - expect).abs() < 1e-12);
            assert!(comps[ci][0].im.abs() < 1e-14);
            let off_dc: f64 = comps[ci][1..].iter().map(|v| v.norm()).sum();
            assert!(off_dc < 1e-12, "component {ci} leaked off DC: {off_dc:.3e}");
        }
    }

    #[test]
    fn cosine_gives_two_half_coefficients() {
        let grid = grid64();
        let f = QField::from_fn_physical(&grid, |x| {
            Quaternion::new((2.0 * std::f64::consts::PI * x[0]).cos(), 0.0, 0.0, 0.0)
        });
        let f_hat = f.forward_transform().unwrap();
        let comps = f_hat.spectral().unwrap();
        let plus = comps[0][grid.flat_of(&[1, 0])];
        let minus = comps[0][grid.flat_of(&[63, 0])];
        assert!((plus.norm() - 0.5).abs() < 1e-12);
        assert!((minus.norm() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn parseval_on_random_field() {
        let grid = grid64();
        let f = synth::random_smooth(&grid, 11, 10, 1.0).unwrap();
        let f_phys = f.inverse_transform().unwrap();
        let phys_sum: f64 = f_phys
            .physical()
            .unwrap()
            .iter()
            .map(|c| c.iter().map(|v| v * v).sum::<f64>())
            .sum();
        let spec_sum: f64 = f
            .spectral()
            .unwrap()
            .iter()
            .map(|c| c.iter().map(|v| v.norm_sqr()).sum::<f64>())
            .sum();
        let lhs = phys_sum / grid.num_points() as f64;
        assert!(
            (lhs - spec_sum).abs() <= 1e-12 * spec_sum,
            "Parseval violated: {lhs} vs {spec_sum}"
        );
    }

    #[test]
    fn roundtrip_reproduces_field() {
        let grid = grid64();
        let f = synth::random_smooth(&grid, 3, 12, 1.0)
            .unwrap()
            .inverse_transform()
            .unwrap();
        let back = f.forward_transform().unwrap().inverse_transform().unwrap();
        let diff = f.sub(&back).unwrap().l2_norm();
        assert!(diff <= 1e-12 * f.l2_norm());
    }

    #[test]
    fn zero_spectral_inverts_to_zero() {
        let grid = grid64();
        let z = QField::zeros(&grid, Repr::Spectral);
        let f = z.inverse_transform().unwrap();
        assert_eq!(f.l2_norm(), 0.0);
    }

    #[test]
    fn broken_symmetry_is_rejected() {
        let grid = grid64();
        let mut f = synth::random_smooth(&grid, 5, 8, 1.0).unwrap();
        f.spectral_mut().unwrap()[1][grid.flat_of(&[3, 5])] += Complex64::new(0.5, 0.25);
        let err = f.inverse_transform().unwrap_err();
        assert!(matches!(err, Error::HermitianSymmetry { .. }), "{err}");
    }

    #[test]
    fn wrong_representation_errors() {
        let grid = grid64();
        let phys = QField::zeros(&grid, Repr::Physical);
        assert!(matches!(
            phys.inverse_transform().unwrap_err(),
            Error::Representation { .. }
        ));
        let spec = QField::zeros(&grid, Repr::Spectral);
        assert!(matches!(
            spec.forward_transform().unwrap_err(),
            Error::Representation { .. }
        ));
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let grid = grid64();
        let f = QField::from_fn_physical(&grid, |_| Quaternion::new(1.0, 2.0, 3.0, 4.0))
            .forward_transform()
            .unwrap();
        for g in f.gradient().unwrap() {
            assert!(g.l2_norm() < 1e-12);
        }
    }

    #[test]
    fn gradient_of_sine_is_scaled_cosine() {
        let grid = grid64();
        let two_pi = 2.0 * std::f64::consts::PI;
        let f = QField::from_fn_physical(&grid, |x| {
            Quaternion::new((two_pi * x[0]).sin(), 0.0, 0.0, 0.0)
        })
        .forward_transform()
        .unwrap();
        let df = f.gradient_axis(0).unwrap().inverse_transform().unwrap();
        let mut idx = [0usize; 3];
        let mut coords = [0.0f64; 3];
        let mut max_err = 0.0f64;
        for flat in 0..grid.num_points() {
            grid.unravel(flat, &mut idx[..2]);
            grid.coords_of(&idx[..2], &mut coords[..2]);
            let expect = two_pi * (two_pi * coords[0]).cos();
            max_err = max_err.max((df.physical().unwrap()[0][flat] - expect).abs());
        }
        assert!(
            max_err <= 1e-12 * two_pi,
            "max gradient error {max_err:.3e}"
        );
    }

    #[test]
    fn gradient_norm_identity_for_single_mode() {
        let grid = grid64();
        let two_pi = 2.0 * std::f64::consts::PI;
        let f = QField::from_fn_physical(&grid, |x| {
            Quaternion::new((two_pi * x[0]).sin(), 0.0, 0.0, 0.0)
        })
        .forward_transform()
        .unwrap();
        let grad_sq = f.grad_l2_norm_sq().unwrap();
        let expect = two_pi * two_pi * f.l2_norm_sq();
        assert!(
            (grad_sq - expect).abs() <= 1e-10 * expect,
            "{grad_sq} vs {expect}"
        );
    }

    #[test]
    fn leray_annihilates_gradient_fields() {
        let grid = grid64();
        let two_pi = 2.0 * std::f64::consts::PI;
        // φ = cos(2πx)sin(4πy); the test field carries ∇φ in (x, y).
        let f = QField::from_fn_physical(&grid, |x| {
            let dx = -two_pi * (two_pi * x[0]).sin() * (2.0 * two_pi * x[1]).sin();
            let dy = 2.0 * two_pi * (two_pi * x[0]).cos() * (2.0 * two_pi * x[1]).cos();
            Quaternion::new(0.0, dx, dy, 0.0)
        })
        .forward_transform()
        .unwrap();
        let projected = f.leray_project().unwrap();
        assert!(
            projected.l2_norm() <= 1e-12 * f.l2_norm(),
            "gradient survived projection: {:.3e}",
            projected.l2_norm()
        );
    }

    #[test]
    fn leray_is_idempotent_and_kills_divergence() {
        let grid = grid64();
        let f = synth::random_smooth(&grid, 17, 15, 1.0).unwrap();
        let p1 = f.leray_project().unwrap();
        let p2 = p1.leray_project().unwrap();
        let drift = p1.sub(&p2).unwrap().l2_norm();
        assert!(drift <= 1e-12 * p1.l2_norm().max(1e-30));
        assert!(p1.max_abs_divergence().unwrap() <= 1e-10);
        // A divergence-free field passes through unchanged.
        let again = p1.sub(&p1.leray_project().unwrap()).unwrap().l2_norm();
        assert!(again <= 1e-12 * p1.l2_norm().max(1e-30));
    }

    #[test]
    fn dealias_zeroes_only_high_modes() {
        let grid = grid64();
        let cutoff = grid.dealias_cutoff(0);
        assert_eq!(cutoff, 21);
        let mut low = QField::zeros(&grid, Repr::Spectral);
        low.spectral_mut().unwrap()[0][grid.flat_of(&[5, 7])] = Complex64::new(1.0, 0.0);
        let kept = low.dealias().unwrap();
        assert_eq!(kept.spectral().unwrap()[0][grid.flat_of(&[5, 7])].re, 1.0);

        let mut high = QField::zeros(&grid, Repr::Spectral);
        high.spectral_mut().unwrap()[2][grid.flat_of(&[30, 2])] = Complex64::new(1.0, 0.0);
        let gone = high.dealias().unwrap();
        assert_eq!(gone.l2_norm(), 0.0);
    }

    #[test]
    fn dealias_never_increases_energy() {
        let grid = grid64();
        let f = synth::random_broadband(&grid, 23, 1.0, 1.0).unwrap();
        let before = f.l2_norm_sq();
        let after = f.dealias().unwrap().l2_norm_sq();
        assert!(after <= before * (1.0 + 1e-15));
        // Equality only when nothing was truncated.
        let trimmed = f.dealias().unwrap();
        let again = trimmed.dealias().unwrap().l2_norm_sq();
        assert!((again - after).abs() <= 1e-15 * after.max(1e-300));
    }
}
