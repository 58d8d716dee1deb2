//! Periodic grid description and wavenumber bookkeeping.
//!
//! Storage is row-major with the last axis contiguous. FFT bins follow the
//! standard order 0, 1, …, N/2, −N/2+1, …, −1; the physical wavenumber of
//! integer frequency k on an axis of period L is 2πk/L.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periodic n-dimensional sampling grid, n ∈ {2, 3}, power-of-two sizes ≥ 8.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    sizes: Vec<usize>,
    domain_length: Vec<f64>,
}

impl GridSpec {
    /// Validates and builds a grid. `sizes` and `domain_length` must both
    /// have length 2 or 3; every size must be a power of two ≥ 8.
    pub fn new(sizes: &[usize], domain_length: &[f64]) -> Result<Self> {
        let dim = sizes.len();
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 2 or 3, got {dim}"
            )));
        }
        if domain_length.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "{} domain lengths for {} axes",
                domain_length.len(),
                dim
            )));
        }
        for (axis, &n) in sizes.iter().enumerate() {
            if n < 8 || !n.is_power_of_two() {
                return Err(Error::InvalidGrid(format!(
                    "size {n} on axis {axis} is not a power of two >= 8"
                )));
            }
        }
        for (axis, &l) in domain_length.iter().enumerate() {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!(
                    "domain length {l} on axis {axis} must be finite and positive"
                )));
            }
        }
        Ok(GridSpec {
            dim,
            sizes: sizes.to_vec(),
            domain_length: domain_length.to_vec(),
        })
    }

    /// 2D grid with n×n points and equal period `length` on both axes.
    pub fn square(n: usize, length: f64) -> Result<Self> {
        GridSpec::new(&[n, n], &[length, length])
    }

    /// 3D grid with n³ points and equal period `length` on all axes.
    pub fn cube(n: usize, length: f64) -> Result<Self> {
        GridSpec::new(&[n, n, n], &[length, length, length])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn domain_length(&self) -> &[f64] {
        &self.domain_length
    }

    /// Total number of grid points.
    pub fn num_points(&self) -> usize {
        self.sizes.iter().product()
    }

    /// Volume of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.num_points() as f64
    }

    /// Volume of the full periodic box.
    pub fn volume(&self) -> f64 {
        self.domain_length.iter().product()
    }

    /// Signed integer frequency of FFT bin `idx` on an axis of `size` bins.
    pub fn signed_freq(size: usize, idx: usize) -> i64 {
        if idx <= size / 2 {
            idx as i64
        } else {
            idx as i64 - size as i64
        }
    }

    /// Physical wavenumbers 2πk/L for every bin of one axis.
    pub fn kappa_axis(&self, axis: usize) -> Vec<f64> {
        let n = self.sizes[axis];
        let scale = 2.0 * std::f64::consts::PI / self.domain_length[axis];
        (0..n)
            .map(|i| Self::signed_freq(n, i) as f64 * scale)
            .collect()
    }

    /// Like [`Self::kappa_axis`] but with the Nyquist bin zeroed, the
    /// convention used for derivatives and divergence (the Nyquist mode has
    /// no well-defined odd derivative on a real grid).
    pub fn kappa_axis_deriv(&self, axis: usize) -> Vec<f64> {
        let n = self.sizes[axis];
        let mut kappa = self.kappa_axis(axis);
        kappa[n / 2] = 0.0;
        kappa
    }

    /// Row-major strides.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.dim];
        for axis in (0..self.dim.saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1] * self.sizes[axis + 1];
        }
        strides
    }

    /// Multi-index of a flat index, written into `out`.
    pub fn unravel(&self, flat: usize, out: &mut [usize]) {
        let mut rem = flat;
        for axis in (0..self.dim).rev() {
            out[axis] = rem % self.sizes[axis];
            rem /= self.sizes[axis];
        }
    }

    /// Flat index of a multi-index.
    pub fn flat_of(&self, multi: &[usize]) -> usize {
        let mut flat = 0;
        for axis in 0..self.dim {
            flat = flat * self.sizes[axis] + multi[axis];
        }
        flat
    }

    /// Flat index of the mirrored mode −k.
    pub fn mirror(&self, flat: usize) -> usize {
        let mut idx = [0usize; 3];
        self.unravel(flat, &mut idx[..self.dim]);
        let mut out = 0;
        for axis in 0..self.dim {
            let n = self.sizes[axis];
            let m = if idx[axis] == 0 { 0 } else { n - idx[axis] };
            out = out * n + m;
        }
        out
    }

    /// |2πk/L| for every mode, flat order.
    pub fn kappa_magnitudes(&self) -> Vec<f64> {
        let tables: Vec<Vec<f64>> = (0..self.dim).map(|a| self.kappa_axis(a)).collect();
        let mut out = vec![0.0; self.num_points()];
        let mut idx = [0usize; 3];
        for (flat, v) in out.iter_mut().enumerate() {
            self.unravel(flat, &mut idx[..self.dim]);
            let mut sq = 0.0;
            for axis in 0..self.dim {
                let k = tables[axis][idx[axis]];
                sq += k * k;
            }
            *v = sq.sqrt();
        }
        out
    }

    /// Largest wavenumber magnitude representable on the grid (corner mode).
    pub fn max_kappa(&self) -> f64 {
        let mut sq = 0.0;
        for axis in 0..self.dim {
            let k = std::f64::consts::PI * self.sizes[axis] as f64 / self.domain_length[axis];
            sq += k * k;
        }
        sq.sqrt()
    }

    /// Smallest nonzero wavenumber magnitude on the grid.
    pub fn min_nonzero_kappa(&self) -> f64 {
        (0..self.dim)
            .map(|a| 2.0 * std::f64::consts::PI / self.domain_length[a])
            .fold(f64::INFINITY, f64::min)
    }

    /// Two-thirds dealiasing cutoff for one axis: modes with |k| above this
    /// are zeroed.
    pub fn dealias_cutoff(&self, axis: usize) -> i64 {
        (self.sizes[axis] / 3) as i64
    }

    /// Physical coordinates of a grid point, written into `out`.
    pub fn coords_of(&self, multi: &[usize], out: &mut [f64]) {
        for axis in 0..self.dim {
            out[axis] = self.domain_length[axis] * multi[axis] as f64 / self.sizes[axis] as f64;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::new(&[64], &[1.0]).is_err());
        assert!(GridSpec::new(&[64, 64, 64, 64], &[1.0; 4]).is_err());
        assert!(GridSpec::new(&[48, 64], &[1.0, 1.0]).is_err());
        assert!(GridSpec::new(&[4, 4], &[1.0, 1.0]).is_err());
        assert!(GridSpec::new(&[64, 64], &[1.0]).is_err());
        assert!(GridSpec::new(&[64, 64], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn freq_order_matches_fft_convention() {
        let n = 8;
        let freqs: Vec<i64> = (0..n).map(|i| GridSpec::signed_freq(n, i)).collect();
        assert_eq!(freqs, vec![0, 1, 2, 3, 4, -3, -2, -1]);
    }

    #[test]
    fn mirror_is_involutive() {
        let grid = GridSpec::new(&[8, 16], &[1.0, 2.0]).unwrap();
        for flat in 0..grid.num_points() {
            assert_eq!(grid.mirror(grid.mirror(flat)), flat);
        }
    }

    #[test]
    fn mirror_negates_frequency() {
        let grid = GridSpec::new(&[8, 8], &[1.0, 1.0]).unwrap();
        let mut idx = [0usize; 3];
        let mut midx = [0usize; 3];
        for flat in 0..grid.num_points() {
            grid.unravel(flat, &mut idx[..2]);
            grid.unravel(grid.mirror(flat), &mut midx[..2]);
            for axis in 0..2 {
                let k = GridSpec::signed_freq(8, idx[axis]);
                let mk = GridSpec::signed_freq(8, midx[axis]);
                // Nyquist is its own mirror.
                if k == 4 {
                    assert_eq!(mk, 4);
                } else {
                    assert_eq!(mk, -k);
                }
            }
        }
    }

    #[test]
    fn strides_and_unravel_roundtrip() {
        let grid = GridSpec::new(&[8, 16, 32], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(grid.strides(), vec![512, 32, 1]);
        let mut idx = [0usize; 3];
        for flat in [0usize, 1, 31, 32, 511, 512, 4095] {
            grid.unravel(flat, &mut idx);
            assert_eq!(grid.flat_of(&idx), flat);
        }
    }

    #[test]
    fn nyquist_zeroed_in_deriv_table() {
        let grid = GridSpec::new(&[8, 8], &[1.0, 1.0]).unwrap();
        let kappa = grid.kappa_axis_deriv(0);
        assert_eq!(kappa[4], 0.0);
        assert!(kappa[1] > 0.0 && kappa[7] < 0.0);
    }
}
