//! Multi-dimensional complex FFT plumbing on top of rustfft.
//!
//! Normalization is the Fourier-series convention: the forward pass carries
//! the 1/N factor, so coefficients are mode amplitudes (a unit cosine yields
//! two coefficients of magnitude 1/2) and Parseval reads
//! Σ|f(x)|²/N = Σ|f̂(k)|².

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftDirection, FftPlanner};

type PlanCache = HashMap<(usize, bool), Arc<dyn Fft<f64>>>;

static PLANS: Lazy<Mutex<PlanCache>> = Lazy::new(|| Mutex::new(HashMap::new()));

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut plans = PLANS.lock().unwrap();
    plans
        .entry((len, inverse))
        .or_insert_with(|| {
            let direction = if inverse {
                FftDirection::Inverse
            } else {
                FftDirection::Forward
            };
            FftPlanner::new().plan_fft(len, direction)
        })
        .clone()
}

/// In-place forward DFT over all axes, scaled by 1/N.
pub(crate) fn forward(data: &mut [Complex64], sizes: &[usize]) {
    for axis in 0..sizes.len() {
        transform_axis(data, sizes, axis, false);
    }
    let scale = 1.0 / data.len() as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
}

/// In-place inverse DFT over all axes, unscaled (exact inverse of
/// [`forward`]).
pub(crate) fn inverse(data: &mut [Complex64], sizes: &[usize]) {
    for axis in 0..sizes.len() {
        transform_axis(data, sizes, axis, true);
    }
}

fn transform_axis(data: &mut [Complex64], sizes: &[usize], axis: usize, inv: bool) {
    let n = sizes[axis];
    let fft = plan(n, inv);
    let stride: usize = sizes[axis + 1..].iter().product();
    if stride == 1 {
        // Last axis is contiguous; rustfft processes the buffer chunk-wise.
        fft.process(data);
        return;
    }
    let blocks: usize = sizes[..axis].iter().product();
    let mut lane = vec![Complex64::default(); n];
    for b in 0..blocks {
        let base = b * n * stride;
        for offset in 0..stride {
            for (i, v) in lane.iter_mut().enumerate() {
                *v = data[base + offset + i * stride];
            }
            fft.process(&mut lane);
            for (i, v) in lane.iter().enumerate() {
                data[base + offset + i * stride] = *v;
            }
        }
    }
}
