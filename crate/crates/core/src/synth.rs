//! Deterministic field constructors: Taylor-Green data, seeded random
//! spectra, single modes and white noise. All randomness flows through a
//! seeded ChaCha stream so identical inputs give identical fields.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::field::{advecting_components, QField, Repr, NUM_COMPONENTS};
use crate::grid::GridSpec;
use crate::quat::Quaternion;

/// 2D Taylor-Green velocity u = A(sin(2πx/L)cos(2πy/L), −cos(2πx/L)sin(2πy/L))
/// carried in the (x, y) quaternion components; w = z = 0. Its convective
/// term is a pure gradient, so under Leray projection the field decays by
/// the heat semigroup alone.
pub fn taylor_green_2d(grid: &GridSpec, amplitude: f64) -> Result<QField> {
    if grid.dim() != 2 {
        return Err(Error::InvalidGrid("Taylor-Green data is 2D".into()));
    }
    let lx = grid.domain_length()[0];
    let ly = grid.domain_length()[1];
    let two_pi = 2.0 * std::f64::consts::PI;
    Ok(QField::from_fn_physical(grid, |x| {
        let (sx, cx) = (two_pi * x[0] / lx).sin_cos();
        let (sy, cy) = (two_pi * x[1] / ly).sin_cos();
        Quaternion::new(0.0, amplitude * sx * cy, -amplitude * cx * sy, 0.0)
    }))
}

/// Taylor-Green data plus a divergence-free single-mode perturbation at
/// k = (1, 2), which survives Leray projection and keeps the nonlinearity
/// active. Used for time-order studies and Picard amplitude sweeps.
pub fn perturbed_taylor_green_2d(
    grid: &GridSpec,
    amplitude: f64,
    perturbation: f64,
) -> Result<QField> {
    if grid.dim() != 2 {
        return Err(Error::InvalidGrid("Taylor-Green data is 2D".into()));
    }
    let tg = taylor_green_2d(grid, amplitude)?;
    let lx = grid.domain_length()[0];
    let ly = grid.domain_length()[1];
    let two_pi = 2.0 * std::f64::consts::PI;
    // Stream function ψ = cos(2π(x/Lx + 2y/Ly)); u = (∂yψ, −∂xψ).
    let pert = QField::from_fn_physical(grid, |x| {
        let phase = two_pi * (x[0] / lx + 2.0 * x[1] / ly);
        let s = phase.sin();
        Quaternion::new(
            0.0,
            -perturbation * 2.0 * two_pi / ly * s,
            perturbation * two_pi / lx * s,
            0.0,
        )
    });
    tg.add(&pert)
}

/// Physical field with a single cosine mode in one quaternion component:
/// amplitude·cos(2π k·x/L + phase).
pub fn single_mode(
    grid: &GridSpec,
    component: usize,
    k: &[i64],
    amplitude: f64,
    phase: f64,
) -> Result<QField> {
    if k.len() != grid.dim() {
        return Err(Error::InvalidGrid(format!(
            "mode vector has {} entries for a {}-dimensional grid",
            k.len(),
            grid.dim()
        )));
    }
    if component >= NUM_COMPONENTS {
        return Err(Error::parameter(
            "component",
            format!("{component} out of range"),
        ));
    }
    let lengths = grid.domain_length().to_vec();
    let kvec = k.to_vec();
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut field = QField::zeros(grid, Repr::Physical);
    {
        let comps = field.physical_mut()?;
        let dim = grid.dim();
        let mut idx = [0usize; 3];
        let mut coords = [0.0f64; 3];
        for flat in 0..grid.num_points() {
            grid.unravel(flat, &mut idx[..dim]);
            grid.coords_of(&idx[..dim], &mut coords[..dim]);
            let mut arg = phase;
            for axis in 0..dim {
                arg += two_pi * kvec[axis] as f64 * coords[axis] / lengths[axis];
            }
            comps[component][flat] = amplitude * arg.cos();
        }
    }
    Ok(field)
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Seeded random spectral field supported on |k_m| ≤ max_mode, identical
/// across grid resolutions (the coefficient stream depends only on seed,
/// dimension and max_mode). All four components are populated; the mean
/// mode is zero. Scaled so the L² norm equals `target_l2`.
pub fn random_smooth(grid: &GridSpec, seed: u64, max_mode: i64, target_l2: f64) -> Result<QField> {
    let dim = grid.dim();
    for axis in 0..dim {
        if max_mode > grid.sizes()[axis] as i64 / 2 - 1 {
            return Err(Error::InvalidGrid(format!(
                "max_mode {max_mode} not representable on axis {axis}"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut field = QField::zeros(grid, Repr::Spectral);
    let sizes = grid.sizes().to_vec();
    let range = -max_mode..=max_mode;

    let mut kvec = vec![0i64; dim];
    let total = (2 * max_mode + 1).pow(dim as u32);
    for ordinal in 0..total {
        let mut rem = ordinal;
        let span = 2 * max_mode + 1;
        for v in kvec.iter_mut() {
            *v = -max_mode + rem % span;
            rem /= span;
        }
        // Only the lexicographically positive half draws coefficients; the
        // mirror bin gets the conjugate. Keeps the stream fixed per mode.
        let leading = kvec.iter().find(|&&v| v != 0).copied().unwrap_or(0);
        if leading <= 0 {
            continue;
        }
        let coeffs: Vec<Complex64> = (0..NUM_COMPONENTS)
            .map(|_| Complex64::new(standard_normal(&mut rng), standard_normal(&mut rng)))
            .collect();
        if kvec.iter().any(|v| !range.contains(v)) {
            continue;
        }
        let mut plus = [0usize; 3];
        let mut minus = [0usize; 3];
        for axis in 0..dim {
            let n = sizes[axis] as i64;
            plus[axis] = kvec[axis].rem_euclid(n) as usize;
            minus[axis] = (-kvec[axis]).rem_euclid(n) as usize;
        }
        let pf = grid.flat_of(&plus[..dim]);
        let mf = grid.flat_of(&minus[..dim]);
        let comps = field.spectral_mut()?;
        for (c, coeff) in coeffs.iter().enumerate() {
            comps[c][pf] = *coeff;
            comps[c][mf] = coeff.conj();
        }
    }
    let norm = field.l2_norm();
    if norm > 0.0 {
        field = field.scaled(target_l2 / norm);
    }
    Ok(field)
}

/// Seeded random spectral field with energy across the whole dealiased
/// range, magnitude envelope |κ|^(−spectral_exponent), divergence-free
/// advecting components, zero mean mode, L² norm scaled to `target_l2`.
pub fn random_broadband(
    grid: &GridSpec,
    seed: u64,
    spectral_exponent: f64,
    target_l2: f64,
) -> Result<QField> {
    let dim = grid.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut field = QField::zeros(grid, Repr::Spectral);
    let sizes = grid.sizes().to_vec();
    let cutoffs: Vec<i64> = (0..dim).map(|a| grid.dealias_cutoff(a)).collect();
    let kappa_tables: Vec<Vec<f64>> = (0..dim).map(|a| grid.kappa_axis(a)).collect();

    let mut idx = [0usize; 3];
    for flat in 0..grid.num_points() {
        grid.unravel(flat, &mut idx[..dim]);
        let freqs: Vec<i64> = (0..dim)
            .map(|a| GridSpec::signed_freq(sizes[a], idx[a]))
            .collect();
        let leading = freqs.iter().find(|&&v| v != 0).copied().unwrap_or(0);
        if leading <= 0 {
            continue;
        }
        if freqs.iter().zip(cutoffs.iter()).any(|(f, c)| f.abs() > *c) {
            continue;
        }
        let mut kappa_sq = 0.0;
        for axis in 0..dim {
            let k = kappa_tables[axis][idx[axis]];
            kappa_sq += k * k;
        }
        let envelope = kappa_sq.sqrt().powf(-spectral_exponent);
        let mf = grid.mirror(flat);
        let comps = field.spectral_mut()?;
        for comp in comps.iter_mut() {
            let coeff =
                Complex64::new(standard_normal(&mut rng), standard_normal(&mut rng)) * envelope;
            comp[flat] = coeff;
            comp[mf] = coeff.conj();
        }
    }
    let field = field.leray_project()?;
    let norm = field.l2_norm();
    Ok(if norm > 0.0 {
        field.scaled(target_l2 / norm)
    } else {
        field
    })
}

/// Seeded random field supported on the dyadic plateau shells
/// κ/2^j ∈ [4/3, 3/2] for j in `shells`. Each populated mode belongs to
/// exactly one band (φ ≡ 1 there, all other bumps vanish), every requested
/// shell carries equal energy, and the advecting components are
/// divergence-free. Shells with no representable mode are skipped.
pub fn dyadic_shell_field(
    grid: &GridSpec,
    seed: u64,
    shells: std::ops::RangeInclusive<i32>,
    target_l2: f64,
) -> Result<QField> {
    let dim = grid.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kappa = grid.kappa_magnitudes();
    let sizes = grid.sizes().to_vec();
    let cutoffs: Vec<i64> = (0..dim).map(|a| grid.dealias_cutoff(a)).collect();

    let shell_of = |k: f64| -> Option<i32> {
        for j in shells.clone() {
            let r = k * (-j as f64).exp2();
            if (crate::lp::PLATEAU_LO..=crate::lp::PLATEAU_HI).contains(&r) {
                return Some(j);
            }
        }
        None
    };

    let mut field = QField::zeros(grid, Repr::Spectral);
    let mut shell_energy: std::collections::BTreeMap<i32, f64> = Default::default();
    let mut shell_modes: std::collections::BTreeMap<i32, Vec<usize>> = Default::default();
    let mut idx = [0usize; 3];
    for flat in 0..grid.num_points() {
        grid.unravel(flat, &mut idx[..dim]);
        let freqs: Vec<i64> = (0..dim)
            .map(|a| GridSpec::signed_freq(sizes[a], idx[a]))
            .collect();
        let leading = freqs.iter().find(|&&v| v != 0).copied().unwrap_or(0);
        if leading <= 0 {
            continue;
        }
        if freqs.iter().zip(cutoffs.iter()).any(|(f, c)| f.abs() > *c) {
            continue;
        }
        let Some(j) = shell_of(kappa[flat]) else {
            continue;
        };
        let mf = grid.mirror(flat);
        let comps = field.spectral_mut()?;
        let mut energy = 0.0;
        for comp in comps.iter_mut() {
            let coeff = Complex64::new(standard_normal(&mut rng), standard_normal(&mut rng));
            energy += 2.0 * coeff.norm_sqr();
            comp[flat] = coeff;
            comp[mf] = coeff.conj();
        }
        *shell_energy.entry(j).or_default() += energy;
        shell_modes.entry(j).or_default().push(flat);
    }
    if shell_modes.is_empty() {
        return Err(Error::InvalidGrid(
            "no representable mode in any requested shell".into(),
        ));
    }
    // Equalize shell energies.
    for (j, modes) in &shell_modes {
        let scale = (1.0 / shell_energy[j]).sqrt();
        let comps = field.spectral_mut()?;
        for &flat in modes {
            let mf = grid.mirror(flat);
            for comp in comps.iter_mut() {
                comp[flat] *= scale;
                comp[mf] = comp[flat].conj();
            }
        }
    }
    let field = field.leray_project()?;
    let norm = field.l2_norm();
    Ok(if norm > 0.0 {
        field.scaled(target_l2 / norm)
    } else {
        field
    })
}

/// Physical white noise: iid standard normal samples in every component at
/// every grid point (populates all representable modes, Nyquist included).
pub fn white_noise(grid: &GridSpec, seed: u64) -> QField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut field = QField::zeros(grid, Repr::Physical);
    {
        let comps = field.physical_mut().unwrap();
        for comp in comps.iter_mut() {
            for v in comp.iter_mut() {
                *v = standard_normal(&mut rng);
            }
        }
    }
    field
}

/// Divergence-free variant of [`random_smooth`]: advecting components are
/// Leray-projected, then the whole field is rescaled to `target_l2`.
pub fn random_smooth_divfree(
    grid: &GridSpec,
    seed: u64,
    max_mode: i64,
    target_l2: f64,
) -> Result<QField> {
    let field = random_smooth(grid, seed, max_mode, 1.0)?.leray_project()?;
    let norm = field.l2_norm();
    Ok(if norm > 0.0 {
        field.scaled(target_l2 / norm)
    } else {
        field
    })
}

/// Zeroes every component except the advecting ones (useful when a test
/// wants pure velocity data).
pub fn velocity_only(field: &QField) -> Result<QField> {
    let mut out = field.clone();
    let dim = out.grid().dim();
    let keep = advecting_components(dim);
    match out.repr() {
        Repr::Physical => {
            let comps = out.physical_mut()?;
            for (c, comp) in comps.iter_mut().enumerate() {
                if !keep.contains(&c) {
                    comp.iter_mut().for_each(|v| *v = 0.0);
                }
            }
        }
        Repr::Spectral => {
            let comps = out.spectral_mut()?;
            for (c, comp) in comps.iter_mut().enumerate() {
                if !keep.contains(&c) {
                    comp.iter_mut().for_each(|v| *v = Complex64::default());
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taylor_green_is_divergence_free() {
        let grid = GridSpec::square(64, 2.0 * std::f64::consts::PI).unwrap();
        let tg = taylor_green_2d(&grid, 1.0)
            .unwrap()
            .forward_transform()
            .unwrap();
        assert!(tg.max_abs_divergence().unwrap() < 1e-12);
    }

    #[test]
    fn perturbed_taylor_green_is_divergence_free() {
        let grid = GridSpec::square(32, 2.0 * std::f64::consts::PI).unwrap();
        let f = perturbed_taylor_green_2d(&grid, 1.0, 0.3)
            .unwrap()
            .forward_transform()
            .unwrap();
        assert!(f.max_abs_divergence().unwrap() < 1e-11);
    }

    #[test]
    fn random_smooth_matches_across_resolutions() {
        let g32 = GridSpec::square(32, 1.0).unwrap();
        let g64 = GridSpec::square(64, 1.0).unwrap();
        let f32 = random_smooth(&g32, 42, 6, 1.0).unwrap();
        let f64_ = random_smooth(&g64, 42, 6, 1.0).unwrap();
        // Compare a specific low mode coefficient on both grids.
        let c32 = f32.spectral().unwrap()[1][g32.flat_of(&[3, 2])];
        let c64 = f64_.spectral().unwrap()[1][g64.flat_of(&[3, 2])];
        assert!((c32 - c64).norm() < 1e-12, "{c32} vs {c64}");
        assert!((f32.l2_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_broadband_is_divergence_free_and_normalized() {
        let grid = GridSpec::square(64, 2.0 * std::f64::consts::PI).unwrap();
        let f = random_broadband(&grid, 9, 1.0, 2.0).unwrap();
        assert!(f.max_abs_divergence().unwrap() < 1e-10);
        assert!((f.l2_norm() - 2.0).abs() < 1e-12);
        assert!(f.hermitian_violation() < 1e-12);
    }

    #[test]
    fn seeded_fields_are_reproducible() {
        let grid = GridSpec::square(32, 1.0).unwrap();
        let a = random_broadband(&grid, 7, 1.5, 1.0).unwrap();
        let b = random_broadband(&grid, 7, 1.5, 1.0).unwrap();
        assert_eq!(a.sub(&b).unwrap().l2_norm(), 0.0);
    }
}
