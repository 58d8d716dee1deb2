//! Benchmark-only crate; see `benches/hot_paths.rs`. Shared setup helpers
//! live here so the bench target stays small.

use quatflow_core::besov::BesovParams;
use quatflow_core::grid::GridSpec;
use quatflow_core::solver::{ForcingSpec, NonlinearityMode, SimConfig};

/// Standard 2D benchmark configuration (64², L = 2π).
pub fn bench_config(n: usize) -> SimConfig {
    let two_pi = 2.0 * std::f64::consts::PI;
    SimConfig {
        grid: GridSpec::square(n, two_pi).expect("valid bench grid"),
        nu: 0.1,
        t_end: 0.1,
        dt: 1e-3,
        nonlinearity_mode: NonlinearityMode::Advective,
        linear_only: false,
        forcing: ForcingSpec::None,
        diag_every: 1,
        besov: BesovParams::new(1.0, 2.0, 2.0).expect("valid besov params"),
        r_exponent: 2.0,
    }
}
