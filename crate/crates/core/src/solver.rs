//! Mild-solution time evolution: exact spectral heat semigroup, dealiased
//! quaternionic nonlinear term, Leray projection, forcing, Duhamel-based
//! stepping and a Picard fixed-point mode.
//!
//! One step advances the integral form
//! q̂(t+dt) = E(dt)q̂(t) + ∫₀^{dt} E(dt−τ)·P[N(q̂) + f̂](t+τ) dτ
//! with E the heat semigroup and P the Leray projection, approximating the
//! integral by an exponential predictor-corrector (Heun in the
//! integrating-factor frame, second order, unconditionally stable in the
//! viscous term).

use serde::{Deserialize, Serialize};

use crate::besov::{besov_norm_of_decomposition, BesovParams};
use crate::diagnostics::{
    band_energy, besov_weighted_energy, dissipation_rate, energy_balance_residual,
    DiagnosticsRecord, GronwallTerms,
};
use crate::error::{Error, Result};
use crate::field::{advecting_components, QField, Repr, NUM_COMPONENTS};
use crate::grid::GridSpec;
use crate::lp::FilterBank;
use crate::quat::Quaternion;

/// Energy guard: a run is declared blown up when its L² energy exceeds this
/// multiple of the initial energy (non-finite values trip the guard too).
pub const BLOWUP_ENERGY_FACTOR: f64 = 1e6;

/// Interpretation of the quadratic convective term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonlinearityMode {
    /// −(u·∇)q with u the advecting components; reproduces the classical
    /// equations on the imaginary part. The default.
    Advective,
    /// Symmetrized quaternionic contraction −½(q ⊗ Dq + Dq ⊗ q) with
    /// Dq = Σ_m e_m ∂_m q, kept behind this flag for experimentation.
    Hamilton,
}

/// External force: none, or a steady / exponentially decaying
/// divergence-free single mode.
#[derive(Clone, Debug, PartialEq)]
pub enum ForcingSpec {
    None,
    SteadyLowMode {
        amplitude: f64,
        mode: Vec<i64>,
    },
    TimeDecayingLowMode {
        amplitude: f64,
        mode: Vec<i64>,
        decay_rate: f64,
    },
}

impl ForcingSpec {
    pub fn is_none(&self) -> bool {
        matches!(self, ForcingSpec::None)
    }

    fn validate(&self, grid: &GridSpec) -> Result<()> {
        let (amplitude, mode, decay) = match self {
            ForcingSpec::None => return Ok(()),
            ForcingSpec::SteadyLowMode { amplitude, mode } => (*amplitude, mode, 0.0),
            ForcingSpec::TimeDecayingLowMode {
                amplitude,
                mode,
                decay_rate,
            } => (*amplitude, mode, *decay_rate),
        };
        if !amplitude.is_finite() {
            return Err(Error::InvalidConfig(
                "forcing amplitude must be finite".into(),
            ));
        }
        if !(decay.is_finite() && decay >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "forcing decay_rate {decay} must be >= 0"
            )));
        }
        if mode.len() != grid.dim() {
            return Err(Error::InvalidConfig(format!(
                "forcing mode has {} entries for a {}-dimensional grid",
                mode.len(),
                grid.dim()
            )));
        }
        if mode.iter().all(|&m| m == 0) {
            return Err(Error::InvalidConfig("forcing mode must be nonzero".into()));
        }
        for (axis, &m) in mode.iter().enumerate() {
            let cutoff = grid.dealias_cutoff(axis);
            if m.abs() > cutoff {
                return Err(Error::InvalidConfig(format!(
                    "forcing mode {m} on axis {axis} not representable within the dealiased band (|k| <= {cutoff})"
                )));
            }
        }
        Ok(())
    }
}

/// Full simulation configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub grid: GridSpec,
    /// Kinematic viscosity, > 0.
    pub nu: f64,
    /// Horizon; t_end = 0 runs no steps and emits only the initial record.
    pub t_end: f64,
    /// Time step, > 0 and ≤ t_end when t_end > 0.
    pub dt: f64,
    pub nonlinearity_mode: NonlinearityMode,
    /// Test hook: drop the nonlinear term entirely (heat + forcing only).
    pub linear_only: bool,
    pub forcing: ForcingSpec,
    /// Emit a diagnostics record every this many steps (≥ 1).
    pub diag_every: usize,
    /// Besov indices used for monitoring norms.
    pub besov: BesovParams,
    /// Time-integrability exponent of the forcing norm, ≥ 1; recorded and
    /// used for the L^r-in-time forcing norm, nothing branches on it.
    pub r_exponent: f64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu.is_finite() && self.nu > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "nu = {} must be > 0",
                self.nu
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "dt = {} must be > 0",
                self.dt
            )));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "t_end = {} must be >= 0",
                self.t_end
            )));
        }
        if self.t_end > 0.0 && self.dt > self.t_end {
            return Err(Error::InvalidConfig(format!(
                "dt = {} must not exceed t_end = {}",
                self.dt, self.t_end
            )));
        }
        if self.diag_every == 0 {
            return Err(Error::InvalidConfig("diag_every must be >= 1".into()));
        }
        if !(self.r_exponent.is_finite() && self.r_exponent >= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "r_exponent = {} must be >= 1",
                self.r_exponent
            )));
        }
        self.besov.validate()?;
        self.forcing.validate(&self.grid)?;
        Ok(())
    }

    /// Number of steps the simulation will take.
    pub fn n_steps(&self) -> usize {
        if self.t_end == 0.0 {
            0
        } else {
            (self.t_end / self.dt).round() as usize
        }
    }
}

/// Solver state: spectral field, time and step counter. The advecting
/// components stay divergence-free after every step.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub t: f64,
    pub step_index: usize,
    pub q_hat: QField,
}

fn kappa_sq_table(grid: &GridSpec) -> Vec<f64> {
    let dim = grid.dim();
    let tables: Vec<Vec<f64>> = (0..dim).map(|a| grid.kappa_axis(a)).collect();
    let mut out = vec![0.0; grid.num_points()];
    let mut idx = [0usize; 3];
    for (flat, v) in out.iter_mut().enumerate() {
        grid.unravel(flat, &mut idx[..dim]);
        let mut sq = 0.0;
        for axis in 0..dim {
            let k = tables[axis][idx[axis]];
            sq += k * k;
        }
        *v = sq;
    }
    out
}

/// Exact heat semigroup e^{tνΔ}: every coefficient at wavenumber κ is
/// multiplied by e^{−νt|κ|²}. Errors on t < 0 or ν ≤ 0.
pub fn heat_semigroup(f: &QField, t: f64, nu: f64) -> Result<QField> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::parameter("t", format!("{t} must be >= 0")));
    }
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::parameter("nu", format!("{nu} must be > 0")));
    }
    let table: Vec<f64> = kappa_sq_table(f.grid())
        .iter()
        .map(|&k2| (-nu * t * k2).exp())
        .collect();
    f.apply_multiplier(&table)
}

/// Quadratic convective term, dealiased. Advective mode returns the
/// transform of −(u·∇)q; Hamilton mode the symmetrized quaternionic
/// contraction −½(q ⊗ Dq + Dq ⊗ q) with Dq = Σ_m e_m ∂_m q. Both scale as
/// nonlinear_term(λq) = λ²·nonlinear_term(q).
pub fn nonlinear_term(q_hat: &QField, mode: NonlinearityMode) -> Result<QField> {
    let grid = q_hat.grid().clone();
    let dim = grid.dim();
    let q_phys = q_hat.inverse_transform()?;
    let derivs: Vec<QField> = (0..dim)
        .map(|m| q_hat.gradient_axis(m)?.inverse_transform())
        .collect::<Result<Vec<_>>>()?;
    let n = grid.num_points();
    let mut out: [Vec<f64>; NUM_COMPONENTS] = std::array::from_fn(|_| vec![0.0; n]);
    let qc = q_phys.physical()?;

    match mode {
        NonlinearityMode::Advective => {
            for (axis, u_comp) in advecting_components(dim).enumerate() {
                let dc = derivs[axis].physical()?;
                let u = &qc[u_comp];
                for c in 0..NUM_COMPONENTS {
                    let d = &dc[c];
                    let o = &mut out[c];
                    for flat in 0..n {
                        o[flat] -= u[flat] * d[flat];
                    }
                }
            }
        }
        NonlinearityMode::Hamilton => {
            let deriv_comps: Vec<&[Vec<f64>; NUM_COMPONENTS]> = derivs
                .iter()
                .map(|d| d.physical())
                .collect::<Result<Vec<_>>>()?;
            for flat in 0..n {
                let q = Quaternion::new(qc[0][flat], qc[1][flat], qc[2][flat], qc[3][flat]);
                let mut dq = Quaternion::ZERO;
                for (axis, dc) in deriv_comps.iter().enumerate() {
                    let d = Quaternion::new(dc[0][flat], dc[1][flat], dc[2][flat], dc[3][flat]);
                    dq += Quaternion::basis(axis + 1) * d;
                }
                let v = (q * dq + dq * q).scale(-0.5);
                out[0][flat] = v.w;
                out[1][flat] = v.x;
                out[2][flat] = v.y;
                out[3][flat] = v.z;
            }
        }
    }

    QField::from_physical(&grid, out)?
        .forward_transform()?
        .dealias()
}

/// Evaluates the forcing at time t as a divergence-free spectral field.
pub fn forcing_eval(spec: &ForcingSpec, t: f64, grid: &GridSpec) -> Result<QField> {
    spec.validate(grid)?;
    let (amplitude, mode, decay) = match spec {
        ForcingSpec::None => return Ok(QField::zeros(grid, Repr::Spectral)),
        ForcingSpec::SteadyLowMode { amplitude, mode } => (*amplitude, mode, 0.0),
        ForcingSpec::TimeDecayingLowMode {
            amplitude,
            mode,
            decay_rate,
        } => (*amplitude, mode, *decay_rate),
    };
    let dim = grid.dim();
    // Direction orthogonal to the physical wavenumber vector.
    let kvec: Vec<f64> = (0..dim)
        .map(|a| 2.0 * std::f64::consts::PI * mode[a] as f64 / grid.domain_length()[a])
        .collect();
    let mut dir = vec![0.0; dim];
    if let Some(axis) = (0..dim).find(|&a| mode[a] == 0) {
        dir[axis] = 1.0;
    } else {
        let k2: f64 = kvec.iter().map(|k| k * k).sum();
        let proj = kvec[0] / k2;
        for (a, d) in dir.iter_mut().enumerate() {
            *d = -kvec[a] * proj;
        }
        dir[0] += 1.0;
        let norm: f64 = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
        for d in dir.iter_mut() {
            *d /= norm;
        }
    }

    let mut plus = [0usize; 3];
    let mut minus = [0usize; 3];
    for axis in 0..dim {
        let n = grid.sizes()[axis] as i64;
        plus[axis] = mode[axis].rem_euclid(n) as usize;
        minus[axis] = (-mode[axis]).rem_euclid(n) as usize;
    }
    let pf = grid.flat_of(&plus[..dim]);
    let mf = grid.flat_of(&minus[..dim]);

    let coeff = 0.5 * amplitude * (-decay * t).exp();
    let mut field = QField::zeros(grid, Repr::Spectral);
    {
        let comps = field.spectral_mut()?;
        for (axis, comp) in advecting_components(dim).enumerate() {
            comps[comp][pf] = num_complex::Complex64::new(coeff * dir[axis], 0.0);
            comps[comp][mf] = num_complex::Complex64::new(coeff * dir[axis], 0.0);
        }
    }
    Ok(field)
}

/// Completed or blown-up run.
#[derive(Clone, Debug, PartialEq)]
pub enum RunOutcome {
    Completed,
    BlowUp { step_index: usize, last_besov: f64 },
}

/// What a simulation hands back besides the record stream.
#[derive(Debug)]
pub struct SimOutcome {
    pub final_state: SolverState,
    pub outcome: RunOutcome,
    pub records_emitted: usize,
    /// (∫₀^T ‖f(τ)‖_B^r dτ)^{1/r} with r the configured exponent, by
    /// trapezoid over record times.
    pub forcing_lr_norm: f64,
}

/// Per-iteration summary of the Picard fixed-point mode.
#[derive(Clone, Debug)]
pub struct PicardReport {
    pub converged: bool,
    pub iterations: usize,
    /// Sup-in-time Besov distance between successive iterates.
    pub distances: Vec<f64>,
    /// Ratios d_m / d_{m−1}.
    pub factors: Vec<f64>,
    /// Largest observed ratio (0 when convergence happened in one step).
    pub contraction_factor: f64,
    /// Distances grew for 3 consecutive iterations or lost finiteness.
    pub non_contraction: bool,
}

/// One entry of an amplitude sweep.
#[derive(Clone, Debug)]
pub struct SweepEntry {
    pub amplitude: f64,
    pub converged: bool,
    pub iterations: usize,
    pub contraction_factor: f64,
    pub non_contraction: bool,
}

/// Amplitude sweep result: entries up to (and including) the first
/// non-contracting amplitude.
#[derive(Clone, Debug)]
pub struct SweepReport {
    pub entries: Vec<SweepEntry>,
    pub threshold_amplitude: Option<f64>,
}

/// Time integrator bound to one configuration. Holds the filter bank and
/// the per-step heat multiplier. Immutable during a run; independent runs
/// may share nothing and proceed in parallel.
pub struct Solver {
    cfg: SimConfig,
    bank: FilterBank,
    heat_dt: Vec<f64>,
}

impl Solver {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let bank = FilterBank::build(&cfg.grid)?;
        let heat_dt = kappa_sq_table(&cfg.grid)
            .iter()
            .map(|&k2| (-cfg.nu * cfg.dt * k2).exp())
            .collect();
        Ok(Solver { cfg, bank, heat_dt })
    }

    pub fn cfg(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn bank(&self) -> &FilterBank {
        &self.bank
    }

    /// Besov norm of a spectral field under the run's monitoring indices.
    pub fn besov_norm_of(&self, q_hat: &QField) -> Result<f64> {
        let decomp = self.bank.decompose(q_hat)?;
        besov_norm_of_decomposition(&decomp, &self.cfg.besov)
    }

    /// Projects and dealiases initial data into a step-0 state.
    pub fn ingest(&self, q0: &QField) -> Result<SolverState> {
        let q_hat = match q0.repr() {
            Repr::Spectral => q0.clone(),
            Repr::Physical => q0.forward_transform()?,
        };
        if q_hat.grid() != &self.cfg.grid {
            return Err(Error::GridMismatch(
                "initial data grid does not match configuration".into(),
            ));
        }
        if !q_hat.is_finite() {
            return Err(Error::parameter("q0", "initial data is not finite"));
        }
        let q_hat = q_hat.dealias()?.leray_project()?;
        Ok(SolverState {
            t: 0.0,
            step_index: 0,
            q_hat,
        })
    }

    /// P[N(q̂) + f̂(t)]: projected, dealiased right-hand side without the
    /// viscous part.
    fn rhs(&self, q_hat: &QField, t: f64) -> Result<QField> {
        let nl = if self.cfg.linear_only {
            QField::zeros(&self.cfg.grid, Repr::Spectral)
        } else {
            nonlinear_term(q_hat, self.cfg.nonlinearity_mode)?
        };
        let with_forcing = if self.cfg.forcing.is_none() {
            nl
        } else {
            nl.add(&forcing_eval(&self.cfg.forcing, t, &self.cfg.grid)?)?
        };
        with_forcing.leray_project()
    }

    /// One Duhamel step: exponential predictor with E(dt) on the endpoint
    /// integrand, trapezoid corrector, then re-projection and re-dealiasing.
    pub fn step(&self, state: &SolverState) -> Result<SolverState> {
        let dt = self.cfg.dt;
        let g0 = self.rhs(&state.q_hat, state.t)?;
        let eq = state.q_hat.apply_multiplier(&self.heat_dt)?;
        let eg0 = g0.apply_multiplier(&self.heat_dt)?;
        let predictor = eq.add(&eg0.scaled(dt))?;
        let g1 = self.rhs(&predictor, state.t + dt)?;
        let q_next = eq
            .add(&eg0.add(&g1)?.scaled(0.5 * dt))?
            .leray_project()?
            .dealias()?;
        if !q_next.is_finite() {
            return Err(Error::BlowUp {
                step_index: state.step_index + 1,
                last_besov: self.besov_norm_of(&state.q_hat).unwrap_or(f64::NAN),
            });
        }
        Ok(SolverState {
            t: state.t + dt,
            step_index: state.step_index + 1,
            q_hat: q_next,
        })
    }

    fn build_record(
        &self,
        state: &SolverState,
        gronwall: GronwallTerms,
        residual: f64,
        blow_up: bool,
    ) -> Result<(DiagnosticsRecord, f64)> {
        let decomp = self.bank.decompose(&state.q_hat)?;
        let besov = besov_norm_of_decomposition(&decomp, &self.cfg.besov)?;
        let rec = DiagnosticsRecord {
            t: state.t,
            step_index: state.step_index,
            total_energy: state.q_hat.energy(),
            band_energy: band_energy(&decomp),
            band_dissipation: dissipation_rate(&decomp, self.cfg.nu)?,
            besov_weighted_energy: besov_weighted_energy(&decomp, self.cfg.besov.s),
            besov_norm: besov,
            gronwall_lhs: besov,
            gronwall_rhs_terms: gronwall,
            energy_balance_residual: residual,
            blow_up,
        };
        Ok((rec, besov))
    }

    fn forcing_norm(&self, t: f64) -> Result<f64> {
        if self.cfg.forcing.is_none() {
            return Ok(0.0);
        }
        let f = forcing_eval(&self.cfg.forcing, t, &self.cfg.grid)?;
        self.besov_norm_of(&f)
    }

    /// Runs to t_end, emitting a record at step 0, every `diag_every` steps
    /// and at the end. Blow-up emits a final censored record (values of the
    /// last finite state, flagged) and reports the outcome instead of
    /// failing.
    pub fn simulate(
        &self,
        q0: &QField,
        mut sink: impl FnMut(&DiagnosticsRecord, &SolverState),
    ) -> Result<SimOutcome> {
        let state0 = self.ingest(q0)?;
        let initial_energy = state0.q_hat.energy();
        let n_steps = self.cfg.n_steps();
        let r = self.cfg.r_exponent;

        let besov0 = self.besov_norm_of(&state0.q_hat)?;
        let f_norm0 = self.forcing_norm(0.0)?;
        let mut gronwall = GronwallTerms {
            initial_norm: besov0,
            forcing_integral: 0.0,
            exponent_integral: 0.0,
        };
        let (rec0, _) = self.build_record(&state0, gronwall, 0.0, false)?;
        sink(&rec0, &state0);
        let mut records_emitted = 1;

        let mut last_record_t = 0.0;
        let mut last_f_norm = f_norm0;
        let mut last_q_norm = besov0;
        let mut f_lr_integral = 0.0f64;

        let mut state = state0;
        for i in 1..=n_steps {
            let prev = state.clone();
            let stepped = self.step(&prev);
            let blow_up = match &stepped {
                Err(Error::BlowUp { .. }) => true,
                Err(_) => return Err(stepped.err().unwrap()),
                Ok(next) => {
                    initial_energy > 0.0
                        && next.q_hat.energy() > BLOWUP_ENERGY_FACTOR * initial_energy
                }
            };
            if blow_up {
                let last_besov = self.besov_norm_of(&prev.q_hat)?;
                // Censored final record: last finite values stamped with the
                // failing step. The residual of the failed step is unknown;
                // zero keeps the stream finite and machine-readable.
                let censored_state = SolverState {
                    t: prev.t + self.cfg.dt,
                    step_index: i,
                    q_hat: prev.q_hat.clone(),
                };
                let (rec, _) = self.build_record(&censored_state, gronwall, 0.0, true)?;
                sink(&rec, &censored_state);
                records_emitted += 1;
                return Ok(SimOutcome {
                    final_state: prev,
                    outcome: RunOutcome::BlowUp {
                        step_index: i,
                        last_besov,
                    },
                    records_emitted,
                    forcing_lr_norm: f_lr_integral.powf(1.0 / r),
                });
            }
            let next = stepped.unwrap();

            if i % self.cfg.diag_every == 0 || i == n_steps {
                let span = next.t - last_record_t;
                let f_norm = self.forcing_norm(next.t)?;
                let q_norm_pre = self.besov_norm_of(&next.q_hat)?;
                gronwall.forcing_integral += 0.5 * (last_f_norm + f_norm) * span;
                gronwall.exponent_integral += 0.5 * (last_q_norm + q_norm_pre) * span;
                f_lr_integral += 0.5 * (last_f_norm.powf(r) + f_norm.powf(r)) * span;
                let residual = energy_balance_residual(&prev, &next, &self.cfg)?;
                let (rec, q_norm) = self.build_record(&next, gronwall, residual, false)?;
                sink(&rec, &next);
                records_emitted += 1;
                last_record_t = next.t;
                last_f_norm = f_norm;
                last_q_norm = q_norm;
            }
            state = next;
        }

        Ok(SimOutcome {
            final_state: state,
            outcome: RunOutcome::Completed,
            records_emitted,
            forcing_lr_norm: f_lr_integral.powf(1.0 / r),
        })
    }

    /// Convenience wrapper collecting the record stream.
    pub fn simulate_collect(&self, q0: &QField) -> Result<(SimOutcome, Vec<DiagnosticsRecord>)> {
        let mut records = Vec::new();
        let outcome = self.simulate(q0, |rec, _| records.push(rec.clone()))?;
        Ok((outcome, records))
    }

    /// Picard iteration of the Duhamel map over [0, t_end]: each iterate is
    /// a full trajectory whose nonlinear input is frozen at the previous
    /// iterate. Reports per-iteration sup-in-time Besov distances and the
    /// empirical contraction factor; divergence yields a non-contraction
    /// report, not an error.
    pub fn picard_iterate(&self, q0: &QField, max_iter: usize, tol: f64) -> Result<PicardReport> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::parameter("tol", format!("{tol} must be > 0")));
        }
        if max_iter == 0 {
            return Err(Error::parameter("max_iter", "must be >= 1"));
        }
        let state0 = self.ingest(q0)?;
        let n = self.cfg.n_steps();
        let dt = self.cfg.dt;

        // Iterate 0: the linear solution E(t)q₀.
        let mut prev_traj: Vec<QField> = Vec::with_capacity(n + 1);
        prev_traj.push(state0.q_hat.clone());
        for i in 0..n {
            let next = prev_traj[i].apply_multiplier(&self.heat_dt)?;
            prev_traj.push(next);
        }

        let mut distances = Vec::new();
        let mut factors = Vec::new();
        let mut converged = false;
        let mut non_contraction = false;
        let mut grow_streak = 0usize;
        let mut iterations = 0usize;

        for _m in 1..=max_iter {
            iterations += 1;
            // Frozen right-hand sides along the previous trajectory.
            let mut rhs_prev: Vec<QField> = Vec::with_capacity(n + 1);
            let mut finite = true;
            for (i, q) in prev_traj.iter().enumerate() {
                let g = self.rhs(q, i as f64 * dt)?;
                finite &= g.is_finite();
                rhs_prev.push(g);
            }
            let mut new_traj: Vec<QField> = Vec::with_capacity(n + 1);
            new_traj.push(state0.q_hat.clone());
            if finite {
                for i in 0..n {
                    let carried = new_traj[i]
                        .add(&rhs_prev[i].scaled(0.5 * dt))?
                        .apply_multiplier(&self.heat_dt)?;
                    let next = carried.add(&rhs_prev[i + 1].scaled(0.5 * dt))?;
                    finite &= next.is_finite();
                    new_traj.push(next);
                    if !finite {
                        break;
                    }
                }
            }
            if !finite {
                non_contraction = true;
                distances.push(f64::INFINITY);
                break;
            }

            let mut dist = 0.0f64;
            for (a, b) in new_traj.iter().zip(prev_traj.iter()) {
                let d = self.besov_norm_of(&a.sub(b)?)?;
                dist = dist.max(d);
            }
            if let Some(&last) = distances.last() {
                if last > 0.0 {
                    factors.push(dist / last);
                }
                if dist > last {
                    grow_streak += 1;
                } else {
                    grow_streak = 0;
                }
            }
            distances.push(dist);
            if !dist.is_finite() {
                non_contraction = true;
                break;
            }
            if dist < tol {
                converged = true;
                break;
            }
            if grow_streak >= 3 {
                non_contraction = true;
                break;
            }
            prev_traj = new_traj;
        }

        let contraction_factor = factors.iter().cloned().fold(0.0, f64::max);
        Ok(PicardReport {
            converged,
            iterations,
            distances,
            factors,
            contraction_factor,
            non_contraction,
        })
    }
}

/// Sweeps the initial-data amplitude upward until the Picard iteration
/// stops contracting; the threshold amplitude is logged in the report.
pub fn picard_amplitude_sweep(
    cfg: &SimConfig,
    shape: &QField,
    amplitudes: &[f64],
    max_iter: usize,
    tol: f64,
) -> Result<SweepReport> {
    let solver = Solver::new(cfg.clone())?;
    let mut entries = Vec::new();
    let mut threshold = None;
    for &amplitude in amplitudes {
        let report = solver.picard_iterate(&shape.scaled(amplitude), max_iter, tol)?;
        let flipped = report.non_contraction || report.contraction_factor >= 1.0;
        entries.push(SweepEntry {
            amplitude,
            converged: report.converged,
            iterations: report.iterations,
            contraction_factor: report.contraction_factor,
            non_contraction: flipped,
        });
        if flipped {
            threshold = Some(amplitude);
            break;
        }
    }
    Ok(SweepReport {
        entries,
        threshold_amplitude: threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

    fn tg_config(n: usize, nu: f64, dt: f64, t_end: f64) -> SimConfig {
        SimConfig {
            grid: GridSpec::square(n, TWO_PI).unwrap(),
            nu,
            t_end,
            dt,
            nonlinearity_mode: NonlinearityMode::Advective,
            linear_only: false,
            forcing: ForcingSpec::None,
            diag_every: 1,
            besov: BesovParams::new(1.0, 2.0, 2.0).unwrap(),
            r_exponent: 2.0,
        }
    }

    #[test]
    fn heat_semigroup_identity_at_t_zero() {
        let grid = GridSpec::square(32, TWO_PI).unwrap();
        let f = synth::random_smooth(&grid, 2, 9, 1.0).unwrap();
        let g = heat_semigroup(&f, 0.0, 0.1).unwrap();
        assert_eq!(f.sub(&g).unwrap().l2_norm(), 0.0);
    }

    #[test]
    fn heat_semigroup_pure_mode_decay_is_exact() {
        let grid = GridSpec::square(64, TWO_PI).unwrap();
        let nu = 0.13;
        let t = 0.37;
        let f = synth::single_mode(&grid, 1, &[3, 4], 1.0, 0.2)
            .unwrap()
            .forward_transform()
            .unwrap();
        let g = heat_semigroup(&f, t, nu).unwrap();
        let kappa_sq = 25.0; // |k|² = 3² + 4² on L = 2π
        let expect = (-nu * t * kappa_sq).exp();
        let fc = f.spectral().unwrap();
        let gc = g.spectral().unwrap();
        for flat in 0..grid.num_points() {
            let a = fc[1][flat];
            // Skip FFT rounding noise at other modes.
            if a.norm() > 1e-12 {
                let ratio = gc[1][flat].norm() / a.norm();
                assert!(
                    (ratio - expect).abs() <= 1e-14,
                    "decay factor {ratio} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn heat_semigroup_composes() {
        let grid = GridSpec::square(32, TWO_PI).unwrap();
        let f = synth::random_broadband(&grid, 5, 1.0, 1.0).unwrap();
        let nu = 0.21;
        let ab = heat_semigroup(&heat_semigroup(&f, 0.11, nu).unwrap(), 0.23, nu).unwrap();
        let once = heat_semigroup(&f, 0.34, nu).unwrap();
        let err = ab.sub(&once).unwrap().l2_norm() / once.l2_norm();
        assert!(err <= 1e-13, "semigroup composition error {err:.3e}");
    }

    #[test]
    fn heat_semigroup_rejects_negative_time() {
        let grid = GridSpec::square(32, TWO_PI).unwrap();
        let f = QField::zeros(&grid, Repr::Spectral);
        assert!(matches!(
            heat_semigroup(&f, -0.1, 0.1).unwrap_err(),
            Error::InvalidParameter { .. }
        ));
    }

    #[test]
    fn heat_semigroup_never_raises_band_energy() {
        let grid = GridSpec::square(32, TWO_PI).unwrap();
        let bank = FilterBank::build(&grid).unwrap();
        let f = synth::random_broadband(&grid, 8, 1.0, 1.0).unwrap();
        let g = heat_semigroup(&f, 0.05, 0.2).unwrap();
        let e0 = crate::diagnostics::band_energy(&bank.decompose(&f).unwrap());
        let e1 = crate::diagnostics::band_energy(&bank.decompose(&g).unwrap());
        assert!(e1.low <= e0.low * (1.0 + 1e-13));
        for (j, v) in &e1.bands {
            assert!(*v <= e0.get(*j).unwrap() * (1.0 + 1e-13), "band {j} grew");
        }
    }

    #[test]
    fn nonlinear_term_of_zero_is_zero() {
        let grid = GridSpec::square(32, TWO_PI).unwrap();
        let z = QField::zeros(&grid, Repr::Spectral);
        for mode in [NonlinearityMode::Advective, NonlinearityMode::Hamilton] {
            assert_eq!(nonlinear_term(&z, mode).unwrap().l2_norm(), 0.0);
        }
    }

    #[test]
    fn nonlinear_term_is_quadratic_in_both_modes() {
        let grid = GridSpec::square(32, TWO_PI).unwrap();
        let q = synth::random_smooth_divfree(&grid, 77, 6, 1.0).unwrap();
        for mode in [NonlinearityMode::Advective, NonlinearityMode::Hamilton] {
            let n1 = nonlinear_term(&q, mode).unwrap();
            let n2 = nonlinear_term(&q.scaled(2.0), mode).unwrap();
            let err = n2.sub(&n1.scaled(4.0)).unwrap().l2_norm();
            assert!(
                err <= 1e-12 * n2.l2_norm().max(1e-30),
                "{mode:?} not quadratic: {err:.3e}"
            );
        }
    }

    #[test]
    fn advective_term_matches_taylor_green_closed_form() {
        // For u = (sin x cos y, −cos x sin y): (u·∇)u = (½ sin 2x, ½ sin 2y).
        let grid = GridSpec::square(64, TWO_PI).unwrap();
        let q = synth::taylor_green_2d(&grid, 1.0)
            .unwrap()
            .forward_transform()
            .unwrap();
        let n = nonlinear_term(&q, NonlinearityMode::Advective)
            .unwrap()
            .inverse_transform()
            .unwrap();
        let mut idx = [0usize; 3];
        let mut coords = [0.0f64; 3];
        let comps = n.physical().unwrap();
        let mut max_err = 0.0f64;
        for flat in 0..grid.num_points() {
            grid.unravel(flat, &mut idx[..2]);
            grid.coords_of(&idx[..2], &mut coords[..2]);
            let expect_x = -0.5 * (2.0 * coords[0]).sin();
            let expect_y = -0.5 * (2.0 * coords[1]).sin();
            max_err = max_err.max((comps[1][flat] - expect_x).abs());
            max_err = max_err.max((comps[2][flat] - expect_y).abs());
            max_err = max_err.max(comps[0][flat].abs());
            max_err = max_err.max(comps[3][flat].abs());
        }
        assert!(max_err <= 1e-10, "convective term error {max_err:.3e}");
    }

    #[test]
    fn taylor_green_nonlinearity_is_pure_gradient() {
        let grid = GridSpec::square(64, TWO_PI).unwrap();
        let q = synth::taylor_green_2d(&grid, 1.0)
            .unwrap()
            .forward_transform()
            .unwrap();
        let n = nonlinear_term(&q, NonlinearityMode::Advective).unwrap();
        let projected = n.leray_project().unwrap();
        assert!(
            projected.l2_norm() <= 1e-10,
            "projection left {:.3e}",
            projected.l2_norm()
        );
    }

    #[test]
    fn forcing_kinds_behave() {
        let grid = GridSpec::square(32, TWO_PI).unwrap();
        let zero = forcing_eval(&ForcingSpec::None, 1.0, &grid).unwrap();
        assert_eq!(zero.l2_norm(), 0.0);

        let steady = ForcingSpec::SteadyLowMode {
            amplitude: 0.5,
            mode: vec![0, 1],
        };
        let f0 = forcing_eval(&steady, 0.0, &grid).unwrap();
        let f5 = forcing_eval(&steady, 5.0, &grid).unwrap();
        assert_eq!(f0.sub(&f5).unwrap().l2_norm(), 0.0);
        assert!(f0.max_abs_divergence().unwrap() < 1e-14);

        let decaying = ForcingSpec::TimeDecayingLowMode {
            amplitude: 0.5,
            mode: vec![2, 1],
            decay_rate: 0.8,
        };
        let g1 = forcing_eval(&decaying, 1.0, &grid).unwrap();
        let g3 = forcing_eval(&decaying, 3.0, &grid).unwrap();
        let ratio = g3.l2_norm() / g1.l2_norm();
        let expect = (-0.8f64 * 2.0).exp();
        assert!((ratio - expect).abs() <= 1e-12);
        assert!(g1.max_abs_divergence().unwrap() < 1e-14);
    }

    #[test]
    fn forcing_rejects_unrepresentable_mode() {
        let grid = GridSpec::square(32, TWO_PI).unwrap();
        let spec = ForcingSpec::SteadyLowMode {
            amplitude: 1.0,
            mode: vec![20, 0],
        };
        assert!(matches!(
            forcing_eval(&spec, 0.0, &grid).unwrap_err(),
            Error::InvalidConfig(_)
        ));
    }

    #[test]
    fn zero_field_is_a_fixed_point() {
        let solver = Solver::new(tg_config(32, 0.1, 1e-2, 0.1)).unwrap();
        let z = QField::zeros(&solver.cfg().grid, Repr::Physical);
        let (outcome, records) = solver.simulate_collect(&z).unwrap();
        assert_eq!(outcome.outcome, RunOutcome::Completed);
        assert!(records.iter().all(|r| r.total_energy == 0.0));
    }

    #[test]
    fn linear_only_single_mode_decays_exactly() {
        let mut cfg = tg_config(32, 0.2, 1e-3, 0.05);
        cfg.linear_only = true;
        let solver = Solver::new(cfg).unwrap();
        let q0 = synth::single_mode(&solver.cfg().grid, 1, &[0, 2], 1.0, 0.0).unwrap();
        let (outcome, _) = solver.simulate_collect(&q0).unwrap();
        let state = outcome.final_state;
        // Mode |k|² = 4 decays by e^{−ν t κ²} exactly per step.
        let expect = (-0.2 * state.t * 4.0).exp();
        let q0_hat = solver.ingest(&q0).unwrap().q_hat;
        let ratio = state.q_hat.l2_norm() / q0_hat.l2_norm();
        assert!(
            (ratio - expect).abs() <= 1e-12,
            "linear decay {ratio} vs {expect}"
        );
    }

    #[test]
    fn taylor_green_energy_decays_exponentially() {
        let solver = Solver::new(tg_config(64, 0.1, 1e-3, 0.1)).unwrap();
        let q0 = synth::taylor_green_2d(&solver.cfg().grid, 1.0).unwrap();
        let (outcome, records) = solver.simulate_collect(&q0).unwrap();
        assert_eq!(outcome.outcome, RunOutcome::Completed);
        let e0 = records[0].total_energy;
        let e_end = records.last().unwrap().total_energy;
        let expect = e0 * (-4.0 * 0.1 * 0.1f64).exp();
        let rel = (e_end - expect).abs() / expect;
        assert!(rel <= 1e-6, "TG energy off by {rel:.3e}");
        // Monotone decay, record to record.
        for pair in records.windows(2) {
            assert!(pair[1].total_energy <= pair[0].total_energy * (1.0 + 1e-13));
        }
    }

    #[test]
    fn z_independent_taylor_green_decays_exactly_in_3d() {
        // A Taylor-Green plane flow embedded in 3D (no z dependence, zero
        // third velocity component) evolves exactly as in 2D, which checks
        // the 3D convective term, projection and stepping end to end.
        let grid = GridSpec::cube(16, TWO_PI).unwrap();
        let nu = 0.1;
        let cfg = SimConfig {
            grid: grid.clone(),
            nu,
            t_end: 0.05,
            dt: 1e-3,
            nonlinearity_mode: NonlinearityMode::Advective,
            linear_only: false,
            forcing: ForcingSpec::None,
            diag_every: 50,
            besov: BesovParams::new(1.0, 2.0, 2.0).unwrap(),
            r_exponent: 2.0,
        };
        let solver = Solver::new(cfg).unwrap();
        let q0 = QField::from_fn_physical(&grid, |x| {
            Quaternion::new(0.0, x[0].sin() * x[1].cos(), -x[0].cos() * x[1].sin(), 0.0)
        });
        let (outcome, records) = solver.simulate_collect(&q0).unwrap();
        assert_eq!(outcome.outcome, RunOutcome::Completed);
        assert!(outcome.final_state.q_hat.max_abs_divergence().unwrap() <= 1e-10);
        let e0 = records[0].total_energy;
        let e_end = records.last().unwrap().total_energy;
        let expect = e0 * (-4.0 * nu * 0.05f64).exp();
        let rel = (e_end - expect).abs() / expect;
        assert!(rel <= 1e-6, "3D plane-flow energy off by {rel:.3e}");
    }

    #[test]
    fn broadband_3d_run_decays_and_stays_divergence_free() {
        let grid = GridSpec::cube(16, TWO_PI).unwrap();
        let cfg = SimConfig {
            grid: grid.clone(),
            nu: 0.1,
            t_end: 0.02,
            dt: 2e-3,
            nonlinearity_mode: NonlinearityMode::Advective,
            linear_only: false,
            forcing: ForcingSpec::None,
            diag_every: 1,
            besov: BesovParams::new(1.0, 2.0, 2.0).unwrap(),
            r_exponent: 2.0,
        };
        let solver = Solver::new(cfg).unwrap();
        let q0 = synth::random_broadband(&grid, 3, 1.5, 0.5).unwrap();
        let mut state = solver.ingest(&q0).unwrap();
        let mut prev_energy = state.q_hat.energy();
        for _ in 0..solver.cfg().n_steps() {
            state = solver.step(&state).unwrap();
            assert!(state.q_hat.max_abs_divergence().unwrap() <= 1e-10);
            let energy = state.q_hat.energy();
            assert!(
                energy <= prev_energy * (1.0 + 1e-12),
                "unforced energy grew"
            );
            prev_energy = energy;
        }
    }

    #[test]
    fn hamilton_mode_runs_and_stays_finite() {
        let mut cfg = tg_config(32, 0.1, 1e-3, 0.02);
        cfg.nonlinearity_mode = NonlinearityMode::Hamilton;
        let solver = Solver::new(cfg).unwrap();
        let q0 = synth::perturbed_taylor_green_2d(&solver.cfg().grid, 0.5, 0.2).unwrap();
        let (outcome, records) = solver.simulate_collect(&q0).unwrap();
        assert_eq!(outcome.outcome, RunOutcome::Completed);
        assert!(outcome.final_state.q_hat.is_finite());
        assert!(outcome.final_state.q_hat.max_abs_divergence().unwrap() <= 1e-10);
        assert!(records.iter().all(|r| r.besov_norm.is_finite()));
    }

    #[test]
    fn t_end_zero_emits_one_record() {
        let mut cfg = tg_config(32, 0.1, 1e-3, 0.0);
        cfg.t_end = 0.0;
        let solver = Solver::new(cfg).unwrap();
        let q0 = synth::taylor_green_2d(&solver.cfg().grid, 1.0).unwrap();
        let (outcome, records) = solver.simulate_collect(&q0).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(outcome.records_emitted, 1);
        assert_eq!(records[0].step_index, 0);
    }

    #[test]
    fn divergence_stays_small_along_a_run() {
        let solver = Solver::new(tg_config(32, 0.05, 2e-3, 0.05)).unwrap();
        let q0 = synth::perturbed_taylor_green_2d(&solver.cfg().grid, 1.0, 0.3).unwrap();
        let mut state = solver.ingest(&q0).unwrap();
        for _ in 0..solver.cfg().n_steps() {
            state = solver.step(&state).unwrap();
            assert!(state.q_hat.max_abs_divergence().unwrap() <= 1e-10);
        }
    }

    #[test]
    fn forced_small_run_completes_without_blowup() {
        let mut cfg = tg_config(32, 0.1, 1e-3, 0.05);
        cfg.forcing = ForcingSpec::SteadyLowMode {
            amplitude: 1e-3,
            mode: vec![0, 1],
        };
        let solver = Solver::new(cfg).unwrap();
        let z = QField::zeros(&solver.cfg().grid, Repr::Physical);
        let (outcome, records) = solver.simulate_collect(&z).unwrap();
        assert_eq!(outcome.outcome, RunOutcome::Completed);
        assert!(records.iter().all(|r| !r.blow_up));
        assert!(records.last().unwrap().besov_norm.is_finite());
        assert!(outcome.forcing_lr_norm > 0.0);
    }

    #[test]
    fn overdriven_forcing_reports_blowup() {
        let mut cfg = tg_config(32, 0.01, 1e-2, 0.5);
        cfg.forcing = ForcingSpec::SteadyLowMode {
            amplitude: 1e6,
            mode: vec![0, 1],
        };
        let solver = Solver::new(cfg).unwrap();
        let q0 = synth::taylor_green_2d(&solver.cfg().grid, 1.0).unwrap();
        let (outcome, records) = solver.simulate_collect(&q0).unwrap();
        match outcome.outcome {
            RunOutcome::BlowUp { last_besov, .. } => assert!(last_besov.is_finite()),
            RunOutcome::Completed => panic!("overdriven run should blow up"),
        }
        let last = records.last().unwrap();
        assert!(last.blow_up);
    }

    #[test]
    fn energy_balance_residual_shrinks_quadratically() {
        let grid = GridSpec::square(32, TWO_PI).unwrap();
        let mut residuals = Vec::new();
        for &dt in &[4e-3, 2e-3, 1e-3] {
            let cfg = tg_config(32, 0.1, dt, 0.0401);
            let solver = Solver::new(SimConfig {
                grid: grid.clone(),
                t_end: dt * 10.0,
                ..cfg
            })
            .unwrap();
            let q0 = synth::perturbed_taylor_green_2d(&grid, 1.0, 0.3).unwrap();
            let (_, records) = solver.simulate_collect(&q0).unwrap();
            let max_res = records
                .iter()
                .map(|r| r.energy_balance_residual)
                .fold(0.0, f64::max);
            residuals.push(max_res);
        }
        let slope1 = (residuals[0] / residuals[1]).log2();
        let slope2 = (residuals[1] / residuals[2]).log2();
        assert!(
            slope1 > 1.7 && slope2 > 1.7,
            "residuals {residuals:?} not O(dt²)"
        );
    }

    #[test]
    fn picard_zero_data_converges_immediately() {
        let solver = Solver::new(tg_config(32, 0.1, 1e-2, 0.1)).unwrap();
        let z = QField::zeros(&solver.cfg().grid, Repr::Physical);
        let report = solver.picard_iterate(&z, 10, 1e-8).unwrap();
        assert!(report.converged);
        assert_eq!(report.iterations, 1);
        assert!(report.contraction_factor < 1.0);
    }

    #[test]
    fn picard_small_taylor_green_contracts() {
        let solver = Solver::new(tg_config(64, 0.1, 1e-3, 0.1)).unwrap();
        let q0 = synth::taylor_green_2d(&solver.cfg().grid, 1e-2).unwrap();
        let report = solver.picard_iterate(&q0, 10, 1e-8).unwrap();
        assert!(report.converged, "distances: {:?}", report.distances);
        assert!(report.iterations <= 10);
        assert!(report.contraction_factor < 1.0);
    }

    #[test]
    fn picard_sweep_finds_non_contraction_threshold() {
        let cfg = tg_config(32, 0.1, 2e-3, 0.1);
        let shape = synth::perturbed_taylor_green_2d(&cfg.grid, 1.0, 0.5).unwrap();
        let report =
            picard_amplitude_sweep(&cfg, &shape, &[1e-2, 1.0, 10.0, 100.0, 1000.0], 12, 1e-8)
                .unwrap();
        assert!(
            report.threshold_amplitude.is_some(),
            "sweep never flipped: {:?}",
            report.entries
        );
        let first = &report.entries[0];
        assert!(first.converged && first.contraction_factor < 1.0);
    }
}
