//! The outer time loop: per step, build the residual, (re)factorize per
//! policy, solve, retry at 0.8 dt on failure, emit diagnostics, adapt dt,
//! and advance the history.

use std::io::Write;
use std::time::Instant;

use crate::diagnostics::{
    compute_energies, energy_balance_residual, DiagnosticsCsv, EnergyReport, SolverStats,
};
use crate::geometry::Grid;
use crate::linear::{harmonic_blocks, Packing};
use crate::model::{ModelBc, ModelFlags, PhysParams, State, ALL_VARS};

use super::adaptive::{adapt_dt, DtDecision, StepOutcome};
use super::newton::{newton_solve, LinearContext, NewtonError};
use super::scheme::{AdaptiveParams, NewtonParams, SchemeParams};
use super::step::MhdStep;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefactorPolicyKind {
    /// Fresh factorization at every time step (the reported-tables setting).
    EveryStep,
    /// Keep the factorization until the two-step GMRES window exceeds the
    /// threshold.
    OnDemand,
}

pub struct RunSetup<'a> {
    pub params: &'a PhysParams,
    pub flags: &'a ModelFlags,
    pub bc: &'a ModelBc,
    pub grid: &'a Grid,
    pub scheme: SchemeParams,
    pub newton: NewtonParams,
    pub adaptive: AdaptiveParams,
    pub refactor: RefactorPolicyKind,
    /// Number of accepted steps to take.
    pub steps: usize,
}

#[derive(Debug)]
pub enum RunError {
    /// dt fell below dt_min while retrying a failed step.
    Unrecoverable {
        step: usize,
        dt: f64,
        last_error: String,
    },
    Io(std::io::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Unrecoverable { step, dt, last_error } => {
                write!(f, "step {step} unrecoverable at dt {dt:e}: {last_error}")
            }
            RunError::Io(e) => write!(f, "diagnostics I/O: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

#[derive(Debug)]
pub struct RunResult {
    pub state: State,
    pub time: f64,
    pub step: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub per_step: Vec<SolverStats>,
    pub energies: Vec<EnergyReport>,
    /// dt of every accepted step.
    pub dts: Vec<f64>,
    pub totals: SolverStats,
}

/// theta-weighted blend of two states (coefficient evaluation point of the
/// dissipation in the balance residual).
fn blend(theta: f64, new: &State, old: &State) -> State {
    let mut out = new.clone();
    for &v in ALL_VARS.iter() {
        let f = out.field_mut(v);
        let mut b = new.field(v).scaled(theta);
        b.add_scaled(1.0 - theta, old.field(v));
        *f = b;
    }
    out
}

pub fn run<W: Write>(
    initial: State,
    t0: f64,
    step0: usize,
    setup: &RunSetup,
    csv: Option<&mut DiagnosticsCsv<W>>,
) -> Result<RunResult, RunError> {
    run_with_hook(initial, t0, step0, setup, csv, None)
}

/// `on_accept(step, time, dt, state)` fires after every accepted step
/// (restart persistence and custom tracing hang off this).
pub fn run_with_hook<W: Write>(
    initial: State,
    t0: f64,
    step0: usize,
    setup: &RunSetup,
    mut csv: Option<&mut DiagnosticsCsv<W>>,
    mut on_accept: Option<&mut dyn FnMut(usize, f64, f64, &State) -> std::io::Result<()>>,
) -> Result<RunResult, RunError> {
    let grid = setup.grid;
    let packing = Packing::new(grid, setup.flags.with_vpar);
    let mut lin = LinearContext::new(harmonic_blocks(&packing));

    let mut state_n = initial;
    let mut state_nm1 = state_n.clone();
    let mut have_history = false;
    let mut time = t0;
    let mut dt = setup.adaptive.dt0;

    let mut report_n = compute_energies(&state_n, setup.params, setup.flags, setup.bc, grid);
    if let Some(csv) = csv.as_deref_mut() {
        csv.emit(step0, time, dt, &report_n, 0.0, &SolverStats::default())?;
    }

    let mut result = RunResult {
        state: state_n.clone(),
        time,
        step: step0,
        accepted: 0,
        rejected: 0,
        per_step: Vec::new(),
        energies: vec![report_n],
        dts: Vec::new(),
        totals: SolverStats::default(),
    };

    for accepted in 1..=setup.steps {
        let started = Instant::now();
        let mut step_stats = SolverStats::default();
        if setup.refactor == RefactorPolicyKind::EveryStep {
            lin.invalidate();
        }
        let outcome = loop {
            // the first step of a run has no U^{n-1}; the scheme degrades to
            // zeta = 0 for it
            let scheme = if have_history {
                setup.scheme
            } else {
                SchemeParams { theta: setup.scheme.theta, zeta: 0.0 }
            };
            let step = MhdStep::new(
                &state_n,
                &state_nm1,
                dt,
                scheme,
                setup.params,
                setup.flags,
                setup.bc,
                grid,
            );
            let u0 = packing.pack(&state_n);
            match newton_solve(&step, &u0, &setup.newton, &mut lin) {
                Ok(out) => break Ok(out),
                Err(err) => {
                    result.rejected += 1;
                    lin.invalidate();
                    match adapt_dt(StepOutcome::Failed, dt, &setup.adaptive) {
                        Ok(DtDecision::Retry(next)) => {
                            dt = next;
                            continue;
                        }
                        Ok(DtDecision::Advance(_)) => unreachable!(),
                        Err(under) => {
                            break Err(RunError::Unrecoverable {
                                step: step0 + accepted,
                                dt: under.dt,
                                last_error: format!("{err}"),
                            })
                        }
                    }
                }
            }
        };
        let out = outcome?;
        step_stats.newton_iters += out.iters;
        step_stats.gmres_iters += out.gmres_total;
        step_stats.refactorizations += out.refactorizations;

        let state_np1 = packing.unpack(&out.u, grid);
        let report_np1 = compute_energies(&state_np1, setup.params, setup.flags, setup.bc, grid);
        let theta_state = blend(setup.scheme.theta, &state_np1, &state_n);
        let d_theta =
            compute_energies(&theta_state, setup.params, setup.flags, setup.bc, grid)
                .dissipation_expected;
        let balance = energy_balance_residual(&report_np1, &report_n, dt, d_theta);

        time += dt;
        step_stats.wall_time = started.elapsed().as_secs_f64();
        if let Some(csv) = csv.as_deref_mut() {
            csv.emit(step0 + accepted, time, dt, &report_np1, balance, &step_stats)?;
        }
        if let Some(hook) = on_accept.as_deref_mut() {
            hook(step0 + accepted, time, dt, &state_np1)?;
        }
        result.dts.push(dt);
        result.per_step.push(step_stats);
        result.energies.push(report_np1);
        result.totals.newton_iters += step_stats.newton_iters;
        result.totals.gmres_iters += step_stats.gmres_iters;
        result.totals.refactorizations += step_stats.refactorizations;
        result.totals.wall_time += step_stats.wall_time;

        match adapt_dt(StepOutcome::Converged { iters: out.iters }, dt, &setup.adaptive) {
            Ok(DtDecision::Advance(next)) => dt = next,
            Ok(DtDecision::Retry(_)) => unreachable!(),
            Err(under) => {
                return Err(RunError::Unrecoverable {
                    step: step0 + accepted,
                    dt: under.dt,
                    last_error: "post-acceptance dt underflow".into(),
                })
            }
        }

        state_nm1 = std::mem::replace(&mut state_n, state_np1);
        have_history = true;
        report_n = report_np1;
        result.accepted = accepted;
        result.step = step0 + accepted;
        result.time = time;
    }
    result.state = state_n;
    Ok(result)
}

/// Convenience: did the Newton failure deserve a retry?  Kept for error
/// reporting in the driver.
pub fn describe_newton_error(e: &NewtonError) -> String {
    format!("{e}")
}
