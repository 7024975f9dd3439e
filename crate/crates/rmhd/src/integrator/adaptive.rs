//! Adaptive time-step policy: retry failed steps at 0.8 dt, grow after fast
//! convergence, shrink after slow convergence, smooth changes.

use super::scheme::AdaptiveParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    Converged { iters: usize },
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtDecision {
    /// Accept the step and use this dt next.
    Advance(f64),
    /// Reject the step and retry it at this dt.
    Retry(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtUnderflow {
    pub dt: f64,
    pub dt_min: f64,
}

impl std::fmt::Display for DtUnderflow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "time step {:e} fell below dt_min {:e}", self.dt, self.dt_min)
    }
}

impl std::error::Error for DtUnderflow {}

pub fn adapt_dt(
    outcome: StepOutcome,
    dt: f64,
    p: &AdaptiveParams,
) -> Result<DtDecision, DtUnderflow> {
    match outcome {
        StepOutcome::Failed => {
            let next = dt * p.fail_factor;
            if next < p.dt_min {
                Err(DtUnderflow { dt: next, dt_min: p.dt_min })
            } else {
                Ok(DtDecision::Retry(next))
            }
        }
        StepOutcome::Converged { iters } => {
            let next = if iters <= p.fast_iters {
                (dt * p.grow.min(p.max_rise_per_step)).min(p.dt_max)
            } else if iters >= p.slow_iters {
                (dt * p.shrink).max(p.dt_min)
            } else {
                dt
            };
            Ok(DtDecision::Advance(next))
        }
    }
}
