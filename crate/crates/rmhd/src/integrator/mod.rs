//! theta/Gear time discretization, the per-step nonlinear solvers, adaptive
//! time stepping, and the outer run loop.

pub mod adaptive;
pub mod newton;
pub mod run;
pub mod scheme;
pub mod step;

pub use adaptive::{adapt_dt, DtDecision, DtUnderflow, StepOutcome};
pub use newton::{newton_solve, LinearContext, NewtonError, NewtonOutcome};
pub use run::{run, run_with_hook, RefactorPolicyKind, RunError, RunResult, RunSetup};
pub use scheme::{AdaptiveParams, NewtonMode, NewtonParams, SchemeParams};
pub use step::{AbSystem, MhdStep, StepResidual, ThetaStep};
