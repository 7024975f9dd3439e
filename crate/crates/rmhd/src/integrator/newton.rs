//! Linearized, exact-Newton, and inexact-Newton solvers for one step.

use crate::linear::{
    assemble_block_jacobian, gmres, refactor_policy, BlockPreconditioner, BlockSpec, LinearError,
};
use crate::util::norm2;

use super::scheme::{NewtonMode, NewtonParams};
use super::step::StepResidual;

/// Preconditioner state carried across Newton iterations and steps.
pub struct LinearContext {
    pub blocks: Vec<BlockSpec>,
    pub precond: Option<BlockPreconditioner>,
    /// GMRES iteration counts of recent Newton steps (window of two).
    pub window: Vec<usize>,
    pub stamp: u64,
}

impl LinearContext {
    pub fn new(blocks: Vec<BlockSpec>) -> LinearContext {
        LinearContext {
            blocks,
            precond: None,
            window: Vec::new(),
            stamp: 0,
        }
    }

    /// Drop the factorization (used by the every-step policy and after
    /// time-step changes).
    pub fn invalidate(&mut self) {
        self.precond = None;
        self.window.clear();
    }
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub u: Vec<f64>,
    pub iters: usize,
    pub gmres_total: usize,
    pub refactorizations: usize,
    pub initial_residual: f64,
    pub final_residual: f64,
}

#[derive(Debug)]
pub enum NewtonError {
    MaxIter { residual: f64 },
    NonFinite,
    Diverged { consecutive: usize },
    Linear(LinearError),
}

impl std::fmt::Display for NewtonError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NewtonError::MaxIter { residual } => {
                write!(f, "Newton iteration cap reached, residual {residual:e}")
            }
            NewtonError::NonFinite => write!(f, "non-finite residual"),
            NewtonError::Diverged { consecutive } => {
                write!(f, "residual grew for {consecutive} consecutive iterations")
            }
            NewtonError::Linear(e) => write!(f, "linear solver: {e}"),
        }
    }
}

impl std::error::Error for NewtonError {}

/// Solve r(U) = b - G(U) = 0 starting from U^n.
///
/// Convergence: ||r|| < eps_a + eps_r ||r(U^n)||.  The linear tolerance is
/// fixed for the exact and linearized modes and follows the forcing sequence
/// eps_0, then gamma_f (||R_k||/||R_{k-1}||)^alpha_f, for the inexact mode.
pub fn newton_solve(
    step: &dyn StepResidual,
    u_init: &[f64],
    params: &NewtonParams,
    lin: &mut LinearContext,
) -> Result<NewtonOutcome, NewtonError> {
    let n = step.dim();
    let mut u = u_init.to_vec();
    let mut r = vec![0.0; n];
    step.residual(&u, &mut r);
    if r.iter().any(|v| !v.is_finite()) {
        return Err(NewtonError::NonFinite);
    }
    let r0_norm = norm2(&r);
    let tol = params.eps_a + params.eps_r * r0_norm;
    let mut rnorm = r0_norm;
    let mut gmres_total = 0usize;
    let mut refactorizations = 0usize;
    let mut grew = 0usize;
    let mut forcing = params.eps0;

    if rnorm < tol {
        return Ok(NewtonOutcome {
            u,
            iters: 0,
            gmres_total,
            refactorizations,
            initial_residual: r0_norm,
            final_residual: rnorm,
        });
    }

    for k in 0..params.max_iter {
        if refactor_policy(&lin.window, lin.precond.is_some()) {
            lin.stamp += 1;
            let stamp = lin.stamp;
            let mut eval = |x: &[f64], out: &mut [f64]| step.residual(x, out);
            lin.precond = Some(
                assemble_block_jacobian(&mut eval, &u, &r, &lin.blocks, stamp)
                    .map_err(NewtonError::Linear)?,
            );
            lin.window.clear();
            refactorizations += 1;
        }

        let tol_k = match params.mode {
            NewtonMode::Exact | NewtonMode::Linearized => params.gmres_tol,
            NewtonMode::Inexact => forcing,
        };

        // J delta = r with J v = -(r(U + eps v) - r(U)) / eps
        let mut delta = vec![0.0; n];
        let precond = lin.precond.as_ref();
        let mut scratch = vec![0.0; n];
        let res = {
            let u_ref = &u;
            let r_ref = &r;
            gmres(
                |v: &[f64], out: &mut [f64]| {
                    let vnorm = norm2(v);
                    if vnorm == 0.0 {
                        out.iter_mut().for_each(|x| *x = 0.0);
                        return;
                    }
                    let eps = f64::EPSILON.sqrt() * (1.0 + norm2(u_ref)) / vnorm;
                    for ((s, ui), vi) in scratch.iter_mut().zip(u_ref).zip(v) {
                        *s = ui + eps * vi;
                    }
                    step.residual(&scratch, out);
                    for (o, ri) in out.iter_mut().zip(r_ref) {
                        *o = -(*o - ri) / eps;
                    }
                },
                precond.map(|p| move |x: &[f64], y: &mut [f64]| p.apply(x, y)),
                &r,
                &mut delta,
                tol_k,
                params.gmres_restart,
                params.gmres_maxit,
            )
        };
        gmres_total += res.iters;
        lin.window.push(res.iters);

        for (ui, di) in u.iter_mut().zip(&delta) {
            *ui += di;
        }
        step.residual(&u, &mut r);
        if r.iter().any(|v| !v.is_finite()) {
            return Err(NewtonError::NonFinite);
        }
        let new_norm = norm2(&r);

        if params.mode == NewtonMode::Linearized {
            return Ok(NewtonOutcome {
                u,
                iters: 1,
                gmres_total,
                refactorizations,
                initial_residual: r0_norm,
                final_residual: new_norm,
            });
        }

        if new_norm > rnorm {
            grew += 1;
            if grew >= params.divergence_window {
                return Err(NewtonError::Diverged { consecutive: grew });
            }
        } else {
            grew = 0;
        }

        forcing = (params.gamma_f * (new_norm / rnorm).powf(params.alpha_f))
            .clamp(params.forcing_floor, params.forcing_ceiling);
        rnorm = new_norm;

        if rnorm < tol {
            return Ok(NewtonOutcome {
                u,
                iters: k + 1,
                gmres_total,
                refactorizations,
                initial_residual: r0_norm,
                final_residual: rnorm,
            });
        }
    }
    Err(NewtonError::MaxIter { residual: rnorm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::BlockSpec;

    struct Closure<F: Fn(&[f64], &mut [f64])> {
        n: usize,
        f: F,
    }

    impl<F: Fn(&[f64], &mut [f64])> StepResidual for Closure<F> {
        fn dim(&self) -> usize {
            self.n
        }
        fn residual(&self, u: &[f64], out: &mut [f64]) {
            (self.f)(u, out)
        }
    }

    fn ctx(n: usize) -> LinearContext {
        LinearContext::new(vec![BlockSpec::dense("all", (0..n).collect())])
    }

    #[test]
    fn linear_system_converges_in_one_iteration() {
        // G(U) = M U, b = (3, 1): r = b - M U
        let step = Closure {
            n: 2,
            f: |u: &[f64], out: &mut [f64]| {
                out[0] = 3.0 - (2.0 * u[0] + u[1]);
                out[1] = 1.0 - (u[0] + 3.0 * u[1]);
            },
        };
        // the finite-difference Jacobian is accurate to ~1e-8, so the
        // one-iteration contract holds for tolerances above that
        let params = NewtonParams {
            mode: NewtonMode::Exact,
            eps_a: 1e-6,
            gmres_tol: 1e-12,
            ..NewtonParams::default()
        };
        let out = newton_solve(&step, &[0.0, 0.0], &params, &mut ctx(2)).unwrap();
        assert_eq!(out.iters, 1);
        assert!((out.u[0] - 1.6).abs() < 1e-8, "{:?}", out.u);
        assert!((out.u[1] + 0.2).abs() < 1e-8);
    }

    #[test]
    fn quadratic_scalar_follows_the_newton_sequence() {
        // G(U) = U^2, b = 4, from U = 3: next iterate 3 - 5/6 = 13/6
        let step = Closure {
            n: 1,
            f: |u: &[f64], out: &mut [f64]| out[0] = 4.0 - u[0] * u[0],
        };
        let params = NewtonParams {
            mode: NewtonMode::Exact,
            eps_a: 1e-12,
            gmres_tol: 1e-13,
            max_iter: 30,
            ..NewtonParams::default()
        };
        let out = newton_solve(&step, &[3.0], &params, &mut ctx(1)).unwrap();
        assert!((out.u[0] - 2.0).abs() < 1e-10, "{:?}", out.u);
        // quadratic convergence reaches 1e-12 from 3.0 within a handful of steps
        assert!(out.iters <= 6, "{}", out.iters);
    }

    #[test]
    fn forcing_term_formula() {
        let p = NewtonParams {
            gamma_f: 0.9,
            alpha_f: 2.0,
            forcing_floor: 1e-10,
            forcing_ceiling: 0.9,
            ..NewtonParams::default()
        };
        let eta = (p.gamma_f * (0.1f64).powf(p.alpha_f)).clamp(p.forcing_floor, p.forcing_ceiling);
        assert!((eta - 0.009).abs() < 1e-15);
    }

    #[test]
    fn divergent_iteration_is_reported() {
        // r(U) grows whatever the update does: G has the wrong sign so the
        // Newton direction points away from the root
        let step = Closure {
            n: 1,
            f: |u: &[f64], out: &mut [f64]| out[0] = 1.0 + u[0] * u[0],
        };
        let params = NewtonParams {
            mode: NewtonMode::Exact,
            eps_a: 1e-12,
            max_iter: 20,
            divergence_window: 2,
            ..NewtonParams::default()
        };
        let err = newton_solve(&step, &[0.5], &params, &mut ctx(1)).unwrap_err();
        assert!(
            matches!(err, NewtonError::Diverged { .. } | NewtonError::MaxIter { .. }),
            "{err:?}"
        );
    }

    #[test]
    fn already_converged_needs_no_iteration() {
        let step = Closure {
            n: 1,
            f: |u: &[f64], out: &mut [f64]| out[0] = 2.0 - u[0],
        };
        let params = NewtonParams {
            mode: NewtonMode::Exact,
            eps_a: 1e-6,
            ..NewtonParams::default()
        };
        let out = newton_solve(&step, &[2.0], &params, &mut ctx(1)).unwrap();
        assert_eq!(out.iters, 0);
    }

    #[test]
    fn linearized_mode_does_exactly_one_solve() {
        let step = Closure {
            n: 1,
            f: |u: &[f64], out: &mut [f64]| out[0] = 4.0 - u[0] * u[0],
        };
        let params = NewtonParams {
            mode: NewtonMode::Linearized,
            eps_a: 1e-14,
            gmres_tol: 1e-13,
            ..NewtonParams::default()
        };
        let out = newton_solve(&step, &[3.0], &params, &mut ctx(1)).unwrap();
        assert_eq!(out.iters, 1);
        assert!((out.u[0] - 13.0 / 6.0).abs() < 1e-7, "{:?}", out.u);
    }
}
