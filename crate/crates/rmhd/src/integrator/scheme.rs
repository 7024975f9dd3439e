//! Time-scheme and solver-policy parameter records.

/// theta/zeta family: Euler (1, 0), Crank-Nicolson (1/2, 0), Gear (1, 1/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    pub theta: f64,
    pub zeta: f64,
}

impl SchemeParams {
    pub fn euler() -> SchemeParams {
        SchemeParams { theta: 1.0, zeta: 0.0 }
    }

    pub fn crank_nicolson() -> SchemeParams {
        SchemeParams { theta: 0.5, zeta: 0.0 }
    }

    pub fn gear() -> SchemeParams {
        SchemeParams { theta: 1.0, zeta: 0.5 }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(0.5..=1.0).contains(&self.theta) {
            return Err(format!("theta must be in [1/2, 1], got {}", self.theta));
        }
        if self.zeta < 0.0 {
            return Err(format!("zeta must be >= 0, got {}", self.zeta));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NewtonMode {
    /// One linear solve per step (the original scheme).
    Linearized,
    /// Newton with a fixed tight linear tolerance.
    Exact,
    /// Newton with the residual-ratio forcing term.
    Inexact,
}

#[derive(Debug, Clone)]
pub struct NewtonParams {
    pub mode: NewtonMode,
    /// Absolute and relative nonlinear stopping criteria:
    /// ||R|| < eps_a + eps_r ||R(U^n)||.
    pub eps_a: f64,
    pub eps_r: f64,
    pub max_iter: usize,
    /// Forcing term eps_k = gamma_f (||R_k|| / ||R_{k-1}||)^alpha_f.
    pub gamma_f: f64,
    pub alpha_f: f64,
    /// Initial GMRES tolerance of the inexact iteration.
    pub eps0: f64,
    pub forcing_floor: f64,
    pub forcing_ceiling: f64,
    /// Fixed linear tolerance of the exact/linearized modes.
    pub gmres_tol: f64,
    pub gmres_restart: usize,
    pub gmres_maxit: usize,
    /// Consecutive residual-growth count that fails the step.
    pub divergence_window: usize,
}

impl Default for NewtonParams {
    fn default() -> Self {
        NewtonParams {
            mode: NewtonMode::Inexact,
            eps_a: 1e-5,
            eps_r: 0.0,
            max_iter: 10,
            gamma_f: 0.9,
            alpha_f: 2.0,
            eps0: 5e-4,
            forcing_floor: 1e-10,
            forcing_ceiling: 0.9,
            gmres_tol: 1e-8,
            gmres_restart: 200,
            gmres_maxit: 500,
            divergence_window: 2,
        }
    }
}

impl NewtonParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.eps_a <= 0.0 {
            return Err("eps_a must be positive".into());
        }
        if self.eps_r < 0.0 {
            return Err("eps_r must be >= 0".into());
        }
        if self.max_iter < 1 {
            return Err("max_iter must be >= 1".into());
        }
        if !(self.gamma_f > 0.0 && self.gamma_f <= 1.0) {
            return Err("gamma_f must be in (0, 1]".into());
        }
        if self.alpha_f <= 0.0 {
            return Err("alpha_f must be positive".into());
        }
        if !(self.forcing_floor <= self.eps0
            && self.eps0 <= self.forcing_ceiling
            && self.forcing_ceiling <= 1.0)
        {
            return Err("need forcing_floor <= eps0 <= forcing_ceiling <= 1".into());
        }
        if self.gmres_tol <= 0.0 || self.gmres_restart < 1 {
            return Err("gmres_tol must be positive and restart >= 1".into());
        }
        if self.divergence_window < 1 {
            return Err("divergence_window must be >= 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct AdaptiveParams {
    pub dt0: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub grow: f64,
    pub shrink: f64,
    /// Retry factor after a failed step.
    pub fail_factor: f64,
    /// Newton-iteration thresholds steering growth and shrinkage.
    pub fast_iters: usize,
    pub slow_iters: usize,
    /// Smoothing cap on the per-step rise.
    pub max_rise_per_step: f64,
}

impl Default for AdaptiveParams {
    fn default() -> Self {
        AdaptiveParams {
            dt0: 1.0,
            dt_min: 1e-8,
            dt_max: 100.0,
            grow: 1.25,
            shrink: 0.8,
            fail_factor: 0.8,
            fast_iters: 3,
            slow_iters: 8,
            max_rise_per_step: 1.5,
        }
    }
}

impl AdaptiveParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.shrink > 0.0 && self.shrink < 1.0 && self.grow > 1.0) {
            return Err("need 0 < shrink < 1 < grow".into());
        }
        if !(self.fail_factor > 0.0 && self.fail_factor < 1.0) {
            return Err("fail_factor must be in (0, 1)".into());
        }
        if !(self.dt_min <= self.dt0 && self.dt0 <= self.dt_max && self.dt_min > 0.0) {
            return Err("need 0 < dt_min <= dt0 <= dt_max".into());
        }
        if self.fast_iters >= self.slow_iters {
            return Err("need fast_iters < slow_iters".into());
        }
        if self.max_rise_per_step <= 1.0 {
            return Err("max_rise_per_step must exceed 1".into());
        }
        Ok(())
    }
}
