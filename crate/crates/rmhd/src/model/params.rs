//! Physics coefficients and model-variant switches.

/// Physics coefficients of the reduced model.
#[derive(Debug, Clone)]
pub struct PhysParams {
    /// Toroidal field constant, B_phi = F0 / R.
    pub f0: f64,
    /// Adiabatic index.
    pub gamma: f64,
    /// Resistivity law eta(T) = eta0 * T^eta_exp.
    pub eta0: f64,
    pub eta_exp: f64,
    /// Viscosity law nu(T) = nu0 * T^nu_exp.
    pub nu0: f64,
    pub nu_exp: f64,
    /// Anisotropic diffusivities along / across the field.
    pub k_par: f64,
    pub k_perp: f64,
    /// Per-equation numerical diffusion coefficients (hyper * delta_pol).
    pub hyper_psi: f64,
    pub hyper_w: f64,
    pub hyper_rho: f64,
    pub hyper_p: f64,
    pub hyper_vpar: f64,
    /// Floors used only inside coefficient evaluations.
    pub rho_floor: f64,
    pub t_floor: f64,
}

impl Default for PhysParams {
    fn default() -> Self {
        PhysParams {
            f0: 1.0,
            gamma: 5.0 / 3.0,
            eta0: 1e-4,
            eta_exp: 0.0,
            nu0: 1e-4,
            nu_exp: 0.0,
            k_par: 0.0,
            k_perp: 0.0,
            hyper_psi: 0.0,
            hyper_w: 0.0,
            hyper_rho: 0.0,
            hyper_p: 0.0,
            hyper_vpar: 0.0,
            rho_floor: 1e-10,
            t_floor: 1e-8,
        }
    }
}

impl PhysParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.gamma > 1.0) {
            return Err(format!("gamma must be > 1, got {}", self.gamma));
        }
        for (name, v) in [
            ("eta0", self.eta0),
            ("nu0", self.nu0),
            ("k_par", self.k_par),
            ("k_perp", self.k_perp),
        ] {
            if v < 0.0 {
                return Err(format!("{name} must be >= 0, got {v}"));
            }
        }
        if self.k_par < self.k_perp {
            return Err(format!(
                "k_par must be >= k_perp, got {} < {}",
                self.k_par, self.k_perp
            ));
        }
        if self.rho_floor <= 0.0 || self.t_floor <= 0.0 {
            return Err("rho_floor and T_floor must be positive".into());
        }
        Ok(())
    }
}

/// Which wall closure the auxiliary fields j, w use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcVariant {
    /// Natural conditions: no wall value for j, w (copy-extrapolated closure).
    Bc,
    /// w = j = 0 on the wall (default; closes the stencils directly).
    Bc2,
}

/// Model-variant switches.
#[derive(Debug, Clone, Copy)]
pub struct ModelFlags {
    /// Evolve the parallel velocity.
    pub with_vpar: bool,
    /// Include the cross terms between parallel and poloidal flows that the
    /// production code drops.
    pub neglected_terms: bool,
    pub bc_variant: BcVariant,
    /// Keep the eta d_phiphi(psi)/R^2 part of the flux equation.
    pub resistive_phi_term: bool,
}

impl Default for ModelFlags {
    fn default() -> Self {
        ModelFlags {
            with_vpar: false,
            neglected_terms: false,
            bc_variant: BcVariant::Bc2,
            resistive_phi_term: true,
        }
    }
}

impl ModelFlags {
    pub fn validate(&self) -> Result<(), String> {
        if self.neglected_terms && !self.with_vpar {
            return Err("neglected_terms = true requires with_vpar = true".into());
        }
        Ok(())
    }
}

/// Errors surfaced by the model operations.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    /// A parallel-velocity operation was requested with with_vpar = false.
    VparDisabled,
    /// |B| dropped below the anisotropic-diffusion threshold.
    DegenerateField { min_b2: f64 },
}

impl std::fmt::Display for ModelError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelError::VparDisabled => {
                write!(f, "parallel-velocity operation called with with_vpar = false")
            }
            ModelError::DegenerateField { min_b2 } => {
                write!(f, "anisotropic diffusion hit a degenerate field, min |B|^2 = {min_b2:e}")
            }
        }
    }
}

impl std::error::Error for ModelError {}
