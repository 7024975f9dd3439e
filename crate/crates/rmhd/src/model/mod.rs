//! The reduced MHD state, physics parameters, and the discrete spatial
//! operators of every model equation.

pub mod params;
pub mod rhs;
pub mod slices;
pub mod state;

pub use params::{BcVariant, ModelError, ModelFlags, PhysParams};
pub use rhs::{
    anisotropic_diffusion, lhs_vorticity_increment, lhs_vpar_increment, rhs_all, rhs_density,
    rhs_pressure, rhs_psi, rhs_vorticity, rhs_vpar, Ctx, RhsAll,
};
pub use state::{constraints, fields_from_potentials, ModelBc, State, StateTraces, Var, VectorField, ALL_VARS};
