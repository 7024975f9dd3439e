//! Structured cylindrical grid, harmonic fields, discrete differential
//! operators, and quadrature.

pub mod field;
pub mod grid;
pub mod ops;
pub mod padded;

pub use field::{
    apply_boundary, d_phi, d_phi_slices, integrate_dw, multiply, project_slices, ClosedField,
    FieldBc, FieldTrace, SpectralField,
};
pub use grid::Grid;
pub use ops::{bracket, delta_pol, delta_star, div_b_from_psi, grad_pol};
pub use padded::Padded;
