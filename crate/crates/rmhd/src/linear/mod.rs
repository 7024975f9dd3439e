//! Restarted GMRES with left preconditioning, per-Fourier-mode block
//! Jacobian assembly, banded LU, and finite-difference Jacobian products.

pub mod band;
pub mod flat;
pub mod gmres;
pub mod jacobian;

pub use band::BandMatrix;
pub use flat::Packing;
pub use gmres::{gmres, GmresResult};
pub use jacobian::{
    assemble_block_jacobian, harmonic_blocks, jacobian_vector_product, refactor_policy,
    BlockPreconditioner, BlockSpec, LinearError, REFACTOR_GMRES_THRESHOLD,
};
