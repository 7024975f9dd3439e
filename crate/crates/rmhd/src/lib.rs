//! Desk-scale nonlinear implicit solver for reduced resistive MHD.
//!
//! The crate couples a finite-difference / single-harmonic-Fourier spatial
//! discretization of the reduced MHD equations (with and without parallel
//! velocity) to a fully implicit theta/Gear time stepper solved by
//! linearized, exact-Newton, or inexact-Newton iterations with per-harmonic
//! block-preconditioned GMRES and adaptive time stepping.  A built-in
//! verifier checks the projection identities behind the model and the
//! energy-balance cancellation groups numerically under grid refinement.

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod equilibrium;
pub mod geometry;
pub mod identities;
pub mod integrator;
pub mod linear;
pub mod model;
pub mod restart;
pub mod util;

pub use geometry::{Grid, SpectralField};

