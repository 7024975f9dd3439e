//! Cached collocation slices of a state with their poloidal derivatives.
//!
//! Every nonlinear term is evaluated pointwise on these padded slices and
//! projected back onto the retained harmonics only once, at the end, so the
//! stored right-hand sides are the exact Galerkin projections of the model
//! terms (the collocation count de-aliases every product the model forms).

use crate::geometry::field::{apply_boundary, d_phi};
use crate::geometry::padded::{ddr, ddz, Padded};
use crate::geometry::{Grid, SpectralField};

use super::state::{ModelBc, State, Var};

/// Values and first derivatives of one field on all collocation slices.
pub struct FieldSl {
    pub v: Vec<Padded>,
    pub dr: Vec<Padded>,
    pub dz: Vec<Padded>,
}

pub fn field_slices(
    f: &SpectralField,
    bc: crate::geometry::FieldBc,
    grid: &Grid,
) -> FieldSl {
    let closed = apply_boundary(f, bc, grid);
    let v: Vec<Padded> = closed.slices(grid);
    let dr = v.iter().map(|s| ddr(s, grid)).collect();
    let dz = v.iter().map(|s| ddz(s, grid)).collect();
    FieldSl { v, dr, dz }
}

/// Geometry weights shared by every slice.
pub struct Geom {
    pub r: Padded,
    pub r2: Padded,
    pub inv_r: Padded,
    pub inv_r2: Padded,
}

impl Geom {
    pub fn new(grid: &Grid) -> Geom {
        Geom {
            r: Padded::from_fn(grid, |r, _| r),
            r2: Padded::from_fn(grid, |r, _| r * r),
            inv_r: Padded::from_fn(grid, |r, _| 1.0 / r),
            inv_r2: Padded::from_fn(grid, |r, _| 1.0 / (r * r)),
        }
    }
}

/// All slices of one state needed to assemble the model equations.
pub struct StateSlices {
    pub psi: FieldSl,
    pub u: FieldSl,
    pub j: FieldSl,
    pub w: FieldSl,
    pub rho: FieldSl,
    pub p: FieldSl,
    pub vpar: FieldSl,
    /// d_phi of state fields (exact harmonic derivative, then sliced).
    pub dphi_u: FieldSl,
    pub dphi_psi2: Vec<Padded>,
    pub dphi_j: Vec<Padded>,
    pub dphi_rho: Vec<Padded>,
    pub dphi_p: Vec<Padded>,
    pub dphi_vpar: Vec<Padded>,
}

impl StateSlices {
    pub fn new(state: &State, bc: &ModelBc, grid: &Grid) -> StateSlices {
        let zero = crate::geometry::FieldBc::Zero;
        let sl = |v: Var| field_slices(state.field(v), bc.field_bc(v), grid);
        let vals = |f: &SpectralField| -> Vec<Padded> {
            apply_boundary(f, zero, grid).slices(grid)
        };
        let dphi_u_field = d_phi(&state.u, grid);
        StateSlices {
            psi: sl(Var::Psi),
            u: sl(Var::U),
            j: sl(Var::J),
            w: sl(Var::W),
            rho: sl(Var::Rho),
            p: sl(Var::P),
            vpar: sl(Var::Vpar),
            dphi_u: field_slices(&dphi_u_field, zero, grid),
            dphi_psi2: vals(&d_phi(&d_phi(&state.psi, grid), grid)),
            dphi_j: vals(&d_phi(&state.j, grid)),
            dphi_rho: vals(&d_phi(&state.rho, grid)),
            dphi_p: vals(&d_phi(&state.p, grid)),
            dphi_vpar: vals(&d_phi(&state.vpar, grid)),
        }
    }
}
