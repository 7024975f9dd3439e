//! Discrete differential operators on harmonic fields.
//!
//! Linear operators act per harmonic on the padded components; the Poisson
//! bracket routes its products through the collocation slices so harmonic
//! mixing is projected without aliasing.

use super::field::{apply_boundary, project_slices, ClosedField, FieldBc, SpectralField};
use super::grid::Grid;
use super::padded;
use super::padded::Padded;

fn interior(p: &Padded, grid: &Grid) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.n());
    for i in 0..grid.nr {
        for j in 0..grid.nz {
            out.push(p.at(i as isize, j as isize));
        }
    }
    out
}

fn per_harmonic(f: &ClosedField, grid: &Grid, op: impl Fn(&Padded) -> Padded) -> SpectralField {
    SpectralField {
        c0: interior(&op(&f.h[0]), grid),
        cc: interior(&op(&f.h[1]), grid),
        cs: interior(&op(&f.h[2]), grid),
    }
}

/// Poloidal gradient (d/dR, d/dZ) by centered second-order differences,
/// componentwise per harmonic; the boundary closure supplies ghost values.
pub fn grad_pol(f: &SpectralField, bc: FieldBc, grid: &Grid) -> (SpectralField, SpectralField) {
    let c = apply_boundary(f, bc, grid);
    let fr = per_harmonic(&c, grid, |p| padded::ddr(p, grid));
    let fz = per_harmonic(&c, grid, |p| padded::ddz(p, grid));
    (fr, fz)
}

/// Poisson bracket [a, b] = dR(a) dZ(b) - dZ(a) dR(b), products through the
/// collocation grid.
pub fn bracket(a: &SpectralField, bc_a: FieldBc, b: &SpectralField, bc_b: FieldBc, grid: &Grid) -> SpectralField {
    let ca = apply_boundary(a, bc_a, grid);
    let cb = apply_boundary(b, bc_b, grid);
    let slices: Vec<Padded> = (0..grid.n_phi)
        .map(|k| padded::bracket(&ca.slice(grid, k), &cb.slice(grid, k), grid))
        .collect();
    project_slices(&slices, grid)
}

/// Grad-Shafranov operator per harmonic.
pub fn delta_star(f: &SpectralField, bc: FieldBc, grid: &Grid) -> SpectralField {
    let c = apply_boundary(f, bc, grid);
    per_harmonic(&c, grid, |p| padded::delta_star(p, grid))
}

/// Poloidal Laplacian per harmonic.
pub fn delta_pol(f: &SpectralField, bc: FieldBc, grid: &Grid) -> SpectralField {
    let c = apply_boundary(f, bc, grid);
    per_harmonic(&c, grid, |p| padded::delta_pol(p, grid))
}

/// Discrete divergence of the magnetic field derived from psi, computed from
/// the same first-difference stencils that build the field itself:
///   B_R = (1/R) dZ(psi), B_Z = -(1/R) dR(psi), B_phi = F0 / R.
/// Returns the interior divergence per harmonic; the mixed partials commute
/// on the tensor grid so this vanishes to rounding.
pub fn div_b_from_psi(psi: &SpectralField, bc: FieldBc, grid: &Grid) -> SpectralField {
    let c = apply_boundary(psi, bc, grid);
    per_harmonic(&c, grid, |p| {
        let dz = padded::ddz(p, grid);
        let dr = padded::ddr(p, grid);
        // R * B_R = dZ(psi); B_Z = -(1/R) dR(psi); d_phi(F0/R) = 0.
        let d_rbr = padded::ddr(&dz, grid);
        let bz = Padded::from_fn(grid, |r, _| 1.0 / r).mul(&dr).scale(-1.0);
        let d_bz = padded::ddz(&bz, grid);
        let mut out = Padded::zeros(grid);
        for i in 0..grid.nr {
            let r = grid.r(i as isize);
            for j in 0..grid.nz {
                *out.at_mut(i as isize, j as isize) =
                    d_rbr.at(i as isize, j as isize) / r + d_bz.at(i as isize, j as isize);
            }
        }
        out
    })
}
