//! Spatial operators of the final reduced model: the B-side of every
//! evolution equation and the implicit-increment form of the time terms.
//!
//! Terms are assembled pointwise per collocation slice (derivatives act on
//! padded composites) and projected once at the end, so harmonic truncation
//! happens only where the state itself is truncated.

use crate::geometry::padded::{ddr, ddz, delta_pol, delta_star, div_cpol, Padded};
use crate::geometry::{d_phi_slices, project_slices, FieldBc, Grid, SpectralField};

use super::params::{ModelError, ModelFlags, PhysParams};
use super::slices::{field_slices, FieldSl, Geom, StateSlices};
use super::state::{ModelBc, State};

/// Everything the equation assembly needs besides the state.
pub struct Ctx<'a> {
    pub params: &'a PhysParams,
    pub flags: &'a ModelFlags,
    pub bc: &'a ModelBc,
    pub grid: &'a Grid,
}

/// |B| below this (squared) makes the anisotropic projector singular.
pub const B2_MIN: f64 = 1e-24;

#[inline]
fn br(adr: &Padded, adz: &Padded, bdr: &Padded, bdz: &Padded) -> Padded {
    adr.mul(bdz).sub(&adz.mul(bdr))
}

/// Pointwise coefficient law c0 * T^cexp evaluated on the collocation grid,
/// with the floors applied inside the coefficient only.
fn law_slices(s: &StateSlices, c0: f64, cexp: f64, params: &PhysParams, grid: &Grid) -> Vec<Padded> {
    if cexp == 0.0 {
        return (0..grid.n_phi)
            .map(|_| Padded::from_fn(grid, |_, _| c0))
            .collect();
    }
    s.p
        .v
        .iter()
        .zip(&s.rho.v)
        .map(|(p, r)| {
            p.zip(r, |pv, rv| {
                let t = (pv / rv.max(params.rho_floor)).max(params.t_floor);
                c0 * t.powf(cexp)
            })
        })
        .collect()
}

/// T = p / rho with floors, per slice.
fn temperature_slices(s: &StateSlices, params: &PhysParams) -> Vec<Padded> {
    s.p
        .v
        .iter()
        .zip(&s.rho.v)
        .map(|(p, r)| p.zip(r, |pv, rv| (pv / rv.max(params.rho_floor)).max(params.t_floor)))
        .collect()
}

/// B-side of the flux equation:
/// R[psi,u] + eta Delta* psi - F0 d_phi u (+ eta d_phiphi psi / R^2).
pub fn rhs_psi(state: &State, ctx: &Ctx) -> SpectralField {
    let s = StateSlices::new(state, ctx.bc, ctx.grid);
    rhs_psi_sl(&s, ctx)
}

pub(crate) fn rhs_psi_sl(s: &StateSlices, ctx: &Ctx) -> SpectralField {
    let g = ctx.grid;
    let geom = Geom::new(g);
    let eta = law_slices(s, ctx.params.eta0, ctx.params.eta_exp, ctx.params, g);
    let mut out = Vec::with_capacity(g.n_phi);
    for k in 0..g.n_phi {
        let mut t = geom
            .r
            .mul(&br(&s.psi.dr[k], &s.psi.dz[k], &s.u.dr[k], &s.u.dz[k]));
        t = t.add(&eta[k].mul(&delta_star(&s.psi.v[k], g)));
        t = t.sub(&s.dphi_u.v[k].scale(ctx.params.f0));
        if ctx.flags.resistive_phi_term {
            t = t.add(&eta[k].mul(&s.dphi_psi2[k]).mul(&geom.inv_r2));
        }
        if ctx.params.hyper_psi != 0.0 {
            t = t.add(&delta_pol(&s.psi.v[k], g).scale(ctx.params.hyper_psi));
        }
        out.push(t);
    }
    project_slices(&out, g)
}

/// B-side of the vorticity (electric potential) equation, cross-term block
/// gated by `neglected_terms`.
pub fn rhs_vorticity(state: &State, ctx: &Ctx) -> SpectralField {
    let s = StateSlices::new(state, ctx.bc, ctx.grid);
    rhs_vorticity_sl(&s, ctx)
}

pub(crate) fn rhs_vorticity_sl(s: &StateSlices, ctx: &Ctx) -> SpectralField {
    let g = ctx.grid;
    let geom = Geom::new(g);
    let f0 = ctx.params.f0;
    let nu = law_slices(s, ctx.params.nu0, ctx.params.nu_exp, ctx.params, g);
    let cross = ctx.flags.with_vpar && ctx.flags.neglected_terms;

    // d_phi of the composites in the F0 cross terms.
    let (y_r, y_z) = if cross {
        let xr: Vec<Padded> = (0..g.n_phi)
            .map(|k| s.vpar.v[k].mul(&s.psi.dr[k]))
            .collect();
        let xz: Vec<Padded> = (0..g.n_phi)
            .map(|k| s.vpar.v[k].mul(&s.psi.dz[k]))
            .collect();
        (d_phi_slices(&xr, g), d_phi_slices(&xz, g))
    } else {
        (Vec::new(), Vec::new())
    };

    let mut out = Vec::with_capacity(g.n_phi);
    for k in 0..g.n_phi {
        let rho_hat = geom.r2.mul(&s.rho.v[k]);
        let gradu2 = s.u.dr[k].mul(&s.u.dr[k]).add(&s.u.dz[k].mul(&s.u.dz[k]));

        // (1/2R) [R^2 |grad u|^2, rho_hat]
        let a = geom.r2.mul(&gradu2);
        let mut t = geom
            .inv_r
            .mul(&br(&ddr(&a, g), &ddz(&a, g), &ddr(&rho_hat, g), &ddz(&rho_hat, g)))
            .scale(0.5);
        // (1/R) [rho_hat R^2 w, u]
        let b = geom.r2.mul(&rho_hat).mul(&s.w.v[k]);
        t = t.add(&geom.inv_r.mul(&br(&ddr(&b, g), &ddz(&b, g), &s.u.dr[k], &s.u.dz[k])));
        // -(1/R)[R^2, p] = -2 dZ(p)
        t = t.sub(&s.p.dz[k].scale(2.0));
        // (1/R)[psi, j] - (F0/R^2) d_phi j
        t = t.add(&geom.inv_r.mul(&br(&s.psi.dr[k], &s.psi.dz[k], &s.j.dr[k], &s.j.dz[k])));
        t = t.sub(&geom.inv_r2.mul(&s.dphi_j[k]).scale(f0));
        // viscosity (+ numerical) on the vorticity
        let visc = nu[k].add(&Padded::from_fn(g, |_, _| ctx.params.hyper_w));
        t = t.add(&visc.mul(&delta_pol(&s.w.v[k], g)));

        if cross {
            let v = &s.vpar.v[k];
            let rho = &s.rho.v[k];
            let gpsi_gv = s.psi.dr[k]
                .mul(&s.vpar.dr[k])
                .add(&s.psi.dz[k].mul(&s.vpar.dz[k]));
            let gpsi_gu = s.psi.dr[k]
                .mul(&s.u.dr[k])
                .add(&s.psi.dz[k].mul(&s.u.dz[k]));
            let bpol2 = geom
                .inv_r2
                .mul(&s.psi.dr[k].mul(&s.psi.dr[k]).add(&s.psi.dz[k].mul(&s.psi.dz[k])));

            // (1/R)[rho v^2 j, psi]
            let c1 = rho.mul(v).mul(v).mul(&s.j.v[k]);
            t = t.add(&geom.inv_r.mul(&br(&ddr(&c1, g), &ddz(&c1, g), &s.psi.dr[k], &s.psi.dz[k])));
            // (1/R)[rho v (grad v . grad psi), psi]
            let c2 = rho.mul(v).mul(&gpsi_gv);
            t = t.add(&geom.inv_r.mul(&br(&ddr(&c2, g), &ddz(&c2, g), &s.psi.dr[k], &s.psi.dz[k])));
            // -div( rho_hat F0 v / R^2 grad_pol(d_phi u) ) = -div( F0 rho v grad_pol(d_phi u) )
            let c3coef = rho.mul(v).scale(f0);
            t = t.sub(&div_cpol(&c3coef, &s.dphi_u.v[k], g));
            // (1/R)[rho_hat, v (grad psi . grad u)]
            let c4 = v.mul(&gpsi_gu);
            t = t.add(&geom.inv_r.mul(&br(&ddr(&rho_hat, g), &ddz(&rho_hat, g), &ddr(&c4, g), &ddz(&c4, g))));
            // -(1/2R)[rho_hat, v^2 |B_pol|^2]
            let c5 = v.mul(v).mul(&bpol2);
            t = t.sub(
                &geom
                    .inv_r
                    .mul(&br(&ddr(&rho_hat, g), &ddz(&rho_hat, g), &ddr(&c5, g), &ddz(&c5, g)))
                    .scale(0.5),
            );
            // -(1/R)[rho_hat v w, psi]
            let c6 = rho_hat.mul(v).mul(&s.w.v[k]);
            t = t.sub(&geom.inv_r.mul(&br(&ddr(&c6, g), &ddz(&c6, g), &s.psi.dr[k], &s.psi.dz[k])));
            // (1/R)[u, rho_hat v j]
            let c7 = rho_hat.mul(v).mul(&s.j.v[k]);
            t = t.add(&geom.inv_r.mul(&br(&s.u.dr[k], &s.u.dz[k], &ddr(&c7, g), &ddz(&c7, g))));
            // (1/R)[u, rho_hat (grad psi . grad v)]
            let c8 = rho_hat.mul(&gpsi_gv);
            t = t.add(&geom.inv_r.mul(&br(&s.u.dr[k], &s.u.dz[k], &ddr(&c8, g), &ddz(&c8, g))));
            // (1/R) dZ( rho_hat F0 v d_phi(v dZ psi) / R^3 )
            //   with rho_hat / R^3 = rho / R
            let c9 = rho.mul(&geom.inv_r).mul(v).mul(&y_z[k]).scale(f0);
            t = t.add(&geom.inv_r.mul(&ddz(&c9, g)));
            // (1/R) dR( rho_hat F0 v d_phi(v dR psi) / R^3 )
            let c10 = rho.mul(&geom.inv_r).mul(v).mul(&y_r[k]).scale(f0);
            t = t.add(&geom.inv_r.mul(&ddr(&c10, g)));
            // -(1/R) dZ( rho_hat F0^2 v^2 / R^3 )
            let c11 = rho.mul(&geom.inv_r).mul(v).mul(v).scale(f0 * f0);
            t = t.sub(&geom.inv_r.mul(&ddz(&c11, g)));
        }
        out.push(t);
    }
    project_slices(&out, g)
}

/// B-side of the density equation; the parallel-velocity transport terms are
/// part of the exact model and follow `with_vpar` alone.
pub fn rhs_density(state: &State, ctx: &Ctx) -> SpectralField {
    let s = StateSlices::new(state, ctx.bc, ctx.grid);
    rhs_density_sl(&s, ctx)
}

pub(crate) fn rhs_density_sl(s: &StateSlices, ctx: &Ctx) -> SpectralField {
    let g = ctx.grid;
    let geom = Geom::new(g);
    let f0 = ctx.params.f0;
    let aniso = if ctx.params.k_par != 0.0 || ctx.params.k_perp != 0.0 {
        Some(aniso_stack(&s.rho.v, &s.psi, &geom, f0, ctx.params.k_par, ctx.params.k_perp, g)
            .expect("anisotropic diffusion of rho"))
    } else {
        None
    };
    let mut out = Vec::with_capacity(g.n_phi);
    for k in 0..g.n_phi {
        let mut t = geom
            .r
            .mul(&br(&s.rho.dr[k], &s.rho.dz[k], &s.u.dr[k], &s.u.dz[k]));
        t = t.add(&s.rho.v[k].mul(&s.u.dz[k]).scale(2.0));
        if ctx.flags.with_vpar {
            let v = &s.vpar.v[k];
            t = t.sub(&v.mul(&s.dphi_rho[k]).mul(&geom.inv_r2).scale(f0));
            t = t.sub(&v.mul(&geom.inv_r).mul(&br(&s.rho.dr[k], &s.rho.dz[k], &s.psi.dr[k], &s.psi.dz[k])));
            t = t.sub(&s.rho.v[k].mul(&geom.inv_r).mul(&br(&s.vpar.dr[k], &s.vpar.dz[k], &s.psi.dr[k], &s.psi.dz[k])));
            t = t.sub(&s.rho.v[k].mul(&s.dphi_vpar[k]).mul(&geom.inv_r2).scale(f0));
        }
        if let Some(a) = &aniso {
            t = t.add(&a[k]);
        }
        if ctx.params.hyper_rho != 0.0 {
            t = t.add(&delta_pol(&s.rho.v[k], g).scale(ctx.params.hyper_rho));
        }
        out.push(t);
    }
    project_slices(&out, g)
}

/// B-side of the pressure equation.
pub fn rhs_pressure(state: &State, ctx: &Ctx) -> SpectralField {
    let s = StateSlices::new(state, ctx.bc, ctx.grid);
    rhs_pressure_sl(&s, ctx)
}

pub(crate) fn rhs_pressure_sl(s: &StateSlices, ctx: &Ctx) -> SpectralField {
    let g = ctx.grid;
    let geom = Geom::new(g);
    let f0 = ctx.params.f0;
    let gamma = ctx.params.gamma;
    let aniso = if ctx.params.k_par != 0.0 || ctx.params.k_perp != 0.0 {
        let tsl = temperature_slices(s, ctx.params);
        Some(aniso_stack(&tsl, &s.psi, &geom, f0, ctx.params.k_par, ctx.params.k_perp, g)
            .expect("anisotropic diffusion of T"))
    } else {
        None
    };
    let mut out = Vec::with_capacity(g.n_phi);
    for k in 0..g.n_phi {
        let mut t = geom
            .r
            .mul(&br(&s.p.dr[k], &s.p.dz[k], &s.u.dr[k], &s.u.dz[k]));
        t = t.add(&s.p.v[k].mul(&s.u.dz[k]).scale(2.0 * gamma));
        if ctx.flags.with_vpar {
            let v = &s.vpar.v[k];
            t = t.sub(&v.mul(&s.dphi_p[k]).mul(&geom.inv_r2).scale(f0));
            t = t.sub(&v.mul(&geom.inv_r).mul(&br(&s.p.dr[k], &s.p.dz[k], &s.psi.dr[k], &s.psi.dz[k])));
            t = t.sub(
                &s.p.v[k]
                    .mul(&geom.inv_r)
                    .mul(&br(&s.vpar.dr[k], &s.vpar.dz[k], &s.psi.dr[k], &s.psi.dz[k]))
                    .scale(gamma),
            );
            t = t.sub(&s.p.v[k].mul(&s.dphi_vpar[k]).mul(&geom.inv_r2).scale(gamma * f0));
        }
        if let Some(a) = &aniso {
            t = t.add(&a[k]);
        }
        if ctx.params.hyper_p != 0.0 {
            t = t.add(&delta_pol(&s.p.v[k], g).scale(ctx.params.hyper_p));
        }
        out.push(t);
    }
    project_slices(&out, g)
}

/// B-side of the parallel-velocity equation.  The pressure drive is always
/// present; the advection-derived block follows `neglected_terms`.
pub fn rhs_vpar(state: &State, ctx: &Ctx) -> Result<SpectralField, ModelError> {
    if !ctx.flags.with_vpar {
        return Err(ModelError::VparDisabled);
    }
    let s = StateSlices::new(state, ctx.bc, ctx.grid);
    Ok(rhs_vpar_sl(&s, ctx))
}

pub(crate) fn rhs_vpar_sl(s: &StateSlices, ctx: &Ctx) -> SpectralField {
    let g = ctx.grid;
    let geom = Geom::new(g);
    let f0 = ctx.params.f0;
    let cross = ctx.flags.neglected_terms;

    // d_phi( v^2 |B|^2 / 2 ) as a stack.
    let x_half: Vec<Padded> = (0..g.n_phi)
        .map(|k| {
            let b2 = b2_slice(s, &geom, f0, k);
            s.vpar.v[k].mul(&s.vpar.v[k]).mul(&b2).scale(0.5)
        })
        .collect();
    let dphi_x = if cross { d_phi_slices(&x_half, g) } else { Vec::new() };

    let mut out = Vec::with_capacity(g.n_phi);
    for k in 0..g.n_phi {
        // -(1/R)[p, psi] - (F0/R^2) d_phi p
        let mut t = geom
            .inv_r
            .mul(&br(&s.p.dr[k], &s.p.dz[k], &s.psi.dr[k], &s.psi.dz[k]))
            .scale(-1.0);
        t = t.sub(&geom.inv_r2.mul(&s.dphi_p[k]).scale(f0));

        if cross {
            let v = &s.vpar.v[k];
            let rho = &s.rho.v[k];
            let b2 = b2_slice(s, &geom, f0, k);
            let bpol2 = geom
                .inv_r2
                .mul(&s.psi.dr[k].mul(&s.psi.dr[k]).add(&s.psi.dz[k].mul(&s.psi.dz[k])));
            let gradu2 = s.u.dr[k].mul(&s.u.dr[k]).add(&s.u.dz[k].mul(&s.u.dz[k]));
            let gpsi_gu = s.psi.dr[k]
                .mul(&s.u.dr[k])
                .add(&s.psi.dz[k].mul(&s.u.dz[k]));

            // (rho/R)[psi, v^2 |B|^2 / 2]
            t = t.add(&rho.mul(&geom.inv_r).mul(&br(
                &s.psi.dr[k],
                &s.psi.dz[k],
                &ddr(&x_half[k], g),
                &ddz(&x_half[k], g),
            )));
            // -rho (F0/R^2) d_phi( v^2 |B|^2 / 2 )
            t = t.sub(&rho.mul(&geom.inv_r2).mul(&dphi_x[k]).scale(f0));
            // -(1/2R) rho [R^2 |grad u|^2, psi]
            let a = geom.r2.mul(&gradu2);
            t = t.sub(
                &rho.mul(&geom.inv_r)
                    .mul(&br(&ddr(&a, g), &ddz(&a, g), &s.psi.dr[k], &s.psi.dz[k]))
                    .scale(0.5),
            );
            // -(rho_hat/R) w [psi, u] = -R rho w [psi, u]
            t = t.sub(&geom.r.mul(rho).mul(&s.w.v[k]).mul(&br(
                &s.psi.dr[k],
                &s.psi.dz[k],
                &s.u.dr[k],
                &s.u.dz[k],
            )));
            // -R rho |B|^2 [u, v]
            t = t.sub(&geom.r.mul(rho).mul(&b2).mul(&br(
                &s.u.dr[k],
                &s.u.dz[k],
                &s.vpar.dr[k],
                &s.vpar.dz[k],
            )));
            // -R rho v [u, |B|^2/2]
            let b2h = b2.scale(0.5);
            t = t.sub(&geom.r.mul(rho).mul(v).mul(&br(
                &s.u.dr[k],
                &s.u.dz[k],
                &ddr(&b2h, g),
                &ddz(&b2h, g),
            )));
            // +R rho v [u, |B_pol|^2/2]
            let bp2h = bpol2.scale(0.5);
            t = t.add(&geom.r.mul(rho).mul(v).mul(&br(
                &s.u.dr[k],
                &s.u.dz[k],
                &ddr(&bp2h, g),
                &ddz(&bp2h, g),
            )));
            // -rho v (j/R) [u, psi]
            t = t.sub(&rho.mul(v).mul(&s.j.v[k]).mul(&geom.inv_r).mul(&br(
                &s.u.dr[k],
                &s.u.dz[k],
                &s.psi.dr[k],
                &s.psi.dz[k],
            )));
            // -(rho v / R) [psi, (grad psi . grad u)]
            t = t.sub(&rho.mul(v).mul(&geom.inv_r).mul(&br(
                &s.psi.dr[k],
                &s.psi.dz[k],
                &ddr(&gpsi_gu, g),
                &ddz(&gpsi_gu, g),
            )));
            // +rho v (F0/R^2)(grad psi . grad d_phi u)
            let gpsi_gdphiu = s.psi.dr[k]
                .mul(&s.dphi_u.dr[k])
                .add(&s.psi.dz[k].mul(&s.dphi_u.dz[k]));
            t = t.add(&rho.mul(v).mul(&geom.inv_r2).mul(&gpsi_gdphiu).scale(f0));
            // +rho v (F0^2/R^2) dZ(u)
            t = t.add(&rho.mul(v).mul(&geom.inv_r2).mul(&s.u.dz[k]).scale(f0 * f0));
        }
        if ctx.params.hyper_vpar != 0.0 {
            t = t.add(&delta_pol(&s.vpar.v[k], g).scale(ctx.params.hyper_vpar));
        }
        out.push(t);
    }
    project_slices(&out, g)
}

fn b2_slice(s: &StateSlices, geom: &Geom, f0: f64, k: usize) -> Padded {
    let gpsi2 = s.psi.dr[k].mul(&s.psi.dr[k]).add(&s.psi.dz[k].mul(&s.psi.dz[k]));
    geom.inv_r2.mul(&gpsi2.map(|x| x + f0 * f0))
}

/// Anisotropic diffusion div(k_par grad_par T + k_perp grad_perp T) as a
/// slice stack, with grad_par built from the same B stencils:
/// div((k_par - k_perp) b (b . grad T)) + k_perp Laplace(T).
fn aniso_stack(
    tv: &[Padded],
    psi: &FieldSl,
    geom: &Geom,
    f0: f64,
    k_par: f64,
    k_perp: f64,
    g: &Grid,
) -> Result<Vec<Padded>, ModelError> {
    let dphi_t = d_phi_slices(tv, g);
    let dk = k_par - k_perp;

    // b (b . grad T) per slice, needs |B|^2 > 0.
    let mut f_r = Vec::with_capacity(g.n_phi);
    let mut f_phi = Vec::with_capacity(g.n_phi);
    let mut f_z = Vec::with_capacity(g.n_phi);
    let mut min_b2 = f64::INFINITY;
    for k in 0..g.n_phi {
        let b_r = geom.inv_r.mul(&psi.dz[k]);
        let b_z = geom.inv_r.mul(&psi.dr[k]).scale(-1.0);
        let b_phi = geom.inv_r.scale(f0);
        let b2 = b_r.mul(&b_r).add(&b_z.mul(&b_z)).add(&b_phi.mul(&b_phi));
        min_b2 = min_b2.min(b2.a.iter().fold(f64::INFINITY, |m, &x| m.min(x)));
        let tdr = ddr(&tv[k], g);
        let tdz = ddz(&tv[k], g);
        let b_dot_gt = b_r
            .mul(&tdr)
            .add(&b_phi.mul(&dphi_t[k]).mul(&geom.inv_r))
            .add(&b_z.mul(&tdz));
        let scale = b_dot_gt.zip(&b2, |num, den| dk * num / den);
        f_r.push(b_r.mul(&scale));
        f_phi.push(b_phi.mul(&scale));
        f_z.push(b_z.mul(&scale));
    }
    if min_b2 < B2_MIN {
        return Err(ModelError::DegenerateField { min_b2 });
    }

    let dphi_fphi = d_phi_slices(&f_phi, g);
    let mut out = Vec::with_capacity(g.n_phi);
    for k in 0..g.n_phi {
        // div F = (1/R) dR(R F_r) + (1/R) d_phi F_phi + dZ F_z
        let rfr = geom.r.mul(&f_r[k]);
        let mut t = geom.inv_r.mul(&ddr(&rfr, g));
        t = t.add(&geom.inv_r.mul(&dphi_fphi[k]));
        t = t.add(&ddz(&f_z[k], g));
        if k_perp != 0.0 {
            // full Laplacian: Delta_pol + d_phiphi / R^2
            let ddphi2 = d_phi_slices(&d_phi_slices(tv, g), g);
            t = t.add(&delta_pol(&tv[k], g).scale(k_perp));
            t = t.add(&geom.inv_r2.mul(&ddphi2[k]).scale(k_perp));
        }
        out.push(t);
    }
    Ok(out)
}

/// Public anisotropic-diffusion operator on a scalar field, with B derived
/// from the flux function by the shared stencils.
pub fn anisotropic_diffusion(
    t: &SpectralField,
    psi: &SpectralField,
    f0: f64,
    k_par: f64,
    k_perp: f64,
    bc_t: FieldBc,
    bc_psi: FieldBc,
    grid: &Grid,
) -> Result<SpectralField, ModelError> {
    let geom = Geom::new(grid);
    let tsl = field_slices(t, bc_t, grid);
    let psl = field_slices(psi, bc_psi, grid);
    let stack = aniso_stack(&tsl.v, &psl, &geom, f0, k_par, k_perp, grid)?;
    Ok(project_slices(&stack, grid))
}

/// Implicit-increment form of the vorticity-row time terms, divided by dt:
/// div(rho_hat^new grad_pol (du/dt)) - div(rho^new d(v grad psi)/dt);
/// coefficients at the new state, the second block gated with the cross
/// terms it belongs to.
pub fn lhs_vorticity_increment(
    state_new: &State,
    state_old: &State,
    dt: f64,
    ctx: &Ctx,
) -> SpectralField {
    assert!(dt > 0.0, "dt must be positive");
    let g = ctx.grid;
    let s_new = StateSlices::new(state_new, ctx.bc, g);
    let du = state_new.u.sub(&state_old.u).scaled(1.0 / dt);
    let out = if ctx.flags.with_vpar && ctx.flags.neglected_terms {
        let s_old = StateSlices::new(state_old, ctx.bc, g);
        let (wr, wz) = vgradpsi_delta(&s_new, &s_old, 1.0 / dt, g);
        u_row_time(&s_new, &du, Some((&wr, &wz)), ctx)
    } else {
        u_row_time(&s_new, &du, None, ctx)
    };
    out
}

/// v grad_pol psi product slices of `a` minus `b`, scaled.
pub(crate) fn vgradpsi_delta(
    a: &StateSlices,
    b: &StateSlices,
    scale: f64,
    g: &Grid,
) -> (Vec<Padded>, Vec<Padded>) {
    let wr = (0..g.n_phi)
        .map(|k| a.vpar.v[k].mul(&a.psi.dr[k]).sub(&b.vpar.v[k].mul(&b.psi.dr[k])).scale(scale))
        .collect();
    let wz = (0..g.n_phi)
        .map(|k| a.vpar.v[k].mul(&a.psi.dz[k]).sub(&b.vpar.v[k].mul(&b.psi.dz[k])).scale(scale))
        .collect();
    (wr, wz)
}

/// div(rho_hat grad_pol du) - div(rho W) with coefficients from `coef`.
pub(crate) fn u_row_time(
    coef: &StateSlices,
    du: &SpectralField,
    w: Option<(&[Padded], &[Padded])>,
    ctx: &Ctx,
) -> SpectralField {
    let g = ctx.grid;
    let geom = Geom::new(g);
    // The increment shares the boundary trace of u, so it closes homogeneously.
    let dsl = field_slices(du, FieldBc::Zero, g);
    let mut out = Vec::with_capacity(g.n_phi);
    for k in 0..g.n_phi {
        let rho_hat = geom.r2.mul(&coef.rho.v[k]);
        let mut t = div_cpol(&rho_hat, &dsl.v[k], g);
        if let Some((wr, wz)) = w {
            // div(rho W) = (1/R) dR(R rho W_r) + dZ(rho W_z)
            let rr = geom.r.mul(&coef.rho.v[k]).mul(&wr[k]);
            let zz = coef.rho.v[k].mul(&wz[k]);
            let d = geom.inv_r.mul(&ddr(&rr, g)).add(&ddz(&zz, g));
            t = t.sub(&d);
        }
        out.push(t);
    }
    project_slices(&out, g)
}

/// Implicit-increment form of the parallel-velocity time terms, divided by dt:
/// rho |B|^2 dv/dt + rho v (grad psi . grad dpsi)/(R^2 dt) - rho (grad psi . grad du)/dt.
pub fn lhs_vpar_increment(
    state_new: &State,
    state_old: &State,
    dt: f64,
    ctx: &Ctx,
) -> Result<SpectralField, ModelError> {
    if !ctx.flags.with_vpar {
        return Err(ModelError::VparDisabled);
    }
    assert!(dt > 0.0, "dt must be positive");
    let s_new = StateSlices::new(state_new, ctx.bc, ctx.grid);
    let dpsi = state_new.psi.sub(&state_old.psi).scaled(1.0 / dt);
    let du = state_new.u.sub(&state_old.u).scaled(1.0 / dt);
    let dv = state_new.vpar.sub(&state_old.vpar).scaled(1.0 / dt);
    Ok(vpar_row_time(&s_new, &dpsi, &du, &dv, ctx))
}

pub(crate) fn vpar_row_time(
    coef: &StateSlices,
    dpsi: &SpectralField,
    du: &SpectralField,
    dv: &SpectralField,
    ctx: &Ctx,
) -> SpectralField {
    let g = ctx.grid;
    let geom = Geom::new(g);
    let f0 = ctx.params.f0;
    let dpsi_sl = field_slices(dpsi, FieldBc::Zero, g);
    let du_sl = field_slices(du, FieldBc::Zero, g);
    let dv_sl = field_slices(dv, FieldBc::Zero, g);
    let mut out = Vec::with_capacity(g.n_phi);
    for k in 0..g.n_phi {
        let rho = &coef.rho.v[k];
        let b2 = b2_slice(coef, &geom, f0, k);
        let mut t = rho.mul(&b2).mul(&dv_sl.v[k]);
        let gpsi_gdpsi = coef.psi.dr[k]
            .mul(&dpsi_sl.dr[k])
            .add(&coef.psi.dz[k].mul(&dpsi_sl.dz[k]));
        t = t.add(&rho.mul(&coef.vpar.v[k]).mul(&geom.inv_r2).mul(&gpsi_gdpsi));
        let gpsi_gdu = coef.psi.dr[k]
            .mul(&du_sl.dr[k])
            .add(&coef.psi.dz[k].mul(&du_sl.dz[k]));
        t = t.sub(&rho.mul(&gpsi_gdu));
        out.push(t);
    }
    project_slices(&out, g)
}

/// All B-sides of the active model variant from one slice cache.
pub struct RhsAll {
    pub psi: SpectralField,
    pub u: SpectralField,
    pub rho: SpectralField,
    pub p: SpectralField,
    pub vpar: Option<SpectralField>,
}

pub fn rhs_all(state: &State, ctx: &Ctx) -> RhsAll {
    let s = StateSlices::new(state, ctx.bc, ctx.grid);
    RhsAll {
        psi: rhs_psi_sl(&s, ctx),
        u: rhs_vorticity_sl(&s, ctx),
        rho: rhs_density_sl(&s, ctx),
        p: rhs_pressure_sl(&s, ctx),
        vpar: if ctx.flags.with_vpar {
            Some(rhs_vpar_sl(&s, ctx))
        } else {
            None
        },
    }
}
