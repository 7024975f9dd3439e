//! The closed catalog of projection identities and the refinement study.

use crate::geometry::padded::{delta_pol, delta_star, div_cpol, Padded};
use crate::geometry::{d_phi_slices, FieldBc, Grid};
use crate::model::slices::{field_slices, FieldSl, Geom};

use super::bundle::FieldBundle;
use super::vector::{grad, s_add, s_ddr, s_ddz, s_mul, s_scale, s_sub, s_wmul, Stack, V3};

/// Identity names from the derivation catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentityId {
    U2,
    U3,
    U5,
    U6,
    U8,
    U12b,
    U13b,
    Rho,
    T,
    DtVpar1,
    DtVpar2,
    Vp1,
    Vp3,
    Vp4,
    Vp5,
    Vp6,
}

impl IdentityId {
    pub const ALL: [IdentityId; 16] = [
        IdentityId::U2,
        IdentityId::U3,
        IdentityId::U5,
        IdentityId::U6,
        IdentityId::U8,
        IdentityId::U12b,
        IdentityId::U13b,
        IdentityId::Rho,
        IdentityId::T,
        IdentityId::DtVpar1,
        IdentityId::DtVpar2,
        IdentityId::Vp1,
        IdentityId::Vp3,
        IdentityId::Vp4,
        IdentityId::Vp5,
        IdentityId::Vp6,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            IdentityId::U2 => "u2",
            IdentityId::U3 => "u3",
            IdentityId::U5 => "u5",
            IdentityId::U6 => "u6",
            IdentityId::U8 => "u8",
            IdentityId::U12b => "u12b",
            IdentityId::U13b => "u13b",
            IdentityId::Rho => "rho",
            IdentityId::T => "T",
            IdentityId::DtVpar1 => "dtvpar1",
            IdentityId::DtVpar2 => "dtvpar2",
            IdentityId::Vp1 => "vp1",
            IdentityId::Vp3 => "vp3",
            IdentityId::Vp4 => "vp4",
            IdentityId::Vp5 => "vp5",
            IdentityId::Vp6 => "vp6",
        }
    }

    pub fn parse(s: &str) -> Option<IdentityId> {
        IdentityId::ALL.iter().copied().find(|id| id.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentityKind {
    PointwiseField,
    ScalarIntegral,
}

/// One catalog entry.  The recipes themselves are dispatched by id; the
/// record pins the closed catalog and the kind of residual reported.
#[derive(Debug, Clone, Copy)]
pub struct IdentityRecord {
    pub id: IdentityId,
    pub kind: IdentityKind,
}

pub fn catalog() -> Vec<IdentityRecord> {
    IdentityId::ALL
        .iter()
        .map(|&id| IdentityRecord {
            id,
            kind: IdentityKind::PointwiseField,
        })
        .collect()
}

/// Bundle slices with derivatives, plus the geometry weights.
struct B<'a> {
    g: &'a Grid,
    f0: f64,
    geom: Geom,
    psi: FieldSl,
    u: FieldSl,
    rho: FieldSl,
    p: FieldSl,
    vpar: FieldSl,
    psi_dot: FieldSl,
    u_dot: FieldSl,
    vpar_dot: FieldSl,
}

impl<'a> B<'a> {
    fn new(fb: &FieldBundle, f0: f64, g: &'a Grid) -> B<'a> {
        let sl = |f| field_slices(f, FieldBc::Zero, g);
        B {
            g,
            f0,
            geom: Geom::new(g),
            psi: sl(&fb.psi),
            u: sl(&fb.u),
            rho: sl(&fb.rho),
            p: sl(&fb.p),
            vpar: sl(&fb.vpar),
            psi_dot: sl(&fb.psi_dot),
            u_dot: sl(&fb.u_dot),
            vpar_dot: sl(&fb.vpar_dot),
        }
    }

    fn nphi(&self) -> usize {
        self.g.n_phi
    }

    /// B = (F0/R) e_phi + (1/R) grad psi x e_phi.
    fn b_vec(&self) -> V3 {
        V3 {
            r: s_wmul(&self.psi.dz, &self.geom.inv_r),
            phi: (0..self.nphi()).map(|_| self.geom.inv_r.scale(self.f0)).collect(),
            z: s_scale(&s_wmul(&self.psi.dr, &self.geom.inv_r), -1.0),
        }
    }

    /// d_t B from psi_dot (the toroidal part is static).
    fn b_dot_vec(&self) -> V3 {
        V3 {
            r: s_wmul(&self.psi_dot.dz, &self.geom.inv_r),
            phi: (0..self.nphi()).map(|_| Padded::zeros(self.g)).collect(),
            z: s_scale(&s_wmul(&self.psi_dot.dr, &self.geom.inv_r), -1.0),
        }
    }

    /// v_pol = -R dZ(u) e_R + R dR(u) e_Z from an arbitrary potential.
    fn vpol_of(&self, f: &FieldSl) -> V3 {
        V3 {
            r: s_scale(&s_wmul(&f.dz, &self.geom.r), -1.0),
            phi: (0..self.nphi()).map(|_| Padded::zeros(self.g)).collect(),
            z: s_wmul(&f.dr, &self.geom.r),
        }
    }

    fn brk(&self, a: &[Padded], b: &[Padded]) -> Stack {
        s_sub(
            &s_mul(&s_ddr(a, self.g), &s_ddz(b, self.g)),
            &s_mul(&s_ddz(a, self.g), &s_ddr(b, self.g)),
        )
    }

    fn brk_pre(&self, adr: &[Padded], adz: &[Padded], bdr: &[Padded], bdz: &[Padded]) -> Stack {
        s_sub(&s_mul(adr, bdz), &s_mul(adz, bdr))
    }
}

/// LHS - RHS slice stacks for a pointwise identity.
fn eval_identity(id: IdentityId, b: &B, corrupt: bool) -> (Stack, Stack) {
    let g = b.g;
    let f0 = b.f0;
    let geom = &b.geom;
    let flip = if corrupt { -1.0 } else { 1.0 };
    match id {
        IdentityId::U2 => {
            // e_phi . curl(R^2 rho d_t v_pol)  vs  R div(rho R^2 grad_pol du/dt)
            let w = b
                .vpol_of(&b.u_dot)
                .scale_stack(&b.rho.v)
                .scale_weight(&geom.r2);
            let lhs = w.curl(g).phi;
            let rho_hat: Stack = b.rho.v.iter().map(|r| r.mul(&geom.r2)).collect();
            let rhs: Stack = (0..g.n_phi)
                .map(|k| div_cpol(&rho_hat[k], &b.u_dot.v[k], g).mul(&geom.r))
                .collect();
            (lhs, rhs)
        }
        IdentityId::U3 => {
            // e_phi . curl(R^2 rho d_t(v B))  vs  -R div(rho d_t(v grad psi))
            let vb_dot = b
                .b_vec()
                .scale_stack(&b.vpar_dot.v)
                .add(&b.b_dot_vec().scale_stack(&b.vpar.v));
            let w = vb_dot.scale_stack(&b.rho.v).scale_weight(&geom.r2);
            let lhs = w.curl(g).phi;
            let xr: Stack = (0..g.n_phi)
                .map(|k| {
                    b.rho.v[k].mul(
                        &b.vpar_dot.v[k]
                            .mul(&b.psi.dr[k])
                            .add(&b.vpar.v[k].mul(&b.psi_dot.dr[k])),
                    )
                })
                .collect();
            let xz: Stack = (0..g.n_phi)
                .map(|k| {
                    b.rho.v[k].mul(
                        &b.vpar_dot.v[k]
                            .mul(&b.psi.dz[k])
                            .add(&b.vpar.v[k].mul(&b.psi_dot.dz[k])),
                    )
                })
                .collect();
            // R [ (1/R) dR(R X_r) + dZ(X_z) ]
            let rxr = s_wmul(&xr, &geom.r);
            let div = s_add(&s_wmul(&s_ddr(&rxr, g), &geom.inv_r), &s_ddz(&xz, g));
            let rhs = s_scale(&s_wmul(&div, &geom.r), -1.0);
            (lhs, rhs)
        }
        IdentityId::U5 => {
            // e_phi . curl(R^2 (J x B)), J = curl B  vs  [psi, j] - (F0/R) d_phi j
            let bv = b.b_vec();
            let jv = bv.curl(g);
            // J x B in the left-handed basis (e_R x e_phi = -e_Z and cyclic)
            let cross = V3 {
                r: s_sub(&s_mul(&jv.z, &bv.phi), &s_mul(&jv.phi, &bv.z)),
                phi: s_sub(&s_mul(&jv.r, &bv.z), &s_mul(&jv.z, &bv.r)),
                z: s_sub(&s_mul(&jv.phi, &bv.r), &s_mul(&jv.r, &bv.phi)),
            };
            let lhs = cross.scale_weight(&geom.r2).curl(g).phi;
            let j: Stack = (0..g.n_phi).map(|k| delta_star(&b.psi.v[k], g)).collect();
            let dphi_j = d_phi_slices(&j, g);
            let rhs = s_sub(
                &b.brk_pre(&b.psi.dr, &b.psi.dz, &s_ddr(&j, g), &s_ddz(&j, g)),
                &s_scale(&s_wmul(&dphi_j, &geom.inv_r), f0),
            );
            (lhs, rhs)
        }
        IdentityId::U6 => {
            // e_phi . curl(R^2 grad p)  vs  [R^2, p]
            let lhs = grad(&b.p.v, g).scale_weight(&geom.r2).curl(g).phi;
            let r2stack: Stack = (0..g.n_phi).map(|_| geom.r2.clone()).collect();
            let rhs = s_scale(&b.brk(&r2stack, &b.p.v), flip);
            (lhs, rhs)
        }
        IdentityId::U8 => {
            // e_phi . curl(rho_hat v_pol . grad v_pol)
            //   vs -1/2 [R^2 |grad u|^2, rho_hat] - [R^2 rho_hat w, u]
            let vpol = b.vpol_of(&b.u);
            let adv = vpol.advect(&vpol, g);
            let rho_hat: Stack = s_wmul(&b.rho.v, &geom.r2);
            let lhs = adv.scale_stack(&rho_hat).curl(g).phi;
            let gradu2 = s_add(&s_mul(&b.u.dr, &b.u.dr), &s_mul(&b.u.dz, &b.u.dz));
            let x = s_wmul(&gradu2, &geom.r2);
            let t1 = s_scale(&b.brk(&x, &rho_hat), -0.5);
            let y = s_wmul(&s_mul(&rho_hat, &wslices(b)), &geom.r2);
            let t2 = s_scale(&b.brk(&y, &b.u.v), -1.0);
            (lhs, s_add(&t1, &t2))
        }
        IdentityId::U12b => {
            // e_phi . curl(R^2 rho (vB . grad vB))
            let vb = b.b_vec().scale_stack(&b.vpar.v);
            let adv = vb.advect(&vb, g);
            let lhs = adv
                .scale_stack(&b.rho.v)
                .scale_weight(&geom.r2)
                .curl(g)
                .phi;
            // -[rho v^2 j, psi] - [rho v (grad v . grad psi), psi]
            //   + 1/2 [rho_hat, v^2 |B_pol|^2]
            //   - dZ(rho_hat F0 v d_phi(v dZ psi)/R^3)
            //   - dR(rho_hat F0 v d_phi(v dR psi)/R^3)
            //   + dZ(rho_hat F0^2 v^2 / R^3)
            let j: Stack = (0..g.n_phi).map(|k| delta_star(&b.psi.v[k], g)).collect();
            let v2 = s_mul(&b.vpar.v, &b.vpar.v);
            let x1 = s_mul(&s_mul(&b.rho.v, &v2), &j);
            let mut rhs = s_scale(&b.brk(&x1, &b.psi.v), -1.0);
            let gv_gpsi = s_add(&s_mul(&b.vpar.dr, &b.psi.dr), &s_mul(&b.vpar.dz, &b.psi.dz));
            let x2 = s_mul(&s_mul(&b.rho.v, &b.vpar.v), &gv_gpsi);
            rhs = s_sub(&rhs, &b.brk(&x2, &b.psi.v));
            let rho_hat = s_wmul(&b.rho.v, &geom.r2);
            let bpol2 = s_wmul(
                &s_add(&s_mul(&b.psi.dr, &b.psi.dr), &s_mul(&b.psi.dz, &b.psi.dz)),
                &geom.inv_r2,
            );
            rhs = s_add(&rhs, &s_scale(&b.brk(&rho_hat, &s_mul(&v2, &bpol2)), 0.5));
            let inv_r3 = geom.inv_r2.mul(&geom.inv_r);
            let yz = d_phi_slices(&s_mul(&b.vpar.v, &b.psi.dz), g);
            let az = s_wmul(&s_mul(&s_mul(&rho_hat, &b.vpar.v), &yz), &inv_r3);
            rhs = s_sub(&rhs, &s_scale(&s_ddz(&az, g), f0));
            let yr = d_phi_slices(&s_mul(&b.vpar.v, &b.psi.dr), g);
            let ar = s_wmul(&s_mul(&s_mul(&rho_hat, &b.vpar.v), &yr), &inv_r3);
            rhs = s_sub(&rhs, &s_scale(&s_ddr(&ar, g), f0));
            let atz = s_wmul(&s_mul(&rho_hat, &v2), &inv_r3);
            rhs = s_add(&rhs, &s_scale(&s_ddz(&atz, g), f0 * f0));
            (lhs, rhs)
        }
        IdentityId::U13b => {
            // e_phi . curl(rho_hat [v_pol . grad(vB) + vB . grad(v_pol)])
            let vpol = b.vpol_of(&b.u);
            let vb = b.b_vec().scale_stack(&b.vpar.v);
            let adv = vpol.advect(&vb, g).add(&vb.advect(&vpol, g));
            let rho_hat = s_wmul(&b.rho.v, &geom.r2);
            let lhs = adv.scale_stack(&rho_hat).curl(g).phi;
            // -[rho_hat, v (grad psi . grad u)] + [rho_hat v w, psi]
            //  - [u, rho_hat v j] - [u, rho_hat (grad psi . grad v)]
            //  + R div(rho_hat (F0/R^2) v grad_pol(d_phi u))
            let gpsi_gu = s_add(&s_mul(&b.psi.dr, &b.u.dr), &s_mul(&b.psi.dz, &b.u.dz));
            let mut rhs = s_scale(&b.brk(&rho_hat, &s_mul(&b.vpar.v, &gpsi_gu)), -1.0);
            let w = wslices(b);
            rhs = s_add(&rhs, &b.brk(&s_mul(&s_mul(&rho_hat, &b.vpar.v), &w), &b.psi.v));
            let j: Stack = (0..g.n_phi).map(|k| delta_star(&b.psi.v[k], g)).collect();
            rhs = s_sub(&rhs, &b.brk(&b.u.v, &s_mul(&s_mul(&rho_hat, &b.vpar.v), &j)));
            let gpsi_gv = s_add(&s_mul(&b.psi.dr, &b.vpar.dr), &s_mul(&b.psi.dz, &b.vpar.dz));
            rhs = s_sub(&rhs, &b.brk(&b.u.v, &s_mul(&rho_hat, &gpsi_gv)));
            let dphi_u = d_phi_slices(&b.u.v, g);
            let coef: Stack = (0..g.n_phi)
                .map(|k| rho_hat[k].mul(&geom.inv_r2).mul(&b.vpar.v[k]).scale(f0))
                .collect();
            let divterm: Stack = (0..g.n_phi)
                .map(|k| div_cpol(&coef[k], &dphi_u[k], g).mul(&geom.r))
                .collect();
            rhs = s_add(&rhs, &divterm);
            (lhs, rhs)
        }
        IdentityId::Rho => {
            // -div(rho v)  vs  R[rho,u] + 2 rho dZ u - (v F0/R^2) d_phi rho
            //   - (v/R)[rho,psi] - (rho/R)[v,psi] - (rho F0/R^2) d_phi v
            let v = b.vpol_of(&b.u).add(&b.b_vec().scale_stack(&b.vpar.v));
            let lhs = s_scale(&v.scale_stack(&b.rho.v).div(g), -1.0);
            let mut rhs = s_wmul(&b.brk_pre(&b.rho.dr, &b.rho.dz, &b.u.dr, &b.u.dz), &geom.r);
            rhs = s_add(&rhs, &s_scale(&s_mul(&b.rho.v, &b.u.dz), 2.0));
            let dphi_rho = d_phi_slices(&b.rho.v, g);
            rhs = s_sub(
                &rhs,
                &s_scale(&s_wmul(&s_mul(&b.vpar.v, &dphi_rho), &geom.inv_r2), f0),
            );
            rhs = s_sub(
                &rhs,
                &s_wmul(
                    &s_mul(
                        &b.vpar.v,
                        &b.brk_pre(&b.rho.dr, &b.rho.dz, &b.psi.dr, &b.psi.dz),
                    ),
                    &geom.inv_r,
                ),
            );
            rhs = s_sub(
                &rhs,
                &s_wmul(
                    &s_mul(
                        &b.rho.v,
                        &b.brk_pre(&b.vpar.dr, &b.vpar.dz, &b.psi.dr, &b.psi.dz),
                    ),
                    &geom.inv_r,
                ),
            );
            let dphi_v = d_phi_slices(&b.vpar.v, g);
            rhs = s_sub(
                &rhs,
                &s_scale(&s_wmul(&s_mul(&b.rho.v, &dphi_v), &geom.inv_r2), f0),
            );
            (lhs, rhs)
        }
        IdentityId::T => {
            // -v . grad p - gamma p div v (gamma = 5/3 fixed by the recipe)
            let gamma = 5.0 / 3.0;
            let v = b.vpol_of(&b.u).add(&b.b_vec().scale_stack(&b.vpar.v));
            let mut lhs = s_scale(&v.dot(&grad(&b.p.v, g)), -1.0);
            lhs = s_sub(&lhs, &s_scale(&s_mul(&b.p.v, &v.div(g)), gamma));
            let mut rhs = s_wmul(&b.brk_pre(&b.p.dr, &b.p.dz, &b.u.dr, &b.u.dz), &geom.r);
            rhs = s_add(&rhs, &s_scale(&s_mul(&b.p.v, &b.u.dz), 2.0 * gamma));
            let dphi_p = d_phi_slices(&b.p.v, g);
            rhs = s_sub(
                &rhs,
                &s_scale(&s_wmul(&s_mul(&b.vpar.v, &dphi_p), &geom.inv_r2), f0),
            );
            rhs = s_sub(
                &rhs,
                &s_wmul(
                    &s_mul(&b.vpar.v, &b.brk_pre(&b.p.dr, &b.p.dz, &b.psi.dr, &b.psi.dz)),
                    &geom.inv_r,
                ),
            );
            rhs = s_sub(
                &rhs,
                &s_scale(
                    &s_wmul(
                        &s_mul(
                            &b.p.v,
                            &b.brk_pre(&b.vpar.dr, &b.vpar.dz, &b.psi.dr, &b.psi.dz),
                        ),
                        &geom.inv_r,
                    ),
                    gamma,
                ),
            );
            let dphi_v = d_phi_slices(&b.vpar.v, g);
            rhs = s_sub(
                &rhs,
                &s_scale(&s_wmul(&s_mul(&b.p.v, &dphi_v), &geom.inv_r2), gamma * f0),
            );
            (lhs, rhs)
        }
        IdentityId::DtVpar1 => {
            // B . (rho d_t(v B))  vs  rho |B|^2 dv + rho v (grad psi . grad dpsi)/R^2
            let vb_dot = b
                .b_vec()
                .scale_stack(&b.vpar_dot.v)
                .add(&b.b_dot_vec().scale_stack(&b.vpar.v));
            let lhs = s_mul(&b.b_vec().dot(&vb_dot), &b.rho.v);
            let b2 = b2_stack(b);
            let mut rhs = s_mul(&s_mul(&b.rho.v, &b2), &b.vpar_dot.v);
            let gpsi_gdpsi = s_add(
                &s_mul(&b.psi.dr, &b.psi_dot.dr),
                &s_mul(&b.psi.dz, &b.psi_dot.dz),
            );
            rhs = s_add(
                &rhs,
                &s_wmul(&s_mul(&s_mul(&b.rho.v, &b.vpar.v), &gpsi_gdpsi), &geom.inv_r2),
            );
            (lhs, rhs)
        }
        IdentityId::DtVpar2 => {
            // B . (rho d_t v_pol)  vs  -rho (grad psi . grad du)
            let lhs = s_mul(&b.b_vec().dot(&b.vpol_of(&b.u_dot)), &b.rho.v);
            let gpsi_gdu = s_add(
                &s_mul(&b.psi.dr, &b.u_dot.dr),
                &s_mul(&b.psi.dz, &b.u_dot.dz),
            );
            let rhs = s_scale(&s_mul(&b.rho.v, &gpsi_gdu), -1.0);
            (lhs, rhs)
        }
        IdentityId::Vp1 => {
            // B . grad p  vs  (F0/R^2) d_phi p + (1/R)[p, psi]
            let lhs = b.b_vec().dot(&grad(&b.p.v, g));
            let dphi_p = d_phi_slices(&b.p.v, g);
            let rhs = s_add(
                &s_scale(&s_wmul(&dphi_p, &geom.inv_r2), f0),
                &s_wmul(
                    &b.brk_pre(&b.p.dr, &b.p.dz, &b.psi.dr, &b.psi.dz),
                    &geom.inv_r,
                ),
            );
            (lhs, rhs)
        }
        IdentityId::Vp3 => {
            // B . (rho vB . grad vB)
            //   vs -(rho/R)[psi, v^2|B|^2/2] + rho (F0/R^2) d_phi(v^2|B|^2/2)
            let vb = b.b_vec().scale_stack(&b.vpar.v);
            let lhs = s_mul(&b.b_vec().dot(&vb.advect(&vb, g)), &b.rho.v);
            let x = s_scale(&s_mul(&s_mul(&b.vpar.v, &b.vpar.v), &b2_stack(b)), 0.5);
            let mut rhs = s_scale(
                &s_wmul(&s_mul(&b.rho.v, &b.brk(&b.psi.v, &x)), &geom.inv_r),
                -1.0,
            );
            let dphi_x = d_phi_slices(&x, g);
            rhs = s_add(
                &rhs,
                &s_scale(&s_wmul(&s_mul(&b.rho.v, &dphi_x), &geom.inv_r2), f0),
            );
            (lhs, rhs)
        }
        IdentityId::Vp4 => {
            // B . (rho v_pol . grad v_pol)
            //   vs (1/2R) rho [R^2 |grad u|^2, psi] + rho R w [psi, u]
            let vpol = b.vpol_of(&b.u);
            let lhs = s_mul(&b.b_vec().dot(&vpol.advect(&vpol, g)), &b.rho.v);
            let gradu2 = s_add(&s_mul(&b.u.dr, &b.u.dr), &s_mul(&b.u.dz, &b.u.dz));
            let x = s_wmul(&gradu2, &geom.r2);
            let mut rhs = s_scale(
                &s_wmul(&s_mul(&b.rho.v, &b.brk(&x, &b.psi.v)), &geom.inv_r),
                0.5,
            );
            let w = wslices(b);
            rhs = s_add(
                &rhs,
                &s_wmul(
                    &s_mul(
                        &s_mul(&b.rho.v, &w),
                        &b.brk_pre(&b.psi.dr, &b.psi.dz, &b.u.dr, &b.u.dz),
                    ),
                    &geom.r,
                ),
            );
            (lhs, rhs)
        }
        IdentityId::Vp5 => {
            // B . (rho v_pol . grad vB)
            //   vs R rho |B|^2 [u, v] + R rho v [u, |B|^2/2]
            let vpol = b.vpol_of(&b.u);
            let vb = b.b_vec().scale_stack(&b.vpar.v);
            let lhs = s_mul(&b.b_vec().dot(&vpol.advect(&vb, g)), &b.rho.v);
            let b2 = b2_stack(b);
            let mut rhs = s_wmul(
                &s_mul(
                    &s_mul(&b.rho.v, &b2),
                    &b.brk_pre(&b.u.dr, &b.u.dz, &b.vpar.dr, &b.vpar.dz),
                ),
                &geom.r,
            );
            let b2h = s_scale(&b2, 0.5);
            rhs = s_add(
                &rhs,
                &s_wmul(
                    &s_mul(&s_mul(&b.rho.v, &b.vpar.v), &b.brk(&b.u.v, &b2h)),
                    &geom.r,
                ),
            );
            (lhs, rhs)
        }
        IdentityId::Vp6 => {
            // B . (rho vB . grad v_pol)
            //   vs -R rho v [u, |B_pol|^2/2] + rho v (j/R)[u, psi]
            //      + (rho v/R)[psi, (grad psi . grad u)]
            //      - rho v (F0/R^2)(grad psi . grad d_phi u)
            //      - rho v (F0^2/R^2) dZ u
            let vpol = b.vpol_of(&b.u);
            let vb = b.b_vec().scale_stack(&b.vpar.v);
            let lhs = s_mul(&b.b_vec().dot(&vb.advect(&vpol, g)), &b.rho.v);
            let rv = s_mul(&b.rho.v, &b.vpar.v);
            let bpol2 = s_wmul(
                &s_add(&s_mul(&b.psi.dr, &b.psi.dr), &s_mul(&b.psi.dz, &b.psi.dz)),
                &geom.inv_r2,
            );
            let bp2h = s_scale(&bpol2, 0.5);
            let mut rhs = s_scale(
                &s_wmul(&s_mul(&rv, &b.brk(&b.u.v, &bp2h)), &geom.r),
                -1.0,
            );
            let j: Stack = (0..g.n_phi).map(|k| delta_star(&b.psi.v[k], g)).collect();
            rhs = s_add(
                &rhs,
                &s_wmul(
                    &s_mul(
                        &s_mul(&rv, &j),
                        &b.brk_pre(&b.u.dr, &b.u.dz, &b.psi.dr, &b.psi.dz),
                    ),
                    &geom.inv_r,
                ),
            );
            let gpsi_gu = s_add(&s_mul(&b.psi.dr, &b.u.dr), &s_mul(&b.psi.dz, &b.u.dz));
            rhs = s_add(
                &rhs,
                &s_wmul(&s_mul(&rv, &b.brk(&b.psi.v, &gpsi_gu)), &geom.inv_r),
            );
            let dphi_u = d_phi_slices(&b.u.v, g);
            let gpsi_gdphiu = s_add(
                &s_mul(&b.psi.dr, &s_ddr(&dphi_u, g)),
                &s_mul(&b.psi.dz, &s_ddz(&dphi_u, g)),
            );
            rhs = s_sub(
                &rhs,
                &s_scale(&s_wmul(&s_mul(&rv, &gpsi_gdphiu), &geom.inv_r2), f0),
            );
            rhs = s_sub(
                &rhs,
                &s_scale(&s_wmul(&s_mul(&rv, &b.u.dz), &geom.inv_r2), f0 * f0),
            );
            (lhs, rhs)
        }
    }
}

fn wslices(b: &B) -> Stack {
    (0..b.g.n_phi).map(|k| delta_pol(&b.u.v[k], b.g)).collect()
}

fn b2_stack(b: &B) -> Stack {
    let f0 = b.f0;
    s_wmul(
        &s_add(&s_mul(&b.psi.dr, &b.psi.dr), &s_mul(&b.psi.dz, &b.psi.dz)),
        &b.geom.inv_r2,
    )
    .iter()
    .map(|s| s.zip(&b.geom.inv_r2, |x, ir2| x + f0 * f0 * ir2))
    .collect()
}

/// L2(dV) residual of a pointwise identity on the manufactured bundle,
/// sampled over the collocation angles.
pub fn verify_identity(id: IdentityId, bundle: &FieldBundle, f0: f64, grid: &Grid) -> f64 {
    verify_identity_impl(id, bundle, f0, grid, false)
}

pub(crate) fn verify_identity_impl(
    id: IdentityId,
    bundle: &FieldBundle,
    f0: f64,
    grid: &Grid,
    corrupt: bool,
) -> f64 {
    let b = B::new(bundle, f0, grid);
    let (lhs, rhs) = eval_identity(id, &b, corrupt);
    // The nested difference operators fall back to one-sided closures on the
    // node rings next to the wall, and a refinement study needs the same
    // physical sampling window on every level.  A fixed smooth mask handles
    // both: it vanishes within 15% of the walls (clearing the closure-
    // influenced rings on every study grid) and is identical across levels,
    // so the sampled residual scales cleanly with the truncation error.
    let mut total = 0.0;
    for (l, r) in lhs.iter().zip(&rhs) {
        let d = l.sub(r);
        for i in 0..grid.nr {
            for j in 0..grid.nz {
                let w = core_mask(grid.r_hat(i as isize)) * core_mask(grid.z_hat(j as isize));
                if w > 0.0 {
                    let v = d.at(i as isize, j as isize);
                    total += w * v * v;
                }
            }
        }
    }
    (total * grid.hr * grid.hz * 2.0 * std::f64::consts::PI / grid.n_phi as f64).sqrt()
}

/// Smoothstep^2 ramp from 0 at 15% to 1 at 30% of the domain, per side.
fn core_mask(x: f64) -> f64 {
    let ramp = |t: f64| -> f64 {
        let s = ((t - 0.15) / 0.15).clamp(0.0, 1.0);
        let sm = s * s * (3.0 - 2.0 * s);
        sm * sm
    };
    ramp(x) * ramp(1.0 - x)
}

#[derive(Debug, Clone)]
pub struct StudyRow {
    pub n: usize,
    pub h: f64,
    pub residual: f64,
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StudyOutcome {
    Pass,
    /// Residuals at rounding level on every grid; order undefined.
    Exact,
    /// Residuals grew under refinement: the identity coding is suspect.
    NonMonotone,
    OrderTooLow,
}

#[derive(Debug, Clone)]
pub struct Study {
    pub id: String,
    pub rows: Vec<StudyRow>,
    pub outcome: StudyOutcome,
    pub min_order: Option<f64>,
}

/// Run `verify_identity` over a sequence of grids and report observed orders
/// p = log(res_k / res_k+1) / log(h_k / h_k+1); passes when min order >= 1.8.
pub fn refinement_study(
    id: IdentityId,
    levels: &[usize],
    seed: u64,
    f0: f64,
    grid_for: impl Fn(usize) -> Grid,
) -> Study {
    assert!(levels.len() >= 3, "a refinement study needs at least 3 levels");
    let residual_for =
        |n: usize| -> (f64, f64) {
            let g = grid_for(n);
            let bundle = super::bundle::manufactured_bundle(&g, seed);
            (verify_identity(id, &bundle, f0, &g), g.hr.max(g.hz))
        };
    let mut rows: Vec<StudyRow> = Vec::new();
    for &n in levels {
        let (res, h) = residual_for(n);
        let order = rows.last().map(|prev: &StudyRow| {
            (prev.residual / res).ln() / (prev.h / h).ln()
        });
        rows.push(StudyRow { n, h, residual: res, order });
    }
    grade(id.name(), rows, 1.8)
}

pub(crate) fn grade(name: &str, rows: Vec<StudyRow>, min_order_required: f64) -> Study {
    let exact = rows.iter().all(|r| r.residual < 1e-12);
    if exact {
        return Study {
            id: name.to_string(),
            rows,
            outcome: StudyOutcome::Exact,
            min_order: None,
        };
    }
    let monotone = rows.windows(2).all(|w| w[1].residual < w[0].residual);
    let min_order = rows
        .iter()
        .filter_map(|r| r.order)
        .fold(f64::INFINITY, f64::min);
    let outcome = if !monotone {
        StudyOutcome::NonMonotone
    } else if min_order >= min_order_required {
        StudyOutcome::Pass
    } else {
        StudyOutcome::OrderTooLow
    };
    Study {
        id: name.to_string(),
        rows,
        outcome,
        min_order: Some(min_order),
    }
}
