//! Per-step nonlinear residuals: the generic theta/Gear combination
//! (1+zeta) A(U^{n+1}) - theta dt B(U^{n+1})
//!   = (1+2 zeta) A(U^n) - zeta A(U^{n-1}) + (1-theta) dt B(U^n)
//! realized for the reduced MHD system (with its implicit-increment time
//! rows and the algebraic constraint rows) and for plain A/B-split systems.

use crate::geometry::padded::Padded;
use crate::geometry::{Grid, SpectralField};
use crate::linear::Packing;
use crate::model::rhs::{
    rhs_all, rhs_density_sl, rhs_pressure_sl, rhs_psi_sl, rhs_vorticity_sl, rhs_vpar_sl,
    u_row_time, vpar_row_time,
};
use crate::model::slices::StateSlices;
use crate::model::{Ctx, ModelBc, ModelFlags, PhysParams, RhsAll, State};

use super::scheme::SchemeParams;

/// A nonlinear step problem: the solver looks for r(U) = b - G(U) = 0.
pub trait StepResidual {
    fn dim(&self) -> usize;
    fn residual(&self, u: &[f64], out: &mut [f64]);
}

/// Plain system in the form d/dt A(U) = B(U).
pub trait AbSystem {
    fn dim(&self) -> usize;
    fn apply_a(&self, u: &[f64], out: &mut [f64]);
    fn apply_b(&self, u: &[f64], out: &mut [f64]);
}

/// theta/Gear residual for an [`AbSystem`].
pub struct ThetaStep<'a, S: AbSystem> {
    sys: &'a S,
    rhs: Vec<f64>,
    dt: f64,
    scheme: SchemeParams,
}

impl<'a, S: AbSystem> ThetaStep<'a, S> {
    pub fn new(sys: &'a S, un: &[f64], unm1: &[f64], dt: f64, scheme: SchemeParams) -> Self {
        let n = sys.dim();
        let mut rhs = vec![0.0; n];
        let mut tmp = vec![0.0; n];
        sys.apply_a(un, &mut rhs);
        for v in rhs.iter_mut() {
            *v *= 1.0 + 2.0 * scheme.zeta;
        }
        sys.apply_a(unm1, &mut tmp);
        for (r, t) in rhs.iter_mut().zip(&tmp) {
            *r -= scheme.zeta * t;
        }
        sys.apply_b(un, &mut tmp);
        for (r, t) in rhs.iter_mut().zip(&tmp) {
            *r += (1.0 - scheme.theta) * dt * t;
        }
        ThetaStep { sys, rhs, dt, scheme }
    }
}

impl<'a, S: AbSystem> StepResidual for ThetaStep<'a, S> {
    fn dim(&self) -> usize {
        self.sys.dim()
    }

    fn residual(&self, u: &[f64], out: &mut [f64]) {
        let n = self.dim();
        let mut tmp = vec![0.0; n];
        self.sys.apply_a(u, out);
        for v in out.iter_mut() {
            *v *= 1.0 + self.scheme.zeta;
        }
        self.sys.apply_b(u, &mut tmp);
        for (o, t) in out.iter_mut().zip(&tmp) {
            *o -= self.scheme.theta * self.dt * t;
        }
        // r = b - G
        for (o, r) in out.iter_mut().zip(&self.rhs) {
            *o = r - *o;
        }
    }
}

/// The reduced MHD step: time rows in the theta/Gear combination with
/// implicit-increment forms for the vorticity and parallel-velocity rows,
/// constraint rows j - Delta* psi and w - Delta_pol u without time terms.
pub struct MhdStep<'a> {
    pub params: &'a PhysParams,
    pub flags: &'a ModelFlags,
    pub bc: &'a ModelBc,
    pub grid: &'a Grid,
    pub packing: Packing,
    pub dt: f64,
    pub scheme: SchemeParams,
    /// (1+2z) x^n - z x^{n-1} per evolved field.
    hist_psi: SpectralField,
    hist_u: SpectralField,
    hist_rho: SpectralField,
    hist_p: SpectralField,
    hist_vpar: SpectralField,
    /// (1+2z) (v grad psi)^n - z (v grad psi)^{n-1}, when the cross block is on.
    hist_w_r: Option<Vec<Padded>>,
    hist_w_z: Option<Vec<Padded>>,
    /// B-sides at U^n, weighted by (1-theta) dt.
    rhs_old: RhsAll,
}

impl<'a> MhdStep<'a> {
    pub fn new(
        un: &State,
        unm1: &State,
        dt: f64,
        scheme: SchemeParams,
        params: &'a PhysParams,
        flags: &'a ModelFlags,
        bc: &'a ModelBc,
        grid: &'a Grid,
    ) -> MhdStep<'a> {
        assert!(dt > 0.0);
        let z = scheme.zeta;
        let hist = |xn: &SpectralField, xm: &SpectralField| -> SpectralField {
            let mut h = xn.scaled(1.0 + 2.0 * z);
            h.add_scaled(-z, xm);
            h
        };
        let ctx = Ctx { params, flags, bc, grid };
        let rhs_old = rhs_all(un, &ctx);
        let cross = flags.with_vpar && flags.neglected_terms;
        let (hist_w_r, hist_w_z) = if cross {
            let sn = StateSlices::new(un, bc, grid);
            let sm = StateSlices::new(unm1, bc, grid);
            let mut wr = Vec::with_capacity(grid.n_phi);
            let mut wz = Vec::with_capacity(grid.n_phi);
            for k in 0..grid.n_phi {
                let a_r = sn.vpar.v[k].mul(&sn.psi.dr[k]);
                let b_r = sm.vpar.v[k].mul(&sm.psi.dr[k]);
                wr.push(a_r.scale(1.0 + 2.0 * z).sub(&b_r.scale(z)));
                let a_z = sn.vpar.v[k].mul(&sn.psi.dz[k]);
                let b_z = sm.vpar.v[k].mul(&sm.psi.dz[k]);
                wz.push(a_z.scale(1.0 + 2.0 * z).sub(&b_z.scale(z)));
            }
            (Some(wr), Some(wz))
        } else {
            (None, None)
        };
        MhdStep {
            params,
            flags,
            bc,
            grid,
            packing: Packing::new(grid, flags.with_vpar),
            dt,
            scheme,
            hist_psi: hist(&un.psi, &unm1.psi),
            hist_u: hist(&un.u, &unm1.u),
            hist_rho: hist(&un.rho, &unm1.rho),
            hist_p: hist(&un.p, &unm1.p),
            hist_vpar: hist(&un.vpar, &unm1.vpar),
            hist_w_r,
            hist_w_z,
            rhs_old,
        }
    }

    fn ctx(&self) -> Ctx<'a> {
        Ctx {
            params: self.params,
            flags: self.flags,
            bc: self.bc,
            grid: self.grid,
        }
    }
}

impl<'a> StepResidual for MhdStep<'a> {
    fn dim(&self) -> usize {
        self.packing.len()
    }

    fn residual(&self, u_flat: &[f64], out: &mut [f64]) {
        let g = self.grid;
        let ctx = self.ctx();
        let state = self.packing.unpack(u_flat, g);
        let s = StateSlices::new(&state, self.bc, g);
        let (th, z, dt) = (self.scheme.theta, self.scheme.zeta, self.dt);
        let opz = 1.0 + z;

        // F = G - b per row; r = -F
        let theta_rhs = |new: &SpectralField, old: &SpectralField| -> SpectralField {
            let mut b = new.scaled(th * dt);
            b.add_scaled((1.0 - th) * dt, old);
            b
        };

        // simple time rows: (1+z) x - hist - dt [th B + (1-th) B^n]
        let simple = |x: &SpectralField, hist: &SpectralField, bnew: &SpectralField, bold: &SpectralField| {
            let mut f = x.scaled(opz);
            f.add_scaled(-1.0, hist);
            let b = theta_rhs(bnew, bold);
            f.add_scaled(-1.0, &b);
            f
        };

        let rhs_psi_new = rhs_psi_sl(&s, &ctx);
        let f_psi = simple(&state.psi, &self.hist_psi, &rhs_psi_new, &self.rhs_old.psi);

        // vorticity row: time term in increment form, coefficients at U
        let mut du = state.u.scaled(opz);
        du.add_scaled(-1.0, &self.hist_u);
        let rhs_u_new = rhs_vorticity_sl(&s, &ctx);
        let f_u = {
            let w = if let (Some(wr), Some(wz)) = (&self.hist_w_r, &self.hist_w_z) {
                let mut cr = Vec::with_capacity(g.n_phi);
                let mut cz = Vec::with_capacity(g.n_phi);
                for k in 0..g.n_phi {
                    cr.push(s.vpar.v[k].mul(&s.psi.dr[k]).scale(opz).sub(&wr[k]));
                    cz.push(s.vpar.v[k].mul(&s.psi.dz[k]).scale(opz).sub(&wz[k]));
                }
                Some((cr, cz))
            } else {
                None
            };
            let time = match &w {
                Some((cr, cz)) => u_row_time(&s, &du, Some((cr, cz)), &ctx),
                None => u_row_time(&s, &du, None, &ctx),
            };
            let mut f = time;
            let b = theta_rhs(&rhs_u_new, &self.rhs_old.u);
            f.add_scaled(-1.0, &b);
            f
        };

        // constraint rows
        let (res_j, res_w) = {
            use crate::geometry::padded::{delta_pol, delta_star};
            use crate::geometry::project_slices;
            let dstar: Vec<Padded> = (0..g.n_phi).map(|k| delta_star(&s.psi.v[k], g)).collect();
            let dpol: Vec<Padded> = (0..g.n_phi).map(|k| delta_pol(&s.u.v[k], g)).collect();
            let mut rj = state.j.clone();
            rj.add_scaled(-1.0, &project_slices(&dstar, g));
            let mut rw = state.w.clone();
            rw.add_scaled(-1.0, &project_slices(&dpol, g));
            (rj, rw)
        };

        let rhs_rho_new = rhs_density_sl(&s, &ctx);
        let f_rho = simple(&state.rho, &self.hist_rho, &rhs_rho_new, &self.rhs_old.rho);
        let rhs_p_new = rhs_pressure_sl(&s, &ctx);
        let f_p = simple(&state.p, &self.hist_p, &rhs_p_new, &self.rhs_old.p);

        let f_vpar = if self.flags.with_vpar {
            let mut dpsi = state.psi.scaled(opz);
            dpsi.add_scaled(-1.0, &self.hist_psi);
            let mut dv = state.vpar.scaled(opz);
            dv.add_scaled(-1.0, &self.hist_vpar);
            let time = vpar_row_time(&s, &dpsi, &du, &dv, &ctx);
            let rhs_v_new = rhs_vpar_sl(&s, &ctx);
            let b = theta_rhs(&rhs_v_new, self.rhs_old.vpar.as_ref().expect("vpar rhs"));
            let mut f = time;
            f.add_scaled(-1.0, &b);
            Some(f)
        } else {
            None
        };

        // pack r = -F in the solver layout
        let n = self.packing.nodes();
        let mut write = |var_idx: usize, f: &SpectralField| {
            let base = var_idx * 3 * n;
            for (i, v) in f.c0.iter().enumerate() {
                out[base + i] = -v;
            }
            for (i, v) in f.cc.iter().enumerate() {
                out[base + n + i] = -v;
            }
            for (i, v) in f.cs.iter().enumerate() {
                out[base + 2 * n + i] = -v;
            }
        };
        write(0, &f_psi);
        write(1, &f_u);
        write(2, &res_j);
        write(3, &res_w);
        write(4, &f_rho);
        write(5, &f_p);
        if let Some(fv) = &f_vpar {
            write(6, fv);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::StateTraces;

    /// A(U) = U, B(U) = lambda U.
    struct ScalarLinear {
        lambda: f64,
    }

    impl AbSystem for ScalarLinear {
        fn dim(&self) -> usize {
            1
        }
        fn apply_a(&self, u: &[f64], out: &mut [f64]) {
            out[0] = u[0];
        }
        fn apply_b(&self, u: &[f64], out: &mut [f64]) {
            out[0] = self.lambda * u[0];
        }
    }

    #[test]
    fn crank_nicolson_root_of_scalar_fixture() {
        let sys = ScalarLinear { lambda: -1.0 };
        let step = ThetaStep::new(&sys, &[1.0], &[1.0], 0.1, SchemeParams::crank_nicolson());
        // root of G(U) = b: U = (1 - 0.05)/(1 + 0.05)
        let want = 0.95 / 1.05;
        let mut r = [0.0];
        step.residual(&[want], &mut r);
        assert!(r[0].abs() < 1e-14, "{}", r[0]);
        assert!((want - 0.9047619047619047).abs() < 1e-15);
    }

    #[test]
    fn gear_and_cn_differ_by_the_zeta_terms() {
        let sys = ScalarLinear { lambda: -2.0 };
        let (un, unm1, dt) = (0.9, 1.0, 0.05);
        let cn = ThetaStep::new(&sys, &[un], &[unm1], dt, SchemeParams::crank_nicolson());
        let gear = ThetaStep::new(&sys, &[un], &[unm1], dt, SchemeParams::gear());
        let u = [0.87];
        let mut r_cn = [0.0];
        let mut r_gear = [0.0];
        cn.residual(&u, &mut r_cn);
        gear.residual(&u, &mut r_gear);
        // closed forms of the two residuals
        let g_cn = u[0] - 0.5 * dt * (-2.0) * u[0];
        let b_cn = un + 0.5 * dt * (-2.0) * un;
        assert!((r_cn[0] - (b_cn - g_cn)).abs() < 1e-15);
        let g_gear = 1.5 * u[0] - dt * (-2.0) * u[0];
        let b_gear = 2.0 * un - 0.5 * unm1;
        assert!((r_gear[0] - (b_gear - g_gear)).abs() < 1e-15);
    }

    #[test]
    fn steady_state_is_a_residual_root() {
        // uniform rho/p with fixed traces, no flow, eta = 0: B(U^n) = 0 and
        // the constraints hold, so r(U^n) = 0 exactly.
        let g = Grid::new(1.0, 2.0, 0.0, 1.0, 9, 9, 8, 8);
        let params = PhysParams { eta0: 0.0, nu0: 0.0, ..PhysParams::default() };
        let flags = ModelFlags::default();
        let mut traces = StateTraces::zero(&g);
        traces.rho = crate::geometry::FieldTrace::constant(&g, 1.0);
        traces.p = crate::geometry::FieldTrace::constant(&g, 2.0);
        let bc = ModelBc::fixed(&flags, traces);
        let mut st = State::zeros(&g);
        st.rho = SpectralField::constant(&g, 1.0);
        st.p = SpectralField::constant(&g, 2.0);
        let step = MhdStep::new(&st, &st, 0.5, SchemeParams::gear(), &params, &flags, &bc, &g);
        let mut r = vec![0.0; step.dim()];
        step.residual(&step.packing.pack(&st), &mut r);
        let m = r.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        assert!(m < 1e-12, "{m}");
    }
}
