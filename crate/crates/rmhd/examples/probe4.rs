//! Quadrature-order experiment: trapezoid vs Simpson measurement of the
//! invariants on the ideal acoustic run.
use rmhd::diagnostics::compute_energies;
use rmhd::equilibrium::*;
use rmhd::geometry::padded::{ddr, ddz, Padded};
use rmhd::geometry::*;
use rmhd::integrator::*;
use rmhd::model::slices::Geom;
use rmhd::model::*;

/// Composite Simpson over the closed grid (interior + ring), weight R dR dZ.
fn simpson_rdv(p: &Padded, g: &Grid) -> f64 {
    let wts = |n: usize| -> Vec<f64> {
        // n interior + 2 ring = n+2 points, n+1 intervals (even when n odd)
        let total = n + 2;
        let mut w = vec![0.0; total];
        assert!((total - 1) % 2 == 0, "need an even interval count");
        let mut i = 0;
        while i + 2 < total {
            w[i] += 1.0 / 3.0;
            w[i + 1] += 4.0 / 3.0;
            w[i + 2] += 1.0 / 3.0;
            i += 2;
        }
        w
    };
    let wr = wts(g.nr);
    let wz = wts(g.nz);
    let mut total = 0.0;
    for i in -1..=(g.nr as isize) {
        let r = g.r(i);
        let wi = wr[(i + 1) as usize];
        let mut row = 0.0;
        for j in -1..=(g.nz as isize) {
            row += wz[(j + 1) as usize] * p.at(i, j);
        }
        total += wi * r * row;
    }
    total * g.hr * g.hz
}

fn energy_simpson(st: &State, params: &PhysParams, bc: &ModelBc, g: &Grid) -> (f64, f64) {
    use rmhd::model::slices::StateSlices;
    let geom = Geom::new(g);
    let s = StateSlices::new(st, bc, g);
    let two_pi = 2.0 * std::f64::consts::PI;
    let nphi = g.n_phi as f64;
    let mut e = 0.0;
    let mut m = 0.0;
    for k in 0..g.n_phi {
        let gpsi2 = s.psi.dr[k].mul(&s.psi.dr[k]).add(&s.psi.dz[k].mul(&s.psi.dz[k]));
        e += simpson_rdv(&gpsi2.mul(&geom.inv_r2).scale(0.5), g);
        let gradu2 = s.u.dr[k].mul(&s.u.dr[k]).add(&s.u.dz[k].mul(&s.u.dz[k]));
        e += simpson_rdv(&s.rho.v[k].mul(&geom.r2).mul(&gradu2).scale(0.5), g);
        e += simpson_rdv(&s.p.v[k].scale(1.0 / (params.gamma - 1.0)), g);
        m += simpson_rdv(&s.rho.v[k], g);
    }
    (e * two_pi / nphi, m * two_pi / nphi)
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let eps: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(3e-4);
    let dt0: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.106);
    let steps: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(100);
    let n = 33;
    let g = Grid::new(1.0, 2.0, 0.0, 1.0, n, n, 1, 8);
    let params = PhysParams { eta0: 0.0, nu0: 0.0, f0: 1.0, ..PhysParams::default() };
    let flags = ModelFlags::default();
    let c1 = 0.2;
    let psi = solve_grad_shafranov(GsRhs::LinearProfiles { c1, c2: 0.0 }, &g).unwrap();
    let mut st = State::zeros(&g);
    st.psi = psi;
    st.rho = SpectralField::constant(&g, 1.0);
    st.p = SpectralField::constant(&g, 5.0);
    for idx in 0..g.n() {
        st.p.c0[idx] += c1 * st.psi.c0[idx];
    }
    let mut traces = StateTraces::zero(&g);
    traces.rho = FieldTrace::constant(&g, 1.0);
    traces.p = FieldTrace::constant(&g, 5.0);
    traces.j = FieldTrace::from_fn(&g, |r, _| -c1 * r * r);
    let bc = ModelBc::fixed(&flags, traces);
    seed_perturbation(&mut st, eps, Var::U, &g);
    st.refresh_constraints(&bc, &g);

    let (e0s, m0s) = energy_simpson(&st, &params, &bc, &g);
    let e0t = compute_energies(&st, &params, &flags, &bc, &g);

    let setup = RunSetup {
        params: &params,
        flags: &flags,
        bc: &bc,
        grid: &g,
        scheme: SchemeParams::crank_nicolson(),
        newton: NewtonParams {
            mode: NewtonMode::Exact,
            eps_a: 1e-11,
            gmres_tol: 1e-12,
            max_iter: 12,
            ..NewtonParams::default()
        },
        adaptive: AdaptiveParams { dt0, dt_min: dt0, dt_max: dt0, ..AdaptiveParams::default() },
        refactor: RefactorPolicyKind::OnDemand,
        steps,
    };
    let result = run::<std::io::Sink>(st, 0.0, 0, &setup, None).expect("run");
    let (efs, mfs) = energy_simpson(&result.state, &params, &bc, &g);
    let eft = result.energies.last().unwrap();
    println!(
        "trap:    dE/E = {:+.4e}  dM/M = {:+.4e}",
        (eft.e_total - e0t.e_total) / e0t.e_total,
        (eft.mass - e0t.mass) / e0t.mass
    );
    println!(
        "simpson: dE/E = {:+.4e}  dM/M = {:+.4e}",
        (efs - e0s) / e0s,
        (mfs - m0s) / m0s
    );
}
