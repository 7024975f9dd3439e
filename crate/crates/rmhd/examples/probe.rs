//! Ideal-invariants tuning probe (criterion 3 parameters).
use rmhd::diagnostics::compute_energies;
use rmhd::equilibrium::*;
use rmhd::geometry::*;
use rmhd::integrator::*;
use rmhd::model::*;

fn setup_state(g: &Grid, eps: f64, c1: f64, p_base: f64) -> (State, StateTraces) {
    let psi = solve_grad_shafranov(GsRhs::LinearProfiles { c1, c2: 0.0 }, g).unwrap();
    let mut st = State::zeros(g);
    st.psi = psi;
    st.rho = SpectralField::constant(g, 1.0);
    st.p = SpectralField::constant(g, p_base);
    for idx in 0..g.n() {
        st.p.c0[idx] += c1 * st.psi.c0[idx];
    }
    let mut traces = StateTraces::zero(g);
    traces.rho = FieldTrace::constant(g, 1.0);
    traces.p = FieldTrace::constant(g, p_base);
    traces.j = FieldTrace::from_fn(g, |r, _| -c1 * r * r);
    seed_perturbation(&mut st, eps, Var::U, g);
    (st, traces)
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(33);
    let eps: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(3e-4);
    let dt0: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(0.1);
    let steps: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(100);
    let np: u32 = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(1);
    let c1: f64 = args.get(6).and_then(|s| s.parse().ok()).unwrap_or(0.2);
    let p_base: f64 = args.get(7).and_then(|s| s.parse().ok()).unwrap_or(0.2);

    let g = Grid::new(1.0, 2.0, 0.0, 1.0, n, n, np, 8);
    let params = PhysParams { eta0: 0.0, nu0: 0.0, f0: 1.0, ..PhysParams::default() };
    let flags = ModelFlags::default();
    let (mut st, traces) = setup_state(&g, eps, c1, p_base);
    let bc = ModelBc::fixed(&flags, traces);
    st.refresh_constraints(&bc, &g);

    let e0 = compute_energies(&st, &params, &flags, &bc, &g);
    println!("E0={:.12e} mass0={:.12e} hel0={:.12e} Ekin_n0={:.3e}", e0.e_total, e0.mass, e0.helicity, e0.e_kin_n);

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
    let t = std::time::Instant::now();
    let result = run::<std::io::Sink>(st, 0.0, 0, &setup, None).expect("run");
    if std::env::var("TRACE").is_ok() {
        for (i, e) in result.energies.iter().enumerate() {
            println!("e[{i}] = {:.12e} dint {:.4e} dmag0 {:.4e} kin0 {:.4e} kin_n {:.4e} magn {:.4e} dmass {:.4e}", e.e_total, e.e_internal - result.energies[0].e_internal, e.e_mag_0 - result.energies[0].e_mag_0, e.e_kin_0, e.e_kin_n, e.e_mag_n, e.mass - result.energies[0].mass);
        }
    }
    let ef = result.energies.last().unwrap();
    println!(
        "elapsed {:?}  newton_total {} gmres_total {} refac {}",
        t.elapsed(),
        result.totals.newton_iters,
        result.totals.gmres_iters,
        result.totals.refactorizations
    );
    println!(
        "dE/E = {:.3e}  dH/H = {:.3e}  dM/M = {:.3e}  Ekin_n(T) = {:.3e}",
        (ef.e_total - e0.e_total) / e0.e_total,
        (ef.helicity - e0.helicity) / e0.helicity,
        (ef.mass - e0.mass) / e0.mass,
        ef.e_kin_n,
    );
}
