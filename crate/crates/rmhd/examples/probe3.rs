//! Instability-run tuning probe: force-balanced equilibrium with an
//! edge-steep pressure profile (interchange-unstable for steep gradients).
use rmhd::diagnostics::compute_energies;
use rmhd::equilibrium::*;
use rmhd::geometry::*;
use rmhd::integrator::*;
use rmhd::model::*;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(17);
    let steps: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(200);
    let dt0: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(0.2);
    let f0: f64 = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(0.05);
    let eta: f64 = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(2e-3);
    let a: f64 = args.get(6).and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let p_edge: f64 = args.get(7).and_then(|s| s.parse().ok()).unwrap_or(0.02);
    let neglect: bool = args.get(8).map(|s| s.as_str() == "on").unwrap_or(false);
    let with_vpar: bool = args.get(9).map(|s| s.as_str() == "vpar").unwrap_or(false) || neglect;
    let seed_amp: f64 = args.get(10).and_then(|s| s.parse().ok()).unwrap_or(1e-6);

    let g = Grid::new(1.0, 2.0, 0.0, 1.0, n, n, 1, 8);
    let params = PhysParams { f0, eta0: eta, nu0: 3e-3, ..PhysParams::default() };
    let flags = ModelFlags { with_vpar, neglected_terms: neglect, ..ModelFlags::default() };

    // R-pedestal pressure: [R^2, p(R)] = 0, so this is an exact equilibrium
    // with zero poloidal field (nothing bends); `a` scales the pedestal
    // height and p_edge the floor.
    let prof = move |r: f64| p_edge + 0.15 * a * 0.5 * (1.0 - ((r - 1.5) / 0.08).tanh());
    let mut st = State::zeros(&g);
    st.rho = SpectralField::constant(&g, 1.0);
    st.p = SpectralField::from_mode0(&g, |r, _| prof(r));
    let mut traces = StateTraces::zero(&g);
    traces.rho = FieldTrace::constant(&g, 1.0);
    traces.p = FieldTrace::from_fn(&g, |r, _| prof(r));
    let bc = ModelBc::fixed(&flags, traces);
    let _ = solve_grad_shafranov(GsRhs::LinearProfiles { c1: -a, c2: 0.0 }, &g);
    seed_perturbation(&mut st, seed_amp, Var::U, &g);
    st.refresh_constraints(&bc, &g);
    let pmin = st.p.c0.iter().cloned().fold(f64::INFINITY, f64::min);
    eprintln!("p range [{pmin:.4}, {:.4}]", st.p.c0.iter().cloned().fold(0.0f64, f64::max));

    let setup = RunSetup {
        params: &params,
        flags: &flags,
        bc: &bc,
        grid: &g,
        scheme: SchemeParams::crank_nicolson(),
        newton: NewtonParams { mode: NewtonMode::Inexact, eps_a: 1e-9, max_iter: 20, divergence_window: 4, ..NewtonParams::default() },
        adaptive: AdaptiveParams { dt0, dt_min: 1e-5, dt_max: dt0, ..AdaptiveParams::default() },
        refactor: RefactorPolicyKind::OnDemand,
        steps,
    };
    let e0 = compute_energies(&st, &params, &flags, &bc, &g);
    eprintln!("E0 {:.4e}", e0.e_total);
    let t = std::time::Instant::now();
    let result = run::<std::io::Sink>(st, 0.0, 0, &setup, None).expect("run");
    eprintln!(
        "elapsed {:?} accepted {} rejected {} gmres {} refac {}",
        t.elapsed(), result.accepted, result.rejected,
        result.totals.gmres_iters, result.totals.refactorizations
    );
    let mut time = 0.0;
    println!("0 0.0 {:.6e}", result.energies[0].e_kin_n + result.energies[0].e_mag_n);
    for (k, e) in result.energies.iter().skip(1).enumerate() {
        time += result.dts[k];
        println!("{} {:.4} {:.6e}", k + 1, time, e.e_kin_n + e.e_mag_n);
    }
}
