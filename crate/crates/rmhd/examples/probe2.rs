//! First full-stack run probe: equilibrium + perturbation on a small grid.
use rmhd::diagnostics::DiagnosticsCsv;
use rmhd::geometry::*;
use rmhd::integrator::*;
use rmhd::model::*;

fn main() {
    let g = Grid::new(1.0, 2.0, 0.0, 1.0, 17, 17, 2, 8);
    let pi = std::f64::consts::PI;
    let params = PhysParams { eta0: 1e-3, nu0: 1e-3, f0: 1.0, ..PhysParams::default() };
    let flags = ModelFlags::default();

    // manufactured equilibrium: psi0 sine bump, constant rho/p
    let mut st = State::zeros(&g);
    st.psi = SpectralField::from_mode0(&g, |r, z| 0.1 * (pi * (r - 1.0)).sin() * (pi * z).sin());
    st.rho = SpectralField::constant(&g, 1.0);
    st.p = SpectralField::constant(&g, 0.1);
    let mut traces = StateTraces::zero(&g);
    traces.rho = FieldTrace::constant(&g, 1.0);
    traces.p = FieldTrace::constant(&g, 0.1);
    traces.j = FieldTrace::from_fn(&g, |r, z| {
        // analytic Delta* of psi0
        let s = (pi * (r - 1.0)).sin() * (pi * z).sin();
        0.1 * (-2.0 * pi * pi * s - (pi / r) * (pi * (r - 1.0)).cos() * (pi * z).sin())
    });
    let bc = ModelBc::fixed(&flags, traces);
    st.refresh_constraints(&bc, &g);
    // small harmonic perturbation in u
    for i in 0..g.nr {
        for j in 0..g.nz {
            let (rh, zh) = (g.r_hat(i as isize), g.z_hat(j as isize));
            st.u.cc[g.idx(i, j)] = 1e-4 * (pi * rh).sin() * (pi * zh).sin();
        }
    }
    st.refresh_constraints(&bc, &g);

    let setup = RunSetup {
        params: &params,
        flags: &flags,
        bc: &bc,
        grid: &g,
        scheme: SchemeParams::crank_nicolson(),
        newton: NewtonParams { mode: NewtonMode::Inexact, eps_a: 1e-8, ..NewtonParams::default() },
        adaptive: AdaptiveParams { dt0: 0.1, dt_min: 1e-6, dt_max: 0.1, ..AdaptiveParams::default() },
        refactor: RefactorPolicyKind::OnDemand,
        steps: 5,
    };
    let t = std::time::Instant::now();
    let mut sink = Vec::new();
    let mut csv = DiagnosticsCsv::new(&mut sink);
    let result = run(st, 0.0, 0, &setup, Some(&mut csv)).expect("run");
    println!("elapsed {:?}", t.elapsed());
    println!(
        "accepted {} rejected {} newton {} gmres {} refac {}",
        result.accepted,
        result.rejected,
        result.totals.newton_iters,
        result.totals.gmres_iters,
        result.totals.refactorizations
    );
    for (i, e) in result.energies.iter().enumerate() {
        println!(
            "step {i}: E={:.10e} mag0={:.3e} kin_n={:.3e} mass={:.6e} hel={:.6e}",
            e.e_total, e.e_mag_0, e.e_kin_n, e.mass, e.helicity
        );
    }
    println!("{}", String::from_utf8_lossy(&sink).lines().take(3).collect::<Vec<_>>().join("\n"));
}
