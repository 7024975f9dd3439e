//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines;
//! the assertions enforce every threshold regardless.

use std::fmt::Write as _;

use rmhd::diagnostics::compute_energies;
use rmhd::equilibrium::{
    build_equilibrium, manufactured_psi, seed_perturbation, solve_grad_shafranov, EquilibriumSpec,
    GsRhs, ProfileSpec,
};
use rmhd::geometry::{FieldTrace, Grid, SpectralField};
use rmhd::identities::{
    energy_group, manufactured_bundle, refinement_study, verify_dissipation, EnergyGroupParams,
    IdentityId, StudyOutcome,
};
use rmhd::integrator::*;
use rmhd::linear::{harmonic_blocks, refactor_policy, BlockSpec, Packing};
use rmhd::model::*;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {criterion}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{criterion}: {detail}");
}

fn domain_grid(n: usize, n_p: u32, n_phi: usize) -> Grid {
    Grid::new(1.0, 2.0, 0.0, 1.0, n, n, n_p, n_phi)
}

/// Criterion 1: every cataloged derivation identity passes a 3-level
/// refinement study at NR = NZ in {17, 33, 65} with observed order >= 1.8,
/// within the runtime budget.
#[test]
fn criterion_01_identity_suite() {
    let started = std::time::Instant::now();
    let mut detail = String::new();
    let mut all = true;
    for id in IdentityId::ALL {
        let study = refinement_study(id, &[17, 33, 65], 42, 1.0, |n| domain_grid(n, 8, 16));
        let ok = matches!(study.outcome, StudyOutcome::Pass | StudyOutcome::Exact);
        all &= ok;
        match study.outcome {
            StudyOutcome::Exact => {
                let _ = write!(detail, "{}=exact ", study.id);
            }
            _ => {
                let _ = write!(detail, "{}={:.2} ", study.id, study.min_order.unwrap_or(0.0));
            }
        }
    }
    let elapsed = started.elapsed();
    let in_budget = elapsed.as_secs_f64() < 300.0;
    let _ = write!(detail, "({:.1?})", elapsed);
    report("1 identity suite", all && in_budget, &detail);
}

/// Criterion 2: E1-E3, E5-E18 converge to zero at order >= 1.8; the
/// dissipation group matches the balance law within 5% at the finest level.
#[test]
fn criterion_02_energy_group_suite() {
    let sizes = [17usize, 33, 65];
    let pr = EnergyGroupParams { f0: 1.0, gamma: 5.0 / 3.0, eta: 1e-3, nu: 2e-3 };
    let mut all = true;
    let mut detail = String::new();
    for grp in 1..=18u8 {
        if grp == 4 {
            continue;
        }
        let mut vals = Vec::new();
        let mut hs = Vec::new();
        for &n in &sizes {
            let g = domain_grid(n, 8, 16);
            let b = manufactured_bundle(&g, 42);
            vals.push(energy_group(grp, &b, pr, &g).abs());
            hs.push(g.hr.max(g.hz));
        }
        let exact = vals.iter().all(|v| *v < 1e-12);
        let mut min_order = f64::INFINITY;
        for k in 0..vals.len() - 1 {
            min_order = min_order.min((vals[k] / vals[k + 1]).ln() / (hs[k] / hs[k + 1]).ln());
        }
        let ok = exact || min_order >= 1.8;
        all &= ok;
        if exact {
            let _ = write!(detail, "E{grp}=exact ");
        } else {
            let _ = write!(detail, "E{grp}={min_order:.2} ");
        }
    }
    let g = domain_grid(65, 8, 16);
    let b = manufactured_bundle(&g, 42);
    let (lhs, rhs) = verify_dissipation(&b, pr, &g);
    let ratio = lhs / rhs;
    let ok = (0.95..=1.05).contains(&ratio);
    all &= ok;
    let _ = write!(detail, "E4 ratio={ratio:.4}");
    report("2 energy groups", all, &detail);
}

/// Criterion 5: observed global orders on the scalar ODE fixture.
#[test]
fn criterion_05_scheme_orders() {
    struct Logistic;
    impl AbSystem for Logistic {
        fn dim(&self) -> usize {
            1
        }
        fn apply_a(&self, u: &[f64], out: &mut [f64]) {
            out[0] = u[0];
        }
        fn apply_b(&self, u: &[f64], out: &mut [f64]) {
            out[0] = -u[0] * u[0];
        }
    }
    let integrate = |scheme: SchemeParams, dt: f64| -> f64 {
        let sys = Logistic;
        let newton = NewtonParams {
            mode: NewtonMode::Exact,
            eps_a: 1e-13,
            gmres_tol: 1e-13,
            max_iter: 30,
            ..NewtonParams::default()
        };
        let mut lin = LinearContext::new(vec![BlockSpec::dense("all", vec![0])]);
        let steps = (1.0 / dt).round() as usize;
        let (mut un, mut unm1) = (1.0f64, 1.0f64);
        for k in 0..steps {
            let sch = if k == 0 { SchemeParams { theta: scheme.theta, zeta: 0.0 } } else { scheme };
            lin.invalidate();
            let step = ThetaStep::new(&sys, &[un], &[unm1], dt, sch);
            let out = newton_solve(&step, &[un], &newton, &mut lin).unwrap();
            unm1 = un;
            un = out.u[0];
        }
        un
    };
    let order = |scheme: SchemeParams| -> f64 {
        let exact = 0.5;
        let e1 = (integrate(scheme, 0.05) - exact).abs();
        let e2 = (integrate(scheme, 0.025) - exact).abs();
        (e1 / e2).log2()
    };
    let p_euler = order(SchemeParams::euler());
    let p_cn = order(SchemeParams::crank_nicolson());
    let p_gear = order(SchemeParams::gear());
    let ok = (p_euler - 1.0).abs() <= 0.2 && (p_cn - 2.0).abs() <= 0.2 && (p_gear - 2.0).abs() <= 0.2;
    report(
        "5 scheme orders",
        ok,
        &format!("euler={p_euler:.3} cn={p_cn:.3} gear={p_gear:.3}"),
    );
}

fn stiff_step_fixture() -> (Grid, State, ModelBc, PhysParams, ModelFlags) {
    let g = domain_grid(9, 2, 8);
    let pi = std::f64::consts::PI;
    let params = PhysParams { eta0: 1e-3, nu0: 1e-3, ..PhysParams::default() };
    let flags = ModelFlags::default();
    let mut st = State::zeros(&g);
    st.psi = SpectralField::from_mode0(&g, |r, z| 0.2 * (pi * (r - 1.0)).sin() * (pi * z).sin());
    st.rho = SpectralField::constant(&g, 1.0);
    st.p = SpectralField::from_mode0(&g, |r, z| 0.1 + 0.05 * (pi * (r - 1.0)).sin() * (pi * z).sin());
    let mut traces = StateTraces::zero(&g);
    traces.rho = FieldTrace::constant(&g, 1.0);
    traces.p = FieldTrace::constant(&g, 0.1);
    let bc = ModelBc::fixed(&flags, traces);
    let mut pert = SpectralField::zeros(&g);
    for i in 0..g.nr {
        for j in 0..g.nz {
            let (rh, zh) = (g.r_hat(i as isize), g.z_hat(j as isize));
            pert.cc[g.idx(i, j)] = 0.05 * (pi * rh).sin() * (pi * zh).sin();
            pert.c0[g.idx(i, j)] = 0.025 * (2.0 * pi * rh).sin() * (pi * zh).sin();
        }
    }
    st.u = pert;
    st.refresh_constraints(&bc, &g);
    (g, st, bc, params, flags)
}

/// Criterion 6: exact and inexact Newton land on the same state; the inexact
/// iteration spends no more total GMRES iterations than the exact one.
#[test]
fn criterion_06_solver_equivalence_and_efficiency() {
    let (g, st, bc, params, flags) = stiff_step_fixture();
    let dt = 0.5;
    let step = MhdStep::new(&st, &st, dt, SchemeParams::crank_nicolson(), &params, &flags, &bc, &g);
    let packing = Packing::new(&g, flags.with_vpar);
    let u0 = packing.pack(&st);
    let eps_a = 1e-9;

    let exact_params = NewtonParams { mode: NewtonMode::Exact, eps_a, max_iter: 30, ..NewtonParams::default() };
    let mut lin1 = LinearContext::new(harmonic_blocks(&packing));
    let exact = newton_solve(&step, &u0, &exact_params, &mut lin1).unwrap();

    let inexact_params = NewtonParams { mode: NewtonMode::Inexact, eps_a, max_iter: 30, ..NewtonParams::default() };
    let mut lin2 = LinearContext::new(harmonic_blocks(&packing));
    let inexact = newton_solve(&step, &u0, &inexact_params, &mut lin2).unwrap();

    let tol = eps_a + exact_params.eps_r * exact.initial_residual;
    let diff: f64 = exact
        .u
        .iter()
        .zip(&inexact.u)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let ok = diff <= 10.0 * tol && inexact.gmres_total <= exact.gmres_total;
    report(
        "6 solver equivalence",
        ok,
        &format!(
            "state diff {diff:.2e} (tol {:.1e}); gmres inexact {} <= exact {}",
            10.0 * tol,
            inexact.gmres_total,
            exact.gmres_total
        ),
    );
}

/// Criterion 7: failure retries exactly at 0.8 dt; refactorization triggers
/// exactly when the two-step GMRES window exceeds 50.
#[test]
fn criterion_07_adaptive_and_refactor_policy() {
    let p = AdaptiveParams { dt0: 10.0, dt_min: 1e-3, dt_max: 100.0, ..AdaptiveParams::default() };
    let retry = adapt_dt(StepOutcome::Failed, 10.0, &p).unwrap();
    let retry_ok = retry == DtDecision::Retry(8.0);

    let window_ok = refactor_policy(&[30, 25], true)
        && !refactor_policy(&[25, 25], true)
        && !refactor_policy(&[10, 10], true)
        && refactor_policy(&[26, 25], true)
        && refactor_policy(&[], false);

    // end-to-end: a run whose first attempts cannot converge shows the
    // 0.8^k dt trace
    let (g, st, bc, params, flags) = stiff_step_fixture();
    let newton = NewtonParams { mode: NewtonMode::Exact, eps_a: 2e-7, max_iter: 1, ..NewtonParams::default() };
    let dt0 = 2.0;
    let setup = RunSetup {
        params: &params,
        flags: &flags,
        bc: &bc,
        grid: &g,
        scheme: SchemeParams::crank_nicolson(),
        newton,
        adaptive: AdaptiveParams { dt0, dt_min: 1e-8, dt_max: 10.0, ..AdaptiveParams::default() },
        refactor: RefactorPolicyKind::EveryStep,
        steps: 1,
    };
    let result = run::<std::io::Sink>(st, 0.0, 0, &setup, None).unwrap();
    let expected_dt = dt0 * 0.8f64.powi(result.rejected as i32);
    let trace_ok = result.rejected >= 1
        && (result.dts[0] - expected_dt).abs() <= 1e-12 * expected_dt;

    report(
        "7 adaptive policy",
        retry_ok && window_ok && trace_ok,
        &format!(
            "retry 10 -> {:?}; window thresholds exact; run rejected {} times, accepted dt {:.6}",
            retry, result.rejected, result.dts[0]
        ),
    );
}

/// Criterion 8: Grad-Shafranov manufactured-solution convergence at order 2.
#[test]
fn criterion_08_grad_shafranov_order() {
    let mut errs = Vec::new();
    let mut hs = Vec::new();
    for &n in &[17usize, 33, 65] {
        let g = domain_grid(n, 8, 8);
        let psi = solve_grad_shafranov(GsRhs::Manufactured { amplitude: 1.0 }, &g).unwrap();
        let mut err: f64 = 0.0;
        for i in 0..g.nr {
            for j in 0..g.nz {
                let want = manufactured_psi(&g, 1.0, g.r(i as isize), g.z(j as isize));
                err = err.max((psi.c0[g.idx(i, j)] - want).abs());
            }
        }
        errs.push(err);
        hs.push(g.hr.max(g.hz));
    }
    let p1 = (errs[0] / errs[1]).ln() / (hs[0] / hs[1]).ln();
    let p2 = (errs[1] / errs[2]).ln() / (hs[1] / hs[2]).ln();
    let ok = (p1 - 2.0).abs() <= 0.2 && (p2 - 2.0).abs() <= 0.2;
    report("8 grad-shafranov", ok, &format!("orders {p1:.3}, {p2:.3}"));
}

/// Criterion 10: reruns are byte-identical; a split run with a restart in
/// the middle reproduces the uninterrupted run bitwise.
#[test]
fn criterion_10_determinism_and_restart() {
    let bin = env!("CARGO_BIN_EXE_rmhd");
    let dir = std::env::temp_dir().join(format!("rmhd-acc10-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();

    let base_cfg = "\
[grid]\nNR = 9\nNZ = 9\nn_p = 2\n\
[physics]\neta0 = 1e-3\nnu0 = 1e-3\n\
[scheme]\npreset = crank-nicolson\n\
[newton]\nmode = inexact\neps_a = 1e-9\nmax_iter = 20\nrefactor_policy = every-step\n\
[adaptive]\ndt0 = 0.1\ndt_min = 0.1\ndt_max = 0.1\n\
[equilibrium]\nkind = manufactured\namplitude = 0.2\nperturb_amplitude = 1e-3\n\
[output]\nrestart_every = 5\n";

    let write_cfg = |name: &str, extra: &str| -> std::path::PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, format!("{base_cfg}{extra}")).unwrap();
        p
    };
    let run_cmd = |cfg: &std::path::Path, out: &str| {
        let outdir = dir.join(out);
        let status = std::process::Command::new(bin)
            .args(["run", "--config", cfg.to_str().unwrap(), "--output-dir", outdir.to_str().unwrap()])
            .stdout(std::process::Stdio::null())
            .status()
            .unwrap();
        assert!(status.success(), "run in {out} failed");
        outdir
    };

    // determinism: same config twice
    let cfg10 = write_cfg("ten.ini", "[run]\nsteps = 10\n");
    let a = run_cmd(&cfg10, "a");
    let b = run_cmd(&cfg10, "b");
    let csv_a = std::fs::read(a.join("rmhd.csv")).unwrap();
    let csv_b = std::fs::read(b.join("rmhd.csv")).unwrap();
    let deterministic = csv_a == csv_b;

    // restart equivalence: 10 = 5 + (restart) 5
    let cfg5 = write_cfg("five.ini", "[run]\nsteps = 5\n");
    let c = run_cmd(&cfg5, "c");
    let restart_path = c.join("rmhd-restart.txt");
    let cfg5b = write_cfg(
        "five-more.ini",
        &format!("[run]\nsteps = 5\nrestart_from = {}\n", restart_path.display()),
    );
    let d = run_cmd(&cfg5b, "d");
    let full_restart = std::fs::read(a.join("rmhd-restart.txt")).unwrap();
    let split_restart = std::fs::read(d.join("rmhd-restart.txt")).unwrap();
    let restart_equal = full_restart == split_restart;

    // the resumed CSV repeats the tail rows of the full run
    let text_a = String::from_utf8(csv_a).unwrap();
    let text_d = String::from_utf8(std::fs::read(d.join("rmhd.csv")).unwrap()).unwrap();
    let tail_a: Vec<&str> = text_a.lines().skip(7).collect(); // header + steps 0..=5 skipped
    let tail_d: Vec<&str> = text_d.lines().skip(2).collect(); // header + restart row skipped
    let rows_equal = tail_a == tail_d && tail_a.len() == 5;

    let _ = std::fs::remove_dir_all(&dir);
    report(
        "10 determinism and restart",
        deterministic && restart_equal && rows_equal,
        &format!("rerun identical: {deterministic}; split-run restart bitwise: {restart_equal}; tail rows equal: {rows_equal}"),
    );
}
