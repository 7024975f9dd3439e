//! Scheme-order, solver-equivalence, and run-loop policy tests.

use rmhd::diagnostics::DiagnosticsCsv;
use rmhd::geometry::{FieldTrace, Grid, SpectralField};
use rmhd::integrator::*;
use rmhd::linear::BlockSpec;
use rmhd::model::*;

/// d/dt u = -u^2, u(0) = 1, exact solution 1/(1+t).
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

fn integrate_ode(scheme: SchemeParams, dt: f64, t_end: f64) -> f64 {
    let sys = Logistic;
    let newton = NewtonParams {
        mode: NewtonMode::Exact,
        eps_a: 1e-13,
        gmres_tol: 1e-13,
        max_iter: 30,
        ..NewtonParams::default()
    };
    let mut lin = LinearContext::new(vec![BlockSpec::dense("all", vec![0])]);
    let steps = (t_end / dt).round() as usize;
    let mut un = 1.0f64;
    let mut unm1 = un;
    for k in 0..steps {
        let sch = if k == 0 {
            SchemeParams { theta: scheme.theta, zeta: 0.0 }
        } else {
            scheme
        };
        lin.invalidate();
        let step = ThetaStep::new(&sys, &[un], &[unm1], dt, sch);
        let out = newton_solve(&step, &[un], &newton, &mut lin).unwrap();
        unm1 = un;
        un = out.u[0];
    }
    un
}

fn observed_order(scheme: SchemeParams) -> f64 {
    let t_end = 1.0;
    let exact = 1.0 / (1.0 + t_end);
    let e1 = (integrate_ode(scheme, 0.05, t_end) - exact).abs();
    let e2 = (integrate_ode(scheme, 0.025, t_end) - exact).abs();
    (e1 / e2).log2()
}

#[test]
fn scheme_orders_on_the_ode_fixture() {
    let p_euler = observed_order(SchemeParams::euler());
    let p_cn = observed_order(SchemeParams::crank_nicolson());
    let p_gear = observed_order(SchemeParams::gear());
    assert!((p_euler - 1.0).abs() <= 0.2, "euler order {p_euler}");
    assert!((p_cn - 2.0).abs() <= 0.2, "cn order {p_cn}");
    assert!((p_gear - 2.0).abs() <= 0.2, "gear order {p_gear}");
}

#[test]
fn linearized_step_differs_from_newton_at_second_order_in_dt() {
    let sys = Logistic;
    let mut diffs = Vec::new();
    for &dt in &[0.2, 0.1, 0.05] {
        let mut lin = LinearContext::new(vec![BlockSpec::dense("all", vec![0])]);
        let step = ThetaStep::new(&sys, &[1.0], &[1.0], dt, SchemeParams::crank_nicolson());
        let exact_params = NewtonParams {
            mode: NewtonMode::Exact,
            eps_a: 1e-13,
            gmres_tol: 1e-13,
            max_iter: 30,
            ..NewtonParams::default()
        };
        let newton = newton_solve(&step, &[1.0], &exact_params, &mut lin).unwrap();
        lin.invalidate();
        let lin_params = NewtonParams {
            mode: NewtonMode::Linearized,
            gmres_tol: 1e-13,
            ..exact_params
        };
        let linearized = newton_solve(&step, &[1.0], &lin_params, &mut lin).unwrap();
        diffs.push((newton.u[0] - linearized.u[0]).abs());
    }
    // at least O(dt^2); on this fixture the gap is in fact O(dt^3) because
    // the curvature of G carries its own factor of dt
    let r1 = diffs[0] / diffs[1];
    let r2 = diffs[1] / diffs[2];
    assert!(r1 > 3.5 && r1 < 16.0, "{diffs:?}");
    assert!(r2 > 3.5 && r2 < 16.0, "{diffs:?}");
}

fn small_grid() -> Grid {
    Grid::new(1.0, 2.0, 0.0, 1.0, 9, 9, 2, 8)
}

fn perturbed_state(g: &Grid, amp: f64) -> (State, ModelBc, PhysParams, ModelFlags) {
    let pi = std::f64::consts::PI;
    let params = PhysParams { eta0: 1e-3, nu0: 1e-3, ..PhysParams::default() };
    let flags = ModelFlags::default();
    let mut st = State::zeros(g);
    st.psi = SpectralField::from_mode0(g, |r, z| 0.2 * (pi * (r - 1.0)).sin() * (pi * z).sin());
    st.rho = SpectralField::constant(g, 1.0);
    st.p = SpectralField::from_mode0(g, |r, z| {
        0.1 + 0.05 * (pi * (r - 1.0)).sin() * (pi * z).sin()
    });
    let mut traces = StateTraces::zero(g);
    traces.rho = FieldTrace::constant(g, 1.0);
    traces.p = FieldTrace::constant(g, 0.1);
    let bc = ModelBc::fixed(&flags, traces);
    let mut pert = SpectralField::zeros(g);
    for i in 0..g.nr {
        for j in 0..g.nz {
            let (rh, zh) = (g.r_hat(i as isize), g.z_hat(j as isize));
            pert.cc[g.idx(i, j)] = amp * (pi * rh).sin() * (pi * zh).sin();
            pert.c0[g.idx(i, j)] = 0.5 * amp * (2.0 * pi * rh).sin() * (pi * zh).sin();
        }
    }
    st.u = pert;
    st.refresh_constraints(&bc, g);
    (st, bc, params, flags)
}

#[test]
fn exact_and_inexact_newton_agree_and_inexact_is_cheaper() {
    let g = small_grid();
    let (st, bc, params, flags) = perturbed_state(&g, 0.05);
    let dt = 0.5;
    let scheme = SchemeParams::crank_nicolson();
    let step = MhdStep::new(&st, &st, dt, scheme, &params, &flags, &bc, &g);
    let packing = rmhd::linear::Packing::new(&g, flags.with_vpar);
    let u0 = packing.pack(&st);

    let eps_a = 1e-9;
    let exact_params = NewtonParams {
        mode: NewtonMode::Exact,
        eps_a,
        max_iter: 30,
        ..NewtonParams::default()
    };
    let mut lin1 = LinearContext::new(rmhd::linear::harmonic_blocks(&packing));
    let exact = newton_solve(&step, &u0, &exact_params, &mut lin1).unwrap();

    let inexact_params = NewtonParams {
        mode: NewtonMode::Inexact,
        eps_a,
        max_iter: 30,
        ..NewtonParams::default()
    };
    let mut lin2 = LinearContext::new(rmhd::linear::harmonic_blocks(&packing));
    let inexact = newton_solve(&step, &u0, &inexact_params, &mut lin2).unwrap();

    let tol = eps_a + exact_params.eps_r * exact.initial_residual;
    let diff: f64 = exact
        .u
        .iter()
        .zip(&inexact.u)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    assert!(diff <= 10.0 * tol, "states differ by {diff:e}, tol {tol:e}");
    assert!(
        inexact.gmres_total <= exact.gmres_total,
        "inexact {} vs exact {}",
        inexact.gmres_total,
        exact.gmres_total
    );
    assert!(exact.iters >= 1 && inexact.iters >= 1);
}

#[test]
fn equilibrium_run_is_a_fixed_point() {
    let g = small_grid();
    let params = PhysParams { eta0: 1e-3, nu0: 1e-3, ..PhysParams::default() };
    let flags = ModelFlags::default();
    let mut traces = StateTraces::zero(&g);
    traces.rho = FieldTrace::constant(&g, 1.0);
    traces.p = FieldTrace::constant(&g, 0.2);
    let bc = ModelBc::fixed(&flags, traces);
    let mut st = State::zeros(&g);
    st.rho = SpectralField::constant(&g, 1.0);
    st.p = SpectralField::constant(&g, 0.2);

    let setup = RunSetup {
        params: &params,
        flags: &flags,
        bc: &bc,
        grid: &g,
        scheme: SchemeParams::crank_nicolson(),
        newton: NewtonParams::default(),
        adaptive: AdaptiveParams { dt0: 0.5, dt_max: 0.5, dt_min: 1e-6, ..AdaptiveParams::default() },
        refactor: RefactorPolicyKind::OnDemand,
        steps: 10,
    };
    let result = run::<std::io::Sink>(st.clone(), 0.0, 0, &setup, None).unwrap();
    assert_eq!(result.accepted, 10);
    assert_eq!(result.rejected, 0);
    for s in &result.per_step {
        assert!(s.newton_iters <= 1, "{:?}", s);
    }
    let drift = result.state.psi.max_abs().max(result.state.u.max_abs());
    assert!(drift < 1e-9, "{drift}");
    let dp = result.state.p.sub(&st.p).max_abs();
    assert!(dp < 1e-9, "{dp}");
}

#[test]
fn failed_steps_retry_at_eight_tenths_dt() {
    let g = small_grid();
    let (st, bc, params, flags) = perturbed_state(&g, 0.2);
    // one Newton iteration cannot meet the tolerance at this dt, so the step
    // must fail and retry at 0.8 dt until the problem is mild enough
    let newton = NewtonParams {
        mode: NewtonMode::Exact,
        eps_a: 2e-7,
        max_iter: 1,
        ..NewtonParams::default()
    };
    let dt0 = 2.0;
    let setup = RunSetup {
        params: &params,
        flags: &flags,
        bc: &bc,
        grid: &g,
        scheme: SchemeParams::crank_nicolson(),
        newton,
        adaptive: AdaptiveParams {
            dt0,
            dt_min: 1e-8,
            dt_max: 10.0,
            ..AdaptiveParams::default()
        },
        refactor: RefactorPolicyKind::EveryStep,
        steps: 1,
    };
    let result = run::<std::io::Sink>(st, 0.0, 0, &setup, None).unwrap();
    assert_eq!(result.accepted, 1);
    assert!(result.rejected >= 1, "expected at least one rejection");
    let expected_dt = dt0 * 0.8f64.powi(result.rejected as i32);
    let got = result.dts[0];
    assert!(
        (got - expected_dt).abs() < 1e-12 * expected_dt,
        "dt trace: got {got}, want {expected_dt} after {} rejections",
        result.rejected
    );
}

#[test]
fn csv_stream_has_one_row_per_accepted_step() {
    let g = small_grid();
    let params = PhysParams::default();
    let flags = ModelFlags::default();
    let mut traces = StateTraces::zero(&g);
    traces.rho = FieldTrace::constant(&g, 1.0);
    traces.p = FieldTrace::constant(&g, 0.2);
    let bc = ModelBc::fixed(&flags, traces);
    let mut st = State::zeros(&g);
    st.rho = SpectralField::constant(&g, 1.0);
    st.p = SpectralField::constant(&g, 0.2);
    let setup = RunSetup {
        params: &params,
        flags: &flags,
        bc: &bc,
        grid: &g,
        scheme: SchemeParams::crank_nicolson(),
        newton: NewtonParams::default(),
        adaptive: AdaptiveParams { dt0: 0.1, dt_max: 0.1, dt_min: 1e-6, ..AdaptiveParams::default() },
        refactor: RefactorPolicyKind::OnDemand,
        steps: 3,
    };
    let mut sink = Vec::new();
    let mut csv = DiagnosticsCsv::new(&mut sink);
    run(st, 0.0, 0, &setup, Some(&mut csv)).unwrap();
    let text = String::from_utf8(sink).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    // header + initial row + 3 accepted steps
    assert_eq!(lines.len(), 5, "{text}");
    assert!(lines[1].starts_with("0,"));
    assert!(lines[4].starts_with("3,"));
}
