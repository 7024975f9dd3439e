//! Energy, mass, and helicity observables, balance-residual tracking, and
//! the per-step CSV stream.

use std::io::Write;

use crate::geometry::padded::{ddr, ddz, integrate_rdv, Padded};
use crate::geometry::{apply_boundary, d_phi_slices, Grid};
use crate::model::slices::{Geom, StateSlices};
use crate::model::{ModelBc, ModelFlags, PhysParams, State, Var};
use crate::util::fmt_g17;

/// Per-step solver counters in the layout of the paper-style run tables.
#[derive(Debug, Clone, Copy, Default)]
pub struct SolverStats {
    pub newton_iters: usize,
    pub gmres_iters: usize,
    pub refactorizations: usize,
    pub wall_time: f64,
}

/// Energy split of a state; totals are sums of the parts by construction.
#[derive(Debug, Clone, Copy, Default)]
pub struct EnergyReport {
    pub e_mag_0: f64,
    pub e_mag_n: f64,
    pub e_kin_0: f64,
    pub e_kin_n: f64,
    pub e_kin_par: f64,
    pub e_kin_cross: f64,
    pub e_internal: f64,
    pub e_total: f64,
    pub mass: f64,
    pub helicity: f64,
    pub dissipation_expected: f64,
}

impl EnergyReport {
    pub fn e_mag(&self) -> f64 {
        self.e_mag_0 + self.e_mag_n
    }

    pub fn e_kin_pol(&self) -> f64 {
        self.e_kin_0 + self.e_kin_n
    }
}

/// All energy integrals of the Lemma's decomposition:
/// magnetic |grad psi|^2/(2R^2), poloidal kinetic rho_hat |grad u|^2/2,
/// parallel kinetic rho |B|^2 v^2/2, the cross term -rho v (grad u . grad psi),
/// internal p/(gamma-1), plus mass, helicity and the expected dissipation.
pub fn compute_energies(
    state: &State,
    params: &PhysParams,
    flags: &ModelFlags,
    bc: &ModelBc,
    grid: &Grid,
) -> EnergyReport {
    let geom = Geom::new(grid);
    let two_pi = 2.0 * std::f64::consts::PI;

    // per-harmonic padded components for the mode-separable integrals
    let cpsi = apply_boundary(&state.psi, bc.field_bc(Var::Psi), grid);
    let cu = apply_boundary(&state.u, bc.field_bc(Var::U), grid);
    let crho = apply_boundary(&state.rho, bc.field_bc(Var::Rho), grid);
    let cp = apply_boundary(&state.p, bc.field_bc(Var::P), grid);

    let grad2 = |p: &Padded| -> Padded {
        let dr = ddr(p, grid);
        let dz = ddz(p, grid);
        dr.mul(&dr).add(&dz.mul(&dz))
    };

    let e_mag_0 = two_pi * integrate_rdv(&grad2(&cpsi.h[0]).mul(&geom.inv_r2).scale(0.5), grid);
    let e_mag_n = 0.5
        * two_pi
        * integrate_rdv(
            &grad2(&cpsi.h[1])
                .add(&grad2(&cpsi.h[2]))
                .mul(&geom.inv_r2)
                .scale(0.5),
            grid,
        );

    // axisymmetric poloidal kinetic energy
    let rho_hat0 = crho.h[0].mul(&geom.r2);
    let e_kin_0 = two_pi * integrate_rdv(&grad2(&cu.h[0]).mul(&rho_hat0).scale(0.5), grid);

    // exact totals through the collocation slices
    let s = StateSlices::new(state, bc, grid);
    let nphi = grid.n_phi as f64;
    let mut kin_total = 0.0;
    let mut kin_par = 0.0;
    let mut kin_cross = 0.0;
    for k in 0..grid.n_phi {
        let gradu2 = s.u.dr[k].mul(&s.u.dr[k]).add(&s.u.dz[k].mul(&s.u.dz[k]));
        let rho_hat = s.rho.v[k].mul(&geom.r2);
        kin_total += integrate_rdv(&rho_hat.mul(&gradu2).scale(0.5), grid);
        let gpsi2 = s.psi.dr[k]
            .mul(&s.psi.dr[k])
            .add(&s.psi.dz[k].mul(&s.psi.dz[k]));
        let b2 = geom
            .inv_r2
            .mul(&gpsi2.map(|x| x + params.f0 * params.f0));
        kin_par += integrate_rdv(
            &s.rho.v[k]
                .mul(&b2)
                .mul(&s.vpar.v[k])
                .mul(&s.vpar.v[k])
                .scale(0.5),
            grid,
        );
        let gu_gpsi = s.u.dr[k]
            .mul(&s.psi.dr[k])
            .add(&s.u.dz[k].mul(&s.psi.dz[k]));
        kin_cross -= integrate_rdv(&s.rho.v[k].mul(&s.vpar.v[k]).mul(&gu_gpsi), grid);
    }
    let e_kin_total = kin_total * two_pi / nphi;
    let e_kin_par = kin_par * two_pi / nphi;
    let e_kin_cross = kin_cross * two_pi / nphi;

    let e_internal = two_pi * integrate_rdv(&cp.h[0], grid) / (params.gamma - 1.0);
    let mass = two_pi * integrate_rdv(&crho.h[0], grid);
    let helicity = params.f0 * two_pi * integrate_rdv(&cpsi.h[0].mul(&geom.inv_r2), grid);

    let dissipation_expected = expected_dissipation(&s, params, flags, grid, &geom);

    let e_kin_n = e_kin_total - e_kin_0;
    let e_total = e_mag_0 + e_mag_n + e_kin_0 + e_kin_n + e_kin_par + e_kin_cross + e_internal;
    EnergyReport {
        e_mag_0,
        e_mag_n,
        e_kin_0,
        e_kin_n,
        e_kin_par,
        e_kin_cross,
        e_internal,
        e_total,
        mass,
        helicity,
        dissipation_expected,
    }
}

/// D = int nu(T) w^2 dW + int eta(T) j^2/R^2 dW
///     (+ int eta(T) |grad_pol(d_phi psi / R^2)|^2 dW when the extra
///      resistive term is active); the balance law dE/dt = -D holds for
///      constant coefficients.
fn expected_dissipation(
    s: &StateSlices,
    params: &PhysParams,
    flags: &ModelFlags,
    grid: &Grid,
    geom: &Geom,
) -> f64 {
    let nphi = grid.n_phi as f64;
    let two_pi = 2.0 * std::f64::consts::PI;
    let law = |c0: f64, cexp: f64, p: &Padded, r: &Padded| -> Padded {
        if cexp == 0.0 {
            p.map(|_| c0)
        } else {
            p.zip(r, |pv, rv| {
                c0 * (pv / rv.max(params.rho_floor)).max(params.t_floor).powf(cexp)
            })
        }
    };
    let chi = if flags.resistive_phi_term {
        let dphi_psi = d_phi_slices(&s.psi.v, grid);
        Some(
            dphi_psi
                .iter()
                .map(|x| x.mul(&geom.inv_r2))
                .collect::<Vec<_>>(),
        )
    } else {
        None
    };
    let mut total = 0.0;
    for k in 0..grid.n_phi {
        let eta = law(params.eta0, params.eta_exp, &s.p.v[k], &s.rho.v[k]);
        let nu = law(params.nu0, params.nu_exp, &s.p.v[k], &s.rho.v[k]);
        total += integrate_rdv(&nu.mul(&s.w.v[k]).mul(&s.w.v[k]), grid);
        total += integrate_rdv(
            &eta.mul(&s.j.v[k]).mul(&s.j.v[k]).mul(&geom.inv_r2),
            grid,
        );
        if let Some(chi) = &chi {
            let cdr = ddr(&chi[k], grid);
            let cdz = ddz(&chi[k], grid);
            total += integrate_rdv(&eta.mul(&cdr.mul(&cdr).add(&cdz.mul(&cdz))), grid);
        }
    }
    total * two_pi / nphi
}

/// (E^{n+1} - E^n)/dt - (-D): zero for a perfectly balanced step.
pub fn energy_balance_residual(
    report_new: &EnergyReport,
    report_old: &EnergyReport,
    dt: f64,
    dissipation_expected: f64,
) -> f64 {
    (report_new.e_total - report_old.e_total) / dt + dissipation_expected
}

/// CSV stream for accepted steps; header emitted exactly once.
pub struct DiagnosticsCsv<W: Write> {
    sink: W,
    wrote_header: bool,
}

pub const CSV_HEADER: &str = "step,time,dt,E_mag_0,E_mag_n,E_kin_0,E_kin_n,E_kin_par,E_kin_cross,E_internal,E_total,mass,helicity,balance_residual,newton_iters,gmres_iters,refactorizations";

impl<W: Write> DiagnosticsCsv<W> {
    pub fn new(sink: W) -> Self {
        DiagnosticsCsv {
            sink,
            wrote_header: false,
        }
    }

    pub fn emit(
        &mut self,
        step: usize,
        time: f64,
        dt: f64,
        report: &EnergyReport,
        balance_residual: f64,
        stats: &SolverStats,
    ) -> std::io::Result<()> {
        if !self.wrote_header {
            writeln!(self.sink, "{CSV_HEADER}")?;
            self.wrote_header = true;
        }
        writeln!(
            self.sink,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            step,
            fmt_g17(time),
            fmt_g17(dt),
            fmt_g17(report.e_mag_0),
            fmt_g17(report.e_mag_n),
            fmt_g17(report.e_kin_0),
            fmt_g17(report.e_kin_n),
            fmt_g17(report.e_kin_par),
            fmt_g17(report.e_kin_cross),
            fmt_g17(report.e_internal),
            fmt_g17(report.e_total),
            fmt_g17(report.mass),
            fmt_g17(report.helicity),
            fmt_g17(balance_residual),
            stats.newton_iters,
            stats.gmres_iters,
            stats.refactorizations,
        )?;
        self.sink.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{FieldTrace, SpectralField};
    use crate::model::StateTraces;

    fn grid() -> Grid {
        Grid::new(1.0, 2.0, 0.0, 1.0, 33, 33, 8, 8)
    }

    fn setup() -> (PhysParams, ModelFlags) {
        (PhysParams::default(), ModelFlags::default())
    }

    #[test]
    fn zero_state_has_zero_energies() {
        let g = grid();
        let (params, flags) = setup();
        let bc = ModelBc::homogeneous(&flags);
        let r = compute_energies(&State::zeros(&g), &params, &flags, &bc, &g);
        assert_eq!(r.e_total, 0.0);
        assert_eq!(r.mass, 0.0);
        assert_eq!(r.helicity, 0.0);
    }

    #[test]
    fn linear_flux_magnetic_energy_matches_analytic_integral() {
        // psi = Z on [1,2]x[0,1]: int |grad psi|^2/(2R^2) dW = pi ln 2.
        let g = grid();
        let (params, flags) = setup();
        let mut traces = StateTraces::zero(&g);
        traces.psi = FieldTrace::from_fn(&g, |_, z| z);
        let bc = ModelBc::fixed(&flags, traces);
        let mut s = State::zeros(&g);
        s.psi = SpectralField::from_mode0(&g, |_, z| z);
        let r = compute_energies(&s, &params, &flags, &bc, &g);
        let want = std::f64::consts::PI * 2.0f64.ln();
        assert!((r.e_mag_0 - want).abs() < 2e-3, "{} vs {want}", r.e_mag_0);
        assert_eq!(r.e_mag_n, 0.0);
    }

    #[test]
    fn uniform_plasma_internal_energy_and_mass() {
        let g = grid();
        let (params, flags) = setup();
        let mut traces = StateTraces::zero(&g);
        traces.rho = FieldTrace::constant(&g, 1.0);
        traces.p = FieldTrace::constant(&g, 1.0);
        let bc = ModelBc::fixed(&flags, traces);
        let mut s = State::zeros(&g);
        s.rho = SpectralField::constant(&g, 1.0);
        s.p = SpectralField::constant(&g, 1.0);
        let r = compute_energies(&s, &params, &flags, &bc, &g);
        let three_pi = 3.0 * std::f64::consts::PI;
        assert!((r.e_internal - 1.5 * three_pi).abs() < 1e-10, "{}", r.e_internal);
        assert!((r.mass - three_pi).abs() < 1e-10);
    }

    #[test]
    fn mode0_state_has_no_harmonic_energy() {
        let g = grid();
        let (params, flags) = setup();
        let bc = ModelBc::homogeneous(&flags);
        let pi = std::f64::consts::PI;
        let mut s = State::zeros(&g);
        s.psi = SpectralField::from_mode0(&g, |r, z| (pi * (r - 1.0)).sin() * (pi * z).sin());
        s.u = SpectralField::from_mode0(&g, |r, z| (2.0 * pi * (r - 1.0)).sin() * (pi * z).sin());
        s.rho = SpectralField::from_mode0(&g, |r, z| 0.2 * (pi * (r - 1.0)).sin() * (pi * z).sin());
        let r = compute_energies(&s, &params, &flags, &bc, &g);
        assert_eq!(r.e_mag_n, 0.0);
        assert!(r.e_kin_n.abs() < 1e-15 * r.e_kin_0.abs().max(1.0), "{}", r.e_kin_n);
    }

    #[test]
    fn total_is_sum_of_components() {
        let g = grid();
        let (params, flags) = setup();
        let flags = ModelFlags { with_vpar: true, ..flags };
        let bc = ModelBc::homogeneous(&flags);
        let pi = std::f64::consts::PI;
        let mut s = State::zeros(&g);
        s.psi = SpectralField::from_harmonics(
            &g,
            |r, z| (pi * (r - 1.0)).sin() * (pi * z).sin(),
            |r, z| 0.3 * (2.0 * pi * (r - 1.0)).sin() * (pi * z).sin(),
            |_, _| 0.0,
        );
        s.u = s.psi.clone();
        s.rho = SpectralField::from_mode0(&g, |r, z| 0.5 * (pi * (r - 1.0)).sin() * (pi * z).sin());
        s.p = s.rho.clone();
        s.vpar = s.u.clone();
        let r = compute_energies(&s, &params, &flags, &bc, &g);
        let sum = r.e_mag_0 + r.e_mag_n + r.e_kin_0 + r.e_kin_n + r.e_kin_par + r.e_kin_cross
            + r.e_internal;
        assert!((r.e_total - sum).abs() <= 1e-12 * sum.abs().max(1.0));
    }

    #[test]
    fn balance_residual_trivial_cases() {
        let a = EnergyReport { e_total: 5.0, ..Default::default() };
        assert_eq!(energy_balance_residual(&a, &a, 0.1, 0.0), 0.0);
        // linear-in-time decay with matching dissipation balances exactly
        let mut b = a;
        b.e_total = 5.0 - 0.1 * 2.0;
        assert!(energy_balance_residual(&b, &a, 0.1, 2.0).abs() < 1e-14);
    }

    #[test]
    fn csv_header_once_and_roundtrip_floats() {
        let mut buf = Vec::new();
        {
            let mut csv = DiagnosticsCsv::new(&mut buf);
            let r = EnergyReport { e_total: 1.0 / 3.0, ..Default::default() };
            let st = SolverStats { newton_iters: 2, gmres_iters: 7, refactorizations: 1, wall_time: 0.0 };
            csv.emit(0, 0.0, 0.125, &r, 0.0, &st).unwrap();
            csv.emit(1, 0.125, 0.125, &r, -3.0e-17, &st).unwrap();
        }
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("step,time,dt,"));
        assert_eq!(lines.iter().filter(|l| l.starts_with("step,")).count(), 1);
        let third: f64 = lines[1].split(',').nth(10).unwrap().parse().unwrap();
        assert_eq!(third.to_bits(), (1.0f64 / 3.0).to_bits());
    }
}
