//! Grad-Shafranov initialization, background profiles, and perturbation
//! seeding.

use crate::geometry::{FieldTrace, Grid, SpectralField};
use crate::linear::BandMatrix;
use crate::model::{ModelBc, ModelFlags, State, StateTraces, Var};

/// Right-hand side family of Delta* psi = f.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GsRhs {
    /// f = Delta* of amplitude sin(pi Rhat) sin(pi Zhat), evaluated
    /// analytically; the solve must reproduce the manufactured flux.
    Manufactured { amplitude: f64 },
    /// dp/dpsi = c1 and F F' = c2 psi: (Delta* + c2) psi = -c1 R^2.
    LinearProfiles { c1: f64, c2: f64 },
}

/// Pedestal-like profile base + amp (1 + tanh((psi - center)/width)) / 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSpec {
    pub base: f64,
    pub amp: f64,
    pub center: f64,
    pub width: f64,
}

impl ProfileSpec {
    pub fn eval(&self, psi: f64) -> f64 {
        self.base + 0.5 * self.amp * (1.0 + ((psi - self.center) / self.width).tanh())
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.base <= 0.0 {
            return Err("profile base must be positive".into());
        }
        if self.amp < 0.0 {
            return Err("profile amplitude must be >= 0".into());
        }
        if self.width <= 0.0 {
            return Err("profile width must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EquilibriumSpec {
    pub rhs: GsRhs,
    pub rho: ProfileSpec,
    pub temp: ProfileSpec,
    pub perturb_amplitude: f64,
    pub perturb_target: Var,
}

impl Default for EquilibriumSpec {
    fn default() -> Self {
        EquilibriumSpec {
            rhs: GsRhs::Manufactured { amplitude: 0.1 },
            rho: ProfileSpec { base: 1.0, amp: 0.0, center: 0.0, width: 1.0 },
            temp: ProfileSpec { base: 0.1, amp: 0.0, center: 0.0, width: 1.0 },
            perturb_amplitude: 0.0,
            perturb_target: Var::U,
        }
    }
}

#[derive(Debug)]
pub enum InitError {
    Singular { column: usize },
}

impl std::fmt::Display for InitError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InitError::Singular { column } => {
                write!(f, "Grad-Shafranov system is singular at column {column}")
            }
        }
    }
}

impl std::error::Error for InitError {}

/// Assemble the mode-0 Grad-Shafranov operator (plus a scalar shift) as a
/// banded system over the interior nodes with homogeneous Dirichlet walls.
fn gs_matrix(grid: &Grid, shift: f64) -> BandMatrix {
    let n = grid.n();
    let mut m = BandMatrix::new(n, grid.nz, grid.nz);
    let (hr2, hz2) = (grid.hr * grid.hr, grid.hz * grid.hz);
    for i in 0..grid.nr {
        let r = grid.r(i as isize);
        let re = grid.r_half(i as isize);
        let rw = grid.r_half(i as isize - 1);
        for j in 0..grid.nz {
            let row = grid.idx(i, j);
            let ce = r / (re * hr2);
            let cw = r / (rw * hr2);
            let cz = 1.0 / hz2;
            m.set(row, row, -(ce + cw) - 2.0 * cz + shift);
            if i + 1 < grid.nr {
                m.set(row, grid.idx(i + 1, j), ce);
            }
            if i > 0 {
                m.set(row, grid.idx(i - 1, j), cw);
            }
            if j + 1 < grid.nz {
                m.set(row, grid.idx(i, j + 1), cz);
            }
            if j > 0 {
                m.set(row, grid.idx(i, j - 1), cz);
            }
        }
    }
    m
}

/// Analytic manufactured flux and its Grad-Shafranov image.
pub fn manufactured_psi(grid: &Grid, amplitude: f64, r: f64, z: f64) -> f64 {
    let a = std::f64::consts::PI / (grid.r_max - grid.r_min);
    let b = std::f64::consts::PI / (grid.z_max - grid.z_min);
    amplitude * (a * (r - grid.r_min)).sin() * (b * (z - grid.z_min)).sin()
}

pub fn manufactured_gs_rhs(grid: &Grid, amplitude: f64, r: f64, z: f64) -> f64 {
    let a = std::f64::consts::PI / (grid.r_max - grid.r_min);
    let b = std::f64::consts::PI / (grid.z_max - grid.z_min);
    let sr = (a * (r - grid.r_min)).sin();
    let cr = (a * (r - grid.r_min)).cos();
    let sz = (b * (z - grid.z_min)).sin();
    amplitude * (-(a * a + b * b) * sr * sz - (a / r) * cr * sz)
}

/// Solve Delta* psi = f (or the affine linear-profiles variant) with
/// homogeneous Dirichlet boundary; returns the mode-0 flux.
pub fn solve_grad_shafranov(
    rhs: GsRhs,
    grid: &Grid,
) -> Result<SpectralField, InitError> {
    let (shift, f): (f64, Vec<f64>) = match rhs {
        GsRhs::Manufactured { amplitude } => {
            let mut f = vec![0.0; grid.n()];
            for i in 0..grid.nr {
                for j in 0..grid.nz {
                    f[grid.idx(i, j)] =
                        manufactured_gs_rhs(grid, amplitude, grid.r(i as isize), grid.z(j as isize));
                }
            }
            (0.0, f)
        }
        GsRhs::LinearProfiles { c1, c2 } => {
            let mut f = vec![0.0; grid.n()];
            for i in 0..grid.nr {
                let r = grid.r(i as isize);
                for j in 0..grid.nz {
                    f[grid.idx(i, j)] = -c1 * r * r;
                }
            }
            (c2, f)
        }
    };
    let mut m = gs_matrix(grid, shift);
    m.factor().map_err(|column| InitError::Singular { column })?;
    let mut x = f;
    m.solve(&mut x);
    let mut psi = SpectralField::zeros(grid);
    psi.c0.copy_from_slice(&x);
    Ok(psi)
}

/// rho0 and p0 = rho0 T0 from the pedestal-like profiles, mode 0 only.
pub fn init_profiles(
    psi: &SpectralField,
    spec: &EquilibriumSpec,
    grid: &Grid,
) -> (SpectralField, SpectralField) {
    let mut rho = SpectralField::zeros(grid);
    let mut p = SpectralField::zeros(grid);
    for idx in 0..grid.n() {
        let ps = psi.c0[idx];
        let r0 = spec.rho.eval(ps);
        rho.c0[idx] = r0;
        p.c0[idx] = r0 * spec.temp.eval(ps);
    }
    (rho, p)
}

/// Add amplitude sin(pi Rhat) sin(pi Zhat) to the cos harmonic of the target
/// field; mode 0 untouched.
pub fn seed_perturbation(state: &mut State, amplitude: f64, target: Var, grid: &Grid) {
    assert!(amplitude >= 0.0, "perturbation amplitude must be >= 0");
    if amplitude == 0.0 {
        return;
    }
    let pi = std::f64::consts::PI;
    let f = state.field_mut(target);
    for i in 0..grid.nr {
        for j in 0..grid.nz {
            f.cc[grid.idx(i, j)] +=
                amplitude * (pi * grid.r_hat(i as isize)).sin() * (pi * grid.z_hat(j as isize)).sin();
        }
    }
}

/// A complete initial state with its boundary traces.
pub struct Equilibrium {
    pub state: State,
    pub traces: StateTraces,
}

pub fn build_equilibrium(
    spec: &EquilibriumSpec,
    flags: &ModelFlags,
    grid: &Grid,
) -> Result<Equilibrium, InitError> {
    let psi = solve_grad_shafranov(spec.rhs, grid)?;
    let (rho, p) = init_profiles(&psi, spec, grid);

    let mut traces = StateTraces::zero(grid);
    // psi = 0 on the wall, so the profile traces are constants
    let rho_wall = spec.rho.eval(0.0);
    traces.rho = FieldTrace::constant(grid, rho_wall);
    traces.p = FieldTrace::constant(grid, rho_wall * spec.temp.eval(0.0));
    traces.j = match spec.rhs {
        GsRhs::Manufactured { amplitude } => {
            FieldTrace::from_fn(grid, |r, z| manufactured_gs_rhs(grid, amplitude, r, z))
        }
        GsRhs::LinearProfiles { c1, .. } => FieldTrace::from_fn(grid, |r, _| -c1 * r * r),
    };

    let mut state = State::zeros(grid);
    state.psi = psi;
    state.rho = rho;
    state.p = p;
    let bc = ModelBc::fixed(flags, traces.clone());
    state.refresh_constraints(&bc, grid);
    seed_perturbation(&mut state, spec.perturb_amplitude, spec.perturb_target, grid);
    state.refresh_constraints(&bc, grid);
    Ok(Equilibrium { state, traces })
}
