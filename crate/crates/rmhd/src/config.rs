//! Line-oriented run configuration: `[section]` headers, `key = value`
//! pairs, `#` comments.  Every omitted key has a documented default; unknown
//! sections or keys are rejected with their line number, and all module
//! invariants are re-checked after parsing.

use crate::equilibrium::{EquilibriumSpec, GsRhs};
use crate::integrator::{
    AdaptiveParams, NewtonMode, NewtonParams, RefactorPolicyKind, SchemeParams,
};
use crate::model::{BcVariant, ModelFlags, PhysParams, Var};

#[derive(Debug, Clone)]
pub struct GridConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub nr: usize,
    pub nz: usize,
    pub n_p: u32,
    pub n_phi: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            r_min: 1.0,
            r_max: 2.0,
            z_min: 0.0,
            z_max: 1.0,
            nr: 17,
            nz: 17,
            n_p: 8,
            n_phi: 8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OutputConfig {
    pub csv_path: String,
    pub summary_path: String,
    pub restart_path: String,
    /// Write a restart file every this many accepted steps (0 disables).
    pub restart_every: usize,
    pub seed: u64,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            csv_path: "rmhd.csv".into(),
            summary_path: "rmhd-summary.txt".into(),
            restart_path: "rmhd-restart.txt".into(),
            restart_every: 0,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSection {
    pub steps: usize,
    /// Resume from this restart file when set.
    pub restart_from: Option<String>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { steps: 10, restart_from: None }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub physics: PhysParams,
    pub model: ModelFlags,
    pub scheme: SchemeParams,
    pub newton: NewtonParams,
    pub refactor: RefactorPolicyKind,
    pub adaptive: AdaptiveParams,
    pub equilibrium: EquilibriumSpec,
    pub output: OutputConfig,
    pub run: RunSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid: GridConfig::default(),
            physics: PhysParams::default(),
            model: ModelFlags::default(),
            scheme: SchemeParams::crank_nicolson(),
            newton: NewtonParams::default(),
            refactor: RefactorPolicyKind::EveryStep,
            adaptive: AdaptiveParams { dt0: 0.1, dt_min: 1e-8, dt_max: 10.0, ..AdaptiveParams::default() },
            equilibrium: EquilibriumSpec::default(),
            output: OutputConfig::default(),
            run: RunSection::default(),
        }
    }
}

#[derive(Debug)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(line) => write!(f, "config line {line}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError { line: Some(line), message: message.into() }
}

fn inv(message: impl Into<String>) -> ConfigError {
    ConfigError { line: None, message: message.into() }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut section = String::new();
    let mut scheme_preset_seen = false;
    let mut scheme_explicit_seen = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| err(line_no, "malformed section header"))?
                .trim();
            match name {
                "grid" | "physics" | "model" | "scheme" | "newton" | "adaptive"
                | "equilibrium" | "output" | "run" => section = name.to_string(),
                other => return Err(err(line_no, format!("unknown section [{other}]"))),
            }
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, "expected `key = value`"))?;
        let key = key.trim();
        let value = value.trim();
        if section.is_empty() {
            return Err(err(line_no, "key outside of any [section]"));
        }

        let fnum = |v: &str| -> Result<f64, ConfigError> {
            v.parse().map_err(|_| err(line_no, format!("expected a number, got `{v}`")))
        };
        let unum = |v: &str| -> Result<usize, ConfigError> {
            v.parse().map_err(|_| err(line_no, format!("expected an integer, got `{v}`")))
        };
        let boolean = |v: &str| -> Result<bool, ConfigError> {
            match v {
                "true" => Ok(true),
                "false" => Ok(false),
                _ => Err(err(line_no, format!("expected true/false, got `{v}`"))),
            }
        };

        match (section.as_str(), key) {
            ("grid", "R_min") => cfg.grid.r_min = fnum(value)?,
            ("grid", "R_max") => cfg.grid.r_max = fnum(value)?,
            ("grid", "Z_min") => cfg.grid.z_min = fnum(value)?,
            ("grid", "Z_max") => cfg.grid.z_max = fnum(value)?,
            ("grid", "NR") => cfg.grid.nr = unum(value)?,
            ("grid", "NZ") => cfg.grid.nz = unum(value)?,
            ("grid", "n_p") => {
                cfg.grid.n_p = value
                    .parse()
                    .map_err(|_| err(line_no, format!("expected a positive integer, got `{value}`")))?
            }
            ("grid", "N_phi") => cfg.grid.n_phi = unum(value)?,

            ("physics", "F0") => cfg.physics.f0 = fnum(value)?,
            ("physics", "gamma") => cfg.physics.gamma = fnum(value)?,
            ("physics", "eta0") => cfg.physics.eta0 = fnum(value)?,
            ("physics", "eta_exp") => cfg.physics.eta_exp = fnum(value)?,
            ("physics", "nu0") => cfg.physics.nu0 = fnum(value)?,
            ("physics", "nu_exp") => cfg.physics.nu_exp = fnum(value)?,
            ("physics", "k_par") => cfg.physics.k_par = fnum(value)?,
            ("physics", "k_perp") => cfg.physics.k_perp = fnum(value)?,
            ("physics", "hyper_psi") => cfg.physics.hyper_psi = fnum(value)?,
            ("physics", "hyper_w") => cfg.physics.hyper_w = fnum(value)?,
            ("physics", "hyper_rho") => cfg.physics.hyper_rho = fnum(value)?,
            ("physics", "hyper_p") => cfg.physics.hyper_p = fnum(value)?,
            ("physics", "hyper_vpar") => cfg.physics.hyper_vpar = fnum(value)?,
            ("physics", "rho_floor") => cfg.physics.rho_floor = fnum(value)?,
            ("physics", "T_floor") => cfg.physics.t_floor = fnum(value)?,

            ("model", "with_vpar") => cfg.model.with_vpar = boolean(value)?,
            ("model", "neglected_terms") => cfg.model.neglected_terms = boolean(value)?,
            ("model", "bc_variant") => {
                cfg.model.bc_variant = match value {
                    "bc" => BcVariant::Bc,
                    "bc2" => BcVariant::Bc2,
                    _ => return Err(err(line_no, format!("bc_variant must be bc or bc2, got `{value}`"))),
                }
            }
            ("model", "resistive_phi_term") => cfg.model.resistive_phi_term = boolean(value)?,

            ("scheme", "preset") => {
                scheme_preset_seen = true;
                cfg.scheme = match value {
                    "euler" => SchemeParams::euler(),
                    "crank-nicolson" | "cn" => SchemeParams::crank_nicolson(),
                    "gear" => SchemeParams::gear(),
                    _ => {
                        return Err(err(
                            line_no,
                            format!("preset must be euler, crank-nicolson, or gear, got `{value}`"),
                        ))
                    }
                };
            }
            ("scheme", "theta") => {
                scheme_explicit_seen = true;
                cfg.scheme.theta = fnum(value)?;
            }
            ("scheme", "zeta") => {
                scheme_explicit_seen = true;
                cfg.scheme.zeta = fnum(value)?;
            }

            ("newton", "mode") => {
                cfg.newton.mode = match value {
                    "linearized" => NewtonMode::Linearized,
                    "exact" => NewtonMode::Exact,
                    "inexact" => NewtonMode::Inexact,
                    _ => {
                        return Err(err(
                            line_no,
                            format!("mode must be linearized, exact, or inexact, got `{value}`"),
                        ))
                    }
                }
            }
            ("newton", "eps_a") => cfg.newton.eps_a = fnum(value)?,
            ("newton", "eps_r") => cfg.newton.eps_r = fnum(value)?,
            ("newton", "max_iter") => cfg.newton.max_iter = unum(value)?,
            ("newton", "gamma_f") => cfg.newton.gamma_f = fnum(value)?,
            ("newton", "alpha_f") => cfg.newton.alpha_f = fnum(value)?,
            ("newton", "eps0") => cfg.newton.eps0 = fnum(value)?,
            ("newton", "forcing_floor") => cfg.newton.forcing_floor = fnum(value)?,
            ("newton", "forcing_ceiling") => cfg.newton.forcing_ceiling = fnum(value)?,
            ("newton", "gmres_tol") => cfg.newton.gmres_tol = fnum(value)?,
            ("newton", "gmres_restart") => cfg.newton.gmres_restart = unum(value)?,
            ("newton", "gmres_maxit") => cfg.newton.gmres_maxit = unum(value)?,
            ("newton", "divergence_window") => cfg.newton.divergence_window = unum(value)?,
            ("newton", "refactor_policy") => {
                cfg.refactor = match value {
                    "every-step" => RefactorPolicyKind::EveryStep,
                    "on-demand" => RefactorPolicyKind::OnDemand,
                    _ => {
                        return Err(err(
                            line_no,
                            format!("refactor_policy must be every-step or on-demand, got `{value}`"),
                        ))
                    }
                }
            }

            ("adaptive", "dt0") => cfg.adaptive.dt0 = fnum(value)?,
            ("adaptive", "dt_min") => cfg.adaptive.dt_min = fnum(value)?,
            ("adaptive", "dt_max") => cfg.adaptive.dt_max = fnum(value)?,
            ("adaptive", "grow") => cfg.adaptive.grow = fnum(value)?,
            ("adaptive", "shrink") => cfg.adaptive.shrink = fnum(value)?,
            ("adaptive", "fail_factor") => cfg.adaptive.fail_factor = fnum(value)?,
            ("adaptive", "fast_iters") => cfg.adaptive.fast_iters = unum(value)?,
            ("adaptive", "slow_iters") => cfg.adaptive.slow_iters = unum(value)?,
            ("adaptive", "max_rise_per_step") => cfg.adaptive.max_rise_per_step = fnum(value)?,

            ("equilibrium", "kind") => {
                cfg.equilibrium.rhs = match value {
                    "manufactured" => GsRhs::Manufactured { amplitude: 0.1 },
                    "linear" => GsRhs::LinearProfiles { c1: 0.1, c2: 0.0 },
                    _ => {
                        return Err(err(
                            line_no,
                            format!("kind must be manufactured or linear, got `{value}`"),
                        ))
                    }
                }
            }
            ("equilibrium", "amplitude") => match &mut cfg.equilibrium.rhs {
                GsRhs::Manufactured { amplitude } => *amplitude = fnum(value)?,
                _ => return Err(err(line_no, "amplitude applies to kind = manufactured")),
            },
            ("equilibrium", "c1") => match &mut cfg.equilibrium.rhs {
                GsRhs::LinearProfiles { c1, .. } => *c1 = fnum(value)?,
                _ => return Err(err(line_no, "c1 applies to kind = linear")),
            },
            ("equilibrium", "c2") => match &mut cfg.equilibrium.rhs {
                GsRhs::LinearProfiles { c2, .. } => *c2 = fnum(value)?,
                _ => return Err(err(line_no, "c2 applies to kind = linear")),
            },
            ("equilibrium", "rho_base") => cfg.equilibrium.rho.base = fnum(value)?,
            ("equilibrium", "rho_amp") => cfg.equilibrium.rho.amp = fnum(value)?,
            ("equilibrium", "rho_center") => cfg.equilibrium.rho.center = fnum(value)?,
            ("equilibrium", "rho_width") => cfg.equilibrium.rho.width = fnum(value)?,
            ("equilibrium", "t_base") => cfg.equilibrium.temp.base = fnum(value)?,
            ("equilibrium", "t_amp") => cfg.equilibrium.temp.amp = fnum(value)?,
            ("equilibrium", "t_center") => cfg.equilibrium.temp.center = fnum(value)?,
            ("equilibrium", "t_width") => cfg.equilibrium.temp.width = fnum(value)?,
            ("equilibrium", "perturb_amplitude") => {
                cfg.equilibrium.perturb_amplitude = fnum(value)?
            }
            ("equilibrium", "perturb_target") => {
                cfg.equilibrium.perturb_target = match value {
                    "psi" => Var::Psi,
                    "u" => Var::U,
                    "rho" => Var::Rho,
                    "p" => Var::P,
                    "vpar" => Var::Vpar,
                    _ => {
                        return Err(err(
                            line_no,
                            format!("perturb_target must be psi, u, rho, p, or vpar, got `{value}`"),
                        ))
                    }
                }
            }

            ("output", "csv_path") => cfg.output.csv_path = value.to_string(),
            ("output", "summary_path") => cfg.output.summary_path = value.to_string(),
            ("output", "restart_path") => cfg.output.restart_path = value.to_string(),
            ("output", "restart_every") => cfg.output.restart_every = unum(value)?,
            ("output", "seed") => {
                cfg.output.seed = value
                    .parse()
                    .map_err(|_| err(line_no, format!("expected a u64 seed, got `{value}`")))?
            }

            ("run", "steps") => cfg.run.steps = unum(value)?,
            ("run", "restart_from") => cfg.run.restart_from = Some(value.to_string()),

            (sec, k) => return Err(err(line_no, format!("unknown key `{k}` in [{sec}]"))),
        }
    }

    if scheme_preset_seen && scheme_explicit_seen {
        return Err(inv("scheme preset conflicts with explicit theta/zeta"));
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> Result<(), ConfigError> {
    let g = &cfg.grid;
    if g.r_min <= 0.0 {
        return Err(inv("grid: R_min must be positive"));
    }
    if g.r_max <= g.r_min || g.z_max <= g.z_min {
        return Err(inv("grid: degenerate domain"));
    }
    if g.nr < 3 || g.nz < 3 {
        return Err(inv("grid: need at least 3 interior nodes per direction"));
    }
    if g.n_p < 1 {
        return Err(inv("grid: n_p must be a positive integer"));
    }
    if g.n_phi < 8 {
        return Err(inv("grid: N_phi must be >= 8"));
    }
    cfg.physics.validate().map_err(|m| inv(format!("physics: {m}")))?;
    cfg.model.validate().map_err(|m| inv(format!("model: {m}")))?;
    cfg.scheme.validate().map_err(|m| inv(format!("scheme: {m}")))?;
    cfg.newton.validate().map_err(|m| inv(format!("newton: {m}")))?;
    cfg.adaptive.validate().map_err(|m| inv(format!("adaptive: {m}")))?;
    cfg.equilibrium.rho.validate().map_err(|m| inv(format!("equilibrium rho: {m}")))?;
    cfg.equilibrium.temp.validate().map_err(|m| inv(format!("equilibrium T: {m}")))?;
    if cfg.equilibrium.perturb_amplitude < 0.0 {
        return Err(inv("equilibrium: perturb_amplitude must be >= 0"));
    }
    Ok(())
}

/// Fully resolved configuration in the same format `parse_config` reads.
pub fn print_config(cfg: &RunConfig) -> String {
    let p = &cfg.physics;
    let m = &cfg.model;
    let n = &cfg.newton;
    let a = &cfg.adaptive;
    let e = &cfg.equilibrium;
    let o = &cfg.output;
    let mut s = String::new();
    let g = &cfg.grid;
    s += &format!(
        "[grid]\nR_min = {}\nR_max = {}\nZ_min = {}\nZ_max = {}\nNR = {}\nNZ = {}\nn_p = {}\nN_phi = {}\n\n",
        g.r_min, g.r_max, g.z_min, g.z_max, g.nr, g.nz, g.n_p, g.n_phi
    );
    s += &format!(
        "[physics]\nF0 = {}\ngamma = {}\neta0 = {}\neta_exp = {}\nnu0 = {}\nnu_exp = {}\nk_par = {}\nk_perp = {}\nhyper_psi = {}\nhyper_w = {}\nhyper_rho = {}\nhyper_p = {}\nhyper_vpar = {}\nrho_floor = {}\nT_floor = {}\n\n",
        p.f0, p.gamma, p.eta0, p.eta_exp, p.nu0, p.nu_exp, p.k_par, p.k_perp,
        p.hyper_psi, p.hyper_w, p.hyper_rho, p.hyper_p, p.hyper_vpar, p.rho_floor, p.t_floor
    );
    s += &format!(
        "[model]\nwith_vpar = {}\nneglected_terms = {}\nbc_variant = {}\nresistive_phi_term = {}\n\n",
        m.with_vpar,
        m.neglected_terms,
        match m.bc_variant {
            BcVariant::Bc => "bc",
            BcVariant::Bc2 => "bc2",
        },
        m.resistive_phi_term
    );
    s += &format!("[scheme]\ntheta = {}\nzeta = {}\n\n", cfg.scheme.theta, cfg.scheme.zeta);
    s += &format!(
        "[newton]\nmode = {}\neps_a = {}\neps_r = {}\nmax_iter = {}\ngamma_f = {}\nalpha_f = {}\neps0 = {}\nforcing_floor = {}\nforcing_ceiling = {}\ngmres_tol = {}\ngmres_restart = {}\ngmres_maxit = {}\ndivergence_window = {}\nrefactor_policy = {}\n\n",
        match n.mode {
            NewtonMode::Linearized => "linearized",
            NewtonMode::Exact => "exact",
            NewtonMode::Inexact => "inexact",
        },
        n.eps_a, n.eps_r, n.max_iter, n.gamma_f, n.alpha_f, n.eps0,
        n.forcing_floor, n.forcing_ceiling, n.gmres_tol, n.gmres_restart, n.gmres_maxit,
        n.divergence_window,
        match cfg.refactor {
            RefactorPolicyKind::EveryStep => "every-step",
            RefactorPolicyKind::OnDemand => "on-demand",
        }
    );
    s += &format!(
        "[adaptive]\ndt0 = {}\ndt_min = {}\ndt_max = {}\ngrow = {}\nshrink = {}\nfail_factor = {}\nfast_iters = {}\nslow_iters = {}\nmax_rise_per_step = {}\n\n",
        a.dt0, a.dt_min, a.dt_max, a.grow, a.shrink, a.fail_factor, a.fast_iters, a.slow_iters,
        a.max_rise_per_step
    );
    s += "[equilibrium]\n";
    match e.rhs {
        GsRhs::Manufactured { amplitude } => {
            s += &format!("kind = manufactured\namplitude = {amplitude}\n");
        }
        GsRhs::LinearProfiles { c1, c2 } => {
            s += &format!("kind = linear\nc1 = {c1}\nc2 = {c2}\n");
        }
    }
    s += &format!(
        "rho_base = {}\nrho_amp = {}\nrho_center = {}\nrho_width = {}\nt_base = {}\nt_amp = {}\nt_center = {}\nt_width = {}\nperturb_amplitude = {}\nperturb_target = {}\n\n",
        e.rho.base, e.rho.amp, e.rho.center, e.rho.width,
        e.temp.base, e.temp.amp, e.temp.center, e.temp.width,
        e.perturb_amplitude,
        match e.perturb_target {
            Var::Psi => "psi",
            Var::U => "u",
            Var::Rho => "rho",
            Var::P => "p",
            Var::Vpar => "vpar",
            _ => "u",
        }
    );
    s += &format!(
        "[output]\ncsv_path = {}\nsummary_path = {}\nrestart_path = {}\nrestart_every = {}\nseed = {}\n\n",
        o.csv_path, o.summary_path, o.restart_path, o.restart_every, o.seed
    );
    s += &format!("[run]\nsteps = {}\n", cfg.run.steps);
    if let Some(r) = &cfg.run.restart_from {
        s += &format!("restart_from = {r}\n");
    }
    s
}
