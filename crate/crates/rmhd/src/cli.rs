//! Command dispatch: run / verify-identities / verify-energy / gs-test /
//! print-config.

use std::fs;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use crate::config::{parse_config, print_config, RunConfig};
use crate::diagnostics::DiagnosticsCsv;
use crate::equilibrium::{build_equilibrium, manufactured_psi, solve_grad_shafranov, GsRhs};
use crate::geometry::Grid;
use crate::identities::{
    catalog, energy_group, energy_group_sum_consistency, helicity_residual, manufactured_bundle,
    refinement_study, verify_dissipation, EnergyGroupParams, StudyOutcome,
};
use crate::integrator::{run_with_hook, RunSetup};
use crate::model::ModelBc;
use crate::restart::{read_restart, write_restart};

const USAGE: &str = "\
usage: rmhd <command> [options]

commands:
  run                 advance the model per the configuration
  verify-identities   refinement study of the derivation identities
  verify-energy       energy cancellation groups and the dissipation identity
  gs-test             Grad-Shafranov manufactured-solution convergence
  print-config        print the fully resolved configuration

options:
  --config <path>      configuration file (defaults apply when omitted)
  --output-dir <path>  directory for reports and run outputs (default .)
  --levels <n>         refinement levels for the verification commands (default 3)
  --seed <u64>         manufactured-field seed (default: [output] seed)
";

/// Exit codes: 0 success, 1 usage/config error, 2 numerical failure,
/// 3 verification failure.
pub fn main_entry(args: &[String]) -> i32 {
    let mut cmd = None;
    let mut config_path: Option<String> = None;
    let mut output_dir = PathBuf::from(".");
    let mut levels = 3usize;
    let mut seed_override: Option<u64> = None;

    let mut it = args.iter();
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--config" => match it.next() {
                Some(v) => config_path = Some(v.clone()),
                None => return usage_error("--config needs a path"),
            },
            "--output-dir" => match it.next() {
                Some(v) => output_dir = PathBuf::from(v),
                None => return usage_error("--output-dir needs a path"),
            },
            "--levels" => match it.next().and_then(|v| v.parse().ok()) {
                Some(v) => levels = v,
                None => return usage_error("--levels needs an integer"),
            },
            "--seed" => match it.next().and_then(|v| v.parse().ok()) {
                Some(v) => seed_override = Some(v),
                None => return usage_error("--seed needs a u64"),
            },
            other if cmd.is_none() && !other.starts_with('-') => cmd = Some(other.to_string()),
            other => return usage_error(&format!("unexpected argument `{other}`")),
        }
    }
    let Some(cmd) = cmd else {
        return usage_error("missing command");
    };
    if levels < 3 {
        return usage_error("--levels must be at least 3");
    }

    let cfg = match load_config(config_path.as_deref()) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("{msg}");
            return 1;
        }
    };
    let seed = seed_override.unwrap_or(cfg.output.seed);

    if output_dir != Path::new(".") {
        if let Err(e) = fs::create_dir_all(&output_dir) {
            eprintln!("cannot create output dir {}: {e}", output_dir.display());
            return 1;
        }
    }

    match cmd.as_str() {
        "run" => cmd_run(&cfg, &output_dir),
        "verify-identities" => cmd_verify_identities(&cfg, &output_dir, levels, seed),
        "verify-energy" => cmd_verify_energy(&cfg, &output_dir, levels, seed),
        "gs-test" => cmd_gs_test(&cfg, levels),
        "print-config" => {
            print!("{}", print_config(&cfg));
            0
        }
        other => usage_error(&format!("unknown command `{other}`")),
    }
}

fn usage_error(msg: &str) -> i32 {
    eprintln!("error: {msg}\n{USAGE}");
    1
}

fn load_config(path: Option<&str>) -> Result<RunConfig, String> {
    match path {
        None => parse_config("").map_err(|e| e.to_string()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| format!("cannot read {p}: {e}"))?;
            parse_config(&text).map_err(|e| format!("{p}: {e}"))
        }
    }
}

fn grid_from(cfg: &RunConfig, n: usize, n_phi: usize) -> Grid {
    Grid::new(
        cfg.grid.r_min,
        cfg.grid.r_max,
        cfg.grid.z_min,
        cfg.grid.z_max,
        n,
        n,
        cfg.grid.n_p,
        n_phi,
    )
}

/// Refinement sizes: the pinned 17/33/65 ladder, continued by doubling.
fn level_sizes(levels: usize) -> Vec<usize> {
    let mut sizes = vec![17usize];
    while sizes.len() < levels {
        let last = *sizes.last().unwrap();
        sizes.push(2 * last - 1);
    }
    sizes
}

fn cmd_run(cfg: &RunConfig, output_dir: &Path) -> i32 {
    let grid = Grid::new(
        cfg.grid.r_min,
        cfg.grid.r_max,
        cfg.grid.z_min,
        cfg.grid.z_max,
        cfg.grid.nr,
        cfg.grid.nz,
        cfg.grid.n_p,
        cfg.grid.n_phi,
    );

    let eq = match build_equilibrium(&cfg.equilibrium, &cfg.model, &grid) {
        Ok(eq) => eq,
        Err(e) => {
            eprintln!("initialization failed: {e}");
            return 2;
        }
    };
    let bc = ModelBc::fixed(&cfg.model, eq.traces.clone());

    let (state0, t0, step0, dt0) = match &cfg.run.restart_from {
        None => (eq.state, 0.0, 0, cfg.adaptive.dt0),
        Some(path) => {
            let file = match fs::File::open(path) {
                Ok(f) => f,
                Err(e) => {
                    eprintln!("cannot open restart {path}: {e}");
                    return 1;
                }
            };
            match read_restart(BufReader::new(file), &grid, &cfg.model) {
                Ok((s, t, step, dt)) => (s, t, step, dt),
                Err(e) => {
                    eprintln!("{e}");
                    return 1;
                }
            }
        }
    };

    let csv_path = output_dir.join(&cfg.output.csv_path);
    let csv_file = match fs::File::create(&csv_path) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("cannot create {}: {e}", csv_path.display());
            return 1;
        }
    };
    let mut csv = DiagnosticsCsv::new(BufWriter::new(csv_file));

    let mut adaptive = cfg.adaptive.clone();
    adaptive.dt0 = dt0;
    let setup = RunSetup {
        params: &cfg.physics,
        flags: &cfg.model,
        bc: &bc,
        grid: &grid,
        scheme: cfg.scheme,
        newton: cfg.newton.clone(),
        adaptive,
        refactor: cfg.refactor,
        steps: cfg.run.steps,
    };

    let restart_every = cfg.output.restart_every;
    let restart_path = output_dir.join(&cfg.output.restart_path);
    let model = cfg.model;
    let grid_ref = &grid;
    let mut hook = move |step: usize, time: f64, dt: f64, state: &crate::model::State| {
        if restart_every > 0 && step % restart_every == 0 {
            let f = fs::File::create(&restart_path)?;
            write_restart(BufWriter::new(f), state, time, step, dt, &model, grid_ref)?;
        }
        Ok(())
    };

    let started = std::time::Instant::now();
    let result = match run_with_hook(state0, t0, step0, &setup, Some(&mut csv), Some(&mut hook)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("run failed: {e}");
            return 2;
        }
    };

    let summary = format!(
        "final_time: {}\nsteps_accepted: {}\nsteps_rejected: {}\nnewton_iters_total: {}\ngmres_iters_total: {}\nrefactorizations_total: {}\nwall_time_s: {:.3}\nfinal_energy: {}\nfinal_mass: {}\nfinal_helicity: {}\n",
        result.time,
        result.accepted,
        result.rejected,
        result.totals.newton_iters,
        result.totals.gmres_iters,
        result.totals.refactorizations,
        started.elapsed().as_secs_f64(),
        result.energies.last().map(|e| e.e_total).unwrap_or(0.0),
        result.energies.last().map(|e| e.mass).unwrap_or(0.0),
        result.energies.last().map(|e| e.helicity).unwrap_or(0.0),
    );
    print!("{summary}");
    let summary_path = output_dir.join(&cfg.output.summary_path);
    if let Err(e) = fs::write(&summary_path, summary) {
        eprintln!("cannot write {}: {e}", summary_path.display());
        return 2;
    }
    0
}

fn cmd_verify_identities(cfg: &RunConfig, output_dir: &Path, levels: usize, seed: u64) -> i32 {
    let sizes = level_sizes(levels);
    // The recipes form band-4 products in phi; 16 collocation angles keep
    // every projection exact during verification.
    let n_phi = cfg.grid.n_phi.max(16);
    let f0 = cfg.physics.f0;
    let mut all_pass = true;
    let mut csv = String::from("id,n,h,residual,order,outcome\n");
    println!("identity refinement study (sizes {sizes:?}, seed {seed})");
    println!("{:<9} {:>10} {:>12} {:>8}  outcome", "id", "h", "residual", "order");
    for record in catalog() {
        let study = refinement_study(record.id, &sizes, seed, f0, |n| grid_from(cfg, n, n_phi));
        let pass = matches!(study.outcome, StudyOutcome::Pass | StudyOutcome::Exact);
        all_pass &= pass;
        for row in &study.rows {
            println!(
                "{:<9} {:>10.4e} {:>12.4e} {:>8}  {}",
                study.id,
                row.h,
                row.residual,
                row.order.map(|o| format!("{o:.2}")).unwrap_or_else(|| "-".into()),
                if pass { "pass" } else { "FAIL" },
            );
            csv += &format!(
                "{},{},{},{},{},{:?}\n",
                study.id,
                row.n,
                row.h,
                row.residual,
                row.order.map(|o| format!("{o}")).unwrap_or_default(),
                study.outcome
            );
        }
    }
    let path = output_dir.join("identities.csv");
    if let Err(e) = fs::write(&path, csv) {
        eprintln!("cannot write {}: {e}", path.display());
        return 2;
    }
    println!("report: {}", path.display());
    if all_pass {
        println!("identity suite: PASS");
        0
    } else {
        println!("identity suite: FAIL");
        3
    }
}

fn cmd_verify_energy(cfg: &RunConfig, output_dir: &Path, levels: usize, seed: u64) -> i32 {
    let sizes = level_sizes(levels);
    let n_phi = cfg.grid.n_phi.max(16);
    let pr = EnergyGroupParams {
        f0: cfg.physics.f0,
        gamma: cfg.physics.gamma,
        eta: 1e-3,
        nu: 2e-3,
    };
    let mut all_pass = true;
    let mut csv = String::from("group,n,h,value,order,pass\n");
    println!("energy-group refinement study (sizes {sizes:?}, seed {seed})");

    for grp in 1..=18u8 {
        if grp == 4 {
            continue;
        }
        let mut vals = Vec::new();
        let mut hs = Vec::new();
        for &n in &sizes {
            let g = grid_from(cfg, n, n_phi);
            let b = manufactured_bundle(&g, seed);
            vals.push(energy_group(grp, &b, pr, &g).abs());
            hs.push(g.hr.max(g.hz));
        }
        let exact = vals.iter().all(|v| *v < 1e-12);
        let mut min_order = f64::INFINITY;
        for k in 0..vals.len() - 1 {
            let p = (vals[k] / vals[k + 1]).ln() / (hs[k] / hs[k + 1]).ln();
            min_order = min_order.min(p);
        }
        let pass = exact || min_order >= 1.8;
        all_pass &= pass;
        println!(
            "E{grp:<3} residuals {:?}  {}",
            vals.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>(),
            if exact {
                "exact".to_string()
            } else {
                format!("min order {min_order:.2} {}", if pass { "pass" } else { "FAIL" })
            }
        );
        for (k, &n) in sizes.iter().enumerate() {
            csv += &format!("E{grp},{n},{},{},,{}\n", hs[k], vals[k], pass);
        }
    }

    // dissipation group: ratio at the finest level
    {
        let g = grid_from(cfg, *sizes.last().unwrap(), n_phi);
        let b = manufactured_bundle(&g, seed);
        let (lhs, rhs) = verify_dissipation(&b, pr, &g);
        let ratio = lhs / rhs;
        let pass = (0.95..=1.05).contains(&ratio);
        all_pass &= pass;
        println!("E4  dissipation lhs {lhs:.6e} rhs {rhs:.6e} ratio {ratio:.4} {}",
            if pass { "pass" } else { "FAIL" });
        csv += &format!("E4,{},{},{ratio},,{}\n", sizes.last().unwrap(), g.hr, pass);
    }

    // helicity balance through the ideal flux equation
    {
        let mut ok = true;
        let mut last_res = 0.0;
        for &n in &sizes {
            let g = grid_from(cfg, n, n_phi);
            let b = manufactured_bundle(&g, seed);
            last_res = helicity_residual(&b, pr.f0, &g).abs();
            ok &= last_res < 1e-10;
        }
        all_pass &= ok;
        println!("helicity residual {last_res:.3e} {}", if ok { "pass" } else { "FAIL" });
    }

    // grouping consistency at the coarsest level
    {
        let g = grid_from(cfg, sizes[0], n_phi);
        let b = manufactured_bundle(&g, seed);
        let (grouped, direct) = energy_group_sum_consistency(&b, pr, &g);
        let diff = (grouped - direct).abs();
        let pass = diff <= 1e-9 * direct.abs().max(1.0);
        all_pass &= pass;
        println!(
            "group sum {grouped:.8e} vs direct dE/dt {direct:.8e} (diff {diff:.2e}) {}",
            if pass { "pass" } else { "FAIL" }
        );
    }

    let path = output_dir.join("energy.csv");
    if let Err(e) = fs::write(&path, csv) {
        eprintln!("cannot write {}: {e}", path.display());
        return 2;
    }
    println!("report: {}", path.display());
    if all_pass {
        println!("energy suite: PASS");
        0
    } else {
        println!("energy suite: FAIL");
        3
    }
}

fn cmd_gs_test(cfg: &RunConfig, levels: usize) -> i32 {
    let sizes = level_sizes(levels);
    let mut errs = Vec::new();
    let mut hs = Vec::new();
    println!("Grad-Shafranov manufactured-solution study (sizes {sizes:?})");
    for &n in &sizes {
        let g = grid_from(cfg, n, cfg.grid.n_phi);
        let psi = match solve_grad_shafranov(GsRhs::Manufactured { amplitude: 1.0 }, &g) {
            Ok(p) => p,
            Err(e) => {
                eprintln!("{e}");
                return 2;
            }
        };
        let mut err: f64 = 0.0;
        for i in 0..g.nr {
            for j in 0..g.nz {
                let want = manufactured_psi(&g, 1.0, g.r(i as isize), g.z(j as isize));
                err = err.max((psi.c0[g.idx(i, j)] - want).abs());
            }
        }
        println!("n={n:<4} h={:<12.4e} Linf error = {err:.6e}", g.hr.max(g.hz));
        errs.push(err);
        hs.push(g.hr.max(g.hz));
    }
    let mut ok = true;
    for k in 0..errs.len() - 1 {
        let p = (errs[k] / errs[k + 1]).ln() / (hs[k] / hs[k + 1]).ln();
        println!("observed order {p:.3}");
        ok &= (p - 2.0).abs() <= 0.2;
    }
    if ok {
        println!("gs-test: PASS");
        0
    } else {
        println!("gs-test: FAIL");
        3
    }
}
