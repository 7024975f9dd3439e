//! Text restart files: diff-able, full round-trip precision.
//!
//! Format:
//!   line 1: `RMHD-RESTART v1`
//!   line 2: `NR NZ n_p with_vpar`
//!   line 3: `time step dt`
//!   then per field in order (psi, u, j, w, rho, p[, vpar]) and per harmonic
//!   (c0, cc, cs), whitespace-separated decimal floats (shortest strings
//!   that round-trip bit-exactly).

use std::io::{BufRead, Write};

use crate::geometry::Grid;
use crate::model::{ModelFlags, State, Var};

const MAGIC: &str = "RMHD-RESTART v1";

const FIELD_ORDER: [Var; 7] = [Var::Psi, Var::U, Var::J, Var::W, Var::Rho, Var::P, Var::Vpar];

#[derive(Debug, PartialEq)]
pub enum RestartError {
    Magic(String),
    Dimensions(String),
    Malformed(String),
    Io(String),
}

impl std::fmt::Display for RestartError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RestartError::Magic(m) => write!(f, "bad restart header: {m}"),
            RestartError::Dimensions(m) => write!(f, "restart dimension mismatch: {m}"),
            RestartError::Malformed(m) => write!(f, "malformed restart payload: {m}"),
            RestartError::Io(m) => write!(f, "restart I/O: {m}"),
        }
    }
}

impl std::error::Error for RestartError {}

fn fields(flags: &ModelFlags) -> &'static [Var] {
    if flags.with_vpar {
        &FIELD_ORDER
    } else {
        &FIELD_ORDER[..6]
    }
}

pub fn write_restart<W: Write>(
    mut sink: W,
    state: &State,
    time: f64,
    step: usize,
    dt: f64,
    flags: &ModelFlags,
    grid: &Grid,
) -> std::io::Result<()> {
    writeln!(sink, "{MAGIC}")?;
    writeln!(
        sink,
        "{} {} {} {}",
        grid.nr,
        grid.nz,
        grid.n_p,
        if flags.with_vpar { 1 } else { 0 }
    )?;
    writeln!(sink, "{} {} {}", time, step, dt)?;
    for &v in fields(flags) {
        let f = state.field(v);
        for comp in [&f.c0, &f.cc, &f.cs] {
            let mut line = String::new();
            for (i, x) in comp.iter().enumerate() {
                if i > 0 {
                    if i % 8 == 0 {
                        line.push('\n');
                    } else {
                        line.push(' ');
                    }
                }
                line += &format!("{x}");
            }
            writeln!(sink, "{line}")?;
        }
    }
    sink.flush()
}

pub fn read_restart<R: BufRead>(
    source: R,
    grid: &Grid,
    flags: &ModelFlags,
) -> Result<(State, f64, usize, f64), RestartError> {
    let mut lines = source.lines();
    let magic = lines
        .next()
        .ok_or_else(|| RestartError::Malformed("empty file".into()))?
        .map_err(|e| RestartError::Io(e.to_string()))?;
    if magic.trim() != MAGIC {
        return Err(RestartError::Magic(magic));
    }
    let dims = lines
        .next()
        .ok_or_else(|| RestartError::Malformed("missing dimension line".into()))?
        .map_err(|e| RestartError::Io(e.to_string()))?;
    let parts: Vec<&str> = dims.split_whitespace().collect();
    if parts.len() != 4 {
        return Err(RestartError::Malformed(format!("dimension line `{dims}`")));
    }
    let nr: usize = parts[0].parse().map_err(|_| RestartError::Malformed(dims.clone()))?;
    let nz: usize = parts[1].parse().map_err(|_| RestartError::Malformed(dims.clone()))?;
    let n_p: u32 = parts[2].parse().map_err(|_| RestartError::Malformed(dims.clone()))?;
    let with_vpar = match parts[3] {
        "0" => false,
        "1" => true,
        other => return Err(RestartError::Malformed(format!("with_vpar must be 0/1, got {other}"))),
    };
    if nr != grid.nr || nz != grid.nz || n_p != grid.n_p {
        return Err(RestartError::Dimensions(format!(
            "file has {nr}x{nz} n_p={n_p}, run expects {}x{} n_p={}",
            grid.nr, grid.nz, grid.n_p
        )));
    }
    if with_vpar != flags.with_vpar {
        return Err(RestartError::Dimensions(
            "file and run disagree on with_vpar".into(),
        ));
    }

    let meta = lines
        .next()
        .ok_or_else(|| RestartError::Malformed("missing time/step line".into()))?
        .map_err(|e| RestartError::Io(e.to_string()))?;
    let parts: Vec<&str> = meta.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(RestartError::Malformed(format!("time/step line `{meta}`")));
    }
    let time: f64 = parts[0].parse().map_err(|_| RestartError::Malformed(meta.clone()))?;
    let step: usize = parts[1].parse().map_err(|_| RestartError::Malformed(meta.clone()))?;
    let dt: f64 = parts[2].parse().map_err(|_| RestartError::Malformed(meta.clone()))?;

    // token stream over the remaining lines
    let mut values: Vec<f64> = Vec::with_capacity(grid.n() * 3 * fields(flags).len());
    for line in lines {
        let line = line.map_err(|e| RestartError::Io(e.to_string()))?;
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| RestartError::Malformed(format!("bad float `{tok}`")))?;
            values.push(v);
        }
    }
    let need = grid.n() * 3 * fields(flags).len();
    if values.len() != need {
        return Err(RestartError::Malformed(format!(
            "expected {need} values, found {}",
            values.len()
        )));
    }
    let mut state = State::zeros(grid);
    let mut it = values.into_iter();
    for &v in fields(flags) {
        let f = state.field_mut(v);
        for comp in [&mut f.c0, &mut f.cc, &mut f.cs] {
            for slot in comp.iter_mut() {
                *slot = it.next().unwrap();
            }
        }
    }
    Ok((state, time, step, dt))
}
