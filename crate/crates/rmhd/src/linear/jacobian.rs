//! Finite-difference Jacobian-vector products and the per-Fourier-mode
//! block preconditioner.
//!
//! The outer Krylov operator stays matrix-free; the preconditioner assembles
//! the same-harmonic diagonal blocks of the Jacobian by finite-difference
//! probes (grouped by a stencil-distance coloring), discards cross-harmonic
//! coupling, and LU-factorizes each block.

use crate::util::norm2;

use super::band::BandMatrix;
use super::flat::Packing;

#[derive(Debug, Clone, PartialEq)]
pub enum LinearError {
    NonFiniteResidual,
    SingularBlock { block: usize, column: usize },
}

impl std::fmt::Display for LinearError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LinearError::NonFiniteResidual => write!(f, "residual evaluation returned non-finite values"),
            LinearError::SingularBlock { block, column } => {
                write!(f, "singular preconditioner block {block} (zero pivot in column {column})")
            }
        }
    }
}

impl std::error::Error for LinearError {}

/// Directional finite-difference realization of J_G v = (G(U + eps v) - G(U)) / eps
/// with eps = sqrt(machine epsilon) (1 + ||U||) / ||v||.
pub fn jacobian_vector_product(
    g_eval: &mut dyn FnMut(&[f64], &mut [f64]),
    g0: &[f64],
    u: &[f64],
    v: &[f64],
    out: &mut [f64],
) -> Result<(), LinearError> {
    let vnorm = norm2(v);
    if vnorm == 0.0 {
        out.iter_mut().for_each(|x| *x = 0.0);
        return Ok(());
    }
    let eps = f64::EPSILON.sqrt() * (1.0 + norm2(u)) / vnorm;
    let pert: Vec<f64> = u.iter().zip(v).map(|(ui, vi)| ui + eps * vi).collect();
    g_eval(&pert, out);
    let mut finite = true;
    for (o, g) in out.iter_mut().zip(g0) {
        *o = (*o - g) / eps;
        finite &= o.is_finite();
    }
    if !finite {
        return Err(LinearError::NonFiniteResidual);
    }
    Ok(())
}

/// One Jacobian diagonal block: a lattice of nodes with `per_node` unknowns,
/// ordered node-major.  Couplings reach at most [`STENCIL_REACH`] nodes.
#[derive(Debug, Clone)]
pub struct BlockSpec {
    pub name: String,
    nr: usize,
    nz: usize,
    per_node: usize,
    /// local index -> global solver index
    pub global: Vec<usize>,
}

/// Chebyshev node distance any model term can couple across (two chained
/// first differences).
pub const STENCIL_REACH: usize = 2;

/// Probe color stride; two probed nodes of one color never influence the
/// same row.
const COLOR_STRIDE: usize = 2 * STENCIL_REACH + 1;

impl BlockSpec {
    pub fn len(&self) -> usize {
        self.nr * self.nz * self.per_node
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn local(&self, i: usize, j: usize, c: usize) -> usize {
        (i * self.nz + j) * self.per_node + c
    }

    /// Band widths covering every possible in-block coupling.
    pub fn bandwidth(&self) -> usize {
        (STENCIL_REACH * self.nz + STENCIL_REACH + 1) * self.per_node - 1
    }

    fn groups(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for ci in 0..COLOR_STRIDE.min(self.nr) {
            for cj in 0..COLOR_STRIDE.min(self.nz) {
                for c in 0..self.per_node {
                    let mut grp = Vec::new();
                    let mut i = ci;
                    while i < self.nr {
                        let mut j = cj;
                        while j < self.nz {
                            grp.push(self.local(i, j, c));
                            j += COLOR_STRIDE;
                        }
                        i += COLOR_STRIDE;
                    }
                    if !grp.is_empty() {
                        out.push(grp);
                    }
                }
            }
        }
        out
    }

    fn node_of(&self, local: usize) -> (usize, usize) {
        let node = local / self.per_node;
        (node / self.nz, node % self.nz)
    }

    fn rows_near(&self, i: usize, j: usize) -> Vec<usize> {
        let mut rows = Vec::new();
        let ilo = i.saturating_sub(STENCIL_REACH);
        let ihi = (i + STENCIL_REACH).min(self.nr - 1);
        let jlo = j.saturating_sub(STENCIL_REACH);
        let jhi = (j + STENCIL_REACH).min(self.nz - 1);
        for ii in ilo..=ihi {
            for jj in jlo..=jhi {
                for c in 0..self.per_node {
                    rows.push(self.local(ii, jj, c));
                }
            }
        }
        rows
    }

    /// One dense block over `global` (test fixtures and small systems).
    pub fn dense(name: &str, global: Vec<usize>) -> BlockSpec {
        BlockSpec {
            name: name.to_string(),
            nr: 1,
            nz: 1,
            per_node: global.len(),
            global,
        }
    }
}

/// The paper's preconditioner structure: one block for the n = 0 harmonic
/// and one coupled block for the (cos, sin) pair.
pub fn harmonic_blocks(packing: &Packing) -> Vec<BlockSpec> {
    let nvar = packing.nvar();
    let nodes = packing.nodes();
    let mut b0 = Vec::with_capacity(nodes * nvar);
    for i in 0..packing.nr {
        for j in 0..packing.nz {
            let node = i * packing.nz + j;
            for v in 0..nvar {
                b0.push(packing.index(v, 0, node));
            }
        }
    }
    let mut b1 = Vec::with_capacity(nodes * 2 * nvar);
    for i in 0..packing.nr {
        for j in 0..packing.nz {
            let node = i * packing.nz + j;
            for h in 1..=2 {
                for v in 0..nvar {
                    b1.push(packing.index(v, h, node));
                }
            }
        }
    }
    vec![
        BlockSpec {
            name: "n0".to_string(),
            nr: packing.nr,
            nz: packing.nz,
            per_node: nvar,
            global: b0,
        },
        BlockSpec {
            name: "cos-sin".to_string(),
            nr: packing.nr,
            nz: packing.nz,
            per_node: 2 * nvar,
            global: b1,
        },
    ]
}

/// LU-factorized diagonal blocks of the Jacobian.
#[derive(Debug)]
pub struct BlockPreconditioner {
    blocks: Vec<(BlockSpec, BandMatrix)>,
    /// Newton/step index of the last factorization.
    pub stamp: u64,
}

impl BlockPreconditioner {
    /// Exact per-block solve M y = x.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (spec, lu) in &self.blocks {
            let mut rhs: Vec<f64> = spec.global.iter().map(|&gidx| x[gidx]).collect();
            lu.solve(&mut rhs);
            for (&gidx, &v) in spec.global.iter().zip(&rhs) {
                y[gidx] = v;
            }
        }
    }

    pub fn block_names(&self) -> Vec<&str> {
        self.blocks.iter().map(|(s, _)| s.name.as_str()).collect()
    }
}

/// Assemble and factorize the same-harmonic Jacobian blocks of G around U by
/// finite-difference probes of the residual r = b - G (so J columns are
/// -(r(U + eps e) - r(U)) / eps), restricted to each block's unknowns.
pub fn assemble_block_jacobian(
    residual: &mut dyn FnMut(&[f64], &mut [f64]),
    u: &[f64],
    r0: &[f64],
    blocks: &[BlockSpec],
    stamp: u64,
) -> Result<BlockPreconditioner, LinearError> {
    let eps = f64::EPSILON.sqrt() * (1.0 + norm2(u));
    let mut pert = u.to_vec();
    let mut r1 = vec![0.0; u.len()];
    let mut out = Vec::with_capacity(blocks.len());
    for (bi, spec) in blocks.iter().enumerate() {
        let bw = spec.bandwidth();
        let mut m = BandMatrix::new(spec.len(), bw, bw);
        for group in spec.groups() {
            for &nu in &group {
                pert[spec.global[nu]] += eps;
            }
            residual(&pert, &mut r1);
            if r1.iter().any(|v| !v.is_finite()) {
                return Err(LinearError::NonFiniteResidual);
            }
            for &nu in &group {
                let (i, j) = spec.node_of(nu);
                for mu in spec.rows_near(i, j) {
                    let v = -(r1[spec.global[mu]] - r0[spec.global[mu]]) / eps;
                    if v != 0.0 {
                        m.set(mu, nu, v);
                    }
                }
                pert[spec.global[nu]] = u[spec.global[nu]];
            }
        }
        m.factor().map_err(|column| LinearError::SingularBlock { block: bi, column })?;
        out.push((spec.clone(), m));
    }
    Ok(BlockPreconditioner {
        blocks: out,
        stamp,
    })
}

/// Refactorization threshold on the two-step GMRES window.
pub const REFACTOR_GMRES_THRESHOLD: usize = 50;

/// True when the GMRES iterations of the (up to) two most recent Newton
/// steps exceed the threshold, or when no factorization exists yet.
pub fn refactor_policy(window: &[usize], has_factorization: bool) -> bool {
    if !has_factorization {
        return true;
    }
    window.iter().rev().take(2).sum::<usize>() > REFACTOR_GMRES_THRESHOLD
}
