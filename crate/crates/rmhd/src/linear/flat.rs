//! Packing of a state into the solver vector.
//!
//! Fixed layout: variable-major, then harmonic, then row-major (R, Z) nodes.
//! The parallel velocity is packed only when the model variant evolves it.

use crate::geometry::{Grid, SpectralField};
use crate::model::{State, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Packing {
    pub nr: usize,
    pub nz: usize,
    pub with_vpar: bool,
}

pub const PACK_VARS: [Var; 7] = [Var::Psi, Var::U, Var::J, Var::W, Var::Rho, Var::P, Var::Vpar];

impl Packing {
    pub fn new(grid: &Grid, with_vpar: bool) -> Packing {
        Packing {
            nr: grid.nr,
            nz: grid.nz,
            with_vpar,
        }
    }

    pub fn nvar(&self) -> usize {
        if self.with_vpar {
            7
        } else {
            6
        }
    }

    pub fn nodes(&self) -> usize {
        self.nr * self.nz
    }

    pub fn len(&self) -> usize {
        self.nvar() * 3 * self.nodes()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn vars(&self) -> &'static [Var] {
        &PACK_VARS[..self.nvar()]
    }

    #[inline]
    pub fn index(&self, var_idx: usize, harmonic: usize, node: usize) -> usize {
        (var_idx * 3 + harmonic) * self.nodes() + node
    }

    pub fn pack(&self, state: &State) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for &v in self.vars() {
            let f = state.field(v);
            out.extend_from_slice(&f.c0);
            out.extend_from_slice(&f.cc);
            out.extend_from_slice(&f.cs);
        }
        out
    }

    pub fn unpack(&self, v: &[f64], grid: &Grid) -> State {
        assert_eq!(v.len(), self.len());
        let n = self.nodes();
        let mut state = State::zeros(grid);
        for (vi, &var) in self.vars().iter().enumerate() {
            let base = vi * 3 * n;
            let f = SpectralField {
                c0: v[base..base + n].to_vec(),
                cc: v[base + n..base + 2 * n].to_vec(),
                cs: v[base + 2 * n..base + 3 * n].to_vec(),
            };
            *state.field_mut(var) = f;
        }
        state
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::SplitMix64;

    #[test]
    fn pack_unpack_is_bitwise_identity() {
        let g = Grid::new(1.0, 2.0, 0.0, 1.0, 5, 7, 8, 8);
        for with_vpar in [false, true] {
            let p = Packing::new(&g, with_vpar);
            let mut rng = SplitMix64::new(9);
            let x: Vec<f64> = (0..p.len()).map(|_| rng.next_sym()).collect();
            let state = p.unpack(&x, &g);
            let y = p.pack(&state);
            assert_eq!(x.len(), y.len());
            for (a, b) in x.iter().zip(&y) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn length_excludes_vpar_when_disabled() {
        let g = Grid::new(1.0, 2.0, 0.0, 1.0, 5, 7, 8, 8);
        assert_eq!(Packing::new(&g, false).len(), 6 * 3 * 35);
        assert_eq!(Packing::new(&g, true).len(), 7 * 3 * 35);
    }
}
