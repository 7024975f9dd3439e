//! Seeded manufactured field bundles for the verification suites.

use crate::geometry::{Grid, SpectralField};
use crate::util::SplitMix64;

/// The fields an identity can reference.  Time derivatives of the potentials
/// are independent manufactured fields: the identities are algebraic in them.
pub struct FieldBundle {
    pub psi: SpectralField,
    pub u: SpectralField,
    pub rho: SpectralField,
    pub p: SpectralField,
    pub vpar: SpectralField,
    pub psi_dot: SpectralField,
    pub u_dot: SpectralField,
    pub vpar_dot: SpectralField,
}

/// Random compact field: sum of sin(k pi Rhat) sin(m pi Zhat), k, m in 1..=3,
/// coefficients drawn from [-1, 1] and damped by mode number so the coarse
/// grids of a refinement study already resolve the field.
pub fn manufactured_field(grid: &Grid, rng: &mut SplitMix64, amp: f64) -> SpectralField {
    let pi = std::f64::consts::PI;
    let mut coefs = [[0.0; 3]; 9];
    for km in 0..9 {
        let (k, m) = (km / 3 + 1, km % 3 + 1);
        // quartic damping: the coarsest study grid must already sit in the
        // asymptotic range of the k, m <= 3 content
        let damp = (2.0 / ((k * k + m * m) as f64)).powi(3);
        for h in 0..3 {
            coefs[km][h] = amp * damp * rng.next_sym();
        }
    }
    let lr = grid.r_max - grid.r_min;
    let lz = grid.z_max - grid.z_min;
    let (rmin, zmin) = (grid.r_min, grid.z_min);
    let eval = move |h: usize, r: f64, z: f64| {
        let rh = (r - rmin) / lr;
        let zh = (z - zmin) / lz;
        let mut v = 0.0;
        for km in 0..9 {
            let (k, m) = (km / 3 + 1, km % 3 + 1);
            v += coefs[km][h] * (k as f64 * pi * rh).sin() * (m as f64 * pi * zh).sin();
        }
        v
    };
    SpectralField::from_harmonics(
        grid,
        move |r, z| eval(0, r, z),
        move |r, z| eval(1, r, z),
        move |r, z| eval(2, r, z),
    )
}

/// The full bundle from one seed.  Every field is compactly supported, as
/// the balance proof assumes (the density included: the wall condition of
/// the model sets rho to zero there).
pub fn manufactured_bundle(grid: &Grid, seed: u64) -> FieldBundle {
    let mut rng = SplitMix64::new(seed);
    let rho = manufactured_field(grid, &mut rng, 0.5);
    FieldBundle {
        psi: manufactured_field(grid, &mut rng, 1.0),
        u: manufactured_field(grid, &mut rng, 1.0),
        rho,
        p: manufactured_field(grid, &mut rng, 1.0),
        vpar: manufactured_field(grid, &mut rng, 1.0),
        psi_dot: manufactured_field(grid, &mut rng, 1.0),
        u_dot: manufactured_field(grid, &mut rng, 1.0),
        vpar_dot: manufactured_field(grid, &mut rng, 1.0),
    }
}
