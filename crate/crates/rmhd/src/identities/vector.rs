//! Three-component vector fields on collocation slices with the cylindrical
//! curl, divergence, and advection used by the projection-side recipes.

use crate::geometry::padded::{ddr, ddz, Padded};
use crate::geometry::{d_phi_slices, Grid};

pub type Stack = Vec<Padded>;

pub fn s_mul(a: &[Padded], b: &[Padded]) -> Stack {
    a.iter().zip(b).map(|(x, y)| x.mul(y)).collect()
}

pub fn s_add(a: &[Padded], b: &[Padded]) -> Stack {
    a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
}

pub fn s_sub(a: &[Padded], b: &[Padded]) -> Stack {
    a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
}

pub fn s_scale(a: &[Padded], s: f64) -> Stack {
    a.iter().map(|x| x.scale(s)).collect()
}

/// Multiply every slice by the same coordinate-space weight.
pub fn s_wmul(a: &[Padded], w: &Padded) -> Stack {
    a.iter().map(|x| x.mul(w)).collect()
}

pub fn s_ddr(a: &[Padded], g: &Grid) -> Stack {
    a.iter().map(|x| ddr(x, g)).collect()
}

pub fn s_ddz(a: &[Padded], g: &Grid) -> Stack {
    a.iter().map(|x| ddz(x, g)).collect()
}

/// Vector field in the (e_R, e_phi, e_Z) basis, one padded slice per angle.
pub struct V3 {
    pub r: Stack,
    pub phi: Stack,
    pub z: Stack,
}

impl V3 {
    pub fn add(&self, o: &V3) -> V3 {
        V3 {
            r: s_add(&self.r, &o.r),
            phi: s_add(&self.phi, &o.phi),
            z: s_add(&self.z, &o.z),
        }
    }

    /// Scale componentwise by a scalar stack.
    pub fn scale_stack(&self, s: &[Padded]) -> V3 {
        V3 {
            r: s_mul(&self.r, s),
            phi: s_mul(&self.phi, s),
            z: s_mul(&self.z, s),
        }
    }

    pub fn scale_weight(&self, w: &Padded) -> V3 {
        V3 {
            r: s_wmul(&self.r, w),
            phi: s_wmul(&self.phi, w),
            z: s_wmul(&self.z, w),
        }
    }

    pub fn dot(&self, o: &V3) -> Stack {
        let mut out = s_mul(&self.r, &o.r);
        out = s_add(&out, &s_mul(&self.phi, &o.phi));
        s_add(&out, &s_mul(&self.z, &o.z))
    }

    /// Cylindrical curl in the left-handed (e_R, e_phi, e_Z) basis the model
    /// is derived in:
    /// ( dZ(f_phi) - d_phi(f_Z)/R,
    ///   dR(f_Z) - dZ(f_R),
    ///   (1/R)(d_phi(f_R) - dR(R f_phi)) ).
    /// This is the orientation every derived identity (current, projections,
    /// energy groups) is consistent with.
    pub fn curl(&self, g: &Grid) -> V3 {
        let inv_r = Padded::from_fn(g, |r, _| 1.0 / r);
        let rr = Padded::from_fn(g, |r, _| r);
        let dphi_z = d_phi_slices(&self.z, g);
        let dphi_r = d_phi_slices(&self.r, g);
        let r = s_sub(&s_ddz(&self.phi, g), &s_wmul(&dphi_z, &inv_r));
        let phi = s_sub(&s_ddr(&self.z, g), &s_ddz(&self.r, g));
        let rfphi = s_wmul(&self.phi, &rr);
        let z = s_wmul(&s_sub(&dphi_r, &s_ddr(&rfphi, g)), &inv_r);
        V3 { r, phi, z }
    }

    /// Cylindrical divergence (1/R) dR(R f_R) + (1/R) d_phi f_phi + dZ f_Z.
    pub fn div(&self, g: &Grid) -> Stack {
        let inv_r = Padded::from_fn(g, |r, _| 1.0 / r);
        let rr = Padded::from_fn(g, |r, _| r);
        let rfr = s_wmul(&self.r, &rr);
        let dphi_phi = d_phi_slices(&self.phi, g);
        let mut out = s_wmul(&s_ddr(&rfr, g), &inv_r);
        out = s_add(&out, &s_wmul(&dphi_phi, &inv_r));
        s_add(&out, &s_ddz(&self.z, g))
    }

    /// Covariant advection (self . grad) w with the cylindrical curvature
    /// couplings between the R and phi components.
    pub fn advect(&self, w: &V3, g: &Grid) -> V3 {
        let inv_r = Padded::from_fn(g, |r, _| 1.0 / r);
        let conv = |s: &Stack| -> Stack {
            let dphi_s = d_phi_slices(s, g);
            let mut out = s_mul(&self.r, &s_ddr(s, g));
            out = s_add(&out, &s_mul(&self.phi, &s_wmul(&dphi_s, &inv_r)));
            s_add(&out, &s_mul(&self.z, &s_ddz(s, g)))
        };
        let curv = s_wmul(&s_mul(&self.phi, &w.phi), &inv_r);
        let r = s_sub(&conv(&w.r), &curv);
        let curv2 = s_wmul(&s_mul(&self.phi, &w.r), &inv_r);
        let phi = s_add(&conv(&w.phi), &curv2);
        let z = conv(&w.z);
        V3 { r, phi, z }
    }
}

/// Full cylindrical gradient of a scalar stack.
pub fn grad(f: &[Padded], g: &Grid) -> V3 {
    let inv_r = Padded::from_fn(g, |r, _| 1.0 / r);
    let dphi_f = d_phi_slices(f, g);
    V3 {
        r: s_ddr(f, g),
        phi: s_wmul(&dphi_f, &inv_r),
        z: s_ddz(f, g),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{apply_boundary, FieldBc, SpectralField};

    #[test]
    fn curl_of_gradient_vanishes_under_refinement() {
        // curl(grad f) involves mixed closures; exactness holds on centered
        // regions and O(h^2) globally.
        let mut errs = Vec::new();
        for &n in &[15usize, 31] {
            let g = Grid::new(1.0, 2.0, 0.0, 1.0, n, n, 8, 8);
            let pi = std::f64::consts::PI;
            let f = SpectralField::from_harmonics(
                &g,
                |r, z| (pi * (r - 1.0)).sin() * (pi * z).sin(),
                |r, z| (2.0 * pi * (r - 1.0)).sin() * (pi * z).sin(),
                |r, z| (pi * (r - 1.0)).sin() * (2.0 * pi * z).sin(),
            );
            let fs = apply_boundary(&f, FieldBc::Zero, &g).slices(&g);
            let gr = grad(&fs, &g);
            let c = gr.curl(&g);
            let mut m: f64 = 0.0;
            for s in c.r.iter().chain(&c.phi).chain(&c.z) {
                for i in 0..g.nr {
                    for j in 0..g.nz {
                        m = m.max(s.at(i as isize, j as isize).abs());
                    }
                }
            }
            errs.push(m);
        }
        // mixed second differences commute on the shared padded data, so
        // these are rounding-level, not truncation-level
        assert!(errs.iter().all(|&e| e < 1e-10), "{errs:?}");
    }

    #[test]
    fn div_of_curl_vanishes_under_refinement() {
        let mut errs = Vec::new();
        for &n in &[15usize, 31] {
            let g = Grid::new(1.0, 2.0, 0.0, 1.0, n, n, 8, 8);
            let pi = std::f64::consts::PI;
            let mk = |k: f64| {
                SpectralField::from_harmonics(
                    &g,
                    move |r, z| (k * pi * (r - 1.0)).sin() * (pi * z).sin(),
                    move |r, z| (pi * (r - 1.0)).sin() * (k * pi * z).sin(),
                    move |r, z| (k * pi * (r - 1.0)).sin() * (k * pi * z).sin(),
                )
            };
            let v = V3 {
                r: apply_boundary(&mk(1.0), FieldBc::Zero, &g).slices(&g),
                phi: apply_boundary(&mk(2.0), FieldBc::Zero, &g).slices(&g),
                z: apply_boundary(&mk(3.0), FieldBc::Zero, &g).slices(&g),
            };
            let d = v.curl(&g).div(&g);
            let mut m: f64 = 0.0;
            for s in &d {
                for i in 0..g.nr {
                    for j in 0..g.nz {
                        m = m.max(s.at(i as isize, j as isize).abs());
                    }
                }
            }
            errs.push(m);
        }
        assert!(errs.iter().all(|&e| e < 1e-10), "{errs:?}");
    }
}
