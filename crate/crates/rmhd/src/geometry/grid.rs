//! Structured cylindrical grid.
//!
//! The 2D grid covers the rectangle [R_min, R_max] x [Z_min, Z_max] with
//! uniform spacing and stores only interior nodes; boundary values are
//! supplied by the active boundary rule.  The toroidal direction keeps the
//! harmonics {1, cos(n_p phi), sin(n_p phi)} and `n_phi` collocation angles
//! over one fundamental period for pseudo-spectral products.

/// Grid descriptor shared by all field operations.
#[derive(Debug, Clone)]
pub struct Grid {
    pub r_min: f64,
    pub r_max: f64,
    pub z_min: f64,
    pub z_max: f64,
    /// Interior node counts.
    pub nr: usize,
    pub nz: usize,
    /// Toroidal periodicity of the retained harmonic pair.
    pub n_p: u32,
    /// Collocation angle count (>= 8 de-aliases cubic products).
    pub n_phi: usize,
    pub hr: f64,
    pub hz: f64,
    cos_tab: Vec<f64>,
    sin_tab: Vec<f64>,
    /// Spectral d/dphi matrix on the collocation angles (row-major n_phi x n_phi).
    dphi_mat: Vec<f64>,
}

impl Grid {
    pub fn new(
        r_min: f64,
        r_max: f64,
        z_min: f64,
        z_max: f64,
        nr: usize,
        nz: usize,
        n_p: u32,
        n_phi: usize,
    ) -> Grid {
        assert!(r_min > 0.0, "R_min must be positive (cylindrical axis excluded)");
        assert!(r_max > r_min && z_max > z_min, "degenerate domain");
        assert!(nr >= 3 && nz >= 3, "need at least 3 interior nodes per direction");
        assert!(n_p >= 1, "toroidal periodicity must be a positive integer");
        assert!(n_phi >= 8, "need at least 8 collocation angles to de-alias cubic products");

        let hr = (r_max - r_min) / (nr as f64 + 1.0);
        let hz = (z_max - z_min) / (nz as f64 + 1.0);

        let mut cos_tab = Vec::with_capacity(n_phi);
        let mut sin_tab = Vec::with_capacity(n_phi);
        for k in 0..n_phi {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n_phi as f64;
            cos_tab.push(theta.cos());
            sin_tab.push(theta.sin());
        }

        // Trigonometric interpolation derivative: for band-limited samples
        // f_k the physical derivative is d/dphi = n_p d/dtheta, realized as
        // D[k][j] = n_p (2/N) sum_{m=1}^{N/2-1} m sin(m (theta_j - theta_k)).
        let n = n_phi;
        let mut dphi_mat = vec![0.0; n * n];
        for k in 0..n {
            for j in 0..n {
                let dth = 2.0 * std::f64::consts::PI * (j as f64 - k as f64) / n as f64;
                let mut s = 0.0;
                for m in 1..n / 2 {
                    s += m as f64 * (m as f64 * dth).sin();
                }
                dphi_mat[k * n + j] = n_p as f64 * 2.0 / n as f64 * s;
            }
        }

        Grid {
            r_min,
            r_max,
            z_min,
            z_max,
            nr,
            nz,
            n_p,
            n_phi,
            hr,
            hz,
            cos_tab,
            sin_tab,
            dphi_mat,
        }
    }

    /// Number of interior nodes.
    pub fn n(&self) -> usize {
        self.nr * self.nz
    }

    /// Row-major interior index.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.nz + j
    }

    /// R coordinate; i = -1 and i = nr address the boundary.
    #[inline]
    pub fn r(&self, i: isize) -> f64 {
        self.r_min + (i + 1) as f64 * self.hr
    }

    /// Z coordinate; j = -1 and j = nz address the boundary.
    #[inline]
    pub fn z(&self, j: isize) -> f64 {
        self.z_min + (j + 1) as f64 * self.hz
    }

    /// R at the staggered node i+1/2 (i from -1 to nr-1 covers all faces).
    #[inline]
    pub fn r_half(&self, i: isize) -> f64 {
        self.r_min + ((i + 1) as f64 + 0.5) * self.hr
    }

    /// Normalized coordinates in [0, 1] over the closed domain.
    #[inline]
    pub fn r_hat(&self, i: isize) -> f64 {
        (self.r(i) - self.r_min) / (self.r_max - self.r_min)
    }

    #[inline]
    pub fn z_hat(&self, j: isize) -> f64 {
        (self.z(j) - self.z_min) / (self.z_max - self.z_min)
    }

    #[inline]
    pub fn cos_theta(&self, k: usize) -> f64 {
        self.cos_tab[k]
    }

    #[inline]
    pub fn sin_theta(&self, k: usize) -> f64 {
        self.sin_tab[k]
    }

    #[inline]
    pub fn dphi_weight(&self, k: usize, j: usize) -> f64 {
        self.dphi_mat[k * self.n_phi + j]
    }

    /// Collocation angle k as a physical toroidal angle (one fundamental period).
    pub fn phi(&self, k: usize) -> f64 {
        2.0 * std::f64::consts::PI * k as f64 / (self.n_phi as f64 * self.n_p as f64)
    }
}
