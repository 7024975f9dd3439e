//! Banded LU factorization with partial pivoting (LAPACK band layout).

/// General banded matrix with kl subdiagonals and ku superdiagonals, stored
/// column-major with kl extra rows for pivoting fill.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    ldab: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
    factored: bool,
}

impl BandMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> BandMatrix {
        let kl = kl.min(n.saturating_sub(1));
        let ku = ku.min(n.saturating_sub(1));
        let ldab = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            ldab,
            ab: vec![0.0; ldab * n],
            ipiv: vec![0; n],
            factored: false,
        }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(i + self.ku >= j && j + self.kl >= i, "({i},{j}) outside band");
        j * self.ldab + (self.kl + self.ku + i) - j
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(!self.factored);
        let s = self.slot(i, j);
        self.ab[s] = v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i + self.ku < j || j + self.kl < i {
            return 0.0;
        }
        self.ab[self.slot(i, j)]
    }

    /// In-band matrix-vector product (valid before factorization only).
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert!(!self.factored);
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for i in lo..=hi {
                y[i] += self.ab[self.slot(i, j)] * x[j];
            }
        }
        y
    }

    /// LU factorization with partial pivoting; returns the first column with
    /// an exactly zero pivot on failure.
    pub fn factor(&mut self) -> Result<(), usize> {
        assert!(!self.factored);
        let (n, kl, ku, ldab) = (self.n, self.kl, self.ku, self.ldab);
        let kv = kl + ku;
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            // pivot search in column j, rows j..=j+km
            let col = j * ldab;
            let mut jp = 0usize;
            let mut amax = self.ab[col + kv].abs();
            for t in 1..=km {
                let a = self.ab[col + kv + t].abs();
                if a > amax {
                    amax = a;
                    jp = t;
                }
            }
            self.ipiv[j] = j + jp;
            if amax == 0.0 {
                return Err(j);
            }
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    let i0 = c * ldab + kv + j - c;
                    let i1 = c * ldab + kv + (j + jp) - c;
                    self.ab.swap(i0, i1);
                }
            }
            if km > 0 {
                let piv = self.ab[col + kv];
                for t in 1..=km {
                    self.ab[col + kv + t] /= piv;
                }
                for c in j + 1..=ju {
                    let ajc = self.ab[c * ldab + kv + j - c];
                    if ajc != 0.0 {
                        let base = c * ldab + kv + j - c;
                        for t in 1..=km {
                            let l = self.ab[col + kv + t];
                            self.ab[base + t] -= l * ajc;
                        }
                    }
                }
            }
        }
        self.factored = true;
        Ok(())
    }

    /// Solve L U x = b in place (after `factor`).
    pub fn solve(&self, b: &mut [f64]) {
        assert!(self.factored);
        let (n, kl, ku, ldab) = (self.n, self.kl, self.ku, self.ldab);
        let kv = kl + ku;
        // forward: apply pivots and L (unit diagonal)
        if kl > 0 {
            for j in 0..n {
                let p = self.ipiv[j];
                if p != j {
                    b.swap(j, p);
                }
                let km = kl.min(n - 1 - j);
                let col = j * ldab;
                let bj = b[j];
                for t in 1..=km {
                    b[j + t] -= self.ab[col + kv + t] * bj;
                }
            }
        }
        // backward: U has bandwidth kl+ku after pivoting
        for j in (0..n).rev() {
            let col = j * ldab;
            b[j] /= self.ab[col + kv];
            let bj = b[j];
            let lo = j.saturating_sub(kl + ku);
            for i in lo..j {
                b[i] -= self.ab[col + kv + i - j] * bj;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::SplitMix64;

    fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut m: Vec<Vec<f64>> = a.to_vec();
        let mut x = b.to_vec();
        for j in 0..n {
            let mut p = j;
            for i in j + 1..n {
                if m[i][j].abs() > m[p][j].abs() {
                    p = i;
                }
            }
            m.swap(j, p);
            x.swap(j, p);
            for i in j + 1..n {
                let f = m[i][j] / m[j][j];
                for k in j..n {
                    m[i][k] -= f * m[j][k];
                }
                x[i] -= f * x[j];
            }
        }
        for j in (0..n).rev() {
            x[j] /= m[j][j];
            for i in 0..j {
                x[i] -= m[i][j] * x[j];
            }
        }
        x
    }

    #[test]
    fn banded_lu_matches_dense_solve() {
        let mut rng = SplitMix64::new(77);
        for &(n, kl, ku) in &[(12usize, 2usize, 3usize), (30, 5, 1), (9, 8, 8), (20, 0, 0)] {
            let mut band = BandMatrix::new(n, kl, ku);
            let mut dense = vec![vec![0.0; n]; n];
            for j in 0..n {
                let lo = j.saturating_sub(band.ku);
                let hi = (j + band.kl).min(n - 1);
                for i in lo..=hi {
                    let v = rng.next_sym() + if i == j { 3.0 } else { 0.0 };
                    band.set(i, j, v);
                    dense[i][j] = v;
                }
            }
            let b: Vec<f64> = (0..n).map(|_| rng.next_sym()).collect();
            let want = dense_solve(&dense, &b);
            band.factor().unwrap();
            let mut got = b.clone();
            band.solve(&mut got);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-10, "{g} vs {w}");
            }
        }
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        // [[0, 1], [1, 0]] needs the row swap
        let mut band = BandMatrix::new(2, 1, 1);
        band.set(0, 1, 1.0);
        band.set(1, 0, 1.0);
        band.factor().unwrap();
        let mut b = vec![2.0, 3.0];
        band.solve(&mut b);
        assert!((b[0] - 3.0).abs() < 1e-14);
        assert!((b[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn singular_matrix_reports_column() {
        let mut band = BandMatrix::new(3, 1, 1);
        band.set(0, 0, 1.0);
        // column 1 entirely zero
        band.set(2, 2, 1.0);
        assert_eq!(band.factor(), Err(1));
    }
}
