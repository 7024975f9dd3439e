//! Restarted GMRES with left preconditioning (Arnoldi with modified
//! Gram-Schmidt and Givens rotations on the Hessenberg system).

use crate::util::{axpy, dot, norm2};

#[derive(Debug, Clone)]
pub struct GmresResult {
    /// Total inner iterations across restarts.
    pub iters: usize,
    /// Achieved preconditioned relative residual.
    pub residual: f64,
    pub converged: bool,
    /// Residual estimate after every inner iteration (non-increasing).
    pub history: Vec<f64>,
}

/// Solve A x = b to ||M^-1 (b - A x)|| / ||M^-1 b|| <= tol.
///
/// `x` carries the initial guess and the best solution on return.  When the
/// iteration budget runs out the best iterate and the achieved residual are
/// reported with `converged = false`; policy is the caller's.
pub fn gmres<A, P>(
    mut apply: A,
    precond: Option<P>,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    restart: usize,
    maxit: usize,
) -> GmresResult
where
    A: FnMut(&[f64], &mut [f64]),
    P: Fn(&[f64], &mut [f64]),
{
    assert!(tol > 0.0 && restart >= 1);
    let n = b.len();
    let m = restart.min(n);
    let prec = |src: &[f64], dst: &mut [f64]| match &precond {
        Some(p) => p(src, dst),
        None => dst.copy_from_slice(src),
    };

    let mut scratch = vec![0.0; n];
    let mut z = vec![0.0; n];
    prec(b, &mut z);
    let norm_mb = norm2(&z);
    if norm_mb == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return GmresResult {
            iters: 0,
            residual: 0.0,
            converged: true,
            history: Vec::new(),
        };
    }

    let mut total_iters = 0usize;
    let mut history = Vec::new();
    let mut best = f64::INFINITY;

    loop {
        // preconditioned residual
        apply(x, &mut scratch);
        let r: Vec<f64> = b.iter().zip(&scratch).map(|(bi, ai)| bi - ai).collect();
        prec(&r, &mut z);
        let beta = norm2(&z);
        let rel = beta / norm_mb;
        best = best.min(rel);
        if rel <= tol {
            return GmresResult {
                iters: total_iters,
                residual: rel,
                converged: true,
                history,
            };
        }
        if total_iters >= maxit {
            return GmresResult {
                iters: total_iters,
                residual: rel,
                converged: false,
                history,
            };
        }

        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(z.iter().map(|v| v / beta).collect());
        let rows = m + 1;
        let mut h = vec![0.0; rows * m]; // column-major: h[col*rows + row]
        let mut giv: Vec<(f64, f64)> = Vec::with_capacity(m);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;

        let mut k_used = 0usize;
        let mut converged_inner = false;
        for jcol in 0..m {
            if total_iters >= maxit {
                break;
            }
            total_iters += 1;
            k_used = jcol + 1;
            apply(&basis[jcol], &mut scratch);
            let mut w = vec![0.0; n];
            prec(&scratch, &mut w);
            for (i, v) in basis.iter().enumerate().take(jcol + 1) {
                let hij = dot(&w, v);
                h[jcol * rows + i] = hij;
                axpy(-hij, v, &mut w);
            }
            let hlast = norm2(&w);
            h[jcol * rows + jcol + 1] = hlast;
            let breakdown = hlast < 1e-300;
            if !breakdown {
                basis.push(w.iter().map(|v| v / hlast).collect());
            } else {
                basis.push(vec![0.0; n]);
            }
            for (i, &(c, s)) in giv.iter().enumerate() {
                let a = h[jcol * rows + i];
                let bq = h[jcol * rows + i + 1];
                h[jcol * rows + i] = c * a + s * bq;
                h[jcol * rows + i + 1] = -s * a + c * bq;
            }
            let a = h[jcol * rows + jcol];
            let bq = h[jcol * rows + jcol + 1];
            let rnorm = (a * a + bq * bq).sqrt();
            let (c, s) = if rnorm == 0.0 { (1.0, 0.0) } else { (a / rnorm, bq / rnorm) };
            h[jcol * rows + jcol] = rnorm;
            h[jcol * rows + jcol + 1] = 0.0;
            let ga = g[jcol];
            g[jcol] = c * ga;
            g[jcol + 1] = -s * ga;
            giv.push((c, s));

            let est = g[jcol + 1].abs() / norm_mb;
            history.push(est);
            if est <= tol || breakdown {
                converged_inner = true;
                break;
            }
        }

        // solve the triangular system and update x
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut sum = g[i];
            for j in i + 1..k_used {
                sum -= h[j * rows + i] * y[j];
            }
            let d = h[i * rows + i];
            y[i] = if d.abs() > 1e-300 { sum / d } else { 0.0 };
        }
        for (i, &yi) in y.iter().enumerate() {
            axpy(yi, &basis[i], x);
        }
        if converged_inner {
            // report the true preconditioned residual of the updated iterate
            apply(x, &mut scratch);
            let r: Vec<f64> = b.iter().zip(&scratch).map(|(bi, ai)| bi - ai).collect();
            prec(&r, &mut z);
            let rel = norm2(&z) / norm_mb;
            return GmresResult {
                iters: total_iters,
                residual: rel,
                converged: rel <= tol * 1.0001 || rel <= best,
                history,
            };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::band::BandMatrix;
    use crate::util::SplitMix64;

    #[test]
    fn identity_converges_in_one_iteration() {
        let b = vec![1.0, -2.0, 3.0];
        let mut x = vec![0.0; 3];
        let res = gmres(
            |v: &[f64], out: &mut [f64]| out.copy_from_slice(v),
            None::<fn(&[f64], &mut [f64])>,
            &b,
            &mut x,
            1e-12,
            10,
            50,
        );
        assert!(res.converged);
        assert!(res.iters <= 1, "{}", res.iters);
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_two_by_two() {
        let b = vec![1.0, 2.0];
        let mut x = vec![0.0; 2];
        let res = gmres(
            |v: &[f64], out: &mut [f64]| {
                out[0] = v[0];
                out[1] = 2.0 * v[1];
            },
            None::<fn(&[f64], &mut [f64])>,
            &b,
            &mut x,
            1e-12,
            10,
            50,
        );
        assert!(res.converged);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_preconditioner_converges_in_one_iteration() {
        let n = 20;
        let mut rng = SplitMix64::new(5);
        let mut a = BandMatrix::new(n, 3, 3);
        for j in 0..n {
            for i in j.saturating_sub(3)..=(j + 3).min(n - 1) {
                a.set(i, j, rng.next_sym() + if i == j { 4.0 } else { 0.0 });
            }
        }
        let apply_a = a.clone();
        let mut lu = a;
        lu.factor().unwrap();
        let b: Vec<f64> = (0..n).map(|_| rng.next_sym()).collect();
        let mut x = vec![0.0; n];
        let res = gmres(
            |v: &[f64], out: &mut [f64]| out.copy_from_slice(&apply_a.matvec(v)),
            Some(|v: &[f64], out: &mut [f64]| {
                out.copy_from_slice(v);
                lu.solve(out);
            }),
            &b,
            &mut x,
            1e-10,
            10,
            100,
        );
        assert!(res.converged);
        assert!(res.iters <= 1, "iters {}", res.iters);
    }

    #[test]
    fn spd_system_matches_direct_solve_and_monotone_history() {
        let n = 40;
        let mut rng = SplitMix64::new(11);
        // SPD tridiagonal-ish
        let mut a = BandMatrix::new(n, 1, 1);
        for j in 0..n {
            a.set(j, j, 4.0 + rng.next_f64());
            if j > 0 {
                a.set(j, j - 1, -1.0);
                a.set(j - 1, j, -1.0);
            }
        }
        let b: Vec<f64> = (0..n).map(|_| rng.next_sym()).collect();
        let mut direct = a.clone();
        direct.factor().unwrap();
        let mut want = b.clone();
        direct.solve(&mut want);

        let mut x = vec![0.0; n];
        let res = gmres(
            |v: &[f64], out: &mut [f64]| out.copy_from_slice(&a.matvec(v)),
            None::<fn(&[f64], &mut [f64])>,
            &b,
            &mut x,
            1e-12,
            40,
            400,
        );
        assert!(res.converged);
        for (g, w) in x.iter().zip(&want) {
            assert!((g - w).abs() < 1e-9);
        }
        for win in res.history.windows(2) {
            assert!(win[1] <= win[0] + 1e-12, "{:?}", res.history);
        }
    }

    #[test]
    fn nonconvergence_reports_best_iterate() {
        // restrict iterations so the solver cannot converge
        let n = 50;
        let mut rng = SplitMix64::new(3);
        let diag: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.next_sym()).collect();
        let mut x = vec![0.0; n];
        let res = gmres(
            |v: &[f64], out: &mut [f64]| {
                for i in 0..n {
                    out[i] = diag[i] * v[i];
                }
            },
            None::<fn(&[f64], &mut [f64])>,
            &b,
            &mut x,
            1e-14,
            3,
            5,
        );
        assert!(!res.converged);
        assert!(res.iters <= 5);
        assert!(res.residual < 1.0, "made progress: {}", res.residual);
    }
}
