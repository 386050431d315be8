//! Small dense/iterative linear algebra helpers: weighted inner products,
//! dense Cholesky, and a Jacobi-preconditioned conjugate gradient that works
//! in the weighted inner product carried by the grids.

use crate::error::{Result, SelmutError};

pub fn weighted_dot(w: &[f64], u: &[f64], v: &[f64]) -> f64 {
    w.iter().zip(u).zip(v).map(|((&w, &u), &v)| w * u * v).sum()
}

pub fn weighted_norm(w: &[f64], u: &[f64]) -> f64 {
    weighted_dot(w, u, u).sqrt()
}

pub fn max_abs(u: &[f64]) -> f64 {
    u.iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// Dense Cholesky factorization `A = L L^T` of a symmetric positive-definite
/// matrix, row-major, in place.
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    pub fn factor(mut a: Vec<f64>, n: usize) -> Result<Self> {
        debug_assert_eq!(a.len(), n * n);
        for j in 0..n {
            for k in 0..j {
                let ljk = a[j * n + k];
                for i in j..n {
                    a[i * n + j] -= a[i * n + k] * ljk;
                }
            }
            let d = a[j * n + j];
            if !(d > 0.0) {
                return Err(SelmutError::Internal(format!(
                    "Cholesky pivot {d} at row {j}; matrix is not positive definite"
                )));
            }
            let inv = 1.0 / d.sqrt();
            for i in j..n {
                a[i * n + j] *= inv;
            }
        }
        // zero the strict upper triangle for cleanliness
        for j in 0..n {
            for k in j + 1..n {
                a[j * n + k] = 0.0;
            }
        }
        Ok(Self { n, l: a })
    }

    pub fn solve(&self, b: &mut [f64]) {
        let (n, l) = (self.n, &self.l);
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= l[i * n + k] * b[k];
            }
            b[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= l[k * n + i] * b[k];
            }
            b[i] = s / l[i * n + i];
        }
    }
}

pub struct CgOutcome {
    pub iterations: usize,
    pub residual: f64,
}

/// Preconditioned CG for an operator that is self-adjoint in the `w`-weighted
/// inner product. `inv_diag` is the inverse of the operator diagonal (Jacobi
/// preconditioner). `x` holds the initial guess and receives the solution.
pub fn cg_weighted<F>(
    apply: F,
    w: &[f64],
    inv_diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<CgOutcome>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let mut r = vec![0.0; n];
    let mut ap = vec![0.0; n];
    apply(x, &mut ap);
    for i in 0..n {
        r[i] = b[i] - ap[i];
    }
    let b_norm = weighted_norm(w, b).max(f64::MIN_POSITIVE);
    let target = rel_tol * b_norm;
    let mut res = weighted_norm(w, &r);
    if res <= target {
        return Ok(CgOutcome { iterations: 0, residual: res });
    }
    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(&r, &d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = weighted_dot(w, &r, &z);
    for it in 1..=max_iter {
        apply(&p, &mut ap);
        let pap = weighted_dot(w, &p, &ap);
        if pap <= 0.0 {
            return Err(SelmutError::Internal(format!(
                "CG curvature {pap} <= 0; system is not positive definite"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = weighted_norm(w, &r);
        if res <= target {
            return Ok(CgOutcome { iterations: it, residual: res });
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = weighted_dot(w, &r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(SelmutError::LinearNoConvergence { residual: res / b_norm, iterations: max_iter })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_spd_system() {
        // A = [[4,1,0],[1,3,1],[0,1,2]]
        let a = vec![4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0];
        let ch = Cholesky::factor(a.clone(), 3).unwrap();
        let x_true = [1.0, -2.0, 0.5];
        let mut b = vec![0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                b[i] += a[i * 3 + j] * x_true[j];
            }
        }
        ch.solve(&mut b);
        for i in 0..3 {
            assert!((b[i] - x_true[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = vec![1.0, 2.0, 2.0, 1.0];
        assert!(Cholesky::factor(a, 2).is_err());
    }

    #[test]
    fn cg_solves_weighted_spd_system() {
        // Diagonal weights; operator A = D + tridiagonal Laplacian, w-self-adjoint.
        let n = 20;
        let w = vec![0.5; n];
        let apply = |u: &[f64], out: &mut [f64]| {
            for i in 0..n {
                let mut v = 3.0 * u[i];
                if i > 0 {
                    v -= u[i - 1];
                }
                if i + 1 < n {
                    v -= u[i + 1];
                }
                out[i] = v;
            }
        };
        let inv_diag = vec![1.0 / 3.0; n];
        let x_true: Vec<f64> = (0..n).map(|i| ((i as f64) * 0.7).sin()).collect();
        let mut b = vec![0.0; n];
        apply(&x_true, &mut b);
        let mut x = vec![0.0; n];
        let out = cg_weighted(apply, &w, &inv_diag, &b, &mut x, 1e-13, 1000).unwrap();
        assert!(out.iterations <= n + 5);
        for i in 0..n {
            assert!((x[i] - x_true[i]).abs() < 1e-10);
        }
    }
}
