//! Jacobi-preconditioned conjugate gradients for the frozen-coefficient systems.

use crate::scalar::{dot, Real};

#[derive(Debug, Clone, Copy)]
pub(crate) struct CgOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

/// Solves `A x = b` for symmetric positive definite `A`, starting from `x`.
/// Stops once `‖b − A x‖ ≤ tol ‖b‖`.
pub(crate) fn pcg<T: Real>(
    mut apply: impl FnMut(&[T], &mut [T]),
    diag: &[T],
    b: &[T],
    x: &mut [T],
    tol: T,
    max_iter: usize,
) -> CgOutcome {
    let len = b.len();
    let b_norm = dot(b, b).sqrt();
    if b_norm == T::zero() {
        x.fill(T::zero());
        return CgOutcome { iterations: 0, relative_residual: 0.0, converged: true };
    }
    let mut r = vec![T::zero(); len];
    apply(x, &mut r);
    for i in 0..len {
        r[i] = b[i] - r[i];
    }
    let mut z: Vec<T> = r.iter().zip(diag).map(|(&ri, &di)| ri / di).collect();
    let mut d = z.clone();
    let mut q = vec![T::zero(); len];
    let mut rz = dot(&r, &z);
    let target = tol * b_norm;
    let mut res = dot(&r, &r).sqrt();
    let mut it = 0;
    while res > target && it < max_iter {
        apply(&d, &mut q);
        let dq = dot(&d, &q);
        if !(dq > T::zero()) {
            break;
        }
        let alpha = rz / dq;
        for i in 0..len {
            x[i] += alpha * d[i];
            r[i] -= alpha * q[i];
        }
        for i in 0..len {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..len {
            d[i] = z[i] + beta * d[i];
        }
        res = dot(&r, &r).sqrt();
        it += 1;
    }
    CgOutcome { iterations: it, relative_residual: (res / b_norm).as_f64(), converged: res <= target }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_tridiagonal_system() {
        let n = 50;
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                let mut v = 3.0 * x[i];
                if i > 0 {
                    v -= x[i - 1];
                }
                if i + 1 < n {
                    v -= x[i + 1];
                }
                y[i] = v;
            }
        };
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut x = vec![0.0; n];
        let out = pcg(apply, &vec![3.0; n], &b, &mut x, 1e-12, 500);
        assert!(out.converged);
        let mut ax = vec![0.0; n];
        apply(&x, &mut ax);
        for i in 0..n {
            assert!((ax[i] - b[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let mut x = vec![1.0; 4];
        let out = pcg(|a: &[f64], y: &mut [f64]| y.copy_from_slice(a), &[1.0; 4], &[0.0; 4], &mut x, 1e-10, 10);
        assert_eq!(out.iterations, 0);
        assert_eq!(x, vec![0.0; 4]);
    }
}
