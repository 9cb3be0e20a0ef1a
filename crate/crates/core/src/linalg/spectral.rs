//! Largest singular value by power iteration on `WᵀW`.

use crate::error::{Error, Result};
use crate::linalg::tensor::{dot, norm};
use crate::linalg::Tensor;
use crate::Scalar;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 500;

/// Outcome of a power iteration run.
#[derive(Clone, Debug)]
pub struct PowerIteration<T> {
    pub sigma: T,
    /// Unit right singular vector estimate (length = cols of W).
    pub v: Vec<T>,
    /// Unit left singular vector estimate `W v / σ` (length = rows of W).
    pub u: Vec<T>,
    pub iterations: usize,
    /// `‖WᵀW v − σ² v‖ / σ²` at the returned iterate.
    pub residual: T,
    pub converged: bool,
}

/// Power iteration on `WᵀW` from `start` (normalized internally).
///
/// Never fails on non-convergence; inspect `converged`. A zero start vector or
/// one annihilated by `W` falls back to an alternating-sign start.
pub fn power_iteration<T: Scalar>(
    w: &Tensor<T>,
    start: &[T],
    tol: T,
    max_iter: usize,
) -> PowerIteration<T> {
    let (m, n) = (w.rows(), w.cols());
    debug_assert_eq!(start.len(), n);
    let mut v = start.to_vec();
    let mut fallback_used = false;
    if !normalize(&mut v) {
        v = alternating(n);
        fallback_used = true;
    }
    let mut wv = vec![T::zero(); m];
    let mut wtwv = vec![T::zero(); n];
    let mut residual = T::infinity();
    let mut iterations = 0;
    while iterations < max_iter.max(1) {
        iterations += 1;
        apply(w, &v, &mut wv);
        apply_t(w, &wv, &mut wtwv);
        let sigma2 = dot(&v, &wtwv);
        if sigma2 <= T::zero() {
            if !fallback_used {
                v = alternating(n);
                fallback_used = true;
                continue;
            }
            // W annihilates both starts; treat as zero spectral norm
            residual = T::zero();
            break;
        }
        residual = v
            .iter()
            .zip(&wtwv)
            .map(|(&vi, &ai)| (ai - sigma2 * vi) * (ai - sigma2 * vi))
            .sum::<T>()
            .sqrt()
            / sigma2;
        if residual <= tol {
            break;
        }
        v.copy_from_slice(&wtwv);
        normalize(&mut v);
    }
    apply(w, &v, &mut wv);
    let sigma = norm(&wv);
    let u = if sigma > T::zero() {
        wv.iter().map(|&x| x / sigma).collect()
    } else {
        vec![T::zero(); m]
    };
    PowerIteration {
        sigma,
        v,
        u,
        iterations,
        residual,
        converged: residual <= tol,
    }
}

/// Largest singular value of `w`, started from the normalized all-ones vector.
pub fn spectral_norm<T: Scalar>(w: &Tensor<T>, tol: T, max_iter: usize) -> Result<T> {
    if !w.is_matrix() || w.is_empty() {
        return Err(Error::Argument("spectral_norm needs a non-empty matrix".into()));
    }
    if tol <= T::zero() || max_iter == 0 {
        return Err(Error::Argument("tol must be > 0 and max_iter ≥ 1".into()));
    }
    if !w.is_finite() {
        return Err(Error::Numeric("non-finite matrix entry".into()));
    }
    if w.max_abs() == T::zero() {
        return Err(Error::Argument("spectral_norm of the zero matrix".into()));
    }
    let start = vec![T::one(); w.cols()];
    let run = power_iteration(w, &start, tol, max_iter);
    if run.converged {
        Ok(run.sigma)
    } else {
        Err(Error::Convergence {
            iterations: run.iterations,
            last: run.sigma.to_f64_lossy(),
            residual: run.residual.to_f64_lossy(),
        })
    }
}

fn normalize<T: Scalar>(v: &mut [T]) -> bool {
    let n = norm(v);
    if n > T::zero() && n.is_finite() {
        v.iter_mut().for_each(|x| *x = *x / n);
        true
    } else {
        false
    }
}

fn alternating<T: Scalar>(n: usize) -> Vec<T> {
    let mut v: Vec<T> = (0..n)
        .map(|i| if i % 2 == 0 { T::one() } else { -T::of(0.5) })
        .collect();
    normalize(&mut v);
    v
}

fn apply<T: Scalar>(w: &Tensor<T>, v: &[T], out: &mut [T]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = dot(w.row(i), v);
    }
}

fn apply_t<T: Scalar>(w: &Tensor<T>, x: &[T], out: &mut [T]) {
    out.iter_mut().for_each(|o| *o = T::zero());
    for (i, &xi) in x.iter().enumerate() {
        for (o, &wij) in out.iter_mut().zip(w.row(i)) {
            *o += wij * xi;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal() {
        let w = Tensor::<f64>::diag(&[3.0, 1.0]);
        let s = spectral_norm(&w, 1e-9, 500).unwrap();
        assert!((s - 3.0).abs() < 1e-8);
    }

    #[test]
    fn nilpotent() {
        let w = Tensor::<f64>::from_rows(&[vec![0.0, 2.0], vec![0.0, 0.0]]).unwrap();
        let s = spectral_norm(&w, 1e-9, 500).unwrap();
        assert!((s - 2.0).abs() < 1e-12);
    }

    #[test]
    fn start_orthogonal_to_top_direction() {
        // all-ones lies in the null space of this row
        let w = Tensor::from_rows(&[vec![1.0, -1.0]]).unwrap();
        let s = spectral_norm(&w, 1e-9, 500).unwrap();
        assert!((s - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn argument_errors() {
        let z = Tensor::<f64>::zeros(2, 2);
        assert!(matches!(spectral_norm(&z, 1e-9, 10), Err(Error::Argument(_))));
        let w = Tensor::<f64>::eye(2);
        assert!(spectral_norm(&w, 0.0, 10).is_err());
        assert!(spectral_norm(&w, 1e-9, 0).is_err());
    }

    #[test]
    fn non_convergence_carries_last_iterate() {
        // nearly degenerate top pair converges slowly
        let w = Tensor::diag(&[1.0, 0.999_999, 0.5]);
        match spectral_norm(&w, 1e-14, 3) {
            Err(Error::Convergence { iterations, last, .. }) => {
                assert_eq!(iterations, 3);
                assert!(last > 0.9 && last <= 1.0 + 1e-12);
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }
}
