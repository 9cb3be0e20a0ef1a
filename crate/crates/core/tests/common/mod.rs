//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use lipfit::Tensor64;

/// Textbook triple-loop product.
pub fn naive_matmul(a: &Tensor64, b: &Tensor64) -> Tensor64 {
    let (m, k, n) = (a.rows(), a.cols(), b.cols());
    assert_eq!(k, b.rows());
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            let mut s = 0.0;
            for p in 0..k {
                s += a.data()[i * k + p] * b.data()[p * n + j];
            }
            out[i * n + j] = s;
        }
    }
    Tensor64::matrix(m, n, out).unwrap()
}

/// Singular values by one-sided Jacobi rotations, sorted descending.
pub fn jacobi_singular_values(a: &Tensor64) -> Vec<f64> {
    // Work on columns of A (or Aᵀ if wide) so that we orthogonalize n ≤ m columns.
    let a = if a.cols() > a.rows() { a.transpose() } else { a.clone() };
    let (m, n) = (a.rows(), a.cols());
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|x| x * x).sum();
                let beta: f64 = cols[q].iter().map(|x| x * x).sum();
                let gamma: f64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 {
                    continue;
                }
                off = off.max(gamma.abs() / (alpha * beta).sqrt());
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (x, y) = (cols[p][i], cols[q][i]);
                    cols[p][i] = c * x - s * y;
                    cols[q][i] = s * x + c * y;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut s: Vec<f64> = cols.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Max over pairs of ‖f(a) − f(b)‖ / ‖a − b‖ for row-paired batches.
pub fn max_quotient(fa: &Tensor64, fb: &Tensor64, a: &Tensor64, b: &Tensor64) -> f64 {
    let mut best = 0.0f64;
    for i in 0..a.rows() {
        let num = lipfit::linalg::distance(fa.row(i), fb.row(i));
        let den = lipfit::linalg::distance(a.row(i), b.row(i));
        if den > 0.0 {
            best = best.max(num / den);
        }
    }
    best
}
