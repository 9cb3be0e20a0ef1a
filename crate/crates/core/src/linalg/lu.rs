use crate::error::{dim_err, Error, Result};
use crate::linalg::Tensor;
use crate::Scalar;

/// LU factorization `P·A = L·U` with partial (row) pivoting.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    n: usize,
    // unit-lower L below the diagonal, U on and above
    lu: Vec<T>,
    // perm[i] = original row placed at row i
    perm: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    pub fn factor(a: &Tensor<T>) -> Result<Self> {
        if !a.is_matrix() || a.rows() != a.cols() {
            return Err(dim_err(format!("LU needs a square matrix, got {:?}", a.shape())));
        }
        if !a.is_finite() {
            return Err(Error::Numeric("non-finite entry in LU factorization".into()));
        }
        let n = a.rows();
        let mut lu = a.data().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs().max(T::min_positive_value());
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !pmax.is_finite() {
                return Err(Error::Numeric("LU factorization overflowed".into()));
            }
            if pmax <= scale * T::EPS * T::of(n as f64) * T::EPS {
                return Err(Error::Numeric(format!("matrix is singular (pivot {k})")));
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                if f != T::zero() {
                    for j in k + 1..n {
                        let u = lu[k * n + j];
                        lu[i * n + j] -= f * u;
                    }
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solve `A·X = B` for `B` of shape n×k.
    pub fn solve(&self, b: &Tensor<T>) -> Result<Tensor<T>> {
        let n = self.n;
        if b.rows() != n {
            return Err(dim_err(format!("solve: rhs has {} rows, expected {n}", b.rows())));
        }
        let k = b.cols();
        let mut x = vec![T::zero(); n * k];
        for i in 0..n {
            x[i * k..(i + 1) * k].copy_from_slice(b.row(self.perm[i]));
        }
        // forward: L y = P b
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[i * n + j];
                if l != T::zero() {
                    for c in 0..k {
                        let v = x[j * k + c];
                        x[i * k + c] -= l * v;
                    }
                }
            }
        }
        // backward: U x = y
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = self.lu[i * n + j];
                if u != T::zero() {
                    for c in 0..k {
                        let v = x[j * k + c];
                        x[i * k + c] -= u * v;
                    }
                }
            }
            let d = self.lu[i * n + i];
            for c in 0..k {
                x[i * k + c] /= d;
            }
        }
        finite_or_err(Tensor::from_parts(vec![n, k], x))
    }

    /// Solve `Aᵀ·X = B`.
    pub fn solve_transpose(&self, b: &Tensor<T>) -> Result<Tensor<T>> {
        let n = self.n;
        if b.rows() != n {
            return Err(dim_err(format!("solve_transpose: rhs has {} rows, expected {n}", b.rows())));
        }
        let k = b.cols();
        // Aᵀ = Uᵀ Lᵀ P, so solve Uᵀ z = b, Lᵀ w = z, x = Pᵀ w
        let mut z = b.data().to_vec();
        for i in 0..n {
            for j in 0..i {
                let u = self.lu[j * n + i];
                if u != T::zero() {
                    for c in 0..k {
                        let v = z[j * k + c];
                        z[i * k + c] -= u * v;
                    }
                }
            }
            let d = self.lu[i * n + i];
            for c in 0..k {
                z[i * k + c] /= d;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let l = self.lu[j * n + i];
                if l != T::zero() {
                    for c in 0..k {
                        let v = z[j * k + c];
                        z[i * k + c] -= l * v;
                    }
                }
            }
        }
        let mut x = vec![T::zero(); n * k];
        for i in 0..n {
            x[self.perm[i] * k..(self.perm[i] + 1) * k].copy_from_slice(&z[i * k..(i + 1) * k]);
        }
        finite_or_err(Tensor::from_parts(vec![n, k], x))
    }

    pub fn determinant(&self) -> T {
        let n = self.n;
        let mut det = (0..n).map(|i| self.lu[i * n + i]).fold(T::one(), |a, b| a * b);
        // parity of the permutation
        let mut seen = vec![false; n];
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.perm[i];
                len += 1;
            }
            if len % 2 == 0 {
                det = -det;
            }
        }
        det
    }
}

fn finite_or_err<T: Scalar>(t: Tensor<T>) -> Result<Tensor<T>> {
    if t.is_finite() {
        Ok(t)
    } else {
        Err(Error::Numeric("linear solve produced a non-finite value".into()))
    }
}

/// `A⁻¹·B` through a pivoted LU factorization.
pub fn solve<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    Lu::factor(a)?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Tensor<f64> {
        Tensor::from_rows(&[
            vec![0.0, 2.0, 1.0],
            vec![1.0, 1.0, 0.0],
            vec![3.0, 0.0, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn solve_recovers_rhs() {
        let a = sample();
        let b = Tensor::from_fn(3, 2, |i, j| (i as f64) - 2.0 * j as f64 + 0.5);
        let x = solve(&a, &b).unwrap();
        let back = a.matmul(&x).unwrap();
        assert!(back.sub(&b).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn transpose_solve_recovers_rhs() {
        let a = sample();
        let lu = Lu::factor(&a).unwrap();
        let b = Tensor::from_fn(3, 2, |i, j| (i * 3 + j) as f64);
        let x = lu.solve_transpose(&b).unwrap();
        let back = a.transpose().matmul(&x).unwrap();
        assert!(back.sub(&b).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn determinant_with_pivoting() {
        // det = 0*(1-0) - 2*(1-0) + 1*(0-3) = -5
        let lu = Lu::factor(&sample()).unwrap();
        assert!((lu.determinant() + 5.0).abs() < 1e-12);
    }

    #[test]
    fn singular_and_nan_are_errors() {
        let s = Tensor::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(Lu::factor(&s).is_err());
        let mut n = Tensor::<f64>::eye(2);
        n.data_mut()[1] = f64::NAN;
        assert!(Lu::factor(&n).is_err());
    }
}
