//! Cayley map onto matrices with orthonormal columns.
//!
//! For free `U` (n×n) and `V` (m×n), with `Z = U − Uᵀ + VᵀV`:
//!
//! ```text
//! Q₁ = (I + Z)⁻¹ (I − Z)        n×n
//! Q₂ = −2 V (I + Z)⁻¹           m×n
//! ```
//!
//! and `[Q₁; Q₂]` has orthonormal columns. The symmetric part of `Z` is
//! positive semidefinite, so `I + Z` is always invertible; a failed solve can
//! only come from non-finite input.

use crate::error::{dim_err, Result};
use crate::linalg::{Lu, Tensor};
use crate::Scalar;

/// `Z = U − Uᵀ + VᵀV`.
pub fn cayley_generator<T: Scalar>(u: &Tensor<T>, v: &Tensor<T>) -> Result<Tensor<T>> {
    let n = u.rows();
    if !u.is_matrix() || u.cols() != n {
        return Err(dim_err(format!("cayley: u must be square, got {:?}", u.shape())));
    }
    if !v.is_matrix() || v.cols() != n {
        return Err(dim_err(format!(
            "cayley: v must have {n} columns, got {:?}",
            v.shape()
        )));
    }
    let vtv = v.transpose().matmul_unchecked(v);
    let ut = u.transpose();
    Ok(Tensor::from_fn(n, n, |i, j| u.get(i, j) - ut.get(i, j) + vtv.get(i, j)))
}

/// Returns `(Q₁, Q₂)`; see the module docs.
pub fn cayley<T: Scalar>(u: &Tensor<T>, v: &Tensor<T>) -> Result<(Tensor<T>, Tensor<T>)> {
    let z = cayley_generator(u, v)?;
    let n = z.rows();
    let eye = Tensor::<T>::eye(n);
    let i_plus_z = eye.add(&z)?;
    let i_minus_z = eye.sub(&z)?;
    let lu = Lu::factor(&i_plus_z)?;
    let q1 = lu.solve(&i_minus_z)?;
    let q2 = if v.rows() == 0 {
        Tensor::zeros(0, n)
    } else {
        lu.solve_transpose(&v.transpose())?.transpose().scale(T::of(-2.0))
    };
    Ok((q1, q2))
}

/// `max |(Q₁ᵀQ₁ + Q₂ᵀQ₂ − I)ᵢⱼ|`.
pub fn orthogonality_defect<T: Scalar>(q1: &Tensor<T>, q2: &Tensor<T>) -> T {
    let g1 = q1.transpose().matmul_unchecked(q1);
    let g2 = q2.transpose().matmul_unchecked(q2);
    let n = g1.rows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { T::one() } else { T::zero() };
            worst = worst.max((g1.get(i, j) + g2.get(i, j) - target).abs());
        }
    }
    worst
}
