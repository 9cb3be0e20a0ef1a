//! Batched maps `ℝⁿ → ℝᵐ` evaluated on the rows of a matrix.

use crate::error::{dim_err, Error, Result};
use crate::linalg::Tensor;
use crate::Scalar;

/// A function evaluated row-wise: input `N×n`, output `N×m`.
pub trait BatchMap<T: Scalar> {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    fn eval_batch(&self, x: &Tensor<T>) -> Result<Tensor<T>>;

    fn eval(&self, x: &[T]) -> Result<Vec<T>> {
        let out = self.eval_batch(&Tensor::row_vector(x.to_vec()))?;
        Ok(out.into_data())
    }
}

impl<T: Scalar, M: BatchMap<T> + ?Sized> BatchMap<T> for &M {
    fn dim_in(&self) -> usize {
        (**self).dim_in()
    }
    fn dim_out(&self) -> usize {
        (**self).dim_out()
    }
    fn eval_batch(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        (**self).eval_batch(x)
    }
}

/// Adapter turning a pointwise closure into a [`BatchMap`].
pub struct FnMap<F> {
    dim_in: usize,
    dim_out: usize,
    f: F,
}

impl<F> FnMap<F> {
    pub fn new(dim_in: usize, dim_out: usize, f: F) -> Self {
        Self { dim_in, dim_out, f }
    }
}

impl<T: Scalar, F: Fn(&[T]) -> Vec<T>> BatchMap<T> for FnMap<F> {
    fn dim_in(&self) -> usize {
        self.dim_in
    }
    fn dim_out(&self) -> usize {
        self.dim_out
    }
    fn eval_batch(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        check_input(self, x)?;
        let mut data = Vec::with_capacity(x.rows() * self.dim_out);
        for i in 0..x.rows() {
            let y = (self.f)(x.row(i));
            if y.len() != self.dim_out {
                return Err(dim_err(format!(
                    "map returned {} values, expected {}",
                    y.len(),
                    self.dim_out
                )));
            }
            data.extend(y);
        }
        Ok(Tensor::from_parts(vec![x.rows(), self.dim_out], data))
    }
}

pub(crate) fn check_input<T: Scalar, M: BatchMap<T> + ?Sized>(m: &M, x: &Tensor<T>) -> Result<()> {
    if !x.is_matrix() || x.cols() != m.dim_in() {
        return Err(dim_err(format!(
            "expected N×{} input, got {:?}",
            m.dim_in(),
            x.shape()
        )));
    }
    Ok(())
}

/// Evaluate and reject non-finite outputs, naming the offending row.
pub fn eval_finite<T: Scalar, M: BatchMap<T> + ?Sized>(m: &M, x: &Tensor<T>) -> Result<Tensor<T>> {
    let y = m.eval_batch(x)?;
    if y.rows() != x.rows() || y.cols() != m.dim_out() {
        return Err(dim_err(format!(
            "map produced {:?} for {} inputs",
            y.shape(),
            x.rows()
        )));
    }
    for i in 0..y.rows() {
        if y.row(i).iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite output at point {:?}",
                x.row(i)
            )));
        }
    }
    Ok(y)
}
