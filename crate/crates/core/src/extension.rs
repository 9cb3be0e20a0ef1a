//! Minimal-Lipschitz interpolation of sampled data, one output at a time.
//!
//! For output `j` with constant `L_j`,
//!
//! ```text
//! u_j(x) = min_i ( y_ij + L_j ‖x − x_i‖ )      upper (McShane) envelope
//! l_j(x) = max_i ( y_ij − L_j ‖x − x_i‖ )      lower (Whitney) envelope
//! ```
//!
//! Both are `L_j`-Lipschitz and interpolate the data once `L_j` reaches the
//! per-output `L_data`; their midpoint is the interpolant returned by
//! [`LipschitzExtension::evaluate`]. As a map into `ℝᵐ` it is `‖L‖₂`-Lipschitz.

use crate::data::{empirical_lipschitz_per_output, LabeledDataset};
use crate::error::{dim_err, Error, Result};
use crate::linalg::{distance, norm, Tensor};
use crate::map::{check_input, BatchMap};
use crate::Scalar;

#[derive(Clone, Debug)]
pub struct LipschitzExtension<T> {
    dataset: LabeledDataset<T>,
    lip: Vec<T>,
}

impl<T: Scalar> LipschitzExtension<T> {
    /// Use the per-output `L_data` as the constants (the tightest interpolating choice).
    pub fn new(dataset: LabeledDataset<T>) -> Result<Self> {
        let lip = if dataset.len() >= 2 {
            empirical_lipschitz_per_output(&dataset)?
        } else {
            vec![T::zero(); dataset.output_dim()]
        };
        Ok(Self { dataset, lip })
    }

    pub fn with_lipschitz(dataset: LabeledDataset<T>, lip: Vec<T>) -> Result<Self> {
        if lip.len() != dataset.output_dim() {
            return Err(dim_err(format!(
                "need {} Lipschitz constants, got {}",
                dataset.output_dim(),
                lip.len()
            )));
        }
        if lip.iter().any(|&l| !(l >= T::zero() && l.is_finite())) {
            return Err(Error::Argument("Lipschitz constants must be finite and ≥ 0".into()));
        }
        Ok(Self { dataset, lip })
    }

    pub fn dataset(&self) -> &LabeledDataset<T> {
        &self.dataset
    }

    pub fn lipschitz(&self) -> &[T] {
        &self.lip
    }

    /// `‖L‖₂`, the Lipschitz constant of the vector-valued interpolant.
    pub fn vector_lipschitz(&self) -> T {
        norm(&self.lip)
    }

    fn envelopes(&self, x: &[T], j: usize) -> (T, T) {
        let (xs, ys) = (self.dataset.inputs(), self.dataset.outputs());
        let l = self.lip[j];
        let mut upper = T::infinity();
        let mut lower = T::neg_infinity();
        for i in 0..self.dataset.len() {
            let r = l * distance(x, xs.row(i));
            let y = ys.get(i, j);
            upper = upper.min(y + r);
            lower = lower.max(y - r);
        }
        (upper, lower)
    }

    pub fn mcshane_upper(&self, x: &[T], j: usize) -> T {
        self.envelopes(x, j).0
    }

    pub fn whitney_lower(&self, x: &[T], j: usize) -> T {
        self.envelopes(x, j).1
    }

    /// Midpoint interpolant `(u_j + l_j) / 2` for every output.
    pub fn evaluate(&self, x: &[T]) -> Vec<T> {
        let half = T::of(0.5);
        (0..self.lip.len())
            .map(|j| {
                let (u, l) = self.envelopes(x, j);
                (u + l) * half
            })
            .collect()
    }
}

impl<T: Scalar> BatchMap<T> for LipschitzExtension<T> {
    fn dim_in(&self) -> usize {
        self.dataset.input_dim()
    }

    fn dim_out(&self) -> usize {
        self.dataset.output_dim()
    }

    fn eval_batch(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        check_input(self, x)?;
        let mut data = Vec::with_capacity(x.rows() * self.dim_out());
        for i in 0..x.rows() {
            data.extend(self.evaluate(x.row(i)));
        }
        Tensor::matrix(x.rows(), self.dim_out(), data)
    }
}
