use serde::{Deserialize, Serialize};

use super::{cayley_on_tape, gaussian, Activation, PreparedLayer};
use crate::autodiff::{Tape, Var};
use crate::error::Result;
use crate::linalg::{cayley, Tensor};
use crate::rng::Prng;
use crate::Scalar;

/// `h ↦ √2·Aᵀ·Ψ·φ(√2·Ψ⁻¹·B·h + b)` with `Ψ = diag(eᵈ)` and
/// `(Aᵀ, Bᵀ) = cayley(x, y)`, so that `AAᵀ + BBᵀ = I`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct SandwichLayer<T> {
    pub d_in: usize,
    pub d_out: usize,
    pub activation: Activation,
    /// `d_out × d_out`
    pub x: Tensor<T>,
    /// `d_in × d_out`
    pub y: Tensor<T>,
    /// `1 × d_out` log-scales of `Ψ`
    pub d: Tensor<T>,
    /// `1 × d_out`
    pub b: Tensor<T>,
}

impl<T: Scalar> SandwichLayer<T> {
    pub fn new(d_in: usize, d_out: usize, activation: Activation, rng: &mut Prng) -> Self {
        let std = 0.5 / (d_in.max(d_out) as f64).sqrt();
        Self {
            d_in,
            d_out,
            activation,
            x: gaussian(d_out, d_out, std, rng),
            y: gaussian(d_in, d_out, std, rng),
            d: Tensor::zeros(1, d_out),
            b: Tensor::zeros(1, d_out),
        }
    }

    pub(super) fn prepare(&self) -> Result<PreparedLayer<T>> {
        let (q1, q2) = cayley(&self.x, &self.y)?;
        let sqrt2 = T::of(2.0).sqrt();
        let d = self.d.data();
        // W_in = √2·Bᵀ·Ψ⁻¹ (scale columns), W_out = √2·Ψ·A (scale rows)
        let w_in = Tensor::from_fn(self.d_in, self.d_out, |i, j| q2.get(i, j) * sqrt2 * (-d[j]).exp());
        let w_out = Tensor::from_fn(self.d_out, self.d_out, |i, j| q1.get(j, i) * sqrt2 * d[i].exp());
        Ok(PreparedLayer {
            w_in,
            b: self.b.clone(),
            activation: self.activation,
            w_out: Some(w_out),
        })
    }

    pub(super) fn record(&self, tape: &mut Tape<T>, params: &[Var], h: Var) -> Result<Var> {
        let (x, y, d, b) = (params[0], params[1], params[2], params[3]);
        let sqrt2 = T::of(2.0).sqrt();
        let (q1, q2) = cayley_on_tape(tape, x, y)?;
        let q2 = q2.expect("sandwich layers have d_in ≥ 1");
        let neg_d = tape.scale(d, -T::one());
        let inv_psi = tape.exp(neg_d);
        let inv_psi = tape.scale(inv_psi, sqrt2);
        let w_in = tape.mul_row(q2, inv_psi)?;
        let z = tape.matmul(h, w_in)?;
        let z = tape.add_row(z, b)?;
        let z = tape.activate(z, self.activation);
        let psi = tape.exp(d);
        let psi = tape.scale(psi, sqrt2);
        let z = tape.mul_row(z, psi)?;
        let a = tape.transpose(q1);
        tape.matmul(z, a)
    }
}
