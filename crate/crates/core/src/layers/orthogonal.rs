use serde::{Deserialize, Serialize};

use super::{cayley_on_tape, gaussian, Activation, PreparedLayer};
use crate::autodiff::{Tape, Var};
use crate::error::Result;
use crate::linalg::{cayley, Tensor};
use crate::rng::Prng;
use crate::Scalar;

/// `h ↦ φ(W h + b)` with `W` semi-orthogonal.
///
/// With `k = min(d_in, d_out)` the Cayley map of `(u, v)` yields a
/// `max(d_in, d_out) × k` matrix `Q` with orthonormal columns. The effective
/// weight is `Q` itself when `d_out ≥ d_in` (an isometry) and `Qᵀ` otherwise
/// (orthonormal rows), so `‖W x‖ ≤ ‖x‖` in both cases.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct OrthogonalLayer<T> {
    pub d_in: usize,
    pub d_out: usize,
    pub activation: Activation,
    /// `k × k`
    pub u: Tensor<T>,
    /// `(max(d_in, d_out) − k) × k`
    pub v: Tensor<T>,
    /// `1 × d_out`
    pub b: Tensor<T>,
}

impl<T: Scalar> OrthogonalLayer<T> {
    pub fn new(d_in: usize, d_out: usize, activation: Activation, rng: &mut Prng) -> Self {
        let k = d_in.min(d_out);
        let m = d_in.max(d_out) - k;
        let std = 0.5 / (k as f64).sqrt();
        Self {
            d_in,
            d_out,
            activation,
            u: gaussian(k, k, std, rng),
            v: gaussian(m, k, std, rng),
            b: Tensor::zeros(1, d_out),
        }
    }

    /// Effective `d_out × d_in` weight.
    pub fn weight(&self) -> Result<Tensor<T>> {
        let (q1, q2) = cayley(&self.u, &self.v)?;
        let q = q1.vconcat(&q2)?;
        Ok(if self.d_out >= self.d_in { q } else { q.transpose() })
    }

    pub(super) fn prepare(&self) -> Result<PreparedLayer<T>> {
        Ok(PreparedLayer {
            w_in: self.weight()?.transpose(),
            b: self.b.clone(),
            activation: self.activation,
            w_out: None,
        })
    }

    pub(super) fn record(&self, tape: &mut Tape<T>, params: &[Var], h: Var) -> Result<Var> {
        let (u, v, b) = (params[0], params[1], params[2]);
        let (q1, q2) = cayley_on_tape(tape, u, v)?;
        // Qᵀ = [Q₁ᵀ | Q₂ᵀ] is k × max
        let mut qt = tape.transpose(q1);
        if let Some(q2) = q2 {
            let q2t = tape.transpose(q2);
            qt = tape.hconcat(qt, q2t)?;
        }
        // rows-as-samples form needs Wᵀ: Qᵀ when W = Q, Q when W = Qᵀ
        let w_in = if self.d_out >= self.d_in { qt } else { tape.transpose(qt) };
        let z = tape.matmul(h, w_in)?;
        let z = tape.add_row(z, b)?;
        Ok(tape.activate(z, self.activation))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn weight_is_semi_orthogonal() {
        for (d_in, d_out) in [(3, 7), (7, 3), (5, 5)] {
            let l = OrthogonalLayer::<f64>::new(d_in, d_out, Activation::Relu, &mut seeded(4));
            let w = l.weight().unwrap();
            assert_eq!(w.shape(), &[d_out, d_in]);
            // the smaller Gram matrix is the identity
            let g = if d_out >= d_in {
                w.transpose().matmul(&w).unwrap()
            } else {
                w.matmul(&w.transpose()).unwrap()
            };
            let k = d_in.min(d_out);
            assert!(g.sub(&Tensor::eye(k)).unwrap().max_abs() < 1e-12);
        }
    }
}
