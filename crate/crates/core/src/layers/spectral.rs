use serde::{Deserialize, Serialize};

use super::{gaussian, Activation, PreparedLayer};
use crate::autodiff::{Tape, Var};
use crate::error::Result;
use crate::linalg::{power_iteration, Tensor, DEFAULT_TOL};
use crate::rng::Prng;
use crate::Scalar;

/// Power-iteration steps taken per training step from the cached vector.
const WARM_ITERS: usize = 10;
const PREPARE_MAX_ITER: usize = 20_000;

/// `h ↦ φ(W h / σ̄(W) + b)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct SpectralLayer<T> {
    pub d_in: usize,
    pub d_out: usize,
    pub activation: Activation,
    /// `d_out × d_in`
    pub w: Tensor<T>,
    /// `1 × d_out`
    pub b: Tensor<T>,
    /// Warm-start right singular vector estimate (length `d_in`).
    #[serde(default)]
    pub power_vector: Vec<T>,
}

impl<T: Scalar> SpectralLayer<T> {
    pub fn new(d_in: usize, d_out: usize, activation: Activation, rng: &mut Prng) -> Self {
        let w = gaussian(d_out, d_in, 1.0 / (d_in as f64).sqrt(), rng);
        let mut layer = Self {
            d_in,
            d_out,
            activation,
            w,
            b: Tensor::zeros(1, d_out),
            power_vector: Vec::new(),
        };
        layer.sync();
        layer
    }

    /// Advance the cached singular vector a few power-iteration steps.
    pub fn sync(&mut self) {
        let start = if self.power_vector.len() == self.d_in {
            self.power_vector.clone()
        } else {
            vec![T::one(); self.d_in]
        };
        let run = power_iteration(&self.w, &start, T::of(DEFAULT_TOL), WARM_ITERS);
        self.power_vector = run.v;
    }

    /// `σ̄(W)` from a cold all-ones start and from the cached vector, keeping the
    /// larger estimate. Both are lower bounds on the true value, and the
    /// Frobenius norm (an upper bound) is used if neither run converges.
    pub fn sigma(&self) -> T {
        let tol = T::of(DEFAULT_TOL);
        let cold = power_iteration(&self.w, &vec![T::one(); self.d_in], tol, PREPARE_MAX_ITER);
        let mut best = cold.sigma;
        let mut converged = cold.converged;
        if self.power_vector.len() == self.d_in {
            let warm = power_iteration(&self.w, &self.power_vector, tol, PREPARE_MAX_ITER);
            if warm.sigma > best {
                best = warm.sigma;
                converged = warm.converged;
            }
        }
        if converged {
            best
        } else {
            self.w.frobenius()
        }
    }

    pub(super) fn prepare(&self) -> Result<PreparedLayer<T>> {
        let sigma = self.sigma();
        let w_in = if sigma > T::zero() {
            self.w.transpose().scale(sigma.recip())
        } else {
            Tensor::zeros(self.d_in, self.d_out)
        };
        Ok(PreparedLayer {
            w_in,
            b: self.b.clone(),
            activation: self.activation,
            w_out: None,
        })
    }

    /// `σ = uᵀWv` with `u, v` frozen at the cached singular pair.
    pub(super) fn record(&self, tape: &mut Tape<T>, params: &[Var], h: Var) -> Result<Var> {
        let (w, b) = (params[0], params[1]);
        let v = if self.power_vector.len() == self.d_in {
            self.power_vector.clone()
        } else {
            vec![T::one(); self.d_in]
        };
        let wv: Vec<T> = (0..self.d_out)
            .map(|i| crate::linalg::dot(self.w.row(i), &v))
            .collect();
        let n = crate::linalg::norm(&wv);
        let u: Vec<T> = if n > T::zero() {
            wv.iter().map(|&x| x / n).collect()
        } else {
            vec![T::zero(); self.d_out]
        };
        let u = tape.constant(Tensor::row_vector(u));
        let v = tape.constant(Tensor::col_vector(v));
        let uw = tape.matmul(u, w)?;
        let sigma = tape.matmul(uw, v)?;
        let inv = tape.recip(sigma);
        let wn = tape.mul_scalar(w, inv)?;
        let wt = tape.transpose(wn);
        let z = tape.matmul(h, wt)?;
        let z = tape.add_row(z, b)?;
        Ok(tape.activate(z, self.activation))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::distance;
    use crate::rng::seeded;

    #[test]
    fn tight_along_top_singular_direction() {
        let mut l = SpectralLayer::<f64>::new(4, 3, Activation::Identity, &mut seeded(2));
        l.b = Tensor::zeros(1, 3);
        let sigma = crate::linalg::spectral_norm(&l.w, 1e-12, 10_000).unwrap();
        let run = power_iteration(&l.w, &[1.0; 4], 1e-12, 10_000);
        let p = l.prepare().unwrap();
        let x = Tensor::row_vector(run.v.clone());
        let y = p.forward(&x).unwrap();
        let ratio = crate::linalg::norm(y.data()) / crate::linalg::norm(&run.v);
        assert!(ratio >= 0.999, "ratio {ratio}, sigma {sigma}");
        assert!(ratio <= 1.0 + 1e-9);
        let z = Tensor::row_vector(vec![0.0; 4]);
        assert_eq!(distance(p.forward(&z).unwrap().data(), &[0.0; 3]), 0.0);
    }

    #[test]
    fn warm_start_tracks_updates() {
        let mut l = SpectralLayer::<f64>::new(5, 5, Activation::Tanh, &mut seeded(3));
        for _ in 0..50 {
            l.sync();
        }
        let cold = power_iteration(&l.w, &[1.0; 5], 1e-12, 10_000).sigma;
        let wv: Vec<f64> = (0..5).map(|i| crate::linalg::dot(l.w.row(i), &l.power_vector)).collect();
        assert!((crate::linalg::norm(&wv) - cold).abs() / cold < 1e-6);
    }
}
