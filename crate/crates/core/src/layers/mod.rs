//! Layer families that are 1-Lipschitz for every parameter value.
//!
//! Each family stores free parameters and derives an effective map from them.
//! Evaluation goes through [`PreparedLayer`], a frozen form
//!
//! ```text
//! h ↦ φ(h·W_in + b)·W_out        (rows are samples; W_out optional)
//! ```
//!
//! while training records the same computation on a [`Tape`] so gradients
//! flow back to the free parameters.

mod activation;
mod orthogonal;
mod sandwich;
mod spectral;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use activation::Activation;
pub use orthogonal::OrthogonalLayer;
pub use sandwich::SandwichLayer;
pub use spectral::SpectralLayer;

use crate::autodiff::{Tape, Var};
use crate::error::{dim_err, Error, Result};
use crate::linalg::Tensor;
use crate::rng::Prng;
use crate::Scalar;

/// Which 1-Lipschitz construction a layer uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Spectral,
    Orthogonal,
    Sandwich,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Spectral, Family::Orthogonal, Family::Sandwich];

    pub fn name(self) -> &'static str {
        match self {
            Family::Spectral => "spectral",
            Family::Orthogonal => "orthogonal",
            Family::Sandwich => "sandwich",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "spectral" => Ok(Family::Spectral),
            "orthogonal" => Ok(Family::Orthogonal),
            "sandwich" => Ok(Family::Sandwich),
            other => Err(Error::Argument(format!("unknown layer family '{other}'"))),
        }
    }
}

/// A layer of any family.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub enum Layer<T> {
    Spectral(SpectralLayer<T>),
    Orthogonal(OrthogonalLayer<T>),
    Sandwich(SandwichLayer<T>),
}

impl<T: Scalar> Layer<T> {
    pub fn new(family: Family, d_in: usize, d_out: usize, act: Activation, rng: &mut Prng) -> Self {
        match family {
            Family::Spectral => Layer::Spectral(SpectralLayer::new(d_in, d_out, act, rng)),
            Family::Orthogonal => Layer::Orthogonal(OrthogonalLayer::new(d_in, d_out, act, rng)),
            Family::Sandwich => Layer::Sandwich(SandwichLayer::new(d_in, d_out, act, rng)),
        }
    }

    pub fn family(&self) -> Family {
        match self {
            Layer::Spectral(_) => Family::Spectral,
            Layer::Orthogonal(_) => Family::Orthogonal,
            Layer::Sandwich(_) => Family::Sandwich,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        match self {
            Layer::Spectral(l) => (l.d_in, l.d_out),
            Layer::Orthogonal(l) => (l.d_in, l.d_out),
            Layer::Sandwich(l) => (l.d_in, l.d_out),
        }
    }

    pub fn activation(&self) -> Activation {
        match self {
            Layer::Spectral(l) => l.activation,
            Layer::Orthogonal(l) => l.activation,
            Layer::Sandwich(l) => l.activation,
        }
    }

    /// Trainable tensors in a fixed order.
    pub fn params(&self) -> Vec<&Tensor<T>> {
        match self {
            Layer::Spectral(l) => vec![&l.w, &l.b],
            Layer::Orthogonal(l) => vec![&l.u, &l.v, &l.b],
            Layer::Sandwich(l) => vec![&l.x, &l.y, &l.d, &l.b],
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor<T>> {
        match self {
            Layer::Spectral(l) => vec![&mut l.w, &mut l.b],
            Layer::Orthogonal(l) => vec![&mut l.u, &mut l.v, &mut l.b],
            Layer::Sandwich(l) => vec![&mut l.x, &mut l.y, &mut l.d, &mut l.b],
        }
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    /// Refresh any cached state that training relies on (the spectral layer's
    /// warm-started singular vector); a no-op for the other families.
    pub fn sync(&mut self) {
        if let Layer::Spectral(l) = self {
            l.sync();
        }
    }

    /// Record the forward map on `tape`. `params` are this layer's parameter
    /// nodes in [`Layer::params`] order.
    pub fn record(&self, tape: &mut Tape<T>, params: &[Var], h: Var) -> Result<Var> {
        let expected = self.params().len();
        if params.len() != expected {
            return Err(dim_err(format!("layer expects {expected} parameter nodes, got {}", params.len())));
        }
        match self {
            Layer::Spectral(l) => l.record(tape, params, h),
            Layer::Orthogonal(l) => l.record(tape, params, h),
            Layer::Sandwich(l) => l.record(tape, params, h),
        }
    }

    /// Freeze the effective weights for evaluation.
    pub fn prepare(&self) -> Result<PreparedLayer<T>> {
        match self {
            Layer::Spectral(l) => l.prepare(),
            Layer::Orthogonal(l) => l.prepare(),
            Layer::Sandwich(l) => l.prepare(),
        }
    }

    /// Evaluate on the rows of `h`.
    pub fn forward(&self, h: &Tensor<T>) -> Result<Tensor<T>> {
        self.prepare()?.forward(h)
    }

    /// The certified Lipschitz bound of the layer, which is 1 by construction.
    pub fn lipschitz_certificate(&self) -> T {
        T::one()
    }

    /// Check shapes and finiteness, e.g. after loading a checkpoint.
    pub fn validate(&self) -> Result<()> {
        let (d_in, d_out) = self.dims();
        let k = d_in.min(d_out);
        let m = d_in.max(d_out) - k;
        let expected: Vec<[usize; 2]> = match self {
            Layer::Spectral(_) => vec![[d_out, d_in], [1, d_out]],
            Layer::Orthogonal(_) => vec![[k, k], [m, k], [1, d_out]],
            Layer::Sandwich(_) => vec![[d_out, d_out], [d_in, d_out], [1, d_out], [1, d_out]],
        };
        if d_in == 0 || d_out == 0 {
            return Err(dim_err("layer dimensions must be positive"));
        }
        for (p, want) in self.params().iter().zip(&expected) {
            if p.shape() != want {
                return Err(dim_err(format!(
                    "{} layer parameter has shape {:?}, expected {:?}",
                    self.family(),
                    p.shape(),
                    want
                )));
            }
            if !p.is_finite() {
                return Err(Error::Numeric(format!("{} layer parameter is not finite", self.family())));
            }
        }
        if let Layer::Spectral(l) = self {
            if !l.power_vector.is_empty() && l.power_vector.len() != d_in {
                return Err(dim_err("spectral power vector has the wrong length"));
            }
        }
        Ok(())
    }
}

/// Frozen layer `h ↦ φ(h·W_in + b)·W_out`.
#[derive(Clone, Debug)]
pub struct PreparedLayer<T> {
    pub w_in: Tensor<T>,
    pub b: Tensor<T>,
    pub activation: Activation,
    pub w_out: Option<Tensor<T>>,
}

impl<T: Scalar> PreparedLayer<T> {
    pub fn dim_in(&self) -> usize {
        self.w_in.rows()
    }

    pub fn dim_out(&self) -> usize {
        match &self.w_out {
            Some(w) => w.cols(),
            None => self.w_in.cols(),
        }
    }

    pub fn forward(&self, h: &Tensor<T>) -> Result<Tensor<T>> {
        if !h.is_matrix() || h.cols() != self.dim_in() {
            return Err(dim_err(format!(
                "layer expects N×{} input, got {:?}",
                self.dim_in(),
                h.shape()
            )));
        }
        let mut z = h.matmul_unchecked(&self.w_in);
        let c = z.cols();
        let act = self.activation;
        for row in z.data_mut().chunks_mut(c) {
            for (v, &bias) in row.iter_mut().zip(self.b.data()) {
                *v = act.apply(*v + bias);
            }
        }
        Ok(match &self.w_out {
            Some(w) => z.matmul_unchecked(w),
            None => z,
        })
    }
}

/// Stacked orthonormal factors `(Q₁, Q₂)` of the Cayley map, recorded on a tape.
/// `Q₂` is absent when `v` has no rows.
pub(crate) fn cayley_on_tape<T: Scalar>(
    tape: &mut Tape<T>,
    u: Var,
    v: Var,
) -> Result<(Var, Option<Var>)> {
    let k = tape.value(u).rows();
    let has_v = tape.value(v).rows() > 0;
    let ut = tape.transpose(u);
    let mut z = tape.sub(u, ut)?;
    let vt = tape.transpose(v);
    if has_v {
        let vtv = tape.matmul(vt, v)?;
        z = tape.add(z, vtv)?;
    }
    let eye = tape.constant(Tensor::eye(k));
    let i_plus_z = tape.add(eye, z)?;
    let i_minus_z = tape.sub(eye, z)?;
    let q1 = tape.solve(i_plus_z, i_minus_z)?;
    let q2 = if has_v {
        // Q₂ᵀ = −2 (I+Z)⁻ᵀ Vᵀ
        let ipz_t = tape.transpose(i_plus_z);
        let s = tape.solve(ipz_t, vt)?;
        let st = tape.transpose(s);
        Some(tape.scale(st, T::of(-2.0)))
    } else {
        None
    };
    Ok((q1, q2))
}

pub(crate) fn gaussian<T: Scalar>(rows: usize, cols: usize, std: f64, rng: &mut Prng) -> Tensor<T> {
    Tensor::from_fn(rows, cols, |_, _| crate::rng::normal::<T>(rng) * T::of(std))
}
