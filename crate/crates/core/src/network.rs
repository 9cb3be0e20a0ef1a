//! Full models: the unconstrained MLP and LipNet, plus Lipschitz reporting.
//!
//! LipNet evaluates `y = √η · f_K(⋯ f_1(√η · x))` with 1-Lipschitz layers
//! `f_k` and `η = e^ψ`, so `η` is a certified Lipschitz bound of the whole
//! network.

use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Var};
use crate::data::Domain;
use crate::error::{dim_err, Error, Result};
use crate::layers::{Activation, Family, Layer, PreparedLayer};
use crate::linalg::{distance, power_iteration, Tensor};
use crate::map::{check_input, eval_finite, BatchMap};
use crate::rng::{seeded, uniform, Prng};
use crate::Scalar;

pub const CHECKPOINT_SCHEMA: &str = "lipfit-checkpoint/1";

/// Layer widths of a network with `depth` hidden layers of equal `width`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub input_dim: usize,
    pub output_dim: usize,
    pub width: usize,
    pub depth: usize,
    pub activation: Activation,
}

impl Architecture {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 || self.width == 0 {
            return Err(Error::Argument("architecture dimensions must be positive".into()));
        }
        Ok(())
    }

    fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.input_dim];
        d.extend(std::iter::repeat_n(self.width, self.depth));
        d.push(self.output_dim);
        d
    }
}

/// Something the trainers can optimize: a fixed list of parameter tensors and
/// a forward map that can be recorded on a tape.
pub trait Trainable<T: Scalar> {
    fn params(&self) -> Vec<&Tensor<T>>;
    fn params_mut(&mut self) -> Vec<&mut Tensor<T>>;
    /// `params` are tape nodes in [`Trainable::params`] order; `x` is `N×n`.
    fn record(&self, tape: &mut Tape<T>, params: &[Var], x: Var) -> Result<Var>;
    /// Refresh cached state after a parameter update.
    fn sync(&mut self) {}

    fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }
}

// ---------------------------------------------------------------- MLP

/// `h_k = φ(W_k h_{k−1} + b_k)` for the hidden layers and an affine head.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct MlpNet<T> {
    pub activation: Activation,
    /// `W_k` with shape `d_k × d_{k−1}`.
    pub weights: Vec<Tensor<T>>,
    /// `b_k` with shape `1 × d_k`.
    pub biases: Vec<Tensor<T>>,
}

impl<T: Scalar> MlpNet<T> {
    /// Fan-in scaled Gaussian weights (`√(2/fan_in)` for ReLU, `√(1/fan_in)`
    /// otherwise) and zero biases.
    pub fn new(arch: &Architecture, seed: u64) -> Result<Self> {
        arch.validate()?;
        let mut rng = seeded(seed);
        let dims = arch.dims();
        let gain = if arch.activation == Activation::Relu { 2.0 } else { 1.0 };
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in dims.windows(2) {
            let std = (gain / w[0] as f64).sqrt();
            weights.push(crate::layers::gaussian(w[1], w[0], std, &mut rng));
            biases.push(Tensor::zeros(1, w[1]));
        }
        Self::from_parts(arch.activation, weights, biases)
    }

    pub fn from_parts(activation: Activation, weights: Vec<Tensor<T>>, biases: Vec<Tensor<T>>) -> Result<Self> {
        let net = Self {
            activation,
            weights,
            biases,
        };
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.is_empty() || self.weights.len() != self.biases.len() {
            return Err(dim_err("MLP needs matching, non-empty weight and bias lists"));
        }
        for (k, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            if !w.is_matrix() || b.shape() != [1, w.rows()] {
                return Err(dim_err(format!("layer {k}: weight {:?} and bias {:?} disagree", w.shape(), b.shape())));
            }
            if k > 0 && self.weights[k - 1].rows() != w.cols() {
                return Err(dim_err(format!("layer {k} expects {} inputs, previous layer gives {}", w.cols(), self.weights[k - 1].rows())));
            }
            if !w.is_finite() || !b.is_finite() {
                return Err(Error::Numeric(format!("layer {k} has non-finite parameters")));
            }
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.weights.len() - 1
    }

    /// Sum of squared parameters, the weight-decay penalty.
    pub fn squared_norm(&self) -> T {
        self.weights
            .iter()
            .chain(&self.biases)
            .flat_map(|t| t.data().iter())
            .map(|&v| v * v)
            .sum()
    }
}

impl<T: Scalar> BatchMap<T> for MlpNet<T> {
    fn dim_in(&self) -> usize {
        self.weights[0].cols()
    }

    fn dim_out(&self) -> usize {
        self.weights[self.weights.len() - 1].rows()
    }

    fn eval_batch(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        check_input(self, x)?;
        let last = self.weights.len() - 1;
        let mut h = x.clone();
        for (k, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let act = if k == last { Activation::Identity } else { self.activation };
            let layer = PreparedLayer {
                w_in: w.transpose(),
                b: b.clone(),
                activation: act,
                w_out: None,
            };
            h = layer.forward(&h)?;
        }
        Ok(h)
    }
}

impl<T: Scalar> Trainable<T> for MlpNet<T> {
    fn params(&self) -> Vec<&Tensor<T>> {
        self.weights.iter().zip(&self.biases).flat_map(|(w, b)| [w, b]).collect()
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor<T>> {
        self.weights
            .iter_mut()
            .zip(self.biases.iter_mut())
            .flat_map(|(w, b)| [w, b])
            .collect()
    }

    fn record(&self, tape: &mut Tape<T>, params: &[Var], x: Var) -> Result<Var> {
        if params.len() != 2 * self.weights.len() {
            return Err(dim_err("MLP parameter node count mismatch"));
        }
        let last = self.weights.len() - 1;
        let mut h = x;
        for k in 0..=last {
            let wt = tape.transpose(params[2 * k]);
            let z = tape.matmul(h, wt)?;
            let z = tape.add_row(z, params[2 * k + 1])?;
            h = if k == last { z } else { tape.activate(z, self.activation) };
        }
        Ok(h)
    }
}

// ---------------------------------------------------------------- LipNet

/// Network of 1-Lipschitz layers with trainable gain `η = e^ψ`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "LipNetRepr<T>", into = "LipNetRepr<T>")]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct LipNet<T: Scalar> {
    psi: Tensor<T>,
    family: Family,
    activation: Activation,
    layers: Vec<Layer<T>>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
struct LipNetRepr<T> {
    psi: T,
    family: Family,
    activation: Activation,
    layers: Vec<Layer<T>>,
}

impl<T: Scalar> From<LipNet<T>> for LipNetRepr<T> {
    fn from(net: LipNet<T>) -> Self {
        Self {
            psi: net.psi(),
            family: net.family,
            activation: net.activation,
            layers: net.layers,
        }
    }
}

impl<T: Scalar> TryFrom<LipNetRepr<T>> for LipNet<T> {
    type Error = Error;
    fn try_from(r: LipNetRepr<T>) -> Result<Self> {
        LipNet::from_layers(r.psi, r.family, r.activation, r.layers)
    }
}

impl<T: Scalar> LipNet<T> {
    /// Random layers of `family`; hidden layers use `arch.activation`, the
    /// last layer is linear. `ψ` starts at `ln(l_data) + 0.5`.
    pub fn new(arch: &Architecture, family: Family, l_data: T, seed: u64) -> Result<Self> {
        arch.validate()?;
        if !(l_data > T::zero() && l_data.is_finite()) {
            return Err(Error::Argument("L_data must be positive to initialize ψ".into()));
        }
        let mut rng: Prng = seeded(seed);
        let dims = arch.dims();
        let last = dims.len() - 2;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                let act = if k == last { Activation::Identity } else { arch.activation };
                Layer::new(family, w[0], w[1], act, &mut rng)
            })
            .collect();
        Self::from_layers(l_data.ln() + T::of(0.5), family, arch.activation, layers)
    }

    pub fn from_layers(psi: T, family: Family, activation: Activation, layers: Vec<Layer<T>>) -> Result<Self> {
        if !psi.is_finite() {
            return Err(Error::Numeric("ψ must be finite".into()));
        }
        if layers.is_empty() {
            return Err(dim_err("LipNet needs at least one layer"));
        }
        for (k, l) in layers.iter().enumerate() {
            l.validate()?;
            if k > 0 && layers[k - 1].dims().1 != l.dims().0 {
                return Err(dim_err(format!("layer {k} input does not match the previous output")));
            }
        }
        Ok(Self {
            psi: Tensor::scalar(psi),
            family,
            activation,
            layers,
        })
    }

    pub fn psi(&self) -> T {
        self.psi.item()
    }

    pub fn set_psi(&mut self, psi: T) {
        self.psi = Tensor::scalar(psi);
    }

    /// `η = e^ψ`.
    pub fn eta(&self) -> T {
        self.psi().exp()
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer<T>] {
        &mut self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    /// Product of layer certificates (all 1) times `η`.
    pub fn certified_lipschitz(&self) -> T {
        self.layers
            .iter()
            .map(Layer::lipschitz_certificate)
            .fold(self.eta(), |a, b| a * b)
    }

    pub fn prepare(&self) -> Result<PreparedLipNet<T>> {
        Ok(PreparedLipNet {
            gain: (self.psi() * T::of(0.5)).exp(),
            layers: self.layers.iter().map(Layer::prepare).collect::<Result<_>>()?,
        })
    }
}

impl<T: Scalar> Trainable<T> for LipNet<T> {
    /// `ψ` first, then each layer's parameters.
    fn params(&self) -> Vec<&Tensor<T>> {
        let mut p = vec![&self.psi];
        for l in &self.layers {
            p.extend(l.params());
        }
        p
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor<T>> {
        let mut p = vec![&mut self.psi];
        for l in &mut self.layers {
            p.extend(l.params_mut());
        }
        p
    }

    fn record(&self, tape: &mut Tape<T>, params: &[Var], x: Var) -> Result<Var> {
        if params.len() != self.params().len() {
            return Err(dim_err("LipNet parameter node count mismatch"));
        }
        let half = tape.scale(params[0], T::of(0.5));
        let gain = tape.exp(half);
        let mut h = tape.mul_scalar(x, gain)?;
        let mut offset = 1;
        for l in &self.layers {
            let k = l.params().len();
            h = l.record(tape, &params[offset..offset + k], h)?;
            offset += k;
        }
        tape.mul_scalar(h, gain)
    }

    fn sync(&mut self) {
        self.layers.iter_mut().for_each(Layer::sync);
    }
}

impl<T: Scalar> BatchMap<T> for LipNet<T> {
    fn dim_in(&self) -> usize {
        self.layers[0].dims().0
    }

    fn dim_out(&self) -> usize {
        self.layers[self.layers.len() - 1].dims().1
    }

    fn eval_batch(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        self.prepare()?.eval_batch(x)
    }
}

/// LipNet with frozen effective weights, for repeated evaluation.
#[derive(Clone, Debug)]
pub struct PreparedLipNet<T> {
    gain: T,
    layers: Vec<PreparedLayer<T>>,
}

impl<T: Scalar> BatchMap<T> for PreparedLipNet<T> {
    fn dim_in(&self) -> usize {
        self.layers[0].dim_in()
    }

    fn dim_out(&self) -> usize {
        self.layers[self.layers.len() - 1].dim_out()
    }

    fn eval_batch(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        check_input(self, x)?;
        let mut h = x.scale(self.gain);
        for l in &self.layers {
            h = l.forward(&h)?;
        }
        Ok(h.scale(self.gain))
    }
}

// ---------------------------------------------------------------- Model

/// Either network kind, as stored in checkpoints.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub enum Model<T: Scalar> {
    Mlp(MlpNet<T>),
    #[serde(rename = "lipnet")]
    Lip(LipNet<T>),
}

impl<T: Scalar> Model<T> {
    /// `η` for LipNet; `None` for the MLP, which carries no certificate.
    pub fn certified_lipschitz(&self) -> Option<T> {
        match self {
            Model::Mlp(_) => None,
            Model::Lip(n) => Some(n.certified_lipschitz()),
        }
    }

    pub fn prepare(&self) -> Result<PreparedModel<T>> {
        Ok(match self {
            Model::Mlp(n) => PreparedModel::Mlp(n.clone()),
            Model::Lip(n) => PreparedModel::Lip(n.prepare()?),
        })
    }

    pub fn param_count(&self) -> usize {
        match self {
            Model::Mlp(n) => n.param_count(),
            Model::Lip(n) => n.param_count(),
        }
    }

    pub fn to_checkpoint_json(&self) -> Result<String>
    where
        T: Serialize,
    {
        let mut value = serde_json::to_value(self)?;
        if let serde_json::Value::Object(map) = &mut value {
            map.insert("schema".into(), serde_json::Value::String(CHECKPOINT_SCHEMA.into()));
        }
        Ok(serde_json::to_string_pretty(&value)?)
    }

    pub fn from_checkpoint_json(text: &str) -> Result<Self>
    where
        T: for<'de> Deserialize<'de>,
    {
        let mut value: serde_json::Value = serde_json::from_str(text)?;
        let schema = value.get("schema").and_then(|s| s.as_str()).unwrap_or("");
        if schema != CHECKPOINT_SCHEMA {
            return Err(Error::Format(format!("unsupported checkpoint schema '{schema}' (expected {CHECKPOINT_SCHEMA})")));
        }
        if let serde_json::Value::Object(map) = &mut value {
            map.remove("schema");
        }
        let model: Model<T> = serde_json::from_value(value)?;
        if let Model::Mlp(n) = &model {
            n.validate()?;
        }
        Ok(model)
    }
}

impl<T: Scalar> BatchMap<T> for Model<T> {
    fn dim_in(&self) -> usize {
        match self {
            Model::Mlp(n) => n.dim_in(),
            Model::Lip(n) => n.dim_in(),
        }
    }

    fn dim_out(&self) -> usize {
        match self {
            Model::Mlp(n) => n.dim_out(),
            Model::Lip(n) => n.dim_out(),
        }
    }

    fn eval_batch(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        match self {
            Model::Mlp(n) => n.eval_batch(x),
            Model::Lip(n) => n.eval_batch(x),
        }
    }
}

#[derive(Clone, Debug)]
pub enum PreparedModel<T> {
    Mlp(MlpNet<T>),
    Lip(PreparedLipNet<T>),
}

impl<T: Scalar> BatchMap<T> for PreparedModel<T> {
    fn dim_in(&self) -> usize {
        match self {
            PreparedModel::Mlp(n) => n.dim_in(),
            PreparedModel::Lip(n) => n.dim_in(),
        }
    }

    fn dim_out(&self) -> usize {
        match self {
            PreparedModel::Mlp(n) => n.dim_out(),
            PreparedModel::Lip(n) => n.dim_out(),
        }
    }

    fn eval_batch(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        match self {
            PreparedModel::Mlp(n) => n.eval_batch(x),
            PreparedModel::Lip(n) => n.eval_batch(x),
        }
    }
}

// ---------------------------------------------------------------- empirical bound

/// Largest difference quotient found, with the search budget that produced it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalLipschitz<T> {
    pub value: T,
    pub pairs: usize,
    pub refine_steps: usize,
}

/// Number of best pairs that get refined.
const REFINED_PAIRS: usize = 64;

/// Lower bound on `Lip(f)` over `domain` from sampled difference quotients.
///
/// `pairs` uniform pairs are scored; the best ones are refined by
/// `refine_steps` bisections, each keeping the half-segment with the larger
/// quotient (which never decreases it). At the refined points the
/// finite-difference Jacobian is formed and a symmetric pair along its top
/// right singular vector is probed. Every quotient comes from two actual
/// domain points, so the maximum is a valid lower bound.
pub fn empirical_lipschitz_net<T, F>(
    f: &F,
    domain: &Domain<T>,
    pairs: usize,
    refine_steps: usize,
    seed: u64,
) -> Result<EmpiricalLipschitz<T>>
where
    T: Scalar,
    F: BatchMap<T> + ?Sized,
{
    if pairs == 0 {
        return Err(Error::Argument("need at least one pair".into()));
    }
    let n = domain.dim();
    if f.dim_in() != n {
        return Err(dim_err(format!("map takes {} inputs, domain has {n}", f.dim_in())));
    }
    let mut rng = seeded(seed);
    let mut draw = |count: usize| -> Tensor<T> {
        Tensor::from_fn(count, n, |_, j| uniform(&mut rng, domain.lower()[j], domain.upper()[j]))
    };
    let a = draw(pairs);
    let b = draw(pairs);
    let fa = eval_finite(f, &a)?;
    let fb = eval_finite(f, &b)?;
    let quotient = |x: &[T], y: &[T], fx: &[T], fy: &[T]| {
        let d = distance(x, y);
        if d > T::zero() {
            distance(fx, fy) / d
        } else {
            T::zero()
        }
    };
    let mut scored: Vec<(T, usize)> = (0..pairs)
        .map(|i| (quotient(a.row(i), b.row(i), fa.row(i), fb.row(i)), i))
        .collect();
    let mut best = scored.iter().map(|s| s.0).fold(T::zero(), T::max);
    scored.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal));
    let keep: Vec<usize> = scored.iter().take(REFINED_PAIRS).map(|s| s.1).collect();
    let r = keep.len();
    let mut pa = Tensor::from_fn(r, n, |i, j| a.get(keep[i], j));
    let mut pb = Tensor::from_fn(r, n, |i, j| b.get(keep[i], j));
    let mut qa = Tensor::from_fn(r, f.dim_out(), |i, j| fa.get(keep[i], j));
    let mut qb = Tensor::from_fn(r, f.dim_out(), |i, j| fb.get(keep[i], j));

    for _ in 0..refine_steps {
        let mid = Tensor::from_fn(r, n, |i, j| (pa.get(i, j) + pb.get(i, j)) * T::of(0.5));
        let fm = eval_finite(f, &mid)?;
        for i in 0..r {
            let left = quotient(pa.row(i), mid.row(i), qa.row(i), fm.row(i));
            let right = quotient(mid.row(i), pb.row(i), fm.row(i), qb.row(i));
            best = best.max(left).max(right);
            if left >= right {
                pb.row_mut(i).copy_from_slice(mid.row(i));
                qb.row_mut(i).copy_from_slice(fm.row(i));
            } else {
                pa.row_mut(i).copy_from_slice(mid.row(i));
                qa.row_mut(i).copy_from_slice(fm.row(i));
            }
        }
    }

    let min_width = (0..n).map(|j| domain.width(j)).fold(T::infinity(), T::min);
    let h = min_width * T::of(1e-5);
    let centers = Tensor::from_fn(r, n, |i, j| {
        let c = (pa.get(i, j) + pb.get(i, j)) * T::of(0.5);
        c.max(domain.lower()[j] + h).min(domain.upper()[j] - h)
    });
    best = best.max(directional_probe(f, &centers, h)?);
    Ok(EmpiricalLipschitz {
        value: best,
        pairs,
        refine_steps,
    })
}

/// At each row `c` of `centers`, estimate the Jacobian by central differences,
/// take its top right singular vector `v`, and return the largest quotient of
/// the pairs `(c − h v, c + h v)`.
fn directional_probe<T, F>(f: &F, centers: &Tensor<T>, h: T) -> Result<T>
where
    T: Scalar,
    F: BatchMap<T> + ?Sized,
{
    let (r, n, m) = (centers.rows(), centers.cols(), f.dim_out());
    if r == 0 {
        return Ok(T::zero());
    }
    let mut probes = Tensor::zeros(2 * n * r, n);
    for i in 0..r {
        for k in 0..n {
            for (s, sign) in [T::one(), -T::one()].into_iter().enumerate() {
                let row = probes.row_mut((i * n + k) * 2 + s);
                row.copy_from_slice(centers.row(i));
                row[k] += sign * h;
            }
        }
    }
    let fp = eval_finite(f, &probes)?;
    let mut pairs = Tensor::zeros(2 * r, n);
    for i in 0..r {
        let jac = Tensor::from_fn(m, n, |a, k| {
            (fp.get((i * n + k) * 2, a) - fp.get((i * n + k) * 2 + 1, a)) / (h + h)
        });
        let v = if jac.max_abs() > T::zero() {
            power_iteration(&jac, &vec![T::one(); n], T::of(1e-12), 1000).v
        } else {
            vec![T::zero(); n]
        };
        for (s, sign) in [T::one(), -T::one()].into_iter().enumerate() {
            let row = pairs.row_mut(2 * i + s);
            for k in 0..n {
                row[k] = centers.get(i, k) + sign * h * v[k];
            }
        }
    }
    let fq = eval_finite(f, &pairs)?;
    let mut best = T::zero();
    for i in 0..r {
        let d = distance(pairs.row(2 * i), pairs.row(2 * i + 1));
        if d > T::zero() {
            best = best.max(distance(fq.row(2 * i), fq.row(2 * i + 1)) / d);
        }
    }
    Ok(best)
}

/// Lipschitz quotient statistics of `f` over random pairs: the maximum ratio.
pub fn max_pair_ratio<T, F>(f: &F, a: &Tensor<T>, b: &Tensor<T>) -> Result<T>
where
    T: Scalar,
    F: BatchMap<T> + ?Sized,
{
    let (fa, fb) = (eval_finite(f, a)?, eval_finite(f, b)?);
    let mut best = T::zero();
    for i in 0..a.rows() {
        let d = distance(a.row(i), b.row(i));
        if d > T::zero() {
            best = best.max(distance(fa.row(i), fb.row(i)) / d);
        }
    }
    Ok(best)
}
