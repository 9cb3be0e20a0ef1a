//! Domains, sampled datasets, and the loss functionals defined on them.

mod cover;
mod io;

use serde::{Deserialize, Serialize};

pub use cover::{covering_radius, CoverEstimate, CoverMode, PointIndex};
pub use io::{read_dataset, read_dataset_file, write_dataset, write_dataset_file};

use crate::error::{dim_err, Error, Result};
use crate::linalg::{distance, Tensor};
use crate::map::{eval_finite, BatchMap};
use crate::rng::{in_ball, seeded, uniform};
use crate::Scalar;

/// Axis-aligned box `∏ [lower_i, upper_i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct Domain<T> {
    lower: Vec<T>,
    upper: Vec<T>,
}

impl<T: Scalar> Domain<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::Domain(format!(
                "bounds must be non-empty and of equal length (got {} and {})",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (&l, &u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::Domain(format!("axis {i}: need finite lower < upper, got [{l}, {u}]")));
            }
        }
        Ok(Self { lower, upper })
    }

    /// `[0, 1]ⁿ`.
    pub fn unit_cube(n: usize) -> Result<Self> {
        Self::new(vec![T::zero(); n], vec![T::one(); n])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn width(&self, i: usize) -> T {
        self.upper[i] - self.lower[i]
    }

    pub fn diameter(&self) -> T {
        distance(&self.lower, &self.upper)
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&l, &u))| v >= l && v <= u)
    }

    pub fn clamp(&self, x: &mut [T]) {
        for (v, (&l, &u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.max(l).min(u);
        }
    }

    pub(crate) fn check_points(&self, points: &Tensor<T>) -> Result<()> {
        if !points.is_matrix() || points.cols() != self.dim() {
            return Err(dim_err(format!(
                "points must be N×{}, got {:?}",
                self.dim(),
                points.shape()
            )));
        }
        Ok(())
    }
}

/// `count` i.i.d. uniform points in `domain` (one per row).
pub fn sample_uniform<T: Scalar>(domain: &Domain<T>, count: usize, seed: u64) -> Result<Tensor<T>> {
    if count == 0 {
        return Err(Error::Argument("sample count must be at least 1".into()));
    }
    let mut rng = seeded(seed);
    let n = domain.dim();
    let mut data = Vec::with_capacity(count * n);
    for _ in 0..count {
        for i in 0..n {
            data.push(uniform(&mut rng, domain.lower[i], domain.upper[i]));
        }
    }
    Ok(Tensor::from_parts(vec![count, n], data))
}

/// Cartesian grid with `per_dim` equally spaced points per axis, endpoints
/// included; the last coordinate varies fastest.
pub fn sample_grid<T: Scalar>(domain: &Domain<T>, per_dim: usize) -> Result<Tensor<T>> {
    if per_dim < 2 {
        return Err(Error::Argument("grid needs at least 2 points per axis".into()));
    }
    let n = domain.dim();
    let total = per_dim
        .checked_pow(n as u32)
        .ok_or_else(|| Error::Argument("grid is too large".into()))?;
    let axis = |i: usize, k: usize| {
        domain.lower[i] + domain.width(i) * T::of(k as f64) / T::of((per_dim - 1) as f64)
    };
    let mut data = Vec::with_capacity(total * n);
    let mut idx = vec![0usize; n];
    for _ in 0..total {
        for (i, &k) in idx.iter().enumerate() {
            data.push(axis(i, k));
        }
        for i in (0..n).rev() {
            idx[i] += 1;
            if idx[i] < per_dim {
                break;
            }
            idx[i] = 0;
        }
    }
    Ok(Tensor::from_parts(vec![total, n], data))
}

/// A `per_dim`-point grid (skipped when `per_dim` is 0) followed by `uniform`
/// random points.
pub fn grid_plus_uniform<T: Scalar>(domain: &Domain<T>, per_dim: usize, uniform: usize, seed: u64) -> Result<Tensor<T>> {
    match (per_dim, uniform) {
        (0, 0) => Err(Error::Argument("need grid or uniform points".into())),
        (0, u) => sample_uniform(domain, u, seed),
        (g, 0) => sample_grid(domain, g),
        (g, u) => sample_grid(domain, g)?.vconcat(&sample_uniform(domain, u, seed)?),
    }
}

/// Sampled input/output pairs with a bound on the output noise.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset<T> {
    inputs: Tensor<T>,
    outputs: Tensor<T>,
    noise_bound: T,
}

impl<T: Scalar> LabeledDataset<T> {
    pub fn new(inputs: Tensor<T>, outputs: Tensor<T>, noise_bound: T) -> Result<Self> {
        if !inputs.is_matrix() || !outputs.is_matrix() {
            return Err(dim_err("inputs and outputs must be matrices"));
        }
        if inputs.rows() == 0 || inputs.rows() != outputs.rows() {
            return Err(dim_err(format!(
                "need N ≥ 1 matching rows, got {} inputs and {} outputs",
                inputs.rows(),
                outputs.rows()
            )));
        }
        if inputs.cols() == 0 || outputs.cols() == 0 {
            return Err(dim_err("input and output dimensions must be positive"));
        }
        if !(noise_bound >= T::zero() && noise_bound.is_finite()) {
            return Err(Error::Argument("noise bound must be finite and ≥ 0".into()));
        }
        if !inputs.is_finite() || !outputs.is_finite() {
            return Err(Error::Numeric("dataset contains non-finite values".into()));
        }
        Ok(Self {
            inputs,
            outputs,
            noise_bound,
        })
    }

    pub fn inputs(&self) -> &Tensor<T> {
        &self.inputs
    }

    pub fn outputs(&self) -> &Tensor<T> {
        &self.outputs
    }

    pub fn noise_bound(&self) -> T {
        self.noise_bound
    }

    pub fn len(&self) -> usize {
        self.inputs.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.outputs.cols()
    }

    /// Error naming the first input outside `domain`, if any.
    pub fn check_within(&self, domain: &Domain<T>) -> Result<()> {
        domain.check_points(&self.inputs)?;
        for i in 0..self.len() {
            if !domain.contains(self.inputs.row(i)) {
                return Err(Error::Domain(format!("input {i} {:?} lies outside the domain", self.inputs.row(i))));
            }
        }
        Ok(())
    }
}

/// Label `points` with `g` plus noise drawn uniformly from the ball of radius
/// `noise_bound` (no noise when the bound is zero).
pub fn make_dataset<T: Scalar, G: BatchMap<T> + ?Sized>(
    g: &G,
    points: &Tensor<T>,
    noise_bound: T,
    seed: u64,
) -> Result<LabeledDataset<T>> {
    if !(noise_bound >= T::zero()) {
        return Err(Error::Argument("noise bound must be ≥ 0".into()));
    }
    let mut outputs = eval_finite(g, points)?;
    if noise_bound > T::zero() {
        let mut rng = seeded(seed);
        let m = outputs.cols();
        for row in outputs.data_mut().chunks_mut(m) {
            for (y, e) in row.iter_mut().zip(in_ball(&mut rng, m, noise_bound)) {
                *y += e;
            }
        }
    }
    LabeledDataset::new(points.clone(), outputs, noise_bound)
}

fn pair_scan<T: Scalar>(ds: &LabeledDataset<T>, mut visit: impl FnMut(T, &[T], &[T])) -> Result<()> {
    let (x, y) = (ds.inputs(), ds.outputs());
    if ds.len() < 2 {
        return Err(Error::Argument("need at least two samples".into()));
    }
    for i in 0..ds.len() {
        for j in i + 1..ds.len() {
            let (xi, xj) = (x.row(i), x.row(j));
            if xi == xj {
                if y.row(i) != y.row(j) {
                    return Err(Error::InfeasibleData(format!(
                        "samples {i} and {j} share the input {xi:?} but have different outputs"
                    )));
                }
                continue;
            }
            visit(distance(xi, xj), y.row(i), y.row(j));
        }
    }
    Ok(())
}

/// `L_data = max_{i<j} ‖y_i − y_j‖ / ‖x_i − x_j‖` over all pairs.
///
/// Exactly repeated inputs with equal outputs are skipped; with different
/// outputs no Lipschitz interpolant exists and an error is returned.
pub fn empirical_lipschitz_lower<T: Scalar>(ds: &LabeledDataset<T>) -> Result<T> {
    let mut best = T::zero();
    pair_scan(ds, |dx, yi, yj| best = best.max(distance(yi, yj) / dx))?;
    Ok(best)
}

/// The same maximum taken separately for every output coordinate.
pub fn empirical_lipschitz_per_output<T: Scalar>(ds: &LabeledDataset<T>) -> Result<Vec<T>> {
    let mut best = vec![T::zero(); ds.output_dim()];
    pair_scan(ds, |dx, yi, yj| {
        for (b, (&a, &c)) in best.iter_mut().zip(yi.iter().zip(yj)) {
            *b = b.max((a - c).abs() / dx);
        }
    })?;
    Ok(best)
}

/// Mean squared error `(1/N) Σ‖f(x_i) − y_i‖²` and `max_i ‖f(x_i) − y_i‖`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats<T> {
    pub mse: T,
    pub max: T,
}

/// Error statistics of `predictions` against `targets`, summed in row order.
pub fn error_stats<T: Scalar>(predictions: &Tensor<T>, targets: &Tensor<T>) -> Result<ErrorStats<T>> {
    if predictions.shape() != targets.shape() || predictions.rows() == 0 {
        return Err(dim_err(format!(
            "prediction shape {:?} does not match target shape {:?}",
            predictions.shape(),
            targets.shape()
        )));
    }
    let mut sum = T::zero();
    let mut max = T::zero();
    for i in 0..predictions.rows() {
        let d2: T = predictions
            .row(i)
            .iter()
            .zip(targets.row(i))
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum();
        sum += d2;
        max = max.max(d2.sqrt());
    }
    Ok(ErrorStats {
        mse: sum / T::of(predictions.rows() as f64),
        max,
    })
}

/// Error statistics of `f` on a dataset.
pub fn dataset_errors<T: Scalar, F: BatchMap<T> + ?Sized>(ds: &LabeledDataset<T>, f: &F) -> Result<ErrorStats<T>> {
    let pred = eval_finite(f, ds.inputs())?;
    error_stats(&pred, ds.outputs())
}

/// Training loss `max_i ‖y_i − f(x_i)‖`.
pub fn training_loss_sup<T: Scalar, F: BatchMap<T> + ?Sized>(ds: &LabeledDataset<T>, f: &F) -> Result<T> {
    Ok(dataset_errors(ds, f)?.max)
}

/// Monte Carlo estimate of `sup_D ‖g − f‖` and the mean squared error over
/// the same probes. The maximum is a lower estimate of the true supremum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupLossEstimate<T> {
    pub max: T,
    pub mse: T,
    pub probes: usize,
}

pub fn sup_loss_estimate<T, F, G>(f: &F, g: &G, domain: &Domain<T>, probes: usize, seed: u64) -> Result<SupLossEstimate<T>>
where
    T: Scalar,
    F: BatchMap<T> + ?Sized,
    G: BatchMap<T> + ?Sized,
{
    if probes == 0 {
        return Err(Error::Argument("need at least one probe".into()));
    }
    let x = sample_uniform(domain, probes, seed)?;
    let stats = error_stats(&eval_finite(f, &x)?, &eval_finite(g, &x)?)?;
    Ok(SupLossEstimate {
        max: stats.max,
        mse: stats.mse,
        probes,
    })
}
