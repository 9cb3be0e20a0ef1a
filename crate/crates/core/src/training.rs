//! Optimizers and training drivers.
//!
//! * P1 minimizes `max(η, L_data)` subject to `f(x_i) = y_i`.
//! * P2 finds a feasible point of `η ≤ L_data + ρ`, `f(x_i) = y_i`.
//! * P3 minimizes the training MSE with `η = L_data + ρ` frozen.
//! * The MLP baseline minimizes `MSE + wd·‖θ‖²`.
//!
//! P1 and P2 run an augmented Lagrangian outer loop around full-batch Adam.
//! Everything is deterministic given the network initialization.

use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Var};
use crate::data::{dataset_errors, empirical_lipschitz_lower, Domain, LabeledDataset};
use crate::error::{dim_err, Error, Result};
use crate::linalg::Tensor;
use crate::map::{eval_finite, BatchMap};
use crate::network::{empirical_lipschitz_net, LipNet, MlpNet, Trainable};
use crate::Scalar;

// ---------------------------------------------------------------- config

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormulationKind {
    P1,
    P2,
    P3,
}

/// Which problem to solve; `rho` is ignored by P1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Formulation {
    pub kind: FormulationKind,
    pub rho: f64,
}

impl Formulation {
    pub fn p1() -> Self {
        Self {
            kind: FormulationKind::P1,
            rho: 0.0,
        }
    }

    pub fn p2(rho: f64) -> Self {
        Self {
            kind: FormulationKind::P2,
            rho,
        }
    }

    pub fn p3(rho: f64) -> Self {
        Self {
            kind: FormulationKind::P3,
            rho,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            FormulationKind::P1 => "P1",
            FormulationKind::P2 => "P2",
            FormulationKind::P3 => "P3",
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return Err(Error::Argument(format!("ρ must be finite and ≥ 0, got {}", self.rho)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub outer_iters: usize,
    pub inner_steps: usize,
    /// Peak Adam step size; each cosine cycle decays it to `lr · lr_floor`.
    pub lr: f64,
    pub lr_floor: f64,
    pub mu0: f64,
    /// Penalty growth factor β.
    pub mu_growth: f64,
    /// The penalty grows unless the violation drops below `tau` times the previous one.
    pub tau: f64,
    pub mu_max: f64,
    pub tol_c: f64,
    pub seed: u64,
    pub weight_decay: f64,
    /// Pairs and refinement steps for the empirical Lipschitz bound in reports.
    pub emp_pairs: usize,
    pub emp_refine_steps: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            outer_iters: 12,
            inner_steps: 2000,
            lr: 1e-3,
            lr_floor: 0.01,
            mu0: 1.0,
            mu_growth: 10.0,
            tau: 0.25,
            mu_max: 1e8,
            tol_c: 1e-4,
            seed: 0,
            weight_decay: 0.0,
            emp_pairs: 10_000,
            emp_refine_steps: 20,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lr", self.lr),
            ("mu0", self.mu0),
            ("tol_c", self.tol_c),
            ("tau", self.tau),
            ("mu_max", self.mu_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Argument(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.mu_growth >= 1.0) {
            return Err(Error::Argument("mu_growth must be ≥ 1".into()));
        }
        if !(0.0..=1.0).contains(&self.lr_floor) {
            return Err(Error::Argument("lr_floor must lie in [0, 1]".into()));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::Argument("weight_decay must be ≥ 0".into()));
        }
        if self.outer_iters == 0 || self.inner_steps == 0 {
            return Err(Error::Argument("outer_iters and inner_steps must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// Cosine decay from `lr` at `t = 0` to `lr · floor` at `t = total`.
pub fn cosine_lr(lr: f64, floor: f64, t: usize, total: usize) -> f64 {
    let frac = if total <= 1 { 0.0 } else { t as f64 / (total - 1) as f64 };
    lr * (floor + (1.0 - floor) * 0.5 * (1.0 + (std::f64::consts::PI * frac).cos()))
}

// ---------------------------------------------------------------- Adam

/// Full-batch Adam with per-tensor moment buffers.
#[derive(Clone, Debug)]
pub struct Adam<T> {
    beta1: T,
    beta2: T,
    eps: T,
    t: i32,
    m: Vec<Tensor<T>>,
    v: Vec<Tensor<T>>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(shapes: &[&Tensor<T>]) -> Self {
        let zeros = |p: &&Tensor<T>| Tensor::new(p.shape().to_vec(), vec![T::zero(); p.len()]).expect("shape of an existing tensor");
        Self {
            beta1: T::of(0.9),
            beta2: T::of(0.999),
            eps: T::of(1e-8),
            t: 0,
            m: shapes.iter().map(zeros).collect(),
            v: shapes.iter().map(zeros).collect(),
        }
    }

    /// One update; entries of `grads` that are `None` leave the parameter untouched.
    pub fn step(&mut self, params: Vec<&mut Tensor<T>>, grads: &[Option<Tensor<T>>], lr: T) {
        self.t += 1;
        let c1 = T::one() - self.beta1.powi(self.t);
        let c2 = T::one() - self.beta2.powi(self.t);
        for (k, p) in params.into_iter().enumerate() {
            let Some(g) = &grads[k] else { continue };
            let (m, v) = (self.m[k].data_mut(), self.v[k].data_mut());
            for (i, x) in p.data_mut().iter_mut().enumerate() {
                let gi = g.data()[i];
                m[i] = self.beta1 * m[i] + (T::one() - self.beta1) * gi;
                v[i] = self.beta2 * v[i] + (T::one() - self.beta2) * gi * gi;
                *x -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + self.eps);
            }
        }
    }
}

// ---------------------------------------------------------------- objectives

/// A differentiable training objective.
#[derive(Clone, Debug)]
pub enum Objective<T> {
    /// `max(η, L_data) + Σλ⊙c + (μ/2)Σc²`.
    P1 { l_data: T, lambda: Tensor<T>, mu: T },
    /// `Σλ⊙c + (μ/2)Σc² + (μ/2)·max(0, η − L_data − ρ + ν/μ)²`.
    P2 {
        l_data: T,
        rho: T,
        lambda: Tensor<T>,
        mu: T,
        nu: T,
    },
    /// `(1/N)Σ‖c_i‖²`.
    Mse,
    /// `(1/N)Σ‖c_i‖² + wd·‖θ‖²` over every parameter.
    WeightDecayMse { wd: T },
}

/// Index of `ψ` among the parameters, for networks that have one.
pub trait GainParam {
    fn psi_index(&self) -> Option<usize>;
}

impl<T: Scalar> GainParam for LipNet<T> {
    fn psi_index(&self) -> Option<usize> {
        Some(0)
    }
}

impl<T: Scalar> GainParam for MlpNet<T> {
    fn psi_index(&self) -> Option<usize> {
        None
    }
}

/// Record `obj` for `net` on the data `(x, y)`; `params` are the tape nodes of
/// the network parameters.
pub fn record_objective<T, N>(
    tape: &mut Tape<T>,
    net: &N,
    params: &[Var],
    x: &Tensor<T>,
    y: &Tensor<T>,
    obj: &Objective<T>,
) -> Result<Var>
where
    T: Scalar,
    N: Trainable<T> + GainParam,
{
    let xv = tape.constant(x.clone());
    let yv = tape.constant(y.clone());
    let pred = net.record(tape, params, xv)?;
    let c = tape.sub(pred, yv)?;
    let eta = |tape: &mut Tape<T>| -> Result<Var> {
        let k = net
            .psi_index()
            .ok_or_else(|| Error::Argument("P1/P2 need a network with a gain parameter".into()))?;
        Ok(tape.exp(params[k]))
    };
    let multiplier_terms = |tape: &mut Tape<T>, lambda: &Tensor<T>, mu: T| -> Result<Var> {
        if lambda.shape() != y.shape() {
            return Err(dim_err(format!("multiplier shape {:?} does not match targets {:?}", lambda.shape(), y.shape())));
        }
        let lv = tape.constant(lambda.clone());
        let lc = tape.mul(lv, c)?;
        let lin = tape.sum(lc);
        let sq = tape.square(c);
        let sq = tape.sum(sq);
        let pen = tape.scale(sq, mu * T::of(0.5));
        tape.add(lin, pen)
    };
    match obj {
        Objective::P1 { l_data, lambda, mu } => {
            let e = eta(tape)?;
            let head = tape.max_const(e, *l_data);
            let rest = multiplier_terms(tape, lambda, *mu)?;
            tape.add(head, rest)
        }
        Objective::P2 {
            l_data,
            rho,
            lambda,
            mu,
            nu,
        } => {
            let e = eta(tape)?;
            let shift = tape.scalar(*nu / *mu - *l_data - *rho);
            let g = tape.add(e, shift)?;
            let hinge = tape.max_const(g, T::zero());
            let hinge = tape.square(hinge);
            let hinge = tape.scale(hinge, *mu * T::of(0.5));
            let rest = multiplier_terms(tape, lambda, *mu)?;
            tape.add(hinge, rest)
        }
        Objective::Mse => mse(tape, c, y.rows()),
        Objective::WeightDecayMse { wd } => {
            let m = mse(tape, c, y.rows())?;
            let mut total = m;
            for &p in params {
                let sq = tape.square(p);
                let s = tape.sum(sq);
                let s = tape.scale(s, *wd);
                total = tape.add(total, s)?;
            }
            Ok(total)
        }
    }
}

fn mse<T: Scalar>(tape: &mut Tape<T>, c: Var, n: usize) -> Result<Var> {
    let sq = tape.square(c);
    let s = tape.sum(sq);
    Ok(tape.scale(s, T::one() / T::of(n as f64)))
}

// ---------------------------------------------------------------- reports

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainStatus {
    /// Constraint violation reached `tol_c` with a nonincreasing tail.
    Converged,
    /// Outer budget exhausted above `tol_c`, or the violation tail increased.
    NotConverged,
    /// Unconstrained run finished its step budget.
    Completed,
}

/// Augmented Lagrangian state carried between outer iterations.
#[derive(Clone, Debug)]
pub struct AugLagState<T> {
    pub lambda: Tensor<T>,
    pub mu: T,
    /// Multiplier of the P2 inequality.
    pub slack: T,
    /// Max constraint violation after each outer iteration.
    pub history: Vec<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub formulation: String,
    pub rho: Option<f64>,
    pub weight_decay: Option<f64>,
    pub status: TrainStatus,
    pub l_data: f64,
    pub eta: Option<f64>,
    pub train_mse: f64,
    pub train_max: f64,
    pub final_loss: f64,
    pub outer_iterations: usize,
    pub total_steps: usize,
    pub violation_history: Vec<f64>,
    pub mu_history: Vec<f64>,
    pub tol_c: f64,
    pub emp_lip: Option<f64>,
}

impl TrainingReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

// ---------------------------------------------------------------- drivers

fn check_dims<T: Scalar, N: BatchMap<T>>(net: &N, ds: &LabeledDataset<T>) -> Result<()> {
    if net.dim_in() != ds.input_dim() || net.dim_out() != ds.output_dim() {
        return Err(dim_err(format!(
            "network maps {}→{}, data is {}→{}",
            net.dim_in(),
            net.dim_out(),
            ds.input_dim(),
            ds.output_dim()
        )));
    }
    Ok(())
}

/// Run Adam on `obj(net)` for `steps` steps. On a non-finite loss, gradient,
/// or parameter, `net` is restored to its state before the call.
#[allow(clippy::too_many_arguments)]
fn run_steps<T, N>(
    net: &mut N,
    adam: &mut Adam<T>,
    frozen: &[bool],
    ds: &LabeledDataset<T>,
    obj: &Objective<T>,
    lr: impl Fn(usize) -> f64,
    steps: usize,
    outer: usize,
) -> Result<T>
where
    T: Scalar,
    N: Trainable<T> + GainParam + Clone,
{
    let backup = net.clone();
    let mut last = T::nan();
    let fail = |net: &mut N, step: usize, reason: String| {
        *net = backup.clone();
        Err(Error::Divergence { outer, step, reason })
    };
    for step in 0..steps {
        let mut tape = Tape::new();
        let vars: Vec<Var> = net
            .params()
            .into_iter()
            .zip(frozen)
            .map(|(p, &f)| tape.leaf(p.clone(), !f))
            .collect();
        let out = record_objective(&mut tape, net, &vars, ds.inputs(), ds.outputs(), obj)?;
        last = tape.value(out).item();
        if !last.is_finite() {
            return fail(net, step, format!("loss became {last}"));
        }
        let grads = tape.backward(out)?;
        let g: Vec<Option<Tensor<T>>> = vars
            .iter()
            .zip(frozen)
            .map(|(&v, &f)| if f { None } else { Some(grads.wrt(v)) })
            .collect();
        if g.iter().flatten().any(|t| !t.is_finite()) {
            return fail(net, step, "non-finite gradient".into());
        }
        adam.step(net.params_mut(), &g, T::of(lr(step)));
        net.sync();
        if net.params().iter().any(|p| !p.is_finite()) {
            return fail(net, step, "non-finite parameters".into());
        }
    }
    Ok(last)
}

/// Row-wise residual `f(x_i) − y_i` and its largest row norm.
fn residual<T: Scalar, F: BatchMap<T> + ?Sized>(f: &F, ds: &LabeledDataset<T>) -> Result<(Tensor<T>, T)> {
    let pred = eval_finite(f, ds.inputs())?;
    let c = pred.sub(ds.outputs())?;
    let max = (0..c.rows()).map(|i| crate::linalg::norm(c.row(i))).fold(T::zero(), T::max);
    Ok((c, max))
}

/// Train a LipNet on `ds` under `form`. The network is updated in place; on
/// divergence it holds the parameters from the start of the failing round.
pub fn train<T: Scalar>(net: &mut LipNet<T>, ds: &LabeledDataset<T>, form: &Formulation, cfg: &TrainConfig) -> Result<TrainingReport> {
    cfg.validate()?;
    form.validate()?;
    check_dims(net, ds)?;
    let l_data = if ds.len() >= 2 { empirical_lipschitz_lower(ds)? } else { T::zero() };
    let rho = T::of(form.rho);
    match form.kind {
        FormulationKind::P3 => train_p3(net, ds, l_data, rho, cfg),
        _ => train_al(net, ds, form, l_data, rho, cfg),
    }
}

fn train_p3<T: Scalar>(net: &mut LipNet<T>, ds: &LabeledDataset<T>, l_data: T, rho: T, cfg: &TrainConfig) -> Result<TrainingReport> {
    let eta = l_data + rho;
    if !(eta > T::zero()) {
        return Err(Error::InfeasibleData("P3 needs L_data + ρ > 0 to fix η".into()));
    }
    net.set_psi(eta.ln());
    let mut frozen = vec![false; net.params().len()];
    frozen[0] = true;
    let mut adam = Adam::new(&net.params());
    let total = cfg.outer_iters * cfg.inner_steps;
    let loss = run_steps(net, &mut adam, &frozen, ds, &Objective::Mse, |t| cosine_lr(cfg.lr, cfg.lr_floor, t, total), total, 0)?;
    let stats = dataset_errors(ds, &net.prepare()?)?;
    Ok(TrainingReport {
        formulation: "P3".into(),
        rho: Some(rho.to_f64_lossy()),
        weight_decay: None,
        status: TrainStatus::Completed,
        l_data: l_data.to_f64_lossy(),
        eta: Some(net.eta().to_f64_lossy()),
        train_mse: stats.mse.to_f64_lossy(),
        train_max: stats.max.to_f64_lossy(),
        final_loss: loss.to_f64_lossy(),
        outer_iterations: cfg.outer_iters,
        total_steps: total,
        violation_history: vec![],
        mu_history: vec![],
        tol_c: cfg.tol_c,
        emp_lip: None,
    })
}

fn train_al<T: Scalar>(
    net: &mut LipNet<T>,
    ds: &LabeledDataset<T>,
    form: &Formulation,
    l_data: T,
    rho: T,
    cfg: &TrainConfig,
) -> Result<TrainingReport> {
    let p2 = form.kind == FormulationKind::P2;
    let mut state = AugLagState {
        lambda: Tensor::zeros(ds.len(), ds.output_dim()),
        mu: T::of(cfg.mu0),
        slack: T::zero(),
        history: vec![],
    };
    let mut mu_history = vec![];
    let frozen = vec![false; net.params().len()];
    let mut adam = Adam::new(&net.params());
    let mut prev = T::infinity();
    let mut loss = T::nan();
    let mut steps = 0;
    let inequality = |net: &LipNet<T>| net.eta() - l_data - rho;
    for outer in 0..cfg.outer_iters {
        let obj = if p2 {
            Objective::P2 {
                l_data,
                rho,
                lambda: state.lambda.clone(),
                mu: state.mu,
                nu: state.slack,
            }
        } else {
            Objective::P1 {
                l_data,
                lambda: state.lambda.clone(),
                mu: state.mu,
            }
        };
        let n = cfg.inner_steps;
        loss = run_steps(net, &mut adam, &frozen, ds, &obj, |t| cosine_lr(cfg.lr, cfg.lr_floor, t, n), n, outer)?;
        steps += n;
        mu_history.push(state.mu.to_f64_lossy());
        let (c, mut violation) = residual(&net.prepare()?, ds)?;
        if p2 {
            violation = violation.max(inequality(net).max(T::zero()));
        }
        state.history.push(violation);
        if violation <= T::of(cfg.tol_c) {
            break;
        }
        state.lambda = state.lambda.add(&c.scale(state.mu))?;
        if p2 {
            state.slack = (state.slack + state.mu * inequality(net)).max(T::zero());
        }
        if violation > T::of(cfg.tau) * prev {
            state.mu = (state.mu * T::of(cfg.mu_growth)).min(T::of(cfg.mu_max));
        }
        prev = violation;
    }
    if p2 && inequality(net) > T::zero() {
        // Enforce the certificate exactly; the residual changes by a factor ≤ η/(L_data+ρ).
        net.set_psi((l_data + rho).ln());
    }
    let stats = dataset_errors(ds, &net.prepare()?)?;
    let history: Vec<f64> = state.history.iter().map(|v| v.to_f64_lossy()).collect();
    let last = *history.last().unwrap_or(&f64::INFINITY);
    let tail = &history[history.len().saturating_sub(3)..];
    let monotone = tail.windows(2).all(|w| w[1] <= w[0]);
    let status = if last <= cfg.tol_c && monotone {
        TrainStatus::Converged
    } else {
        TrainStatus::NotConverged
    };
    Ok(TrainingReport {
        formulation: form.name().into(),
        rho: p2.then(|| rho.to_f64_lossy()),
        weight_decay: None,
        status,
        l_data: l_data.to_f64_lossy(),
        eta: Some(net.eta().to_f64_lossy()),
        train_mse: stats.mse.to_f64_lossy(),
        train_max: stats.max.to_f64_lossy(),
        final_loss: loss.to_f64_lossy(),
        outer_iterations: history.len(),
        total_steps: steps,
        violation_history: history,
        mu_history,
        tol_c: cfg.tol_c,
        emp_lip: None,
    })
}

/// Train the unconstrained MLP on `MSE + weight_decay·‖θ‖²` for
/// `outer_iters · inner_steps` steps under one cosine schedule. The report's
/// empirical Lipschitz bound is taken over the bounding box of the inputs.
pub fn train_mlp_baseline<T: Scalar>(
    net: &mut MlpNet<T>,
    ds: &LabeledDataset<T>,
    weight_decay: f64,
    cfg: &TrainConfig,
) -> Result<TrainingReport> {
    cfg.validate()?;
    if !(weight_decay >= 0.0 && weight_decay.is_finite()) {
        return Err(Error::Argument(format!("weight decay must be ≥ 0, got {weight_decay}")));
    }
    check_dims(net, ds)?;
    let obj = if weight_decay > 0.0 {
        Objective::WeightDecayMse { wd: T::of(weight_decay) }
    } else {
        Objective::Mse
    };
    let frozen = vec![false; net.params().len()];
    let mut adam = Adam::new(&net.params());
    let total = cfg.outer_iters * cfg.inner_steps;
    let loss = run_steps(net, &mut adam, &frozen, ds, &obj, |t| cosine_lr(cfg.lr, cfg.lr_floor, t, total), total, 0)?;
    let stats = dataset_errors(ds, &*net)?;
    let emp = empirical_lipschitz_net(&*net, &bounding_box(ds.inputs())?, cfg.emp_pairs.max(1), cfg.emp_refine_steps, cfg.seed)?;
    Ok(TrainingReport {
        formulation: "MLP".into(),
        rho: None,
        weight_decay: Some(weight_decay),
        status: TrainStatus::Completed,
        l_data: if ds.len() >= 2 { empirical_lipschitz_lower(ds)?.to_f64_lossy() } else { 0.0 },
        eta: None,
        train_mse: stats.mse.to_f64_lossy(),
        train_max: stats.max.to_f64_lossy(),
        final_loss: loss.to_f64_lossy(),
        outer_iterations: cfg.outer_iters,
        total_steps: total,
        violation_history: vec![],
        mu_history: vec![],
        tol_c: cfg.tol_c,
        emp_lip: Some(emp.value.to_f64_lossy()),
    })
}

/// Smallest box containing every row; degenerate axes are widened by 1.
pub fn bounding_box<T: Scalar>(points: &Tensor<T>) -> Result<Domain<T>> {
    if points.rows() == 0 {
        return Err(Error::Argument("no points".into()));
    }
    let n = points.cols();
    let mut lo = points.row(0).to_vec();
    let mut hi = lo.clone();
    for i in 1..points.rows() {
        for j in 0..n {
            lo[j] = lo[j].min(points.get(i, j));
            hi[j] = hi[j].max(points.get(i, j));
        }
    }
    for j in 0..n {
        if hi[j] <= lo[j] {
            lo[j] -= T::of(0.5);
            hi[j] += T::of(0.5);
        }
    }
    Domain::new(lo, hi)
}

// ---------------------------------------------------------------- metrics

/// Header of the per-model metrics table.
pub const METRICS_HEADER: &str = "model,rho,train_mse,train_max,test_mse,test_max,emp_lip,cert_lip";

/// The six reported columns: MSE and Max on both splits plus the empirical
/// and certified Lipschitz bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub train_mse: f64,
    pub train_max: f64,
    pub test_mse: f64,
    pub test_max: f64,
    pub emp_lip: f64,
    pub cert_lip: Option<f64>,
    pub emp_pairs: usize,
    pub emp_refine_steps: usize,
}

/// Sampling budget for empirical Lipschitz bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmpiricalSettings {
    pub pairs: usize,
    pub refine_steps: usize,
    pub seed: u64,
}

impl Default for EmpiricalSettings {
    fn default() -> Self {
        Self {
            pairs: 10_000,
            refine_steps: 20,
            seed: 0,
        }
    }
}

pub fn evaluate_metrics<T, F>(
    f: &F,
    cert: Option<T>,
    train: &LabeledDataset<T>,
    test: &LabeledDataset<T>,
    domain: &Domain<T>,
    emp: &EmpiricalSettings,
) -> Result<MetricsReport>
where
    T: Scalar,
    F: BatchMap<T> + ?Sized,
{
    let tr = dataset_errors(train, f)?;
    let te = dataset_errors(test, f)?;
    let lip = empirical_lipschitz_net(f, domain, emp.pairs, emp.refine_steps, emp.seed)?;
    Ok(MetricsReport {
        train_mse: tr.mse.to_f64_lossy(),
        train_max: tr.max.to_f64_lossy(),
        test_mse: te.mse.to_f64_lossy(),
        test_max: te.max.to_f64_lossy(),
        emp_lip: lip.value.to_f64_lossy(),
        cert_lip: cert.map(|c| c.to_f64_lossy()),
        emp_pairs: emp.pairs,
        emp_refine_steps: emp.refine_steps,
    })
}

impl MetricsReport {
    /// One CSV row matching [`METRICS_HEADER`]; absent values are `--`.
    pub fn csv_row(&self, model: &str, rho: Option<f64>) -> String {
        let opt = |v: Option<f64>, f: fn(f64) -> String| v.map(f).unwrap_or_else(|| "--".into());
        format!(
            "{model},{},{:.3e},{:.3e},{:.3e},{:.3e},{:.4},{}",
            opt(rho, |r| format!("{r}")),
            self.train_mse,
            self.train_max,
            self.test_mse,
            self.test_max,
            self.emp_lip,
            opt(self.cert_lip, |c| format!("{c:.4}")),
        )
    }
}
