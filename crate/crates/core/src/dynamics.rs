//! The benchmark vector field, fixed-step RK4 simulation, and trajectory errors.
//!
//! A vector field is any [`BatchMap`] with equal input and output dimension,
//! so learned networks and the interpolation oracle plug in directly. Batches
//! of initial conditions are integrated together, one batched evaluation per
//! Runge–Kutta stage.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::data::Domain;
use crate::error::{dim_err, Error, Result};
use crate::linalg::{distance, Tensor};
use crate::map::{check_input, BatchMap};
use crate::Scalar;

pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_HORIZON: f64 = 10.0;

/// `ẋ = [−x₁ + x₃; ½x₁² − x₁x₃ + x₃ − x₂; −x₁ − x₃]`.
pub fn benchmark_field<T: Scalar>(x: &[T]) -> [T; 3] {
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    [-x1 + x3, T::of(0.5) * x1 * x1 - x1 * x3 + x3 - x2, -x1 - x3]
}

/// [`benchmark_field`] as a batched map.
#[derive(Clone, Copy, Debug, Default)]
pub struct Benchmark;

impl<T: Scalar> BatchMap<T> for Benchmark {
    fn dim_in(&self) -> usize {
        3
    }

    fn dim_out(&self) -> usize {
        3
    }

    fn eval_batch(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        check_input(self, x)?;
        let mut out = Vec::with_capacity(x.len());
        for i in 0..x.rows() {
            out.extend(benchmark_field(x.row(i)));
        }
        Tensor::matrix(x.rows(), 3, out)
    }
}

/// `[−2, 2] × [−10, 10] × [−2, 2]`.
pub fn benchmark_domain<T: Scalar>() -> Domain<T> {
    Domain::new(vec![T::of(-2.0), T::of(-10.0), T::of(-2.0)], vec![T::of(2.0), T::of(10.0), T::of(2.0)])
        .expect("static domain is valid")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct Trajectory<T> {
    pub dt: T,
    /// `steps + 1` rows, one state per instant `k·dt`.
    pub states: Tensor<T>,
    /// First instant at which the state left the monitored domain.
    pub exit_time: Option<T>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.states.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn time(&self, k: usize) -> T {
        T::of(k as f64) * self.dt
    }

    pub fn times(&self) -> Vec<T> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    pub fn state(&self, k: usize) -> &[T] {
        self.states.row(k)
    }

    pub fn exited_domain(&self) -> bool {
        self.exit_time.is_some()
    }

    pub fn final_state(&self) -> &[T] {
        self.states.row(self.len() - 1)
    }

    /// CSV with header `t,x1..xn`.
    pub fn to_csv(&self) -> String {
        let n = self.states.cols();
        let mut out = String::from("t");
        for i in 1..=n {
            let _ = write!(out, ",x{i}");
        }
        out.push('\n');
        for k in 0..self.len() {
            let _ = write!(out, "{}", self.time(k));
            for v in self.state(k) {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

fn step_count(dt: f64, horizon: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) || !(horizon >= dt && horizon.is_finite()) {
        return Err(Error::Argument(format!("need 0 < dt ≤ horizon, got dt = {dt}, horizon = {horizon}")));
    }
    Ok((horizon / dt).round() as usize)
}

/// Integrate every row of `x0` with classic RK4 for `round(horizon/dt)` steps.
///
/// If `domain` is given, each trajectory records the first instant it lies
/// outside. A non-finite state fails the whole batch with [`Error::BlowUp`],
/// carrying the offending trajectory up to its last finite state.
pub fn integrate_batch<T, F>(field: &F, x0: &Tensor<T>, dt: T, horizon: T, domain: Option<&Domain<T>>) -> Result<Vec<Trajectory<T>>>
where
    T: Scalar,
    F: BatchMap<T> + ?Sized,
{
    let n = field.dim_in();
    if field.dim_out() != n {
        return Err(dim_err(format!("vector field maps {n} → {} dimensions", field.dim_out())));
    }
    check_input(field, x0)?;
    if !x0.is_finite() {
        return Err(Error::Numeric("initial conditions must be finite".into()));
    }
    if let Some(d) = domain {
        if d.dim() != n {
            return Err(dim_err("monitor domain dimension differs from the field"));
        }
    }
    let steps = step_count(dt.to_f64_lossy(), horizon.to_f64_lossy())?;
    let b = x0.rows();
    let mut states: Vec<Vec<T>> = (0..b).map(|_| Vec::with_capacity((steps + 1) * n)).collect();
    let mut exits: Vec<Option<T>> = vec![None; b];
    let mut x = x0.clone();
    let half = dt * T::of(0.5);
    let sixth = dt / T::of(6.0);
    let record = |x: &Tensor<T>, k: usize, states: &mut Vec<Vec<T>>, exits: &mut Vec<Option<T>>| {
        for i in 0..b {
            states[i].extend_from_slice(x.row(i));
            if let Some(d) = domain {
                if exits[i].is_none() && !d.contains(x.row(i)) {
                    exits[i] = Some(T::of(k as f64) * dt);
                }
            }
        }
    };
    record(&x, 0, &mut states, &mut exits);
    let axpy = |x: &Tensor<T>, k: &Tensor<T>, h: T| x.zip_map(k, |a, b| a + h * b);
    for k in 1..=steps {
        let blown = |reason: &Tensor<T>| (0..b).find(|&i| reason.row(i).iter().any(|v| !v.is_finite()));
        let k1 = field.eval_batch(&x)?;
        let k2 = field.eval_batch(&axpy(&x, &k1, half)?)?;
        let k3 = field.eval_batch(&axpy(&x, &k2, half)?)?;
        let k4 = field.eval_batch(&axpy(&x, &k3, dt)?)?;
        let mut next = x.clone();
        for (idx, v) in next.data_mut().iter_mut().enumerate() {
            let inc = k1.data()[idx] + T::of(2.0) * (k2.data()[idx] + k3.data()[idx]) + k4.data()[idx];
            *v += sixth * inc;
        }
        if let Some(i) = blown(&next) {
            let rows = states[i].len() / n;
            let truncated = Trajectory {
                dt: dt.to_f64_lossy(),
                states: Tensor::matrix(rows, n, states[i].iter().map(|v| v.to_f64_lossy()).collect())?,
                exit_time: exits[i].map(|t| t.to_f64_lossy()),
            };
            return Err(Error::BlowUp {
                time: (T::of(k as f64) * dt).to_f64_lossy(),
                trajectory: Box::new(truncated),
            });
        }
        x = next;
        record(&x, k, &mut states, &mut exits);
    }
    states
        .into_iter()
        .zip(exits)
        .map(|(s, exit_time)| {
            Ok(Trajectory {
                dt,
                states: Tensor::matrix(steps + 1, n, s)?,
                exit_time,
            })
        })
        .collect()
}

/// Integrate a single initial condition.
pub fn integrate<T, F>(field: &F, x0: &[T], dt: T, horizon: T, domain: Option<&Domain<T>>) -> Result<Trajectory<T>>
where
    T: Scalar,
    F: BatchMap<T> + ?Sized,
{
    let mut out = integrate_batch(field, &Tensor::row_vector(x0.to_vec()), dt, horizon, domain)?;
    Ok(out.remove(0))
}

/// Deviation of the `f` trajectories from the `g` trajectories.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryError<T> {
    pub dt: T,
    /// `max_{t, i} ‖x_f(t; x₀ⁱ) − x_g(t; x₀ⁱ)‖`.
    pub sup: T,
    /// Per-instant mean over initial conditions of the squared distance.
    pub mse: Vec<T>,
    /// Per-initial-condition sup error.
    pub per_trajectory_sup: Vec<T>,
    /// Whether any `f` trajectory left the monitored domain.
    pub exited_domain: bool,
}

impl<T: Scalar> TrajectoryError<T> {
    pub fn times(&self) -> Vec<T> {
        (0..self.mse.len()).map(|k| T::of(k as f64) * self.dt).collect()
    }

    /// First instant at which the MSE curve exceeds `level`.
    pub fn first_exceedance(&self, level: T) -> Option<T> {
        self.mse.iter().position(|&e| e > level).map(|k| T::of(k as f64) * self.dt)
    }

    /// CSV with header `t,mse`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,mse\n");
        for (t, e) in self.times().into_iter().zip(&self.mse) {
            let _ = writeln!(out, "{t},{e}");
        }
        out
    }
}

/// Simulate `f` and `g` from every row of `x0` on the same time grid and
/// compare. `domain` (if any) monitors the `f` trajectories.
pub fn trajectory_error<T, F, G>(f: &F, g: &G, x0: &Tensor<T>, dt: T, horizon: T, domain: Option<&Domain<T>>) -> Result<TrajectoryError<T>>
where
    T: Scalar,
    F: BatchMap<T> + ?Sized,
    G: BatchMap<T> + ?Sized,
{
    if f.dim_in() != g.dim_in() {
        return Err(dim_err("fields have different dimensions"));
    }
    let tf = integrate_batch(f, x0, dt, horizon, domain)?;
    let tg = integrate_batch(g, x0, dt, horizon, None)?;
    let steps = tf[0].len();
    let mut mse = vec![T::zero(); steps];
    let mut per = vec![T::zero(); tf.len()];
    for (i, (a, b)) in tf.iter().zip(&tg).enumerate() {
        for k in 0..steps {
            let d = distance(a.state(k), b.state(k));
            mse[k] += d * d;
            per[i] = per[i].max(d);
        }
    }
    let count = T::of(tf.len() as f64);
    mse.iter_mut().for_each(|e| *e /= count);
    Ok(TrajectoryError {
        dt,
        sup: per.iter().copied().fold(T::zero(), T::max),
        mse,
        per_trajectory_sup: per,
        exited_domain: tf.iter().any(Trajectory::exited_domain),
    })
}

/// Number of points at which `γ` is probed on `[0, fit_bound]`.
const GAMMA_PROBES: usize = 17;

/// `δ = γ(fit_bound)` for a class-𝒦 gain `γ`.
///
/// `γ` is probed on an even grid over `[0, fit_bound]`; `γ(0) ≠ 0`, a
/// decrease between probes, or a non-finite value is a contract error.
pub fn simulation_error_bound<T: Scalar>(gamma: impl Fn(T) -> T, fit_bound: T) -> Result<T> {
    if !(fit_bound >= T::zero() && fit_bound.is_finite()) {
        return Err(Error::Argument(format!("fit bound must be finite and ≥ 0, got {fit_bound}")));
    }
    let g0 = gamma(T::zero());
    if g0 != T::zero() {
        return Err(Error::Contract(format!("γ(0) = {g0}, expected 0")));
    }
    let mut prev = g0;
    for k in 1..GAMMA_PROBES {
        let s = fit_bound * T::of(k as f64 / (GAMMA_PROBES - 1) as f64);
        let v = gamma(s);
        if !v.is_finite() || v < prev {
            return Err(Error::Contract(format!("γ is not nondecreasing near s = {s} (γ = {v}, previous {prev})")));
        }
        prev = v;
    }
    Ok(prev)
}

/// Line plot of MSE curves on a log scale, one polyline per named curve.
pub fn mse_curves_svg(curves: &[(&str, &TrajectoryError<f64>)]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 50.0;
    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];
    let floor = 1e-12;
    let values = curves.iter().flat_map(|(_, c)| c.mse.iter().map(|&v| v.max(floor)));
    let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (floor, 1.0);
    }
    let (llo, mut lhi) = (lo.log10().floor(), hi.log10().ceil());
    if lhi <= llo {
        lhi = llo + 1.0;
    }
    let t_max = curves
        .iter()
        .map(|(_, c)| c.dt * (c.mse.len().max(2) - 1) as f64)
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let x = |t: f64| PAD + (W - 2.0 * PAD) * t / t_max;
    let y = |v: f64| H - PAD - (H - 2.0 * PAD) * (v.max(floor).log10() - llo) / (lhi - llo);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <line x1=\"{PAD}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{PAD}\" y1=\"{PAD}\" x2=\"{PAD}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <text x=\"{cx}\" y=\"{ty}\" text-anchor=\"middle\" font-size=\"12\">t [s]</text>\n\
         <text x=\"12\" y=\"{cy}\" font-size=\"12\" transform=\"rotate(-90 12 {cy})\" text-anchor=\"middle\">MSE</text>\n",
        b = H - PAD,
        r = W - PAD,
        cx = W / 2.0,
        ty = H - 12.0,
        cy = H / 2.0,
    );
    for e in llo as i32..=lhi as i32 {
        let yy = y(10f64.powi(e));
        let _ = writeln!(svg, "<text x=\"{}\" y=\"{yy:.1}\" font-size=\"10\" text-anchor=\"end\">1e{e}</text>", PAD - 4.0);
    }
    for (k, (name, c)) in curves.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = c
            .mse
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.2},{:.2}", x(i as f64 * c.dt), y(v)))
            .collect();
        let _ = writeln!(
            svg,
            "<polyline class=\"curve\" data-name=\"{name}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            pts.join(" ")
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"{color}\">{name}</text>",
            W - PAD - 80.0,
            PAD + 14.0 * (k as f64 + 1.0)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::FnMap;

    fn decay() -> FnMap<impl Fn(&[f64]) -> Vec<f64>> {
        FnMap::new(1, 1, |x: &[f64]| vec![-x[0]])
    }

    #[test]
    fn benchmark_values() {
        assert_eq!(benchmark_field(&[0.0, 0.0, 0.0]), [0.0, 0.0, 0.0]);
        assert_eq!(benchmark_field(&[1.0, 0.0, 1.0]), [0.0, 0.5, -2.0]);
        assert_eq!(benchmark_field(&[2.0, 10.0, 2.0]), [0.0, -10.0, -4.0]);
    }

    #[test]
    fn zero_field_is_constant() {
        let f = FnMap::new(2, 2, |_: &[f64]| vec![0.0, 0.0]);
        let t = integrate(&f, &[1.0, -3.0], 0.1, 1.0, None).unwrap();
        assert_eq!(t.len(), 11);
        assert!((0..t.len()).all(|k| t.state(k) == [1.0, -3.0]));
    }

    #[test]
    fn exponential_decay() {
        let t = integrate(&decay(), &[1.0], 0.01, 1.0, None).unwrap();
        assert!((t.final_state()[0] - (-1.0f64).exp()).abs() <= 1e-8);
    }

    #[test]
    fn fourth_order_convergence() {
        let err = |dt: f64| (integrate(&decay(), &[1.0], dt, 1.0, None).unwrap().final_state()[0] - (-1.0f64).exp()).abs();
        let ratio = err(0.1) / err(0.05);
        assert!((12.0..=20.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn benchmark_is_stable_from_ones() {
        let t = integrate(&Benchmark, &[1.0, 1.0, 1.0], 0.01, 10.0, Some(&benchmark_domain())).unwrap();
        let fine = integrate(&Benchmark, &[1.0, 1.0, 1.0], 1e-4, 10.0, None).unwrap();
        assert!(distance(t.final_state(), fine.final_state()) < 1e-8);
        assert!(crate::linalg::norm(t.final_state()) < 1e-3);
        assert!(!t.exited_domain());
    }

    #[test]
    fn domain_exit_is_flagged() {
        let grow = FnMap::new(1, 1, |x: &[f64]| vec![x[0]]);
        let d = Domain::new(vec![-2.0], vec![2.0]).unwrap();
        let t = integrate(&grow, &[1.0], 0.01, 1.0, Some(&d)).unwrap();
        let exit = t.exit_time.unwrap();
        assert!((exit - 2f64.ln()).abs() < 0.02, "{exit}");
    }

    #[test]
    fn blow_up_keeps_truncated_trajectory() {
        let f = FnMap::new(1, 1, |x: &[f64]| vec![x[0] * x[0]]);
        match integrate(&f, &[1.0], 0.1, 5.0, None) {
            Err(Error::BlowUp { time, trajectory }) => {
                assert!(time > 0.9 && time < 5.0);
                assert!(trajectory.states.is_finite() && trajectory.len() >= 2);
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn self_error_is_zero() {
        let x0 = crate::data::sample_uniform(&benchmark_domain::<f64>(), 4, 1).unwrap();
        let e = trajectory_error(&Benchmark, &Benchmark, &x0, 0.01, 1.0, None).unwrap();
        assert_eq!(e.sup, 0.0);
        assert!(e.mse.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_offset_matches_closed_form() {
        // ẋ = −x + c against ẋ = −x gives a deviation c(1 − e^{−t}).
        let c = 0.3;
        let f = FnMap::new(1, 1, move |x: &[f64]| vec![-x[0] + c]);
        let x0 = Tensor::col_vector(vec![1.0, -0.5]);
        let e = trajectory_error(&f, &decay(), &x0, 0.01, 2.0, None).unwrap();
        for (t, m) in e.times().iter().zip(&e.mse) {
            let exact = c * (1.0 - (-t).exp());
            assert!((m.sqrt() - exact).abs() < 1e-9, "t = {t}");
        }
        assert!((e.sup - c * (1.0 - (-2.0f64).exp())).abs() < 1e-9);
        assert_eq!(e.first_exceedance(0.01), e.mse.iter().position(|&m| m > 0.01).map(|k| k as f64 * 0.01));
    }

    #[test]
    fn gamma_bound() {
        assert_eq!(simulation_error_bound(|s: f64| s, 0.3).unwrap(), 0.3);
        let fit = crate::bounds::slack_fit_bound(1.0, 0.1, 0.05, 0.01).unwrap();
        assert!((simulation_error_bound(|s: f64| 2.0 * s, fit).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(simulation_error_bound(|s: f64| s * s, 0.0).unwrap(), 0.0);
        assert!(matches!(simulation_error_bound(|s: f64| s + 1.0, 1.0), Err(Error::Contract(_))));
        assert!(matches!(simulation_error_bound(|s: f64| (6.0 * s).sin(), 1.0), Err(Error::Contract(_))));
    }

    #[test]
    fn csv_and_svg_shapes() {
        let t = integrate(&decay(), &[1.0], 0.5, 1.0, None).unwrap();
        assert_eq!(t.to_csv(), "t,x1\n0,1\n0.5,0.6067708333333334\n1,0.36817084418402785\n");
        let x0 = Tensor::col_vector(vec![1.0]);
        let e = trajectory_error(&decay(), &decay(), &x0, 0.5, 1.0, None).unwrap();
        assert!(e.to_csv().starts_with("t,mse\n0,0\n"));
        let svg = mse_curves_svg(&[("a", &e), ("b", &e)]);
        assert_eq!(svg.matches("<polyline").count(), 2);
    }
}
