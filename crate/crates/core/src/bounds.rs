//! Generalization bounds for Lipschitz interpolants and calibration of the
//! sample-complexity constants.
//!
//! Notation: `l_f`, `l_g` are Lipschitz constants of the model and of the
//! generator, `h` is the covering radius of the samples, `ε̄` the noise bound
//! of the data, `ε` the training-loss tolerance, `ρ` the Lipschitz slack.

use serde::{Deserialize, Serialize};

use crate::data::{covering_radius, CoverMode, Domain};
use crate::error::{Error, Result};
use crate::linalg::Tensor;
use crate::rng::{substream, uniform};
use crate::Scalar;

fn nonneg<T: Scalar>(name: &str, v: T) -> Result<T> {
    if v >= T::zero() && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Argument(format!("{name} must be finite and ≥ 0, got {v}")))
    }
}

/// `(l_f + l_g)·dist + ε̄ + ε`: error at a point `dist` away from the samples.
pub fn pointwise_bound<T: Scalar>(l_f: T, l_g: T, dist: T, eps_bar: T, eps: T) -> Result<T> {
    Ok((nonneg("l_f", l_f)? + nonneg("l_g", l_g)?) * nonneg("dist", dist)? + nonneg("eps_bar", eps_bar)? + nonneg("eps", eps)?)
}

/// `(l_f + l_g)·h + ε̄ + ε`: sup error over a domain with covering radius `h`.
pub fn uniform_bound<T: Scalar>(l_f: T, l_g: T, h: T, eps_bar: T, eps: T) -> Result<T> {
    pointwise_bound(l_f, l_g, h, eps_bar, eps)
}

/// `2(l_g·h + ε)`: sup error of a Lipschitz-minimal fit.
pub fn minimal_fit_bound<T: Scalar>(l_g: T, h: T, eps: T) -> Result<T> {
    Ok(T::of(2.0) * (nonneg("l_g", l_g)? * nonneg("h", h)? + nonneg("eps", eps)?))
}

/// `(2l_g + ρ)·h + 2ε`: sup error of a fit with `l_f ≤ L_data + ρ`.
pub fn slack_fit_bound<T: Scalar>(l_g: T, rho: T, h: T, eps: T) -> Result<T> {
    let two = T::of(2.0);
    Ok((two * nonneg("l_g", l_g)? + nonneg("rho", rho)?) * nonneg("h", h)? + two * nonneg("eps", eps)?)
}

/// `k₁·(log(k₂N/δ)/N)^{1/n}`: the high-probability covering radius of `N`
/// uniform samples.
pub fn sampled_covering_radius<T: Scalar>(n: usize, big_n: usize, delta: T, k1: T, k2: T) -> Result<T> {
    if n == 0 {
        return Err(Error::Argument("dimension must be ≥ 1".into()));
    }
    if big_n < 2 {
        return Err(Error::Argument(format!("need N ≥ 2, got {big_n}")));
    }
    if !(delta > T::zero() && delta < T::one()) {
        return Err(Error::Argument(format!("δ must lie in (0, 1), got {delta}")));
    }
    if !(k1 > T::zero() && k1.is_finite() && k2 > T::zero() && k2.is_finite()) {
        return Err(Error::Argument("k₁ and k₂ must be positive".into()));
    }
    let nn = T::of(big_n as f64);
    let arg = k2 * nn / delta;
    if !(arg > T::one()) {
        return Err(Error::Argument(format!("need k₂N/δ > 1, got {arg}")));
    }
    Ok(k1 * (arg.ln() / nn).powf(T::one() / T::of(n as f64)))
}

/// `(2l_g + ρ)·k₁·(log(k₂N/δ)/N)^{1/n} + 2ε`, holding with probability ≥ 1 − δ.
#[allow(clippy::too_many_arguments)]
pub fn sample_complexity_bound<T: Scalar>(l_g: T, rho: T, eps: T, n: usize, big_n: usize, delta: T, k1: T, k2: T) -> Result<T> {
    slack_fit_bound(l_g, rho, sampled_covering_radius(n, big_n, delta, k1, k2)?, eps)
}

// ---------------------------------------------------------------- reports

/// Every quantity a bound may need. `l_g = None` falls back to `l_data`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundInputs {
    pub l_g: Option<f64>,
    pub l_data: Option<f64>,
    pub l_f: f64,
    pub h: f64,
    #[serde(default)]
    pub dist: Option<f64>,
    #[serde(default)]
    pub eps_bar: f64,
    #[serde(default)]
    pub eps: f64,
    #[serde(default)]
    pub rho: f64,
    pub n: Option<usize>,
    pub big_n: Option<usize>,
    pub delta: Option<f64>,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub name: String,
    pub formula: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub inputs: BoundInputs,
    pub l_g_used: f64,
    /// True when `l_g` came from `L_data`, which only bounds `Lip(g)` from below.
    pub l_g_is_proxy: bool,
    pub bounds: Vec<BoundEntry>,
    pub caveats: Vec<String>,
}

pub const PROXY_CAVEAT: &str = "l_g is the data Lipschitz constant L_data: lower-bound proxy, resulting bounds are not certificates";

/// Evaluate every bound the inputs allow.
pub fn bound_report(inputs: &BoundInputs) -> Result<BoundReport> {
    let (l_g, proxy) = match (inputs.l_g, inputs.l_data) {
        (Some(l), _) => (l, false),
        (None, Some(l)) => (l, true),
        (None, None) => return Err(Error::Argument("need l_g or l_data".into())),
    };
    let i = inputs;
    let mut caveats = vec![];
    if proxy {
        caveats.push(PROXY_CAVEAT.to_string());
    }
    if i.eps < i.eps_bar {
        caveats.push(format!("eps = {} < eps_bar = {}: feasibility of the fitting problem is not guaranteed", i.eps, i.eps_bar));
    }
    let mut bounds = vec![];
    let mut push = |name: &str, formula: &str, value: f64| {
        bounds.push(BoundEntry {
            name: name.into(),
            formula: formula.into(),
            value,
        })
    };
    if let Some(d) = i.dist {
        push("pointwise", "(l_f + l_g)*dist + eps_bar + eps", pointwise_bound(i.l_f, l_g, d, i.eps_bar, i.eps)?);
    }
    push("uniform", "(l_f + l_g)*h + eps_bar + eps", uniform_bound(i.l_f, l_g, i.h, i.eps_bar, i.eps)?);
    push("minimal_lipschitz", "2*(l_g*h + eps)", minimal_fit_bound(l_g, i.h, i.eps)?);
    push("lipschitz_slack", "(2*l_g + rho)*h + 2*eps", slack_fit_bound(l_g, i.rho, i.h, i.eps)?);
    if i.l_f > l_g + i.rho {
        caveats.push(format!("l_f = {} exceeds l_g + rho = {}: the slack bound does not apply to this model", i.l_f, l_g + i.rho));
    }
    match (i.n, i.big_n, i.delta, i.k1, i.k2) {
        (Some(n), Some(big_n), Some(delta), Some(k1), Some(k2)) => push(
            "sample_complexity",
            "(2*l_g + rho)*k1*(ln(k2*N/delta)/N)^(1/n) + 2*eps",
            sample_complexity_bound(l_g, i.rho, i.eps, n, big_n, delta, k1, k2)?,
        ),
        (None, None, None, None, None) => {}
        _ => caveats.push("sample-complexity bound skipped: n, N, delta, k1, k2 must all be given".into()),
    }
    Ok(BoundReport {
        inputs: inputs.clone(),
        l_g_used: l_g,
        l_g_is_proxy: proxy,
        bounds,
        caveats,
    })
}

// ---------------------------------------------------------------- calibration

/// Fitted sample-complexity constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringCalibration {
    pub n: usize,
    pub delta: f64,
    pub trials: usize,
    pub sample_sizes: Vec<usize>,
    /// Empirical `(1 − δ)` quantile of the covering radius at each size.
    pub quantiles: Vec<f64>,
    pub k1: f64,
    pub k2: f64,
    /// R² of the fitted model in log space.
    pub r_squared: f64,
    /// Ordinary least-squares slope of `log quantile` against `log N`.
    pub loglog_slope: f64,
    /// Slope of `log quantile` against `log(log(k₂N/δ)/N)`; the model predicts `1/n`.
    pub rate_exponent: f64,
    /// Smallest size from which every log-residual stays below [`N0_RESIDUAL`].
    pub n0: Option<usize>,
}

pub const N0_RESIDUAL: f64 = 0.1;

/// Covering radius of `points` in `[0,1]ⁿ`: exact from the sorted gaps when
/// `n = 1`, branch-and-bound otherwise.
pub fn unit_cube_covering_radius(points: &Tensor<f64>) -> Result<f64> {
    let n = points.cols();
    if n == 1 {
        let mut xs = points.data().to_vec();
        xs.sort_by(f64::total_cmp);
        let mut h = xs[0].max(1.0 - xs[xs.len() - 1]);
        for w in xs.windows(2) {
            h = h.max(0.5 * (w[1] - w[0]));
        }
        return Ok(h);
    }
    let domain = Domain::unit_cube(n)?;
    let start = ((points.rows() as f64).powf(1.0 / n as f64).ceil() as usize).max(2);
    let est = covering_radius(points, &domain, CoverMode::BranchAndBound, start, 0)?;
    Ok(est.value)
}

/// Linear-interpolation quantile of sorted data at level `p`.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let m = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / m, y.iter().sum::<f64>() / m);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, my - slope * mx, r2)
}

/// Monte Carlo calibration of `k₁, k₂` in `h ≈ k₁(log(k₂N/δ)/N)^{1/n}`.
///
/// For each size, `trials` uniform point sets on `[0,1]ⁿ` (independent
/// seeded streams) give covering radii whose `(1 − δ)` quantile is fitted in
/// log space: `log k₁` in closed form for each `k₂`, `k₂` by a log-grid
/// search refined with golden sections.
pub fn calibrate_covering_constants(n: usize, sample_sizes: &[usize], trials: usize, delta: f64, seed: u64) -> Result<CoveringCalibration> {
    if n == 0 {
        return Err(Error::Argument("dimension must be ≥ 1".into()));
    }
    if trials < 20 {
        return Err(Error::Argument(format!("need at least 20 trials, got {trials}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Argument(format!("δ must lie in (0, 1), got {delta}")));
    }
    let (&lo, &hi) = match (sample_sizes.iter().min(), sample_sizes.iter().max()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Argument("no sample sizes".into())),
    };
    if lo < 2 || hi < 10 * lo {
        return Err(Error::Argument("sample sizes must be ≥ 2 and span at least one decade".into()));
    }
    let mut quantiles = Vec::with_capacity(sample_sizes.len());
    for (si, &size) in sample_sizes.iter().enumerate() {
        let mut radii = Vec::with_capacity(trials);
        for t in 0..trials {
            let mut rng = substream(seed, (si * trials + t) as u64);
            let pts = Tensor::from_fn(size, n, |_, _| uniform(&mut rng, 0.0, 1.0));
            radii.push(unit_cube_covering_radius(&pts)?);
        }
        radii.sort_by(f64::total_cmp);
        quantiles.push(quantile(&radii, 1.0 - delta));
    }
    let log_q: Vec<f64> = quantiles.iter().map(|q| q.ln()).collect();
    let log_n: Vec<f64> = sample_sizes.iter().map(|&s| (s as f64).ln()).collect();
    let inv_n = 1.0 / n as f64;
    let features = |log_k2: f64| -> Vec<f64> {
        log_n
            .iter()
            .map(|&ln| ((log_k2 + ln - delta.ln()).ln() - ln) * inv_n)
            .collect()
    };
    let sse = |log_k2: f64| -> (f64, f64) {
        let f = features(log_k2);
        if f.iter().any(|v| !v.is_finite()) {
            return (f64::INFINITY, f64::NAN);
        }
        let log_k1 = log_q.iter().zip(&f).map(|(q, x)| q - x).sum::<f64>() / f.len() as f64;
        let e = log_q.iter().zip(&f).map(|(q, x)| (q - log_k1 - x).powi(2)).sum();
        (e, log_k1)
    };
    // Keep k₂N/δ > e for the smallest N so the log-log term stays defined.
    let min_log_k2 = 1.0 + delta.ln() - (lo as f64).ln();
    let grid: Vec<f64> = (0..=400).map(|k| min_log_k2 + 1e-9 + k as f64 * 0.05).collect();
    let mut best = grid[0];
    for &g in &grid {
        if sse(g).0 < sse(best).0 {
            best = g;
        }
    }
    let (mut a, mut b) = ((best - 0.05).max(min_log_k2 + 1e-9), best + 0.05);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if sse(c).0 < sse(d).0 {
            b = d;
        } else {
            a = c;
        }
    }
    let log_k2 = 0.5 * (a + b);
    let (err, log_k1) = sse(log_k2);
    let my = log_q.iter().sum::<f64>() / log_q.len() as f64;
    let sst: f64 = log_q.iter().map(|q| (q - my).powi(2)).sum();
    if !(sst > 0.0) || !err.is_finite() {
        return Err(Error::Calibration("covering-radius quantiles do not vary with N".into()));
    }
    let (slope, _, _) = ols(&log_n, &log_q);
    let feats = features(log_k2);
    let rate_x: Vec<f64> = feats.iter().map(|f| f * n as f64).collect();
    let (rate, _, _) = ols(&rate_x, &log_q);
    let mut order: Vec<usize> = (0..sample_sizes.len()).collect();
    order.sort_by_key(|&k| sample_sizes[k]);
    let mut n0 = None;
    for &k in order.iter().rev() {
        if (log_q[k] - log_k1 - feats[k]).abs() < N0_RESIDUAL {
            n0 = Some(sample_sizes[k]);
        } else {
            break;
        }
    }
    Ok(CoveringCalibration {
        n,
        delta,
        trials,
        sample_sizes: sample_sizes.to_vec(),
        quantiles,
        k1: log_k1.exp(),
        k2: log_k2.exp(),
        r_squared: 1.0 - err / sst,
        loglog_slope: slope,
        rate_exponent: rate,
        n0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        assert_eq!(pointwise_bound::<f64>(1.0, 1.0, 0.5, 0.0, 0.0).unwrap(), 1.0);
        assert_eq!(pointwise_bound::<f64>(1.0, 1.0, 0.0, 0.0, 0.0).unwrap(), 0.0);
        assert!((pointwise_bound::<f64>(2.0, 3.0, 0.1, 0.05, 0.05).unwrap() - 0.6).abs() < 1e-15);
        assert!((uniform_bound::<f64>(2.0, 3.0, 0.1, 0.05, 0.05).unwrap() - 0.6).abs() < 1e-15);
        assert!((minimal_fit_bound::<f64>(1.0, 0.1, 0.0).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(minimal_fit_bound::<f64>(0.0, 0.7, 0.25).unwrap(), 0.5);
        assert!((minimal_fit_bound::<f64>(4.33, 0.5, 0.01).unwrap() - 4.35).abs() < 1e-12);
        assert!((slack_fit_bound::<f64>(1.0, 0.1, 0.05, 0.01).unwrap() - 0.125).abs() < 1e-15);
        assert_eq!(slack_fit_bound::<f64>(3.0, 1.0, 0.0, 0.2).unwrap(), 0.4);
        assert!(pointwise_bound(-1.0, 1.0, 0.5, 0.0, 0.0).is_err());
    }

    #[test]
    fn sample_complexity_examples() {
        let b = |big_n| sample_complexity_bound::<f64>(1.0, 0.0, 0.0, 3, big_n, 0.1, 1.0, 1.0).unwrap();
        assert!(b(2000) < b(1000));
        let e = std::f64::consts::E;
        let big_n = 2718;
        let v = sample_complexity_bound(0.5, 0.0, 0.0, 1, big_n, 1.0 / e, 1.0, 1.0).unwrap();
        let nn = big_n as f64;
        assert!((v - (e * nn).ln() / nn).abs() < 1e-15);
        let h = sampled_covering_radius(2, 500, 0.05, 0.7, 2.0).unwrap();
        assert_eq!(sample_complexity_bound(1.3, 0.2, 0.01, 2, 500, 0.05, 0.7, 2.0).unwrap(), slack_fit_bound(1.3, 0.2, h, 0.01).unwrap());
        assert!(sampled_covering_radius(1, 1, 0.1, 1.0, 1.0).is_err());
        assert!(sampled_covering_radius(1, 10, 0.5, 1.0, 0.01).is_err());
    }

    #[test]
    fn report_flags_proxy() {
        let inputs = BoundInputs {
            l_g: None,
            l_data: Some(4.3),
            l_f: 4.5,
            h: 0.2,
            dist: Some(0.1),
            eps_bar: 0.0,
            eps: 0.0,
            rho: 0.1,
            n: None,
            big_n: None,
            delta: None,
            k1: None,
            k2: None,
        };
        let r = bound_report(&inputs).unwrap();
        assert!(r.l_g_is_proxy && r.caveats.iter().any(|c| c == PROXY_CAVEAT));
        assert_eq!(r.bounds.len(), 4);
        assert!(r.caveats.iter().any(|c| c.contains("exceeds")));
    }

    #[test]
    fn exact_1d_radius() {
        let pts = Tensor::col_vector(vec![0.2, 0.9, 0.5]);
        assert!((unit_cube_covering_radius(&pts).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn calibration_1d_fits_and_validates() {
        let cal = calibrate_covering_constants(1, &[100, 300, 1000, 3000], 400, 0.1, 7).unwrap();
        assert!(cal.r_squared >= 0.95, "{cal:?}");
        let held = calibrate_covering_constants(1, &[200, 2000], 400, 0.1, 99).unwrap();
        for (&size, &q) in held.sample_sizes.iter().zip(&held.quantiles) {
            let pred = sampled_covering_radius(1, size, 0.1, cal.k1, cal.k2).unwrap();
            assert!(q <= pred * 1.1, "N = {size}: {q} vs {pred}");
        }
        assert!(calibrate_covering_constants(1, &[100, 300], 40, 0.1, 0).is_err());
        assert!(calibrate_covering_constants(1, &[100, 1000], 5, 0.1, 0).is_err());
    }
}
