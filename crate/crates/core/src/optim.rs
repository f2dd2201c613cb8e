//! Adam and L-BFGS on flat parameter vectors.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdamConfig {
    #[serde(default = "AdamConfig::default_lr")]
    pub lr: f64,
    #[serde(default = "AdamConfig::default_beta1")]
    pub beta1: f64,
    #[serde(default = "AdamConfig::default_beta2")]
    pub beta2: f64,
    #[serde(default = "AdamConfig::default_eps")]
    pub eps: f64,
}

impl AdamConfig {
    fn default_lr() -> f64 {
        5e-3
    }
    fn default_beta1() -> f64 {
        0.9
    }
    fn default_beta2() -> f64 {
        0.999
    }
    fn default_eps() -> f64 {
        1e-8
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: Self::default_lr(),
            beta1: Self::default_beta1(),
            beta2: Self::default_beta2(),
            eps: Self::default_eps(),
        }
    }
}

/// Moment buffers and step counter.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    pub fn new(config: AdamConfig, n: usize) -> Self {
        Self {
            config,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }
}

/// One bias-corrected Adam update of `theta` in place.
pub fn adam_step(state: &mut AdamState, theta: &mut [f64], grad: &[f64]) -> Result<()> {
    if theta.len() != grad.len() || theta.len() != state.m.len() {
        return Err(Error::Usage(format!(
            "adam shapes differ: theta {}, grad {}, state {}",
            theta.len(),
            grad.len(),
            state.m.len()
        )));
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite {
            what: "gradient",
            epoch: state.t as usize,
            params: theta.to_vec(),
        });
    }
    let c = state.config;
    state.t += 1;
    let bc1 = 1.0 - c.beta1.powi(state.t as i32);
    let bc2 = 1.0 - c.beta2.powi(state.t as i32);
    for i in 0..theta.len() {
        let g = grad[i];
        state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * g;
        state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * g * g;
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        theta[i] -= c.lr * m_hat / (v_hat.sqrt() + c.eps);
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LbfgsConfig {
    /// Curvature pairs kept.
    #[serde(default = "LbfgsConfig::default_history")]
    pub history: usize,
    /// Armijo sufficient-decrease constant.
    #[serde(default = "LbfgsConfig::default_c1")]
    pub c1: f64,
    #[serde(default = "LbfgsConfig::default_shrink")]
    pub shrink: f64,
    #[serde(default = "LbfgsConfig::default_max_trials")]
    pub max_trials: usize,
    #[serde(default = "LbfgsConfig::default_grad_tol")]
    pub grad_tol: f64,
    /// Consecutive line-search failures before giving up.
    #[serde(default = "LbfgsConfig::default_max_failures")]
    pub max_failures: usize,
}

impl LbfgsConfig {
    fn default_history() -> usize {
        10
    }
    fn default_c1() -> f64 {
        1e-4
    }
    fn default_shrink() -> f64 {
        0.5
    }
    fn default_max_trials() -> usize {
        20
    }
    fn default_grad_tol() -> f64 {
        1e-10
    }
    fn default_max_failures() -> usize {
        5
    }
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self {
            history: Self::default_history(),
            c1: Self::default_c1(),
            shrink: Self::default_shrink(),
            max_trials: Self::default_max_trials(),
            grad_tol: Self::default_grad_tol(),
            max_failures: Self::default_max_failures(),
        }
    }
}

/// Smallest `sᵀy` admitted as a curvature pair.
pub const CURVATURE_MIN: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LbfgsStatus {
    GradientTolerance,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Clone, Debug)]
pub struct LbfgsResult {
    pub theta: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub status: LbfgsStatus,
    /// Objective at the start and after every iteration.
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Two-loop recursion: `-H·g` from the stored pairs.
fn direction(g: &[f64], pairs: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y, rho) in pairs.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = pairs.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

/// Backtracking Armijo search along `d` from `theta`. Returns the accepted
/// point, value and gradient.
#[allow(clippy::type_complexity)]
fn line_search<F>(
    f: &mut F,
    theta: &[f64],
    fx: f64,
    g: &[f64],
    d: &[f64],
    step0: f64,
    cfg: &LbfgsConfig,
) -> Result<Option<(Vec<f64>, f64, Vec<f64>)>>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let slope = dot(g, d);
    if !(slope < 0.0) {
        return Ok(None);
    }
    let mut step = step0;
    for _ in 0..cfg.max_trials {
        let trial: Vec<f64> = theta.iter().zip(d).map(|(t, di)| t + step * di).collect();
        let (ft, gt) = f(&trial)?;
        if ft.is_finite() && ft <= fx + cfg.c1 * step * slope {
            return Ok(Some((trial, ft, gt)));
        }
        step *= cfg.shrink;
    }
    Ok(None)
}

/// Minimize `f` from `theta0` with L-BFGS and Armijo backtracking.
///
/// `f` returns the objective and its gradient. `on_iter(k, θ, f, g)` runs
/// after every accepted step.
pub fn lbfgs_minimize<F, C>(
    mut f: F,
    theta0: &[f64],
    max_iters: usize,
    cfg: &LbfgsConfig,
    on_iter: C,
) -> Result<LbfgsResult>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
    C: FnMut(usize, &[f64], f64, &[f64]) -> Result<()>,
{
    let start = f(theta0)?;
    lbfgs_minimize_from(f, theta0, start, max_iters, cfg, on_iter)
}

/// [`lbfgs_minimize`] with the objective and gradient at `theta0` supplied.
pub fn lbfgs_minimize_from<F, C>(
    mut f: F,
    theta0: &[f64],
    start: (f64, Vec<f64>),
    max_iters: usize,
    cfg: &LbfgsConfig,
    mut on_iter: C,
) -> Result<LbfgsResult>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
    C: FnMut(usize, &[f64], f64, &[f64]) -> Result<()>,
{
    if cfg.history == 0 {
        return Err(Error::Config("l-bfgs history must be positive".into()));
    }
    let mut theta = theta0.to_vec();
    let (mut fx, mut g) = start;
    let mut history = vec![fx];
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(cfg.history);
    let mut failures = 0;
    let mut iterations = 0;
    let status = loop {
        if norm_inf(&g) <= cfg.grad_tol {
            break LbfgsStatus::GradientTolerance;
        }
        if iterations >= max_iters {
            break LbfgsStatus::MaxIterations;
        }
        let gmax = norm_inf(&g);
        let mut accepted = None;
        if !pairs.is_empty() {
            let d = direction(&g, &pairs);
            accepted = line_search(&mut f, &theta, fx, &g, &d, 1.0, cfg)?;
        }
        if accepted.is_none() {
            // scaled steepest descent, starting smaller after each failure
            pairs.clear();
            let d: Vec<f64> = g.iter().map(|v| -v).collect();
            let step0 = 1.0f64.min(1.0 / gmax) * cfg.shrink.powi((failures * cfg.max_trials) as i32);
            accepted = line_search(&mut f, &theta, fx, &g, &d, step0, cfg)?;
        }
        let Some((next, fn_, gn)) = accepted else {
            failures += 1;
            if failures >= cfg.max_failures {
                break LbfgsStatus::LineSearchFailed;
            }
            continue;
        };
        failures = 0;
        let s: Vec<f64> = next.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > CURVATURE_MIN {
            if pairs.len() == cfg.history {
                pairs.pop_front();
            }
            pairs.push_back((s, y, 1.0 / sy));
        }
        theta = next;
        fx = fn_;
        g = gn;
        iterations += 1;
        history.push(fx);
        on_iter(iterations, &theta, fx, &g)?;
    };
    Ok(LbfgsResult {
        theta,
        f: fx,
        iterations,
        status,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adam_zero_gradient_keeps_theta() {
        let mut st = AdamState::new(AdamConfig::default(), 2);
        let mut theta = vec![0.3, -0.2];
        adam_step(&mut st, &mut theta, &[0.0, 0.0]).unwrap();
        assert_eq!(theta, vec![0.3, -0.2]);
    }

    #[test]
    fn adam_first_step() {
        let cfg = AdamConfig {
            lr: 0.1,
            ..AdamConfig::default()
        };
        let mut st = AdamState::new(cfg, 1);
        let mut theta = vec![0.0];
        adam_step(&mut st, &mut theta, &[1.0]).unwrap();
        assert!((theta[0] + 0.1).abs() < 1e-8);
    }

    #[test]
    fn adam_rejects_non_finite() {
        let mut st = AdamState::new(AdamConfig::default(), 1);
        let mut theta = vec![0.0];
        assert!(matches!(
            adam_step(&mut st, &mut theta, &[f64::NAN]),
            Err(Error::NonFinite { .. })
        ));
    }

    fn quadratic(t: &[f64]) -> Result<(f64, Vec<f64>)> {
        Ok((dot(t, t), t.iter().map(|v| 2.0 * v).collect()))
    }

    #[test]
    fn quadratic_converges_fast() {
        let r = lbfgs_minimize(quadratic, &[3.0, 4.0], 5, &LbfgsConfig::default(), |_, _, _, _| Ok(())).unwrap();
        assert!(dot(&r.theta, &r.theta).sqrt() <= 1e-8, "{:?}", r);
    }

    #[test]
    fn stationary_start_returns_immediately() {
        let mut calls = 0;
        let r = lbfgs_minimize(
            |t| {
                calls += 1;
                quadratic(t)
            },
            &[0.0, 0.0],
            50,
            &LbfgsConfig::default(),
            |_, _, _, _| Ok(()),
        )
        .unwrap();
        assert_eq!((r.iterations, r.status), (0, LbfgsStatus::GradientTolerance));
        assert_eq!(r.theta, vec![0.0, 0.0]);
        assert_eq!(calls, 1);
    }

    fn rosenbrock(t: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (x, y) = (t[0], t[1]);
        let f = (1.0 - x).powi(2) + 100.0 * (y - x * x).powi(2);
        let gx = -2.0 * (1.0 - x) - 400.0 * x * (y - x * x);
        let gy = 200.0 * (y - x * x);
        Ok((f, vec![gx, gy]))
    }

    #[test]
    fn rosenbrock_reaches_minimum() {
        let r = lbfgs_minimize(rosenbrock, &[-1.2, 1.0], 200, &LbfgsConfig::default(), |_, _, _, _| Ok(())).unwrap();
        assert!(r.f <= 1e-10, "{:?}", r.f);
    }

    #[test]
    fn accepted_steps_never_increase_f() {
        let r = lbfgs_minimize(rosenbrock, &[-1.2, 1.0], 60, &LbfgsConfig::default(), |_, _, _, _| Ok(())).unwrap();
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
    }
}
