//! Limited-memory BFGS with a strong-Wolfe line search.
//!
//! The line search follows the bracketing/zoom scheme of Nocedal & Wright
//! (Algorithms 3.5 and 3.6) with safeguarded cubic interpolation. The
//! objective is a closure `f(x, grad) -> value`; returning a non-finite value
//! marks `x` as outside the domain, and the line search backs off from it.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicBool, Ordering};

#[derive(Clone, Debug, PartialEq)]
pub struct LbfgsParams {
    /// Number of stored correction pairs.
    pub memory: usize,
    pub max_iterations: usize,
    /// Stop once `‖∇f‖_∞` falls to this value.
    pub gradient_tolerance: f64,
    /// Stop once `f` falls to this value.
    pub value_target: Option<f64>,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    pub max_line_search_evals: usize,
    /// Keep the accepted objective values in `LbfgsResult::trace`.
    pub record_trace: bool,
}

impl Default for LbfgsParams {
    fn default() -> Self {
        Self {
            memory: 10,
            max_iterations: 100_000,
            gradient_tolerance: 1e-12,
            value_target: None,
            c1: 1e-4,
            c2: 0.9,
            max_line_search_evals: 40,
            record_trace: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    ValueTarget,
    GradientTolerance,
    MaxIterations,
    LineSearchFailed,
    /// The starting point evaluated to a non-finite value.
    NonFinite,
    Cancelled,
}

impl Termination {
    pub fn converged(self) -> bool {
        matches!(self, Termination::ValueTarget | Termination::GradientTolerance)
    }
}

#[derive(Clone, Debug)]
pub struct LbfgsResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
    /// `f(x_0), f(x_1), …` when tracing was requested.
    pub trace: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

struct Probe {
    alpha: f64,
    value: f64,
    slope: f64,
    x: Vec<f64>,
    grad: Vec<f64>,
}

struct LineSearch<'a, F> {
    f: &'a mut F,
    x0: &'a [f64],
    dir: &'a [f64],
    f0: f64,
    slope0: f64,
    c1: f64,
    c2: f64,
    budget: usize,
    evals: usize,
    /// Lowest value seen, used as a fallback when the Wolfe conditions cannot be met.
    best: Option<Probe>,
}

impl<F: FnMut(&[f64], &mut [f64]) -> f64> LineSearch<'_, F> {
    fn probe(&mut self, alpha: f64) -> Probe {
        self.evals += 1;
        let x: Vec<f64> = self.x0.iter().zip(self.dir).map(|(a, p)| a + alpha * p).collect();
        let mut grad = vec![0.0; x.len()];
        let value = (self.f)(&x, &mut grad);
        let (value, slope) = if value.is_finite() { (value, dot(&grad, self.dir)) } else { (f64::INFINITY, f64::NAN) };
        let p = Probe { alpha, value, slope, x, grad };
        if value < self.best.as_ref().map_or(self.f0, |b| b.value) {
            self.best = Some(Probe { alpha, value, slope, x: p.x.clone(), grad: p.grad.clone() });
        }
        p
    }

    fn armijo(&self, p: &Probe) -> bool {
        p.value <= self.f0 + self.c1 * p.alpha * self.slope0
    }

    fn curvature(&self, p: &Probe) -> bool {
        p.slope.abs() <= -self.c2 * self.slope0
    }

    fn run(&mut self, mut alpha: f64) -> Option<Probe> {
        let mut prev = Probe { alpha: 0.0, value: self.f0, slope: self.slope0, x: Vec::new(), grad: Vec::new() };
        let mut first = true;
        while self.evals < self.budget {
            let cur = self.probe(alpha);
            if !cur.value.is_finite() {
                alpha = 0.5 * (prev.alpha + alpha);
                continue;
            }
            if !self.armijo(&cur) || (!first && cur.value >= prev.value) {
                return self.zoom(prev, cur);
            }
            if self.curvature(&cur) {
                return Some(cur);
            }
            if cur.slope >= 0.0 {
                return self.zoom(cur, prev);
            }
            first = false;
            alpha *= 2.0;
            prev = cur;
        }
        None
    }

    fn zoom(&mut self, mut lo: Probe, mut hi: Probe) -> Option<Probe> {
        while self.evals < self.budget {
            let width = hi.alpha - lo.alpha;
            if width.abs() <= f64::EPSILON * lo.alpha.abs().max(hi.alpha.abs()) {
                return None;
            }
            let alpha = match cubic_minimizer(&lo, &hi) {
                Some(a) if (a - lo.alpha) / width > 0.1 && (hi.alpha - a) / width > 0.1 => a,
                _ => lo.alpha + 0.5 * width,
            };
            let cur = self.probe(alpha);
            if !self.armijo(&cur) || cur.value >= lo.value {
                hi = cur;
            } else {
                if self.curvature(&cur) {
                    return Some(cur);
                }
                if cur.slope * (hi.alpha - lo.alpha) >= 0.0 {
                    hi = std::mem::replace(&mut lo, cur);
                } else {
                    lo = cur;
                }
            }
        }
        None
    }
}

/// Minimizer of the cubic through both endpoints' values and slopes.
fn cubic_minimizer(a: &Probe, b: &Probe) -> Option<f64> {
    if !b.value.is_finite() || !b.slope.is_finite() {
        return None;
    }
    let d1 = a.slope + b.slope - 3.0 * (a.value - b.value) / (a.alpha - b.alpha);
    let disc = d1 * d1 - a.slope * b.slope;
    if disc < 0.0 {
        return None;
    }
    let d2 = (b.alpha - a.alpha).signum() * disc.sqrt();
    let denom = b.slope - a.slope + 2.0 * d2;
    if denom == 0.0 {
        return None;
    }
    let t = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / denom;
    t.is_finite().then_some(t)
}

/// Minimizes `f` from `x0`.
///
/// `project` is applied to every accepted iterate; it must leave `f` and its
/// gradient unchanged (a projection the objective already factors through).
/// `cancel` is polled once per iteration.
pub fn minimize<F>(
    mut f: F,
    x0: &[f64],
    params: &LbfgsParams,
    project: Option<&dyn Fn(&[f64]) -> Vec<f64>>,
    cancel: Option<&AtomicBool>,
) -> LbfgsResult
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = match project {
        Some(p) => p(x0),
        None => x0.to_vec(),
    };
    let mut grad = vec![0.0; n];
    let mut value = f(&x, &mut grad);
    let mut evaluations = 1;
    let mut trace = Vec::new();
    let finish = |x: Vec<f64>, value: f64, grad: &[f64], iterations, evaluations, termination, trace| LbfgsResult {
        x,
        value,
        gradient_norm: inf_norm(grad),
        iterations,
        evaluations,
        termination,
        trace,
    };
    if !value.is_finite() {
        return finish(x, value, &grad, 0, evaluations, Termination::NonFinite, trace);
    }
    if params.record_trace {
        trace.push(value);
    }

    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(params.memory);
    let mut iterations = 0;
    loop {
        if params.value_target.is_some_and(|t| value <= t) {
            return finish(x, value, &grad, iterations, evaluations, Termination::ValueTarget, trace);
        }
        if inf_norm(&grad) <= params.gradient_tolerance {
            return finish(x, value, &grad, iterations, evaluations, Termination::GradientTolerance, trace);
        }
        if iterations >= params.max_iterations {
            return finish(x, value, &grad, iterations, evaluations, Termination::MaxIterations, trace);
        }
        if cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
            return finish(x, value, &grad, iterations, evaluations, Termination::Cancelled, trace);
        }

        let mut dir = two_loop(&grad, &history);
        let mut slope = dot(&grad, &dir);
        if !(slope < 0.0) {
            history.clear();
            dir = grad.iter().map(|g| -g).collect();
            slope = dot(&grad, &dir);
        }
        let alpha0 = if history.is_empty() { (1.0 / inf_norm(&grad)).min(1.0) } else { 1.0 };

        let mut ls = LineSearch {
            f: &mut f,
            x0: &x,
            dir: &dir,
            f0: value,
            slope0: slope,
            c1: params.c1,
            c2: params.c2,
            budget: params.max_line_search_evals,
            evals: 0,
            best: None,
        };
        let accepted = ls.run(alpha0);
        let best = ls.best.take();
        evaluations += ls.evals;
        let step = match (accepted, best) {
            (Some(p), _) => p,
            // Wolfe conditions unattainable (typically at the rounding floor):
            // take the best decrease found, if any.
            (None, Some(b)) => b,
            (None, None) => {
                return finish(x, value, &grad, iterations, evaluations, Termination::LineSearchFailed, trace);
            }
        };

        let new_x = match project {
            Some(p) => p(&step.x),
            None => step.x,
        };
        let s: Vec<f64> = new_x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = step.grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > f64::EPSILON * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if history.len() == params.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        x = new_x;
        grad = step.grad;
        value = step.value;
        iterations += 1;
        if params.record_trace {
            trace.push(value);
        }
    }
}

fn two_loop(grad: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = grad.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64], g: &mut [f64]) -> f64 {
        let n = x.len();
        let mut f = 0.0;
        g.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n - 1 {
            let a = x[i + 1] - x[i] * x[i];
            let b = 1.0 - x[i];
            f += 100.0 * a * a + b * b;
            g[i] += -400.0 * x[i] * a - 2.0 * b;
            g[i + 1] += 200.0 * a;
        }
        f
    }

    #[test]
    fn minimizes_rosenbrock() {
        let params = LbfgsParams { gradient_tolerance: 1e-10, record_trace: true, ..Default::default() };
        let r = minimize(rosenbrock, &[-1.2, 1.0, -1.2, 1.0, 0.5, 0.3], &params, None, None);
        assert_eq!(r.termination, Termination::GradientTolerance);
        assert!(r.x.iter().all(|v| (v - 1.0).abs() < 1e-8), "{:?}", r.x);
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn quadratic_converges_quickly() {
        let diag = [1.0, 10.0, 100.0];
        let f = |x: &[f64], g: &mut [f64]| {
            let mut v = 0.0;
            for i in 0..3 {
                g[i] = diag[i] * x[i];
                v += 0.5 * diag[i] * x[i] * x[i];
            }
            v
        };
        let params = LbfgsParams { gradient_tolerance: 1e-12, ..Default::default() };
        let r = minimize(f, &[1.0, 1.0, 1.0], &params, None, None);
        assert!(r.termination.converged());
        assert!(r.iterations < 20);
    }

    #[test]
    fn starting_at_optimum_takes_no_steps() {
        let f = |x: &[f64], g: &mut [f64]| {
            g.copy_from_slice(x);
            0.5 * dot(x, x)
        };
        let r = minimize(f, &[0.0, 0.0], &LbfgsParams::default(), None, None);
        assert_eq!(r.iterations, 0);
        assert_eq!(r.termination, Termination::GradientTolerance);
    }

    #[test]
    fn value_target_and_budget() {
        let params = LbfgsParams { value_target: Some(1e-3), gradient_tolerance: 0.0, ..Default::default() };
        let r = minimize(rosenbrock, &[-1.2, 1.0], &params, None, None);
        assert_eq!(r.termination, Termination::ValueTarget);
        assert!(r.value <= 1e-3);

        let params = LbfgsParams { max_iterations: 3, gradient_tolerance: 0.0, ..Default::default() };
        let r = minimize(rosenbrock, &[-1.2, 1.0], &params, None, None);
        assert_eq!(r.termination, Termination::MaxIterations);
        assert_eq!(r.iterations, 3);
    }

    #[test]
    fn nonfinite_start_and_cancellation() {
        let f = |_: &[f64], _: &mut [f64]| f64::NAN;
        let r = minimize(f, &[1.0], &LbfgsParams::default(), None, None);
        assert_eq!(r.termination, Termination::NonFinite);

        let flag = AtomicBool::new(true);
        let r = minimize(rosenbrock, &[-1.2, 1.0], &LbfgsParams::default(), None, Some(&flag));
        assert_eq!(r.termination, Termination::Cancelled);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn respects_projection() {
        // f depends only on x[0]; the projection pins x[1] to zero.
        let f = |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * (x[0] - 3.0);
            g[1] = 0.0;
            (x[0] - 3.0).powi(2)
        };
        let proj = |x: &[f64]| vec![x[0], 0.0];
        let r = minimize(f, &[0.0, 5.0], &LbfgsParams::default(), Some(&proj), None);
        assert!(r.termination.converged());
        assert_eq!(r.x[1], 0.0);
        assert!((r.x[0] - 3.0).abs() < 1e-10);
    }

    #[test]
    fn backs_off_from_domain_boundary() {
        // -log(x) + x has its minimum at 1 and is undefined for x ≤ 0.
        let f = |x: &[f64], g: &mut [f64]| {
            if x[0] <= 0.0 {
                return f64::INFINITY;
            }
            g[0] = -1.0 / x[0] + 1.0;
            -x[0].ln() + x[0]
        };
        let r = minimize(f, &[0.01], &LbfgsParams { gradient_tolerance: 1e-10, ..Default::default() }, None, None);
        assert!(r.termination.converged(), "{:?}", r.termination);
        assert!((r.x[0] - 1.0).abs() < 1e-8);
    }
}
