use crate::error::Result;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MinimizeOptions {
    /// Absolute gradient tolerance; `None` means 1e-9 times the initial gradient norm.
    pub gtol: Option<f64>,
    pub max_iters: usize,
    pub memory: usize,
    /// Largest infinity-norm of the first trial step.
    pub initial_step: f64,
    /// Stop when the relative energy decrease over `stall_window` iterations is below this.
    pub stall_tol: f64,
    pub stall_window: usize,
    /// Iterations between preconditioner refreshes (history is reset at each refresh).
    pub refresh: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions { gtol: None, max_iters: 20_000, memory: 12, initial_step: 1e-2, stall_tol: 1e-8, stall_window: 100, refresh: 25 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Gradient,
    Stalled,
    MaxIterations,
    LineSearch,
}

#[derive(Clone, Debug)]
pub struct Minimization {
    pub x: Vec<f64>,
    pub energy: f64,
    /// Energies of accepted iterates, starting with the initial value; non-increasing.
    pub trace: Vec<f64>,
    /// True only when the gradient tolerance was met.
    pub converged: bool,
    pub reason: StopReason,
    pub iterations: usize,
    pub grad_norm: f64,
    pub gtol: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Approximate inverse Hessian used as the initial matrix of the two-loop recursion.
pub trait Preconditioner {
    fn update(&mut self, x: &[f64]) -> Result<()>;
    fn apply(&self, g: &[f64]) -> Vec<f64>;
}

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACK: usize = 60;

/// Limited-memory BFGS with backtracking (Armijo) line search. Objective errors during the
/// line search count as rejected trial points.
pub fn minimize(
    objective: &mut dyn FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
    x0: Vec<f64>,
    opts: &MinimizeOptions,
) -> Result<Minimization> {
    minimize_preconditioned(objective, x0, opts, None)
}

/// [`minimize`] with an optional preconditioner replacing the scaled identity.
pub fn minimize_preconditioned(
    objective: &mut dyn FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
    x0: Vec<f64>,
    opts: &MinimizeOptions,
    mut precond: Option<&mut dyn Preconditioner>,
) -> Result<Minimization> {
    let mut x = x0;
    let (mut f, mut g) = objective(&x)?;
    let gtol = opts.gtol.unwrap_or(1e-9 * inf_norm(&g));
    let mut trace = vec![f];
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut iterations = 0;
    let mut converged = inf_norm(&g) <= gtol;
    let mut reason = if converged { StopReason::Gradient } else { StopReason::MaxIterations };
    while !converged && iterations < opts.max_iters {
        if let Some(pc) = precond.as_deref_mut() {
            if iterations % opts.refresh.max(1) == 0 {
                pc.update(&x)?;
                hist.clear();
            }
        }
        // two-loop recursion
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        match precond.as_deref() {
            Some(pc) => q = pc.apply(&q),
            None => {
                let gamma = match hist.back() {
                    Some((s, y, _)) => dot(s, y) / dot(y, y),
                    None => opts.initial_step / inf_norm(&g).max(f64::MIN_POSITIVE),
                };
                for v in q.iter_mut() {
                    *v *= gamma;
                }
            }
        }
        for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        let mut d: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            hist.clear();
            let s = opts.initial_step / inf_norm(&g).max(f64::MIN_POSITIVE);
            d = g.iter().map(|v| -v * s).collect();
            slope = dot(&g, &d);
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACK {
            let xn: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + step * di).collect();
            if xn == x {
                break;
            }
            if let Ok((fn_, gn)) = objective(&xn) {
                if fn_.is_finite() && fn_ <= f + ARMIJO * step * slope {
                    accepted = Some((xn, fn_, gn));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((xn, fn_, gn)) = accepted else {
            reason = StopReason::LineSearch;
            break;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-16 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            if hist.len() == opts.memory {
                hist.pop_front();
            }
            hist.push_back((s, y, 1.0 / sy));
        }
        x = xn;
        f = fn_;
        g = gn;
        trace.push(f);
        iterations += 1;
        converged = inf_norm(&g) <= gtol;
        if converged {
            reason = StopReason::Gradient;
        } else if opts.stall_window > 0 && trace.len() > opts.stall_window {
            let old = trace[trace.len() - 1 - opts.stall_window];
            if old - f <= opts.stall_tol * f.abs() {
                reason = StopReason::Stalled;
                break;
            }
        }
    }
    Ok(Minimization { grad_norm: inf_norm(&g), x, energy: f, trace, converged, reason, iterations, gtol })
}
