//! Limited-memory BFGS ascent with backtracking line search. Small and
//! dense: problems here have at most 32 parameters.

// Float supplies libm-backed math where core lacks it.
use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

const MEMORY: usize = 8;
const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maximize `f`, which returns the objective and writes its gradient.
/// Non-finite values are treated as infeasible. Stops once two successive
/// iterations each improve the objective by less than `tol`, or after
/// `max_iter`.
pub(crate) fn maximize<F>(mut f: F, x0: Vec<f64>, tol: f64, max_iter: usize) -> Outcome
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0;
    let mut g = vec![0.0; n];
    let mut value = f(&x, &mut g);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut trial = vec![0.0; n];
    let mut g_trial = vec![0.0; n];
    let mut stalled = 0;

    for iter in 1..=max_iter {
        let gnorm = dot(&g, &g).sqrt();
        if gnorm == 0.0 {
            return Outcome {
                x,
                value,
                iterations: iter - 1,
                converged: true,
            };
        }
        let mut dir = direction(&g, &history);
        let mut slope = dot(&g, &dir);
        if slope.is_nan() || slope <= 0.0 {
            history.clear();
            dir = g.clone();
            slope = gnorm * gnorm;
        }
        let mut step = if history.is_empty() { 1.0 / gnorm } else { 1.0 };

        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            for i in 0..n {
                trial[i] = x[i] + step * dir[i];
            }
            let v = f(&trial, &mut g_trial);
            if v.is_finite() && v >= value + ARMIJO * step * slope {
                accepted = Some(v);
                break;
            }
            step *= 0.5;
        }

        let Some(new_value) = accepted else {
            if history.is_empty() {
                // no ascent step survives rounding: numerically stationary
                return Outcome {
                    x,
                    value,
                    iterations: iter,
                    converged: true,
                };
            }
            history.clear();
            continue;
        };

        // L-BFGS works on the minimization of -f: s = Δx, y = -(Δg).
        let s: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g.iter().zip(&g_trial).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if history.len() == MEMORY {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }

        let gain = new_value - value;
        x.copy_from_slice(&trial);
        g.copy_from_slice(&g_trial);
        value = new_value;
        // two consecutive stalled iterations, so one short step cannot end the run
        if gain < tol {
            stalled += 1;
            if stalled == 2 {
                return Outcome {
                    x,
                    value,
                    iterations: iter,
                    converged: true,
                };
            }
        } else {
            stalled = 0;
        }
    }
    Outcome {
        x,
        value,
        iterations: max_iter,
        converged: false,
    }
}

/// Two-loop recursion: approximate inverse Hessian of `-f` applied to the
/// ascent gradient.
fn direction(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q
}
