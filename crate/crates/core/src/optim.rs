//! Limited-memory BFGS with Armijo backtracking, for smooth unconstrained
//! objectives of a few thousand variables.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy)]
pub(crate) struct LbfgsOptions {
    pub memory: usize,
    pub max_iters: usize,
    /// Relative decrease below which the run stops.
    pub ftol: f64,
    /// ℓ∞ gradient norm below which the run stops.
    pub gtol: f64,
    /// Largest ℓ∞ change of any coordinate in one step.
    pub max_step: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        LbfgsOptions { memory: 10, max_iters: 3000, ftol: 1e-15, gtol: 1e-11, max_step: 10.0 }
    }
}

#[derive(Debug, Clone)]
#[allow(dead_code)]
pub(crate) struct LbfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// Stopped on a tolerance rather than the iteration cap.
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn linf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Minimizes `f`, which writes its gradient into the second argument and
/// returns the objective value.
pub(crate) fn minimize(
    x0: Vec<f64>,
    mut f: impl FnMut(&[f64], &mut [f64]) -> f64,
    opts: LbfgsOptions,
) -> LbfgsOutcome {
    let n = x0.len();
    let mut x = x0;
    let mut g = vec![0.0; n];
    let mut fx = f(&x, &mut g);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut alpha_buf = vec![0.0; opts.memory];

    if !fx.is_finite() {
        return LbfgsOutcome { x, value: fx, iterations: 0, converged: false };
    }

    for iter in 0..opts.max_iters {
        if linf(&g) <= opts.gtol {
            return LbfgsOutcome { x, value: fx, iterations: iter, converged: true };
        }

        // two-loop recursion
        d.iter_mut().zip(&g).for_each(|(di, gi)| *di = -gi);
        for (k, (s, y, rho)) in history.iter().enumerate().rev() {
            let a = rho * dot(s, &d);
            alpha_buf[k] = a;
            d.iter_mut().zip(y).for_each(|(di, yi)| *di -= a * yi);
        }
        if let Some((s, y, _)) = history.back() {
            let gamma = dot(s, y) / dot(y, y);
            d.iter_mut().for_each(|di| *di *= gamma);
        }
        for (k, (s, y, rho)) in history.iter().enumerate() {
            let b = rho * dot(y, &d);
            let a = alpha_buf[k];
            d.iter_mut().zip(s).for_each(|(di, si)| *di += (a - b) * si);
        }

        let mut slope = dot(&g, &d);
        if slope.is_nan() || slope >= 0.0 {
            history.clear();
            d.iter_mut().zip(&g).for_each(|(di, gi)| *di = -gi);
            slope = dot(&g, &d);
        }

        let mut step = if history.is_empty() { 1.0 / linf(&g).max(1.0) } else { 1.0 };
        let dmax = linf(&d);
        if step * dmax > opts.max_step {
            step = opts.max_step / dmax;
        }

        let mut accepted = false;
        let mut f_new = fx;
        for _ in 0..60 {
            for i in 0..n {
                x_new[i] = x[i] + step * d[i];
            }
            f_new = f(&x_new, &mut g_new);
            if f_new.is_finite() && f_new <= fx + 1e-4 * step * slope {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // no descent along d at floating-point resolution
            return LbfgsOutcome { x, value: fx, iterations: iter, converged: true };
        }

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            if history.len() == opts.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }

        let decrease = fx - f_new;
        core::mem::swap(&mut x, &mut x_new);
        core::mem::swap(&mut g, &mut g_new);
        fx = f_new;
        if decrease <= opts.ftol * fx.abs().max(1.0) {
            return LbfgsOutcome { x, value: fx, iterations: iter + 1, converged: true };
        }
    }
    LbfgsOutcome { x, value: fx, iterations: opts.max_iters, converged: false }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let out = minimize(
            vec![-1.2, 1.0],
            |x, g| {
                let (a, b) = (x[0], x[1]);
                g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
                g[1] = 200.0 * (b - a * a);
                (1.0 - a) * (1.0 - a) + 100.0 * (b - a * a) * (b - a * a)
            },
            LbfgsOptions::default(),
        );
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-6 && (out.x[1] - 1.0).abs() < 1e-6, "{:?}", out.x);
    }

    #[test]
    fn ill_conditioned_quadratic() {
        let scales = [1.0, 1e2, 1e4, 1e6];
        let out = minimize(
            vec![1.0; 4],
            |x, g| {
                let mut v = 0.0;
                for i in 0..4 {
                    g[i] = scales[i] * x[i];
                    v += 0.5 * scales[i] * x[i] * x[i];
                }
                v
            },
            LbfgsOptions::default(),
        );
        assert!(out.value < 1e-12, "{}", out.value);
    }
}
