use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::LN_2;

use crate::dist::{ConditionalKernel, InfoValue, JointDistribution, Unit};
use crate::optim::{self, LbfgsOptions};
use crate::{math, rng, Error, Result};

/// Settings for [`wyner_solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct WynerConfig {
    /// Alphabet size of `W`; `None` means `nx · ny`.
    pub card_w: Option<usize>,
    pub restarts: usize,
    /// L-BFGS iteration cap per penalty stage.
    pub max_iters: usize,
    /// Acceptance threshold on `I(X;Y|W)`, always in bits.
    pub residual_tol: f64,
    pub seed: u64,
    /// Penalty weights tried in order until the residual is small enough.
    pub lambdas: Vec<f64>,
    pub unit: Unit,
}

impl Default for WynerConfig {
    fn default() -> Self {
        WynerConfig {
            card_w: None,
            restarts: 20,
            max_iters: 3000,
            residual_tol: 1e-6,
            seed: 0,
            lambdas: vec![1.0, 10.0, 100.0, 1000.0],
            unit: Unit::Bits,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WynerResult {
    /// Achieved `I(W; X,Y)`, an upper estimate of `C_W`.
    pub value: InfoValue,
    pub card_w: usize,
    /// `P_{W|X,Y}` with row index `x · ny + y`.
    pub kernel: ConditionalKernel,
    /// Achieved `I(X;Y|W)`.
    pub markov_residual: InfoValue,
    pub restarts_used: usize,
    /// Index of the restart that produced the reported kernel.
    pub best_restart: usize,
    pub converged: bool,
}

impl WynerResult {
    /// `Err(NotConverged)` unless some restart met the residual tolerance.
    pub fn ensure_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged)
        }
    }
}

struct Cell {
    x: usize,
    y: usize,
    p: f64,
}

struct Problem {
    cells: Vec<Cell>,
    nx: usize,
    ny: usize,
    m: usize,
}

const LOG_FLOOR: f64 = 1e-300;

/// `I(W;XY)` below this (nats) counts as a constant `W`.
const COLLAPSE_NATS: f64 = 1e-4;

fn ln_floor(v: f64) -> f64 {
    math::ln(v.max(LOG_FLOOR))
}

impl Problem {
    fn new(j: &JointDistribution, m: usize) -> Self {
        let mut cells = Vec::new();
        for x in 0..j.nx() {
            for y in 0..j.ny() {
                let p = j.get(x, y);
                if p > 0.0 {
                    cells.push(Cell { x, y, p });
                }
            }
        }
        Problem { cells, nx: j.nx(), ny: j.ny(), m }
    }

    /// Log-softmax of each cell's logits.
    fn log_kernel(&self, theta: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut lq = vec![0.0; theta.len()];
        for c in 0..self.cells.len() {
            let th = &theta[c * m..(c + 1) * m];
            let mx = th.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = mx + math::ln(th.iter().map(|t| math::exp(t - mx)).sum::<f64>());
            for w in 0..m {
                lq[c * m + w] = th[w] - lse;
            }
        }
        lq
    }

    /// Returns `(I(W;XY), I(X;Y|W))` in nats and, when `grad` is given,
    /// writes the gradient of `I(W;XY) + λ·I(X;Y|W)` w.r.t. the logits.
    fn evaluate(&self, lq: &[f64], lambda: f64, grad: Option<&mut [f64]>) -> (f64, f64) {
        let m = self.m;
        let mut rw = vec![0.0; m];
        let mut rxw = vec![0.0; self.nx * m];
        let mut ryw = vec![0.0; self.ny * m];
        for (c, cell) in self.cells.iter().enumerate() {
            for w in 0..m {
                let r = cell.p * math::exp(lq[c * m + w]);
                rw[w] += r;
                rxw[cell.x * m + w] += r;
                ryw[cell.y * m + w] += r;
            }
        }
        let ln_rw: Vec<f64> = rw.iter().map(|&v| ln_floor(v)).collect();
        let ln_rxw: Vec<f64> = rxw.iter().map(|&v| ln_floor(v)).collect();
        let ln_ryw: Vec<f64> = ryw.iter().map(|&v| ln_floor(v)).collect();

        let mut info = 0.0;
        let mut cmi = 0.0;
        let mut g_cell = vec![0.0; m];
        let mut grad = grad;
        for (c, cell) in self.cells.iter().enumerate() {
            let ln_p = math::ln(cell.p);
            let mut mean = 0.0;
            for w in 0..m {
                let l = lq[c * m + w];
                let q = math::exp(l);
                let a = l - ln_rw[w];
                let b = ln_p + l + ln_rw[w] - ln_rxw[cell.x * m + w] - ln_ryw[cell.y * m + w];
                if q > 0.0 {
                    info += cell.p * q * a;
                    cmi += cell.p * q * b;
                }
                g_cell[w] = a + lambda * b;
                mean += q * g_cell[w];
            }
            if let Some(g) = grad.as_deref_mut() {
                for w in 0..m {
                    let q = math::exp(lq[c * m + w]);
                    g[c * m + w] = cell.p * q * (g_cell[w] - mean);
                }
            }
        }
        (info.max(0.0), cmi.max(0.0))
    }

    fn logits_from_kernel(&self, q: &[Vec<f64>]) -> Vec<f64> {
        q.iter().flat_map(|row| row.iter().map(|&v| ln_floor(v))).collect()
    }

    fn full_kernel(&self, lq: &[f64]) -> ConditionalKernel {
        let m = self.m;
        let uniform = 1.0 / m as f64;
        let mut k = vec![uniform; self.nx * self.ny * m];
        for (c, cell) in self.cells.iter().enumerate() {
            let row = (cell.x * self.ny + cell.y) * m;
            for w in 0..m {
                k[row + w] = math::exp(lq[c * m + w]);
            }
        }
        ConditionalKernel::from_parts(self.nx * self.ny, m, k)
    }
}

struct Run {
    lq: Vec<f64>,
    info: f64,
    cmi: f64,
}

/// Kernel for `W = X` (or `W = Y`) with the remaining mass spread thinly, so
/// every logit is finite.
fn side_start(prob: &Problem, use_x: bool, smoothing: f64) -> Vec<Vec<f64>> {
    let m = prob.m;
    prob.cells
        .iter()
        .map(|cell| {
            let hit = if use_x { cell.x } else { cell.y };
            (0..m)
                .map(|w| smoothing / m as f64 + if w == hit { 1.0 - smoothing } else { 0.0 })
                .collect()
        })
        .collect()
}

/// Side with the smaller entropy that fits in `card_w`, if any.
fn witness_side(j: &JointDistribution, m: usize) -> Option<bool> {
    let hx = j.entropy_x(Unit::Nats).value;
    let hy = j.entropy_y(Unit::Nats).value;
    let fits_x = j.nx() <= m;
    let fits_y = j.ny() <= m;
    match (fits_x, fits_y) {
        (true, true) => Some(hx <= hy),
        (true, false) => Some(true),
        (false, true) => Some(false),
        (false, false) => None,
    }
}

fn run_schedule(prob: &Problem, init: &[Vec<f64>], cfg: &WynerConfig, tol_nats: f64) -> Run {
    let theta0 = prob.logits_from_kernel(init);
    let opts = LbfgsOptions { max_iters: cfg.max_iters, ..LbfgsOptions::default() };
    let mut last = None;
    let mut start = theta0.clone();
    for &lambda in &cfg.lambdas {
        let out = optim::minimize(
            start.clone(),
            |th, g| {
                let lq = prob.log_kernel(th);
                let (i, c) = prob.evaluate(&lq, lambda, Some(g));
                i + lambda * c
            },
            opts,
        );
        let lq = prob.log_kernel(&out.x);
        let (info, cmi) = prob.evaluate(&lq, lambda, None);
        let run = Run { lq, info, cmi };
        if cmi <= tol_nats {
            return run;
        }
        // continue from this stage unless it collapsed to a constant W, a
        // stationary point the next stage cannot leave
        start = if info > COLLAPSE_NATS { out.x } else { theta0.clone() };
        last = Some(run);
    }
    last.unwrap_or_else(|| {
        let lq = prob.log_kernel(&theta0);
        let (info, cmi) = prob.evaluate(&lq, 0.0, None);
        Run { lq, info, cmi }
    })
}

/// Penalized multi-start estimate of Wyner's common information.
///
/// Each restart minimizes `I(W;X,Y) + λ·I(X;Y|W)` over softmax logits of
/// `P_{W|X,Y}` for λ along `cfg.lambdas`. Each stage continues from the
/// previous one, or from the initial kernel if the previous stage collapsed
/// to a constant `W`; the first stage whose residual is within tolerance
/// ends the restart. Restart 0 starts from `W = X` (or `Y`) when
/// `card_w` allows it; the others draw Dirichlet(1) kernels from stream
/// `restart` of the seeded generator. The best accepted value wins, ties
/// going to the lower restart index.
///
/// If no restart is accepted the result has `converged = false` and holds
/// the run with the smallest residual; see [`WynerResult::ensure_converged`].
pub fn wyner_solve(j: &JointDistribution, cfg: &WynerConfig) -> Result<WynerResult> {
    let m = cfg.card_w.unwrap_or(j.nx() * j.ny());
    if m == 0 {
        return Err(Error::InvalidArgument("card_w must be at least 1"));
    }
    if cfg.restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1"));
    }
    if cfg.lambdas.is_empty() || cfg.lambdas.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err(Error::InvalidArgument("penalty schedule must be nonempty and nonnegative"));
    }
    if !(cfg.residual_tol.is_finite() && cfg.residual_tol >= 0.0) {
        return Err(Error::InvalidArgument("residual_tol must be nonnegative"));
    }
    let prob = Problem::new(j, m);
    let tol_nats = cfg.residual_tol * LN_2;
    let side = witness_side(j, m);

    let mut runs: Vec<Run> = Vec::with_capacity(cfg.restarts);
    for restart in 0..cfg.restarts {
        let init = match (restart, side) {
            (0, Some(use_x)) => side_start(&prob, use_x, 1e-3),
            _ => {
                let mut g = rng::seeded(cfg.seed, restart as u64);
                (0..prob.cells.len()).map(|_| rng::dirichlet(&mut g, m, 1.0)).collect()
            }
        };
        let mut run = run_schedule(&prob, &init, cfg, tol_nats);
        if let (0, Some(use_x)) = (restart, side) {
            // the exact side kernel is feasible with value min-side entropy;
            // keep it if the optimizer did not beat it
            let exact = prob.logits_from_kernel(&side_start(&prob, use_x, 0.0));
            let lq = prob.log_kernel(&exact);
            let (info, cmi) = prob.evaluate(&lq, 0.0, None);
            if run.cmi > tol_nats || info < run.info - 1e-12 {
                run = Run { lq, info, cmi };
            }
        }
        runs.push(run);
    }

    let accepted = |r: &Run| r.cmi <= tol_nats;
    let mut best: Option<usize> = None;
    for (i, r) in runs.iter().enumerate() {
        if !accepted(r) {
            continue;
        }
        match best {
            Some(b) if r.info >= runs[b].info - 1e-12 => {}
            _ => best = Some(i),
        }
    }
    let converged = best.is_some();
    let best = best.unwrap_or_else(|| {
        (0..runs.len())
            .min_by(|&a, &b| runs[a].cmi.total_cmp(&runs[b].cmi))
            .expect("restarts >= 1")
    });
    let r = &runs[best];
    Ok(WynerResult {
        value: InfoValue::from_nats(r.info, cfg.unit),
        card_w: m,
        kernel: prob.full_kernel(&r.lq),
        markov_residual: InfoValue::from_nats(r.cmi, cfg.unit),
        restarts_used: cfg.restarts,
        best_restart: best,
        converged,
    })
}

fn hb(b: f64) -> f64 {
    -math::xlnx(b) - math::xlnx(1.0 - b)
}

const FEASIBILITY_TOL: f64 = 1e-12;

/// `I(W;XY)` at `(a, b0)` with the remaining parameters solved from the
/// joint, or `None` if they leave `[0, 1]`.
fn grid_point(p: [[f64; 2]; 2], h_xy: f64, a: f64, b0: f64) -> Option<f64> {
    let px0 = p[0][0] + p[0][1];
    let py0 = p[0][0] + p[1][0];
    let in_unit = |v: f64| (-FEASIBILITY_TOL..=1.0 + FEASIBILITY_TOL).contains(&v);
    if a <= 0.0 || a >= 1.0 {
        return None;
    }
    let b1 = (px0 - a * b0) / (1.0 - a);
    if !in_unit(b1) {
        return None;
    }
    let b1 = b1.clamp(0.0, 1.0);
    // a·c0 + (1−a)·c1 = P_Y(0);  a·b0·c0 + (1−a)·b1·c1 = P(0,0)
    let det = a * (1.0 - a) * (b1 - b0);
    if det.abs() < 1e-14 {
        return None;
    }
    let c0 = ((1.0 - a) * (b1 * py0 - p[0][0])) / det;
    let c1 = (a * (p[0][0] - b0 * py0)) / det;
    if !in_unit(c0) || !in_unit(c1) {
        return None;
    }
    let (c0, c1) = (c0.clamp(0.0, 1.0), c1.clamp(0.0, 1.0));
    let cond = a * (hb(b0) + hb(c0)) + (1.0 - a) * (hb(b1) + hb(c1));
    Some((h_xy - cond).max(0.0))
}

/// Brute-force Wyner value for a 2×2 joint with binary `W`.
///
/// Searches `(P_W(0), P_{X|W}(0|0))` on a `grid_steps²` lattice, solves the
/// remaining parameters of `P_W · P_{X|W} · P_{Y|W}` exactly from the joint,
/// then zooms in around the best feasible point. A constant `W` is feasible
/// only for product joints, where the value is 0.
pub fn wyner_grid_oracle(j: &JointDistribution, grid_steps: usize, unit: Unit) -> Result<InfoValue> {
    if j.nx() != 2 || j.ny() != 2 {
        return Err(Error::InvalidArgument("grid oracle needs a 2x2 joint"));
    }
    if grid_steps < 2 {
        return Err(Error::InvalidArgument("grid_steps must be at least 2"));
    }
    let p = [[j.get(0, 0), j.get(0, 1)], [j.get(1, 0), j.get(1, 1)]];
    let h_xy = j.joint_entropy(Unit::Nats).value;
    if j.mutual_information(Unit::Nats).value <= 1e-12 {
        return Ok(InfoValue::zero(unit));
    }

    let step = 1.0 / (grid_steps - 1) as f64;
    let mut best: Option<(f64, f64, f64)> = None;
    let consider = |a: f64, b0: f64, best: &mut Option<(f64, f64, f64)>| {
        if let Some(v) = grid_point(p, h_xy, a, b0) {
            if best.is_none_or(|(bv, _, _)| v < bv) {
                *best = Some((v, a, b0));
            }
        }
    };
    for i in 0..grid_steps {
        for k in 0..grid_steps {
            consider(i as f64 * step, k as f64 * step, &mut best);
        }
    }
    let Some(_) = best else {
        return Err(Error::NoFeasiblePoint);
    };

    const LOCAL: usize = 21;
    let mut radius = 2.0 * step;
    for _ in 0..8 {
        let (_, ca, cb) = best.expect("seeded above");
        for i in 0..LOCAL {
            for k in 0..LOCAL {
                let da = radius * (2.0 * i as f64 / (LOCAL - 1) as f64 - 1.0);
                let db = radius * (2.0 * k as f64 / (LOCAL - 1) as f64 - 1.0);
                let (a, b0) = (ca + da, cb + db);
                if (0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b0) {
                    consider(a, b0, &mut best);
                }
            }
        }
        radius /= 5.0;
    }
    let (v, _, _) = best.expect("seeded above");
    Ok(InfoValue::from_nats(v, unit))
}
