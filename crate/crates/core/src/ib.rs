//! Information bottleneck.
//!
//! [`ib_fixed_point`] minimizes `I(U;X) − β·I(U;Y)` over `P_{U|X}` (with
//! `U − X − Y`) by the self-consistent iteration
//!
//! ```text
//! q(u|x) ∝ p(u) · exp(−β · KL(P_{Y|X=x} ‖ P_{Y|U=u}))
//! ```
//!
//! followed by a Bayes refresh of `p(u)` and `p(y|u)`. Each cycle is a
//! coordinate descent step, so the Lagrangian never increases within a run.
//!
//! [`ib_curve`] sweeps β and takes the upper concave envelope of the
//! achieved `(I(U;X), I(U;Y))` points. Every envelope point is achievable,
//! so the curve is an inner (lower) approximation of the true
//! `ϑ(R) = max { I(U;Y) : I(U;X) ≤ R }`.

use alloc::vec;
use alloc::vec::Vec;

use crate::dist::{entropy, ConditionalKernel, InfoValue, JointDistribution, Unit};
use crate::modal::{self, GROUPING_TOL};
use crate::{math, rng, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct IbConfig {
    /// Alphabet size of `U`; `None` means `nx + 1`.
    pub card_u: Option<usize>,
    pub restarts: usize,
    /// ℓ∞ change of `P_{U|X}` that ends a run.
    pub conv_tol: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub unit: Unit,
}

impl Default for IbConfig {
    fn default() -> Self {
        IbConfig {
            card_u: None,
            restarts: 20,
            conv_tol: 1e-10,
            max_iters: 2000,
            seed: 0,
            unit: Unit::Bits,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IbSolution {
    pub beta: f64,
    /// `P_{U|X}`, `nx × card_u`.
    pub kernel: ConditionalKernel,
    pub card_u: usize,
    pub i_ux: InfoValue,
    pub i_uy: InfoValue,
    /// `i_ux − β · i_uy`.
    pub lagrangian: InfoValue,
    pub restarts_used: usize,
    pub converged: bool,
}

impl IbSolution {
    pub fn ensure_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged)
        }
    }
}

struct State {
    /// `q[x * m + u]`
    q: Vec<f64>,
    pu: Vec<f64>,
    /// `p(y|u)` at `[u * ny + y]`
    py_u: Vec<f64>,
}

struct Ib<'a> {
    j: &'a JointDistribution,
    /// `P_{Y|X}` row-major.
    py_x: Vec<f64>,
    m: usize,
}

impl<'a> Ib<'a> {
    fn new(j: &'a JointDistribution, m: usize) -> Self {
        let (nx, ny) = (j.nx(), j.ny());
        let mut py_x = vec![0.0; nx * ny];
        for x in 0..nx {
            for y in 0..ny {
                py_x[x * ny + y] = j.get(x, y) / j.px()[x];
            }
        }
        Ib { j, py_x, m }
    }

    fn refresh(&self, q: Vec<f64>) -> State {
        let (nx, ny, m) = (self.j.nx(), self.j.ny(), self.m);
        let px = self.j.px();
        let mut pu = vec![0.0; m];
        let mut py_u = vec![0.0; m * ny];
        for x in 0..nx {
            for u in 0..m {
                let w = q[x * m + u];
                pu[u] += px[x] * w;
                for y in 0..ny {
                    py_u[u * ny + y] += self.j.get(x, y) * w;
                }
            }
        }
        for u in 0..m {
            if pu[u] > 0.0 {
                py_u[u * ny..(u + 1) * ny].iter_mut().for_each(|v| *v /= pu[u]);
            }
        }
        State { q, pu, py_u }
    }

    fn step(&self, s: &State, beta: f64) -> Vec<f64> {
        let (nx, ny, m) = (self.j.nx(), self.j.ny(), self.m);
        let mut q = vec![0.0; nx * m];
        let mut logits = vec![0.0; m];
        for x in 0..nx {
            let row = &self.py_x[x * ny..(x + 1) * ny];
            for u in 0..m {
                logits[u] = if s.pu[u] <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    let mut kl = 0.0;
                    for y in 0..ny {
                        if row[y] > 0.0 {
                            let r = s.py_u[u * ny + y];
                            kl += if r > 0.0 { row[y] * math::ln(row[y] / r) } else { f64::INFINITY };
                        }
                    }
                    math::ln(s.pu[u]) - beta * kl
                };
            }
            let mx = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for u in 0..m {
                let v = if logits[u] == f64::NEG_INFINITY { 0.0 } else { math::exp(logits[u] - mx) };
                q[x * m + u] = v;
                total += v;
            }
            q[x * m..(x + 1) * m].iter_mut().for_each(|v| *v /= total);
        }
        q
    }

    /// `(I(U;X), I(U;Y))` in nats for a refreshed state.
    fn informations(&self, s: &State) -> (f64, f64) {
        let (nx, ny, m) = (self.j.nx(), self.j.ny(), self.m);
        let px = self.j.px();
        let py = self.j.py();
        let mut iux = 0.0;
        for x in 0..nx {
            for u in 0..m {
                let w = s.q[x * m + u];
                if w > 0.0 {
                    iux += px[x] * w * math::ln(w / s.pu[u]);
                }
            }
        }
        let mut iuy = 0.0;
        for u in 0..m {
            for y in 0..ny {
                let r = s.py_u[u * ny + y];
                if s.pu[u] > 0.0 && r > 0.0 {
                    iuy += s.pu[u] * r * math::ln(r / py[y]);
                }
            }
        }
        (iux.max(0.0), iuy.max(0.0))
    }

    fn initial(&self, restart: usize, seed: u64) -> Vec<f64> {
        let (nx, m) = (self.j.nx(), self.m);
        if restart == 0 {
            // U = X, folded modulo card_u
            let mut q = vec![0.0; nx * m];
            (0..nx).for_each(|x| q[x * m + x % m] = 1.0);
            q
        } else {
            let mut g = rng::seeded(seed, restart as u64);
            (0..nx).flat_map(|_| rng::dirichlet(&mut g, m, 1.0)).collect()
        }
    }

    /// One run from `q0`; `trace` receives the Lagrangian (nats) after the
    /// initial refresh and after every cycle.
    fn run(&self, q0: Vec<f64>, beta: f64, cfg: &IbConfig, mut trace: Option<&mut Vec<f64>>) -> Run {
        let mut s = self.refresh(q0);
        let lagr = |s: &State| {
            let (a, b) = self.informations(s);
            a - beta * b
        };
        if let Some(t) = trace.as_deref_mut() {
            t.push(lagr(&s));
        }
        let mut converged = false;
        for _ in 0..cfg.max_iters {
            let q = self.step(&s, beta);
            let change = q.iter().zip(&s.q).fold(0.0_f64, |d, (a, b)| d.max((a - b).abs()));
            s = self.refresh(q);
            if let Some(t) = trace.as_deref_mut() {
                t.push(lagr(&s));
            }
            if change <= cfg.conv_tol {
                converged = true;
                break;
            }
        }
        let (iux, iuy) = self.informations(&s);
        Run { q: s.q, iux, iuy, converged }
    }
}

struct Run {
    q: Vec<f64>,
    iux: f64,
    iuy: f64,
    converged: bool,
}

fn check(beta: f64, cfg: &IbConfig, j: &JointDistribution) -> Result<usize> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidArgument("beta must be positive and finite"));
    }
    let m = cfg.card_u.unwrap_or(j.nx() + 1);
    if m == 0 {
        return Err(Error::InvalidArgument("card_u must be at least 1"));
    }
    if cfg.restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1"));
    }
    Ok(m)
}

/// Best fixed point of the IB iteration over `cfg.restarts` starts.
///
/// Restart 0 starts from `U = X` (folded modulo `card_u`), the others from
/// Dirichlet(1) kernels. The lowest Lagrangian wins, preferring converged
/// runs and then the lower restart index. For `β ≤ 1` the constant `U` is
/// optimal and is returned directly with Lagrangian exactly 0.
pub fn ib_fixed_point(j: &JointDistribution, beta: f64, cfg: &IbConfig) -> Result<IbSolution> {
    let m = check(beta, cfg, j)?;
    let unit = cfg.unit;
    if beta <= 1.0 {
        let mut k = vec![0.0; j.nx() * m];
        (0..j.nx()).for_each(|x| k[x * m] = 1.0);
        return Ok(IbSolution {
            beta,
            kernel: ConditionalKernel::from_parts(j.nx(), m, k),
            card_u: m,
            i_ux: InfoValue::zero(unit),
            i_uy: InfoValue::zero(unit),
            lagrangian: InfoValue::zero(unit),
            restarts_used: 0,
            converged: true,
        });
    }
    let ib = Ib::new(j, m);
    let runs: Vec<Run> = (0..cfg.restarts)
        .map(|r| ib.run(ib.initial(r, cfg.seed), beta, cfg, None))
        .collect();
    let any_converged = runs.iter().any(|r| r.converged);
    let mut best: Option<usize> = None;
    for (i, r) in runs.iter().enumerate() {
        if any_converged && !r.converged {
            continue;
        }
        let l = r.iux - beta * r.iuy;
        match best {
            Some(b) if l >= runs[b].iux - beta * runs[b].iuy - 1e-12 => {}
            _ => best = Some(i),
        }
    }
    let r = &runs[best.expect("restarts >= 1")];
    let lagr = r.iux - beta * r.iuy;
    Ok(IbSolution {
        beta,
        kernel: ConditionalKernel::from_parts(j.nx(), m, r.q.clone()),
        card_u: m,
        i_ux: InfoValue::from_nats(r.iux, unit),
        i_uy: InfoValue::from_nats(r.iuy, unit),
        lagrangian: InfoValue { value: lagr * unit.per_nat(), unit },
        restarts_used: cfg.restarts,
        converged: any_converged,
    })
}

/// Lagrangian after each cycle of a single run (restart index `restart`),
/// in `cfg.unit`. Used to check the descent property.
pub fn ib_lagrangian_trace(
    j: &JointDistribution,
    beta: f64,
    cfg: &IbConfig,
    restart: usize,
) -> Result<Vec<f64>> {
    let m = check(beta, cfg, j)?;
    let ib = Ib::new(j, m);
    let mut trace = Vec::new();
    ib.run(ib.initial(restart, cfg.seed), beta, cfg, Some(&mut trace));
    Ok(trace.into_iter().map(|v| v * cfg.unit.per_nat()).collect())
}

/// Achievable `(R, ϑ)` pairs after envelope post-processing.
#[derive(Debug, Clone, PartialEq)]
pub struct IbCurve {
    /// Envelope vertices `(I(U;X), I(U;Y))`, sorted by `R`.
    pub points: Vec<(f64, f64)>,
    pub betas: Vec<f64>,
    /// The fixed-point solution behind each β.
    pub solutions: Vec<IbSolution>,
    pub mutual_information: f64,
    /// `H(S)` for the minimal sufficient statistic `S` of `X`; `ϑ` saturates
    /// at `I(X;Y)` from here on.
    pub saturation_r: f64,
    pub unit: Unit,
}

/// Upper concave envelope of a point set; the result is sorted by the first
/// coordinate with one vertex per abscissa.
pub fn upper_concave_envelope(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    pts.dedup_by(|later, earlier| later.0 == earlier.0);
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for p in pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b unless it lies strictly above the chord a→p
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// IB solutions over `betas` plus the anchors `(0, 0)`, `(H(S), I(X;Y))`
/// and `(H(X), I(X;Y))`, reduced to their upper concave envelope.
pub fn ib_curve(j: &JointDistribution, betas: &[f64], cfg: &IbConfig) -> Result<IbCurve> {
    if betas.is_empty() {
        return Err(Error::InvalidArgument("beta grid is empty"));
    }
    if betas.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("beta grid must be ascending"));
    }
    let unit = cfg.unit;
    let mi = j.mutual_information(unit).value;
    let hx = j.entropy_x(unit).value;
    let (s, _) = modal::minimal_sufficient_maps(j, GROUPING_TOL);
    let mut ps = vec![0.0; s.image_size()];
    j.px().iter().enumerate().for_each(|(x, &w)| ps[s.apply(x)] += w);
    let hs = entropy(&ps, unit).value;

    let solutions = betas
        .iter()
        .map(|&b| ib_fixed_point(j, b, cfg))
        .collect::<Result<Vec<_>>>()?;
    let mut pts: Vec<(f64, f64)> = vec![(0.0, 0.0), (hs, mi), (hx, mi)];
    pts.extend(solutions.iter().map(|s| (s.i_ux.value, s.i_uy.value.min(mi))));
    Ok(IbCurve {
        points: upper_concave_envelope(&pts),
        betas: betas.to_vec(),
        solutions,
        mutual_information: mi,
        saturation_r: hs,
        unit,
    })
}

/// Piecewise-linear `ϑ(R)` on the envelope, clamped to `[0, I(X;Y)]`.
#[allow(non_snake_case)]
pub fn theta_of_R(curve: &IbCurve, r: f64) -> InfoValue {
    let unit = curve.unit;
    let mi = curve.mutual_information;
    let value = if r <= 0.0 {
        0.0
    } else if r >= curve.saturation_r {
        mi
    } else {
        let pts = &curve.points;
        match pts.iter().position(|p| p.0 >= r) {
            Some(0) => pts[0].1,
            Some(i) => {
                let (a, b) = (pts[i - 1], pts[i]);
                a.1 + (b.1 - a.1) * (r - a.0) / (b.0 - a.0)
            }
            None => pts.last().map_or(0.0, |p| p.1),
        }
    };
    InfoValue { value: value.clamp(0.0, mi), unit }
}
