//! Test bed for the separability claims.
//!
//! [`refine_embedding`] splits every symbol of a base joint `(S, T)` into a
//! block of finer symbols, giving a joint `(X, Y)` for which the block maps
//! are sufficient by construction. [`verify_separability`] computes a set of
//! measures on both sides and reports the gaps. [`simulate_and_estimate`]
//! runs the sample-based version: draw pairs, then estimate on raw and on
//! aggregated counts.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::LN_2;

use crate::common::{self, WynerConfig};
use crate::dist::{DeterministicMap, InfoValue, JointDistribution, Unit};
use crate::finfo::{self, FGenerator};
use crate::ib::{self, IbConfig};
use crate::modal::{self, SufficiencyVerdict, SUFFICIENCY_TOL};
use crate::{math, rng, Error, Result};

/// Block weights for splitting each base symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementSpec {
    pub base: JointDistribution,
    /// `split_x[s]` distributes `s` over its refined symbols.
    pub split_x: Vec<Vec<f64>>,
    pub split_y: Vec<Vec<f64>>,
    pub seed: u64,
}

const BLOCK_SUM_TOL: f64 = 1e-9;

fn check_blocks(blocks: &[Vec<f64>], n: usize) -> Result<()> {
    if blocks.len() != n {
        return Err(Error::DimensionError { expected: n, found: blocks.len() });
    }
    for b in blocks {
        if b.is_empty() || b.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument("block weights must be nonempty and nonnegative"));
        }
        if (b.iter().sum::<f64>() - 1.0).abs() > BLOCK_SUM_TOL {
            return Err(Error::InvalidArgument("block weights must sum to 1"));
        }
    }
    Ok(())
}

impl RefinementSpec {
    pub fn new(
        base: JointDistribution,
        split_x: Vec<Vec<f64>>,
        split_y: Vec<Vec<f64>>,
        seed: u64,
    ) -> Result<Self> {
        check_blocks(&split_x, base.nx())?;
        check_blocks(&split_y, base.ny())?;
        Ok(RefinementSpec { base, split_x, split_y, seed })
    }

    /// Every block of size one: the refinement is the base itself.
    pub fn trivial(base: JointDistribution) -> Self {
        let split_x = vec![vec![1.0]; base.nx()];
        let split_y = vec![vec![1.0]; base.ny()];
        RefinementSpec { base, split_x, split_y, seed: 0 }
    }

    /// Blocks of the given sizes with Dirichlet(1) weights.
    pub fn with_sizes(
        base: JointDistribution,
        sizes_x: &[usize],
        sizes_y: &[usize],
        seed: u64,
    ) -> Result<Self> {
        if sizes_x.len() != base.nx() {
            return Err(Error::DimensionError { expected: base.nx(), found: sizes_x.len() });
        }
        if sizes_y.len() != base.ny() {
            return Err(Error::DimensionError { expected: base.ny(), found: sizes_y.len() });
        }
        if sizes_x.iter().chain(sizes_y).any(|&k| k == 0) {
            return Err(Error::InvalidArgument("block sizes must be at least 1"));
        }
        let mut g = rng::seeded(seed, 1);
        let split_x = sizes_x.iter().map(|&k| rng::dirichlet(&mut g, k, 1.0)).collect();
        let split_y = sizes_y.iter().map(|&k| rng::dirichlet(&mut g, k, 1.0)).collect();
        Ok(RefinementSpec { base, split_x, split_y, seed })
    }

    /// Block sizes drawn uniformly from `1..=max_block`, so the refined
    /// alphabets have at most `max_block` times the base sizes.
    pub fn random(base: JointDistribution, max_block: usize, seed: u64) -> Result<Self> {
        if max_block == 0 {
            return Err(Error::InvalidArgument("max_block must be at least 1"));
        }
        let mut g = rng::seeded(seed, 0);
        let mut draw = |n: usize| -> Vec<usize> {
            (0..n)
                .map(|_| 1 + ((rng::uniform(&mut g) * max_block as f64) as usize).min(max_block - 1))
                .collect()
        };
        let sx = draw(base.nx());
        let sy = draw(base.ny());
        Self::with_sizes(base, &sx, &sy, seed)
    }
}

/// Symbols with positive weight, as `(block, weight)` in refined order.
fn refined_symbols(blocks: &[Vec<f64>]) -> Vec<(usize, f64)> {
    blocks
        .iter()
        .enumerate()
        .flat_map(|(b, ws)| ws.iter().filter(|w| **w > 0.0).map(move |&w| (b, w)))
        .collect()
}

/// Builds `P(x,y) = P_{S,T}(s(x), t(y)) · w_x · w_y` and the block maps.
/// Zero-weight refined symbols are dropped and the rest re-indexed.
pub fn refine_embedding(
    spec: &RefinementSpec,
) -> Result<(JointDistribution, DeterministicMap, DeterministicMap)> {
    let base = &spec.base;
    check_blocks(&spec.split_x, base.nx())?;
    check_blocks(&spec.split_y, base.ny())?;
    let xs = refined_symbols(&spec.split_x);
    let ys = refined_symbols(&spec.split_y);
    let mut p = Vec::with_capacity(xs.len() * ys.len());
    for &(s, wx) in &xs {
        for &(t, wy) in &ys {
            p.push(base.get(s, t) * wx * wy);
        }
    }
    let j = JointDistribution::from_flat(xs.len(), ys.len(), p)?;
    let s = DeterministicMap::new(xs.iter().map(|e| e.0).collect(), base.nx())?;
    let t = DeterministicMap::new(ys.iter().map(|e| e.0).collect(), base.ny())?;
    Ok((j, s, t))
}

/// Flat Dirichlet(`alpha`) draw over the `nx · ny` cells, trimmed.
pub fn random_joint(nx: usize, ny: usize, alpha: f64, seed: u64) -> Result<JointDistribution> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument("alphabet sizes must be at least 1"));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidArgument("alpha must be positive"));
    }
    let mut g = rng::seeded(seed, 0);
    JointDistribution::from_flat(nx, ny, rng::dirichlet(&mut g, nx * ny, alpha))
}

/// A quantity compared between the raw and the reduced joint.
#[derive(Debug, Clone)]
pub enum Measure {
    MutualInformation,
    FInformation(FGenerator),
    GacsKorner,
    Wyner,
    /// Minimum IB Lagrangian at each β.
    IbLagrangian(Vec<f64>),
    /// `ϑ(R)` at each `R`, from the curve over the β grid.
    Theta { betas: Vec<f64>, rs: Vec<f64> },
}

impl Measure {
    /// MI, every built-in generator, GK, Wyner, IB at β ∈ {1.5, 2, 5}, and
    /// `ϑ` at `rs`.
    pub fn full_suite(rs: Vec<f64>) -> Vec<Measure> {
        let mut m = vec![Measure::MutualInformation];
        m.extend(FGenerator::builtins().into_iter().map(Measure::FInformation));
        m.push(Measure::GacsKorner);
        m.push(Measure::Wyner);
        m.push(Measure::IbLagrangian(vec![1.5, 2.0, 5.0]));
        if !rs.is_empty() {
            m.push(Measure::Theta { betas: vec![1.1, 1.5, 2.0, 3.0, 5.0, 10.0], rs });
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Closed-form measures (MI, f-information, GK).
    pub exact: f64,
    /// Optimizer-based measures, in bits.
    pub solver: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { exact: 1e-9, solver: 5e-3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub wyner: WynerConfig,
    pub ib: IbConfig,
    /// Unit of every reported value; overrides the units inside the solver
    /// configs.
    pub unit: Unit,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { wyner: WynerConfig::default(), ib: IbConfig::default(), unit: Unit::Bits }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub measure: String,
    pub value_raw: f64,
    pub value_reduced: f64,
    pub gap: f64,
    pub tol: f64,
    pub unit: Unit,
    /// Solver rows only: both sides converged.
    pub converged: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparabilityReport {
    pub rows: Vec<ReportRow>,
    pub s: DeterministicMap,
    pub t: DeterministicMap,
    pub sufficiency: SufficiencyVerdict,
    pub pass: bool,
}

fn push_row(
    rows: &mut Vec<ReportRow>,
    measure: String,
    raw: InfoValue,
    reduced: InfoValue,
    tol: f64,
    converged: bool,
) {
    let gap = finfo::value_gap(raw.value, reduced.value);
    rows.push(ReportRow {
        measure,
        value_raw: raw.value,
        value_reduced: reduced.value,
        gap,
        tol,
        unit: raw.unit,
        converged,
        pass: converged && gap <= tol,
    });
}

/// Computes each measure on `j` and on the joint of `(s(X), t(Y))`.
///
/// Closed-form measures use `tols.exact`; solver measures use `tols.solver`
/// (bits, converted to the report unit) and also require convergence on
/// both sides. GK additionally requires the same number of unit modes.
///
/// With `strict`, maps that fail [`modal::check_sufficiency`] are an error;
/// otherwise the verdict is recorded and the comparison proceeds.
pub fn verify_separability(
    j: &JointDistribution,
    s: &DeterministicMap,
    t: &DeterministicMap,
    measures: &[Measure],
    tols: &Tolerances,
    solver: &SolverConfig,
    strict: bool,
) -> Result<SeparabilityReport> {
    let verdict = modal::check_sufficiency(j, s, t, SUFFICIENCY_TOL)?;
    if strict && !verdict.sufficient {
        return Err(Error::InsufficientStatistic { gap: verdict.max_ratio_gap });
    }
    let red = modal::reduce_joint(j, s, t, false)?;
    let unit = solver.unit;
    let solver_tol = tols.solver * LN_2 * unit.per_nat();
    let wyner_cfg = WynerConfig { unit, ..solver.wyner.clone() };
    let ib_cfg = IbConfig { unit, ..solver.ib.clone() };

    let mut rows = Vec::new();
    for m in measures {
        match m {
            Measure::MutualInformation => push_row(
                &mut rows,
                "mi".into(),
                j.mutual_information(unit),
                red.mutual_information(unit),
                tols.exact,
                true,
            ),
            Measure::FInformation(f) => push_row(
                &mut rows,
                String::from(f.name()),
                finfo::f_information(j, f, unit),
                finfo::f_information(&red, f, unit),
                tols.exact,
                true,
            ),
            Measure::GacsKorner => {
                let a = common::gacs_korner(j, common::UNIT_TOL, unit)?;
                let b = common::gacs_korner(&red, common::UNIT_TOL, unit)?;
                push_row(&mut rows, "gk".into(), a.value, b.value, tols.exact, true);
                let row = rows.last_mut().expect("just pushed");
                row.pass &= a.k == b.k;
            }
            Measure::Wyner => {
                let a = common::wyner_solve(j, &wyner_cfg)?;
                let b = common::wyner_solve(&red, &wyner_cfg)?;
                let ok = a.converged && b.converged;
                push_row(&mut rows, "wyner".into(), a.value, b.value, solver_tol, ok);
            }
            Measure::IbLagrangian(betas) => {
                for &beta in betas {
                    let a = ib::ib_fixed_point(j, beta, &ib_cfg)?;
                    let b = ib::ib_fixed_point(&red, beta, &ib_cfg)?;
                    let ok = a.converged && b.converged;
                    push_row(
                        &mut rows,
                        format!("ib_beta_{}", beta),
                        a.lagrangian,
                        b.lagrangian,
                        solver_tol,
                        ok,
                    );
                }
            }
            Measure::Theta { betas, rs } => {
                let ca = ib::ib_curve(j, betas, &ib_cfg)?;
                let cb = ib::ib_curve(&red, betas, &ib_cfg)?;
                for &r in rs {
                    push_row(
                        &mut rows,
                        format!("theta_R_{}", r),
                        ib::theta_of_R(&ca, r),
                        ib::theta_of_R(&cb, r),
                        solver_tol,
                        true,
                    );
                }
            }
        }
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(SeparabilityReport { rows, s: s.clone(), t: t.clone(), sufficiency: verdict, pass })
}

/// Outcome of [`simulate_and_estimate`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutcome {
    pub mi_true: InfoValue,
    pub mi_plugin_raw: InfoValue,
    pub mi_plugin_reduced: InfoValue,
    /// Row-major `nx × ny` counts.
    pub raw_counts: Vec<u64>,
    /// Row-major counts of `(s(X), t(Y))`.
    pub reduced_counts: Vec<u64>,
    pub n: u64,
}

/// Plug-in mutual information of a row-major count table.
pub fn plugin_mutual_information(counts: &[u64], nx: usize, ny: usize, unit: Unit) -> Result<InfoValue> {
    if counts.len() != nx * ny {
        return Err(Error::DimensionError { expected: nx * ny, found: counts.len() });
    }
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return Err(Error::InvalidArgument("no samples"));
    }
    let mut cx = vec![0u64; nx];
    let mut cy = vec![0u64; ny];
    for x in 0..nx {
        for y in 0..ny {
            cx[x] += counts[x * ny + y];
            cy[y] += counts[x * ny + y];
        }
    }
    let nf = n as f64;
    let mut nats = 0.0;
    for x in 0..nx {
        for y in 0..ny {
            let c = counts[x * ny + y];
            if c > 0 {
                let c = c as f64;
                nats += c / nf * math::ln(c * nf / (cx[x] as f64 * cy[y] as f64));
            }
        }
    }
    Ok(InfoValue::from_nats(nats, unit))
}

/// Aggregates a raw count table through `(s, t)`.
pub fn pushforward_counts(
    counts: &[u64],
    nx: usize,
    ny: usize,
    s: &DeterministicMap,
    t: &DeterministicMap,
) -> Result<Vec<u64>> {
    if s.domain_size() != nx {
        return Err(Error::DimensionError { expected: nx, found: s.domain_size() });
    }
    if t.domain_size() != ny {
        return Err(Error::DimensionError { expected: ny, found: t.domain_size() });
    }
    let nt = t.image_size();
    let mut out = vec![0u64; s.image_size() * nt];
    for x in 0..nx {
        for y in 0..ny {
            out[s.apply(x) * nt + t.apply(y)] += counts[x * ny + y];
        }
    }
    Ok(out)
}

/// Draws `n` pairs from `j` by inverse-CDF sampling over the flattened cells
/// and estimates MI from the raw and the aggregated counts.
pub fn simulate_and_estimate(
    j: &JointDistribution,
    s: &DeterministicMap,
    t: &DeterministicMap,
    n: u64,
    seed: u64,
    unit: Unit,
) -> Result<SimulationOutcome> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1"));
    }
    let (nx, ny) = (j.nx(), j.ny());
    let probs = j.probabilities();
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cdf.push(acc);
    }
    // rounding can leave the last partial sum just below 1
    let last_positive = probs.iter().rposition(|&p| p > 0.0).expect("positive mass");
    let mut g = rng::seeded(seed, 0);
    let mut counts = vec![0u64; nx * ny];
    for _ in 0..n {
        let u = rng::uniform(&mut g);
        let cell = cdf.partition_point(|&c| c <= u).min(last_positive);
        counts[cell] += 1;
    }
    let reduced = pushforward_counts(&counts, nx, ny, s, t)?;
    Ok(SimulationOutcome {
        mi_true: j.mutual_information(unit),
        mi_plugin_raw: plugin_mutual_information(&counts, nx, ny, unit)?,
        mi_plugin_reduced: plugin_mutual_information(&reduced, s.image_size(), t.image_size(), unit)?,
        raw_counts: counts,
        reduced_counts: reduced,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dsbs() -> JointDistribution {
        JointDistribution::validate_and_trim(&[vec![0.45, 0.05], vec![0.05, 0.45]]).unwrap()
    }

    #[test]
    fn random_joint_is_deterministic() {
        let a = random_joint(2, 2, 1.0, 7).unwrap();
        assert_eq!(a, random_joint(2, 2, 1.0, 7).unwrap());
        assert_ne!(a, random_joint(2, 2, 1.0, 8).unwrap());
        let total: f64 = a.probabilities().iter().sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert!(a.px().iter().chain(a.py()).all(|&m| m > 0.0));
    }

    #[test]
    fn split_dsbs_keeps_mi() {
        let spec = RefinementSpec::new(dsbs(), vec![vec![0.5, 0.5]; 2], vec![vec![1.0]; 2], 0).unwrap();
        let (j, s, t) = refine_embedding(&spec).unwrap();
        assert_eq!((j.nx(), j.ny()), (4, 2));
        assert!(t.is_identity());
        assert!((j.mutual_information(Unit::Bits).value - 0.531_004_406).abs() < 1e-8);
        let v = modal::check_sufficiency(&j, &s, &t, 1e-12).unwrap();
        assert!(v.sufficient && v.max_ratio_gap <= 1e-12);
    }

    #[test]
    fn trivial_split_returns_base() {
        let (j, s, t) = refine_embedding(&RefinementSpec::trivial(dsbs())).unwrap();
        assert_eq!(j, dsbs());
        assert!(s.is_identity() && t.is_identity());
    }

    #[test]
    fn zero_weight_symbols_are_dropped() {
        let spec = RefinementSpec::new(dsbs(), vec![vec![0.0, 1.0], vec![0.3, 0.0, 0.7]], vec![vec![1.0]; 2], 0)
            .unwrap();
        let (j, s, _) = refine_embedding(&spec).unwrap();
        assert_eq!(j.nx(), 3);
        assert_eq!(s.assignment(), &[0, 1, 1]);
    }

    #[test]
    fn unequal_block_sum_rejected() {
        assert!(RefinementSpec::new(dsbs(), vec![vec![0.5, 0.4], vec![1.0]], vec![vec![1.0]; 2], 0).is_err());
    }

    #[test]
    fn constant_map_on_identical_bits_fails() {
        let j = JointDistribution::validate_and_trim(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let s = DeterministicMap::constant(2);
        let t = DeterministicMap::identity(2);
        let m = [Measure::MutualInformation];
        let r = verify_separability(&j, &s, &t, &m, &Tolerances::default(), &SolverConfig::default(), false)
            .unwrap();
        assert!(!r.pass);
        assert!((r.rows[0].gap - 1.0).abs() < 1e-12);
        let strict = verify_separability(&j, &s, &t, &m, &Tolerances::default(), &SolverConfig::default(), true);
        assert!(matches!(strict, Err(Error::InsufficientStatistic { .. })));
    }

    #[test]
    fn one_sample_gives_zero_estimates() {
        let j = dsbs();
        let id = DeterministicMap::identity(2);
        let out = simulate_and_estimate(&j, &id, &DeterministicMap::constant(2), 1, 3, Unit::Bits).unwrap();
        assert_eq!(out.mi_plugin_raw.value, 0.0);
        assert_eq!(out.mi_plugin_reduced.value, 0.0);
        assert_eq!(out.raw_counts.iter().sum::<u64>(), 1);
    }

    #[test]
    fn aggregation_identity() {
        let spec = RefinementSpec::random(dsbs(), 3, 5).unwrap();
        let (j, s, t) = refine_embedding(&spec).unwrap();
        let out = simulate_and_estimate(&j, &s, &t, 5000, 9, Unit::Bits).unwrap();
        let again = pushforward_counts(&out.raw_counts, j.nx(), j.ny(), &s, &t).unwrap();
        assert_eq!(again, out.reduced_counts);
        assert_eq!(out.reduced_counts.iter().sum::<u64>(), 5000);
    }
}
