//! f-information: `I_f(X;Y) = Σ P_X(x) P_Y(y) f(P(x,y) / (P_X(x) P_Y(y)))`
//! for convex `f` on `[0, ∞)` with `f(1) = 0`.
//!
//! | Name | f(u) | f(0⁺) |
//! |------|------|-------|
//! | `kl` | u ln u | 0 |
//! | `reverse-kl` | −ln u | +∞ |
//! | `chi2` | (u − 1)² | 1 |
//! | `tv` | \|u − 1\| / 2 | 1/2 |
//! | `hellinger2` | (√u − 1)² | 1 |
//!
//! `kl` recovers mutual information, and `chi2` equals `Σ σ_i²` over the
//! modal spectrum.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::dist::{DeterministicMap, InfoValue, JointDistribution, Unit};
use crate::math;
use crate::modal::{self, SUFFICIENCY_TOL};
use crate::{Error, Result};

type GeneratorFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Kl,
    Other,
}

/// Grid violations of midpoint convexity up to this size are tolerated
/// (and recorded); larger ones reject the generator.
pub const CONVEXITY_SLACK: f64 = 1e-9;

const CONVEXITY_GRID: usize = 200;

/// A convex generator `f` with its limit at zero.
#[derive(Clone)]
pub struct FGenerator {
    name: String,
    eval: GeneratorFn,
    value_at_zero: f64,
    logarithmic: bool,
    kind: Kind,
    convexity_slack: f64,
}

impl fmt::Debug for FGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FGenerator")
            .field("name", &self.name)
            .field("value_at_zero", &self.value_at_zero)
            .field("logarithmic", &self.logarithmic)
            .finish_non_exhaustive()
    }
}

impl FGenerator {
    /// Registers a user generator.
    ///
    /// `logarithmic` marks generators whose values are measured in nats
    /// (scaled by the requested unit); others are reported dimensionless.
    /// Rejects `f(1) ≠ 0` (beyond 1e-12) and midpoint-convexity violations
    /// larger than [`CONVEXITY_SLACK`] on a grid over `(0, 10]`.
    pub fn new(
        name: &str,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        value_at_zero: f64,
        logarithmic: bool,
    ) -> Result<Self> {
        Self::register(name, Arc::new(f), value_at_zero, logarithmic, Kind::Other)
    }

    fn register(
        name: &str,
        eval: GeneratorFn,
        value_at_zero: f64,
        logarithmic: bool,
        kind: Kind,
    ) -> Result<Self> {
        if value_at_zero.is_nan() {
            return Err(Error::InvalidGenerator("value at zero is NaN"));
        }
        let at_one = eval(1.0);
        if at_one.is_nan() || at_one.abs() > 1e-12 {
            return Err(Error::InvalidGenerator("f(1) must be 0"));
        }
        let grid: Vec<f64> =
            (1..=CONVEXITY_GRID).map(|k| 10.0 * k as f64 / CONVEXITY_GRID as f64).collect();
        let values: Vec<f64> = grid.iter().map(|&u| eval(u)).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGenerator("f is not finite on (0, 10]"));
        }
        let mut worst: f64 = 0.0;
        for stride in [1usize, 5, 25, 50] {
            for a in 0..CONVEXITY_GRID.saturating_sub(2 * stride) {
                let (m, b) = (a + stride, a + 2 * stride);
                worst = worst.max(values[m] - 0.5 * (values[a] + values[b]));
            }
        }
        if worst > CONVEXITY_SLACK {
            return Err(Error::InvalidGenerator("f fails midpoint convexity"));
        }
        Ok(FGenerator {
            name: name.to_string(),
            eval,
            value_at_zero,
            logarithmic,
            kind,
            convexity_slack: worst.max(0.0),
        })
    }

    pub fn kl() -> Self {
        let f = |u: f64| if u > 0.0 { u * math::ln(u) } else { 0.0 };
        Self::register("kl", Arc::new(f), 0.0, true, Kind::Kl).expect("built-in")
    }

    pub fn reverse_kl() -> Self {
        Self::register("reverse-kl", Arc::new(|u: f64| -math::ln(u)), f64::INFINITY, true, Kind::Other)
            .expect("built-in")
    }

    pub fn chi_squared() -> Self {
        Self::register("chi2", Arc::new(|u: f64| (u - 1.0) * (u - 1.0)), 1.0, false, Kind::Other)
            .expect("built-in")
    }

    pub fn total_variation() -> Self {
        Self::register("tv", Arc::new(|u: f64| 0.5 * (u - 1.0).abs()), 0.5, false, Kind::Other)
            .expect("built-in")
    }

    pub fn squared_hellinger() -> Self {
        let f = |u: f64| {
            let r = math::sqrt(u) - 1.0;
            r * r
        };
        Self::register("hellinger2", Arc::new(f), 1.0, false, Kind::Other).expect("built-in")
    }

    /// The five built-ins in a fixed order.
    pub fn builtins() -> Vec<FGenerator> {
        alloc::vec![
            Self::kl(),
            Self::reverse_kl(),
            Self::chi_squared(),
            Self::total_variation(),
            Self::squared_hellinger(),
        ]
    }

    /// Looks up a built-in by name or alias.
    pub fn by_name(name: &str) -> Option<FGenerator> {
        match name {
            "kl" => Some(Self::kl()),
            "reverse-kl" | "reverse_kl" => Some(Self::reverse_kl()),
            "chi2" | "chi-squared" => Some(Self::chi_squared()),
            "tv" | "total-variation" => Some(Self::total_variation()),
            "hellinger2" | "squared-hellinger" | "hellinger" => Some(Self::squared_hellinger()),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value_at_zero(&self) -> f64 {
        self.value_at_zero
    }

    pub fn is_logarithmic(&self) -> bool {
        self.logarithmic
    }

    /// Largest tolerated midpoint-convexity excess found at registration.
    pub fn convexity_slack(&self) -> f64 {
        self.convexity_slack
    }

    pub fn eval(&self, u: f64) -> f64 {
        if u == 0.0 {
            self.value_at_zero
        } else {
            (self.eval)(u)
        }
    }
}

/// Evaluates `I_f(X;Y)`. The result is `+∞` when a zero cell meets a
/// generator with infinite `f(0⁺)`.
pub fn f_information(j: &JointDistribution, f: &FGenerator, unit: Unit) -> InfoValue {
    if f.kind == Kind::Kl {
        return j.mutual_information(unit);
    }
    let (px, py) = (j.px(), j.py());
    let mut total = 0.0;
    for x in 0..j.nx() {
        for y in 0..j.ny() {
            total += px[x] * py[y] * f.eval(j.density_ratio(x, y));
        }
    }
    if f.logarithmic {
        InfoValue::from_nats(total, unit)
    } else {
        let mut v = InfoValue::dimensionless(total);
        if v.value < 0.0 && v.value >= -crate::dist::NEGATIVE_CLAMP {
            v.value = 0.0;
        }
        v
    }
}

/// One generator's comparison of `I_f(X;Y)` with `I_f(S;T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FInfoGap {
    pub generator: String,
    pub raw: InfoValue,
    pub reduced: InfoValue,
    pub gap: f64,
    pub pass: bool,
}

/// `|I_f(X;Y) − I_f(s(X);t(Y))|` for each generator (log generators in
/// bits). Fails with [`Error::InsufficientStatistic`] unless `(s, t)` are
/// sufficient.
pub fn f_information_invariance_check(
    j: &JointDistribution,
    s: &DeterministicMap,
    t: &DeterministicMap,
    generators: &[FGenerator],
    tol: f64,
) -> Result<Vec<FInfoGap>> {
    let reduced = modal::reduce_joint(j, s, t, false)?;
    let verdict = modal::check_sufficiency(j, s, t, SUFFICIENCY_TOL)?;
    if !verdict.sufficient {
        return Err(Error::InsufficientStatistic { gap: verdict.max_ratio_gap });
    }
    Ok(generators
        .iter()
        .map(|g| {
            let raw = f_information(j, g, Unit::Bits);
            let red = f_information(&reduced, g, Unit::Bits);
            let gap = value_gap(raw.value, red.value);
            FInfoGap { generator: g.name.clone(), raw, reduced: red, gap, pass: gap <= tol }
        })
        .collect())
}

/// `|a − b|`, with equal infinities counting as zero gap.
pub(crate) fn value_gap(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn dsbs() -> JointDistribution {
        JointDistribution::validate_and_trim(&[vec![0.45, 0.05], vec![0.05, 0.45]]).unwrap()
    }

    #[test]
    fn product_gives_zero_for_every_builtin() {
        let prod = JointDistribution::product(&[0.3, 0.7], &[0.2, 0.5, 0.3]).unwrap();
        for g in FGenerator::builtins() {
            assert!(f_information(&prod, &g, Unit::Bits).value.abs() < 1e-15, "{}", g.name());
        }
    }

    #[test]
    fn dsbs_chi_squared_is_sigma_squared() {
        let v = f_information(&dsbs(), &FGenerator::chi_squared(), Unit::Bits);
        assert!((v.value - 0.64).abs() < 1e-14);
        assert_eq!(v.unit, Unit::Dimensionless);
    }

    #[test]
    fn kl_matches_mutual_information() {
        let j = dsbs();
        let v = f_information(&j, &FGenerator::kl(), Unit::Bits);
        assert_eq!(v, j.mutual_information(Unit::Bits));
        assert!((v.value - 0.53100).abs() < 5e-6);
        // KL by the generic formula agrees to rounding
        let generic = FGenerator::new("kl-generic", |u| u * libm::log(u), 0.0, true).unwrap();
        let g = f_information(&j, &generic, Unit::Bits);
        assert!((g.value - v.value).abs() < 1e-12);
    }

    #[test]
    fn reverse_kl_is_infinite_on_zero_cells() {
        let eq = JointDistribution::validate_and_trim(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let v = f_information(&eq, &FGenerator::reverse_kl(), Unit::Nats);
        assert_eq!(v.value, f64::INFINITY);
    }

    #[test]
    fn registration_checks() {
        assert!(matches!(
            FGenerator::new("shifted", |u| u * u, 0.0, false),
            Err(Error::InvalidGenerator(_))
        ));
        assert!(matches!(
            FGenerator::new("concave", |u| -(u - 1.0) * (u - 1.0), -1.0, false),
            Err(Error::InvalidGenerator(_))
        ));
        let ok = FGenerator::new("abs", |u| (u - 1.0).abs(), 1.0, false).unwrap();
        assert!(ok.convexity_slack() <= 1e-12);
        assert!(FGenerator::by_name("chi-squared").is_some());
        assert!(FGenerator::by_name("nope").is_none());
    }

    #[test]
    fn identity_maps_have_zero_gaps() {
        let j = dsbs();
        let id = DeterministicMap::identity(2);
        let rows = f_information_invariance_check(&j, &id, &id, &FGenerator::builtins(), 0.0).unwrap();
        assert!(rows.iter().all(|r| r.gap == 0.0 && r.pass));
    }

    #[test]
    fn insufficient_maps_rejected() {
        let eq = JointDistribution::validate_and_trim(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let r = f_information_invariance_check(
            &eq,
            &DeterministicMap::constant(2),
            &DeterministicMap::identity(2),
            &FGenerator::builtins(),
            1e-9,
        );
        assert!(matches!(r, Err(Error::InsufficientStatistic { .. })));
    }
}
