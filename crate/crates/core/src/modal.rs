//! Canonical dependence kernel (CDK), its modal decomposition, and
//! sufficiency of deterministic statistics.
//!
//! The CDK is `B(x,y) = P(x,y) / (P_X(x) P_Y(y)) - 1`. Its SVD in the
//! `P_X`/`P_Y`-weighted function spaces gives
//!
//! ```text
//! B(x,y) = Σ_{i=1..K} σ_i f_i(x) g_i(y),   E[f_i f_j] = E[g_i g_j] = δ_ij
//! ```
//!
//! with `1 ≥ σ_1 ≥ … ≥ σ_K > 0`. The constant mode (`σ_0 = 1`, `f_0 = g_0 = 1`)
//! is implicit and never stored. Numerically, the decomposition is the SVD of
//! `Q̃(x,y) = P(x,y)/√(P_X(x)P_Y(y)) − √P_X(x)√P_Y(y)`, rescaled by the
//! square-root marginals.
//!
//! Note: the density ratio in the denominator is `P_X(x) P_Y(y)`; some
//! printings of the CDK definition show `P_X(y)`, which is a typo.
//!
//! `(s, t)` are sufficient exactly when the density ratio of `(X, Y)` equals
//! that of `(s(X), t(Y))` at every cell; [`check_sufficiency`] measures the
//! largest violation. The rows of `f*` (equivalently, the conditional rows
//! `P_{Y|X}(·|x)`) define the minimal sufficient statistic.

use alloc::vec::Vec;

use crate::dist::{DeterministicMap, Direction, InfoValue, Joint3, JointDistribution, Unit};
use crate::linalg::{self, Matrix};
use crate::math;
use crate::partition;
use crate::{Error, Result};

/// Singular values at or below this are treated as zero.
pub const RANK_TOL: f64 = 1e-10;

/// ℓ∞ tolerance for merging conditional rows in [`minimal_sufficient_maps`].
pub const GROUPING_TOL: f64 = 1e-10;

/// Default ratio-gap tolerance for strict reductions.
pub const SUFFICIENCY_TOL: f64 = 1e-9;

/// The CDK as an `nx × ny` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CdkMatrix(pub Matrix);

impl CdkMatrix {
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.0.get(x, y)
    }

    /// Largest `|Σ_x P_X(x) B(x,y)|` or `|Σ_y P_Y(y) B(x,y)|`; zero in exact
    /// arithmetic.
    pub fn centering_defect(&self, px: &[f64], py: &[f64]) -> f64 {
        let (nx, ny) = (self.0.rows(), self.0.cols());
        let cols = (0..ny).map(|y| (0..nx).map(|x| px[x] * self.get(x, y)).sum::<f64>().abs());
        let rows = (0..nx).map(|x| (0..ny).map(|y| py[y] * self.get(x, y)).sum::<f64>().abs());
        cols.chain(rows).fold(0.0, f64::max)
    }
}

pub fn cdk_matrix(j: &JointDistribution) -> CdkMatrix {
    CdkMatrix(Matrix::from_fn(j.nx(), j.ny(), |x, y| j.density_ratio(x, y) - 1.0))
}

/// Singular values and weighted-orthonormal feature tables of the CDK.
///
/// Column `i` of `f` is `f*_{i+1}` evaluated on every `x`; likewise `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalDecomposition {
    sigmas: Vec<f64>,
    f: Matrix,
    g: Matrix,
    px: Vec<f64>,
    py: Vec<f64>,
}

impl ModalDecomposition {
    /// Assembles a decomposition from its parts; shapes are checked, the
    /// orthonormality of the features is not.
    pub fn from_parts(sigmas: Vec<f64>, f: Matrix, g: Matrix, px: Vec<f64>, py: Vec<f64>) -> Result<Self> {
        let k = sigmas.len();
        if f.cols() != k || g.cols() != k {
            return Err(Error::DimensionError { expected: k, found: f.cols().min(g.cols()) });
        }
        if f.rows() != px.len() || g.rows() != py.len() {
            return Err(Error::DimensionError { expected: px.len(), found: f.rows() });
        }
        Ok(ModalDecomposition { sigmas, f, g, px, py })
    }

    /// The rank-zero decomposition of the product `px ⊗ py`.
    pub fn independent(px: Vec<f64>, py: Vec<f64>) -> Self {
        ModalDecomposition {
            sigmas: Vec::new(),
            f: Matrix::zeros(px.len(), 0),
            g: Matrix::zeros(py.len(), 0),
            px,
            py,
        }
    }

    pub fn rank(&self) -> usize {
        self.sigmas.len()
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn f(&self) -> &Matrix {
        &self.f
    }

    pub fn g(&self) -> &Matrix {
        &self.g
    }

    /// `f*(x) = (f*_1(x), …, f*_K(x))`.
    pub fn f_row(&self, x: usize) -> &[f64] {
        self.f.row(x)
    }

    pub fn g_row(&self, y: usize) -> &[f64] {
        self.g.row(y)
    }

    pub fn px(&self) -> &[f64] {
        &self.px
    }

    pub fn py(&self) -> &[f64] {
        &self.py
    }

    /// Largest deviation of the weighted Gram matrices of `f` and `g` from
    /// the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let gram = |m: &Matrix, w: &[f64]| {
            let k = m.cols();
            let mut worst: f64 = 0.0;
            for a in 0..k {
                for b in 0..k {
                    let e: f64 = (0..m.rows()).map(|i| w[i] * m.get(i, a) * m.get(i, b)).sum();
                    let target = if a == b { 1.0 } else { 0.0 };
                    worst = worst.max((e - target).abs());
                }
            }
            worst
        };
        gram(&self.f, &self.px).max(gram(&self.g, &self.py))
    }

    /// `Σ_i σ_i f_i(x) g_i(y)`.
    pub fn kernel_at(&self, x: usize, y: usize) -> f64 {
        self.sigmas.iter().enumerate().map(|(i, s)| s * self.f.get(x, i) * self.g.get(y, i)).sum()
    }

    /// Largest entrywise gap between the CDK of `j` and the decomposition.
    pub fn reconstruction_defect(&self, j: &JointDistribution) -> f64 {
        let b = cdk_matrix(j);
        let mut worst: f64 = 0.0;
        for x in 0..j.nx() {
            for y in 0..j.ny() {
                worst = worst.max((b.get(x, y) - self.kernel_at(x, y)).abs());
            }
        }
        worst
    }

    /// Number of modes with `|σ_i − 1| ≤ unit_tol`.
    pub fn unit_modes(&self, unit_tol: f64) -> usize {
        self.sigmas.iter().take_while(|&&s| (s - 1.0).abs() <= unit_tol).count()
    }
}

/// Modal decomposition of the CDK of `j`.
pub fn modal_decompose(j: &JointDistribution) -> Result<ModalDecomposition> {
    let (nx, ny) = (j.nx(), j.ny());
    let (px, py) = j.marginals();
    let sx: Vec<f64> = px.iter().map(|&p| math::sqrt(p)).collect();
    let sy: Vec<f64> = py.iter().map(|&p| math::sqrt(p)).collect();
    let q = Matrix::from_fn(nx, ny, |x, y| j.get(x, y) / (sx[x] * sy[y]) - sx[x] * sy[y]);
    let svd = linalg::svd(&q)?;

    let max_rank = nx.min(ny) - 1;
    let k = svd.s.iter().take(max_rank).take_while(|&&s| s > RANK_TOL).count();
    let mut sigmas = Vec::with_capacity(k);
    let mut f = Matrix::zeros(nx, k);
    let mut g = Matrix::zeros(ny, k);
    for i in 0..k {
        sigmas.push(svd.s[i].min(1.0));
        for x in 0..nx {
            f.set(x, i, svd.u.get(x, i) / sx[x]);
        }
        for y in 0..ny {
            g.set(y, i, svd.v.get(y, i) / sy[y]);
        }
        // first entry that is not numerically zero is made positive
        let scale = (0..nx).fold(0.0f64, |m, x| m.max(f.get(x, i).abs()));
        let lead = (0..nx).map(|x| f.get(x, i)).find(|v| v.abs() > 1e-9 * scale).unwrap_or(0.0);
        if lead < 0.0 {
            for x in 0..nx {
                f.set(x, i, -f.get(x, i));
            }
            for y in 0..ny {
                g.set(y, i, -g.get(y, i));
            }
        }
    }
    Ok(ModalDecomposition { sigmas, f, g, px, py })
}

/// `P(x,y) = P_X(x) P_Y(y) (1 + Σ_i σ_i f_i(x) g_i(y))`.
pub fn reconstruct_joint(md: &ModalDecomposition) -> Result<JointDistribution> {
    let (nx, ny) = (md.px.len(), md.py.len());
    let mut p = Vec::with_capacity(nx * ny);
    for x in 0..nx {
        for y in 0..ny {
            let v = md.px[x] * md.py[y] * (1.0 + md.kernel_at(x, y));
            if v < -1e-9 {
                return Err(Error::InconsistentDecomposition(v));
            }
            p.push(v.max(0.0));
        }
    }
    JointDistribution::from_flat(nx, ny, p)
}

/// `σ_1`, or zero for independent variables.
pub fn maximal_correlation(j: &JointDistribution) -> Result<f64> {
    Ok(modal_decompose(j)?.sigmas.first().copied().unwrap_or(0.0))
}

/// Minimal sufficient statistics: `x` symbols are merged when their rows of
/// `P_{Y|X}` agree within `tol` (ℓ∞, transitively closed); `y` symbols
/// likewise with `P_{X|Y}`.
pub fn minimal_sufficient_maps(
    j: &JointDistribution,
    tol: f64,
) -> (DeterministicMap, DeterministicMap) {
    let kx = j.conditional_kernel(Direction::YGivenX);
    let ky = j.conditional_kernel(Direction::XGivenY);
    let s = partition::group_by_linf(j.nx(), |x| kx.row(x), tol);
    let t = partition::group_by_linf(j.ny(), |y| ky.row(y), tol);
    (s, t)
}

/// Outcome of [`check_sufficiency`].
#[derive(Debug, Clone, PartialEq)]
pub struct SufficiencyVerdict {
    pub sufficient: bool,
    /// `max_{x,y} |ratio_XY(x,y) − ratio_ST(s(x),t(y))|`.
    pub max_ratio_gap: f64,
    /// `I(X;Y|S)`.
    pub cmi_s: InfoValue,
    /// `I(X;Y|T)`.
    pub cmi_t: InfoValue,
}

/// Compares the density ratio of `(X, Y)` against that of `(s(X), t(Y))`
/// cell by cell. The conditional mutual informations `I(X;Y|S)` and
/// `I(X;Y|T)` are reported alongside; both vanish exactly when the maps are
/// sufficient.
pub fn check_sufficiency(
    j: &JointDistribution,
    s: &DeterministicMap,
    t: &DeterministicMap,
    tol: f64,
) -> Result<SufficiencyVerdict> {
    let reduced = j.pushforward(s, t)?;
    let mut gap: f64 = 0.0;
    for x in 0..j.nx() {
        for y in 0..j.ny() {
            let d = (j.density_ratio(x, y) - reduced.density_ratio(s.apply(x), t.apply(y))).abs();
            gap = gap.max(d);
        }
    }
    let ny = j.ny();
    let cmi_s = Joint3::from_fn(j.nx(), ny, s.image_size(), |x, y, c| {
        if s.apply(x) == c {
            j.get(x, y)
        } else {
            0.0
        }
    })?
    .conditional_mutual_information(Unit::Bits);
    let cmi_t = Joint3::from_fn(j.nx(), ny, t.image_size(), |x, y, c| {
        if t.apply(y) == c {
            j.get(x, y)
        } else {
            0.0
        }
    })?
    .conditional_mutual_information(Unit::Bits);
    Ok(SufficiencyVerdict { sufficient: gap <= tol, max_ratio_gap: gap, cmi_s, cmi_t })
}

/// The joint of `(s(X), t(Y))`. With `strict`, maps whose ratio gap exceeds
/// [`SUFFICIENCY_TOL`] are rejected.
pub fn reduce_joint(
    j: &JointDistribution,
    s: &DeterministicMap,
    t: &DeterministicMap,
    strict: bool,
) -> Result<JointDistribution> {
    if strict {
        let verdict = check_sufficiency(j, s, t, SUFFICIENCY_TOL)?;
        if !verdict.sufficient {
            return Err(Error::InsufficientStatistic { gap: verdict.max_ratio_gap });
        }
    }
    j.pushforward(s, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn joint(rows: &[Vec<f64>]) -> JointDistribution {
        JointDistribution::validate_and_trim(rows).unwrap()
    }

    fn dsbs() -> JointDistribution {
        joint(&[vec![0.45, 0.05], vec![0.05, 0.45]])
    }

    fn two_blocks() -> JointDistribution {
        let mut rows = vec![vec![0.0; 4]; 4];
        for x in 0..4 {
            for y in 0..4 {
                if x / 2 == y / 2 {
                    rows[x][y] = 0.125;
                }
            }
        }
        joint(&rows)
    }

    fn duplicated_rows() -> JointDistribution {
        joint(&[vec![0.3, 0.1], vec![0.15, 0.05], vec![0.1, 0.3]])
    }

    #[test]
    fn cdk_examples() {
        let prod = JointDistribution::product(&[0.3, 0.7], &[0.4, 0.6]).unwrap();
        assert!(cdk_matrix(&prod).0.max_abs() < 1e-15);

        let eq = joint(&[vec![0.5, 0.0], vec![0.0, 0.5]]);
        assert_eq!(cdk_matrix(&eq).0.as_slice(), &[1.0, -1.0, -1.0, 1.0]);

        let b = cdk_matrix(&dsbs());
        for (a, e) in b.0.as_slice().iter().zip([0.8, -0.8, -0.8, 0.8]) {
            assert!((a - e).abs() < 1e-15);
        }
        assert!(b.centering_defect(&[0.5, 0.5], &[0.5, 0.5]) < 1e-15);
    }

    #[test]
    fn decompose_product_has_rank_zero() {
        let prod = JointDistribution::product(&[0.3, 0.7], &[0.2, 0.5, 0.3]).unwrap();
        let md = modal_decompose(&prod).unwrap();
        assert_eq!(md.rank(), 0);
        assert_eq!(maximal_correlation(&prod).unwrap(), 0.0);
    }

    #[test]
    fn decompose_dsbs() {
        let md = modal_decompose(&dsbs()).unwrap();
        assert_eq!(md.rank(), 1);
        assert!((md.sigmas()[0] - 0.8).abs() < 1e-14);
        // sign convention: f_1(0) > 0
        assert!((md.f().get(0, 0) - 1.0).abs() < 1e-14);
        assert!((md.f().get(1, 0) + 1.0).abs() < 1e-14);
        assert!((md.g().get(0, 0) - 1.0).abs() < 1e-14);
        assert!((md.g().get(1, 0) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn decompose_two_blocks() {
        let md = modal_decompose(&two_blocks()).unwrap();
        assert_eq!(md.rank(), 1);
        assert!((md.sigmas()[0] - 1.0).abs() < 1e-12);
        assert!((maximal_correlation(&two_blocks()).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(md.unit_modes(1e-8), 1);
    }

    #[test]
    fn round_trips() {
        let j = dsbs();
        let back = reconstruct_joint(&modal_decompose(&j).unwrap()).unwrap();
        for (a, b) in back.probabilities().iter().zip(j.probabilities()) {
            assert!((a - b).abs() < 1e-12);
        }
        let md = ModalDecomposition::independent(vec![0.3, 0.7], vec![0.5, 0.5]);
        let back = reconstruct_joint(&md).unwrap();
        for (a, b) in back.probabilities().iter().zip([0.15, 0.15, 0.35, 0.35]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn inconsistent_decomposition_rejected() {
        let f = Matrix::from_row_major(2, 1, vec![1.0, -1.0]).unwrap();
        let g = Matrix::from_row_major(2, 1, vec![1.0, -1.0]).unwrap();
        let md = ModalDecomposition::from_parts(vec![3.0], f, g, vec![0.5, 0.5], vec![0.5, 0.5])
            .unwrap();
        assert!(matches!(reconstruct_joint(&md), Err(Error::InconsistentDecomposition(_))));
    }

    /// Independent route: full SVD of `P/√(P_X P_Y)` and removal of the
    /// triple best aligned with `√P_X`.
    fn spectrum_by_uncentered_svd(j: &JointDistribution) -> Vec<f64> {
        let (px, py) = j.marginals();
        let q = Matrix::from_fn(j.nx(), j.ny(), |x, y| j.get(x, y) / libm::sqrt(px[x] * py[y]));
        let svd = linalg::svd(&q).unwrap();
        let r = svd.s.len();
        let align = |k: usize| (0..j.nx()).map(|x| svd.u.get(x, k) * libm::sqrt(px[x])).sum::<f64>().abs();
        let trivial = (0..r).max_by(|&a, &b| align(a).total_cmp(&align(b))).unwrap();
        assert!((svd.s[trivial] - 1.0).abs() < 1e-8);
        let mut rest: Vec<f64> =
            (0..r).filter(|&k| k != trivial).map(|k| svd.s[k]).filter(|&s| s > RANK_TOL).collect();
        rest.sort_by(|a, b| b.total_cmp(a));
        rest
    }

    #[test]
    fn spectrum_matches_uncentered_route() {
        for j in [dsbs(), duplicated_rows(), joint(&[vec![0.1, 0.2, 0.05], vec![0.3, 0.05, 0.3]])] {
            let md = modal_decompose(&j).unwrap();
            let other = spectrum_by_uncentered_svd(&j);
            assert_eq!(md.rank(), other.len());
            for (a, b) in md.sigmas().iter().zip(&other) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn minimal_maps_examples() {
        let prod = JointDistribution::product(&[0.3, 0.7], &[0.2, 0.8]).unwrap();
        let (s, t) = minimal_sufficient_maps(&prod, GROUPING_TOL);
        assert_eq!((s.image_size(), t.image_size()), (1, 1));

        let eq = joint(&[vec![0.5, 0.0], vec![0.0, 0.5]]);
        let (s, t) = minimal_sufficient_maps(&eq, GROUPING_TOL);
        assert!(s.is_identity() && t.is_identity());

        let (s, t) = minimal_sufficient_maps(&duplicated_rows(), GROUPING_TOL);
        assert_eq!(s.assignment(), &[0, 0, 1]);
        assert!(t.is_identity());
        assert!(check_sufficiency(&duplicated_rows(), &s, &t, 1e-12).unwrap().sufficient);
    }

    #[test]
    fn sufficiency_examples() {
        let j = dsbs();
        let id = DeterministicMap::identity(2);
        let v = check_sufficiency(&j, &id, &id, 1e-12).unwrap();
        assert!(v.sufficient);
        assert_eq!(v.max_ratio_gap, 0.0);

        let eq = joint(&[vec![0.5, 0.0], vec![0.0, 0.5]]);
        let c = DeterministicMap::constant(2);
        let v = check_sufficiency(&eq, &c, &id, 1e-9).unwrap();
        assert!(!v.sufficient);
        assert!((v.max_ratio_gap - 1.0).abs() < 1e-15);
        assert!((v.cmi_s.value - 1.0).abs() < 1e-15);

        let bad = DeterministicMap::identity(3);
        assert!(matches!(check_sufficiency(&j, &bad, &id, 1e-9), Err(Error::DimensionError { .. })));
    }

    #[test]
    fn reduce_examples() {
        let j = dsbs();
        let id = DeterministicMap::identity(2);
        assert_eq!(reduce_joint(&j, &id, &id, true).unwrap(), j);

        let s = DeterministicMap::from_assignment(vec![0, 0, 1]).unwrap();
        let red = reduce_joint(&duplicated_rows(), &s, &id, true).unwrap();
        for (a, b) in red.probabilities().iter().zip([0.45, 0.15, 0.1, 0.3]) {
            assert!((a - b).abs() < 1e-15);
        }

        let eq = joint(&[vec![0.5, 0.0], vec![0.0, 0.5]]);
        let c = DeterministicMap::constant(2);
        assert!(matches!(reduce_joint(&eq, &c, &id, true), Err(Error::InsufficientStatistic { .. })));
        assert!(reduce_joint(&eq, &c, &id, false).is_ok());
    }

    #[test]
    fn minimal_grouping_matches_feature_rows() {
        let j = duplicated_rows();
        let md = modal_decompose(&j).unwrap();
        let by_features = partition::group_by_linf(j.nx(), |x| md.f_row(x), 1e-8);
        let (s, _) = minimal_sufficient_maps(&j, GROUPING_TOL);
        assert!(s.same_partition(&by_features));
    }
}
