use alloc::vec::Vec;

use crate::dist::{entropy, DeterministicMap, InfoValue, JointDistribution, Unit};
use crate::modal;
use crate::partition::{self, UnionFind};
use crate::{Error, Result};

/// `|σ_i − 1|` at or below this counts as a unit mode.
pub const UNIT_TOL: f64 = 1e-8;

/// ℓ∞ tolerance when grouping symbols by their unit-mode feature vectors.
pub const FEATURE_GROUPING_TOL: f64 = 1e-8;

/// Gács–Körner common part: `common_map_x(X) = common_map_y(Y)` almost
/// surely, and `value = H(common_map_x(X))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GkResult {
    pub value: InfoValue,
    /// Number of unit singular values (the constant mode excluded).
    pub k: usize,
    pub common_map_x: DeterministicMap,
    pub common_map_y: DeterministicMap,
    pub component_count: usize,
}

impl GkResult {
    /// Largest probability mass on cells where the two common maps disagree.
    pub fn disagreement_mass(&self, j: &JointDistribution) -> f64 {
        let mut mass = 0.0;
        for x in 0..j.nx() {
            for y in 0..j.ny() {
                if self.common_map_x.apply(x) != self.common_map_y.apply(y) {
                    mass += j.get(x, y);
                }
            }
        }
        mass
    }
}

fn class_entropy(map: &DeterministicMap, weights: &[f64], unit: Unit) -> InfoValue {
    let mut mass = alloc::vec![0.0; map.image_size()];
    for (i, &w) in weights.iter().enumerate() {
        mass[map.apply(i)] += w;
    }
    entropy(&mass, unit)
}

/// Spectral route: symbols are grouped by their values on the `k` unit
/// modes `(f*_1, …, f*_k)`; the constant mode adds no entropy.
pub fn gacs_korner(j: &JointDistribution, unit_tol: f64, unit: Unit) -> Result<GkResult> {
    let md = modal::modal_decompose(j)?;
    let k = md.unit_modes(unit_tol);
    if k == 0 {
        return Ok(GkResult {
            value: InfoValue::zero(unit),
            k: 0,
            common_map_x: DeterministicMap::constant(j.nx()),
            common_map_y: DeterministicMap::constant(j.ny()),
            component_count: 1,
        });
    }
    let common_x = partition::group_by_linf(j.nx(), |x| &md.f_row(x)[..k], FEATURE_GROUPING_TOL);
    let classes_x = common_x.classes();
    let reps: Vec<&[f64]> = classes_x.iter().map(|c| &md.f_row(c[0])[..k]).collect();

    // g_i(Y) = f_i(X) on the support for unit modes, so each y lands next to
    // the representative of its class.
    let assign_y: Vec<usize> = (0..j.ny())
        .map(|y| {
            let gy = &md.g_row(y)[..k];
            (0..reps.len())
                .min_by(|&a, &b| partition::linf(reps[a], gy).total_cmp(&partition::linf(reps[b], gy)))
                .expect("at least one class")
        })
        .collect();
    let common_y = DeterministicMap::new(assign_y, common_x.image_size())
        .map_err(|_| Error::NumericalError("unit-mode grouping of Y does not match X"))?;

    Ok(GkResult {
        value: class_entropy(&common_x, j.px(), unit),
        k,
        component_count: common_x.image_size(),
        common_map_x: common_x,
        common_map_y: common_y,
    })
}

/// Graph route: connected components of the bipartite support graph on
/// `X ∪ Y` (edge where `P(x,y) > 0`).
pub fn gk_via_components(j: &JointDistribution, unit: Unit) -> GkResult {
    let (nx, ny) = (j.nx(), j.ny());
    let mut uf = UnionFind::new(nx + ny);
    for x in 0..nx {
        for y in 0..ny {
            if j.get(x, y) > 0.0 {
                uf.union(x, nx + y);
            }
        }
    }
    let roots: Vec<usize> = (0..nx + ny).map(|i| uf.find(i)).collect();
    // labels numbered by first appearance among the x symbols; every
    // component contains an x because marginals are positive
    let mut label_of_root: Vec<(usize, usize)> = Vec::new();
    let mut label = |r: usize| match label_of_root.iter().find(|(k, _)| *k == r) {
        Some(&(_, l)) => l,
        None => {
            let l = label_of_root.len();
            label_of_root.push((r, l));
            l
        }
    };
    let ax: Vec<usize> = (0..nx).map(|x| label(roots[x])).collect();
    let ay: Vec<usize> = (0..ny).map(|y| label(roots[nx + y])).collect();
    let count = label_of_root.len();
    let common_x = DeterministicMap::new(ax, count).expect("components cover X");
    let common_y = DeterministicMap::new(ay, count).expect("components cover Y");
    GkResult {
        value: class_entropy(&common_x, j.px(), unit),
        k: count - 1,
        common_map_x: common_x,
        common_map_y: common_y,
        component_count: count,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn blocks(masses: &[f64]) -> JointDistribution {
        let n = masses.len() * 2;
        let mut rows = vec![vec![0.0; n]; n];
        for (b, &m) in masses.iter().enumerate() {
            for x in 2 * b..2 * b + 2 {
                for y in 2 * b..2 * b + 2 {
                    rows[x][y] = m / 4.0;
                }
            }
        }
        JointDistribution::validate_and_trim(&rows).unwrap()
    }

    #[test]
    fn product_has_no_common_part() {
        let prod = JointDistribution::product(&[0.3, 0.7], &[0.2, 0.8]).unwrap();
        let r = gacs_korner(&prod, UNIT_TOL, Unit::Bits).unwrap();
        assert_eq!((r.k, r.value.value), (0, 0.0));
    }

    #[test]
    fn identical_uniform_four() {
        let mut rows = vec![vec![0.0; 4]; 4];
        (0..4).for_each(|i| rows[i][i] = 0.25);
        let j = JointDistribution::validate_and_trim(&rows).unwrap();
        let r = gacs_korner(&j, UNIT_TOL, Unit::Bits).unwrap();
        assert_eq!(r.k, 3);
        assert!((r.value.value - 2.0).abs() < 1e-12);
        assert_eq!(r.disagreement_mass(&j), 0.0);
    }

    #[test]
    fn two_blocks_both_routes() {
        let j = blocks(&[0.5, 0.5]);
        let spectral = gacs_korner(&j, UNIT_TOL, Unit::Bits).unwrap();
        let graph = gk_via_components(&j, Unit::Bits);
        assert_eq!(spectral.k, 1);
        assert!((spectral.value.value - 1.0).abs() < 1e-12);
        assert_eq!(graph.component_count, 2);
        assert!((graph.value.value - 1.0).abs() < 1e-15);
        assert!(spectral.common_map_x.same_partition(&graph.common_map_x));
        assert_eq!(spectral.disagreement_mass(&j), 0.0);
    }

    #[test]
    fn three_blocks_one_and_a_half_bits() {
        let j = blocks(&[0.5, 0.25, 0.25]);
        let graph = gk_via_components(&j, Unit::Bits);
        assert_eq!(graph.component_count, 3);
        assert!((graph.value.value - 1.5).abs() < 1e-15);
        let spectral = gacs_korner(&j, UNIT_TOL, Unit::Bits).unwrap();
        assert!((spectral.value.value - 1.5).abs() < 1e-9);
        assert_eq!(spectral.k, 2);
    }

    #[test]
    fn full_support_is_one_component() {
        let j = JointDistribution::validate_and_trim(&[vec![0.45, 0.05], vec![0.05, 0.45]]).unwrap();
        let g = gk_via_components(&j, Unit::Bits);
        assert_eq!((g.component_count, g.value.value), (1, 0.0));
    }
}
