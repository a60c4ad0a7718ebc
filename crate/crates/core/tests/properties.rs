//! Property tests over seeded random joints and refinements.

use infosep_core::common::{gacs_korner, gk_via_components, UNIT_TOL};
use infosep_core::dist::{Joint3, JointDistribution, Unit};
use infosep_core::finfo::{f_information, f_information_invariance_check, FGenerator};
use infosep_core::harness::{random_joint, refine_embedding, RefinementSpec};
use infosep_core::modal::{
    check_sufficiency, minimal_sufficient_maps, modal_decompose, reconstruct_joint, reduce_joint,
    GROUPING_TOL,
};
use proptest::prelude::*;

fn joint_strategy(max: usize) -> impl Strategy<Value = JointDistribution> {
    (1..=max, 1..=max, any::<u64>(), prop_oneof![Just(0.3), Just(1.0), Just(5.0)])
        .prop_map(|(nx, ny, seed, alpha)| random_joint(nx, ny, alpha, seed).unwrap())
}

fn refined_strategy() -> impl Strategy<Value = (JointDistribution, JointDistribution)> {
    (joint_strategy(4), any::<u64>()).prop_map(|(base, seed)| {
        let spec = RefinementSpec::random(base.clone(), 3, seed).unwrap();
        let (j, s, t) = refine_embedding(&spec).unwrap();
        let red = reduce_joint(&j, &s, &t, true).unwrap();
        assert_eq!(red.nx(), base.nx());
        (j, red)
    })
}

/// Block-diagonal joint with random within-block masses.
fn blocks_strategy() -> impl Strategy<Value = JointDistribution> {
    (1usize..=4, any::<u64>()).prop_map(|(k, seed)| {
        let sizes: Vec<(usize, usize)> = (0..k)
            .map(|b| (1 + (seed >> (4 * b)) as usize % 3, 1 + (seed >> (4 * b + 2)) as usize % 3))
            .collect();
        let nx: usize = sizes.iter().map(|s| s.0).sum();
        let ny: usize = sizes.iter().map(|s| s.1).sum();
        let mut rows = vec![vec![0.0; ny]; nx];
        let (mut ox, mut oy) = (0, 0);
        for (b, &(bx, by)) in sizes.iter().enumerate() {
            let inner = random_joint(bx, by, 1.0, seed ^ (b as u64 + 1)).unwrap();
            // trimmed blocks are still at least 1x1; pad with their shape
            for x in 0..inner.nx() {
                for y in 0..inner.ny() {
                    rows[ox + x][oy + y] = inner.get(x, y) * (b + 1) as f64;
                }
            }
            ox += bx;
            oy += by;
        }
        JointDistribution::validate_and_trim(&rows).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decomposition_is_orthonormal_and_reconstructs(j in joint_strategy(8)) {
        let md = modal_decompose(&j).unwrap();
        prop_assert!(md.orthonormality_defect() <= 1e-9);
        prop_assert!(md.reconstruction_defect(&j) <= 1e-9);
        prop_assert!(md.sigmas().iter().all(|&s| s > 0.0 && s <= 1.0));
        prop_assert!(md.sigmas().windows(2).all(|w| w[0] >= w[1]));
        let back = reconstruct_joint(&md).unwrap();
        for x in 0..j.nx() {
            for y in 0..j.ny() {
                prop_assert!((back.get(x, y) - j.get(x, y)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn chi_squared_is_spectral_energy(j in joint_strategy(8)) {
        let md = modal_decompose(&j).unwrap();
        let energy: f64 = md.sigmas().iter().map(|s| s * s).sum();
        let chi2 = f_information(&j, &FGenerator::chi_squared(), Unit::Bits).value;
        prop_assert!((chi2 - energy).abs() <= 1e-9);
    }

    #[test]
    fn unit_conversion_is_consistent(j in joint_strategy(6)) {
        let bits = j.mutual_information(Unit::Bits).value;
        let nats = j.mutual_information(Unit::Nats).value;
        prop_assert!((nats - bits * std::f64::consts::LN_2).abs() <= 1e-12);
        prop_assert!(bits <= j.entropy_x(Unit::Bits).value.min(j.entropy_y(Unit::Bits).value) + 1e-12);
    }

    #[test]
    fn f_information_survives_refinement((j, red) in refined_strategy()) {
        for f in FGenerator::builtins() {
            let a = f_information(&j, &f, Unit::Bits).value;
            let b = f_information(&red, &f, Unit::Bits).value;
            prop_assert!((a - b).abs() <= 1e-9, "{}: {} vs {}", f.name(), a, b);
        }
    }

    #[test]
    fn spectrum_survives_refinement((j, red) in refined_strategy()) {
        let a = modal_decompose(&j).unwrap();
        let b = modal_decompose(&red).unwrap();
        prop_assert_eq!(a.rank(), b.rank());
        for (x, y) in a.sigmas().iter().zip(b.sigmas()) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn refinement_maps_are_sufficient(base in joint_strategy(4), seed in any::<u64>()) {
        let spec = RefinementSpec::random(base.clone(), 3, seed).unwrap();
        let (j, s, t) = refine_embedding(&spec).unwrap();
        let v = check_sufficiency(&j, &s, &t, 1e-12).unwrap();
        // the three equivalent forms of sufficiency agree
        prop_assert!(v.sufficient && v.max_ratio_gap <= 1e-12);
        prop_assert!(v.cmi_s.value <= 1e-10 && v.cmi_t.value <= 1e-10);
        let red = reduce_joint(&j, &s, &t, false).unwrap();
        for a in 0..base.nx() {
            for b in 0..base.ny() {
                prop_assert!((red.get(a, b) - base.get(a, b)).abs() <= 1e-12);
            }
        }
        // minimal maps factor through the refinement maps
        let (ms, mt) = minimal_sufficient_maps(&j, GROUPING_TOL);
        prop_assert!(s.refines(&ms));
        prop_assert!(t.refines(&mt));
        // I(X;Y | S,T) vanishes: X − (S,T) − Y
        let nt = t.image_size();
        let cond = Joint3::from_fn(j.nx(), j.ny(), s.image_size() * nt, |x, y, c| {
            if c == s.apply(x) * nt + t.apply(y) { j.get(x, y) } else { 0.0 }
        }).unwrap();
        prop_assert!(cond.conditional_mutual_information(Unit::Bits).value <= 1e-10);
        let checks = f_information_invariance_check(&j, &s, &t, &FGenerator::builtins(), 1e-9).unwrap();
        prop_assert!(checks.iter().all(|c| c.pass));
    }

    #[test]
    fn gk_routes_agree(j in blocks_strategy()) {
        let spectral = gacs_korner(&j, UNIT_TOL, Unit::Bits).unwrap();
        let graph = gk_via_components(&j, Unit::Bits);
        prop_assert!((spectral.value.value - graph.value.value).abs() <= 1e-9);
        prop_assert_eq!(spectral.k + 1, graph.component_count);
        prop_assert!(spectral.common_map_x.same_partition(&graph.common_map_x));
        prop_assert!(spectral.common_map_y.same_partition(&graph.common_map_y));
        prop_assert_eq!(spectral.disagreement_mass(&j), 0.0);
        let cap = j.entropy_x(Unit::Bits).value.min(j.entropy_y(Unit::Bits).value);
        prop_assert!(spectral.value.value <= cap + 1e-9);
    }

    #[test]
    fn gk_survives_refinement(j in blocks_strategy(), seed in any::<u64>()) {
        let spec = RefinementSpec::random(j.clone(), 3, seed).unwrap();
        let (fine, s, t) = refine_embedding(&spec).unwrap();
        let red = reduce_joint(&fine, &s, &t, true).unwrap();
        let a = gacs_korner(&fine, UNIT_TOL, Unit::Bits).unwrap();
        let b = gacs_korner(&red, UNIT_TOL, Unit::Bits).unwrap();
        prop_assert_eq!(a.k, b.k);
        prop_assert!((a.value.value - b.value.value).abs() <= 1e-9);
    }
}

#[test]
fn minimal_reduction_is_idempotent() {
    let j = JointDistribution::validate_and_trim(&[
        vec![0.2, 0.1],
        vec![0.2, 0.1],
        vec![0.1, 0.3],
    ])
    .unwrap();
    let (s, t) = minimal_sufficient_maps(&j, GROUPING_TOL);
    let red = reduce_joint(&j, &s, &t, true).unwrap();
    assert_eq!((red.nx(), red.ny()), (2, 2));
    let (s2, t2) = minimal_sufficient_maps(&red, GROUPING_TOL);
    assert!(s2.is_identity() && t2.is_identity());
}
