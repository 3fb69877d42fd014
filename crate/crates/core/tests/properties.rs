use proptest::prelude::*;

use spbox::boxes::{decompose, sample_sp_box, sp_box_table, SpParameter};
use spbox::info::{
    binary_entropy, capacity, ensemble_averages, mutual_information, randomness,
    EnsembleDistribution,
};
use spbox::protocol::{complete_round, HiddenVariablePair, UnitVector};
use spbox::rng::Stream;

fn sp_param() -> impl Strategy<Value = SpParameter> {
    (0.5f64..=1.0).prop_map(|p| SpParameter::new(p).unwrap())
}

fn unit_vector() -> impl Strategy<Value = UnitVector> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_filter("nonzero", |(x, y, z)| x * x + y * y + z * z > 1e-6)
        .prop_map(|(x, y, z)| UnitVector::normalized(x, y, z).unwrap())
}

proptest! {
    #[test]
    fn box_rows_normalized_and_correlated(p in sp_param()) {
        let t = sp_box_table(p);
        for x in 0..2u8 {
            for y in 0..2u8 {
                let row: f64 = (0..4u8).map(|i| t.get(x, y, i >> 1, i & 1)).sum();
                prop_assert!((row - 1.0).abs() <= 1e-12);
                let correlated: f64 = (0..4u8)
                    .filter(|i| (i >> 1) ^ (i & 1) == x & y)
                    .map(|i| t.get(x, y, i >> 1, i & 1))
                    .sum();
                prop_assert_eq!(correlated, 1.0);
                prop_assert_eq!(t.alice_marginal(x, y, 0), p.value());
            }
        }
        prop_assert_eq!(t.signaling_deviation().bob_to_alice, 0.0);
    }

    #[test]
    fn decomposition_reconstructs(p in sp_param()) {
        let d = decompose(p);
        prop_assert!(d.weight_cbit >= 0.0 && d.weight_pr >= 0.0);
        prop_assert!((d.weight_cbit + d.weight_pr - 1.0).abs() <= 1e-15);
        prop_assert!(d.reconstruct().max_abs_diff(&sp_box_table(p)) <= 1e-15);
    }

    #[test]
    fn sampled_outputs_obey_box_law(p in sp_param(), x in 0..2u8, y in 0..2u8, seed in any::<u64>()) {
        let mut rng = Stream::new(seed, 0);
        for _ in 0..64 {
            let (a, b) = sample_sp_box(p, x, y, &mut rng);
            prop_assert_eq!(a ^ b, x & y);
        }
    }

    #[test]
    fn complementarity_sums_to_one(p in sp_param()) {
        prop_assert!((randomness(p) + capacity(p) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn ensemble_total_is_one(atoms in prop::collection::vec((0.5f64..=1.0, 1e-6f64..1.0), 1..12)) {
        let total: f64 = atoms.iter().map(|(_, w)| w).sum();
        let dist = EnsembleDistribution::new(
            atoms.iter().map(|&(p, w)| (SpParameter::new(p).unwrap(), w / total)).collect(),
        ).unwrap();
        prop_assert!((ensemble_averages(&dist).total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn entropy_is_symmetric_and_bounded(q in 0.0f64..=1.0) {
        let h = binary_entropy(q).unwrap();
        prop_assert!((0.0..=1.0).contains(&h));
        prop_assert!((h - binary_entropy(1.0 - q).unwrap()).abs() <= 1e-15);
    }

    #[test]
    fn mutual_information_nonnegative_and_bounded(w in prop::array::uniform4(0.0f64..1.0)) {
        let total: f64 = w.iter().sum();
        prop_assume!(total > 1e-9);
        let joint = [[w[0] / total, w[1] / total], [w[2] / total, w[3] / total]];
        let i = mutual_information(&joint).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&i));
    }

    #[test]
    fn round_identities_hold(
        a in unit_vector(), b in unit_vector(), l1 in unit_vector(), l2 in unit_vector(),
        p in sp_param(), seed in any::<u64>(),
    ) {
        let mut rng = Stream::new(seed, 0);
        let hidden = HiddenVariablePair { lambda1: l1, lambda2: l2 };
        let t = complete_round(hidden, &a, &b, |x, y| sample_sp_box(p, x, y, &mut rng), None);
        prop_assert!(t.box_law_holds());
        prop_assert!(t.parity_identity_holds());
    }
}
