use std::cmp::Ordering;

use proptest::prelude::*;

use lincon::format::{parse_instance, write_instance};
use lincon::instances::{gen_random, RandomKind, RandomParams};
use lincon::scalar::Scalar;
use lincon::verify::brute_force_opt;
use lincon::{solve, AgentSet, Algorithm, SolveOptions};

fn kind() -> impl Strategy<Value = RandomKind> {
    prop_oneof![
        Just(RandomKind::Additive),
        Just(RandomKind::Coverage),
        Just(RandomKind::XosClauses)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn set_algebra_matches_masks(n in 1usize..=40, a in any::<u64>(), b in any::<u64>()) {
        let keep = (1u64 << n) - 1;
        let (a, b) = (a & keep, b & keep);
        let (sa, sb) = (AgentSet::from_mask(n, a), AgentSet::from_mask(n, b));
        prop_assert_eq!(sa.union(&sb).to_mask(), Some(a | b));
        prop_assert_eq!(sa.intersection(&sb).to_mask(), Some(a & b));
        prop_assert_eq!(sa.difference(&sb).to_mask(), Some(a & !b));
        prop_assert_eq!(sa.complement().to_mask(), Some(!a & keep));
        prop_assert_eq!(sa.len(), a.count_ones() as usize);
        prop_assert_eq!(sa.is_subset(&sb), a & !b == 0);
        prop_assert_eq!(AgentSet::from_indices(n, sa.to_vec()).unwrap(), sa);
    }

    #[test]
    fn tie_order_is_cardinality_then_lexicographic(n in 1usize..=12, a in any::<u64>(), b in any::<u64>()) {
        let keep = (1u64 << n) - 1;
        let (sa, sb) = (AgentSet::from_mask(n, a & keep), AgentSet::from_mask(n, b & keep));
        let expected = sa.len().cmp(&sb.len()).then_with(|| sa.to_vec().cmp(&sb.to_vec()));
        prop_assert_eq!(sa.tie_cmp(&sb), expected);
        prop_assert_eq!(sb.tie_cmp(&sa), expected.reverse());
        prop_assert_eq!(sa.tie_cmp(&sa), Ordering::Equal);
    }

    #[test]
    fn instances_survive_a_file_round_trip(k in kind(), n in 1usize..=10, seed in 0u64..1000) {
        let inst = gen_random(k, n, seed, &RandomParams::default()).unwrap();
        let text = write_instance(&inst);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(write_instance(&back), text);
    }

    #[test]
    fn brute_force_dominates_every_algorithm(k in kind(), n in 2usize..=9, seed in 0u64..1000) {
        let inst = gen_random(k, n, seed, &RandomParams::default()).unwrap().map(Scalar::to_f64);
        let opt = brute_force_opt(&inst).unwrap().g.to_f64();
        for alg in [Algorithm::Xos, Algorithm::Submod, Algorithm::Single] {
            if alg == Algorithm::Submod && !inst.reward.is_submodular_kind() {
                continue;
            }
            let g = solve(&inst, alg, &SolveOptions::default()).unwrap().g.to_f64();
            prop_assert!(g <= opt + 1e-9, "{} got {} above {}", alg, g, opt);
        }
    }
}
