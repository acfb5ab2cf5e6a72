use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use swd_core::construct::{decompose, express_in_permutation_span, extend, Assignment};
use swd_core::invariant::{check_membership, eta, restrict, theta};
use swd_core::pattern::{build_d, build_f, Basis, Policy};
use swd_core::ring::RingDescriptor;
use swd_core::tensor::{Limits, TensorMatrix};
use swd_core::verify::random_invariant_by_extension;

fn ring_strategy() -> impl Strategy<Value = RingDescriptor> {
    prop_oneof![
        Just(RingDescriptor::Integers),
        Just(RingDescriptor::Rationals),
        (2u64..9).prop_map(|m| RingDescriptor::modular(m).unwrap()),
    ]
}

fn basis_strategy(n: usize) -> impl Strategy<Value = String> {
    (1..=n, any::<bool>()).prop_map(|(k, row)| if row { format!("row:{k}") } else { format!("col:{k}") })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn extension_restricts_back(seed in any::<u64>(), ring in ring_strategy(), (n, r) in (2usize..5, 1usize..3)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lim = Limits::default();
        let b = random_invariant_by_extension(n, r - 1, ring, &mut rng, &lim).unwrap();
        let f = build_f(n, r, Basis::last_row(n), Policy::LargestFirst).unwrap();
        let a = extend(&b, &Assignment::random(&f, ring, &mut rng), &lim).unwrap();
        prop_assert!(check_membership(&a).in_e);
        prop_assert_eq!(restrict(&a).unwrap(), b);
        // the free values are read back from the extension
        prop_assert_eq!(extend(&restrict(&a).unwrap(), &Assignment::from_matrix(&f, &a), &lim).unwrap(), a);
    }

    #[test]
    fn decompositions_sum_back(seed in any::<u64>(), ring in ring_strategy(), (n, basis) in (2usize..5).prop_flat_map(|n| (Just(n), basis_strategy(n)))) {
        let r = 2;
        let lim = Limits::default();
        let parsed = Basis::parse(n, &basis).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_invariant_by_extension(n, r, ring, &mut rng, &lim).unwrap();
        let d = build_d(n, r, parsed, Policy::LargestFirst).unwrap();
        let parts = decompose(&a, &Assignment::random(&d, ring, &mut rng)).unwrap();
        let total = parts.iter().try_fold(TensorMatrix::zeros(n, r, ring), |acc, s| acc.add(&s.matrix)).unwrap();
        prop_assert_eq!(total, a);
    }

    #[test]
    fn eta_inverts_theta(seed in any::<u64>(), n in 2usize..5, p in 1usize..5, q in 1usize..5) {
        prop_assume!(p <= n && q <= n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_invariant_by_extension(n - 1, 2, RingDescriptor::Integers, &mut rng, &Limits::default()).unwrap();
        prop_assert_eq!(eta(&theta(&c, p, q).unwrap(), p, q).unwrap(), c);
    }

    #[test]
    fn invariants_lie_in_the_permutation_span(seed in any::<u64>(), ring in ring_strategy(), (n, r) in (2usize..5, 1usize..4)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_invariant_by_extension(n, r, ring, &mut rng, &Limits::default()).unwrap();
        prop_assert!(express_in_permutation_span(&a).is_ok());
    }
}
