use num_bigint::BigInt;
use proptest::prelude::*;
use shw::hurwitz::{classical_hurwitz, ClassicalQuery};
use shw::partitions::{odd_partitions_of, partitions_of, Partition};
use shw::rational;
use shw::spin::{Parity, SpinEngine, SpinQuery};
use shw::symgroup::{commutator, compose, cycle_type, Perm};
use shw::Rational;

fn partition_of(d: u32) -> impl Strategy<Value = Partition> {
    let all = partitions_of(d).unwrap();
    (0..all.len()).prop_map(move |i| all[i].clone())
}

fn odd_profiles(d: u32, max_len: usize) -> impl Strategy<Value = Vec<Partition>> {
    let odd = odd_partitions_of(d).unwrap();
    prop::collection::vec(0..odd.len(), 0..=max_len)
        .prop_map(move |ix| ix.into_iter().map(|i| odd[i].clone()).collect())
}

fn perm(d: usize) -> impl Strategy<Value = Perm> {
    Just((0..d as u8).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(|v| Perm::new(v).unwrap())
}

proptest! {
    #[test]
    fn partition_display_round_trips(d in 1u32..=12, seed in any::<prop::sample::Index>()) {
        let all = partitions_of(d).unwrap();
        let m = &all[seed.index(all.len())];
        let shown = m.to_string();
        prop_assert_eq!(&shown.parse::<Partition>().unwrap(), m);
    }

    #[test]
    fn partition_parse_is_order_insensitive(parts in prop::collection::vec(1u32..6, 1..5)) {
        let text = parts.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
        let m: Partition = text.parse().unwrap();
        let mut sorted = parts.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        prop_assert_eq!(m.parts(), &sorted[..]);
        prop_assert_eq!(m.degree(), parts.iter().sum::<u32>());
    }

    #[test]
    fn trivial_insertions_and_order_do_not_matter(
        h in 0u32..=3,
        odd in any::<bool>(),
        (d, profiles) in (3u32..=4).prop_flat_map(|d| (Just(d), odd_profiles(d, 3))),
        extra in 0usize..3,
    ) {
        let parity = if odd && h > 0 { Parity::Odd } else { Parity::Even };
        let engine = SpinEngine::new();
        let base = engine.spin_hurwitz(&SpinQuery::new(h, parity, d, profiles.clone()).unwrap()).unwrap();

        let mut padded = profiles.clone();
        padded.reverse();
        padded.extend(std::iter::repeat_n(Partition::ones(d).unwrap(), extra));
        let q = SpinQuery::new(h, parity, d, padded).unwrap();
        prop_assert_eq!(engine.spin_hurwitz(&q).unwrap(), base.clone());
        prop_assert_eq!(SpinEngine::without_memo().spin_hurwitz(&q).unwrap(), base);
    }

    #[test]
    fn classical_profile_order_is_irrelevant(
        h in 0u32..=2,
        profiles in prop::collection::vec(partition_of(5), 0..4),
    ) {
        let forward = classical_hurwitz(&ClassicalQuery::new(h, 5, profiles.clone()).unwrap()).unwrap();
        let mut reversed = profiles;
        reversed.reverse();
        let backward = classical_hurwitz(&ClassicalQuery::new(h, 5, reversed).unwrap()).unwrap();
        prop_assert_eq!(forward, backward);
    }

    #[test]
    fn rational_strings_round_trip(num in -10_000i64..10_000, den in 1i64..10_000) {
        let r = Rational::new(BigInt::from(num), BigInt::from(den));
        prop_assert_eq!(rational::parse_rational(&rational::to_ratio_string(&r)).unwrap(), r.clone());
        prop_assert_eq!(rational::parse_rational(&rational::to_pretty_string(&r)).unwrap(), r);
    }

    #[test]
    fn commutators_are_even_and_conjugation_preserves_type(a in perm(6), b in perm(6)) {
        let c = commutator(&a, &b);
        let sign_exponent: u32 = cycle_type(&c).parts().iter().map(|&l| l - 1).sum();
        prop_assert_eq!(sign_exponent % 2, 0);
        let conj = compose(&compose(&a, &b), &a.inverse());
        prop_assert_eq!(cycle_type(&conj), cycle_type(&b));
    }
}
