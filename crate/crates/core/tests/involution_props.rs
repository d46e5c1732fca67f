use num_bigint::BigInt;
use proptest::prelude::*;

use thetavoa::involutions::{
    closed_form_check, enumerate_decompositions, list_involutions, recurrence_counts, Involution,
};

#[test]
fn total_count_satisfies_recurrence() {
    let mut t = vec![BigInt::from(1), BigInt::from(1)];
    for n in 2..=12 {
        let next = &t[n - 1] + &t[n - 2] * (n - 1);
        t.push(next);
    }
    for n in 1..=12 {
        assert_eq!(BigInt::from(list_involutions(n).unwrap().len()), t[n], "n={n}");
    }
    assert_eq!(t[12], BigInt::from(140_152));
}

#[test]
fn fixed_point_recurrence_matches_closed_form() {
    let rec = recurrence_counts(12);
    for n in 1..=12 {
        for r in (n % 2..=n).step_by(2) {
            assert_eq!(rec[n][r], thetavoa::involutions::closed_form_count((n - r) / 2, r));
            assert!(closed_form_check((n - r) / 2, r).unwrap());
        }
    }
}

fn involution_strategy() -> impl Strategy<Value = Involution> {
    (2usize..=8, any::<u64>()).prop_filter_map("non-identity", |(n, pick)| {
        let all = list_involutions(n).unwrap();
        let s = all[(pick % all.len() as u64) as usize].clone();
        (!s.is_identity()).then_some(s)
    })
}

proptest! {
    #[test]
    fn decompositions_are_disjoint_and_multiply_to_sigma(sigma in involution_strategy()) {
        let target = sigma.as_permutation();
        let decs = enumerate_decompositions(&sigma).unwrap();
        // ordered set partitions of p pairs: Fubini numbers 1, 3, 13, 75
        let fubini = [0, 1, 3, 13, 75];
        prop_assert_eq!(decs.len(), fubini[sigma.pairs().len()]);
        for d in decs {
            let mut moved: Vec<usize> = d.parts.iter().flat_map(|p| p.moved()).collect();
            let before = moved.len();
            moved.sort_unstable();
            moved.dedup();
            prop_assert_eq!(moved.len(), before);
            prop_assert_eq!(d.product(sigma.n()), target.clone());
        }
    }
}
