mod common;

use std::collections::HashSet;

use popkit::applications::{
    count_unique_upvotes, issue_roll, make_service_tag, service_scope, sortition_select, Upvote,
};
use popkit::ceremony::forge_roll_list;
use popkit::crypto::hash_parts;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn upvote_count_matches_brute_force(accounts in proptest::collection::vec(1usize..=4, 1..=10),
                                        stale in proptest::collection::vec(any::<bool>(), 10),
                                        seed in any::<u64>()) {
        let persons = accounts.len();
        let (kps, roll) = issue_roll(persons, 1, seed).unwrap();
        let (old_kps, old_roll) = issue_roll(persons, 0, seed).unwrap();
        let mut votes = Vec::new();
        let mut valid_people = HashSet::new();
        for (p, &n) in accounts.iter().enumerate() {
            for a in 0..n {
                let acct = format!("acct-{p}-{a}");
                if stale[p] {
                    votes.push(Upvote::new(&old_kps[p], &old_roll, "post", &acct).unwrap());
                } else {
                    votes.push(Upvote::new(&kps[p], &roll, "post", &acct).unwrap());
                    valid_people.insert(*kps[p].secret().as_bytes());
                }
            }
        }
        prop_assert_eq!(count_unique_upvotes("post", &votes, &roll), valid_people.len());
    }

    #[test]
    fn service_tags_unlinkable_across_scopes(person in 0usize..5, s1 in "[a-z]{1,6}", s2 in "[a-z]{1,6}", a1 in "[a-z]{1,4}", a2 in "[a-z]{1,4}") {
        prop_assume!((s1.as_str(), a1.as_str()) != (s2.as_str(), a2.as_str()));
        prop_assume!(service_scope(&s1, &a1) != service_scope(&s2, &a2));
        let (kps, roll) = issue_roll(5, 0, 3).unwrap();
        let x = make_service_tag(&kps[person], &roll, &s1, &a1).unwrap();
        let y = make_service_tag(&kps[person], &roll, &s2, &a2).unwrap();
        prop_assert_ne!(x.tag, y.tag);
    }
}

fn inclusion_counts(roll: &popkit::ceremony::RollList, draws: u32) -> Vec<u64> {
    let mut counts = vec![0u64; roll.len()];
    for d in 0..draws {
        let seed = hash_parts("test/beacon", &[&d.to_be_bytes()]);
        for i in sortition_select(roll, &seed, 5).unwrap().selected {
            counts[i] += 1;
        }
    }
    counts
}

#[test]
fn sortition_ignores_position() {
    let (_, roll) = issue_roll(20, 0, 1).unwrap();
    let mut shuffled = roll.tokens().to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(4));
    let moved = forge_roll_list(roll.event_id(), roll.cycle(), shuffled.clone()).unwrap();

    let a = inclusion_counts(&roll, 4000);
    let b_by_pos = inclusion_counts(&moved, 4000);
    // line the shuffled roll's counts up by token
    let b: Vec<u64> = roll
        .tokens()
        .iter()
        .map(|t| b_by_pos[shuffled.iter().position(|s| s == t).unwrap()])
        .collect();
    let p = common::homogeneity_p(&[a.clone(), b.clone()]);
    assert!(p > 0.001, "p={p}\n{a:?}\n{b:?}");
    assert!(common::uniform_p(&a) > 0.001);
}
