mod common;

use std::collections::BTreeMap;

use popkit::canonical::to_canonical_string;
use popkit::federation::{
    assign_cross_witnesses, public_commitments, run_federation_cycle, CycleCheck,
    FederationScenario, Volunteer,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scenario(rng: &mut ChaCha8Rng) -> FederationScenario {
    let n_sites = rng.gen_range(2..6);
    FederationScenario {
        cycle: rng.gen_range(0..1000),
        sites: (0..n_sites).map(|i| format!("site-{i}")).collect(),
        deadline: rng.gen_range(10..500),
        bodies_per_site: rng.gen_range(4..12),
        volunteers_per_site: 4,
        witnesses_per_site: 2,
        behaviors: BTreeMap::new(),
        check: CycleCheck::default(),
    }
}

#[test]
fn honest_cycles_raise_no_flags_and_conserve_bodies() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for run in 0..1000 {
        let sc = scenario(&mut rng);
        let bundle = run_federation_cycle(&sc, run).unwrap();
        assert!(bundle.report.passed(), "run {run}: {:?}", bundle.report);
        let tokens: usize = bundle.records.iter().map(|r| r.roll.len()).sum();
        assert!(tokens <= sc.sites.len() * sc.bodies_per_site);
    }
}

#[test]
fn commitments_reveal_no_targets() {
    let sites: Vec<String> = (0..5).map(|i| format!("town-{i}")).collect();
    let vols: Vec<Volunteer> = sites
        .iter()
        .flat_map(|s| {
            (0..4).map(move |i| Volunteer {
                id: format!("{s}/vol-{i}"),
                home_site: s.clone(),
            })
        })
        .collect();
    let a = assign_cross_witnesses(&[5; 32], &vols, &sites, 2).unwrap();
    let published = public_commitments(&a);
    let text = to_canonical_string(&published).unwrap();
    for s in &sites {
        assert!(!text.contains(s.as_str()));
    }
    let distinct: std::collections::HashSet<_> = published.iter().collect();
    assert_eq!(distinct.len(), published.len());
    assert!(published.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn lottery_targets_are_uniform_over_other_sites() {
    // 4 sites, 1 witness each: each volunteer's target is uniform over the
    // three sites that are not home
    let sites: Vec<String> = (0..4).map(|i| format!("s{i}")).collect();
    let vols: Vec<Volunteer> = sites
        .iter()
        .flat_map(|s| {
            (0..3).map(move |i| Volunteer {
                id: format!("{s}-{i}"),
                home_site: s.clone(),
            })
        })
        .collect();
    let mut counts: BTreeMap<(String, String), u64> = BTreeMap::new();
    for draw in 0..4000u32 {
        let mut seed = [0u8; 32];
        seed[..4].copy_from_slice(&draw.to_be_bytes());
        for a in assign_cross_witnesses(&seed, &vols, &sites, 1).unwrap() {
            *counts.entry((a.home_site, a.target_site)).or_default() += 1;
        }
    }
    let alpha = 0.01 / sites.len() as f64;
    for home in &sites {
        let row: Vec<u64> = sites
            .iter()
            .filter(|t| *t != home)
            .map(|t| counts.get(&(home.clone(), t.clone())).copied().unwrap_or(0))
            .collect();
        let p = common::uniform_p(&row);
        assert!(p > alpha, "home {home}: {row:?} p={p}");
    }
}
