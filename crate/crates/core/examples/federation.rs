//! A federated cycle across several sites with one shared deadline and a
//! secret cross-witness lottery. One site fabricates its event outright and
//! another inflates its roll; both get flagged.

use std::collections::BTreeMap;

use popkit::ceremony::Attack;
use popkit::federation::{
    public_commitments, run_federation_cycle, CycleCheck, FederationScenario, SiteBehavior,
};

fn main() -> popkit::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .map_or(popkit::cli::DEFAULT_SEED, |s| s.parse().expect("seed"));
    let sites: Vec<String> = ["harbor", "mill", "orchard", "quarry", "ridge"]
        .map(String::from)
        .to_vec();
    let mut behaviors = BTreeMap::new();
    behaviors.insert(
        "quarry".to_string(),
        SiteBehavior::Fabricated { tokens: 20 },
    );
    behaviors.insert(
        "mill".to_string(),
        SiteBehavior::Corrupt {
            attacks: vec![Attack::Inflate(3)],
        },
    );
    let scenario = FederationScenario {
        cycle: 7,
        sites,
        deadline: 1_000,
        bodies_per_site: 20,
        volunteers_per_site: 6,
        witnesses_per_site: 2,
        behaviors,
        check: CycleCheck::default(),
    };
    let bundle = run_federation_cycle(&scenario, seed)?;
    println!(
        "published commitments: {}",
        public_commitments(&bundle.reveals).len()
    );
    for r in &bundle.records {
        let witnesses = bundle
            .reveals
            .iter()
            .filter(|a| a.verified_site() == Some(r.site_id.as_str()))
            .count();
        println!(
            "{:<8} tokens {:>3}  revealed witnesses {witnesses}",
            r.site_id,
            r.roll.len()
        );
    }
    println!("passed:  {:?}", bundle.report.passed_sites);
    for f in &bundle.report.flagged_sites {
        println!("flagged: {} {:?}", f.site, f.reasons);
    }
    Ok(())
}
