//! One pseudonym party: admit, seal the doors, scan tokens out, publish,
//! cosign, and check the result. Then the same event with a padded roll.
//!
//! Usage: cargo run --example ceremony [seed]

use popkit::ceremony::{verify_event, Attack, CeremonyScript, EventConfig};

fn main() -> popkit::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .map_or(popkit::cli::DEFAULT_SEED, |s| s.parse().expect("seed"));
    let config = EventConfig::new("library/cycle-3", "library", 3, 100);
    let people: Vec<String> = (0..15).map(|i| format!("guest-{i}")).collect();

    let honest = CeremonyScript::honest(config.clone(), people.clone()).run(seed)?;
    println!(
        "honest: {} tokens, {} cosignatures, phase {:?}",
        honest.roll.len(),
        honest.roll.cosignatures().len(),
        honest.state.phase()
    );
    println!(
        "  report: {:?}",
        verify_event(&honest.roll, &honest.ground, &config.policy())
    );

    for attack in [
        Attack::Inflate(5),
        Attack::DoubleScan("guest-2".into()),
        Attack::LateEntry("mallory".into()),
    ] {
        let mut script = CeremonyScript::honest(config.clone(), people.clone());
        script.attacks = vec![attack.clone()];
        let out = script.run(seed)?;
        let report = verify_event(&out.roll, &out.ground, &config.policy());
        let codes: Vec<_> = report.findings.iter().map(|f| f.code).collect();
        println!("{attack:?}: passed={} findings={codes:?}", report.passed);
    }
    Ok(())
}
