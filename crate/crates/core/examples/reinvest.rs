//! Profit reinvested in new identities: the attacker's share compounds.
//!
//! Usage: cargo run --release --example reinvest [seed]

use popkit::sybilsim::{run_scenario, SybilScenario};

fn main() -> popkit::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .map_or(popkit::cli::DEFAULT_SEED, |s| s.parse().expect("seed"));
    let sc = SybilScenario {
        reinvest: true,
        creation_cost: 5.0,
        replications: 5,
        max_sybils: Some(90_000),
        ..SybilScenario::baseline()
    };
    let r = run_scenario(&sc, seed)?;
    for row in r.per_cycle.iter().step_by(20) {
        println!(
            "cycle {:>3}  sybils {:>9.0}  share {:.3}  advantage {:.3}",
            row.cycle, row.sybil_count, row.sybil_share, row.advantage
        );
    }
    println!(
        "final share {:.3} ± {:.3}",
        r.summary.final_share, r.summary.final_share_stderr
    );
    Ok(())
}
