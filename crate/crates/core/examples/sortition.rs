//! Random selection of a citizens' panel from a roll, keyed by a public
//! beacon so anyone can recompute it.

use popkit::applications::{issue_roll, sortition_select};
use popkit::crypto::hash_parts;

fn main() -> popkit::Result<()> {
    let beacon = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "beacon-round-4417".into());
    let (_, roll) = issue_roll(200, 5, popkit::cli::DEFAULT_SEED)?;
    let seed = hash_parts("popkit/beacon", &[beacon.as_bytes()]);
    let panel = sortition_select(&roll, &seed, 12)?;
    println!(
        "roll {} ({} tokens), beacon {beacon:?}",
        roll.list_digest().to_hex(),
        roll.len()
    );
    println!("panel: {:?}", panel.selected);
    Ok(())
}
