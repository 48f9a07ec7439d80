//! Unlinkable per-service tags instead of CAPTCHAs, and like counts that
//! count people rather than accounts.

use std::collections::HashSet;

use popkit::applications::{
    count_unique_upvotes, issue_roll, make_service_tag, service_check, Upvote,
};

fn main() -> popkit::Result<()> {
    let (people, roll) = issue_roll(6, 1, popkit::cli::DEFAULT_SEED)?;
    let mut seen = HashSet::new();
    for (who, service) in [(0, "forum"), (1, "forum"), (0, "forum"), (0, "shop")] {
        let proof = make_service_tag(&people[who], &roll, service, "signup")?;
        let outcome = service_check(&proof, &roll, service, "signup", &mut seen);
        println!(
            "person {who} signs up at {service:<5} tag {}…  {outcome:?}",
            &proof.tag.to_hex()[..12]
        );
    }

    let mut votes = Vec::new();
    for (who, account) in [
        (2, "sock-a"),
        (2, "sock-b"),
        (2, "sock-c"),
        (3, "dana"),
        (4, "eve"),
    ] {
        votes.push(Upvote::new(&people[who], &roll, "post-9", account)?);
    }
    println!(
        "{} upvotes on post-9 from {} people",
        votes.len(),
        count_unique_upvotes("post-9", &votes, &roll)
    );
    Ok(())
}
