//! What tokens are used for: unlinkable per-service tags in place of
//! CAPTCHAs, one-person-one-count likes and followers, and sortition.

use std::collections::HashSet;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::ceremony::{attendee_token, CeremonyScript, EventConfig, RollList};
use crate::crypto::{
    hash_parts, lrs_sign, lrs_verify, Digest32, LinkableSignature, LinkageTag, PersonKeyPair, Scope,
};
use crate::error::{Error, Result};

pub fn service_scope(service_id: &str, action_id: &str) -> Scope {
    Scope::with_fields("service", &[service_id.as_bytes(), action_id.as_bytes()])
}

/// Like scope binds the post only, so every account of one person maps to
/// the same tag.
pub fn like_scope(post_id: &str) -> Scope {
    Scope::new("like", post_id.as_bytes())
}

pub fn follow_scope(account_id: &str) -> Scope {
    Scope::new("follow", account_id.as_bytes())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagProof {
    pub tag: LinkageTag,
    pub signature: LinkableSignature,
}

impl TagProof {
    pub fn sign(holder: &PersonKeyPair, roll: &RollList, scope: &Scope) -> Result<Self> {
        if !roll.contains(holder.public()) {
            return Err(Error::TokenNotInRoll);
        }
        let signature = lrs_sign(holder.secret(), roll.tokens(), scope, scope.as_bytes())?;
        Ok(Self {
            tag: signature.tag,
            signature,
        })
    }

    pub fn verify(&self, roll: &RollList, scope: &Scope) -> bool {
        self.signature.tag == self.tag
            && lrs_verify(roll.tokens(), scope, scope.as_bytes(), &self.signature)
    }
}

pub fn make_service_tag(
    holder: &PersonKeyPair,
    roll: &RollList,
    service_id: &str,
    action_id: &str,
) -> Result<TagProof> {
    TagProof::sign(holder, roll, &service_scope(service_id, action_id))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckOutcome {
    Accepted,
    Duplicate,
    Invalid,
}

pub fn service_check(
    proof: &TagProof,
    roll: &RollList,
    service_id: &str,
    action_id: &str,
    seen_tags: &mut HashSet<LinkageTag>,
) -> CheckOutcome {
    if !proof.verify(roll, &service_scope(service_id, action_id)) {
        CheckOutcome::Invalid
    } else if !seen_tags.insert(proof.tag) {
        CheckOutcome::Duplicate
    } else {
        CheckOutcome::Accepted
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Upvote {
    pub post_id: String,
    pub account_id: String,
    pub tag_proof: TagProof,
}

impl Upvote {
    pub fn new(
        holder: &PersonKeyPair,
        roll: &RollList,
        post_id: &str,
        account_id: &str,
    ) -> Result<Self> {
        Ok(Self {
            post_id: post_id.to_owned(),
            account_id: account_id.to_owned(),
            tag_proof: TagProof::sign(holder, roll, &like_scope(post_id))?,
        })
    }
}

fn count_distinct<'a>(
    proofs: impl Iterator<Item = &'a TagProof>,
    roll: &RollList,
    scope: &Scope,
) -> usize {
    proofs
        .filter(|p| p.verify(roll, scope))
        .map(|p| p.tag)
        .collect::<HashSet<_>>()
        .len()
}

/// Unique people behind the upvotes on `post_id`. Upvotes that do not verify
/// against the roll governing the post count for nothing.
pub fn count_unique_upvotes(post_id: &str, upvotes: &[Upvote], roll_at_post: &RollList) -> usize {
    let scope = like_scope(post_id);
    count_distinct(
        upvotes
            .iter()
            .filter(|u| u.post_id == post_id)
            .map(|u| &u.tag_proof),
        roll_at_post,
        &scope,
    )
}

/// Unique people following `account_id` according to the current roll;
/// followers whose token has expired drop out.
pub fn count_unique_followers(
    account_id: &str,
    followers: &[TagProof],
    current_roll: &RollList,
) -> usize {
    count_distinct(followers.iter(), current_roll, &follow_scope(account_id))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountRow {
    pub fixture_id: String,
    pub persons: usize,
    pub accounts: usize,
    pub counted: usize,
}

pub fn write_count_csv<W: Write>(rows: &[CountRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs an honest ceremony for `people` attendees named `person-0..` and
/// returns their token key pairs alongside the published roll.
pub fn issue_roll(people: usize, cycle: u64, seed: u64) -> Result<(Vec<PersonKeyPair>, RollList)> {
    let ids: Vec<String> = (0..people).map(|i| format!("person-{i}")).collect();
    let cfg = EventConfig::new(format!("roll/cycle-{cycle}"), "roll", cycle, 10);
    let out = CeremonyScript::honest(cfg.clone(), ids.clone()).run(seed)?;
    let kps = ids
        .iter()
        .map(|i| attendee_token(seed, &cfg.event_id, i))
        .collect();
    Ok((kps, out.roll))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SortitionResult {
    pub roll_digest: Digest32,
    pub seed: Digest32,
    pub k: usize,
    pub selected: Vec<usize>,
}

/// Draws `k` distinct token indices with a partial Fisher–Yates shuffle
/// keyed by `H(roll digest ‖ seed)`.
pub fn sortition_select(roll: &RollList, seed: &[u8; 32], k: usize) -> Result<SortitionResult> {
    let n = roll.len();
    if k > n {
        return Err(Error::KTooLarge { k, n });
    }
    let key = hash_parts("popkit/sortition", &[roll.list_digest().as_bytes(), seed]);
    let mut rng = ChaCha20Rng::from_seed(key);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        idx.swap(i, j);
    }
    let mut selected = idx[..k].to_vec();
    selected.sort_unstable();
    Ok(SortitionResult {
        roll_digest: *roll.list_digest(),
        seed: Digest32(*seed),
        k,
        selected,
    })
}
