//! Privacy-booth kiosk: each ticket prints one real token and `k` fakes.
//!
//! Realness is a designated-verifier mark: a real token's `auth` field is
//! `PRF(tally_key, public)` truncated to 16 bytes, a fake's is 16 random
//! bytes. Both publics are uniform group elements, so without the tally key
//! nothing separates the two. The real token is always printed first; the
//! public serialization of a sheet omits that index.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use curve25519_dalek::scalar::Scalar;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::ceremony::RollList;
use crate::crypto::{
    bytes_hex, hash_parts, lrs_sign, lrs_verify, prf, GroupElement, LinkableSignature, LinkageTag,
    PersonKeyPair, Scope,
};
use crate::error::{Error, Result};

pub const AUTH_LEN: usize = 16;
pub const DEFAULT_FAKES: usize = 3;

/// Secret that alone tells real tokens from fakes at counting time.
#[derive(Clone, PartialEq, Eq)]
pub struct TallyKey([u8; 32]);

impl TallyKey {
    pub fn new(bytes: [u8; 32]) -> Self {
        Self(bytes)
    }

    pub fn derive(label: &str) -> Self {
        Self(hash_parts("popkit/tally-key", &[label.as_bytes()]))
    }

    fn mark(&self, public: &[u8]) -> [u8; AUTH_LEN] {
        let full = prf(&self.0, public);
        full[..AUTH_LEN].try_into().expect("prefix")
    }
}

impl fmt::Debug for TallyKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("TallyKey(..)")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrintedToken {
    #[serde(with = "bytes_hex")]
    pub public: Vec<u8>,
    #[serde(with = "bytes_hex")]
    pub auth: Vec<u8>,
}

impl PrintedToken {
    pub fn public_element(&self) -> Option<GroupElement> {
        GroupElement::from_bytes(&self.public).ok()
    }
}

/// Structural validity only; never consults the tally key.
pub fn public_validate(token: &PrintedToken) -> bool {
    token.auth.len() == AUTH_LEN && token.public_element().is_some()
}

/// Tokens whose mark matches the tally key.
pub fn filter_real(tokens: &[PrintedToken], key: &TallyKey) -> Vec<PrintedToken> {
    tokens
        .iter()
        .filter(|t| public_validate(t) && key.mark(&t.public).as_slice() == t.auth.as_slice())
        .cloned()
        .collect()
}

/// A printed sheet as handed to the attendee inside the booth.
pub struct PrintedSheet {
    tokens: Vec<PrintedToken>,
    secrets: Vec<Scalar>,
}

impl PrintedSheet {
    pub const REAL_INDEX: usize = 0;

    /// Public form: the tokens in print order, no real/fake marking.
    pub fn tokens(&self) -> &[PrintedToken] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Key pair printed alongside token `i` (fakes have working keys too, so a
    /// coerced holder can hand one over and use it).
    pub fn keypair(&self, i: usize) -> PersonKeyPair {
        PersonKeyPair::from_secret(self.secrets[i])
    }

    pub fn real_keypair(&self) -> PersonKeyPair {
        self.keypair(Self::REAL_INDEX)
    }

    pub fn public_json(&self) -> Result<String> {
        crate::canonical::to_canonical_string(&self.tokens)
    }
}

impl fmt::Debug for PrintedSheet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PrintedSheet")
            .field("tokens", &self.tokens)
            .finish_non_exhaustive()
    }
}

/// A single kiosk. Ticket consumption goes through `&mut self`.
#[derive(Debug, Default)]
pub struct Kiosk {
    used_tickets: HashSet<String>,
}

impl Kiosk {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn issue(
        &mut self,
        ticket_id: &str,
        tally_key: &TallyKey,
        k_fakes: usize,
        seed: &[u8; 32],
    ) -> Result<PrintedSheet> {
        if k_fakes < 1 {
            return Err(Error::InvalidArgument(
                "at least one fake token per sheet".into(),
            ));
        }
        if self.used_tickets.contains(ticket_id) {
            return Err(Error::TicketReused(ticket_id.to_owned()));
        }
        let mut rng =
            ChaCha20Rng::from_seed(hash_parts("popkit/kiosk", &[seed, ticket_id.as_bytes()]));
        let mut tokens = Vec::with_capacity(k_fakes + 1);
        let mut secrets = Vec::with_capacity(k_fakes + 1);
        for i in 0..=k_fakes {
            let secret = Scalar::random(&mut rng);
            let public = GroupElement::generator_mul(&secret).as_bytes().to_vec();
            let auth = if i == PrintedSheet::REAL_INDEX {
                tally_key.mark(&public).to_vec()
            } else {
                let mut a = vec![0u8; AUTH_LEN];
                rng.fill_bytes(&mut a);
                a
            };
            tokens.push(PrintedToken { public, auth });
            secrets.push(secret);
        }
        self.used_tickets.insert(ticket_id.to_owned());
        Ok(PrintedSheet { tokens, secrets })
    }
}

pub fn kiosk_issue(
    kiosk: &mut Kiosk,
    ticket_id: &str,
    tally_key: &TallyKey,
    k_fakes: usize,
    seed: &[u8; 32],
) -> Result<PrintedSheet> {
    kiosk.issue(ticket_id, tally_key, k_fakes, seed)
}

fn delegation_scope(cycle: u64) -> Scope {
    Scope::new("delegation", &cycle.to_be_bytes())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelegationRecord {
    pub delegator_tag: LinkageTag,
    pub delegate_public: GroupElement,
    pub signature: LinkableSignature,
}

/// Delegates the cycle's subsequent votes from a real token to
/// `delegate_public`, signed anonymously over the cycle's roll list.
pub fn booth_delegate(
    real: &PersonKeyPair,
    cycle_roll: &RollList,
    delegate_public: &GroupElement,
) -> Result<DelegationRecord> {
    if !cycle_roll.contains(real.public()) {
        return Err(Error::TokenNotInRoll);
    }
    let signature = lrs_sign(
        real.secret(),
        cycle_roll.tokens(),
        &delegation_scope(cycle_roll.cycle()),
        delegate_public.as_bytes(),
    )?;
    Ok(DelegationRecord {
        delegator_tag: signature.tag,
        delegate_public: *delegate_public,
        signature,
    })
}

pub fn verify_delegation(record: &DelegationRecord, cycle_roll: &RollList) -> bool {
    record.signature.tag == record.delegator_tag
        && lrs_verify(
            cycle_roll.tokens(),
            &delegation_scope(cycle_roll.cycle()),
            record.delegate_public.as_bytes(),
            &record.signature,
        )
}

/// Delegations deduplicated by tag: a later delegation from the same token
/// supersedes the earlier one.
#[derive(Clone, Debug, Default)]
pub struct DelegationBook {
    by_tag: BTreeMap<LinkageTag, DelegationRecord>,
}

impl DelegationBook {
    /// Returns the superseded record, if any.
    pub fn record(
        &mut self,
        cycle_roll: &RollList,
        record: DelegationRecord,
    ) -> Result<Option<DelegationRecord>> {
        if !verify_delegation(&record, cycle_roll) {
            return Err(Error::InvalidSignature);
        }
        Ok(self.by_tag.insert(record.delegator_tag, record))
    }

    pub fn delegate_of(&self, tag: &LinkageTag) -> Option<&GroupElement> {
        self.by_tag.get(tag).map(|r| &r.delegate_public)
    }

    pub fn len(&self) -> usize {
        self.by_tag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_tag.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ceremony::{open_event, EventConfig};
    use crate::crypto::keygen_labeled;

    fn sheet(kiosk: &mut Kiosk, ticket: &str, key: &TallyKey) -> PrintedSheet {
        kiosk.issue(ticket, key, 3, &[42; 32]).unwrap()
    }

    #[test]
    fn sheet_layout() {
        let key = TallyKey::derive("tally");
        let mut kiosk = Kiosk::new();
        let s = sheet(&mut kiosk, "t-1", &key);
        assert_eq!(s.len(), 4);
        assert!(s.tokens().iter().all(public_validate));
        assert_eq!(filter_real(s.tokens(), &key), vec![s.tokens()[0].clone()]);
        assert_eq!(
            s.real_keypair().public().as_bytes().as_slice(),
            s.tokens()[0].public.as_slice()
        );
    }

    #[test]
    fn ticket_is_single_use() {
        let key = TallyKey::derive("tally");
        let mut kiosk = Kiosk::new();
        sheet(&mut kiosk, "t-1", &key);
        assert!(matches!(
            kiosk.issue("t-1", &key, 3, &[1; 32]),
            Err(Error::TicketReused(_))
        ));
        assert!(matches!(
            kiosk.issue("t-2", &key, 0, &[1; 32]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn public_validate_rejects_malformed() {
        let key = TallyKey::derive("tally");
        let s = Kiosk::new().issue("t", &key, 1, &[0; 32]).unwrap();
        let mut t = s.tokens()[1].clone();
        t.auth.pop();
        assert!(!public_validate(&t));
        let mut t = s.tokens()[0].clone();
        t.public = vec![0xff; 32];
        assert!(!public_validate(&t));
    }

    #[test]
    fn wrong_key_keeps_nothing() {
        let key = TallyKey::derive("tally");
        let s = sheet(&mut Kiosk::new(), "t", &key);
        assert!(filter_real(s.tokens(), &TallyKey::derive("other")).is_empty());
    }

    #[test]
    fn public_json_has_no_marking() {
        let key = TallyKey::derive("tally");
        let s = sheet(&mut Kiosk::new(), "t", &key);
        let json = s.public_json().unwrap();
        assert!(!json.contains("real"));
        assert!(!json.contains("index"));
        let back: Vec<PrintedToken> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s.tokens());
    }

    fn roll_with(publics: &[GroupElement]) -> RollList {
        let mut st = open_event(EventConfig::new("ev", "s", 7, 5)).unwrap();
        for (i, _) in publics.iter().enumerate() {
            st.admit(&format!("p{i}"), 1).unwrap();
        }
        st.seal(5).unwrap();
        for (i, p) in publics.iter().enumerate() {
            st.scan_exit(&format!("p{i}"), *p).unwrap();
        }
        st.publish().unwrap()
    }

    #[test]
    fn delegation_flow() {
        let key = TallyKey::derive("tally");
        let s = sheet(&mut Kiosk::new(), "t", &key);
        let real = s.real_keypair();
        let others: Vec<_> = (0..4)
            .map(|i| *keygen_labeled("other", i).public())
            .collect();
        let mut publics = others.clone();
        publics.insert(2, *real.public());
        let roll = roll_with(&publics);

        let d1 = *keygen_labeled("delegate", 0).public();
        let d2 = *keygen_labeled("delegate", 1).public();
        let r1 = booth_delegate(&real, &roll, &d1).unwrap();
        assert!(verify_delegation(&r1, &roll));
        let r2 = booth_delegate(&real, &roll, &d2).unwrap();
        assert_eq!(r1.delegator_tag, r2.delegator_tag);

        let mut book = DelegationBook::default();
        assert!(book.record(&roll, r1.clone()).unwrap().is_none());
        assert_eq!(book.record(&roll, r2).unwrap(), Some(r1));
        assert_eq!(book.len(), 1);
        assert_eq!(book.delegate_of(&roll_tag(&real, &roll)), Some(&d2));

        let fake = s.keypair(1);
        assert!(matches!(
            booth_delegate(&fake, &roll, &d1),
            Err(Error::TokenNotInRoll)
        ));
    }

    fn roll_tag(kp: &PersonKeyPair, roll: &RollList) -> LinkageTag {
        crate::crypto::linkage_tag(kp.secret(), &delegation_scope(roll.cycle()))
    }

    #[test]
    fn tampered_delegation_rejected() {
        let real = keygen_labeled("r", 0);
        let roll = roll_with(&[*real.public(), *keygen_labeled("r", 1).public()]);
        let mut rec = booth_delegate(&real, &roll, keygen_labeled("d", 0).public()).unwrap();
        rec.delegate_public = *keygen_labeled("d", 1).public();
        assert!(!verify_delegation(&rec, &roll));
        assert!(matches!(
            DelegationBook::default().record(&roll, rec),
            Err(Error::InvalidSignature)
        ));
    }
}
