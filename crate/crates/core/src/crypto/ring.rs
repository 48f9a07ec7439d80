//! Linkable ring signatures (back-closing challenge chain) with a per-scope
//! linkage tag `tag = secret * H_G(scope)`.
//!
//! The tag depends only on the signer's secret and the scope, so two
//! signatures by the same member under one scope carry equal tags while tags
//! under different scopes are unrelated group elements. Nonces are derived
//! deterministically from the secret and the signed transcript.

use std::collections::HashSet;
use std::fmt;

use curve25519_dalek::ristretto::RistrettoPoint;
use curve25519_dalek::scalar::Scalar;
use curve25519_dalek::traits::VartimeMultiscalarMul;
use serde::{Deserialize, Serialize};

use super::group::{
    hash_parts, hash_to_group, hash_to_scalar, scalar_hex, scalar_vec_hex, Digest32, GroupElement,
};
use crate::error::{Error, Result};

/// Context identifier for linkage tags: `len(label) ‖ label ‖ len(context) ‖ context`
/// with 4-byte big-endian lengths.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Scope(Vec<u8>);

impl Scope {
    pub fn new(label: &str, context: &[u8]) -> Self {
        let mut out = Vec::with_capacity(8 + label.len() + context.len());
        out.extend_from_slice(&(label.len() as u32).to_be_bytes());
        out.extend_from_slice(label.as_bytes());
        out.extend_from_slice(&(context.len() as u32).to_be_bytes());
        out.extend_from_slice(context);
        Scope(out)
    }

    /// Scope whose context is several length-prefixed fields.
    pub fn with_fields(label: &str, fields: &[&[u8]]) -> Self {
        let mut ctx = Vec::new();
        for f in fields {
            ctx.extend_from_slice(&(f.len() as u32).to_be_bytes());
            ctx.extend_from_slice(f);
        }
        Self::new(label, &ctx)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    fn base(&self) -> GroupElement {
        hash_to_group("popkit/lrs-base", &[&self.0])
    }
}

impl fmt::Debug for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scope({})", hex::encode(&self.0))
    }
}

impl Serialize for Scope {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(&self.0))
    }
}

impl<'de> Deserialize<'de> for Scope {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        hex::decode(s).map(Scope).map_err(serde::de::Error::custom)
    }
}

/// Deterministic per-(secret, scope) tag.
pub type LinkageTag = GroupElement;

pub fn linkage_tag(secret: &Scalar, scope: &Scope) -> LinkageTag {
    GroupElement::from_point(scope.base().point() * secret)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkableSignature {
    pub scope: Scope,
    pub tag: LinkageTag,
    pub ring: Vec<GroupElement>,
    /// Chain challenge at ring slot 0.
    #[serde(with = "scalar_hex")]
    pub challenge: Scalar,
    #[serde(with = "scalar_vec_hex")]
    pub responses: Vec<Scalar>,
    pub message_digest: Digest32,
}

fn ring_digest(ring: &[GroupElement]) -> [u8; 32] {
    let parts: Vec<&[u8]> = ring.iter().map(|p| p.as_bytes().as_slice()).collect();
    hash_parts("popkit/lrs-ring", &parts)
}

pub fn message_digest(message: &[u8]) -> Digest32 {
    Digest32(hash_parts("popkit/lrs-message", &[message]))
}

fn check_ring(ring: &[GroupElement]) -> Result<()> {
    if ring.is_empty() {
        return Err(Error::EmptyRing);
    }
    let mut seen = HashSet::with_capacity(ring.len());
    if !ring.iter().all(|p| seen.insert(p)) {
        return Err(Error::DuplicateRingMember);
    }
    Ok(())
}

struct Transcript<'a> {
    ring_digest: [u8; 32],
    scope: &'a Scope,
    tag: &'a GroupElement,
    msg: &'a Digest32,
}

impl Transcript<'_> {
    fn challenge(&self, l: &RistrettoPoint, r: &RistrettoPoint) -> Scalar {
        hash_to_scalar(
            "popkit/lrs-challenge",
            &[
                &self.ring_digest,
                self.scope.as_bytes(),
                self.tag.as_bytes(),
                self.msg.as_bytes(),
                l.compress().as_bytes(),
                r.compress().as_bytes(),
            ],
        )
    }
}

pub fn lrs_sign(
    secret: &Scalar,
    ring: &[GroupElement],
    scope: &Scope,
    message: &[u8],
) -> Result<LinkableSignature> {
    check_ring(ring)?;
    let public = GroupElement::generator_mul(secret);
    let signer = ring
        .iter()
        .position(|p| *p == public)
        .ok_or(Error::SignerNotInRing)?;
    let n = ring.len();

    let base = scope.base();
    let tag = GroupElement::from_point(base.point() * secret);
    let msg = message_digest(message);
    let transcript = Transcript {
        ring_digest: ring_digest(ring),
        scope,
        tag: &tag,
        msg: &msg,
    };
    let nonce = |slot: usize| {
        hash_to_scalar(
            "popkit/lrs-nonce",
            &[
                secret.as_bytes(),
                &transcript.ring_digest,
                scope.as_bytes(),
                msg.as_bytes(),
                &(slot as u64).to_be_bytes(),
            ],
        )
    };

    let alpha = nonce(n);
    let mut challenges = vec![Scalar::ZERO; n];
    let mut responses = vec![Scalar::ZERO; n];
    challenges[(signer + 1) % n] =
        transcript.challenge(&RistrettoPoint::mul_base(&alpha), &(base.point() * alpha));

    for offset in 1..n {
        let i = (signer + offset) % n;
        responses[i] = nonce(i);
        let (l, r) = chain_points(&responses[i], &challenges[i], &ring[i], &base, &tag);
        challenges[(i + 1) % n] = transcript.challenge(&l, &r);
    }
    responses[signer] = alpha - challenges[signer] * secret;

    Ok(LinkableSignature {
        scope: scope.clone(),
        tag,
        ring: ring.to_vec(),
        challenge: challenges[0],
        responses,
        message_digest: msg,
    })
}

fn chain_points(
    response: &Scalar,
    challenge: &Scalar,
    member: &GroupElement,
    base: &GroupElement,
    tag: &GroupElement,
) -> (RistrettoPoint, RistrettoPoint) {
    let l =
        RistrettoPoint::vartime_double_scalar_mul_basepoint(challenge, member.point(), response);
    let r =
        RistrettoPoint::vartime_multiscalar_mul([response, challenge], [base.point(), tag.point()]);
    (l, r)
}

/// Accepts iff `sig` was produced by a ring member for exactly this ring,
/// scope and message. Every slot is processed identically.
pub fn lrs_verify(
    ring: &[GroupElement],
    scope: &Scope,
    message: &[u8],
    sig: &LinkableSignature,
) -> bool {
    if check_ring(ring).is_err()
        || sig.ring.as_slice() != ring
        || &sig.scope != scope
        || sig.responses.len() != ring.len()
        || sig.message_digest != message_digest(message)
    {
        return false;
    }
    let base = scope.base();
    let transcript = Transcript {
        ring_digest: ring_digest(ring),
        scope,
        tag: &sig.tag,
        msg: &sig.message_digest,
    };
    let mut c = sig.challenge;
    for (member, response) in ring.iter().zip(&sig.responses) {
        let (l, r) = chain_points(response, &c, member, &base, &sig.tag);
        c = transcript.challenge(&l, &r);
    }
    c == sig.challenge
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::keys::keygen_labeled;

    fn ring_of(n: u64) -> (Vec<Scalar>, Vec<GroupElement>) {
        let kps: Vec<_> = (0..n).map(|i| keygen_labeled("ring-test", i)).collect();
        (
            kps.iter().map(|k| *k.secret()).collect(),
            kps.iter().map(|k| *k.public()).collect(),
        )
    }

    #[test]
    fn sign_verify_roundtrip_every_slot() {
        let (secrets, ring) = ring_of(5);
        let scope = Scope::new("test", b"ctx");
        for s in &secrets {
            let sig = lrs_sign(s, &ring, &scope, b"hello").unwrap();
            assert!(lrs_verify(&ring, &scope, b"hello", &sig));
            assert_eq!(sig.tag, linkage_tag(s, &scope));
        }
    }

    #[test]
    fn singleton_ring() {
        let (secrets, ring) = ring_of(1);
        let scope = Scope::new("test", b"");
        let sig = lrs_sign(&secrets[0], &ring, &scope, b"m").unwrap();
        assert!(lrs_verify(&ring, &scope, b"m", &sig));
    }

    #[test]
    fn tag_depends_only_on_secret_and_scope() {
        let (secrets, ring) = ring_of(4);
        let scope = Scope::new("svc", b"signup");
        let a = lrs_sign(&secrets[2], &ring, &scope, b"one").unwrap();
        let b = lrs_sign(&secrets[2], &ring[..3], &scope, b"two").unwrap();
        assert_eq!(a.tag, b.tag);
        let other = lrs_sign(&secrets[2], &ring, &Scope::new("svc", b"post"), b"one").unwrap();
        assert_ne!(a.tag, other.tag);
    }

    #[test]
    fn signer_not_in_ring() {
        let (_, ring) = ring_of(3);
        let outsider = keygen_labeled("outsider", 0);
        let err = lrs_sign(outsider.secret(), &ring, &Scope::new("t", b""), b"m").unwrap_err();
        assert!(matches!(err, Error::SignerNotInRing));
    }

    #[test]
    fn malformed_rings_rejected() {
        let (secrets, ring) = ring_of(2);
        let scope = Scope::new("t", b"");
        assert!(matches!(
            lrs_sign(&secrets[0], &[], &scope, b"m"),
            Err(Error::EmptyRing)
        ));
        let dup = vec![ring[0], ring[0], ring[1]];
        assert!(matches!(
            lrs_sign(&secrets[0], &dup, &scope, b"m"),
            Err(Error::DuplicateRingMember)
        ));
    }

    #[test]
    fn binding_to_message_scope_and_ring_order() {
        let (secrets, ring) = ring_of(4);
        let scope = Scope::new("t", b"x");
        let sig = lrs_sign(&secrets[1], &ring, &scope, b"message").unwrap();
        assert!(!lrs_verify(&ring, &scope, b"messagf", &sig));
        assert!(!lrs_verify(&ring, &Scope::new("t", b"y"), b"message", &sig));

        let mut rotated = ring.clone();
        rotated.rotate_left(1);
        let mut moved = sig.clone();
        moved.ring = rotated.clone();
        assert!(!lrs_verify(&rotated, &scope, b"message", &moved));
        let resigned = lrs_sign(&secrets[1], &rotated, &scope, b"message").unwrap();
        assert!(lrs_verify(&rotated, &scope, b"message", &resigned));
        assert_eq!(resigned.tag, sig.tag);
    }

    #[test]
    fn tampered_responses_fail() {
        let (secrets, ring) = ring_of(3);
        let scope = Scope::new("t", b"");
        let mut sig = lrs_sign(&secrets[0], &ring, &scope, b"m").unwrap();
        sig.responses[2] += Scalar::ONE;
        assert!(!lrs_verify(&ring, &scope, b"m", &sig));
    }

    #[test]
    fn forged_tag_fails() {
        let (secrets, ring) = ring_of(3);
        let scope = Scope::new("t", b"");
        let mut sig = lrs_sign(&secrets[0], &ring, &scope, b"m").unwrap();
        sig.tag = linkage_tag(&secrets[1], &scope);
        assert!(!lrs_verify(&ring, &scope, b"m", &sig));
    }

    #[test]
    fn scope_layout_is_length_prefixed() {
        assert_ne!(Scope::new("ab", b"c"), Scope::new("a", b"bc"));
        assert_ne!(
            Scope::with_fields("s", &[b"ab", b"c"]),
            Scope::with_fields("s", &[b"a", b"bc"])
        );
    }

    #[test]
    fn json_roundtrip_preserves_validity() {
        let (secrets, ring) = ring_of(3);
        let scope = Scope::new("t", b"q");
        let sig = lrs_sign(&secrets[2], &ring, &scope, b"m").unwrap();
        let back: LinkableSignature =
            serde_json::from_str(&serde_json::to_string(&sig).unwrap()).unwrap();
        assert_eq!(back, sig);
        assert!(lrs_verify(&ring, &scope, b"m", &back));
    }
}
