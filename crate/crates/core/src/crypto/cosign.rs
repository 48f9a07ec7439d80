//! Witness cosignatures: Schnorr signatures of knowledge of the witness
//! secret, bound to one roll-list digest.

use curve25519_dalek::ristretto::RistrettoPoint;
use curve25519_dalek::scalar::Scalar;
use serde::{Deserialize, Serialize};

use super::group::{hash_to_scalar, scalar_hex, Digest32, GroupElement};
use super::keys::PersonKeyPair;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cosignature {
    pub witness_public: GroupElement,
    pub list_digest: Digest32,
    #[serde(with = "scalar_hex")]
    pub challenge: Scalar,
    #[serde(with = "scalar_hex")]
    pub response: Scalar,
}

fn challenge(witness: &GroupElement, commitment: &RistrettoPoint, digest: &Digest32) -> Scalar {
    hash_to_scalar(
        "popkit/cosign-challenge",
        &[
            witness.as_bytes(),
            commitment.compress().as_bytes(),
            digest.as_bytes(),
        ],
    )
}

pub fn cosign(witness: &PersonKeyPair, list_digest: &Digest32) -> Cosignature {
    let k = hash_to_scalar(
        "popkit/cosign-nonce",
        &[witness.secret().as_bytes(), list_digest.as_bytes()],
    );
    let c = challenge(witness.public(), &RistrettoPoint::mul_base(&k), list_digest);
    Cosignature {
        witness_public: *witness.public(),
        list_digest: *list_digest,
        challenge: c,
        response: k + c * witness.secret(),
    }
}

/// True iff `cosig` is a valid signature over exactly `list_digest`.
pub fn cosign_verify(cosig: &Cosignature, list_digest: &Digest32) -> bool {
    if cosig.list_digest != *list_digest {
        return false;
    }
    let commitment = RistrettoPoint::vartime_double_scalar_mul_basepoint(
        &-cosig.challenge,
        cosig.witness_public.point(),
        &cosig.response,
    );
    challenge(&cosig.witness_public, &commitment, list_digest) == cosig.challenge
}
