//! Group-based primitives: keys, hash-to-group, keyed PRF, commitments,
//! linkable ring signatures and witness cosignatures.
//!
//! All operations are pure functions of their inputs.

mod commitment;
mod cosign;
mod group;
mod keys;
mod prf;
mod ring;

pub use commitment::{commit, open_verify, Commitment};
pub use cosign::{cosign, cosign_verify, Cosignature};
pub use group::{
    bytes_hex, hash_parts, hash_to_group, hash_to_scalar, scalar_from_bytes, scalar_hex, Digest32,
    GroupElement, ENCODED_LEN,
};
pub use keys::{keygen, keygen_labeled, PersonKeyPair};
pub use prf::prf;
pub use ring::{
    linkage_tag, lrs_sign, lrs_verify, message_digest, LinkableSignature, LinkageTag, Scope,
};

pub use curve25519_dalek::scalar::Scalar;
