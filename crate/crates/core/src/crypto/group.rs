//! Prime-order group (ristretto255) and the single SHA-256 based hash from
//! which digests, challenges, hash-to-group and hash-to-scalar are derived.
//!
//! Every hash input is domain separated: `label` first, then each part with an
//! 8-byte big-endian length prefix, so distinct part lists never collide.

use std::fmt;
use std::hash::{Hash, Hasher};

use curve25519_dalek::ristretto::{CompressedRistretto, RistrettoPoint};
use curve25519_dalek::scalar::Scalar;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Length of every canonical encoding (group elements, scalars, digests).
pub const ENCODED_LEN: usize = 32;

pub fn hash_parts(label: &str, parts: &[&[u8]]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update((label.len() as u64).to_be_bytes());
    h.update(label.as_bytes());
    for part in parts {
        h.update((part.len() as u64).to_be_bytes());
        h.update(part);
    }
    h.finalize().into()
}

/// 64 bytes of hash output, two counter-mode SHA-256 blocks over the
/// domain-separated input digest.
fn hash_wide(label: &str, parts: &[&[u8]]) -> [u8; 64] {
    let seed = hash_parts(label, parts);
    let mut out = [0u8; 64];
    out[..32].copy_from_slice(&hash_parts("popkit/wide", &[&seed, &[0]]));
    out[32..].copy_from_slice(&hash_parts("popkit/wide", &[&seed, &[1]]));
    out
}

pub fn hash_to_scalar(label: &str, parts: &[&[u8]]) -> Scalar {
    Scalar::from_bytes_mod_order_wide(&hash_wide(label, parts))
}

/// Hash-to-group: the ristretto255 one-way map applied to 64 uniform bytes.
pub fn hash_to_group(label: &str, parts: &[&[u8]]) -> GroupElement {
    GroupElement::from_point(RistrettoPoint::from_uniform_bytes(&hash_wide(label, parts)))
}

/// A canonically encoded group element.
#[derive(Clone, Copy)]
pub struct GroupElement {
    point: RistrettoPoint,
    bytes: [u8; 32],
}

impl GroupElement {
    pub fn from_point(point: RistrettoPoint) -> Self {
        Self {
            point,
            bytes: point.compress().to_bytes(),
        }
    }

    pub fn generator_mul(scalar: &Scalar) -> Self {
        Self::from_point(RistrettoPoint::mul_base(scalar))
    }

    /// Decodes a 32-byte encoding, rejecting anything that is not the
    /// canonical encoding of a group element.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let arr: [u8; 32] = bytes.try_into().map_err(|_| {
            Error::InvalidEncoding(format!(
                "group element must be 32 bytes, got {}",
                bytes.len()
            ))
        })?;
        let point = CompressedRistretto(arr)
            .decompress()
            .ok_or_else(|| Error::InvalidEncoding("not a canonical group element".into()))?;
        Ok(Self { point, bytes: arr })
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let raw = hex::decode(s).map_err(|e| Error::InvalidEncoding(e.to_string()))?;
        Self::from_bytes(&raw)
    }

    pub fn point(&self) -> &RistrettoPoint {
        &self.point
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.bytes
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.bytes)
    }
}

impl PartialEq for GroupElement {
    fn eq(&self, other: &Self) -> bool {
        self.bytes == other.bytes
    }
}

impl Eq for GroupElement {}

impl Hash for GroupElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.bytes.hash(state);
    }
}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GroupElement {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.bytes.cmp(&other.bytes)
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupElement({})", self.to_hex())
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for GroupElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for GroupElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        GroupElement::from_hex(&s).map_err(de::Error::custom)
    }
}

/// A 32-byte digest, hex encoded in JSON.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digest32(pub [u8; 32]);

impl Digest32 {
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }
}

impl fmt::Debug for Digest32 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest32({})", self.to_hex())
    }
}

impl fmt::Display for Digest32 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for Digest32 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Digest32 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let raw = hex::decode(&s).map_err(de::Error::custom)?;
        let arr: [u8; 32] = raw
            .try_into()
            .map_err(|_| de::Error::custom("digest must be 32 bytes"))?;
        Ok(Digest32(arr))
    }
}

/// Canonical scalar decoding (the encoding must be reduced mod the group order).
pub fn scalar_from_bytes(bytes: &[u8]) -> Result<Scalar> {
    let arr: [u8; 32] = bytes
        .try_into()
        .map_err(|_| Error::InvalidEncoding("scalar must be 32 bytes".into()))?;
    Option::from(Scalar::from_canonical_bytes(arr))
        .ok_or_else(|| Error::InvalidEncoding("non-canonical scalar".into()))
}

/// Serde adapters for hex-encoded scalars.
pub mod scalar_hex {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Scalar, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(v.as_bytes()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Scalar, D::Error> {
        let s = String::deserialize(d)?;
        let raw = hex::decode(&s).map_err(de::Error::custom)?;
        scalar_from_bytes(&raw).map_err(de::Error::custom)
    }
}

pub mod scalar_vec_hex {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[Scalar], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&hex::encode(x.as_bytes()))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Scalar>, D::Error> {
        let raw: Vec<String> = Vec::deserialize(d)?;
        raw.iter()
            .map(|s| {
                let b = hex::decode(s).map_err(de::Error::custom)?;
                scalar_from_bytes(&b).map_err(de::Error::custom)
            })
            .collect()
    }
}

/// Serde adapter for arbitrary hex-encoded byte strings.
pub mod bytes_hex {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[u8], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        hex::decode(&s).map_err(de::Error::custom)
    }
}
