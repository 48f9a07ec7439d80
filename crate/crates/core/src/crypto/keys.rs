use std::fmt;

use curve25519_dalek::scalar::Scalar;

use super::group::{hash_to_scalar, GroupElement};

/// A person's token key pair. Only the public half ever leaves the holder.
#[derive(Clone)]
pub struct PersonKeyPair {
    secret: Scalar,
    public: GroupElement,
}

impl PersonKeyPair {
    pub fn from_secret(secret: Scalar) -> Self {
        Self {
            public: GroupElement::generator_mul(&secret),
            secret,
        }
    }

    pub fn secret(&self) -> &Scalar {
        &self.secret
    }

    pub fn public(&self) -> &GroupElement {
        &self.public
    }
}

impl fmt::Debug for PersonKeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PersonKeyPair")
            .field("public", &self.public)
            .finish_non_exhaustive()
    }
}

/// Deterministic key generation: equal seeds give equal key pairs.
pub fn keygen(seed: &[u8; 32]) -> PersonKeyPair {
    let mut secret = hash_to_scalar("popkit/keygen", &[seed]);
    if secret == Scalar::ZERO {
        // probability 2^-252; keep the public element off the identity anyway
        secret = Scalar::ONE;
    }
    PersonKeyPair::from_secret(secret)
}

/// Key pair from a textual label, used for fixtures and simulations.
pub fn keygen_labeled(label: &str, index: u64) -> PersonKeyPair {
    let seed = super::group::hash_parts(
        "popkit/keygen-label",
        &[label.as_bytes(), &index.to_be_bytes()],
    );
    keygen(&seed)
}
