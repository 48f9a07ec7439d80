use hmac::{Hmac, Mac};
use sha2::Sha256;

/// Keyed PRF: HMAC-SHA-256.
pub fn prf(key: &[u8; 32], input: &[u8]) -> [u8; 32] {
    let mut mac = Hmac::<Sha256>::new_from_slice(key).expect("HMAC accepts any key length");
    mac.update(input);
    mac.finalize().into_bytes().into()
}
