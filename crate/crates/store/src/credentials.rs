//! Salted, iterated SHA-256 credential hashes.
//!
//! Encoded as `sha256$<iterations>$<salt hex>$<digest hex>`.

use rand::RngCore;
use sha2::{Digest, Sha256};

const ITERATIONS: u32 = 10_000;
const SALT_LEN: usize = 16;

fn derive(salt: &[u8], secret: &str, iterations: u32) -> [u8; 32] {
    let mut digest: [u8; 32] = Sha256::new()
        .chain_update(salt)
        .chain_update(secret.as_bytes())
        .finalize()
        .into();
    for _ in 1..iterations {
        digest = Sha256::new()
            .chain_update(salt)
            .chain_update(digest)
            .finalize()
            .into();
    }
    digest
}

pub fn hash_secret(secret: &str) -> String {
    let mut salt = [0u8; SALT_LEN];
    rand::thread_rng().fill_bytes(&mut salt);
    let digest = derive(&salt, secret, ITERATIONS);
    format!("sha256${ITERATIONS}${}${}", hex::encode(salt), hex::encode(digest))
}

pub fn verify_secret(encoded: &str, secret: &str) -> bool {
    let mut parts = encoded.split('$');
    let (Some("sha256"), Some(iter), Some(salt), Some(expected), None) =
        (parts.next(), parts.next(), parts.next(), parts.next(), parts.next())
    else {
        return false;
    };
    let (Ok(iterations), Ok(salt), Ok(expected)) = (iter.parse::<u32>(), hex::decode(salt), hex::decode(expected)) else {
        return false;
    };
    let actual = derive(&salt, secret, iterations.max(1));
    // constant-time compare
    expected.len() == actual.len()
        && expected
            .iter()
            .zip(actual.iter())
            .fold(0u8, |acc, (a, b)| acc | (a ^ b))
            == 0
}

/// Random opaque session token.
pub fn new_token() -> String {
    let mut bytes = [0u8; 32];
    rand::thread_rng().fill_bytes(&mut bytes);
    hex::encode(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verifies_only_the_right_secret() {
        let h = hash_secret("s3cret");
        assert!(h.starts_with("sha256$10000$"));
        assert!(verify_secret(&h, "s3cret"));
        assert!(!verify_secret(&h, "s3cret "));
        assert!(!verify_secret("garbage", "s3cret"));
    }

    #[test]
    fn salts_differ() {
        assert_ne!(hash_secret("x"), hash_secret("x"));
        assert_ne!(new_token(), new_token());
    }
}
