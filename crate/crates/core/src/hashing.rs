use serde::Serialize;
use sha2::{Digest, Sha256};

/// First 16 hex digits of the SHA-256 of the value's JSON encoding.
///
/// Struct fields serialize in declaration order, so equal values hash equally.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("config values serialize to JSON");
    let digest = Sha256::digest(&bytes);
    hex::encode(&digest[..8])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_and_sensitive() {
        let a = config_hash(&("ex1", 1.0, [2, 3]));
        assert_eq!(a, config_hash(&("ex1", 1.0, [2, 3])));
        assert_ne!(a, config_hash(&("ex1", 1.0000001, [2, 3])));
        assert_eq!(a.len(), 16);
    }
}
