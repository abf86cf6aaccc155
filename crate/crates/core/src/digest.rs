//! FNV-1a content digests for genotypes, configs, and audit records.

use alloc::format;
use alloc::string::String;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x100_0000_01b3;

/// 64-bit FNV-1a over a byte slice.
pub fn fnv64(bytes: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Digest rendered as fixed-width hex, the form stored in logs and checkpoints.
pub fn hex_digest(bytes: &[u8]) -> String {
    format!("{:016x}", fnv64(bytes))
}
