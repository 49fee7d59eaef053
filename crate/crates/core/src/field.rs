//! Scalar-field helpers shared by the circuit, the commitment layer and the
//! transcript.

use ark_ff::{BigInteger, Field, PrimeField, Zero};
use ark_serialize::CanonicalDeserialize;

pub use ark_bls12_381::Fr;

/// Byte width of a serialized scalar.
pub const FR_BYTES: usize = 32;

/// Embeds a signed integer into the scalar field (negatives map to `p - |v|`).
pub fn fr_from_i128(v: i128) -> Fr {
    let mag = Fr::from(v.unsigned_abs());
    if v < 0 {
        -mag
    } else {
        mag
    }
}

/// 32-byte little-endian canonical encoding.
pub fn fr_to_bytes(v: &Fr) -> [u8; FR_BYTES] {
    let mut out = [0u8; FR_BYTES];
    let le = v.into_bigint().to_bytes_le();
    out.copy_from_slice(&le[..FR_BYTES]);
    out
}

/// Decodes a canonical 32-byte little-endian scalar; values `>= p` are rejected.
pub fn fr_from_bytes(bytes: &[u8]) -> Option<Fr> {
    if bytes.len() != FR_BYTES {
        return None;
    }
    Fr::deserialize_compressed(bytes).ok()
}

/// Reduces 32 bytes, read little-endian, modulo `p`.
pub fn fr_from_le_bytes_mod_order(bytes: &[u8; 32]) -> Fr {
    Fr::from_le_bytes_mod_order(bytes)
}

/// `v^e` for a signed exponent. Panics on `v = 0` with a negative exponent.
pub fn fr_pow_signed(v: Fr, e: i64) -> Fr {
    let p = v.pow([e.unsigned_abs()]);
    if e < 0 {
        p.inverse().expect("negative power of zero")
    } else {
        p
    }
}

/// Inner product of two equal-length slices.
pub fn dot(a: &[Fr], b: &[Fr]) -> Fr {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(Fr::zero(), |acc, (x, y)| acc + *x * y)
}

/// Hex form of the canonical encoding, used in JSON documents.
pub fn fr_to_hex(v: &Fr) -> String {
    hex::encode(fr_to_bytes(v))
}
