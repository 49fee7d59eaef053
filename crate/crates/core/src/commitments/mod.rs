//! Degree-bounded commitments to Laurent polynomials over BLS12-381.
//!
//! A polynomial `f` committed under bound `max` becomes
//! `F = g^{alpha x^{d-max} f(x)}`. Because the reference string has no
//! `g^{alpha x^0}`, `f` may not carry a coefficient at `X^{max-d}`; with
//! `max = d` this is exactly the exclusion of the constant term. Openings are
//! KZG-style quotient commitments, checked with one multi-pairing.

mod laurent;
mod srs;

use ark_bls12_381::{Bls12_381, G1Affine, G1Projective};
use ark_ec::pairing::Pairing;
use ark_ec::{AffineRepr, CurveGroup, VariableBaseMSM};
use ark_ff::Zero;
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};
use thiserror::Error;

use crate::field::{fr_from_bytes, fr_to_bytes, Fr, FR_BYTES};

pub use laurent::LaurentPolynomial;
pub use srs::{setup, setup_with_rng, GroupContext, Srs, CURVE_ID};

/// Compressed G1 width.
pub const COMMITMENT_BYTES: usize = 48;
/// Value plus witness.
pub const OPENING_BYTES: usize = FR_BYTES + COMMITMENT_BYTES;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CommitError {
    #[error("invalid srs parameters: {0}")]
    InvalidParameters(String),
    #[error("polynomial carries a coefficient at the excluded exponent {0}")]
    ConstantTerm(i64),
    #[error("exponent {exponent} outside the committable window [{lo}, {hi}]")]
    DegreeOutOfRange { exponent: i64, lo: i64, hi: i64 },
    #[error("cannot open at zero")]
    ZeroPoint,
    #[error("decode error: {0}")]
    Decode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Commitment(pub G1Affine);

impl Commitment {
    pub fn identity() -> Self {
        Self(G1Affine::zero())
    }

    pub fn to_bytes(&self) -> [u8; COMMITMENT_BYTES] {
        encode_g1(&self.0)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CommitError> {
        decode_g1(bytes).map(Self)
    }
}

impl std::ops::Add for Commitment {
    type Output = Commitment;

    fn add(self, rhs: Commitment) -> Commitment {
        Commitment((self.0 + rhs.0).into_affine())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OpeningProof {
    pub value: Fr,
    pub witness: G1Affine,
}

impl OpeningProof {
    pub fn to_bytes(&self) -> [u8; OPENING_BYTES] {
        let mut out = [0u8; OPENING_BYTES];
        out[..FR_BYTES].copy_from_slice(&fr_to_bytes(&self.value));
        out[FR_BYTES..].copy_from_slice(&encode_g1(&self.witness));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CommitError> {
        if bytes.len() != OPENING_BYTES {
            return Err(CommitError::Decode(format!("opening must be {OPENING_BYTES} bytes")));
        }
        let value =
            fr_from_bytes(&bytes[..FR_BYTES]).ok_or_else(|| CommitError::Decode("non-canonical scalar".into()))?;
        let witness = decode_g1(&bytes[FR_BYTES..])?;
        Ok(Self { value, witness })
    }
}

pub fn encode_g1(p: &G1Affine) -> [u8; COMMITMENT_BYTES] {
    let mut out = [0u8; COMMITMENT_BYTES];
    p.serialize_compressed(&mut out[..]).expect("fixed-width buffer");
    out
}

/// Rejects off-curve and out-of-subgroup encodings.
pub fn decode_g1(bytes: &[u8]) -> Result<G1Affine, CommitError> {
    if bytes.len() != COMMITMENT_BYTES {
        return Err(CommitError::Decode(format!("group element must be {COMMITMENT_BYTES} bytes")));
    }
    G1Affine::deserialize_compressed(bytes).map_err(|e| CommitError::Decode(e.to_string()))
}

fn check_window(srs: &Srs, f: &LaurentPolynomial, max: usize) -> Result<(), CommitError> {
    let d = srs.d() as i64;
    let hi = max as i64;
    if max == 0 || max > srs.d() {
        return Err(CommitError::InvalidParameters(format!("bound {max} outside 1..={d}")));
    }
    for (e, _) in f.terms() {
        if e < -d || e > hi {
            return Err(CommitError::DegreeOutOfRange { exponent: e, lo: -d, hi });
        }
        if e == hi - d {
            return Err(CommitError::ConstantTerm(e));
        }
    }
    Ok(())
}

fn msm<F>(f: &LaurentPolynomial, base: F) -> G1Affine
where
    F: Fn(i64) -> G1Affine,
{
    let (bases, scalars): (Vec<G1Affine>, Vec<Fr>) = f.terms().map(|(e, c)| (base(e), c)).unzip();
    if bases.is_empty() {
        return G1Affine::zero();
    }
    G1Projective::msm(&bases, &scalars).expect("equal lengths").into_affine()
}

/// Commits under bound `max`: `f` must live in `[-d, max]` and have no
/// coefficient at `X^{max-d}`.
pub fn commit_bounded(srs: &Srs, f: &LaurentPolynomial, max: usize) -> Result<Commitment, CommitError> {
    check_window(srs, f, max)?;
    let shift = srs.d() as i64 - max as i64;
    Ok(Commitment(msm(f, |e| srs.g_alpha_power(e + shift).expect("window checked"))))
}

/// Commits with the full window `[-d, srs.max]`, constant term excluded.
pub fn commit(srs: &Srs, f: &LaurentPolynomial) -> Result<Commitment, CommitError> {
    if let Some(hi) = f.max_degree().filter(|h| *h > srs.max() as i64) {
        return Err(CommitError::DegreeOutOfRange { exponent: hi, lo: -(srs.d() as i64), hi: srs.max() as i64 });
    }
    commit_bounded(srs, f, srs.d())
}

/// Opening of a polynomial committed under bound `max` at the non-zero point `z`.
pub fn open_bounded(srs: &Srs, f: &LaurentPolynomial, z: Fr, max: usize) -> Result<OpeningProof, CommitError> {
    if z.is_zero() {
        return Err(CommitError::ZeroPoint);
    }
    check_window(srs, f, max)?;
    let (quotient, value) = f.divide_by_linear(z).ok_or(CommitError::ZeroPoint)?;
    let witness = msm(&quotient, |e| srs.g_power(e).expect("quotient stays inside the window"));
    Ok(OpeningProof { value, witness })
}

pub fn open(srs: &Srs, f: &LaurentPolynomial, z: Fr) -> Result<OpeningProof, CommitError> {
    open_bounded(srs, f, z, srs.d())
}

/// Checks `e(W, h^{alpha x}) e(g^v W^{-z}, h^alpha) = e(F, h^{x^{max-d}})`.
pub fn verify_open_bounded(srs: &Srs, commitment: &Commitment, z: Fr, proof: &OpeningProof, max: usize) -> bool {
    if max == 0 || max > srs.d() || z.is_zero() {
        return false;
    }
    let (Some(h_ax), Some(h_a), Some(h_shift)) =
        (srs.h_alpha_power(1), srs.h_alpha_power(0), srs.h_power(max as i64 - srs.d() as i64))
    else {
        return false;
    };
    let g = srs.g_power(0).expect("generator present");
    let w = proof.witness.into_group();
    let middle = (g * proof.value - w * z).into_affine();
    let lhs = [proof.witness, middle, (-commitment.0.into_group()).into_affine()];
    Bls12_381::multi_pairing(lhs, [h_ax, h_a, h_shift]).is_zero()
}

pub fn verify_open(srs: &Srs, commitment: &Commitment, z: Fr, proof: &OpeningProof) -> bool {
    verify_open_bounded(srs, commitment, z, proof, srs.d())
}
