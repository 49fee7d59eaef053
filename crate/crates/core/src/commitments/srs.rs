use std::io::{Read, Write};

use ark_bls12_381::{Bls12_381, G1Affine, G1Projective, G2Affine, G2Projective};
use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::scalar_mul::ScalarMul;
use ark_ec::PrimeGroup;
use ark_ff::{Field, PrimeField, UniformRand, Zero};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};
use rand::{CryptoRng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};
use zeroize::Zeroize;

use super::CommitError;
use crate::field::Fr;

pub const CURVE_ID: &str = "BLS12-381";
const SRS_MAGIC: &[u8; 8] = b"PSEISRS1";
const G1_BYTES: usize = 48;
const G2_BYTES: usize = 96;

/// The pairing setting `(p, G1, G2, GT, e, g, h)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupContext {
    pub curve: &'static str,
    pub g: G1Affine,
    pub h: G2Affine,
}

impl Default for GroupContext {
    fn default() -> Self {
        Self { curve: CURVE_ID, g: G1Projective::generator().into(), h: G2Projective::generator().into() }
    }
}

impl GroupContext {
    /// Scalar-field modulus in decimal.
    pub fn modulus(&self) -> String {
        Fr::MODULUS.to_string()
    }

    pub fn gt_generator(&self) -> PairingOutput<Bls12_381> {
        Bls12_381::pairing(self.g, self.h)
    }
}

/// Structured reference string over the exponent window `[-d, d]`.
///
/// `g^{alpha x^0}` is deliberately absent, so no commitment can carry a
/// coefficient in the slot it would multiply.
#[derive(Clone, PartialEq, Eq)]
pub struct Srs {
    d: usize,
    max: usize,
    g_powers: Vec<G1Affine>,
    /// `g^{alpha x^i}` for `i in [-d, d] \ {0}`, index order.
    g_alpha_powers: Vec<G1Affine>,
    h_powers: Vec<G2Affine>,
    h_alpha_powers: Vec<G2Affine>,
    e_g_h_alpha: PairingOutput<Bls12_381>,
}

impl std::fmt::Debug for Srs {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Srs").field("d", &self.d).field("max", &self.max).finish_non_exhaustive()
    }
}

fn check_params(d: usize, max: usize) -> Result<(), CommitError> {
    if d == 0 || max == 0 {
        return Err(CommitError::InvalidParameters(format!("d={d} and max={max} must be positive")));
    }
    if d < max {
        return Err(CommitError::InvalidParameters(format!("d={d} must be at least max={max}")));
    }
    if d > u32::MAX as usize / 4 {
        return Err(CommitError::InvalidParameters(format!("d={d} too large")));
    }
    Ok(())
}

/// Deterministic setup from a seed (test mode) or from OS randomness.
pub fn setup(d: usize, max: usize, seed: Option<&[u8]>) -> Result<(GroupContext, Srs), CommitError> {
    match seed {
        Some(seed) => {
            let mut rng = ChaCha20Rng::from_seed(Sha256::digest(seed).into());
            setup_with_rng(d, max, &mut rng)
        }
        None => setup_with_rng(d, max, &mut rand::rngs::OsRng),
    }
}

pub fn setup_with_rng<R: RngCore + CryptoRng>(
    d: usize,
    max: usize,
    rng: &mut R,
) -> Result<(GroupContext, Srs), CommitError> {
    check_params(d, max)?;
    let ctx = GroupContext::default();
    let mut x = nonzero_scalar(rng);
    let mut alpha = nonzero_scalar(rng);

    let mut powers = Vec::with_capacity(2 * d + 1);
    let mut cur = x.inverse().expect("non-zero").pow([d as u64]);
    for _ in 0..=2 * d {
        powers.push(cur);
        cur *= x;
    }
    let mut alpha_powers: Vec<Fr> = powers.iter().map(|p| *p * alpha).collect();

    let g = G1Projective::generator();
    let h = G2Projective::generator();
    let g_powers = g.batch_mul(&powers);
    let mut g_alpha_powers = g.batch_mul(&alpha_powers);
    let _alpha_constant: G1Affine = g_alpha_powers.remove(d);
    let h_powers = h.batch_mul(&powers);
    let h_alpha_powers = h.batch_mul(&alpha_powers);
    let e_g_h_alpha = Bls12_381::pairing(ctx.g, h_alpha_powers[d]);

    x.zeroize();
    alpha.zeroize();
    powers.zeroize();
    alpha_powers.zeroize();
    cur.zeroize();

    let srs = Srs { d, max, g_powers, g_alpha_powers, h_powers, h_alpha_powers, e_g_h_alpha };
    Ok((ctx, srs))
}

fn nonzero_scalar<R: RngCore + CryptoRng>(rng: &mut R) -> Fr {
    loop {
        let v = Fr::rand(rng);
        if !v.is_zero() {
            return v;
        }
    }
}

fn index(d: usize, i: i64) -> Option<usize> {
    let d = d as i64;
    (-d..=d).contains(&i).then(|| (i + d) as usize)
}

impl Srs {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn max(&self) -> usize {
        self.max
    }

    pub fn g_power(&self, i: i64) -> Option<G1Affine> {
        index(self.d, i).map(|k| self.g_powers[k])
    }

    /// `None` for `i = 0` and outside the window.
    pub fn g_alpha_power(&self, i: i64) -> Option<G1Affine> {
        let k = index(self.d, i)?;
        match i.cmp(&0) {
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Less => Some(self.g_alpha_powers[k]),
            std::cmp::Ordering::Greater => Some(self.g_alpha_powers[k - 1]),
        }
    }

    pub fn h_power(&self, i: i64) -> Option<G2Affine> {
        index(self.d, i).map(|k| self.h_powers[k])
    }

    pub fn h_alpha_power(&self, i: i64) -> Option<G2Affine> {
        index(self.d, i).map(|k| self.h_alpha_powers[k])
    }

    /// `e(g, h^alpha)`.
    pub fn e_g_h_alpha(&self) -> PairingOutput<Bls12_381> {
        self.e_g_h_alpha
    }

    /// Serializes in the length-prefixed section format:
    /// magic, then `u64` big-endian length + payload for the header
    /// (curve id, d, max), the `g`, `g^alpha`, `h`, `h^alpha` tables in
    /// ascending exponent order, and `e(g, h^alpha)`.
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(SRS_MAGIC)?;
        let mut header = Vec::new();
        header.extend_from_slice(&(CURVE_ID.len() as u32).to_be_bytes());
        header.extend_from_slice(CURVE_ID.as_bytes());
        header.extend_from_slice(&(self.d as u32).to_be_bytes());
        header.extend_from_slice(&(self.max as u32).to_be_bytes());
        write_section(&mut out, &header)?;
        write_section(&mut out, &encode_points(&self.g_powers))?;
        write_section(&mut out, &encode_points(&self.g_alpha_powers))?;
        write_section(&mut out, &encode_points(&self.h_powers))?;
        write_section(&mut out, &encode_points(&self.h_alpha_powers))?;
        let mut gt = Vec::new();
        self.e_g_h_alpha.serialize_compressed(&mut gt).map_err(|e| std::io::Error::other(e.to_string()))?;
        write_section(&mut out, &gt)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut v = Vec::new();
        self.write_to(&mut v).expect("writing to a Vec cannot fail");
        v
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Self, CommitError> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic).map_err(decode_err)?;
        if &magic != SRS_MAGIC {
            return Err(CommitError::Decode("bad srs magic".into()));
        }
        let header = read_section(&mut input)?;
        let (curve, rest) = split_prefixed(&header)?;
        if curve != CURVE_ID.as_bytes() {
            return Err(CommitError::Decode(format!("unsupported curve {}", String::from_utf8_lossy(curve))));
        }
        if rest.len() != 8 {
            return Err(CommitError::Decode("bad srs header".into()));
        }
        let d = u32::from_be_bytes(rest[..4].try_into().unwrap()) as usize;
        let max = u32::from_be_bytes(rest[4..].try_into().unwrap()) as usize;
        check_params(d, max)?;
        let g_powers = decode_points::<G1Affine>(&read_section(&mut input)?, G1_BYTES, 2 * d + 1)?;
        let g_alpha_powers = decode_points::<G1Affine>(&read_section(&mut input)?, G1_BYTES, 2 * d)?;
        let h_powers = decode_points::<G2Affine>(&read_section(&mut input)?, G2_BYTES, 2 * d + 1)?;
        let h_alpha_powers = decode_points::<G2Affine>(&read_section(&mut input)?, G2_BYTES, 2 * d + 1)?;
        let gt = read_section(&mut input)?;
        let e_g_h_alpha = PairingOutput::<Bls12_381>::deserialize_compressed(gt.as_slice())
            .map_err(|e| CommitError::Decode(format!("pairing value: {e}")))?;
        let srs = Srs { d, max, g_powers, g_alpha_powers, h_powers, h_alpha_powers, e_g_h_alpha };
        srs.check_consistency()?;
        Ok(srs)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CommitError> {
        Self::read_from(bytes)
    }

    /// SHA-256 of the serialized form.
    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(self.to_bytes()).into()
    }

    /// Pairing spot checks that the tables share one `x` and one `alpha`.
    fn check_consistency(&self) -> Result<(), CommitError> {
        let g = self.g_powers[self.d];
        let h = self.h_powers[self.d];
        let ok = g == G1Affine::from(G1Projective::generator())
            && h == G2Affine::from(G2Projective::generator())
            && Bls12_381::pairing(g, self.h_alpha_powers[self.d]) == self.e_g_h_alpha
            && Bls12_381::pairing(self.g_power(1).unwrap(), h) == Bls12_381::pairing(g, self.h_power(1).unwrap())
            && Bls12_381::pairing(self.g_alpha_power(1).unwrap(), h)
                == Bls12_381::pairing(g, self.h_alpha_power(1).unwrap())
            && Bls12_381::pairing(self.g_alpha_power(-1).unwrap(), h)
                == Bls12_381::pairing(g, self.h_alpha_power(-1).unwrap());
        if ok {
            Ok(())
        } else {
            Err(CommitError::Decode("srs tables are inconsistent".into()))
        }
    }
}

fn decode_err(e: std::io::Error) -> CommitError {
    CommitError::Decode(e.to_string())
}

fn write_section<W: Write>(out: &mut W, payload: &[u8]) -> std::io::Result<()> {
    out.write_all(&(payload.len() as u64).to_be_bytes())?;
    out.write_all(payload)
}

fn read_section<R: Read>(input: &mut R) -> Result<Vec<u8>, CommitError> {
    let mut len = [0u8; 8];
    input.read_exact(&mut len).map_err(decode_err)?;
    let len = u64::from_be_bytes(len);
    if len > (1 << 32) {
        return Err(CommitError::Decode("srs section too large".into()));
    }
    let mut buf = vec![0u8; len as usize];
    input.read_exact(&mut buf).map_err(decode_err)?;
    Ok(buf)
}

fn split_prefixed(buf: &[u8]) -> Result<(&[u8], &[u8]), CommitError> {
    if buf.len() < 4 {
        return Err(CommitError::Decode("truncated srs header".into()));
    }
    let n = u32::from_be_bytes(buf[..4].try_into().unwrap()) as usize;
    if buf.len() < 4 + n {
        return Err(CommitError::Decode("truncated srs header".into()));
    }
    Ok((&buf[4..4 + n], &buf[4 + n..]))
}

fn encode_points<P: CanonicalSerialize>(points: &[P]) -> Vec<u8> {
    let mut out = Vec::new();
    for p in points {
        p.serialize_compressed(&mut out).expect("writing to a Vec cannot fail");
    }
    out
}

fn decode_points<P: CanonicalDeserialize>(buf: &[u8], width: usize, count: usize) -> Result<Vec<P>, CommitError> {
    if buf.len() != width * count {
        return Err(CommitError::Decode(format!("expected {count} points, got {} bytes", buf.len())));
    }
    buf.chunks(width).map(|c| P::deserialize_compressed(c).map_err(|e| CommitError::Decode(e.to_string()))).collect()
}
