use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::CircuitShape;
use crate::commitments::{Commitment, OpeningProof, COMMITMENT_BYTES, OPENING_BYTES};
use crate::rsp::AssociatedInfo;

const PROOF_MAGIC: &[u8; 8] = b"PSEIPRF1";

/// The eight-element claim proof. Each opening carries its value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClaimProof {
    pub shape: CircuitShape,
    pub commit_r_local: Commitment,
    pub commit_t: Commitment,
    pub r_local_z: OpeningProof,
    pub r_local_zy: OpeningProof,
    pub commit_r_raw: Commitment,
    pub r_raw_z: OpeningProof,
    pub r_raw_zy: OpeningProof,
    pub t_z: OpeningProof,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProofDecodeError {
    #[error("malformed proof: {0}")]
    Malformed(String),
    /// An opening carries an invalid scalar or group element.
    #[error("malformed opening {index}: {message}")]
    BadOpening { index: usize, message: String },
}

/// Provider metadata shipped alongside the proof: `I_aso` and the signature
/// over `H(commit_r_raw ‖ H(I_aso))`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceMeta {
    pub i_aso: AssociatedInfo,
    pub signature: String,
    pub key_id: String,
}

impl ClaimProof {
    /// Position of each element in the serialized form.
    pub const ELEMENT_NAMES: [&'static str; 8] =
        ["commit_r_local", "commit_t", "r_local_z", "r_local_zy", "commit_r_raw", "r_raw_z", "r_raw_zy", "t_z"];

    /// Magic, header `(N, T, M, L)` as u32 big-endian, then the eight
    /// elements in order, each prefixed by its u32 big-endian length.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 16 + 8 * 4 + 3 * COMMITMENT_BYTES + 5 * OPENING_BYTES);
        out.extend_from_slice(PROOF_MAGIC);
        let s = &self.shape;
        for v in [s.n_pixels, s.n_samples, s.m_bits, s.witness_len()] {
            out.extend_from_slice(&(v as u32).to_be_bytes());
        }
        let elements: [Vec<u8>; 8] = [
            self.commit_r_local.to_bytes().to_vec(),
            self.commit_t.to_bytes().to_vec(),
            self.r_local_z.to_bytes().to_vec(),
            self.r_local_zy.to_bytes().to_vec(),
            self.commit_r_raw.to_bytes().to_vec(),
            self.r_raw_z.to_bytes().to_vec(),
            self.r_raw_zy.to_bytes().to_vec(),
            self.t_z.to_bytes().to_vec(),
        ];
        for e in elements {
            out.extend_from_slice(&(e.len() as u32).to_be_bytes());
            out.extend_from_slice(&e);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ProofDecodeError> {
        let malformed = |m: &str| ProofDecodeError::Malformed(m.to_string());
        let mut rest = bytes.strip_prefix(PROOF_MAGIC.as_slice()).ok_or_else(|| malformed("bad magic"))?;
        let mut take = |n: usize| -> Result<&[u8], ProofDecodeError> {
            if rest.len() < n {
                return Err(malformed("truncated"));
            }
            let (head, tail) = rest.split_at(n);
            rest = tail;
            Ok(head)
        };
        let mut header = [0usize; 4];
        for h in header.iter_mut() {
            *h = u32::from_be_bytes(take(4)?.try_into().unwrap()) as usize;
        }
        let shape = CircuitShape::new(header[0], header[1], header[2]);
        if shape.validate().is_err() || shape.witness_len() != header[3] {
            return Err(malformed("inconsistent header"));
        }
        let mut elements = Vec::with_capacity(8);
        for _ in 0..8 {
            let len = u32::from_be_bytes(take(4)?.try_into().unwrap()) as usize;
            elements.push(take(len)?.to_vec());
        }
        if !rest_is_empty(bytes, &elements) {
            return Err(malformed("trailing bytes"));
        }
        let commitment = |i: usize| {
            Commitment::from_bytes(&elements[i])
                .map_err(|e| ProofDecodeError::Malformed(format!("{}: {e}", Self::ELEMENT_NAMES[i])))
        };
        let opening = |i: usize| {
            OpeningProof::from_bytes(&elements[i])
                .map_err(|e| ProofDecodeError::BadOpening { index: i, message: e.to_string() })
        };
        Ok(Self {
            shape,
            commit_r_local: commitment(0)?,
            commit_t: commitment(1)?,
            r_local_z: opening(2)?,
            r_local_zy: opening(3)?,
            commit_r_raw: commitment(4)?,
            r_raw_z: opening(5)?,
            r_raw_zy: opening(6)?,
            t_z: opening(7)?,
        })
    }
}

fn rest_is_empty(bytes: &[u8], elements: &[Vec<u8>]) -> bool {
    let used = 8 + 16 + elements.iter().map(|e| 4 + e.len()).sum::<usize>();
    used == bytes.len()
}
