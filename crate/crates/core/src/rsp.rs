//! Simulated remote-sensing provider (RSP).
//!
//! The provider serves pixel data for a rectangle of its grid at requested
//! instants, commits to the `r_raw` polynomial built from that data and signs
//! `H(commit_r_raw ‖ H(I_aso))` with deterministic ECDSA over P-256.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::path::Path;

use p256::ecdsa::signature::{Signer, Verifier};
use p256::ecdsa::{Signature, SigningKey, VerifyingKey};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::commitments::{commit_bounded, CommitError, Commitment, LaurentPolynomial, Srs};
use crate::field::Fr;
use crate::policy::Area;
use crate::ssi_model::{RemoteSensingSample, Timestamp};

#[derive(Debug, Error)]
pub enum RspError {
    #[error("dataset parse error at {context}: {message}")]
    Parse { context: String, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("request error: {0}")]
    Request(String),
    #[error("key error: {0}")]
    Key(String),
    #[error(transparent)]
    Commit(#[from] CommitError),
}

fn parse_err(context: impl Into<String>, message: impl Into<String>) -> RspError {
    RspError::Parse { context: context.into(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub rows: u32,
    pub cols: u32,
}

/// One acquisition of the whole grid, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSample {
    pub timestamp: Timestamp,
    pub radiance: Vec<u64>,
    pub calibration: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub dataset_id: String,
    pub grid: Grid,
    pub samples: Vec<GridSample>,
}

impl Dataset {
    pub fn parse(text: &str) -> Result<Self, RspError> {
        if text.trim().is_empty() {
            return Err(parse_err("line 1", "empty dataset"));
        }
        let ds: Dataset = serde_json::from_str(text)
            .map_err(|e| parse_err(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
        ds.validate()?;
        Ok(ds)
    }

    pub fn load(path: &Path) -> Result<Self, RspError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            RspError::Parse { context, message } => {
                RspError::Parse { context: format!("{}: {context}", path.display()), message }
            }
            other => other,
        })
    }

    fn validate(&self) -> Result<(), RspError> {
        let pixels = self.pixel_count();
        if pixels == 0 {
            return Err(parse_err("grid", "grid has no pixels"));
        }
        for (i, s) in self.samples.iter().enumerate() {
            let ctx = format!("samples[{i}] (timestamp {})", s.timestamp.0);
            if s.radiance.len() != s.calibration.len() {
                return Err(parse_err(
                    ctx,
                    format!("{} radiance values but {} calibration values", s.radiance.len(), s.calibration.len()),
                ));
            }
            if s.radiance.len() != pixels {
                return Err(parse_err(ctx, format!("{} values for a {pixels}-pixel grid", s.radiance.len())));
            }
        }
        if self.samples.windows(2).any(|w| w[0].timestamp >= w[1].timestamp) {
            return Err(parse_err("samples", "timestamps must be strictly increasing"));
        }
        Ok(())
    }

    pub fn pixel_count(&self) -> usize {
        self.grid.rows as usize * self.grid.cols as usize
    }

    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }

    /// Pixels of `area` at instant `ts`, row-major within the rectangle.
    pub fn extract(&self, area: &Area, ts: Timestamp) -> Result<RemoteSensingSample, RspError> {
        let row_end = area.row as u64 + area.rows as u64;
        let col_end = area.col as u64 + area.cols as u64;
        if area.rows == 0 || area.cols == 0 || row_end > self.grid.rows as u64 || col_end > self.grid.cols as u64 {
            return Err(RspError::Request(format!(
                "area {area:?} outside the {}x{} grid",
                self.grid.rows, self.grid.cols
            )));
        }
        let s = self
            .samples
            .iter()
            .find(|s| s.timestamp == ts)
            .ok_or_else(|| RspError::Request(format!("no acquisition at timestamp {}", ts.0)))?;
        let mut out = RemoteSensingSample { radiance: Vec::new(), calibration: Vec::new(), timestamp: ts };
        for r in area.row..area.row + area.rows {
            for c in area.col..area.col + area.cols {
                let i = r as usize * self.grid.cols as usize + c as usize;
                out.radiance.push(s.radiance[i]);
                out.calibration.push(s.calibration[i]);
            }
        }
        Ok(out)
    }
}

/// Associative information `I_aso` bound into the signature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssociatedInfo {
    pub dataset_id: String,
    pub area: Area,
    pub timestamps: Vec<Timestamp>,
}

impl AssociatedInfo {
    pub fn hash(&self) -> [u8; 32] {
        Sha256::digest(serde_json::to_vec(self).expect("serializes")).into()
    }
}

/// `h = H(len ‖ commit_r_raw ‖ len ‖ H(I_aso))`.
pub fn provenance_hash(commit_r_raw: &Commitment, info: &AssociatedInfo) -> [u8; 32] {
    let c = commit_r_raw.to_bytes();
    let i = info.hash();
    let mut h = Sha256::new();
    h.update((c.len() as u32).to_be_bytes());
    h.update(c);
    h.update((i.len() as u32).to_be_bytes());
    h.update(i);
    h.finalize().into()
}

/// `r_raw(X, 1)`: sample `t` contributes `L_t` at exponents `2Nt + 1 ..= 2Nt + N`
/// and `f_t` at the next `N`.
pub fn raw_polynomial(samples: &[RemoteSensingSample]) -> LaurentPolynomial {
    let mut terms = Vec::new();
    let mut e = 1i64;
    for s in samples {
        for v in &s.radiance {
            terms.push((e, Fr::from(*v)));
            e += 1;
        }
        for v in &s.calibration {
            terms.push((e, Fr::from(*v)));
            e += 1;
        }
    }
    LaurentPolynomial::from_terms(terms)
}

/// Top exponent of `r_raw` for these samples, `2TN`, used as its commitment bound.
pub fn raw_bound(samples: &[RemoteSensingSample]) -> usize {
    samples.iter().map(|s| s.radiance.len() + s.calibration.len()).sum()
}

pub fn raw_commitment(srs: &Srs, samples: &[RemoteSensingSample]) -> Result<Commitment, RspError> {
    let bound = raw_bound(samples);
    if bound == 0 {
        return Err(RspError::Request("no pixel data".into()));
    }
    Ok(commit_bounded(srs, &raw_polynomial(samples), bound)?)
}

/// Hex of the first 8 bytes of `SHA-256(compressed public key)`.
fn key_id_of(vk: &VerifyingKey) -> String {
    hex::encode(&Sha256::digest(vk.to_encoded_point(true).as_bytes())[..8])
}

pub struct RspSigningKey {
    key: SigningKey,
}

impl RspSigningKey {
    /// Deterministic key from a seed: the first `SHA-256(seed ‖ counter)` that
    /// is a valid scalar.
    pub fn from_seed(seed: &[u8]) -> Self {
        for counter in 0u32.. {
            let mut h = Sha256::new();
            h.update(b"psei/rsp-key");
            h.update(seed);
            h.update(counter.to_be_bytes());
            if let Ok(key) = SigningKey::from_slice(&h.finalize()) {
                return Self { key };
            }
        }
        unreachable!("a valid scalar is found with overwhelming probability")
    }

    pub fn random() -> Self {
        Self { key: SigningKey::random(&mut rand::rngs::OsRng) }
    }

    pub fn from_secret_hex(s: &str) -> Result<Self, RspError> {
        let bytes = hex::decode(s).map_err(|e| RspError::Key(e.to_string()))?;
        SigningKey::from_slice(&bytes).map(|key| Self { key }).map_err(|e| RspError::Key(e.to_string()))
    }

    pub fn secret_hex(&self) -> String {
        hex::encode(self.key.to_bytes())
    }

    pub fn public_key(&self) -> RspPublicKey {
        RspPublicKey { key: *self.key.verifying_key() }
    }

    pub fn sign(&self, msg: &[u8]) -> Vec<u8> {
        let sig: Signature = self.key.sign(msg);
        sig.to_bytes().to_vec()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RspPublicKey {
    key: VerifyingKey,
}

impl RspPublicKey {
    pub fn key_id(&self) -> String {
        key_id_of(&self.key)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.key.to_encoded_point(true).as_bytes())
    }

    pub fn from_hex(s: &str) -> Result<Self, RspError> {
        let bytes = hex::decode(s).map_err(|e| RspError::Key(e.to_string()))?;
        VerifyingKey::from_sec1_bytes(&bytes).map(|key| Self { key }).map_err(|e| RspError::Key(e.to_string()))
    }

    pub fn verify(&self, msg: &[u8], signature: &[u8]) -> bool {
        Signature::from_slice(signature).is_ok_and(|sig| self.key.verify(msg, &sig).is_ok())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataRequest {
    pub policy_id: String,
    pub area: Area,
    pub timestamps: Vec<Timestamp>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataResponse {
    pub policy_id: String,
    pub samples: Vec<RemoteSensingSample>,
    pub i_aso: AssociatedInfo,
    /// Compressed G1 commitment to `r_raw`, hex.
    pub commit_r_raw: String,
    /// Fixed-width `r ‖ s` ECDSA signature over the provenance hash, hex.
    pub signature: String,
    pub key_id: String,
}

impl DataResponse {
    pub fn commitment(&self) -> Result<Commitment, RspError> {
        let bytes = hex::decode(&self.commit_r_raw).map_err(|e| RspError::Request(e.to_string()))?;
        Ok(Commitment::from_bytes(&bytes)?)
    }

    pub fn signature_bytes(&self) -> Result<Vec<u8>, RspError> {
        hex::decode(&self.signature).map_err(|e| RspError::Request(e.to_string()))
    }
}

pub fn serve_request(
    dataset: &Dataset,
    request: &DataRequest,
    key: &RspSigningKey,
    srs: &Srs,
) -> Result<DataResponse, RspError> {
    if request.timestamps.is_empty() {
        return Err(RspError::Request("no timestamps requested".into()));
    }
    if request.timestamps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(RspError::Request("timestamps must be strictly increasing".into()));
    }
    let samples =
        request.timestamps.iter().map(|ts| dataset.extract(&request.area, *ts)).collect::<Result<Vec<_>, _>>()?;
    let commitment = raw_commitment(srs, &samples)?;
    let i_aso = AssociatedInfo {
        dataset_id: dataset.dataset_id.clone(),
        area: request.area,
        timestamps: request.timestamps.clone(),
    };
    let signature = key.sign(&provenance_hash(&commitment, &i_aso));
    log::debug!("served {} samples for policy {}", samples.len(), request.policy_id);
    Ok(DataResponse {
        policy_id: request.policy_id.clone(),
        samples,
        i_aso,
        commit_r_raw: hex::encode(commitment.to_bytes()),
        signature: hex::encode(signature),
        key_id: key.public_key().key_id(),
    })
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum ProvenanceError {
    #[error("response is malformed")]
    Malformed,
    #[error("commitment does not match the served data")]
    CommitmentMismatch,
    #[error("signature does not cover this commitment and metadata")]
    BadSignature,
    #[error("samples disagree with the associated metadata")]
    MetadataMismatch,
}

/// Client-side check: recompute `commit_r_raw` from the raw data, recompute
/// `h`, verify the signature, then check the samples against `I_aso`.
pub fn verify_provenance(response: &DataResponse, key: &RspPublicKey, srs: &Srs) -> Result<(), ProvenanceError> {
    let claimed = response.commitment().map_err(|_| ProvenanceError::Malformed)?;
    let signature = response.signature_bytes().map_err(|_| ProvenanceError::Malformed)?;
    match raw_commitment(srs, &response.samples) {
        Ok(c) if c == claimed => {}
        _ => return Err(ProvenanceError::CommitmentMismatch),
    }
    if response.key_id != key.key_id() || !key.verify(&provenance_hash(&claimed, &response.i_aso), &signature) {
        return Err(ProvenanceError::BadSignature);
    }
    let times: Vec<Timestamp> = response.samples.iter().map(|s| s.timestamp).collect();
    let pixels = response.i_aso.area.pixel_count();
    if times != response.i_aso.timestamps || response.samples.iter().any(|s| s.pixel_count() != pixels) {
        return Err(ProvenanceError::MetadataMismatch);
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum WireReply {
    Ok(Box<DataResponse>),
    Error(String),
}

/// Serves JSON-line requests until `limit` connections were handled (forever
/// when `None`). One request and one reply per line.
pub fn serve_tcp(
    listener: TcpListener,
    dataset: &Dataset,
    key: &RspSigningKey,
    srs: &Srs,
    limit: Option<usize>,
) -> Result<(), RspError> {
    for (handled, stream) in listener.incoming().enumerate() {
        if limit.is_some_and(|l| handled >= l) {
            break;
        }
        let stream = stream?;
        let mut writer = stream.try_clone()?;
        for line in BufReader::new(stream).lines() {
            let line = line?;
            let reply = match serde_json::from_str::<DataRequest>(&line) {
                Ok(req) => match serve_request(dataset, &req, key, srs) {
                    Ok(resp) => WireReply::Ok(Box::new(resp)),
                    Err(e) => WireReply::Error(e.to_string()),
                },
                Err(e) => WireReply::Error(format!("bad request: {e}")),
            };
            serde_json::to_writer(&mut writer, &reply).map_err(|e| RspError::Request(e.to_string()))?;
            writer.write_all(b"\n")?;
        }
        if limit.is_some_and(|l| handled + 1 >= l) {
            break;
        }
    }
    Ok(())
}

pub fn request_tcp<A: ToSocketAddrs>(addr: A, request: &DataRequest) -> Result<DataResponse, RspError> {
    let mut stream = TcpStream::connect(addr)?;
    let mut line = serde_json::to_string(request).map_err(|e| RspError::Request(e.to_string()))?;
    line.push('\n');
    stream.write_all(line.as_bytes())?;
    let mut reply = String::new();
    BufReader::new(stream).read_line(&mut reply)?;
    match serde_json::from_str::<WireReply>(&reply).map_err(|e| RspError::Request(e.to_string()))? {
        WireReply::Ok(resp) => Ok(*resp),
        WireReply::Error(e) => Err(RspError::Request(e)),
    }
}
