//! Non-interactive claim proof.
//!
//! The prover commits to `r_local` (its part of `r(X, 1)` plus the random
//! `mix` blinding), reuses the provider's `commit_r_raw`, commits to
//! `t(X, y)` and opens everything at `z` and `zy`. The verifier recomputes
//! the challenges, evaluates `s(z, y)` and `k(y)` itself and checks
//! `t(z, y) = r(z, 1)·(r(zy, 1) + s(z, y)) - k(y)` with
//! `r = r_local + r_raw`.

mod proof;
mod transcript;

use ark_ff::{UniformRand, Zero};
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{
    build_linear_constraints, build_witness, check_constraints_direct, derive_challenge_vectors, k_poly, s_eval,
    split_r, t_poly, violations, CircuitError, CircuitShape, LinearConstraintSet, Violation, WitnessVectors,
};
use crate::commitments::{
    commit, commit_bounded, open, open_bounded, verify_open, verify_open_bounded, CommitError, Commitment,
    LaurentPolynomial, Srs,
};
use crate::field::Fr;
use crate::policy::PolicyTerms;
use crate::rsp::{provenance_hash, RspPublicKey};
use crate::ssi_model::RemoteSensingSample;

pub use proof::{ClaimProof, ProofDecodeError, ProvenanceMeta};
pub use transcript::Transcript;

/// Number of blinding coefficients in `mix`.
pub const MIX_TERMS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProveError {
    #[error("claim is not payable")]
    NotPayable,
    #[error("witness violates the constraint system: {0:?}")]
    ConstraintViolation(Vec<Violation>),
    #[error("provider commitment does not match the sensing data")]
    ProvenanceMismatch,
    #[error("srs too small: need d >= {required_d} and max >= {required_max}, have d = {d}, max = {max}")]
    SrsTooSmall { required_d: usize, required_max: usize, d: usize, max: usize },
    #[error(transparent)]
    Circuit(CircuitError),
    #[error(transparent)]
    Commit(#[from] CommitError),
}

impl From<CircuitError> for ProveError {
    fn from(e: CircuitError) -> Self {
        match e {
            CircuitError::WitnessUnavailable => ProveError::NotPayable,
            other => ProveError::Circuit(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    BadSignature,
    BadOpening,
    EquationMismatch,
    TranscriptMismatch,
    StatementMismatch,
    MalformedProof,
}

impl RejectReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            RejectReason::BadSignature => "bad-signature",
            RejectReason::BadOpening => "bad-opening",
            RejectReason::EquationMismatch => "equation-mismatch",
            RejectReason::TranscriptMismatch => "transcript-mismatch",
            RejectReason::StatementMismatch => "statement-mismatch",
            RejectReason::MalformedProof => "malformed-proof",
        }
    }
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub accepted: bool,
    pub reason: Option<RejectReason>,
}

impl Verdict {
    pub fn accept() -> Self {
        Self { accepted: true, reason: None }
    }

    pub fn reject(reason: RejectReason) -> Self {
        Self { accepted: false, reason: Some(reason) }
    }
}

pub fn check_srs(srs: &Srs, shape: &CircuitShape) -> Result<(), ProveError> {
    if srs.d() < shape.srs_degree() || srs.max() < shape.srs_max() {
        return Err(ProveError::SrsTooSmall {
            required_d: shape.srs_degree(),
            required_max: shape.srs_max(),
            d: srs.d(),
            max: srs.max(),
        });
    }
    Ok(())
}

fn start_transcript(policy: &PolicyTerms, commit_r_raw: &Commitment, commit_r_local: &Commitment) -> Transcript {
    let mut tr = Transcript::new();
    tr.absorb(b"policy", &policy.policy_hash());
    tr.absorb(b"commit_r_raw", &commit_r_raw.to_bytes());
    tr.absorb(b"commit_r_local", &commit_r_local.to_bytes());
    tr
}

fn derive_constraints(
    tr: &mut Transcript,
    shape: &CircuitShape,
    policy: &PolicyTerms,
) -> Result<LinearConstraintSet, CircuitError> {
    let seed = tr.challenge_bytes(b"constraints");
    build_linear_constraints(shape, policy, &derive_challenge_vectors(&seed, shape))
}

/// `Σ c_i X^{-2L-i}` with fresh random `c_i`.
fn sample_mix<R: RngCore + CryptoRng>(shape: &CircuitShape, rng: &mut R) -> LaurentPolynomial {
    let base = 2 * shape.witness_len() as i64;
    LaurentPolynomial::from_terms((1..=MIX_TERMS as i64).map(|i| (-base - i, Fr::rand(rng))))
}

/// Options that only the adversarial harness turns on.
#[derive(Default)]
struct Relaxations {
    /// Use this `commit_r_raw` in the transcript and proof regardless of the data.
    raw_commitment: Option<Commitment>,
    /// Skip the constraint check and strip `t`'s constant term before committing.
    strip_constant: bool,
}

fn assemble<R: RngCore + CryptoRng>(
    srs: &Srs,
    policy: &PolicyTerms,
    witness: &WitnessVectors,
    relax: Relaxations,
    rng: &mut R,
) -> Result<ClaimProof, ProveError> {
    let shape = policy.shape();
    check_srs(srs, &shape)?;
    let raw_bound = shape.raw_len();
    let local_bound = shape.witness_len();

    let (r_raw, r_local_data) = split_r(witness, &shape);
    let r_local = &r_local_data + &sample_mix(&shape, rng);
    let commit_r_raw = match relax.raw_commitment {
        Some(c) => c,
        None => commit_bounded(srs, &r_raw, raw_bound)?,
    };
    let commit_r_local = commit_bounded(srs, &r_local, local_bound)?;

    let mut tr = start_transcript(policy, &commit_r_raw, &commit_r_local);
    let constraints = derive_constraints(&mut tr, &shape, policy)?;
    if !relax.strip_constant && !check_constraints_direct(witness, &constraints) {
        return Err(ProveError::ConstraintViolation(violations(witness, &constraints)));
    }
    let y = tr.challenge_scalar(b"y");
    let r = &r_raw + &r_local;
    let mut t = t_poly(&r, &constraints, y).expect("y is non-zero");
    if relax.strip_constant {
        t = &t - &LaurentPolynomial::monomial(0, t.constant_term());
    } else if !t.constant_term().is_zero() {
        return Err(ProveError::ConstraintViolation(violations(witness, &constraints)));
    }
    let commit_t = commit(srs, &t)?;
    tr.absorb(b"commit_t", &commit_t.to_bytes());
    let z = tr.challenge_scalar(b"z");
    let zy = z * y;

    Ok(ClaimProof {
        shape,
        commit_r_local,
        commit_t,
        r_local_z: open_bounded(srs, &r_local, z, local_bound)?,
        r_local_zy: open_bounded(srs, &r_local, zy, local_bound)?,
        commit_r_raw,
        r_raw_z: open_bounded(srs, &r_raw, z, raw_bound)?,
        r_raw_zy: open_bounded(srs, &r_raw, zy, raw_bound)?,
        t_z: open(srs, &t, z)?,
    })
}

/// Proves that the signed sensing data make the policy payable. Refuses when
/// the claim is not payable, when `commit_r_raw` is not the commitment to
/// `samples`, or when the witness fails any constraint.
pub fn prove<R: RngCore + CryptoRng>(
    srs: &Srs,
    policy: &PolicyTerms,
    samples: &[RemoteSensingSample],
    commit_r_raw: &Commitment,
    rng: &mut R,
) -> Result<ClaimProof, ProveError> {
    let shape = policy.shape();
    check_srs(srs, &shape)?;
    let witness = build_witness(samples, policy)?;
    let (r_raw, _) = split_r(&witness, &shape);
    if commit_bounded(srs, &r_raw, shape.raw_len())? != *commit_r_raw {
        return Err(ProveError::ProvenanceMismatch);
    }
    assemble(srs, policy, &witness, Relaxations::default(), rng)
}

/// Full verification in the order signature, statement, transcript,
/// equation, openings.
pub fn verify(
    srs: &Srs,
    policy: &PolicyTerms,
    proof: &ClaimProof,
    meta: &ProvenanceMeta,
    rsp_key: &RspPublicKey,
) -> Verdict {
    let signature = match hex::decode(&meta.signature) {
        Ok(s) => s,
        Err(_) => return Verdict::reject(RejectReason::BadSignature),
    };
    let key_ok = meta.key_id == rsp_key.key_id() && policy.rsp_key_id.as_ref().is_none_or(|k| *k == meta.key_id);
    if !key_ok || !rsp_key.verify(&provenance_hash(&proof.commit_r_raw, &meta.i_aso), &signature) {
        return Verdict::reject(RejectReason::BadSignature);
    }

    let info = &meta.i_aso;
    if info.dataset_id != policy.dataset_id || info.area != policy.area || info.timestamps != policy.period.sample_times
    {
        return Verdict::reject(RejectReason::StatementMismatch);
    }

    let shape = policy.shape();
    if proof.shape != shape {
        return Verdict::reject(RejectReason::TranscriptMismatch);
    }
    if check_srs(srs, &shape).is_err() {
        return Verdict::reject(RejectReason::MalformedProof);
    }

    let mut tr = start_transcript(policy, &proof.commit_r_raw, &proof.commit_r_local);
    let Ok(constraints) = derive_constraints(&mut tr, &shape, policy) else {
        return Verdict::reject(RejectReason::MalformedProof);
    };
    let y = tr.challenge_scalar(b"y");
    tr.absorb(b"commit_t", &proof.commit_t.to_bytes());
    let z = tr.challenge_scalar(b"z");
    let zy = z * y;

    let (Some(s), Some(k)) = (s_eval(&constraints, z, y), k_poly(&constraints).evaluate(y)) else {
        return Verdict::reject(RejectReason::MalformedProof);
    };
    let r_z = proof.r_local_z.value + proof.r_raw_z.value;
    let r_zy = proof.r_local_zy.value + proof.r_raw_zy.value;
    if proof.t_z.value != r_z * (r_zy + s) - k {
        return Verdict::reject(RejectReason::EquationMismatch);
    }

    let (raw_bound, local_bound) = (shape.raw_len(), shape.witness_len());
    let openings_ok = verify_open_bounded(srs, &proof.commit_r_local, z, &proof.r_local_z, local_bound)
        && verify_open_bounded(srs, &proof.commit_r_local, zy, &proof.r_local_zy, local_bound)
        && verify_open_bounded(srs, &proof.commit_r_raw, z, &proof.r_raw_z, raw_bound)
        && verify_open_bounded(srs, &proof.commit_r_raw, zy, &proof.r_raw_zy, raw_bound)
        && verify_open(srs, &proof.commit_t, z, &proof.t_z);
    if !openings_ok {
        return Verdict::reject(RejectReason::BadOpening);
    }
    Verdict::accept()
}

/// Decodes then verifies; decoding failures map to `malformed-proof`, or to
/// `bad-opening` when only an opening element is invalid.
pub fn verify_bytes(
    srs: &Srs,
    policy: &PolicyTerms,
    proof: &[u8],
    meta: &ProvenanceMeta,
    rsp_key: &RspPublicKey,
) -> Verdict {
    match ClaimProof::from_bytes(proof) {
        Ok(p) => verify(srs, policy, &p, meta, rsp_key),
        Err(ProofDecodeError::BadOpening { .. }) => Verdict::reject(RejectReason::BadOpening),
        Err(ProofDecodeError::Malformed(_)) => Verdict::reject(RejectReason::MalformedProof),
    }
}

/// Cheating provers for soundness experiments. They run the honest pipeline
/// on arbitrary witnesses but skip every self-check the real prover performs.
pub mod adversary {
    use super::*;

    /// Proves an arbitrary witness: the constant term of `t` is dropped so the
    /// commitment goes through, and `commit_r_raw` is replaced by `signed_raw`
    /// when given (to reuse a genuine provider signature).
    pub fn forge<R: RngCore + CryptoRng>(
        srs: &Srs,
        policy: &PolicyTerms,
        witness: &WitnessVectors,
        signed_raw: Option<Commitment>,
        rng: &mut R,
    ) -> Result<ClaimProof, ProveError> {
        assemble(srs, policy, witness, Relaxations { raw_commitment: signed_raw, strip_constant: true }, rng)
    }
}
