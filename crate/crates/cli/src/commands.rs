//! Subcommand bodies. Each returns the JSON object printed on stdout.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use psei_core::circuit::CircuitShape;
use psei_core::commitments::{setup as srs_setup, CURVE_ID};
use psei_core::ledger::{ClaimSubmission, LedgerError, PolicyRecord, SonicClaimVerifier};
use psei_core::rsp::{
    request_tcp, serve_request, verify_provenance, DataRequest, DataResponse, Dataset, RspPublicKey, RspSigningKey,
};
use psei_core::sonic::{check_srs, prove, ClaimProof, ProveError, ProvenanceMeta};
use psei_core::ssi_model::{evaluate_claim, evaluate_ssi};
use psei_core::{Ledger, PolicyState, PolicyTerms, Srs, Timestamp};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{
    read_bytes, read_json, write_bytes, write_json, Scenario, LEDGER_FILE, MANIFEST_FILE, PROOF_FILE, RESPONSE_FILE,
    RSP_KEY_FILE, SETTLEMENT_FILE, SRS_FILE,
};
use crate::error::{CliError, CliResult, Exit};

/// Public parameters shared by every party after setup.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub policy_id: String,
    pub policy_hash: String,
    pub dataset_id: String,
    pub shape: ShapeInfo,
    pub srs: SrsInfo,
    pub rsp: RspInfo,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeInfo {
    pub n_pixels: usize,
    pub n_samples: usize,
    pub m_bits: usize,
    pub witness_len: usize,
    pub required_d: usize,
    pub required_max: usize,
}

impl From<&CircuitShape> for ShapeInfo {
    fn from(s: &CircuitShape) -> Self {
        Self {
            n_pixels: s.n_pixels,
            n_samples: s.n_samples,
            m_bits: s.m_bits,
            witness_len: s.witness_len(),
            required_d: s.srs_degree(),
            required_max: s.srs_max(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SrsInfo {
    pub curve: String,
    pub d: usize,
    pub max: usize,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RspInfo {
    pub key_id: String,
    pub public_key: String,
}

#[derive(Serialize, Deserialize)]
struct RspKeyFile {
    key_id: String,
    public_key: String,
    secret_key: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// `proof.bin` → `proof.bin.meta.json`.
pub fn meta_path(proof: &Path) -> PathBuf {
    let mut name = proof.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn ledger_err(e: LedgerError) -> CliError {
    match e {
        LedgerError::InvalidTerms(inner) => CliError::new(Exit::Parameter, inner.to_string()),
        other => CliError::new(Exit::State, other.to_string()),
    }
}

fn load_policy(path: &Path) -> CliResult<PolicyTerms> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let terms: PolicyTerms =
        serde_json::from_str(&text).map_err(|e| CliError::new(Exit::Parameter, format!("{}: {e}", path.display())))?;
    terms.validate().map_err(|e| CliError::new(Exit::Parameter, e.to_string()))?;
    terms.shape().validate().map_err(|e| CliError::new(Exit::Parameter, e.to_string()))?;
    Ok(terms)
}

fn load_manifest(s: &Scenario) -> CliResult<Manifest> {
    let path = s.file(MANIFEST_FILE);
    if !path.is_file() {
        return Err(CliError::new(Exit::Io, format!("{} missing; run setup first", path.display())));
    }
    read_json(&path)
}

fn load_ledger(s: &Scenario) -> CliResult<Ledger> {
    read_json(&s.file(LEDGER_FILE))
}

fn save_ledger(s: &Scenario, ledger: &Ledger) -> CliResult<()> {
    write_json(&s.file(LEDGER_FILE), ledger)
}

fn record<'a>(ledger: &'a Ledger, manifest: &Manifest) -> CliResult<&'a PolicyRecord> {
    ledger
        .policy(&manifest.policy_id)
        .ok_or_else(|| CliError::new(Exit::State, format!("policy {} is not on the ledger", manifest.policy_id)))
}

/// Reads the scenario srs and checks it is the one the policy was created under.
fn load_srs(s: &Scenario, expected_digest: &str) -> CliResult<Srs> {
    let path = s.file(SRS_FILE);
    let file = fs::File::open(&path).map_err(|e| CliError::io(&path, e))?;
    let srs = Srs::read_from(BufReader::new(file)).map_err(|e| CliError::io(&path, e))?;
    if hex::encode(srs.digest()) != expected_digest {
        return Err(CliError::new(
            Exit::Parameter,
            format!("{} does not match the policy's srs digest", path.display()),
        ));
    }
    Ok(srs)
}

fn load_rsp_key(s: &Scenario) -> CliResult<RspSigningKey> {
    let path = s.file(RSP_KEY_FILE);
    let file: RspKeyFile = read_json(&path)?;
    RspSigningKey::from_secret_hex(&file.secret_key).map_err(|e| CliError::io(&path, e))
}

fn rsp_public_key(rec: &PolicyRecord) -> CliResult<RspPublicKey> {
    RspPublicKey::from_hex(&rec.rsp_public_key).map_err(|e| CliError::new(Exit::State, e.to_string()))
}

fn parameter_report(message: String, shape: &CircuitShape) -> CliError {
    let report = json!({
        "error": message,
        "kind": Exit::Parameter.label(),
        "exit_code": Exit::Parameter.code(),
        "witness_len": shape.witness_len(),
        "required_d": shape.srs_degree(),
        "required_max": shape.srs_max(),
    });
    CliError::new(Exit::Parameter, message).with_report(report)
}

fn srs_size_error(shape: &CircuitShape, d: usize, max: usize) -> CliError {
    let l = shape.witness_len();
    parameter_report(
        format!(
            "srs too small: have d = {d}, max = {max}; need d >= 4L+8 = {} and max >= 3L = {} (L = {l})",
            shape.srs_degree(),
            shape.srs_max()
        ),
        shape,
    )
}

/// Generates (or loads) the srs, derives the provider key, mints the
/// endowments and creates the policy on a fresh ledger.
pub fn setup(s: &Scenario) -> CliResult<Value> {
    let mut terms = load_policy(&s.policy)?;
    let shape = terms.shape();

    let srs = match &s.srs.file {
        Some(path) => {
            let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
            Srs::read_from(BufReader::new(file)).map_err(|e| CliError::io(path, e))?
        }
        None => {
            let d = s.srs.d.unwrap_or(shape.srs_degree());
            let max = s.srs.max.unwrap_or(shape.srs_max());
            if d < shape.srs_degree() || max < shape.srs_max() {
                return Err(srs_size_error(&shape, d, max));
            }
            log::info!("generating srs with d = {d}, max = {max}");
            let seed = s.seed_for("srs");
            srs_setup(d, max, seed.as_deref()).map_err(|e| CliError::new(Exit::Parameter, e.to_string()))?.1
        }
    };
    if check_srs(&srs, &shape).is_err() {
        return Err(srs_size_error(&shape, srs.d(), srs.max()));
    }

    let key = match s.seed_for("rsp") {
        Some(seed) => RspSigningKey::from_seed(&seed),
        None => RspSigningKey::random(),
    };
    let public = key.public_key();
    let key_id = public.key_id();
    match &terms.rsp_key_id {
        Some(id) if *id != key_id => {
            return Err(CliError::new(
                Exit::Parameter,
                format!("policy names provider key {id} but the scenario key is {key_id}"),
            ))
        }
        _ => terms.rsp_key_id = Some(key_id.clone()),
    }

    let srs_digest = hex::encode(srs.digest());
    let created = terms.period.start;
    let mut ledger = Ledger::new();
    for (account, amount) in &s.accounts {
        ledger.endow(account, *amount, created).map_err(ledger_err)?;
    }
    ledger.create_policy(terms.clone(), srs_digest.clone(), public.to_hex(), created).map_err(ledger_err)?;

    let manifest = Manifest {
        policy_id: terms.policy_id.clone(),
        policy_hash: hex::encode(terms.policy_hash()),
        dataset_id: terms.dataset_id.clone(),
        shape: ShapeInfo::from(&shape),
        srs: SrsInfo { curve: CURVE_ID.to_string(), d: srs.d(), max: srs.max(), digest: srs_digest },
        rsp: RspInfo { key_id: key_id.clone(), public_key: public.to_hex() },
    };

    for stale in [RESPONSE_FILE, PROOF_FILE, SETTLEMENT_FILE] {
        let p = s.file(stale);
        for q in [meta_path(&p), p] {
            if q.is_file() {
                fs::remove_file(&q).map_err(|e| CliError::io(&q, e))?;
            }
        }
    }
    write_bytes(&s.file(SRS_FILE), &srs.to_bytes())?;
    write_json(
        &s.file(RSP_KEY_FILE),
        &RspKeyFile { key_id, public_key: public.to_hex(), secret_key: key.secret_hex() },
    )?;
    write_json(&s.file(MANIFEST_FILE), &manifest)?;
    save_ledger(s, &ledger)?;

    let manifest_digest = sha256_hex(&read_bytes(&s.file(MANIFEST_FILE))?);
    Ok(json!({
        "manifest": manifest,
        "manifest_digest": manifest_digest,
        "balances": ledger.balances(),
    }))
}

/// Moves one party's leg into escrow. The amount defaults to the leg the
/// policy prescribes for that party.
pub fn fund(s: &Scenario, party: &str, amount: Option<u64>, now: Option<i64>) -> CliResult<Value> {
    let manifest = load_manifest(s)?;
    let mut ledger = load_ledger(s)?;
    let terms = record(&ledger, &manifest)?.terms.clone();
    let amount = amount.unwrap_or(if party == terms.insuree {
        terms.premium
    } else if party == terms.insurer {
        terms.sum_insured
    } else {
        0
    });
    let now = now.map(Timestamp).unwrap_or(terms.period.start);
    let state = ledger.fund(&terms.policy_id, party, amount, now).map_err(ledger_err)?;
    save_ledger(s, &ledger)?;
    Ok(json!({
        "policy_id": terms.policy_id,
        "party": party,
        "amount": amount,
        "state": state,
        "balances": ledger.balances(),
    }))
}

fn fetch_response(s: &Scenario, terms: &PolicyTerms, srs: &Srs) -> CliResult<DataResponse> {
    let request = DataRequest {
        policy_id: terms.policy_id.clone(),
        area: terms.area,
        timestamps: terms.period.sample_times.clone(),
    };
    match &s.rsp_addr {
        Some(addr) => {
            log::info!("requesting data from provider at {addr}");
            request_tcp(addr.as_str(), &request).map_err(|e| CliError::new(Exit::Io, format!("provider {addr}: {e}")))
        }
        None => {
            let dataset = Dataset::load(&s.dataset).map_err(|e| CliError::io(&s.dataset, e))?;
            let key = load_rsp_key(s)?;
            serve_request(&dataset, &request, &key, srs).map_err(|e| CliError::new(Exit::Io, e.to_string()))
        }
    }
}

/// Client-side provenance: the commitment must be recomputable from the raw
/// data, the signature must verify, and `I_aso` must describe the policy.
fn check_response(response: &DataResponse, rec: &PolicyRecord, srs: &Srs) -> CliResult<()> {
    let key = rsp_public_key(rec)?;
    verify_provenance(response, &key, srs).map_err(|e| CliError::new(Exit::Provenance, e.to_string()))?;
    let terms = &rec.terms;
    let info = &response.i_aso;
    if response.policy_id != terms.policy_id
        || info.dataset_id != terms.dataset_id
        || info.area != terms.area
        || info.timestamps != terms.period.sample_times
    {
        return Err(CliError::new(Exit::Provenance, "response does not describe the policy's area and period"));
    }
    Ok(())
}

pub fn request_data(s: &Scenario, out: Option<&Path>) -> CliResult<Value> {
    let manifest = load_manifest(s)?;
    let ledger = load_ledger(s)?;
    let rec = record(&ledger, &manifest)?;
    let srs = load_srs(s, &rec.srs_digest)?;
    let response = fetch_response(s, &rec.terms, &srs)?;
    check_response(&response, rec, &srs)?;
    let path = out.map(Path::to_path_buf).unwrap_or_else(|| s.file(RESPONSE_FILE));
    write_json(&path, &response)?;
    Ok(json!({
        "policy_id": response.policy_id,
        "dataset_id": response.i_aso.dataset_id,
        "key_id": response.key_id,
        "commit_r_raw": response.commit_r_raw,
        "samples": response.samples.len(),
        "pixels": response.i_aso.area.pixel_count(),
        "response": file_name(&path),
    }))
}

fn prover_rng(s: &Scenario, policy_id: &str) -> ChaCha20Rng {
    match s.seed_for("prover") {
        Some(seed) => {
            let mut h = Sha256::new();
            h.update(&seed);
            h.update(policy_id.as_bytes());
            ChaCha20Rng::from_seed(h.finalize().into())
        }
        None => ChaCha20Rng::from_entropy(),
    }
}

fn prove_err(e: ProveError) -> CliError {
    let exit = match e {
        ProveError::NotPayable => Exit::NotPayable,
        ProveError::ProvenanceMismatch => Exit::Provenance,
        ProveError::SrsTooSmall { .. } => Exit::Parameter,
        _ => Exit::Proving,
    };
    CliError::new(exit, e.to_string())
}

/// Uses the stored provider response when there is one, otherwise requests
/// the data; then checks provenance, evaluates the claim and proves it.
pub fn claim(s: &Scenario, out: Option<&Path>) -> CliResult<Value> {
    let manifest = load_manifest(s)?;
    let ledger = load_ledger(s)?;
    let rec = record(&ledger, &manifest)?;
    if rec.state != PolicyState::Active {
        return Err(CliError::new(
            Exit::State,
            format!("policy {} is {:?}; claims need a funded, active policy", manifest.policy_id, rec.state),
        ));
    }
    let terms = &rec.terms;
    let srs = load_srs(s, &rec.srs_digest)?;

    let response_path = s.file(RESPONSE_FILE);
    let response: DataResponse = if response_path.is_file() {
        let text = fs::read_to_string(&response_path).map_err(|e| CliError::io(&response_path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::new(Exit::Provenance, format!("malformed response: {e}")))?
    } else {
        let r = fetch_response(s, terms, &srs)?;
        write_json(&response_path, &r)?;
        r
    };
    check_response(&response, rec, &srs)?;

    let parameter = |e: psei_core::ssi_model::ModelError| CliError::new(Exit::Parameter, e.to_string());
    let ssi = evaluate_ssi(&response.samples, &terms.model).map_err(parameter)?;
    let decision =
        evaluate_claim(ssi.total_ssi, terms.expected_irradiation, terms.epsilon_bp, terms.m_bits, terms.model.scale)
            .map_err(parameter)?;
    let summary = json!({
        "policy_id": terms.policy_id,
        "payable": decision.payable,
        "total_ssi": ssi.total_ssi,
        "threshold": decision.threshold,
        "deficit": decision.deficit,
    });
    if !decision.payable {
        let message = format!("claim is not payable: total SSI {} >= threshold {}", ssi.total_ssi, decision.threshold);
        let mut report = summary;
        report["error"] = json!(message);
        report["kind"] = json!(Exit::NotPayable.label());
        report["exit_code"] = json!(Exit::NotPayable.code());
        return Err(CliError::new(Exit::NotPayable, message).with_report(report));
    }

    let commitment = response.commitment().map_err(|e| CliError::new(Exit::Provenance, e.to_string()))?;
    let mut rng = prover_rng(s, &terms.policy_id);
    let proof = prove(&srs, terms, &response.samples, &commitment, &mut rng).map_err(prove_err)?;
    let bytes = proof.to_bytes();
    let meta = ProvenanceMeta {
        i_aso: response.i_aso.clone(),
        signature: response.signature.clone(),
        key_id: response.key_id.clone(),
    };
    let path = out.map(Path::to_path_buf).unwrap_or_else(|| s.file(PROOF_FILE));
    write_bytes(&path, &bytes)?;
    write_json(&meta_path(&path), &meta)?;

    let mut report = summary;
    report["proof"] = json!(file_name(&path));
    report["proof_bytes"] = json!(bytes.len());
    report["proof_sha256"] = json!(sha256_hex(&bytes));
    Ok(report)
}

/// Verifies the proof through the ledger and settles on acceptance.
pub fn verify_settle(s: &Scenario, proof: Option<&Path>, out: Option<&Path>, now: Option<i64>) -> CliResult<Value> {
    let proof_path = proof.map(Path::to_path_buf).unwrap_or_else(|| s.file(PROOF_FILE));
    if !proof_path.is_file() {
        return Err(CliError::new(Exit::Io, format!("proof file {} not found", proof_path.display())));
    }
    let bytes = read_bytes(&proof_path)?;
    let meta: ProvenanceMeta = read_json(&meta_path(&proof_path))?;
    let manifest = load_manifest(s)?;
    let mut ledger = load_ledger(s)?;
    let rec = record(&ledger, &manifest)?.clone();
    let srs = load_srs(s, &rec.srs_digest)?;
    let verifier = SonicClaimVerifier { srs: &srs, rsp_key: rsp_public_key(&rec)? };

    let before: BTreeMap<String, u64> = ledger.balances().clone();
    let now = now.map(Timestamp).unwrap_or(rec.terms.period.end);
    let digest = sha256_hex(&bytes);
    let submission = ClaimSubmission { proof: bytes, meta };
    match ledger.submit_claim(&rec.terms.policy_id, &submission, &verifier, now) {
        Ok(outcome) => {
            save_ledger(s, &ledger)?;
            let report = json!({
                "policy_id": rec.terms.policy_id,
                "accepted": outcome.verdict.accepted,
                "reason": outcome.verdict.reason,
                "state": outcome.state,
                "proof_sha256": digest,
                "balances_before": before,
                "balances_after": ledger.balances(),
            });
            let path = out.map(Path::to_path_buf).unwrap_or_else(|| s.file(SETTLEMENT_FILE));
            write_json(&path, &report)?;
            if outcome.verdict.accepted {
                Ok(report)
            } else {
                let reason = outcome.verdict.reason.map(|r| r.to_string()).unwrap_or_default();
                Err(CliError::new(Exit::Rejected, format!("claim rejected: {reason}")).with_report(report))
            }
        }
        Err(e) => {
            let message = e.to_string();
            let report = json!({
                "policy_id": rec.terms.policy_id,
                "accepted": false,
                "reason": Value::Null,
                "error": message,
                "kind": Exit::State.label(),
                "exit_code": Exit::State.code(),
                "state": rec.state,
                "proof_sha256": digest,
                "balances_before": before,
                "balances_after": ledger.balances(),
            });
            Err(ledger_err(e).with_report(report))
        }
    }
}

pub fn expire(s: &Scenario, now: Option<i64>) -> CliResult<Value> {
    let manifest = load_manifest(s)?;
    let mut ledger = load_ledger(s)?;
    let rec = record(&ledger, &manifest)?;
    let now = now.map(Timestamp).unwrap_or(rec.terms.expiry);
    let id = rec.terms.policy_id.clone();
    let state = ledger.expire(&id, now).map_err(ledger_err)?;
    save_ledger(s, &ledger)?;
    Ok(json!({ "policy_id": id, "state": state, "balances": ledger.balances() }))
}

fn proof_summary(bytes: &[u8]) -> Value {
    match ClaimProof::from_bytes(bytes) {
        Ok(p) => {
            let elements: Vec<Vec<u8>> = vec![
                p.commit_r_local.to_bytes().to_vec(),
                p.commit_t.to_bytes().to_vec(),
                p.r_local_z.to_bytes().to_vec(),
                p.r_local_zy.to_bytes().to_vec(),
                p.commit_r_raw.to_bytes().to_vec(),
                p.r_raw_z.to_bytes().to_vec(),
                p.r_raw_zy.to_bytes().to_vec(),
                p.t_z.to_bytes().to_vec(),
            ];
            let named: serde_json::Map<String, Value> = ClaimProof::ELEMENT_NAMES
                .iter()
                .zip(elements)
                .map(|(n, e)| (n.to_string(), json!(hex::encode(e))))
                .collect();
            json!({
                "bytes": bytes.len(),
                "sha256": sha256_hex(bytes),
                "shape": ShapeInfo::from(&p.shape),
                "elements": named,
            })
        }
        Err(e) => json!({ "bytes": bytes.len(), "sha256": sha256_hex(bytes), "decode_error": e.to_string() }),
    }
}

/// Read-only view of the scenario: manifest, policy record, balances, events
/// and optionally a decoded proof.
pub fn inspect(s: &Scenario, proof: Option<&Path>) -> CliResult<Value> {
    let manifest = load_manifest(s)?;
    let ledger = load_ledger(s)?;
    let rec = record(&ledger, &manifest)?;
    let mut out = json!({
        "manifest": manifest,
        "policy": rec,
        "balances": ledger.balances(),
        "total_value": ledger.total_value(),
        "events": ledger.events(),
    });
    if let Some(path) = proof {
        let bytes = read_bytes(path)?;
        out["proof"] = proof_summary(&bytes);
        let meta = meta_path(path);
        if meta.is_file() {
            out["proof_meta"] = read_json::<Value>(&meta)?;
        }
    }
    Ok(out)
}
