//! In-process stand-in for the insurance contract and its ledger.
//!
//! Balances are integer minor units. Escrow lives inside each policy record,
//! so the sum of account balances and escrows never changes after the
//! initial endowments. Time is always passed in by the caller.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::commitments::Srs;
use crate::policy::{PolicyError, PolicyTerms};
use crate::rsp::RspPublicKey;
use crate::sonic::{verify_bytes, ProvenanceMeta, Verdict};
use crate::ssi_model::Timestamp;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LedgerError {
    #[error(transparent)]
    InvalidTerms(#[from] PolicyError),
    #[error("policy {0} already exists")]
    DuplicatePolicy(String),
    #[error("unknown policy {0}")]
    UnknownPolicy(String),
    #[error("unknown account {0}")]
    UnknownAccount(String),
    #[error("{party} is not a party to policy {policy_id}")]
    NotAParty { policy_id: String, party: String },
    #[error("wrong amount: expected {expected}, got {got}")]
    WrongAmount { expected: u64, got: u64 },
    #[error("insufficient balance in {account}: has {balance}, needs {needed}")]
    InsufficientBalance { account: String, balance: u64, needed: u64 },
    #[error("operation not allowed in state {state:?}: {reason}")]
    WrongState { state: PolicyState, reason: String },
    #[error("policy has not expired yet (expiry {expiry}, now {now})")]
    NotExpired { expiry: i64, now: i64 },
    #[error("policy expired at {expiry}, now {now}")]
    Expired { expiry: i64, now: i64 },
    #[error("balance overflow")]
    Overflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyState {
    Created,
    /// One of the two legs is in escrow.
    Funded,
    Active,
    PaidOut,
    Expired,
    /// Expired without ever being funded.
    Closed,
}

impl PolicyState {
    pub fn is_terminal(&self) -> bool {
        matches!(self, PolicyState::PaidOut | PolicyState::Expired | PolicyState::Closed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyRecord {
    pub terms: PolicyTerms,
    pub state: PolicyState,
    pub premium_escrow: u64,
    pub sum_insured_escrow: u64,
    pub premium_paid: bool,
    pub sum_insured_paid: bool,
    /// Hex SHA-256 of the srs the policy was created under.
    pub srs_digest: String,
    /// Hex compressed public key of the provider.
    pub rsp_public_key: String,
}

impl PolicyRecord {
    pub fn escrow(&self) -> u128 {
        self.premium_escrow as u128 + self.sum_insured_escrow as u128
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EventKind {
    Endowed { account: String, amount: u64 },
    PolicyCreated { policy_id: String },
    Funded { policy_id: String, party: String, amount: u64 },
    Activated { policy_id: String },
    ClaimAccepted { policy_id: String },
    ClaimRejected { policy_id: String, reason: String },
    PaidOut { policy_id: String, insuree: String, sum_insured: u64, insurer: String, premium: u64 },
    Refunded { policy_id: String, account: String, amount: u64 },
    Expired { policy_id: String },
    Closed { policy_id: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    pub at: Timestamp,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimOutcome {
    pub verdict: Verdict,
    pub state: PolicyState,
}

/// Decides whether a submitted claim proves the policy's trigger condition.
pub trait ClaimVerifier {
    type Claim;

    fn verify(&self, terms: &PolicyTerms, claim: &Self::Claim) -> Verdict;
}

/// Raw proof bytes plus the provider metadata that comes with them.
#[derive(Debug, Clone)]
pub struct ClaimSubmission {
    pub proof: Vec<u8>,
    pub meta: ProvenanceMeta,
}

pub struct SonicClaimVerifier<'a> {
    pub srs: &'a Srs,
    pub rsp_key: RspPublicKey,
}

impl ClaimVerifier for SonicClaimVerifier<'_> {
    type Claim = ClaimSubmission;

    fn verify(&self, terms: &PolicyTerms, claim: &ClaimSubmission) -> Verdict {
        verify_bytes(self.srs, terms, &claim.proof, &claim.meta, &self.rsp_key)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ledger {
    accounts: BTreeMap<String, u64>,
    policies: BTreeMap<String, PolicyRecord>,
    events: Vec<Event>,
}

impl Ledger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn balance(&self, account: &str) -> u64 {
        self.accounts.get(account).copied().unwrap_or(0)
    }

    pub fn balances(&self) -> &BTreeMap<String, u64> {
        &self.accounts
    }

    pub fn policy(&self, id: &str) -> Option<&PolicyRecord> {
        self.policies.get(id)
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Accounts plus every escrow.
    pub fn total_value(&self) -> u128 {
        self.accounts.values().map(|v| *v as u128).sum::<u128>()
            + self.policies.values().map(PolicyRecord::escrow).sum::<u128>()
    }

    /// One JSON document per line.
    pub fn export_events(&self) -> String {
        self.events.iter().map(|e| serde_json::to_string(e).expect("events serialize") + "\n").collect()
    }

    fn log(&mut self, at: Timestamp, kind: EventKind) {
        let seq = self.events.len() as u64;
        log::info!("event {seq}: {kind:?}");
        self.events.push(Event { seq, at, kind });
    }

    /// Mints an initial balance; the only operation that changes the total.
    pub fn endow(&mut self, account: &str, amount: u64, at: Timestamp) -> Result<(), LedgerError> {
        let bal = self.accounts.entry(account.to_string()).or_insert(0);
        *bal = bal.checked_add(amount).ok_or(LedgerError::Overflow)?;
        self.log(at, EventKind::Endowed { account: account.to_string(), amount });
        Ok(())
    }

    pub fn create_policy(
        &mut self,
        terms: PolicyTerms,
        srs_digest: String,
        rsp_public_key: String,
        at: Timestamp,
    ) -> Result<String, LedgerError> {
        terms.validate()?;
        let id = terms.policy_id.clone();
        if self.policies.contains_key(&id) {
            return Err(LedgerError::DuplicatePolicy(id));
        }
        for party in [&terms.insurer, &terms.insuree] {
            if !self.accounts.contains_key(party) {
                return Err(LedgerError::UnknownAccount(party.clone()));
            }
        }
        let record = PolicyRecord {
            terms,
            state: PolicyState::Created,
            premium_escrow: 0,
            sum_insured_escrow: 0,
            premium_paid: false,
            sum_insured_paid: false,
            srs_digest,
            rsp_public_key,
        };
        self.policies.insert(id.clone(), record);
        self.log(at, EventKind::PolicyCreated { policy_id: id.clone() });
        Ok(id)
    }

    fn record(&self, id: &str) -> Result<&PolicyRecord, LedgerError> {
        self.policies.get(id).ok_or_else(|| LedgerError::UnknownPolicy(id.to_string()))
    }

    fn credit(&mut self, account: &str, amount: u64) -> Result<(), LedgerError> {
        let bal = self.accounts.entry(account.to_string()).or_insert(0);
        *bal = bal.checked_add(amount).ok_or(LedgerError::Overflow)?;
        Ok(())
    }

    /// The insuree pays exactly the premium, the insurer exactly the sum
    /// insured; the policy becomes active once both legs are in escrow.
    pub fn fund(&mut self, id: &str, party: &str, amount: u64, now: Timestamp) -> Result<PolicyState, LedgerError> {
        let rec = self.record(id)?;
        if !matches!(rec.state, PolicyState::Created | PolicyState::Funded) {
            return Err(LedgerError::WrongState { state: rec.state, reason: "funding".into() });
        }
        if now >= rec.terms.expiry {
            return Err(LedgerError::Expired { expiry: rec.terms.expiry.0, now: now.0 });
        }
        let is_insuree = party == rec.terms.insuree;
        let (expected, already) = if is_insuree {
            (rec.terms.premium, rec.premium_paid)
        } else if party == rec.terms.insurer {
            (rec.terms.sum_insured, rec.sum_insured_paid)
        } else {
            return Err(LedgerError::NotAParty { policy_id: id.into(), party: party.into() });
        };
        if already {
            return Err(LedgerError::WrongState { state: rec.state, reason: format!("{party} already funded") });
        }
        if amount != expected {
            return Err(LedgerError::WrongAmount { expected, got: amount });
        }
        let balance = self.balance(party);
        if balance < amount {
            return Err(LedgerError::InsufficientBalance { account: party.into(), balance, needed: amount });
        }

        *self.accounts.get_mut(party).expect("balance checked") -= amount;
        let rec = self.policies.get_mut(id).expect("checked");
        if is_insuree {
            rec.premium_escrow = amount;
            rec.premium_paid = true;
        } else {
            rec.sum_insured_escrow = amount;
            rec.sum_insured_paid = true;
        }
        rec.state = if rec.premium_paid && rec.sum_insured_paid { PolicyState::Active } else { PolicyState::Funded };
        let state = rec.state;
        self.log(now, EventKind::Funded { policy_id: id.into(), party: party.into(), amount });
        if state == PolicyState::Active {
            self.log(now, EventKind::Activated { policy_id: id.into() });
        }
        Ok(state)
    }

    /// Verifies a claim on an active policy. Acceptance pays the sum insured to
    /// the insuree and the premium to the insurer; rejection only logs.
    pub fn submit_claim<V: ClaimVerifier>(
        &mut self,
        id: &str,
        claim: &V::Claim,
        verifier: &V,
        now: Timestamp,
    ) -> Result<ClaimOutcome, LedgerError> {
        let rec = self.record(id)?;
        if rec.state != PolicyState::Active {
            return Err(LedgerError::WrongState { state: rec.state, reason: "claims need an active policy".into() });
        }
        if now >= rec.terms.expiry {
            return Err(LedgerError::Expired { expiry: rec.terms.expiry.0, now: now.0 });
        }
        let verdict = verifier.verify(&rec.terms, claim);
        if !verdict.accepted {
            let reason = verdict.reason.map(|r| r.to_string()).unwrap_or_default();
            self.log(now, EventKind::ClaimRejected { policy_id: id.into(), reason });
            return Ok(ClaimOutcome { verdict, state: PolicyState::Active });
        }

        let rec = self.policies.get(id).expect("checked").clone();
        self.credit(&rec.terms.insuree, rec.sum_insured_escrow)?;
        self.credit(&rec.terms.insurer, rec.premium_escrow)?;
        let stored = self.policies.get_mut(id).expect("checked");
        stored.premium_escrow = 0;
        stored.sum_insured_escrow = 0;
        stored.state = PolicyState::PaidOut;
        self.log(now, EventKind::ClaimAccepted { policy_id: id.into() });
        self.log(
            now,
            EventKind::PaidOut {
                policy_id: id.into(),
                insuree: rec.terms.insuree.clone(),
                sum_insured: rec.sum_insured_escrow,
                insurer: rec.terms.insurer.clone(),
                premium: rec.premium_escrow,
            },
        );
        Ok(ClaimOutcome { verdict, state: PolicyState::PaidOut })
    }

    /// Past expiry: an active policy releases both legs to the insurer; a
    /// half-funded one refunds the single leg to whoever paid it; an unfunded
    /// one closes.
    pub fn expire(&mut self, id: &str, now: Timestamp) -> Result<PolicyState, LedgerError> {
        let rec = self.record(id)?.clone();
        if rec.state.is_terminal() {
            return Err(LedgerError::WrongState { state: rec.state, reason: "policy already settled".into() });
        }
        if now < rec.terms.expiry {
            return Err(LedgerError::NotExpired { expiry: rec.terms.expiry.0, now: now.0 });
        }
        let terms = &rec.terms;
        let next = match rec.state {
            PolicyState::Active => {
                self.credit(&terms.insurer, rec.premium_escrow)?;
                self.credit(&terms.insurer, rec.sum_insured_escrow)?;
                self.log(
                    now,
                    EventKind::Refunded {
                        policy_id: id.into(),
                        account: terms.insurer.clone(),
                        amount: rec.sum_insured_escrow,
                    },
                );
                PolicyState::Expired
            }
            PolicyState::Funded => {
                if rec.premium_paid {
                    self.credit(&terms.insuree, rec.premium_escrow)?;
                    self.log(
                        now,
                        EventKind::Refunded {
                            policy_id: id.into(),
                            account: terms.insuree.clone(),
                            amount: rec.premium_escrow,
                        },
                    );
                }
                if rec.sum_insured_paid {
                    self.credit(&terms.insurer, rec.sum_insured_escrow)?;
                    self.log(
                        now,
                        EventKind::Refunded {
                            policy_id: id.into(),
                            account: terms.insurer.clone(),
                            amount: rec.sum_insured_escrow,
                        },
                    );
                }
                PolicyState::Expired
            }
            _ => PolicyState::Closed,
        };
        let stored = self.policies.get_mut(id).expect("checked");
        stored.premium_escrow = 0;
        stored.sum_insured_escrow = 0;
        stored.state = next;
        let kind = if next == PolicyState::Closed {
            EventKind::Closed { policy_id: id.into() }
        } else {
            EventKind::Expired { policy_id: id.into() }
        };
        self.log(now, kind);
        Ok(next)
    }
}
