//! Policy documents: every parameter the insurer and insuree agree on.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::circuit::CircuitShape;
use crate::ssi_model::{ModelError, ModelParams, Timestamp, MAX_RANGE_BITS};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolicyError {
    #[error("invalid policy terms: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Pixel-grid rectangle, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Area {
    pub row: u32,
    pub col: u32,
    pub rows: u32,
    pub cols: u32,
}

impl Area {
    pub fn pixel_count(&self) -> usize {
        self.rows as usize * self.cols as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Period {
    pub start: Timestamp,
    pub end: Timestamp,
    /// The `T` sampling instants, strictly increasing.
    pub sample_times: Vec<Timestamp>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyTerms {
    pub policy_id: String,
    pub insurer: String,
    pub insuree: String,
    pub dataset_id: String,
    pub area: Area,
    pub period: Period,
    /// Key id of the remote-sensing provider whose signatures are accepted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rsp_key_id: Option<String>,
    /// Expected irradiation `G_e` over the period.
    pub expected_irradiation: u64,
    /// Trigger threshold `epsilon`, in units of `model.scale`.
    pub epsilon_bp: u64,
    pub m_bits: u32,
    pub model: ModelParams,
    pub sum_insured: u64,
    pub premium: u64,
    pub expiry: Timestamp,
}

impl PolicyTerms {
    pub fn validate(&self) -> Result<(), PolicyError> {
        let bad = |m: String| Err(PolicyError::Invalid(m));
        self.model.validate()?;
        if self.policy_id.is_empty() {
            return bad("policy_id is empty".into());
        }
        if self.insurer == self.insuree {
            return bad("insurer and insuree must be different accounts".into());
        }
        if self.epsilon_bp > self.model.scale {
            return bad(format!("epsilon_bp {} exceeds scale {}", self.epsilon_bp, self.model.scale));
        }
        if self.m_bits == 0 || self.m_bits > MAX_RANGE_BITS {
            return bad(format!("m_bits {} outside 1..={MAX_RANGE_BITS}", self.m_bits));
        }
        if self.area.pixel_count() == 0 {
            return bad("empty area".into());
        }
        if self.area.pixel_count() != self.model.pixel_count() {
            return bad(format!(
                "area covers {} pixels but the model has {}",
                self.area.pixel_count(),
                self.model.pixel_count()
            ));
        }
        let times = &self.period.sample_times;
        if times.len() != self.model.sample_count() {
            return bad(format!("{} sample times but {} clear-sky values", times.len(), self.model.sample_count()));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return bad("sample times must be strictly increasing".into());
        }
        if self.period.start > self.period.end {
            return bad("period starts after it ends".into());
        }
        if times.iter().any(|t| *t < self.period.start || *t > self.period.end) {
            return bad("sample time outside the period".into());
        }
        if self.expiry <= self.period.end {
            return bad("expiry must be after the period end".into());
        }
        if self.sum_insured == 0 {
            return bad("sum insured must be positive".into());
        }
        Ok(())
    }

    /// `floor(G_e * epsilon / S)`.
    pub fn threshold(&self) -> i128 {
        self.expected_irradiation as i128 * self.epsilon_bp as i128 / self.model.scale.max(1) as i128
    }

    pub fn shape(&self) -> CircuitShape {
        CircuitShape::new(self.model.pixel_count(), self.model.sample_count(), self.m_bits as usize)
    }

    /// SHA-256 of the canonical JSON document.
    pub fn policy_hash(&self) -> [u8; 32] {
        Sha256::digest(serde_json::to_vec(self).expect("policy serializes")).into()
    }
}
