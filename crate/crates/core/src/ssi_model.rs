//! Integer reference model of the surface-solar-irradiation (SSI) index and
//! the claim predicate.
//!
//! Every quantity is an integer. Fractional constants (the trigger threshold,
//! `sigma0`, `sigma1` and the unit constant of the clear-sky index) are stored
//! at one global fixed-point scale `S`, so the reference model and the claim
//! circuit compute bit-identical values. Arithmetic is checked `i128`; any
//! overflow is reported instead of wrapping.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default fixed-point scale (basis points).
pub const DEFAULT_SCALE: u64 = 10_000;

/// Largest supported range-proof width.
pub const MAX_RANGE_BITS: u32 = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("clear-sky sum {sum} does not divide period irradiation {g_prd}")]
    Inexact { sum: u128, g_prd: u64 },
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("value out of range: {0}")]
    Range(String),
}

/// Unix seconds, UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct Timestamp(pub i64);

/// Pre-computed model constants agreed in the policy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Per-pixel cloud-index gain, fixed-point at `scale`.
    pub sigma0: Vec<u64>,
    /// Per-pixel cloud-index offset, fixed-point at `scale`.
    pub sigma1: Vec<u64>,
    /// Clear-sky irradiation at each of the `T` sample instants.
    pub g_cs: Vec<u64>,
    /// Clear-sky irradiation over the whole period.
    pub g_prd: u64,
    /// Global fixed-point denominator `S`.
    pub scale: u64,
}

impl ModelParams {
    pub fn pixel_count(&self) -> usize {
        self.sigma0.len()
    }

    pub fn sample_count(&self) -> usize {
        self.g_cs.len()
    }

    pub fn clear_sky_sum(&self) -> u128 {
        self.g_cs.iter().map(|&v| v as u128).sum()
    }

    /// `g_prd / sum(g_cs)`; only meaningful once [`validate`](Self::validate) passed.
    pub fn period_ratio(&self) -> u128 {
        self.g_prd as u128 / self.clear_sky_sum()
    }

    /// Unit constant of the clear-sky index.
    pub fn unit(&self) -> i128 {
        self.scale as i128
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.sigma0.is_empty() {
            return Err(ModelError::InvalidParams("sigma0 must cover at least one pixel".into()));
        }
        if self.sigma0.len() != self.sigma1.len() {
            return Err(ModelError::DimensionMismatch { expected: self.sigma0.len(), found: self.sigma1.len() });
        }
        if self.g_cs.is_empty() {
            return Err(ModelError::InvalidParams("g_cs must hold at least one sample".into()));
        }
        if self.scale == 0 {
            return Err(ModelError::InvalidParams("scale must be positive".into()));
        }
        let sum = self.clear_sky_sum();
        if sum == 0 {
            return Err(ModelError::InvalidParams("g_cs must have a positive sum".into()));
        }
        if !(self.g_prd as u128).is_multiple_of(sum) {
            return Err(ModelError::Inexact { sum, g_prd: self.g_prd });
        }
        Ok(())
    }
}

/// One satellite observation of the insured area.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemoteSensingSample {
    /// Observed radiance `L_t`, one entry per pixel.
    pub radiance: Vec<u64>,
    /// Calibration coefficient `f_t`, one entry per pixel.
    pub calibration: Vec<u64>,
    pub timestamp: Timestamp,
}

impl RemoteSensingSample {
    pub fn pixel_count(&self) -> usize {
        self.radiance.len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.radiance.len() != self.calibration.len() {
            return Err(ModelError::DimensionMismatch { expected: self.radiance.len(), found: self.calibration.len() });
        }
        Ok(())
    }
}

/// Output of the SSI pipeline, with the per-sample intermediates the witness
/// builder needs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SsiResult {
    pub per_pixel_ssi: Vec<i128>,
    pub total_ssi: i128,
    /// `rho_t` per sample (outer) and pixel (inner).
    pub albedo: Vec<Vec<i128>>,
    /// `n_t`.
    pub cloud: Vec<Vec<i128>>,
    /// `K_t`.
    pub clear_sky: Vec<Vec<i128>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimDecision {
    pub payable: bool,
    /// `floor(g_e * epsilon / S)`.
    pub threshold: i128,
    /// `threshold - total`; positive exactly when payable.
    pub deficit: i128,
}

fn check_len(expected: usize, found: usize) -> Result<(), ModelError> {
    if expected != found {
        return Err(ModelError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `rho = f ∘ L`.
pub fn apparent_albedo(f: &[i128], l: &[i128]) -> Result<Vec<i128>, ModelError> {
    check_len(f.len(), l.len())?;
    f.iter().zip(l).map(|(a, b)| a.checked_mul(*b).ok_or(ModelError::Overflow("apparent albedo"))).collect()
}

/// `n = rho ∘ sigma0 - sigma1`.
pub fn cloud_index(rho: &[i128], params: &ModelParams) -> Result<Vec<i128>, ModelError> {
    check_len(params.pixel_count(), rho.len())?;
    check_len(params.sigma0.len(), params.sigma1.len())?;
    rho.iter()
        .zip(params.sigma0.iter().zip(&params.sigma1))
        .map(|(r, (s0, s1))| {
            r.checked_mul(*s0 as i128)
                .and_then(|v| v.checked_sub(*s1 as i128))
                .ok_or(ModelError::Overflow("cloud index"))
        })
        .collect()
}

/// `K = unit - n`. Negative values are kept: the relation is linear, not clamped.
pub fn clear_sky_index(n: &[i128], unit: i128) -> Result<Vec<i128>, ModelError> {
    n.iter().map(|v| unit.checked_sub(*v).ok_or(ModelError::Overflow("clear-sky index"))).collect()
}

/// Per-pixel `G_gnd = (sum_t K_t G_cs_t) * (g_prd / sum_t G_cs_t)`, with `k`
/// laid out as `T` rows of `N` pixels.
pub fn pixel_ssi(k: &[Vec<i128>], params: &ModelParams) -> Result<Vec<i128>, ModelError> {
    params.validate()?;
    check_len(params.sample_count(), k.len())?;
    let n = params.pixel_count();
    let ratio = i128::try_from(params.period_ratio()).map_err(|_| ModelError::Overflow("period ratio"))?;
    let mut acc = vec![0i128; n];
    for (row, &gcs) in k.iter().zip(&params.g_cs) {
        check_len(n, row.len())?;
        for (a, kv) in acc.iter_mut().zip(row) {
            let term = kv.checked_mul(gcs as i128).ok_or(ModelError::Overflow("K * G_cs"))?;
            *a = a.checked_add(term).ok_or(ModelError::Overflow("sum over samples"))?;
        }
    }
    acc.into_iter().map(|v| v.checked_mul(ratio).ok_or(ModelError::Overflow("pixel SSI"))).collect()
}

/// `G = sum G_gnd`.
pub fn total_ssi(per_pixel: &[i128]) -> Result<i128, ModelError> {
    per_pixel.iter().try_fold(0i128, |acc, v| acc.checked_add(*v)).ok_or(ModelError::Overflow("total SSI"))
}

/// Runs the whole pipeline over `T` samples.
pub fn evaluate_ssi(samples: &[RemoteSensingSample], params: &ModelParams) -> Result<SsiResult, ModelError> {
    params.validate()?;
    check_len(params.sample_count(), samples.len())?;
    let mut albedo = Vec::with_capacity(samples.len());
    let mut cloud = Vec::with_capacity(samples.len());
    let mut clear_sky = Vec::with_capacity(samples.len());
    for s in samples {
        s.validate()?;
        check_len(params.pixel_count(), s.pixel_count())?;
        let f: Vec<i128> = s.calibration.iter().map(|&v| v as i128).collect();
        let l: Vec<i128> = s.radiance.iter().map(|&v| v as i128).collect();
        let rho = apparent_albedo(&f, &l)?;
        let n = cloud_index(&rho, params)?;
        let k = clear_sky_index(&n, params.unit())?;
        albedo.push(rho);
        cloud.push(n);
        clear_sky.push(k);
    }
    let per_pixel_ssi = pixel_ssi(&clear_sky, params)?;
    let total_ssi = total_ssi(&per_pixel_ssi)?;
    Ok(SsiResult { per_pixel_ssi, total_ssi, albedo, cloud, clear_sky })
}

/// Claim predicate `G < floor(g_e * epsilon / S)`.
///
/// A payable deficit must be provable with an `m_bits` range proof on
/// `deficit - 1`, so deficits above `2^m_bits` are a policy misconfiguration.
pub fn evaluate_claim(
    total: i128,
    g_e: u64,
    epsilon_bp: u64,
    m_bits: u32,
    scale: u64,
) -> Result<ClaimDecision, ModelError> {
    if scale == 0 {
        return Err(ModelError::InvalidParams("scale must be positive".into()));
    }
    if epsilon_bp > scale {
        return Err(ModelError::Range(format!("epsilon {epsilon_bp} exceeds scale {scale}")));
    }
    if m_bits == 0 || m_bits > MAX_RANGE_BITS {
        return Err(ModelError::Range(format!("m_bits {m_bits} outside 1..={MAX_RANGE_BITS}")));
    }
    let threshold = (g_e as i128 * epsilon_bp as i128) / scale as i128;
    let deficit = threshold.checked_sub(total).ok_or(ModelError::Overflow("deficit"))?;
    let payable = total < threshold;
    if payable && deficit > 1i128 << m_bits {
        return Err(ModelError::Range(format!("deficit {deficit} exceeds the {m_bits}-bit range")));
    }
    Ok(ClaimDecision { payable, threshold, deficit })
}

/// LSB-first binary decomposition of `x` into exactly `m` bits.
pub fn bit_decompose(x: i128, m: u32) -> Result<Vec<bool>, ModelError> {
    if x < 0 {
        return Err(ModelError::Range(format!("cannot decompose negative value {x}")));
    }
    if m < 127 && x >= 1i128 << m {
        return Err(ModelError::Range(format!("{x} does not fit in {m} bits")));
    }
    Ok((0..m).map(|i| i < 127 && (x >> i) & 1 == 1).collect())
}
