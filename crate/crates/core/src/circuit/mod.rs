//! Arithmetization of the claim predicate.
//!
//! The witness is three vectors `a, b, c` of length `L` with `a ∘ b = c`,
//! plus seven linear constraints `a·u_q + b·v_q + c·w_q = k_q`. Witness entry
//! `i` (0-based) sits at exponent `i + 1` of `r(X, Y)`.
//!
//! Layout, with `N` pixels, `T` samples and `M` range bits:
//!
//! | block          | offset          | a                 | b        | c    |
//! |----------------|-----------------|-------------------|----------|------|
//! | upper, sample t| `2N·t`          | `L_t`, then `f_t` | 0        | 0    |
//! | M1(t)          | `2TN + tN`      | `f_t`             | `L_t`    | `D1` |
//! | M2(t)          | `3TN + tN`      | `D1`              | `σ0`     | `D2` |
//! | M3(t)          | `4TN + tN`      | `U + σ1 - D2`     | 1        | `K`  |
//! | M4(t)          | `5TN + tN`      | `K`               | `Gcs_t`  | `D3` |
//! | P1             | `6TN`           | `D4 = Σ_t D3`     | `1/ΣGcs` | `D5` |
//! | P2             | `6TN + N`       | `D5`              | `Gprd`   | `D6` |
//! | bits           | `6TN + 2N`      | `B`               | `1 - B`  | 0    |
//! | total          | `L - 2`         | `G`               | 0        | 0    |
//! | gap            | `L - 1`         | `Θ - G`           | 0        | 0    |

mod constraints;
mod polys;
mod witness;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ssi_model::ModelError;

pub use constraints::{
    build_linear_constraints, check_constraints_direct, derive_challenge_vectors, violations, ChallengeVectors,
    LinearConstraintSet, Violation,
};
pub use polys::{build_polynomials, k_poly, r_poly, s_eval, s_x_poly, split_r, t_poly, ConstraintPolynomials};
pub use witness::{assign_unchecked, build_witness, WitnessVectors};

/// Number of linear constraints.
pub const Q: usize = 7;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("claim is not payable: no range-proof witness exists")]
    WitnessUnavailable,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CircuitShape {
    pub n_pixels: usize,
    pub n_samples: usize,
    pub m_bits: usize,
}

impl CircuitShape {
    pub fn new(n_pixels: usize, n_samples: usize, m_bits: usize) -> Self {
        Self { n_pixels, n_samples, m_bits }
    }

    /// `L = 6TN + 2N + M + 2`.
    pub fn witness_len(&self) -> usize {
        6 * self.n_samples * self.n_pixels + 2 * self.n_pixels + self.m_bits + 2
    }

    fn tn(&self) -> usize {
        self.n_samples * self.n_pixels
    }

    pub fn upper_radiance(&self, t: usize) -> usize {
        2 * self.n_pixels * t
    }

    pub fn upper_calibration(&self, t: usize) -> usize {
        2 * self.n_pixels * t + self.n_pixels
    }

    /// Start of the multiplication block `k` (1..=4) of sample `t`.
    pub fn mult(&self, k: usize, t: usize) -> usize {
        debug_assert!((1..=4).contains(&k));
        (k + 1) * self.tn() + t * self.n_pixels
    }

    pub fn p1(&self) -> usize {
        6 * self.tn()
    }

    pub fn p2(&self) -> usize {
        6 * self.tn() + self.n_pixels
    }

    pub fn bits(&self) -> usize {
        6 * self.tn() + 2 * self.n_pixels
    }

    pub fn total_slot(&self) -> usize {
        self.witness_len() - 2
    }

    pub fn gap_slot(&self) -> usize {
        self.witness_len() - 1
    }

    /// Length of `a_upper`, which is also the top exponent of `r_raw`.
    pub fn raw_len(&self) -> usize {
        2 * self.tn()
    }

    /// `8T + 4` challenge vectors.
    pub fn challenge_count(&self) -> usize {
        8 * self.n_samples + 4
    }

    /// Length of `r_i` (1-based): `M` for the last, `N` otherwise.
    pub fn challenge_len(&self, i: usize) -> usize {
        if i == self.challenge_count() {
            self.m_bits
        } else {
            self.n_pixels
        }
    }

    /// Smallest srs degree bound that holds `t(X, y)`: `4L + 8`.
    pub fn srs_degree(&self) -> usize {
        4 * self.witness_len() + 8
    }

    /// Largest positive exponent of `t(X, y)`: `3L`.
    pub fn srs_max(&self) -> usize {
        3 * self.witness_len()
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        if self.n_pixels == 0 || self.n_samples == 0 || self.m_bits == 0 || self.m_bits > 64 {
            return Err(CircuitError::DimensionMismatch(format!("degenerate shape {self:?}")));
        }
        Ok(())
    }
}
