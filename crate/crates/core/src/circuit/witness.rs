use ark_ff::{Field, One, Zero};

use super::CircuitError;
use crate::field::{fr_from_i128, Fr};
use crate::policy::PolicyTerms;
use crate::ssi_model::{evaluate_claim, evaluate_ssi, RemoteSensingSample};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessVectors {
    pub a: Vec<Fr>,
    pub b: Vec<Fr>,
    pub c: Vec<Fr>,
}

impl WitnessVectors {
    pub fn zero(len: usize) -> Self {
        Self { a: vec![Fr::zero(); len], b: vec![Fr::zero(); len], c: vec![Fr::zero(); len] }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

/// Witness for a payable claim. Fails with
/// [`CircuitError::WitnessUnavailable`] when the claim is not payable.
pub fn build_witness(samples: &[RemoteSensingSample], policy: &PolicyTerms) -> Result<WitnessVectors, CircuitError> {
    let ssi = evaluate_ssi(samples, &policy.model)?;
    let decision = evaluate_claim(
        ssi.total_ssi,
        policy.expected_irradiation,
        policy.epsilon_bp,
        policy.m_bits,
        policy.model.scale,
    )?;
    if !decision.payable {
        return Err(CircuitError::WitnessUnavailable);
    }
    assign_unchecked(samples, policy)
}

/// Fills every slot from the data even when the claim is not payable; `B`
/// then holds the low `M` bits of `Θ - G - 1`, which cannot satisfy the
/// recomposition constraint.
pub fn assign_unchecked(samples: &[RemoteSensingSample], policy: &PolicyTerms) -> Result<WitnessVectors, CircuitError> {
    let model = &policy.model;
    model.validate()?;
    let shape = policy.shape();
    shape.validate()?;
    let (n, t_count) = (shape.n_pixels, shape.n_samples);
    if samples.len() != t_count {
        return Err(CircuitError::DimensionMismatch(format!("{} samples, policy expects {t_count}", samples.len())));
    }
    for s in samples {
        s.validate()?;
        if s.pixel_count() != n {
            return Err(CircuitError::DimensionMismatch(format!("{} pixels, policy expects {n}", s.pixel_count())));
        }
    }

    let mut w = WitnessVectors::zero(shape.witness_len());
    let unit = Fr::from(model.scale);
    let s_inv = Fr::from(model.clear_sky_sum()).inverse().expect("positive clear-sky sum");
    let g_prd = Fr::from(model.g_prd);
    let mut d4 = vec![Fr::zero(); n];

    for (t, sample) in samples.iter().enumerate() {
        let gcs = Fr::from(model.g_cs[t]);
        for (j, d4) in d4.iter_mut().enumerate() {
            let l = Fr::from(sample.radiance[j]);
            let f = Fr::from(sample.calibration[j]);
            w.a[shape.upper_radiance(t) + j] = l;
            w.a[shape.upper_calibration(t) + j] = f;

            let d1 = f * l;
            set(&mut w, shape.mult(1, t) + j, f, l, d1);
            let s0 = Fr::from(model.sigma0[j]);
            let d2 = d1 * s0;
            set(&mut w, shape.mult(2, t) + j, d1, s0, d2);
            let k = unit + Fr::from(model.sigma1[j]) - d2;
            set(&mut w, shape.mult(3, t) + j, k, Fr::one(), k);
            let d3 = k * gcs;
            set(&mut w, shape.mult(4, t) + j, k, gcs, d3);
            *d4 += d3;
        }
    }

    let mut total = Fr::zero();
    for (j, d4) in d4.into_iter().enumerate() {
        let d5 = d4 * s_inv;
        set(&mut w, shape.p1() + j, d4, s_inv, d5);
        let d6 = d5 * g_prd;
        set(&mut w, shape.p2() + j, d5, g_prd, d6);
        total += d6;
    }

    let threshold = policy.threshold();
    let total_int = evaluate_ssi(samples, model)?.total_ssi;
    let below = threshold - total_int - 1;
    for i in 0..shape.m_bits {
        let bit = (below >> i) & 1 == 1;
        let (bv, nb) = if bit { (Fr::one(), Fr::zero()) } else { (Fr::zero(), Fr::one()) };
        set(&mut w, shape.bits() + i, bv, nb, Fr::zero());
    }
    w.a[shape.total_slot()] = total;
    w.a[shape.gap_slot()] = fr_from_i128(threshold) - total;
    Ok(w)
}

fn set(w: &mut WitnessVectors, i: usize, a: Fr, b: Fr, c: Fr) {
    w.a[i] = a;
    w.b[i] = b;
    w.c[i] = c;
}
