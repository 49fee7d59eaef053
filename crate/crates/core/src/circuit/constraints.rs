use ark_ff::{One, Zero};
use sha2::{Digest, Sha256};

use super::{CircuitError, CircuitShape, WitnessVectors, Q};
use crate::field::{dot, fr_from_i128, fr_from_le_bytes_mod_order, Fr};
use crate::policy::PolicyTerms;

/// `r_1 .. r_{8T+4}`, stored 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChallengeVectors(pub Vec<Vec<Fr>>);

impl ChallengeVectors {
    /// `r_i`, 1-based.
    pub fn r(&self, i: usize) -> &[Fr] {
        &self.0[i - 1]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn zeros(shape: &CircuitShape) -> Self {
        Self((1..=shape.challenge_count()).map(|i| vec![Fr::zero(); shape.challenge_len(i)]).collect())
    }
}

/// SHA-256 in counter mode over `(seed, i, j)`.
pub fn derive_challenge_vectors(seed: &[u8], shape: &CircuitShape) -> ChallengeVectors {
    let vectors = (1..=shape.challenge_count())
        .map(|i| {
            (0..shape.challenge_len(i))
                .map(|j| {
                    let mut h = Sha256::new();
                    h.update(b"psei/challenge-vector");
                    h.update((seed.len() as u32).to_be_bytes());
                    h.update(seed);
                    h.update((i as u32).to_be_bytes());
                    h.update((j as u32).to_be_bytes());
                    fr_from_le_bytes_mod_order(&h.finalize().into())
                })
                .collect()
        })
        .collect();
    ChallengeVectors(vectors)
}

/// Seven constraints `a·u_q + b·v_q + c·w_q = k_q`, stored 0-based in `q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraintSet {
    pub shape: CircuitShape,
    pub u: Vec<Vec<Fr>>,
    pub v: Vec<Vec<Fr>>,
    pub w: Vec<Vec<Fr>>,
    pub k: Vec<Fr>,
    /// All challenges zero: the copy constraints carry no information.
    pub degenerate: bool,
}

pub fn build_linear_constraints(
    shape: &CircuitShape,
    policy: &PolicyTerms,
    challenges: &ChallengeVectors,
) -> Result<LinearConstraintSet, CircuitError> {
    shape.validate()?;
    policy.model.validate()?;
    let model = &policy.model;
    let (n, tc, m) = (shape.n_pixels, shape.n_samples, shape.m_bits);
    if model.pixel_count() != n || model.sample_count() != tc {
        return Err(CircuitError::DimensionMismatch(format!(
            "model has N={} T={}, shape has N={n} T={tc}",
            model.pixel_count(),
            model.sample_count()
        )));
    }
    if challenges.len() != shape.challenge_count()
        || (1..=challenges.len()).any(|i| challenges.r(i).len() != shape.challenge_len(i))
    {
        return Err(CircuitError::DimensionMismatch("challenge vectors do not match the shape".into()));
    }

    let len = shape.witness_len();
    let mut u = vec![vec![Fr::zero(); len]; Q];
    let mut v = vec![vec![Fr::zero(); len]; Q];
    let mut w = vec![vec![Fr::zero(); len]; Q];
    let mut k = vec![Fr::zero(); Q];

    let t_ = tc;
    let r = |i: usize| challenges.r(i);
    let add = |vec: &mut Vec<Fr>, start: usize, weights: &[Fr], sign: Fr| {
        for (j, x) in weights.iter().enumerate() {
            vec[start + j] += sign * x;
        }
    };
    let one = Fr::one();
    let neg = -one;

    let unit = Fr::from(model.scale);
    let s_inv = {
        use ark_ff::Field;
        Fr::from(model.clear_sky_sum()).inverse().expect("positive clear-sky sum")
    };
    let g_prd = Fr::from(model.g_prd);

    for t in 0..tc {
        let (r_f, r_l) = (r(t + 1), r(t_ + t + 1));
        let (r_d1, r_d2, r_k) = (r(2 * t_ + t + 1), r(3 * t_ + t + 1), r(4 * t_ + t + 1));
        let (r_s0, r_one, r_gcs) = (r(5 * t_ + t + 1), r(6 * t_ + t + 1), r(7 * t_ + t + 1));

        // q1: copies between the upper blocks and the multiplication chain
        add(&mut u[0], shape.upper_radiance(t), r_l, neg);
        add(&mut v[0], shape.mult(1, t), r_l, one);
        add(&mut u[0], shape.upper_calibration(t), r_f, neg);
        add(&mut u[0], shape.mult(1, t), r_f, one);
        add(&mut w[0], shape.mult(1, t), r_d1, one);
        add(&mut u[0], shape.mult(2, t), r_d1, neg);
        add(&mut w[0], shape.mult(2, t), r_d2, one);
        add(&mut u[0], shape.mult(3, t), r_d2, one);
        add(&mut w[0], shape.mult(3, t), r_k, one);
        add(&mut u[0], shape.mult(4, t), r_k, neg);
        for (j, x) in r_d2.iter().enumerate() {
            k[0] += *x * (unit + Fr::from(model.sigma1[j]));
        }

        // q2: D4 = sum_t D3
        add(&mut w[1], shape.mult(4, t), &vec![one; n], one);

        // q3: public constants in b, zero pins on b_upper
        let gcs = Fr::from(model.g_cs[t]);
        add(&mut v[2], shape.mult(2, t), r_s0, one);
        add(&mut v[2], shape.mult(3, t), r_one, one);
        add(&mut v[2], shape.mult(4, t), r_gcs, one);
        add(&mut v[2], shape.upper_radiance(t), r_l, one);
        add(&mut v[2], shape.upper_calibration(t), r_f, one);
        for j in 0..n {
            k[2] += r_s0[j] * Fr::from(model.sigma0[j]) + r_one[j] + r_gcs[j] * gcs;
        }
    }

    let (r_d5, r_sinv, r_prd, r_bits) = (r(8 * t_ + 1), r(8 * t_ + 2), r(8 * t_ + 3), r(8 * t_ + 4));
    add(&mut w[0], shape.p1(), r_d5, one);
    add(&mut u[0], shape.p2(), r_d5, neg);

    add(&mut u[1], shape.p1(), &vec![one; n], neg);

    add(&mut v[2], shape.p1(), r_sinv, one);
    add(&mut v[2], shape.p2(), r_prd, one);
    add(&mut w[2], shape.bits(), r_bits, one);
    v[2][shape.total_slot()] += r(2 * t_ + 1)[0];
    v[2][shape.gap_slot()] += r(3 * t_ + 1)[0];
    for j in 0..n {
        k[2] += r_sinv[j] * s_inv + r_prd[j] * g_prd;
    }

    // q4: G = sum D6
    u[3][shape.total_slot()] = neg;
    add(&mut w[3], shape.p2(), &vec![one; n], one);

    // q5: G + (Θ - G) = Θ
    u[4][shape.total_slot()] = one;
    u[4][shape.gap_slot()] = one;
    k[4] = fr_from_i128(policy.threshold());

    // q6: sum 2^i B_i = Θ - G - 1
    let mut pow = one;
    for i in 0..m {
        u[5][shape.bits() + i] = pow;
        pow.double_in_place();
    }
    u[5][shape.gap_slot()] = neg;
    k[5] = neg;

    // q7: B_i + (1 - B_i) = 1, challenge-weighted
    add(&mut u[6], shape.bits(), r_bits, one);
    add(&mut v[6], shape.bits(), r_bits, one);
    k[6] = r_bits.iter().sum();

    let degenerate = challenges.0.iter().flatten().all(|x| x.is_zero());
    if degenerate {
        log::warn!("all challenge vectors are zero; copy constraints are vacuous");
    }
    Ok(LinearConstraintSet { shape: *shape, u, v, w, k, degenerate })
}

use ark_ff::AdditiveGroup as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    /// `a_i b_i != c_i` at the 0-based row.
    Multiplication(usize),
    /// Linear constraint `q` (1-based) fails.
    Linear(usize),
    Length,
}

pub fn violations(w: &WitnessVectors, cs: &LinearConstraintSet) -> Vec<Violation> {
    let len = cs.shape.witness_len();
    if w.a.len() != len || w.b.len() != len || w.c.len() != len {
        return vec![Violation::Length];
    }
    let mut out: Vec<Violation> =
        (0..len).filter(|&i| w.a[i] * w.b[i] != w.c[i]).map(Violation::Multiplication).collect();
    for q in 0..Q {
        if dot(&w.a, &cs.u[q]) + dot(&w.b, &cs.v[q]) + dot(&w.c, &cs.w[q]) != cs.k[q] {
            out.push(Violation::Linear(q + 1));
        }
    }
    out
}

/// Non-succinct oracle: `a ∘ b = c` and all seven linear constraints.
pub fn check_constraints_direct(w: &WitnessVectors, cs: &LinearConstraintSet) -> bool {
    violations(w, cs).is_empty()
}
