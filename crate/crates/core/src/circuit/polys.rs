use ark_ff::{Field, One, Zero};

use super::{CircuitShape, LinearConstraintSet, WitnessVectors, Q};
use crate::commitments::LaurentPolynomial;
use crate::field::{fr_pow_signed, Fr};

/// `r(X, 1) = Σ a_i X^i + b_i X^{-i} + c_i X^{-i-L}` (1-based `i`).
pub fn r_poly(w: &WitnessVectors) -> LaurentPolynomial {
    let len = w.len() as i64;
    let mut terms = Vec::with_capacity(3 * w.len());
    for i in 0..w.len() {
        let e = i as i64 + 1;
        terms.push((e, w.a[i]));
        terms.push((-e, w.b[i]));
        terms.push((-e - len, w.c[i]));
    }
    LaurentPolynomial::from_terms(terms)
}

/// `k(Y) = Σ_q Y^{q+L} k_q`.
pub fn k_poly(cs: &LinearConstraintSet) -> LaurentPolynomial {
    let len = cs.shape.witness_len() as i64;
    LaurentPolynomial::from_terms(cs.k.iter().enumerate().map(|(q, k)| (q as i64 + 1 + len, *k)))
}

/// `Σ_q y^{q+L} x_q[i]` for every witness row.
fn fold_y(rows: &[Vec<Fr>], y_pows: &[Fr]) -> Vec<Fr> {
    let len = rows[0].len();
    (0..len).map(|i| (0..Q).map(|q| y_pows[q] * rows[q][i]).sum()).collect()
}

fn y_constraint_powers(y: Fr, len: usize) -> Vec<Fr> {
    let base = y.pow([len as u64 + 1]);
    std::iter::successors(Some(base), |p| Some(*p * y)).take(Q).collect()
}

/// `s(X, y)` as a polynomial in `X`, for non-zero `y`:
/// `Σ u_i(y) X^{-i} + v_i(y) X^i + w_i(y) X^{i+L}` with
/// `w_i(Y) = -Y^i - Y^{-i} + Σ_q Y^{q+L} w_{q,i}`.
pub fn s_x_poly(cs: &LinearConstraintSet, y: Fr) -> Option<LaurentPolynomial> {
    let y_inv = y.inverse()?;
    let len = cs.shape.witness_len();
    let yq = y_constraint_powers(y, len);
    let (u, v, w) = (fold_y(&cs.u, &yq), fold_y(&cs.v, &yq), fold_y(&cs.w, &yq));
    let mut terms = Vec::with_capacity(3 * len);
    let (mut yp, mut yn) = (Fr::one(), Fr::one());
    for i in 0..len {
        yp *= y;
        yn *= y_inv;
        let e = i as i64 + 1;
        terms.push((-e, u[i]));
        terms.push((e, v[i]));
        terms.push((e + len as i64, w[i] - yp - yn));
    }
    Some(LaurentPolynomial::from_terms(terms))
}

/// Direct evaluation of `s(x, y)`, as the verifier computes it.
pub fn s_eval(cs: &LinearConstraintSet, x: Fr, y: Fr) -> Option<Fr> {
    let (x_inv, y_inv) = (x.inverse()?, y.inverse()?);
    let len = cs.shape.witness_len();
    let yq = y_constraint_powers(y, len);
    let x_l = x.pow([len as u64]);
    let mut acc = Fr::zero();
    let (mut xp, mut xn, mut yp, mut yn) = (Fr::one(), Fr::one(), Fr::one(), Fr::one());
    for i in 0..len {
        xp *= x;
        xn *= x_inv;
        yp *= y;
        yn *= y_inv;
        let (mut ui, mut vi, mut wi) = (Fr::zero(), Fr::zero(), -yp - yn);
        for (q, yq) in yq.iter().enumerate() {
            ui += *yq * cs.u[q][i];
            vi += *yq * cs.v[q][i];
            wi += *yq * cs.w[q][i];
        }
        acc += ui * xn + vi * xp + wi * xp * x_l;
    }
    Some(acc)
}

/// `t(X, y) = r(X, 1)·(r(X, y) + s(X, y)) - k(y)`; `r` may include blinding terms.
pub fn t_poly(r: &LaurentPolynomial, cs: &LinearConstraintSet, y: Fr) -> Option<LaurentPolynomial> {
    let r_y = r.substitute_scaled(y)?;
    let s = s_x_poly(cs, y)?;
    let k = k_poly(cs).evaluate(y)?;
    Some(&(r * &(&r_y + &s)) - &LaurentPolynomial::monomial(0, k))
}

/// `(r_raw, r_local)`: `r_raw` holds exactly the `a_upper` terms
/// (`L_t` then `f_t` per sample), `r_local = r - r_raw`.
pub fn split_r(w: &WitnessVectors, shape: &CircuitShape) -> (LaurentPolynomial, LaurentPolynomial) {
    let raw = LaurentPolynomial::from_terms((0..shape.raw_len()).map(|i| (i as i64 + 1, w.a[i])));
    let local = &r_poly(w) - &raw;
    (raw, local)
}

/// Public constraint data together with the prover's `r(X, 1)`.
#[derive(Debug, Clone)]
pub struct ConstraintPolynomials {
    pub constraints: LinearConstraintSet,
    pub r: LaurentPolynomial,
}

impl ConstraintPolynomials {
    pub fn k_at(&self, y: Fr) -> Option<Fr> {
        k_poly(&self.constraints).evaluate(y)
    }

    pub fn s_at(&self, x: Fr, y: Fr) -> Option<Fr> {
        s_eval(&self.constraints, x, y)
    }

    /// `r(x, y) = r(xy, 1)`.
    pub fn r_at(&self, x: Fr, y: Fr) -> Option<Fr> {
        self.r.evaluate(x * y)
    }

    pub fn t(&self, y: Fr) -> Option<LaurentPolynomial> {
        t_poly(&self.r, &self.constraints, y)
    }
}

pub fn build_polynomials(w: &WitnessVectors, constraints: &LinearConstraintSet) -> ConstraintPolynomials {
    ConstraintPolynomials { constraints: constraints.clone(), r: r_poly(w) }
}

/// `x^e` for the signed exponents used in tests and the verifier.
#[allow(dead_code)]
pub(crate) fn pow(x: Fr, e: i64) -> Fr {
    fr_pow_signed(x, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_linear_constraints, build_witness, derive_challenge_vectors};
    use crate::field::dot;
    use crate::policy::fixtures::single_pixel;
    use crate::policy::PolicyTerms;
    use crate::ssi_model::{RemoteSensingSample, Timestamp};
    use ark_ff::UniformRand;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn instance() -> (PolicyTerms, WitnessVectors, LinearConstraintSet) {
        let mut p = single_pixel();
        p.model.sigma0 = vec![10_000];
        let s = [RemoteSensingSample { radiance: vec![1], calibration: vec![1], timestamp: Timestamp(10) }];
        let w = build_witness(&s, &p).unwrap();
        let cs = build_linear_constraints(&p.shape(), &p, &derive_challenge_vectors(b"poly", &p.shape())).unwrap();
        (p, w, cs)
    }

    /// Constant term written out from the witness directly:
    /// `Σ (a_i b_i - c_i)(y^i + y^{-i}) + Σ_q y^{q+L}(a·u_q + b·v_q + c·w_q - k_q)`.
    fn constant_term_oracle(w: &WitnessVectors, cs: &LinearConstraintSet, y: Fr) -> Fr {
        let len = w.len() as i64;
        let mut acc = Fr::zero();
        for i in 0..w.len() {
            let e = i as i64 + 1;
            acc += (w.a[i] * w.b[i] - w.c[i]) * (pow(y, e) + pow(y, -e));
        }
        for q in 0..Q {
            let lin = dot(&w.a, &cs.u[q]) + dot(&w.b, &cs.v[q]) + dot(&w.c, &cs.w[q]) - cs.k[q];
            acc += pow(y, q as i64 + 1 + len) * lin;
        }
        acc
    }

    #[test]
    fn honest_constant_term_vanishes() {
        let (_, w, cs) = instance();
        let r = r_poly(&w);
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for _ in 0..20 {
            let y = Fr::rand(&mut rng);
            assert_eq!(t_poly(&r, &cs, y).unwrap().constant_term(), Fr::zero());
        }
    }

    #[test]
    fn constant_term_matches_oracle_under_mutation() {
        let (_, w, cs) = instance();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for _ in 0..200 {
            let mut m = w.clone();
            let i = rng.gen_range(0..w.len());
            let d = Fr::rand(&mut rng);
            match rng.gen_range(0..3) {
                0 => m.a[i] += d,
                1 => m.b[i] += d,
                _ => m.c[i] += d,
            }
            let y = Fr::rand(&mut rng);
            let ct = t_poly(&r_poly(&m), &cs, y).unwrap().constant_term();
            assert_eq!(ct, constant_term_oracle(&m, &cs, y));
            assert_ne!(ct, Fr::zero());
        }
    }

    #[test]
    fn blinding_keeps_constant_term() {
        let (p, w, cs) = instance();
        let len = p.shape().witness_len() as i64;
        let mix = LaurentPolynomial::from_terms((1..=4).map(|i| (-2 * len - i, Fr::from(i as u64 + 7))));
        let r = &r_poly(&w) + &mix;
        let t = t_poly(&r, &cs, Fr::from(3u8)).unwrap();
        assert_eq!(t.constant_term(), Fr::zero());
        let shape = p.shape();
        assert!(t.min_degree().unwrap() >= -(shape.srs_degree() as i64));
        assert!(t.max_degree().unwrap() <= shape.srs_max() as i64);
    }

    #[test]
    fn s_evaluation_agrees_and_t_identity_holds() {
        let (_, w, cs) = instance();
        let polys = build_polynomials(&w, &cs);
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for _ in 0..50 {
            let (z, y) = (Fr::rand(&mut rng), Fr::rand(&mut rng));
            let s = polys.s_at(z, y).unwrap();
            assert_eq!(s, s_x_poly(&cs, y).unwrap().evaluate(z).unwrap());
            let lhs = polys.r.evaluate(z).unwrap() * (polys.r_at(z, y).unwrap() + s) - polys.k_at(y).unwrap();
            assert_eq!(lhs, polys.t(y).unwrap().evaluate(z).unwrap());
        }
    }

    #[test]
    fn split_r_examples() {
        let p = single_pixel();
        let s = [RemoteSensingSample { radiance: vec![4], calibration: vec![9], timestamp: Timestamp(10) }];
        let w = crate::circuit::assign_unchecked(&s, &p).unwrap();
        let (raw, local) = split_r(&w, &p.shape());
        assert_eq!(raw, LaurentPolynomial::from_terms([(1, Fr::from(4u8)), (2, Fr::from(9u8))]));
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let r = r_poly(&w);
        for _ in 0..50 {
            let z = Fr::rand(&mut rng);
            assert_eq!(raw.evaluate(z).unwrap() + local.evaluate(z).unwrap(), r.evaluate(z).unwrap());
        }
        let zero = [RemoteSensingSample { radiance: vec![0], calibration: vec![0], timestamp: Timestamp(10) }];
        let (raw, _) = split_r(&crate::circuit::assign_unchecked(&zero, &p).unwrap(), &p.shape());
        assert!(raw.is_zero());
    }
}
