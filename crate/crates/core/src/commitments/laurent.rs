use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use ark_ff::{Field, One, Zero};

use crate::field::{fr_pow_signed, Fr};

/// A Laurent polynomial in one indeterminate, stored densely from its lowest
/// exponent upwards. The zero polynomial has no coefficients.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct LaurentPolynomial {
    offset: i64,
    coeffs: Vec<Fr>,
}

impl fmt::Debug for LaurentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self.terms().map(|(e, c)| format!("{c}·X^{e}")).collect();
        write!(f, "LaurentPolynomial[{}]", terms.join(" + "))
    }
}

impl LaurentPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(exponent: i64, coeff: Fr) -> Self {
        Self::from_dense(exponent, vec![coeff])
    }

    /// Coefficients `coeffs[k]` belong to `X^(offset + k)`.
    pub fn from_dense(offset: i64, coeffs: Vec<Fr>) -> Self {
        let mut p = Self { offset, coeffs };
        p.normalize();
        p
    }

    /// Builds from `(exponent, coefficient)` pairs; repeated exponents add up.
    pub fn from_terms<I: IntoIterator<Item = (i64, Fr)>>(terms: I) -> Self {
        let terms: Vec<(i64, Fr)> = terms.into_iter().collect();
        let Some(lo) = terms.iter().map(|t| t.0).min() else {
            return Self::zero();
        };
        let hi = terms.iter().map(|t| t.0).max().unwrap();
        let mut coeffs = vec![Fr::zero(); (hi - lo + 1) as usize];
        for (e, c) in terms {
            coeffs[(e - lo) as usize] += c;
        }
        Self::from_dense(lo, coeffs)
    }

    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.offset += lead as i64;
        }
        if self.coeffs.is_empty() {
            self.offset = 0;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_degree(&self) -> Option<i64> {
        (!self.is_zero()).then_some(self.offset)
    }

    pub fn max_degree(&self) -> Option<i64> {
        (!self.is_zero()).then(|| self.offset + self.coeffs.len() as i64 - 1)
    }

    pub fn coeff(&self, exponent: i64) -> Fr {
        let k = exponent - self.offset;
        if k < 0 {
            return Fr::zero();
        }
        self.coeffs.get(k as usize).copied().unwrap_or_default()
    }

    pub fn constant_term(&self) -> Fr {
        self.coeff(0)
    }

    /// Non-zero terms in ascending exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, Fr)> + '_ {
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(move |(k, c)| (self.offset + k as i64, *c))
    }

    pub fn scale(&self, s: Fr) -> Self {
        Self::from_dense(self.offset, self.coeffs.iter().map(|c| *c * s).collect())
    }

    /// `p(X) -> p(c·X)`: the coefficient of `X^e` is multiplied by `c^e`.
    pub fn substitute_scaled(&self, c: Fr) -> Option<Self> {
        if self.is_zero() {
            return Some(Self::zero());
        }
        if c.is_zero() {
            return None;
        }
        let mut pw = fr_pow_signed(c, self.offset);
        let mut out = Vec::with_capacity(self.coeffs.len());
        for v in &self.coeffs {
            out.push(*v * pw);
            pw *= c;
        }
        Some(Self::from_dense(self.offset, out))
    }

    /// Evaluates at `z`; `None` when `z = 0` and a negative power is present.
    pub fn evaluate(&self, z: Fr) -> Option<Fr> {
        if self.is_zero() {
            return Some(Fr::zero());
        }
        if z.is_zero() {
            return if self.offset < 0 { None } else { Some(self.coeff(0)) };
        }
        let horner = self.coeffs.iter().rev().fold(Fr::zero(), |acc, c| acc * z + c);
        Some(horner * fr_pow_signed(z, self.offset))
    }

    /// Quotient `(f(X) - f(z)) / (X - z)` together with `f(z)`; `z` must be
    /// non-zero. The quotient's exponents lie in
    /// `[min(min_degree, 0), max_degree - 1]`.
    pub fn divide_by_linear(&self, z: Fr) -> Option<(Self, Fr)> {
        if self.is_zero() {
            return Some((Self::zero(), Fr::zero()));
        }
        let z_inv = z.inverse()?;
        let value = self.evaluate(z)?;
        let mut terms: Vec<(i64, Fr)> = Vec::new();

        // Non-negative part: synthetic division by (X - z).
        if let Some(hi) = self.max_degree().filter(|h| *h >= 1) {
            let mut carry = Fr::zero();
            for e in (1..=hi).rev() {
                carry = carry * z + self.coeff(e);
                terms.push((e - 1, carry));
            }
        }

        // Negative part: with U = 1/X, G(U) = sum c_{-m} U^m and
        // (G(U) - G(u)) / (X - z) = -(1/(X z)) * (G(U) - G(u)) / (U - u).
        if self.offset < 0 {
            let deepest = -self.offset;
            let mut carry = Fr::zero();
            for m in (1..=deepest).rev() {
                carry = carry * z_inv + self.coeff(-m);
                // carry is the coefficient of U^(m-1) of H(U); it lands on X^(-m).
                terms.push((-m, -carry * z_inv));
            }
        }
        Some((Self::from_terms(terms), value))
    }
}

impl Add for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn add(self, rhs: &LaurentPolynomial) -> LaurentPolynomial {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let lo = self.offset.min(rhs.offset);
        let hi = self.max_degree().unwrap().max(rhs.max_degree().unwrap());
        let coeffs = (lo..=hi).map(|e| self.coeff(e) + rhs.coeff(e)).collect();
        LaurentPolynomial::from_dense(lo, coeffs)
    }
}

impl Neg for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn neg(self) -> LaurentPolynomial {
        self.scale(-Fr::one())
    }
}

impl Sub for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn sub(self, rhs: &LaurentPolynomial) -> LaurentPolynomial {
        self + &(-rhs)
    }
}

impl Mul for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn mul(self, rhs: &LaurentPolynomial) -> LaurentPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return LaurentPolynomial::zero();
        }
        let mut out = vec![Fr::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += *a * b;
            }
        }
        LaurentPolynomial::from_dense(self.offset + rhs.offset, out)
    }
}
