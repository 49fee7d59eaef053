use ark_ff::Zero;
use sha2::{Digest, Sha256};

use crate::field::{fr_from_le_bytes_mod_order, fr_to_bytes, Fr};

const DOMAIN: &[u8] = b"psei/sonic-claim/v1";

/// Fiat-Shamir transcript over SHA-256. Every absorb appends
/// `label ‖ u32-be(len) ‖ payload`; every derived challenge is absorbed back.
#[derive(Clone)]
pub struct Transcript {
    state: Sha256,
}

impl Default for Transcript {
    fn default() -> Self {
        Self::new()
    }
}

impl Transcript {
    pub fn new() -> Self {
        let mut t = Self { state: Sha256::new() };
        t.absorb(b"domain", DOMAIN);
        t
    }

    pub fn absorb(&mut self, label: &[u8], payload: &[u8]) {
        self.state.update(label);
        self.state.update((payload.len() as u32).to_be_bytes());
        self.state.update(payload);
    }

    /// 32 challenge bytes, absorbed back under `label`.
    pub fn challenge_bytes(&mut self, label: &[u8]) -> [u8; 32] {
        let mut h = self.state.clone();
        h.update(b"challenge");
        h.update(label);
        let out: [u8; 32] = h.finalize().into();
        self.absorb(label, &out);
        out
    }

    /// Non-zero field challenge: hash bytes read little-endian mod `p`.
    pub fn challenge_scalar(&mut self, label: &[u8]) -> Fr {
        loop {
            let v = fr_from_le_bytes_mod_order(&self.challenge_bytes(label));
            if !v.is_zero() {
                return v;
            }
        }
    }

    pub fn absorb_scalar(&mut self, label: &[u8], v: &Fr) {
        self.absorb(label, &fr_to_bytes(v));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_label_separated() {
        let mut a = Transcript::new();
        let mut b = Transcript::new();
        a.absorb(b"x", b"payload");
        b.absorb(b"x", b"payload");
        let (mut a2, mut b2) = (a.clone(), b.clone());
        assert_eq!(a.challenge_scalar(b"y"), b.challenge_scalar(b"y"));
        assert_ne!(a2.challenge_scalar(b"y"), b2.challenge_scalar(b"z"));
    }

    #[test]
    fn single_byte_changes_the_challenge() {
        let base = [7u8; 48];
        let mut t0 = Transcript::new();
        t0.absorb(b"c", &base);
        let c0 = t0.challenge_scalar(b"y");
        for i in 0..100 {
            let mut m = base;
            m[i % 48] ^= 1 << (i % 8);
            let mut t = Transcript::new();
            t.absorb(b"c", &m);
            assert_ne!(t.challenge_scalar(b"y"), c0);
        }
    }

    #[test]
    fn framing_is_unambiguous() {
        let mut a = Transcript::new();
        a.absorb(b"x", b"ab");
        a.absorb(b"x", b"c");
        let mut b = Transcript::new();
        b.absorb(b"x", b"a");
        b.absorb(b"x", b"bc");
        assert_ne!(a.challenge_scalar(b"y"), b.challenge_scalar(b"y"));
    }
}
