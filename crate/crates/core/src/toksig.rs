//! One-bit tokenized signatures from coset states.
//!
//! The token is |A_{s,s'}⟩. Signing 0 measures it in the computational basis
//! (landing in A+s); signing 1 measures it in the Hadamard basis (landing in
//! A⊥+s'). The public key holds membership programs for both cosets.

use alloc::vec::Vec;

use rand::Rng;

use crate::gf2::{BitVector, Coset, HiddenCoset};
use crate::obf::{io_stub, membership_program, membership_size, ObfProgram};
use crate::qsim::{prepare_coset_state, StateVector, MAX_QUBITS};
use crate::{Error, Result};

/// Secret key (A, s, s').
pub type TsSecretKey = HiddenCoset;

/// Transparent description of a public key: the two accepted cosets.
///
/// Stubs hide nothing, so this is all a public key consists of.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TsPublicKeyDescriptor {
    pub n: usize,
    pub padded_size: usize,
    pub c0: Coset,
    pub c1: Coset,
}

#[derive(Clone, Debug)]
pub struct TsPublicKey {
    pub c0: ObfProgram<bool>,
    pub c1: ObfProgram<bool>,
    descriptor: TsPublicKeyDescriptor,
}

impl TsPublicKey {
    pub fn from_descriptor(d: TsPublicKeyDescriptor) -> Result<Self> {
        if d.c0.n() != d.n || d.c1.n() != d.n {
            return Err(Error::Invalid("coset lengths disagree with n"));
        }
        let c0 = io_stub(&membership_program(&d.c0), d.padded_size)?;
        let c1 = io_stub(&membership_program(&d.c1), d.padded_size)?;
        Ok(TsPublicKey { c0, c1, descriptor: d })
    }

    pub fn descriptor(&self) -> &TsPublicKeyDescriptor {
        &self.descriptor
    }

    pub fn n(&self) -> usize {
        self.descriptor.n
    }

    pub fn program(&self, m: bool) -> &ObfProgram<bool> {
        if m {
            &self.c1
        } else {
            &self.c0
        }
    }
}

/// Public key for a secret key.
pub fn public_key(sk: &TsSecretKey) -> Result<TsPublicKey> {
    let n = sk.n();
    TsPublicKey::from_descriptor(TsPublicKeyDescriptor {
        n,
        padded_size: membership_size(n, n / 2),
        c0: sk.primal(),
        c1: sk.dual(),
    })
}

pub fn keygen<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<(TsSecretKey, TsPublicKey)> {
    if n % 2 != 0 || n == 0 {
        return Err(Error::Invalid("n must be even and positive"));
    }
    if n > MAX_QUBITS {
        return Err(Error::MemoryGuard { qubits: n, max: MAX_QUBITS });
    }
    let sk = HiddenCoset::sample(n, rng)?;
    let pk = public_key(&sk)?;
    Ok((sk, pk))
}

/// A signing token. It cannot be cloned.
#[derive(Debug)]
pub struct Token {
    state: StateVector,
    consumed: bool,
}

impl Token {
    /// Wraps an arbitrary state, e.g. one prepared by an adversary.
    pub fn from_state(state: StateVector) -> Self {
        Token { state, consumed: false }
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut StateVector {
        &mut self.state
    }

    pub fn into_state(self) -> StateVector {
        self.state
    }

    pub fn is_consumed(&self) -> bool {
        self.consumed
    }
}

pub fn token_gen(sk: &TsSecretKey) -> Result<Token> {
    Ok(Token::from_state(prepare_coset_state(&sk.a, &sk.s, &sk.s_prime)?))
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Signature {
    pub m: bool,
    pub sig: BitVector,
}

/// Signs one bit, consuming the token.
///
/// The collapsed state stays in the token: |sig⟩ after signing 0, H^{⊗n}|sig⟩
/// after signing 1 (a Hadamard-basis measurement).
pub fn sign<R: Rng + ?Sized>(m: bool, token: &mut Token, rng: &mut R) -> Result<Signature> {
    if token.consumed {
        return Err(Error::TokenConsumed);
    }
    token.consumed = true;
    if m {
        token.state.hadamard_all();
    }
    let sig = token.state.measure_all(rng).outcome;
    if m {
        token.state.hadamard_all();
    }
    Ok(Signature { m, sig })
}

pub fn verify(pk: &TsPublicKey, m: bool, sig: &BitVector) -> bool {
    sig.len() == pk.n() && pk.program(m).eval(sig)
}

/// Accepts a list of signatures on pairwise distinct messages.
pub fn verify_l(pk: &TsPublicKey, pairs: &[Signature]) -> bool {
    let mut seen: Vec<bool> = Vec::new();
    for p in pairs {
        if seen.contains(&p.m) {
            return false;
        }
        seen.push(p.m);
        if !verify(pk, p.m, &p.sig) {
            return false;
        }
    }
    true
}

fn coherent_check<R: Rng + ?Sized>(st: &mut StateVector, prog: &ObfProgram<bool>, rng: &mut R) -> bool {
    let n = st.n();
    st.coherent_predicate(|x| prog.eval(&BitVector::from_index(n, x)), rng).outcome
}

/// Checks that a token is still intact and hands it back.
///
/// Runs c0 coherently; if it passes, applies H^{⊗n}, runs c1 coherently and
/// undoes the Hadamard whatever c1 answered. A fresh token passes with
/// probability 1 and comes back unchanged.
pub fn revoke<R: Rng + ?Sized>(pk: &TsPublicKey, mut token: Token, rng: &mut R) -> (bool, Token) {
    if token.state.n() != pk.n() {
        return (false, token);
    }
    if !coherent_check(&mut token.state, &pk.c0, rng) {
        return (false, token);
    }
    token.state.hadamard_all();
    let ok = coherent_check(&mut token.state, &pk.c1, rng);
    token.state.hadamard_all();
    (ok, token)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::coset_contains;
    use crate::obf::{all_inputs, equiv_on_domain};
    use crate::qsim::{coset_state_direct, TOL};
    use crate::rng::from_seed;

    #[test]
    fn keygen_programs() {
        let mut rng = from_seed(21);
        for n in [2usize, 6, 12] {
            let (sk, pk) = keygen(n, &mut rng).unwrap();
            assert!(pk.c0.eval(&sk.s));
            assert!(pk.c1.eval(&sk.s_prime));
            let count = all_inputs(n).filter(|x| pk.c0.eval(x)).count();
            assert_eq!(count, 1 << (n / 2));
            let dual = sk.a.complement();
            let reference = ObfProgram::raw(n, 0, move |x: &BitVector| coset_contains(&dual, &sk.s_prime, x).unwrap());
            assert!(equiv_on_domain(&pk.c1, &reference, all_inputs(n)));
        }
        assert!(keygen(5, &mut rng).is_err());
    }

    #[test]
    fn tokens_are_coset_states() {
        let mut rng = from_seed(22);
        let (sk, _) = keygen(8, &mut rng).unwrap();
        let t1 = token_gen(&sk).unwrap();
        let t2 = token_gen(&sk).unwrap();
        let direct = coset_state_direct(&sk.a, &sk.s, &sk.s_prime).unwrap();
        assert!((t1.state().fidelity(&direct).unwrap() - 1.0).abs() < TOL);
        assert_eq!(t1.state(), t2.state());
    }

    #[test]
    fn sign_and_verify() {
        let mut rng = from_seed(23);
        for _ in 0..50 {
            let (sk, pk) = keygen(8, &mut rng).unwrap();
            let mut t0 = token_gen(&sk).unwrap();
            let mut t1 = token_gen(&sk).unwrap();
            let a = sign(false, &mut t0, &mut rng).unwrap();
            let b = sign(true, &mut t1, &mut rng).unwrap();
            assert!(verify(&pk, false, &a.sig));
            assert!(verify(&pk, true, &b.sig));
            assert!(verify_l(&pk, &[a.clone()]));
            assert!(!verify_l(&pk, &[a.clone(), a.clone()]));
            assert!(verify_l(&pk, &[a, b]));
            assert_eq!(sign(false, &mut t0, &mut rng), Err(Error::TokenConsumed));
        }
    }

    #[test]
    fn residue_after_sign_zero() {
        let mut rng = from_seed(24);
        for n in [4usize, 8, 10] {
            let (sk, pk) = keygen(n, &mut rng).unwrap();
            let mut t = token_gen(&sk).unwrap();
            sign(false, &mut t, &mut rng).unwrap();
            let mut st = t.into_state();
            st.hadamard_all();
            let p = st.probability(|x| pk.c1.eval(&BitVector::from_index(n, x)));
            assert!((p - libm::pow(2.0, -(n as f64) / 2.0)).abs() < TOL);
        }
    }

    #[test]
    fn revoke_fresh_and_basis_states() {
        let mut rng = from_seed(25);
        let (sk, pk) = keygen(8, &mut rng).unwrap();
        let t = token_gen(&sk).unwrap();
        let before = t.state().clone();
        let (ok, t) = revoke(&pk, t, &mut rng);
        assert!(ok);
        assert!((t.state().fidelity(&before).unwrap() - 1.0).abs() < TOL);

        // |0^n⟩ passes the first check iff 0 ∈ A+s; it is a basis state so
        // the Hadamard check then passes with probability 2^{-n/2}.
        let zero = Token::from_state(StateVector::zero(8).unwrap());
        let (ok, t) = revoke(&pk, zero, &mut rng);
        if !sk.a.contains(&sk.s) {
            assert!(!ok);
            assert_eq!(t.state(), &StateVector::zero(8).unwrap());
        }
    }

    #[test]
    fn revoke_after_sign_zero_rate() {
        let mut rng = from_seed(26);
        let n = 4;
        let trials = 20_000;
        let mut hits = 0;
        for _ in 0..trials {
            let (sk, pk) = keygen(n, &mut rng).unwrap();
            let mut t = token_gen(&sk).unwrap();
            sign(false, &mut t, &mut rng).unwrap();
            if revoke(&pk, t, &mut rng).0 {
                hits += 1;
            }
        }
        let p = 0.25;
        let sigma = libm::sqrt(p * (1.0 - p) / trials as f64);
        assert!((hits as f64 / trials as f64 - p).abs() < 4.0 * sigma);
    }
}
