//! Single-decryptor encryption.
//!
//! The decryption key is κ coset states. A ciphertext for `m` under a random
//! `r ∈ {0,1}^κ` is a program that outputs `m` exactly on tuples
//! `(u_1, …, u_κ)` with `u_i ∈ A_i + s_i` when `r_i = 0` and
//! `u_i ∈ A_i⊥ + s_i'` when `r_i = 1`.
//!
//! Decryption works register by register: Hadamard where `r_i = 1`, a
//! coherent membership check on each register, then the program's value,
//! then the Hadamards are undone. Every ciphertext therefore carries, next to
//! its program, the per-register predicates its program is a conjunction of.
//!
//! A second construction encrypts under a (transparent) witness-encryption
//! stub whose witnesses are tokenized signatures of the bits of `r`.

use alloc::{vec, vec::Vec};

use rand::Rng;

use crate::gf2::{canonical_rep, BitVector, HiddenCoset, Subspace};
use crate::obf::{cc_program, cc_sim_stub, io_stub, membership_size, CcProgram, ObfProgram, ProgramKind};
use crate::qsim::{StateVector, MAX_QUBITS};
use crate::toksig::{self, Token, TsPublicKey};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SdeSecretKey {
    pub n: usize,
    pub cosets: Vec<HiddenCoset>,
}

impl SdeSecretKey {
    pub fn kappa(&self) -> usize {
        self.cosets.len()
    }
}

/// Pairs (R_i^0, R_i^1) of membership programs, one pair per register.
#[derive(Clone, Debug)]
pub struct SdePublicKey {
    pub n: usize,
    pub registers: Vec<TsPublicKey>,
}

impl SdePublicKey {
    pub fn kappa(&self) -> usize {
        self.registers.len()
    }
}

/// Quantum decryption key: one coset state per register. Not clonable.
#[derive(Debug)]
pub struct QuantumDecKey {
    pub registers: Vec<StateVector>,
}

/// Declared size of every ciphertext program of one scheme instance.
///
/// The largest form is the compute-and-compare one, so all forms are padded to it.
pub fn ciphertext_pad(n: usize, kappa: usize, m_len: usize) -> usize {
    kappa * membership_size(n, n / 2) + kappa * n + m_len
}

pub fn setup<R: Rng + ?Sized>(n: usize, kappa: usize, rng: &mut R) -> Result<(SdeSecretKey, SdePublicKey)> {
    if kappa == 0 {
        return Err(Error::Invalid("kappa must be at least 1"));
    }
    if n > MAX_QUBITS {
        return Err(Error::MemoryGuard { qubits: n, max: MAX_QUBITS });
    }
    let cosets = (0..kappa).map(|_| HiddenCoset::sample(n, rng)).collect::<Result<Vec<_>>>()?;
    let sk = SdeSecretKey { n, cosets };
    let pk = public_key(&sk)?;
    Ok((sk, pk))
}

pub fn public_key(sk: &SdeSecretKey) -> Result<SdePublicKey> {
    let registers = sk.cosets.iter().map(toksig::public_key).collect::<Result<Vec<_>>>()?;
    Ok(SdePublicKey { n: sk.n, registers })
}

pub fn qkeygen(sk: &SdeSecretKey) -> Result<QuantumDecKey> {
    let registers = sk
        .cosets
        .iter()
        .map(|c| Ok(toksig::token_gen(c)?.into_state()))
        .collect::<Result<Vec<_>>>()?;
    Ok(QuantumDecKey { registers })
}

#[derive(Clone, Debug)]
pub struct Ciphertext {
    pub n: usize,
    pub r: Vec<bool>,
    /// Program on the concatenation u_1 ‖ … ‖ u_κ.
    pub program: ObfProgram<Option<BitVector>>,
    /// Per-register predicates; `program` is their conjunction.
    pub blocks: Vec<ObfProgram<bool>>,
}

impl Ciphertext {
    pub fn kappa(&self) -> usize {
        self.r.len()
    }

    pub fn kind(&self) -> ProgramKind {
        self.program.kind()
    }
}

pub fn random_r<R: Rng + ?Sized>(kappa: usize, rng: &mut R) -> Vec<bool> {
    (0..kappa).map(|_| rng.gen()).collect()
}

fn check_r(kappa: usize, r: &[bool]) -> Result<()> {
    if r.len() != kappa {
        return Err(Error::LengthMismatch { expected: kappa, found: r.len() });
    }
    Ok(())
}

/// Encryption with a uniform `r`.
pub fn encrypt<R: Rng + ?Sized>(pk: &SdePublicKey, m: &BitVector, rng: &mut R) -> Result<Ciphertext> {
    let r = random_r(pk.kappa(), rng);
    encrypt_with(pk, m, &r)
}

/// P_{m,r}: outputs m iff R_i^{r_i}(u_i) = 1 for every i, wrapped by the iO stub.
pub fn encrypt_with(pk: &SdePublicKey, m: &BitVector, r: &[bool]) -> Result<Ciphertext> {
    check_r(pk.kappa(), r)?;
    let n = pk.n;
    let blocks: Vec<ObfProgram<bool>> =
        pk.registers.iter().zip(r).map(|(k, &ri)| k.program(ri).clone()).collect();
    let progs = blocks.clone();
    let msg = m.clone();
    let size = blocks.iter().map(ObfProgram::padded_size).sum::<usize>() + m.len();
    let raw = ObfProgram::raw(n * r.len(), size, move |u: &BitVector| {
        for (i, p) in progs.iter().enumerate() {
            if !p.eval(&u.slice(i * n, n)) {
                return None;
            }
        }
        Some(msg.clone())
    });
    let program = io_stub(&raw, ciphertext_pad(n, r.len(), m.len()))?;
    Ok(Ciphertext { n, r: r.to_vec(), program, blocks })
}

/// The coset register `i` must lie in under selector bit `dual`, as (space, offset).
fn selected(c: &HiddenCoset, dual: bool) -> (Subspace, BitVector) {
    if dual {
        (c.a.complement(), c.s_prime.clone())
    } else {
        (c.a.clone(), c.s.clone())
    }
}

/// CC[f, y, m] with f(u) = Can_{1,r_1}(u_1) ‖ … ‖ Can_{κ,r_κ}(u_κ) and the lock
/// y = Can_{1,r_1}(s_{1,r_1}) ‖ … built from the secret key.
pub fn cc_form(sk: &SdeSecretKey, m: &BitVector, r: &[bool]) -> Result<CcProgram> {
    check_r(sk.kappa(), r)?;
    let n = sk.n;
    let chosen: Vec<(Subspace, BitVector)> =
        sk.cosets.iter().zip(r).map(|(c, &ri)| selected(c, ri)).collect();
    let y = BitVector::concat(
        &chosen.iter().map(|(a, s)| canonical_rep(a, s)).collect::<Result<Vec<_>>>()?,
    );
    let spaces: Vec<Subspace> = chosen.into_iter().map(|(a, _)| a).collect();
    let f_size = r.len() * membership_size(n, n / 2);
    let f = move |u: &BitVector| {
        let parts: Vec<BitVector> = spaces
            .iter()
            .enumerate()
            .map(|(i, a)| canonical_rep(a, &u.slice(i * n, n)).expect("block length"))
            .collect();
        BitVector::concat(&parts)
    };
    Ok(cc_program(n * r.len(), f, f_size, y, m.clone()))
}

fn cc_blocks(cc: &CcProgram, n: usize, kappa: usize, sk: &SdeSecretKey, r: &[bool]) -> Vec<ObfProgram<bool>> {
    (0..kappa)
        .map(|i| {
            let (a, _) = selected(&sk.cosets[i], r[i]);
            let lock = cc.lock().slice(i * n, n);
            ObfProgram::raw(n, membership_size(n, n / 2), move |u: &BitVector| {
                canonical_rep(&a, u).expect("block length") == lock
            })
        })
        .collect()
}

/// Challenger-side encryption in compute-and-compare form with a uniform `r`.
pub fn encrypt_cc<R: Rng + ?Sized>(sk: &SdeSecretKey, m: &BitVector, rng: &mut R) -> Result<Ciphertext> {
    let r = random_r(sk.kappa(), rng);
    encrypt_cc_with(sk, m, &r)
}

pub fn encrypt_cc_with(sk: &SdeSecretKey, m: &BitVector, r: &[bool]) -> Result<Ciphertext> {
    let cc = cc_form(sk, m, r)?;
    let blocks = cc_blocks(&cc, sk.n, sk.kappa(), sk, r);
    Ok(Ciphertext { n: sk.n, r: r.to_vec(), program: cc.obfuscate(), blocks })
}

/// Replaces a compute-and-compare ciphertext by its simulated, constant-⊥ form.
pub fn simulate(ct: &Ciphertext, params: crate::obf::CcParams) -> Ciphertext {
    let n = ct.n;
    Ciphertext {
        n,
        r: ct.r.clone(),
        program: cc_sim_stub(params),
        blocks: (0..ct.kappa()).map(|_| ObfProgram::raw(n, 0, |_: &BitVector| false)).collect(),
    }
}

fn argmax_index(st: &StateVector) -> u64 {
    let mut best = 0;
    let mut best_p = -1.0;
    for (i, a) in st.amplitudes().iter().enumerate() {
        let p = a.norm_sqr();
        if p > best_p + 1e-12 {
            best = i as u64;
            best_p = p;
        }
    }
    best
}

/// Runs a ciphertext's predicates and program on a list of registers.
///
/// Returns the program output and leaves every register rewound.
pub(crate) fn evaluate_factorized<R: Rng + ?Sized>(
    registers: &mut [StateVector],
    selectors: &[bool],
    blocks: &[ObfProgram<bool>],
    program: &ObfProgram<Option<BitVector>>,
    rng: &mut R,
) -> Result<Option<BitVector>> {
    if registers.len() != blocks.len() || selectors.len() != blocks.len() {
        return Err(Error::LengthMismatch { expected: blocks.len(), found: registers.len() });
    }
    for (st, &h) in registers.iter_mut().zip(selectors) {
        if h {
            st.hadamard_all();
        }
    }
    let mut all_pass = true;
    for (st, p) in registers.iter_mut().zip(blocks) {
        let n = st.n();
        if n != p.input_len() {
            return Err(Error::LengthMismatch { expected: p.input_len(), found: n });
        }
        let passed = st.coherent_predicate(|x| p.eval(&BitVector::from_index(n, x)), rng).outcome;
        all_pass &= passed;
    }
    let rep = |pick: &dyn Fn(&StateVector) -> u64| {
        BitVector::concat(
            &registers.iter().map(|st| BitVector::from_index(st.n(), pick(st))).collect::<Vec<_>>(),
        )
    };
    let first = rep(&argmax_index);
    let second = rep(&|st: &StateVector| st.support().next().unwrap_or(0));
    let out = program.eval(&first);
    if out != program.eval(&second) || (!all_pass && out.is_some()) {
        return Err(Error::InconsistentProgram);
    }
    for (st, &h) in registers.iter_mut().zip(selectors) {
        if h {
            st.hadamard_all();
        }
    }
    Ok(out)
}

/// Decrypts with the quantum key and rewinds it. `None` is ⊥.
pub fn decrypt<R: Rng + ?Sized>(key: &mut QuantumDecKey, ct: &Ciphertext, rng: &mut R) -> Result<Option<BitVector>> {
    if key.registers.len() != ct.kappa() {
        return Err(Error::LengthMismatch { expected: ct.kappa(), found: key.registers.len() });
    }
    evaluate_factorized(&mut key.registers, &ct.r, &ct.blocks, &ct.program, rng)
}

/// Witness-encryption stub ciphertext. It openly stores the instance and message.
#[derive(Clone, Debug)]
pub struct WeCiphertext {
    pub r: Vec<bool>,
    pub keys: Vec<TsPublicKey>,
    message: BitVector,
}

impl WeCiphertext {
    /// The stored message, readable only through this challenger-side accessor.
    pub fn challenger_message(&self) -> &BitVector {
        &self.message
    }
}

/// Encrypts `m` for the instance r: a witness is a signature of each r_i under key i.
pub fn we_encrypt<R: Rng + ?Sized>(keys: &[TsPublicKey], m: &BitVector, rng: &mut R) -> Result<WeCiphertext> {
    if keys.is_empty() {
        return Err(Error::Invalid("need at least one signature key"));
    }
    let r = random_r(keys.len(), rng);
    Ok(WeCiphertext { r, keys: keys.to_vec(), message: m.clone() })
}

/// R_L(r, w): each w_i verifies as a signature of r_i.
pub fn we_relation(ct: &WeCiphertext, witness: &[BitVector]) -> bool {
    witness.len() == ct.r.len()
        && ct.keys.iter().zip(&ct.r).zip(witness).all(|((k, &ri), w)| toksig::verify(k, ri, w))
}

pub fn we_decrypt_with_witness(ct: &WeCiphertext, witness: &[BitVector]) -> Option<BitVector> {
    we_relation(ct, witness).then(|| ct.message.clone())
}

/// Decrypts with tokens by checking each signature relation coherently.
///
/// Token i is rotated to the basis of r_i, checked against key i, and rotated
/// back. Fresh tokens pass with probability 1 and are left unchanged.
pub fn we_decrypt<R: Rng + ?Sized>(tokens: &mut [Token], ct: &WeCiphertext, rng: &mut R) -> Option<BitVector> {
    if tokens.len() != ct.r.len() {
        return None;
    }
    let mut ok = true;
    for ((t, k), &ri) in tokens.iter_mut().zip(&ct.keys).zip(&ct.r) {
        let st = t.state_mut();
        if st.n() != k.n() {
            return None;
        }
        let n = st.n();
        if ri {
            st.hadamard_all();
        }
        let prog = k.program(ri);
        ok &= st.coherent_predicate(|x| prog.eval(&BitVector::from_index(n, x)), rng).outcome;
        if ri {
            st.hadamard_all();
        }
    }
    ok.then(|| ct.message.clone())
}

/// Zero registers, useful as a garbage key.
pub fn zero_key(n: usize, kappa: usize) -> Result<QuantumDecKey> {
    Ok(QuantumDecKey { registers: vec![StateVector::zero(n)?; kappa] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obf::{all_inputs, equiv_on_domain};
    use crate::qsim::{coset_state_direct, TOL};
    use crate::rng::from_seed;

    fn honest_tuple(sk: &SdeSecretKey, r: &[bool]) -> BitVector {
        BitVector::concat(
            &sk.cosets.iter().zip(r).map(|(c, &ri)| if ri { c.s_prime.clone() } else { c.s.clone() }).collect::<Vec<_>>(),
        )
    }

    #[test]
    fn setup_programs_count() {
        let mut rng = from_seed(41);
        let (sk, pk) = setup(4, 1, &mut rng).unwrap();
        for b in [false, true] {
            assert_eq!(all_inputs(4).filter(|x| pk.registers[0].program(b).eval(x)).count(), 4);
        }
        let (sk2, _) = setup(4, 1, &mut rng).unwrap();
        assert_ne!(sk, sk2);
        assert!(setup(5, 1, &mut rng).is_err());
        assert!(setup(4, 0, &mut rng).is_err());
    }

    #[test]
    fn program_semantics() {
        let mut rng = from_seed(42);
        let (sk, pk) = setup(6, 3, &mut rng).unwrap();
        let m: BitVector = "1011".parse().unwrap();
        let ct = encrypt(&pk, &m, &mut rng).unwrap();
        let good = honest_tuple(&sk, &ct.r);
        assert_eq!(ct.program.eval(&good), Some(m.clone()));
        let mut bad = good.clone();
        bad.flip(7);
        // flipping one bit of u_2 leaves its coset only if the bit's unit vector is outside the space
        let (a, _) = selected(&sk.cosets[1], ct.r[1]);
        let mut e = BitVector::zeros(6);
        e.set(1, true);
        assert_eq!(ct.program.eval(&bad).is_some(), a.contains(&e));
        assert_eq!(ct.kind(), ProgramKind::IoStub);
    }

    #[test]
    fn round_trip_and_rewind() {
        let mut rng = from_seed(43);
        let (sk, pk) = setup(6, 3, &mut rng).unwrap();
        let mut key = qkeygen(&sk).unwrap();
        let fresh: Vec<_> = sk.cosets.iter().map(|c| coset_state_direct(&c.a, &c.s, &c.s_prime).unwrap()).collect();
        for _ in 0..30 {
            let m = BitVector::random(3, &mut rng);
            let ct = encrypt(&pk, &m, &mut rng).unwrap();
            assert_eq!(decrypt(&mut key, &ct, &mut rng).unwrap(), Some(m));
            for (st, f) in key.registers.iter().zip(&fresh) {
                assert!((st.fidelity(f).unwrap() - 1.0).abs() < TOL);
            }
        }
    }

    #[test]
    fn cc_form_equivalent_and_simulated() {
        let mut rng = from_seed(44);
        let (sk, pk) = setup(6, 1, &mut rng).unwrap();
        let m: BitVector = "01".parse().unwrap();
        for r in [[false], [true]] {
            let a = encrypt_with(&pk, &m, &r).unwrap();
            let b = encrypt_cc_with(&sk, &m, &r).unwrap();
            assert!(equiv_on_domain(&a.program, &b.program, all_inputs(6)));
            assert_eq!(a.program.padded_size(), b.program.padded_size());
            for (x, y) in a.blocks.iter().zip(&b.blocks) {
                assert!(equiv_on_domain(x, y, all_inputs(6)));
            }
            let cc = cc_form(&sk, &m, &r).unwrap();
            let sim = simulate(&b, cc.params());
            let mut key = qkeygen(&sk).unwrap();
            assert_eq!(decrypt(&mut key, &sim, &mut rng).unwrap(), None);
            assert_eq!(decrypt(&mut key, &b, &mut rng).unwrap(), Some(m.clone()));
        }
    }

    #[test]
    fn garbage_key() {
        let mut rng = from_seed(45);
        let (sk, pk) = setup(4, 2, &mut rng).unwrap();
        let m: BitVector = "1".parse().unwrap();
        let ct = encrypt_with(&pk, &m, &[false, false]).unwrap();
        let mut key = zero_key(4, 2).unwrap();
        let zero = BitVector::zeros(4);
        let expect = sk.cosets.iter().all(|c| c.primal().contains(&zero));
        assert_eq!(decrypt(&mut key, &ct, &mut rng).unwrap().is_some(), expect);
    }

    #[test]
    fn witness_encryption() {
        let mut rng = from_seed(46);
        let n = 6;
        let pairs: Vec<_> = (0..3).map(|_| toksig::keygen(n, &mut rng).unwrap()).collect();
        let pks: Vec<TsPublicKey> = pairs.iter().map(|(_, pk)| pk.clone()).collect();
        let m: BitVector = "110".parse().unwrap();
        let ct = we_encrypt(&pks, &m, &mut rng).unwrap();
        let mut tokens: Vec<Token> = pairs.iter().map(|(sk, _)| toksig::token_gen(sk).unwrap()).collect();
        for _ in 0..5 {
            assert_eq!(we_decrypt(&mut tokens, &ct, &mut rng), Some(m.clone()));
        }
        let mut sign_tokens: Vec<Token> = pairs.iter().map(|(sk, _)| toksig::token_gen(sk).unwrap()).collect();
        let witness: Vec<BitVector> = sign_tokens
            .iter_mut()
            .zip(&ct.r)
            .map(|(t, &ri)| toksig::sign(ri, t, &mut rng).unwrap().sig)
            .collect();
        assert_eq!(we_decrypt_with_witness(&ct, &witness), Some(m.clone()));
        assert_eq!(we_decrypt_with_witness(&ct, &witness[..2]), None);
    }

    #[test]
    fn spent_token_coordinate() {
        // a token spent on the other bit passes the coherent check with probability 2^{-n/2}
        let mut rng = from_seed(47);
        let n = 6;
        let (sk, pk) = toksig::keygen(n, &mut rng).unwrap();
        let trials = 20_000;
        let mut hits = 0;
        for _ in 0..trials {
            let m = BitVector::zeros(1);
            let ct = we_encrypt(core::slice::from_ref(&pk), &m, &mut rng).unwrap();
            let mut t = toksig::token_gen(&sk).unwrap();
            toksig::sign(!ct.r[0], &mut t, &mut rng).unwrap();
            if we_decrypt(core::slice::from_mut(&mut t), &ct, &mut rng).is_some() {
                hits += 1;
            }
        }
        let p = 0.125;
        let sigma = libm::sqrt(p * (1.0 - p) / trials as f64);
        assert!((hits as f64 / trials as f64 - p).abs() < 4.0 * sigma);
    }
}
