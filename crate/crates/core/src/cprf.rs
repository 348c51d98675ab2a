//! Copy-protected PRF.
//!
//! The quantum key is ℓ0 coset states on λ qubits each plus an (iO-stub)
//! program P with PRF keys K1, K2, K3 built in. An input splits as
//! x = x0 ‖ x1 ‖ x2 with |x0| = ℓ0, |x1| = ℓ1, |x2| = ℓ2. P(x, v_1..v_ℓ0):
//!
//! 1. Decode x2 ⊕ F3(K3, x1) as x0' ‖ Q'. If x0 = x0' and x1 = F2(K2, x0' ‖ Q'),
//!    x is a hidden trigger: run the serialized program Q' on the v_i.
//! 2. Otherwise output F1(K1, x) if v_i ∈ A_i + s_i (x0_i = 0) or
//!    v_i ∈ A_i⊥ + s_i' (x0_i = 1) for every i, else ⊥.
//!
//! A serialized trigger program takes ℓ2 − ℓ0 bits: the selector (ℓ0 bits),
//! the payload y (m bits), one register reference per selector bit
//! (⌈log2 ℓ0⌉ bits each), then zero padding. It outputs y iff every v_i lies
//! in the coset named by its reference and selector bit. Nonzero padding or
//! an out-of-range reference decodes to ⊥.

use alloc::{format, vec::Vec};

use rand::Rng;

use crate::gf2::{BitVector, HiddenCoset};
use crate::obf::{io_stub, membership_size, ObfProgram};
use crate::prf::{params_check, reference_bits, trigger_program_bits, GgmKey, HashedGgmKey, Mode, ParamReport};
use crate::qsim::{StateVector, MAX_QUBITS};
use crate::sde::evaluate_factorized;
use crate::toksig::{self, TsPublicKey};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CpParams {
    pub l0: usize,
    pub l1: usize,
    pub l2: usize,
    pub lambda: usize,
    pub m_len: usize,
    pub mode: Mode,
}

impl CpParams {
    /// λ=4, ℓ0=2, ℓ1=16, ℓ2=10, m=2. Waives ℓ1 ≥ 2ℓ2 + λ.
    pub fn toy() -> Self {
        CpParams { l0: 2, l1: 16, l2: 10, lambda: 4, m_len: 2, mode: Mode::Toy }
    }

    pub fn n(&self) -> usize {
        self.l0 + self.l1 + self.l2
    }

    /// Bits of P's quantum input.
    pub fn vector_bits(&self) -> usize {
        self.l0 * self.lambda
    }

    pub fn report(&self) -> ParamReport {
        params_check(self.l0, self.l1, self.l2, self.lambda, self.m_len)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l0 == 0 || self.m_len == 0 || self.l1 == 0 || self.l2 <= self.l0 {
            return Err(Error::Invalid("need l0, l1, m_len >= 1 and l2 > l0"));
        }
        if self.lambda == 0 || self.lambda % 2 != 0 {
            return Err(Error::Invalid("lambda must be even and positive"));
        }
        if self.lambda > MAX_QUBITS {
            return Err(Error::MemoryGuard { qubits: self.lambda, max: MAX_QUBITS });
        }
        if self.n() > 64 {
            return Err(Error::OutOfRange { what: "input length", value: self.n(), min: 1, max: 64 });
        }
        if self.mode == Mode::Strict {
            let report = self.report();
            if let Some(v) = report.violations().first() {
                return Err(Error::Constraint(format!("{}: {}", v.name, v.requirement)));
            }
        }
        Ok(())
    }

    fn split(&self, x: &BitVector) -> Result<(BitVector, BitVector, BitVector)> {
        let mut parts = x.split(&[self.l0, self.l1, self.l2])?.into_iter();
        Ok((parts.next().unwrap(), parts.next().unwrap(), parts.next().unwrap()))
    }
}

/// Everything the challenger knows.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChallengerView {
    pub params: CpParams,
    pub cosets: Vec<HiddenCoset>,
    pub k1: HashedGgmKey,
    pub k2: HashedGgmKey,
    pub k3: GgmKey,
}

/// Decoded trigger program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriggerProgram {
    pub selector: BitVector,
    pub y: BitVector,
    pub refs: Vec<usize>,
}

impl TriggerProgram {
    pub fn encode(&self, params: &CpParams) -> Result<BitVector> {
        let avail = params.l2 - params.l0;
        let need = trigger_program_bits(params.l0, params.m_len);
        if need > avail {
            return Err(Error::Overflow { needed: need, available: avail });
        }
        let rb = reference_bits(params.l0);
        let mut parts = alloc::vec![self.selector.clone(), self.y.clone()];
        for &r in &self.refs {
            parts.push(BitVector::from_index(rb, r as u64));
        }
        parts.push(BitVector::zeros(avail - need));
        Ok(BitVector::concat(&parts))
    }

    /// Inverse of [`TriggerProgram::encode`]; `None` for malformed input.
    pub fn decode(bits: &BitVector, params: &CpParams) -> Option<Self> {
        let need = trigger_program_bits(params.l0, params.m_len);
        if bits.len() != params.l2 - params.l0 || need > bits.len() {
            return None;
        }
        if !bits.slice(need, bits.len() - need).is_zero() {
            return None;
        }
        let rb = reference_bits(params.l0);
        let selector = bits.slice(0, params.l0);
        let y = bits.slice(params.l0, params.m_len);
        let base = params.l0 + params.m_len;
        let refs: Vec<usize> =
            (0..params.l0).map(|i| bits.slice(base + i * rb, rb).to_index() as usize).collect();
        if refs.iter().any(|&r| r >= params.l0) {
            return None;
        }
        Some(TriggerProgram { selector, y, refs })
    }

    fn run(&self, vs: &[BitVector], members: &[TsPublicKey]) -> Option<BitVector> {
        let ok = vs
            .iter()
            .zip(&self.refs)
            .enumerate()
            .all(|(i, (v, &r))| toksig::verify(&members[r], self.selector.get(i), v));
        ok.then(|| self.y.clone())
    }
}

fn decode_step1(x1: &BitVector, x2: &BitVector, k2: &HashedGgmKey, k3: &GgmKey) -> Result<(BitVector, bool)> {
    let z = x2.xor(&k3.eval(x1)?);
    let hit = k2.eval(&z)? == *x1;
    Ok((z, hit))
}

/// Whether `x` passes the step-1 check of P.
pub fn is_trigger(x: &BitVector, params: &CpParams, k2: &HashedGgmKey, k3: &GgmKey) -> Result<bool> {
    let (x0, x1, x2) = params.split(x)?;
    let (z, hit) = decode_step1(&x1, &x2, k2, k3)?;
    Ok(hit && z.slice(0, params.l0) == x0)
}

/// Program P with its keys and the public membership programs.
#[derive(Clone, Debug)]
pub struct ProgramP {
    params: CpParams,
    k1: HashedGgmKey,
    k2: HashedGgmKey,
    k3: GgmKey,
    members: Vec<TsPublicKey>,
}

impl ProgramP {
    pub fn new(view: &ChallengerView) -> Result<Self> {
        let members = view.cosets.iter().map(toksig::public_key).collect::<Result<Vec<_>>>()?;
        Ok(ProgramP {
            params: view.params,
            k1: view.k1.clone(),
            k2: view.k2.clone(),
            k3: view.k3.clone(),
            members,
        })
    }

    pub fn eval(&self, x: &BitVector, vs: &[BitVector]) -> Result<Option<BitVector>> {
        let p = &self.params;
        if vs.len() != p.l0 {
            return Err(Error::LengthMismatch { expected: p.l0, found: vs.len() });
        }
        for v in vs {
            v.check_len(p.lambda)?;
        }
        let (x0, x1, x2) = p.split(x)?;
        let (z, hit) = decode_step1(&x1, &x2, &self.k2, &self.k3)?;
        if hit && z.slice(0, p.l0) == x0 {
            let q = z.slice(p.l0, p.l2 - p.l0);
            return Ok(TriggerProgram::decode(&q, p).and_then(|t| t.run(vs, &self.members)));
        }
        let ok = vs.iter().enumerate().all(|(i, v)| toksig::verify(&self.members[i], x0.get(i), v));
        if ok {
            Ok(Some(self.k1.eval(x)?))
        } else {
            Ok(None)
        }
    }

    /// P on x ‖ v_1 ‖ … ‖ v_ℓ0.
    pub fn eval_joined(&self, input: &BitVector) -> Result<Option<BitVector>> {
        let p = &self.params;
        input.check_len(p.n() + p.vector_bits())?;
        let x = input.slice(0, p.n());
        let vs: Vec<BitVector> = (0..p.l0).map(|i| input.slice(p.n() + i * p.lambda, p.lambda)).collect();
        self.eval(&x, &vs)
    }

    fn size(&self) -> usize {
        let p = &self.params;
        8 * (p.l1 + p.l2 + p.n()) + 2 * p.l0 * membership_size(p.lambda, p.lambda / 2) + 3 * 256
    }
}

/// P(x, v_1..v_ℓ0) evaluated from the challenger view.
pub fn program_p(x: &BitVector, vs: &[BitVector], view: &ChallengerView) -> Result<Option<BitVector>> {
    ProgramP::new(view)?.eval(x, vs)
}

/// Quantum PRF key ρ_K.
#[derive(Debug)]
pub struct CpKey {
    pub params: CpParams,
    pub registers: Vec<StateVector>,
    /// iO-stub of P on x ‖ v_1 ‖ … ‖ v_ℓ0.
    pub program: ObfProgram<Option<BitVector>>,
    /// The 2ℓ0 membership programs R_i^0, R_i^1.
    pub members: Vec<TsPublicKey>,
}

/// Samples cosets and K2, K3 around a given K1 and assembles ρ_K.
pub fn cp_qkeygen<R: Rng + ?Sized>(k1: HashedGgmKey, params: CpParams, rng: &mut R) -> Result<(CpKey, ChallengerView)> {
    params.validate()?;
    if k1.in_len() != params.n() || k1.out_len() != params.m_len {
        return Err(Error::Invalid("K1 does not match the parameters"));
    }
    let cosets = (0..params.l0).map(|_| HiddenCoset::sample(params.lambda, rng)).collect::<Result<Vec<_>>>()?;
    let k2 = HashedGgmKey::injective(params.l2, params.l1, params.lambda, params.mode, rng)?;
    let k3 = GgmKey::generate(params.l1, params.l2, rng)?;
    let view = ChallengerView { params, cosets, k1, k2, k3 };
    let registers = view
        .cosets
        .iter()
        .map(|c| Ok(toksig::token_gen(c)?.into_state()))
        .collect::<Result<Vec<_>>>()?;
    Ok((key_from_view(&view, registers)?, view))
}

/// Reassembles ρ_K from a challenger view and the key registers.
pub fn key_from_view(view: &ChallengerView, registers: Vec<StateVector>) -> Result<CpKey> {
    let params = view.params;
    params.validate()?;
    if registers.len() != params.l0 || view.cosets.len() != params.l0 {
        return Err(Error::LengthMismatch { expected: params.l0, found: registers.len() });
    }
    if let Some(st) = registers.iter().find(|st| st.n() != params.lambda) {
        return Err(Error::LengthMismatch { expected: params.lambda, found: st.n() });
    }
    let p = ProgramP::new(view)?;
    let raw_size = p.size();
    let members = p.members.clone();
    let input_len = params.n() + params.vector_bits();
    let raw = ObfProgram::raw(input_len, raw_size, move |input: &BitVector| {
        p.eval_joined(input).expect("length checked by the wrapper")
    });
    let program = io_stub(&raw, raw_size)?;
    Ok(CpKey { params, registers, program, members })
}

/// Samples K1 and runs [`cp_qkeygen`].
pub fn cp_setup<R: Rng + ?Sized>(params: CpParams, rng: &mut R) -> Result<(CpKey, ChallengerView)> {
    params.validate()?;
    let k1 = HashedGgmKey::extracting(params.n(), params.m_len, params.lambda, params.mode, rng)?;
    cp_qkeygen(k1, params, rng)
}

/// Evaluates ρ_K at x and rewinds the key.
pub fn cp_eval<R: Rng + ?Sized>(key: &mut CpKey, x: &BitVector, rng: &mut R) -> Result<Option<BitVector>> {
    let p = key.params;
    x.check_len(p.n())?;
    let selectors: Vec<bool> = (0..p.l0).map(|i| x.get(i)).collect();
    let blocks: Vec<ObfProgram<bool>> =
        key.members.iter().zip(&selectors).map(|(m, &b)| m.program(b).clone()).collect();
    let full = key.program.clone();
    let prefix = x.clone();
    let partial = ObfProgram::raw(p.vector_bits(), full.padded_size(), move |v: &BitVector| {
        full.eval(&BitVector::concat(&[prefix.clone(), v.clone()]))
    });
    evaluate_factorized(&mut key.registers, &selectors, &blocks, &partial, rng)
}

/// A hidden-trigger input with the value it was built to produce.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TriggerInput {
    pub x0: BitVector,
    pub x1: BitVector,
    pub x2: BitVector,
    pub planted_y: BitVector,
}

impl TriggerInput {
    pub fn to_bits(&self) -> BitVector {
        BitVector::concat(&[self.x0.clone(), self.x1.clone(), self.x2.clone()])
    }
}

/// Builds an input starting with x0 on which P outputs y for valid vectors.
pub fn gen_trigger(x0: &BitVector, y: &BitVector, view: &ChallengerView) -> Result<TriggerInput> {
    let p = &view.params;
    x0.check_len(p.l0)?;
    y.check_len(p.m_len)?;
    let q = TriggerProgram { selector: x0.clone(), y: y.clone(), refs: (0..p.l0).collect() }.encode(p)?;
    let z = BitVector::concat(&[x0.clone(), q]);
    let x1 = view.k2.eval(&z)?;
    let x2 = view.k3.eval(&x1)?.xor(&z);
    Ok(TriggerInput { x0: x0.clone(), x1, x2, planted_y: y.clone() })
}

/// Honest vectors for the registers selected by x0: s_i or s_i'.
pub fn honest_vectors(view: &ChallengerView, x0: &BitVector) -> Vec<BitVector> {
    view.cosets
        .iter()
        .enumerate()
        .map(|(i, c)| if x0.get(i) { c.s_prime.clone() } else { c.s.clone() })
        .collect()
}
