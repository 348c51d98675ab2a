//! Quantum Goldreich–Levin extraction with a quantum auxiliary input.
//!
//! A predictor acts on an r register (n qubits), an auxiliary register and
//! one output qubit. It is controlled on (r, aux) in the computational basis:
//! U = Σ |r, a⟩⟨r, a| ⊗ U_{r,a} with U_{r,a} a 2×2 unitary on the output.
//!
//! Extraction prepares |+^n⟩ on r, applies U, Z on the output, U†, H^{⊗n} on
//! r and measures r. With α_r the amplitude of the right answer ⟨x, r⟩ in
//! U_r|0⟩ and β_r the other one, the amplitude on x with the output back in
//! |0⟩ is E_r[|α_r|² − |β_r|²] = 2ε, so x comes out with probability at
//! least 4ε².

use alloc::{vec, vec::Vec};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::gf2::BitVector;
use crate::qsim::{qubit_range_mask, StateVector, C64, MAX_QUBITS};
use crate::{Error, Result};

pub type Gate = [[C64; 2]; 2];

const TOL_UNITARY: f64 = 1e-8;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

const fn identity() -> Gate {
    [[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]]
}

const fn not() -> Gate {
    [[C64::new(0.0, 0.0), C64::new(1.0, 0.0)], [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]]
}

fn mat_mul(a: &Gate, b: &Gate) -> Gate {
    let mut out = [[c(0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn adjoint(a: &Gate) -> Gate {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

fn is_unitary(a: &Gate) -> bool {
    let p = mat_mul(&adjoint(a), a);
    let id = identity();
    (0..2).all(|i| (0..2).all(|j| (p[i][j] - id[i][j]).norm() <= TOL_UNITARY))
}

/// Controlled predictor with an optional planted secret.
#[derive(Clone, Debug)]
pub struct Predictor {
    n: usize,
    aux_qubits: usize,
    /// Gate for (r, aux) at index (r << aux_qubits) | aux.
    gates: Vec<Gate>,
    planted: Option<BitVector>,
    declared_eps: Option<f64>,
}

impl Predictor {
    pub fn new(n: usize, aux_qubits: usize, gates: Vec<Gate>, planted: Option<BitVector>) -> Result<Self> {
        let total = n + aux_qubits + 1;
        if total > MAX_QUBITS {
            return Err(Error::MemoryGuard { qubits: total, max: MAX_QUBITS });
        }
        if gates.len() != 1 << (n + aux_qubits) {
            return Err(Error::LengthMismatch { expected: 1 << (n + aux_qubits), found: gates.len() });
        }
        if !gates.iter().all(is_unitary) {
            return Err(Error::Invalid("predictor gate is not unitary"));
        }
        if let Some(x) = &planted {
            x.check_len(n)?;
        }
        Ok(Predictor { n, aux_qubits, gates, planted, declared_eps: None })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn aux_qubits(&self) -> usize {
        self.aux_qubits
    }

    pub fn planted(&self) -> Option<&BitVector> {
        self.planted.as_ref()
    }

    pub fn declared_eps(&self) -> Option<f64> {
        self.declared_eps
    }

    fn gate(&self, r: u64, a: u64) -> &Gate {
        &self.gates[((r << self.aux_qubits) | a) as usize]
    }

    /// The trivial auxiliary state |0…0⟩.
    pub fn default_aux(&self) -> StateVector {
        StateVector::zero(self.aux_qubits).expect("checked in new")
    }

    fn check_aux(&self, aux: &StateVector) -> Result<()> {
        if aux.n() != self.aux_qubits {
            return Err(Error::LengthMismatch { expected: self.aux_qubits, found: aux.n() });
        }
        Ok(())
    }

    /// Pr[predictor outputs ⟨x, r⟩] − 1/2 for uniform r and the given aux.
    pub fn bias(&self, x: &BitVector, aux: &StateVector) -> Result<f64> {
        x.check_len(self.n)?;
        self.check_aux(aux)?;
        let xi = x.to_index();
        let mut total = 0.0;
        for r in 0..1u64 << self.n {
            let right = ((xi & r).count_ones() & 1) as usize;
            for a in aux.support() {
                let g = self.gate(r, a);
                total += aux.amplitude(a).norm_sqr() * g[right][0].norm_sqr();
            }
        }
        Ok(total / (1u64 << self.n) as f64 - 0.5)
    }

    /// (E_r E_aux[|α|² − |β|²])², the extraction bound's phase term.
    pub fn coherent_term(&self, x: &BitVector, aux: &StateVector) -> Result<f64> {
        let e = 2.0 * self.bias(x, aux)?;
        Ok(e * e)
    }

    fn apply(&self, st: &mut StateVector, dagger: bool) {
        let a_bits = self.aux_qubits;
        let mut amps = st.amplitudes().to_vec();
        for r in 0..1u64 << self.n {
            for a in 0..1u64 << a_bits {
                let g = if dagger { adjoint(self.gate(r, a)) } else { *self.gate(r, a) };
                let base = (((r << a_bits) | a) << 1) as usize;
                let (z0, z1) = (amps[base], amps[base + 1]);
                amps[base] = g[0][0] * z0 + g[0][1] * z1;
                amps[base + 1] = g[1][0] * z0 + g[1][1] * z1;
            }
        }
        *st = StateVector::from_amplitudes(st.n(), amps).expect("unitary keeps the norm");
    }

    /// State just before the final measurement of r.
    pub fn extraction_state(&self, aux: &StateVector) -> Result<StateVector> {
        self.check_aux(aux)?;
        let total = self.n + self.aux_qubits + 1;
        let mut plus = StateVector::zero(self.n)?;
        plus.hadamard_all();
        let mut st = plus.tensor(aux)?.tensor(&StateVector::zero(1)?)?;
        self.apply(&mut st, false);
        st.phase_parity(1);
        self.apply(&mut st, true);
        st.hadamard_mask(qubit_range_mask(total, 0, self.n));
        Ok(st)
    }

    fn r_distribution(&self, st: &StateVector) -> Vec<f64> {
        let shift = self.aux_qubits + 1;
        let mut probs = vec![0.0; 1 << self.n];
        for (k, z) in st.amplitudes().iter().enumerate() {
            probs[k >> shift] += z.norm_sqr();
        }
        probs
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtractionResult {
    pub candidate: BitVector,
    /// Whether the candidate equals the planted secret, when there is one.
    pub success: Option<bool>,
    /// Exact probability that the candidate is the planted secret.
    pub success_probability: Option<f64>,
}

/// Runs the extraction circuit once and measures r.
pub fn extract<R: Rng + ?Sized>(pred: &Predictor, aux: &StateVector, rng: &mut R) -> Result<ExtractionResult> {
    let mut st = pred.extraction_state(aux)?;
    let total = st.n();
    let exact = pred.planted.as_ref().map(|x| pred.r_distribution(&st)[x.to_index() as usize]);
    let outcome = st.measure_mask(qubit_range_mask(total, 0, pred.n), rng).outcome;
    let candidate = BitVector::from_index(pred.n, outcome >> (pred.aux_qubits + 1));
    let success = pred.planted.as_ref().map(|x| *x == candidate);
    Ok(ExtractionResult { candidate, success, success_probability: exact })
}

/// Exact probability that extraction returns the planted secret.
pub fn exact_success(pred: &Predictor, aux: &StateVector) -> Result<f64> {
    let x = pred.planted.as_ref().ok_or(Error::Invalid("predictor has no planted secret"))?;
    let st = pred.extraction_state(aux)?;
    Ok(pred.r_distribution(&st)[x.to_index() as usize])
}

/// Fraction of `reps` extractions that return the planted secret.
///
/// The circuit before the final measurement is fixed, so it is simulated once
/// and the measurement of r is repeated `reps` times.
pub fn success_estimate<R: Rng + ?Sized>(pred: &Predictor, aux: &StateVector, reps: u64, rng: &mut R) -> Result<f64> {
    if reps == 0 {
        return Err(Error::Invalid("reps must be at least 1"));
    }
    let x = pred.planted.as_ref().ok_or(Error::Invalid("predictor has no planted secret"))?.to_index() as usize;
    let st = pred.extraction_state(aux)?;
    let probs = pred.r_distribution(&st);
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in &probs {
        acc += p;
        cumulative.push(acc);
    }
    let mut hits = 0u64;
    for _ in 0..reps {
        let u = rng.gen::<f64>() * acc;
        let k = cumulative.partition_point(|&c| c <= u).min(probs.len() - 1);
        hits += (k == x) as u64;
    }
    Ok(hits as f64 / reps as f64)
}

fn ip(x: u64, r: u64) -> bool {
    (x & r).count_ones() & 1 == 1
}

/// Computes ⟨x, r⟩ into the output, flipped on a random set of
/// ⌊f·2^n⌋ values of r. ε = 1/2 − ⌊f·2^n⌋/2^n.
pub fn build_ip_predictor<R: Rng + ?Sized>(x: &BitVector, flip_fraction: f64, rng: &mut R) -> Result<Predictor> {
    if !(0.0..=1.0).contains(&flip_fraction) {
        return Err(Error::Invalid("flip fraction must lie in [0, 1]"));
    }
    let n = x.len();
    if n + 1 > MAX_QUBITS {
        return Err(Error::MemoryGuard { qubits: n + 1, max: MAX_QUBITS });
    }
    let size = 1usize << n;
    let flips = libm::floor(flip_fraction * size as f64) as usize;
    let mut rs: Vec<usize> = (0..size).collect();
    rs.shuffle(rng);
    let mut flipped = vec![false; size];
    for &r in &rs[..flips] {
        flipped[r] = true;
    }
    let xi = x.to_index();
    let gates = (0..size as u64)
        .map(|r| if ip(xi, r) ^ flipped[r as usize] { not() } else { identity() })
        .collect();
    let mut p = Predictor::new(n, 0, gates, Some(x.clone()))?;
    p.declared_eps = Some(0.5 - flips as f64 / size as f64);
    Ok(p)
}

/// Computes ⟨x, r⟩ and then rotates the output by θ:
/// |b⟩ ↦ cos θ |b⟩ + sin θ |b ⊕ 1⟩ (up to sign). ε = cos(2θ)/2.
pub fn build_rotation_predictor(x: &BitVector, theta: f64) -> Result<Predictor> {
    let n = x.len();
    let (cs, sn) = (libm::cos(theta), libm::sin(theta));
    let rot: Gate = [[c(cs), c(-sn)], [c(sn), c(cs)]];
    let xi = x.to_index();
    let gates = (0..1u64 << n)
        .map(|r| if ip(xi, r) { mat_mul(&not(), &rot) } else { rot })
        .collect();
    let mut p = Predictor::new(n, 0, gates, Some(x.clone()))?;
    p.declared_eps = Some(libm::cos(2.0 * theta) / 2.0);
    Ok(p)
}

/// Outputs ⟨a, r⟩ for the auxiliary register a, ignoring x. With a uniform
/// auxiliary state ε = 2^{−n−1} and extraction returns a uniform string.
pub fn build_aux_parity_predictor(x: &BitVector) -> Result<(Predictor, StateVector)> {
    let n = x.len();
    let gates = (0..1u64 << n)
        .flat_map(|r| (0..1u64 << n).map(move |a| if ip(a, r) { not() } else { identity() }))
        .collect();
    let mut p = Predictor::new(n, n, gates, Some(x.clone()))?;
    p.declared_eps = Some(libm::pow(2.0, -(n as f64) - 1.0));
    let mut aux = StateVector::zero(n)?;
    aux.hadamard_all();
    Ok((p, aux))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::TOL;
    use crate::rng::from_seed;

    #[test]
    fn perfect_predictor() {
        let mut rng = from_seed(81);
        for n in [1usize, 4, 8] {
            let x = BitVector::random(n, &mut rng);
            let p = build_ip_predictor(&x, 0.0, &mut rng).unwrap();
            let aux = p.default_aux();
            assert!((p.bias(&x, &aux).unwrap() - 0.5).abs() < TOL);
            assert!((exact_success(&p, &aux).unwrap() - 1.0).abs() < TOL);
            assert_eq!(extract(&p, &aux, &mut rng).unwrap().success, Some(true));
        }
    }

    #[test]
    fn flip_family_matches_phase_term() {
        let mut rng = from_seed(82);
        let x = BitVector::random(6, &mut rng);
        for f in [0.0, 0.125, 0.25, 0.375, 0.5, 1.0] {
            let p = build_ip_predictor(&x, f, &mut rng).unwrap();
            let aux = p.default_aux();
            let eps = p.bias(&x, &aux).unwrap();
            assert!((eps - p.declared_eps().unwrap()).abs() < TOL);
            let s = exact_success(&p, &aux).unwrap();
            assert!((s - p.coherent_term(&x, &aux).unwrap()).abs() < TOL);
            assert!((s - 4.0 * eps * eps).abs() < TOL);
        }
    }

    #[test]
    fn rotation_beats_bound() {
        let x: BitVector = "1011".parse().unwrap();
        for theta in [0.0, 0.2, 0.5, 0.7] {
            let p = build_rotation_predictor(&x, theta).unwrap();
            let aux = p.default_aux();
            let eps = p.bias(&x, &aux).unwrap();
            assert!((eps - libm::cos(2.0 * theta) / 2.0).abs() < TOL);
            let s = exact_success(&p, &aux).unwrap();
            assert!(s + TOL >= 4.0 * eps * eps);
            let st = p.extraction_state(&aux).unwrap();
            assert!((st.norm_sqr() - 1.0).abs() < TOL);
        }
    }

    #[test]
    fn uniform_aux_gives_uniform_output() {
        let x: BitVector = "110".parse().unwrap();
        let (p, aux) = build_aux_parity_predictor(&x).unwrap();
        let eps = p.bias(&x, &aux).unwrap();
        assert!((eps - 1.0 / 16.0).abs() < TOL);
        let s = exact_success(&p, &aux).unwrap();
        assert!((s - 1.0 / 8.0).abs() < TOL);
        assert!(s >= 4.0 * eps * eps);
    }

    #[test]
    fn rejects_non_unitary() {
        let bad: Gate = [[c(1.0), c(1.0)], [c(0.0), c(1.0)]];
        assert!(Predictor::new(1, 0, vec![bad, identity()], None).is_err());
    }
}
