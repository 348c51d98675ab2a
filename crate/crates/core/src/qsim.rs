//! Dense statevector simulation of up to [`MAX_QUBITS`] qubits.
//!
//! Amplitude `k` belongs to the basis vector [`BitVector::from_index`]`(n, k)`,
//! so qubit `i` (bit position `i + 1`) is bit `n - 1 - i` of the index.
//! Measurements collapse the state in place and return the outcome with its
//! Born probability.

use alloc::{collections::BTreeMap, vec, vec::Vec};
use core::fmt;

use num_complex::Complex64;
use rand::Rng;

use crate::gf2::{BitVector, PackedCoset, Subspace};
use crate::{Error, Result};

pub type C64 = Complex64;

/// Largest register the simulator will allocate.
pub const MAX_QUBITS: usize = 26;

/// Absolute tolerance for unit tests on amplitudes and fidelities.
pub const TOL: f64 = 1e-9;

#[cfg(test)]
const FRAC_1_SQRT_2: f64 = core::f64::consts::FRAC_1_SQRT_2;

/// Outcome of a measurement with its probability under the pre-measurement state.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord<T> {
    pub outcome: T,
    pub probability: f64,
}

#[derive(Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<C64>,
}

fn guard(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        Err(Error::MemoryGuard { qubits: n, max: MAX_QUBITS })
    } else {
        Ok(())
    }
}

/// Index mask selecting qubits `start..start + len` of an `n`-qubit register.
pub fn qubit_range_mask(n: usize, start: usize, len: usize) -> u64 {
    assert!(start + len <= n && n <= 64);
    if len == 0 {
        return 0;
    }
    let low = n - start - len;
    (if len == 64 { u64::MAX } else { (1u64 << len) - 1 }) << low
}

impl StateVector {
    /// |0…0⟩ on `n` qubits.
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: u64) -> Result<Self> {
        guard(n)?;
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        let slot = amps
            .get_mut(index as usize)
            .ok_or(Error::OutOfRange { what: "basis index", value: index as usize, min: 0, max: (1 << n) - 1 })?;
        *slot = C64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    /// State from raw amplitudes; they must have length 2^n and unit norm.
    pub fn from_amplitudes(n: usize, amps: Vec<C64>) -> Result<Self> {
        guard(n)?;
        if amps.len() != 1 << n {
            return Err(Error::LengthMismatch { expected: 1 << n, found: amps.len() });
        }
        let s = StateVector { n, amps };
        if (s.norm_sqr() - 1.0).abs() > 1e-9 {
            return Err(Error::Invalid("amplitudes are not normalized"));
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, index: u64) -> C64 {
        self.amps[index as usize]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn scale(&mut self, k: f64) {
        for a in self.amps.iter_mut() {
            *a *= k;
        }
    }

    fn renormalize(&mut self) {
        let n2 = self.norm_sqr();
        if n2 > 0.0 {
            self.scale(1.0 / libm::sqrt(n2));
        }
    }

    /// Basis indices carrying nonzero amplitude.
    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(i, _)| i as u64)
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.n != other.n {
            return Err(Error::LengthMismatch { expected: self.n, found: other.n });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// |⟨self|other⟩|².
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// self ⊗ other, with `self` on the leading qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        guard(self.n + other.n)?;
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(StateVector { n: self.n + other.n, amps })
    }

    /// H on every qubit.
    pub fn hadamard_all(&mut self) {
        // Low layers block by block so each block stays in cache.
        let len = self.amps.len();
        let block = len.min(1 << 10);
        for chunk in self.amps.chunks_exact_mut(block) {
            let mut h = 1;
            while h < block {
                butterfly(chunk, h);
                h *= 2;
            }
        }
        let mut h = block;
        while h < len {
            butterfly(&mut self.amps, h);
            h *= 2;
        }
        self.scale(libm::pow(0.5, self.n as f64 / 2.0));
    }

    /// H on the qubits whose index bits are set in `mask`.
    pub fn hadamard_mask(&mut self, mask: u64) {
        let mut count = 0;
        for bit in 0..self.n {
            if mask >> bit & 1 == 1 {
                butterfly(&mut self.amps, 1 << bit);
                count += 1;
            }
        }
        if count > 0 {
            self.scale(libm::pow(0.5, count as f64 / 2.0));
        }
    }

    /// |x⟩ ↦ |x ⊕ v⟩.
    pub fn xor_shift(&mut self, v: u64) {
        if v == 0 {
            return;
        }
        for x in 0..self.amps.len() {
            let y = x ^ v as usize;
            if x < y {
                self.amps.swap(x, y);
            }
        }
    }

    /// |x⟩ ↦ (−1)^{popcount(x & mask)} |x⟩.
    pub fn phase_parity(&mut self, mask: u64) {
        for (x, a) in self.amps.iter_mut().enumerate() {
            if (x as u64 & mask).count_ones() & 1 == 1 {
                *a = -*a;
            }
        }
    }

    /// Probability that a computational-basis measurement satisfies `pred`.
    pub fn probability<F: Fn(u64) -> bool>(&self, pred: F) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .filter(|(x, _)| pred(*x as u64))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = self.norm_sqr();
        let r = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut last = 0;
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p > 0.0 {
                acc += p;
                last = i;
                if r < acc {
                    return i;
                }
            }
        }
        last
    }

    /// Full computational-basis measurement; the state collapses to the outcome.
    pub fn measure_all<R: Rng + ?Sized>(&mut self, rng: &mut R) -> MeasurementRecord<BitVector> {
        let i = self.sample_index(rng);
        let probability = self.amps[i].norm_sqr();
        for a in self.amps.iter_mut() {
            *a = C64::new(0.0, 0.0);
        }
        self.amps[i] = C64::new(1.0, 0.0);
        MeasurementRecord { outcome: BitVector::from_index(self.n, i as u64), probability }
    }

    /// Measures the value `f(x)` without resolving `x` further.
    ///
    /// This is a coherent evaluation of `f` into an ancilla, a measurement of
    /// the ancilla, and uncomputation. The ancilla is virtual: the support is
    /// partitioned by the value of `f` and the chosen block is renormalized.
    pub fn measure_fn<R, F>(&mut self, f: F, rng: &mut R) -> MeasurementRecord<u64>
    where
        R: Rng + ?Sized,
        F: Fn(u64) -> u64,
    {
        let mut blocks: BTreeMap<u64, f64> = BTreeMap::new();
        for (x, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p > 0.0 {
                *blocks.entry(f(x as u64)).or_insert(0.0) += p;
            }
        }
        let total: f64 = blocks.values().sum();
        let r = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = None;
        for (&v, &p) in &blocks {
            acc += p;
            chosen = Some((v, p));
            if r < acc {
                break;
            }
        }
        let (value, p) = chosen.expect("state has nonzero norm");
        if p < total {
            for (x, a) in self.amps.iter_mut().enumerate() {
                if a.norm_sqr() > 0.0 && f(x as u64) != value {
                    *a = C64::new(0.0, 0.0);
                }
            }
            self.renormalize();
        }
        MeasurementRecord { outcome: value, probability: p / total }
    }

    /// Coherently evaluates `pred`, measures the answer bit, uncomputes.
    ///
    /// If `pred` is constant on the support the state is left unchanged.
    pub fn coherent_predicate<R, F>(&mut self, pred: F, rng: &mut R) -> MeasurementRecord<bool>
    where
        R: Rng + ?Sized,
        F: Fn(u64) -> bool,
    {
        // Zero amplitudes stay zero, so `pred` is only evaluated on the support.
        let zero = C64::new(0.0, 0.0);
        let mut p1 = 0.0;
        let mut total = 0.0;
        for (x, a) in self.amps.iter().enumerate() {
            if *a != zero {
                let q = a.norm_sqr();
                total += q;
                if pred(x as u64) {
                    p1 += q;
                }
            }
        }
        let bit = rng.gen::<f64>() * total < p1;
        let p = if bit { p1 } else { total - p1 };
        if p < total {
            for (x, a) in self.amps.iter_mut().enumerate() {
                if *a != zero && pred(x as u64) != bit {
                    *a = C64::new(0.0, 0.0);
                }
            }
            self.renormalize();
        }
        MeasurementRecord { outcome: bit, probability: p / total }
    }

    /// Measures the qubits in `mask`; returns `x & mask` for the outcome `x`.
    pub fn measure_mask<R: Rng + ?Sized>(&mut self, mask: u64, rng: &mut R) -> MeasurementRecord<u64> {
        self.measure_fn(|x| x & mask, rng)
    }

    /// Writes `index,re,im` lines with a header.
    pub fn write_csv<W: fmt::Write>(&self, w: &mut W) -> fmt::Result {
        writeln!(w, "index,re,im")?;
        for (i, a) in self.amps.iter().enumerate() {
            writeln!(w, "{i},{:.12e},{:.12e}", a.re, a.im)?;
        }
        Ok(())
    }
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateVector(n={}, support={})", self.n, self.support().count())
    }
}

/// Unnormalized (a, b) ↦ (a + b, a − b) on index pairs differing in bit `h`.
fn butterfly(amps: &mut [C64], h: usize) {
    for chunk in amps.chunks_exact_mut(2 * h) {
        let (lo, hi) = chunk.split_at_mut(h);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = x + y;
            *b = x - y;
        }
    }
}

/// |A⟩: uniform superposition over the elements of A.
pub fn prepare_subspace_state(a: &Subspace) -> Result<StateVector> {
    guard(a.n())?;
    let mut st = StateVector { n: a.n(), amps: vec![C64::new(0.0, 0.0); 1 << a.n()] };
    let amp = C64::new(libm::pow(0.5, a.dim() as f64 / 2.0), 0.0);
    for v in a.elements() {
        st.amps[v.to_index() as usize] = amp;
    }
    Ok(st)
}

fn check_coset_args(a: &Subspace, s: &BitVector, s_prime: &BitVector) -> Result<()> {
    s.check_len(a.n())?;
    s_prime.check_len(a.n())
}

/// |A_{s,s'}⟩ built from |A⟩ by: add s, H^{⊗n}, add s', H^{⊗n}.
///
/// The result equals [`coset_state_direct`] up to the global phase (−1)^{⟨s,s'⟩}.
pub fn prepare_coset_state(a: &Subspace, s: &BitVector, s_prime: &BitVector) -> Result<StateVector> {
    check_coset_args(a, s, s_prime)?;
    let mut st = prepare_subspace_state(a)?;
    st.xor_shift(s.to_index());
    st.hadamard_all();
    st.xor_shift(s_prime.to_index());
    st.hadamard_all();
    Ok(st)
}

/// |A_{s,s'}⟩ from its amplitude formula Σ_{a∈A} (−1)^{⟨a,s'⟩} |a+s⟩ / √|A|.
pub fn coset_state_direct(a: &Subspace, s: &BitVector, s_prime: &BitVector) -> Result<StateVector> {
    check_coset_args(a, s, s_prime)?;
    guard(a.n())?;
    let mut st = StateVector { n: a.n(), amps: vec![C64::new(0.0, 0.0); 1 << a.n()] };
    let mag = libm::pow(0.5, a.dim() as f64 / 2.0);
    for v in a.elements() {
        let sign = if v.dot(s_prime) { -mag } else { mag };
        st.amps[v.xor(s).to_index() as usize] = C64::new(sign, 0.0);
    }
    Ok(st)
}

/// Coherent membership check of a register against a coset.
pub fn coherent_membership<R: Rng + ?Sized>(
    st: &mut StateVector,
    coset: &PackedCoset,
    rng: &mut R,
) -> MeasurementRecord<bool> {
    st.coherent_predicate(|x| coset.contains(x), rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::{canonical_rep, sample_subspace};
    use crate::rng::from_seed;
    use proptest::prelude::*;

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    #[test]
    fn subspace_state_examples() {
        let z = prepare_subspace_state(&Subspace::zero(3)).unwrap();
        assert_eq!(z, StateVector::zero(3).unwrap());
        let a = Subspace::parse(2, "10").unwrap();
        let st = prepare_subspace_state(&a).unwrap();
        let h = FRAC_1_SQRT_2;
        assert!((st.amplitude(0b00).re - h).abs() < TOL);
        assert!((st.amplitude(0b10).re - h).abs() < TOL);
        assert_eq!(st.amplitude(0b01).norm_sqr(), 0.0);
        let full = prepare_subspace_state(&Subspace::full(3)).unwrap();
        let mut plus = StateVector::zero(3).unwrap();
        plus.hadamard_all();
        assert!((full.fidelity(&plus).unwrap() - 1.0).abs() < TOL);
    }

    #[test]
    fn coset_state_amplitudes_by_hand() {
        // A = span{10}, s = s' = 01: ⟨00,01⟩ = ⟨10,01⟩ = 0, so both phases are +.
        let a = Subspace::parse(2, "10").unwrap();
        let st = coset_state_direct(&a, &bv("01"), &bv("01")).unwrap();
        let h = FRAC_1_SQRT_2;
        assert!((st.amplitude(0b01).re - h).abs() < TOL);
        assert!((st.amplitude(0b11).re - h).abs() < TOL);
        // the chain carries the global phase (−1)^{⟨s,s'⟩} = −1
        let chain = prepare_coset_state(&a, &bv("01"), &bv("01")).unwrap();
        assert!((chain.amplitude(0b01).re + h).abs() < TOL);
        assert!((chain.fidelity(&st).unwrap() - 1.0).abs() < TOL);
    }

    #[test]
    fn memory_guard() {
        assert!(StateVector::zero(MAX_QUBITS + 1).is_err());
    }

    #[test]
    fn coherent_predicate_examples() {
        let mut rng = from_seed(5);
        let a = Subspace::parse(3, "100 010").unwrap();
        let s = bv("001");
        let c = crate::gf2::Coset::new(a.clone(), &s).unwrap().packed();
        let mut st = coset_state_direct(&a, &s, &bv("110")).unwrap();
        let before = st.clone();
        let r = coherent_membership(&mut st, &c, &mut rng);
        assert!(r.outcome);
        assert!((r.probability - 1.0).abs() < TOL);
        assert!((st.fidelity(&before).unwrap() - 1.0).abs() < TOL);
        let r = st.coherent_predicate(|_| false, &mut rng);
        assert!(!r.outcome);
        assert!((st.fidelity(&before).unwrap() - 1.0).abs() < TOL);
        // half the support: x with leading bit 1
        let r = st.coherent_predicate(|x| x & 0b100 != 0, &mut rng);
        assert!((r.probability - 0.5).abs() < TOL);
        let again = st.coherent_predicate(|x| x & 0b100 != 0, &mut rng);
        assert_eq!(again.outcome, r.outcome);
        assert!((again.probability - 1.0).abs() < TOL);
        assert!((st.norm_sqr() - 1.0).abs() < TOL);
    }

    #[test]
    fn measure_all_collapses() {
        let mut rng = from_seed(2);
        let mut z = StateVector::zero(4).unwrap();
        let r = z.measure_all(&mut rng);
        assert!(r.outcome.is_zero());
        assert_eq!(r.probability, 1.0);
        let mut st = StateVector::zero(3).unwrap();
        st.hadamard_all();
        let r = st.measure_all(&mut rng);
        assert!((r.probability - 0.125).abs() < TOL);
        assert_eq!(st, StateVector::basis(3, r.outcome.to_index()).unwrap());
    }

    #[test]
    fn hadamard_mask_matches_full() {
        let mut rng = from_seed(9);
        let a = sample_subspace(5, 2, &mut rng).unwrap();
        let st = coset_state_direct(&a, &BitVector::random(5, &mut rng), &BitVector::random(5, &mut rng)).unwrap();
        let mut x = st.clone();
        x.hadamard_all();
        let mut y = st.clone();
        y.hadamard_mask(0b11111);
        assert!((x.fidelity(&y).unwrap() - 1.0).abs() < TOL);
        let mut z = st.clone();
        z.hadamard_mask(qubit_range_mask(5, 0, 2));
        z.hadamard_mask(qubit_range_mask(5, 2, 3));
        assert!((x.fidelity(&z).unwrap() - 1.0).abs() < TOL);
    }

    #[test]
    fn csv_dump() {
        let mut out = alloc::string::String::new();
        StateVector::zero(1).unwrap().write_csv(&mut out).unwrap();
        assert!(out.starts_with("index,re,im\n0,1.000000000000e0,"));
        assert_eq!(out.lines().count(), 3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn chain_matches_formula(n in 1usize..=10, seed in any::<u64>()) {
            let mut rng = from_seed(seed);
            let d = (seed as usize >> 11) % (n + 1);
            let a = sample_subspace(n, d, &mut rng).unwrap();
            let s = BitVector::random(n, &mut rng);
            let sp = BitVector::random(n, &mut rng);
            let chain = prepare_coset_state(&a, &s, &sp).unwrap();
            let direct = coset_state_direct(&a, &s, &sp).unwrap();
            prop_assert!((chain.fidelity(&direct).unwrap() - 1.0).abs() < TOL);
            prop_assert!((chain.norm_sqr() - 1.0).abs() < TOL);
        }

        #[test]
        fn hadamard_is_involution(n in 1usize..=10, seed in any::<u64>()) {
            let mut rng = from_seed(seed);
            let a = sample_subspace(n, n / 2, &mut rng).unwrap();
            let st = coset_state_direct(&a, &BitVector::random(n, &mut rng), &BitVector::random(n, &mut rng)).unwrap();
            let mut t = st.clone();
            t.hadamard_all();
            prop_assert!((t.norm_sqr() - 1.0).abs() < TOL);
            t.hadamard_all();
            prop_assert!((t.fidelity(&st).unwrap() - 1.0).abs() < TOL);
        }

        #[test]
        fn measuring_coset_state_lands_in_coset(n in 2usize..=10, seed in any::<u64>()) {
            let mut rng = from_seed(seed);
            let a = sample_subspace(n, n / 2, &mut rng).unwrap();
            let s = BitVector::random(n, &mut rng);
            let mut st = prepare_coset_state(&a, &s, &BitVector::random(n, &mut rng)).unwrap();
            let r = st.measure_all(&mut rng);
            prop_assert_eq!(canonical_rep(&a, &r.outcome).unwrap(), canonical_rep(&a, &s).unwrap());
        }
    }
}
