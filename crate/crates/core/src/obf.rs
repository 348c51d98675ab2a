//! Oracle-model program stubs.
//!
//! Every "obfuscator" here returns a program that behaves exactly like its
//! input and hides nothing. The kind tag records which primitive a program
//! stands in for so no one mistakes these wrappers for secure obfuscation.
//! Sizes are bookkeeping in abstract units.

use alloc::sync::Arc;
use core::fmt;

use rand::Rng;

use crate::gf2::{sample_superspace, BitVector, Coset, Subspace};
use crate::{Error, Result};

/// Which primitive a program stands in for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ProgramKind {
    IoStub,
    ShoStub,
    Cc,
    CcSim,
    Raw,
}

impl ProgramKind {
    pub fn name(self) -> &'static str {
        match self {
            ProgramKind::IoStub => "io-stub",
            ProgramKind::ShoStub => "sho-stub",
            ProgramKind::Cc => "cc",
            ProgramKind::CcSim => "cc-sim",
            ProgramKind::Raw => "raw",
        }
    }
}

type Evaluator<O> = Arc<dyn Fn(&BitVector) -> O + Send + Sync>;

/// Deterministic program on `input_len`-bit inputs.
pub struct ObfProgram<O> {
    kind: ProgramKind,
    input_len: usize,
    padded_size: usize,
    eval: Evaluator<O>,
}

impl<O> Clone for ObfProgram<O> {
    fn clone(&self) -> Self {
        ObfProgram {
            kind: self.kind,
            input_len: self.input_len,
            padded_size: self.padded_size,
            eval: Arc::clone(&self.eval),
        }
    }
}

impl<O> fmt::Debug for ObfProgram<O> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ObfProgram({}, input_len={}, padded_size={})",
            self.kind.name(),
            self.input_len,
            self.padded_size
        )
    }
}

impl<O> ObfProgram<O> {
    /// Plain program with the given description size.
    pub fn raw<F>(input_len: usize, size: usize, f: F) -> Self
    where
        F: Fn(&BitVector) -> O + Send + Sync + 'static,
    {
        ObfProgram { kind: ProgramKind::Raw, input_len, padded_size: size, eval: Arc::new(f) }
    }

    pub fn kind(&self) -> ProgramKind {
        self.kind
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    pub fn padded_size(&self) -> usize {
        self.padded_size
    }

    /// # Panics
    /// If `x` has the wrong length.
    pub fn eval(&self, x: &BitVector) -> O {
        assert_eq!(x.len(), self.input_len, "program input length");
        (self.eval)(x)
    }

    pub fn try_eval(&self, x: &BitVector) -> Result<O> {
        x.check_len(self.input_len)?;
        Ok((self.eval)(x))
    }
}

/// Size of a membership program for a coset of a `dim`-dimensional subspace.
pub fn membership_size(n: usize, dim: usize) -> usize {
    (dim + 1) * n
}

/// Membership test for a coset, as a raw program.
pub fn membership_program(coset: &Coset) -> ObfProgram<bool> {
    let n = coset.n();
    let size = membership_size(n, coset.space().dim());
    if n <= 64 {
        let packed = coset.packed();
        ObfProgram::raw(n, size, move |x| packed.contains(x.to_index()))
    } else {
        let c = coset.clone();
        ObfProgram::raw(n, size, move |x| c.contains(x))
    }
}

/// iO stand-in: same behavior, declared size `pad`.
pub fn io_stub<O>(prog: &ObfProgram<O>, pad: usize) -> Result<ObfProgram<O>> {
    if pad < prog.padded_size {
        return Err(Error::OutOfRange {
            what: "padding",
            value: pad,
            min: prog.padded_size,
            max: usize::MAX,
        });
    }
    Ok(ObfProgram {
        kind: ProgramKind::IoStub,
        input_len: prog.input_len,
        padded_size: pad,
        eval: Arc::clone(&prog.eval),
    })
}

/// Subspace-hiding stand-in: membership in a uniform superspace B ⊇ A of dimension `d1`.
pub fn sho_stub<R: Rng + ?Sized>(a: &Subspace, d1: usize, rng: &mut R) -> Result<ObfProgram<bool>> {
    let b = sample_superspace(a, d1, rng)?;
    let n = b.n();
    let mut p = membership_program(&Coset::new(b, &BitVector::zeros(n))?);
    p.kind = ProgramKind::ShoStub;
    Ok(p)
}

/// Sizes that a compute-and-compare simulator must reproduce.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CcParams {
    pub input_len: usize,
    pub lock_len: usize,
    pub payload_len: usize,
    pub size: usize,
}

/// CC[f, y, z]: outputs z when f(x) = y, otherwise ⊥.
#[derive(Clone)]
pub struct CcProgram {
    f: Arc<dyn Fn(&BitVector) -> BitVector + Send + Sync>,
    f_size: usize,
    input_len: usize,
    y: BitVector,
    z: BitVector,
}

impl fmt::Debug for CcProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CcProgram(input_len={}, y={}, z={})", self.input_len, self.y, self.z)
    }
}

pub fn cc_program<F>(input_len: usize, f: F, f_size: usize, y: BitVector, z: BitVector) -> CcProgram
where
    F: Fn(&BitVector) -> BitVector + Send + Sync + 'static,
{
    CcProgram { f: Arc::new(f), f_size, input_len, y, z }
}

pub fn cc_eval(cc: &CcProgram, x: &BitVector) -> Option<BitVector> {
    if (cc.f)(x) == cc.y {
        Some(cc.z.clone())
    } else {
        None
    }
}

impl CcProgram {
    pub fn lock(&self) -> &BitVector {
        &self.y
    }

    pub fn payload(&self) -> &BitVector {
        &self.z
    }

    pub fn params(&self) -> CcParams {
        CcParams {
            input_len: self.input_len,
            lock_len: self.y.len(),
            payload_len: self.z.len(),
            size: self.f_size + self.y.len() + self.z.len(),
        }
    }

    /// Compute-and-compare obfuscation stand-in.
    pub fn obfuscate(&self) -> ObfProgram<Option<BitVector>> {
        let cc = self.clone();
        ObfProgram {
            kind: ProgramKind::Cc,
            input_len: self.input_len,
            padded_size: self.params().size,
            eval: Arc::new(move |x| cc_eval(&cc, x)),
        }
    }
}

/// Simulator output: the constant-⊥ program with matching size.
pub fn cc_sim_stub(params: CcParams) -> ObfProgram<Option<BitVector>> {
    ObfProgram {
        kind: ProgramKind::CcSim,
        input_len: params.input_len,
        padded_size: params.size,
        eval: Arc::new(|_| None),
    }
}

/// Whether two programs agree on every element of `domain`.
pub fn equiv_on_domain<O, I>(p1: &ObfProgram<O>, p2: &ObfProgram<O>, domain: I) -> bool
where
    O: PartialEq,
    I: IntoIterator<Item = BitVector>,
{
    domain.into_iter().all(|x| p1.eval(&x) == p2.eval(&x))
}

/// Every vector of F_2^n in increasing order.
///
/// # Panics
/// If `n > 32`.
pub fn all_inputs(n: usize) -> impl Iterator<Item = BitVector> {
    assert!(n <= 32, "domain too large to enumerate");
    (0..1u64 << n).map(move |x| BitVector::from_index(n, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::{canonical_rep, coset_contains, sample_subspace};
    use crate::rng::from_seed;

    #[test]
    fn io_stub_is_identity_on_behavior() {
        let mut rng = from_seed(11);
        for n in [2usize, 6, 10] {
            let a = sample_subspace(n, n / 2, &mut rng).unwrap();
            let s = BitVector::random(n, &mut rng);
            let raw = membership_program(&Coset::new(a.clone(), &s).unwrap());
            let p = io_stub(&raw, 10_000).unwrap();
            assert_eq!(p.kind(), ProgramKind::IoStub);
            assert_eq!(p.padded_size(), 10_000);
            for x in all_inputs(n) {
                assert_eq!(p.eval(&x), coset_contains(&a, &s, &x).unwrap());
            }
        }
        let bottom: ObfProgram<Option<BitVector>> = ObfProgram::raw(3, 1, |_| None);
        let p = io_stub(&bottom, 1).unwrap();
        assert!(all_inputs(3).all(|x| p.eval(&x).is_none()));
        assert!(io_stub(&bottom, 0).is_err());
    }

    #[test]
    fn sho_stub_accepts_superspace() {
        let mut rng = from_seed(12);
        for n in [4usize, 8, 10] {
            let a = sample_subspace(n, n / 2, &mut rng).unwrap();
            for d1 in n / 2..=n {
                let p = sho_stub(&a, d1, &mut rng).unwrap();
                assert!(a.elements().iter().all(|v| p.eval(v)));
                let count = all_inputs(n).filter(|x| p.eval(x)).count();
                assert_eq!(count, 1 << d1);
            }
            let p = sho_stub(&a, n / 2, &mut rng).unwrap();
            assert!(all_inputs(n).all(|x| p.eval(&x) == a.contains(&x)));
            assert!(sho_stub(&a, n / 2 - 1, &mut rng).is_err());
        }
    }

    #[test]
    fn cc_semantics() {
        let id = cc_program(4, |x: &BitVector| x.clone(), 4, "1010".parse().unwrap(), "11".parse().unwrap());
        assert_eq!(cc_eval(&id, &"1010".parse().unwrap()), Some("11".parse().unwrap()));
        assert_eq!(cc_eval(&id, &"1011".parse().unwrap()), None);
    }

    #[test]
    fn cc_on_canonical_rep_accepts_coset() {
        let mut rng = from_seed(13);
        for n in [3usize, 8, 10] {
            let a = sample_subspace(n, n / 2, &mut rng).unwrap();
            let s = BitVector::random(n, &mut rng);
            let y = canonical_rep(&a, &s).unwrap();
            let a2 = a.clone();
            let cc = cc_program(n, move |x: &BitVector| canonical_rep(&a2, x).unwrap(), n * n, y, "1".parse().unwrap());
            let member = membership_program(&Coset::new(a.clone(), &s).unwrap());
            for x in all_inputs(n) {
                assert_eq!(cc_eval(&cc, &x).is_some(), member.eval(&x));
            }
            let sim = cc_sim_stub(cc.params());
            assert_eq!(sim.padded_size(), cc.params().size);
            let real = cc.obfuscate();
            let differ: usize = all_inputs(n).filter(|x| real.eval(x) != sim.eval(x)).count();
            assert_eq!(differ, 1 << (n / 2));
        }
    }

    #[test]
    fn equivalence_checks() {
        let mut rng = from_seed(14);
        let n = 8;
        let b = sample_subspace(n, 4, &mut rng).unwrap();
        let s = BitVector::random(n, &mut rng);
        let p = membership_program(&Coset::new(b.clone(), &s).unwrap());
        for t in b.elements() {
            let q = membership_program(&Coset::new(b.clone(), &s.xor(&t)).unwrap());
            assert!(equiv_on_domain(&p, &q, all_inputs(n)));
        }
        let outside = loop {
            let t = BitVector::random(n, &mut rng);
            if !b.contains(&t) {
                break t;
            }
        };
        let q = membership_program(&Coset::new(b, &s.xor(&outside)).unwrap());
        assert!(!equiv_on_domain(&p, &q, all_inputs(n)));
    }
}
