//! Puncturable PRFs.
//!
//! * [`GgmKey`]: the GGM tree over a hash-based length-doubling PRG.
//!   Children of a seed are SHA-256(seed ‖ 0x00) and SHA-256(seed ‖ 0x01);
//!   a leaf expands to the output as SHA-256(leaf ‖ 0x02 ‖ counter) blocks.
//! * [`HashedGgmKey`]: GGM(K, x) ⊕ h(x) with h(x) = Mx + b pairwise
//!   independent. With output length ℓ1 ≥ 2ℓ2 + λ it is injective except with
//!   probability 2^{-λ} (the F2 role); with input length n ≥ m + 2λ + 4 it is
//!   an extractor by the leftover hash lemma (the F1 role).
//! * F3 is a plain [`GgmKey`].
//!
//! Puncturing replaces the root by the sibling seeds along the paths to the
//! punctured points.

use alloc::{collections::BTreeSet, format, string::String, vec::Vec};

use rand::Rng;
use sha2::{Digest, Sha256};

use crate::gf2::BitVector;
use crate::{Error, Result};

pub type Seed = [u8; 32];

#[cfg(feature = "serde")]
mod hex_seed {
    use alloc::string::String;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(seed: &super::Seed, s: S) -> Result<S::Ok, S::Error> {
        let mut out = String::with_capacity(64);
        for b in seed {
            out.push(char::from_digit((b >> 4) as u32, 16).unwrap());
            out.push(char::from_digit((b & 15) as u32, 16).unwrap());
        }
        s.serialize_str(&out)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<super::Seed, D::Error> {
        let s = String::deserialize(d)?;
        let bytes = s.as_bytes();
        if bytes.len() != 64 {
            return Err(D::Error::custom("seed must be 64 hex digits"));
        }
        let mut seed = [0u8; 32];
        for (i, pair) in bytes.chunks(2).enumerate() {
            let hi = (pair[0] as char).to_digit(16).ok_or_else(|| D::Error::custom("bad hex"))?;
            let lo = (pair[1] as char).to_digit(16).ok_or_else(|| D::Error::custom("bad hex"))?;
            seed[i] = (hi * 16 + lo) as u8;
        }
        Ok(seed)
    }
}

fn child(seed: &Seed, bit: bool) -> Seed {
    let mut h = Sha256::new();
    h.update(seed);
    h.update([bit as u8]);
    h.finalize().into()
}

fn expand(leaf: &Seed, out_len: usize) -> BitVector {
    let mut bytes = Vec::with_capacity(out_len.div_ceil(256) * 32);
    let mut ctr: u32 = 0;
    while bytes.len() * 8 < out_len {
        let mut h = Sha256::new();
        h.update(leaf);
        h.update([2u8]);
        h.update(ctr.to_be_bytes());
        bytes.extend_from_slice(&h.finalize());
        ctr += 1;
    }
    BitVector::from_bytes(out_len, &bytes).expect("enough bytes")
}

fn walk(mut seed: Seed, x: &BitVector, from: usize) -> Seed {
    for i in from..x.len() {
        seed = child(&seed, x.get(i));
    }
    seed
}

/// GGM key: a root seed for `in_len`-bit inputs and `out_len`-bit outputs.
#[derive(Clone, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GgmKey {
    #[cfg_attr(feature = "serde", serde(with = "hex_seed"))]
    pub root: Seed,
    pub in_len: usize,
    pub out_len: usize,
}

impl GgmKey {
    pub fn generate<R: Rng + ?Sized>(in_len: usize, out_len: usize, rng: &mut R) -> Result<Self> {
        if out_len == 0 {
            return Err(Error::Invalid("output length must be positive"));
        }
        let mut root = [0u8; 32];
        rng.fill(&mut root);
        Ok(GgmKey { root, in_len, out_len })
    }

    pub fn eval(&self, x: &BitVector) -> Result<BitVector> {
        x.check_len(self.in_len)?;
        Ok(expand(&walk(self.root, x, 0), self.out_len))
    }
}

pub fn ggm_eval(k: &GgmKey, x: &BitVector) -> Result<BitVector> {
    k.eval(x)
}

/// Seed of an internal tree node, identified by its path from the root.
#[derive(Clone, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CopathNode {
    pub prefix: BitVector,
    #[cfg_attr(feature = "serde", serde(with = "hex_seed"))]
    pub seed: Seed,
}

/// GGM key that evaluates everywhere except the punctured set.
#[derive(Clone, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PuncturedKey {
    pub in_len: usize,
    pub out_len: usize,
    pub punctured: Vec<BitVector>,
    pub copath: Vec<CopathNode>,
}

fn is_prefix(p: &BitVector, x: &BitVector) -> bool {
    p.len() <= x.len() && (0..p.len()).all(|i| p.get(i) == x.get(i))
}

/// Punctures `k` at every point of `set`.
pub fn puncture(k: &GgmKey, set: &[BitVector]) -> Result<PuncturedKey> {
    for x in set {
        x.check_len(k.in_len)?;
    }
    let mut prefixes: BTreeSet<BitVector> = BTreeSet::new();
    for x in set {
        for l in 0..=k.in_len {
            prefixes.insert(x.slice(0, l));
        }
    }
    let mut copath = Vec::new();
    if set.is_empty() {
        copath.push(CopathNode { prefix: BitVector::zeros(0), seed: k.root });
    }
    for p in &prefixes {
        if p.len() == k.in_len {
            continue;
        }
        let seed = walk(k.root, p, 0);
        for b in [false, true] {
            let mut c = BitVector::concat(&[p.clone(), BitVector::zeros(1)]);
            c.set(p.len(), b);
            if !prefixes.contains(&c) {
                copath.push(CopathNode { prefix: c, seed: child(&seed, b) });
            }
        }
    }
    let mut punctured: Vec<BitVector> = set.to_vec();
    punctured.sort();
    punctured.dedup();
    Ok(PuncturedKey { in_len: k.in_len, out_len: k.out_len, punctured, copath })
}

impl PuncturedKey {
    pub fn eval(&self, x: &BitVector) -> Result<BitVector> {
        x.check_len(self.in_len)?;
        let node = self
            .copath
            .iter()
            .find(|c| is_prefix(&c.prefix, x))
            .ok_or(Error::Punctured)?;
        Ok(expand(&walk(node.seed, x, node.prefix.len()), self.out_len))
    }
}

/// h(x) = Mx + b over F_2.
#[derive(Clone, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairwiseHash {
    pub rows: Vec<BitVector>,
    pub offset: BitVector,
}

impl PairwiseHash {
    pub fn generate<R: Rng + ?Sized>(in_len: usize, out_len: usize, rng: &mut R) -> Self {
        PairwiseHash {
            rows: (0..out_len).map(|_| BitVector::random(in_len, rng)).collect(),
            offset: BitVector::random(out_len, rng),
        }
    }

    pub fn in_len(&self) -> usize {
        self.rows.first().map_or(0, BitVector::len)
    }

    pub fn out_len(&self) -> usize {
        self.offset.len()
    }

    pub fn eval(&self, x: &BitVector) -> Result<BitVector> {
        if let Some(r) = self.rows.first() {
            x.check_len(r.len())?;
        }
        let mut y = self.offset.clone();
        for (j, r) in self.rows.iter().enumerate() {
            if r.dot(x) {
                y.flip(j);
            }
        }
        Ok(y)
    }
}

/// Whether parameter constraints are enforced or only reported.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Mode {
    Strict,
    Toy,
}

/// GGM(K, x) ⊕ h(x).
#[derive(Clone, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HashedGgmKey {
    pub ggm: GgmKey,
    pub hash: PairwiseHash,
}

/// Punctured form of a [`HashedGgmKey`]; the hash is public.
#[derive(Clone, PartialEq, Eq, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PuncturedHashedKey {
    pub ggm: PuncturedKey,
    pub hash: PairwiseHash,
}

impl HashedGgmKey {
    fn generate<R: Rng + ?Sized>(in_len: usize, out_len: usize, rng: &mut R) -> Result<Self> {
        Ok(HashedGgmKey {
            ggm: GgmKey::generate(in_len, out_len, rng)?,
            hash: PairwiseHash::generate(in_len, out_len, rng),
        })
    }

    /// F2 key: ℓ2-bit inputs, ℓ1-bit outputs, requires ℓ1 ≥ 2ℓ2 + λ.
    pub fn injective<R: Rng + ?Sized>(l2: usize, l1: usize, lambda: usize, mode: Mode, rng: &mut R) -> Result<Self> {
        if mode == Mode::Strict && l1 < 2 * l2 + lambda {
            return Err(Error::Constraint(format!("injective PRF needs l1 >= 2*l2 + lambda ({l1} < {})", 2 * l2 + lambda)));
        }
        Self::generate(l2, l1, rng)
    }

    /// F1 key: n-bit inputs, m-bit outputs, requires n ≥ m + 2λ + 4.
    pub fn extracting<R: Rng + ?Sized>(n: usize, m: usize, lambda: usize, mode: Mode, rng: &mut R) -> Result<Self> {
        if mode == Mode::Strict && n < m + 2 * lambda + 4 {
            return Err(Error::Constraint(format!("extracting PRF needs n >= m + 2*lambda + 4 ({n} < {})", m + 2 * lambda + 4)));
        }
        Self::generate(n, m, rng)
    }

    pub fn in_len(&self) -> usize {
        self.ggm.in_len
    }

    pub fn out_len(&self) -> usize {
        self.ggm.out_len
    }

    pub fn eval(&self, x: &BitVector) -> Result<BitVector> {
        Ok(self.ggm.eval(x)?.xor(&self.hash.eval(x)?))
    }

    pub fn puncture(&self, set: &[BitVector]) -> Result<PuncturedHashedKey> {
        Ok(PuncturedHashedKey { ggm: puncture(&self.ggm, set)?, hash: self.hash.clone() })
    }
}

impl PuncturedHashedKey {
    pub fn eval(&self, x: &BitVector) -> Result<BitVector> {
        Ok(self.ggm.eval(x)?.xor(&self.hash.eval(x)?))
    }
}

/// F2(K2, x).
pub fn injective_prf_eval(k: &HashedGgmKey, x: &BitVector) -> Result<BitVector> {
    k.eval(x)
}

/// F1(K1, x).
pub fn extracting_prf_eval(k: &HashedGgmKey, x: &BitVector) -> Result<BitVector> {
    k.eval(x)
}

/// Bits taken by a serialized trigger program: selector, payload and one
/// register reference per selector bit.
pub fn trigger_program_bits(l0: usize, m_len: usize) -> usize {
    l0 + m_len + l0 * reference_bits(l0)
}

/// Bits needed to name one of `l0` registers.
pub fn reference_bits(l0: usize) -> usize {
    if l0 <= 1 {
        0
    } else {
        (usize::BITS - (l0 - 1).leading_zeros()) as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ConstraintCheck {
    pub name: &'static str,
    pub requirement: String,
    pub satisfied: bool,
}

/// Outcome of checking copy-protection parameters against their constraints.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ParamReport {
    pub n: usize,
    pub checks: Vec<ConstraintCheck>,
}

impl ParamReport {
    pub fn violations(&self) -> Vec<&ConstraintCheck> {
        self.checks.iter().filter(|c| !c.satisfied).collect()
    }

    pub fn all_satisfied(&self) -> bool {
        self.checks.iter().all(|c| c.satisfied)
    }
}

impl core::fmt::Display for ParamReport {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        writeln!(f, "parameter report (n = {}):", self.n)?;
        for c in &self.checks {
            let tag = if c.satisfied { "ok" } else { "WAIVED/VIOLATED" };
            writeln!(f, "  [{tag}] {}: {}", c.name, c.requirement)?;
        }
        Ok(())
    }
}

pub fn params_check(l0: usize, l1: usize, l2: usize, lambda: usize, m_len: usize) -> ParamReport {
    let n = l0 + l1 + l2;
    let q = trigger_program_bits(l0, m_len);
    let checks = alloc::vec![
        ConstraintCheck {
            name: "input-length",
            requirement: format!("n = l0 + l1 + l2 = {l0} + {l1} + {l2} = {n}"),
            satisfied: true,
        },
        ConstraintCheck {
            name: "extracting",
            requirement: format!("n >= m + 2*lambda + 4: {n} >= {}", m_len + 2 * lambda + 4),
            satisfied: n >= m_len + 2 * lambda + 4,
        },
        ConstraintCheck {
            name: "injective",
            requirement: format!("l1 >= 2*l2 + lambda: {l1} >= {}", 2 * l2 + lambda),
            satisfied: l1 >= 2 * l2 + lambda,
        },
        ConstraintCheck {
            name: "trigger-capacity",
            requirement: format!("l2 >= l0 + |Q|: {l2} >= {l0} + {q}"),
            satisfied: l2 >= l0 + q,
        },
    ];
    ParamReport { n, checks }
}
