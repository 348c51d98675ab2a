//! GF(2) vectors, subspaces in reduced row-echelon form, cosets and their
//! canonical representatives.
//!
//! Bit position 1 is the leftmost, most significant bit; in this API it is
//! index 0. Comparing two vectors of equal length with `Ord` is the
//! lexicographic order used by [`canonical_rep`].

use alloc::{string::String, vec, vec::Vec};
use core::{fmt, str::FromStr};

use rand::Rng;

use crate::{Error, Result};

/// Packed vector of `n` bits.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "String", into = "String"))]
pub struct BitVector {
    n: usize,
    words: Vec<u64>,
}

#[inline]
fn loc(i: usize) -> (usize, u64) {
    (i / 64, 1u64 << (63 - i % 64))
}

impl BitVector {
    pub fn zeros(n: usize) -> Self {
        BitVector { n, words: vec![0; n.div_ceil(64)] }
    }

    /// Vector whose bits read as the integer `x` (leftmost bit most significant).
    ///
    /// # Panics
    /// If `n > 64`.
    pub fn from_index(n: usize, x: u64) -> Self {
        assert!(n <= 64, "from_index needs n <= 64");
        let mut v = Self::zeros(n);
        if n > 0 {
            let x = if n == 64 { x } else { x & ((1u64 << n) - 1) };
            v.words[0] = x << (64 - n);
        }
        v
    }

    /// Integer reading of the bits, inverse of [`BitVector::from_index`].
    ///
    /// # Panics
    /// If `n > 64`.
    pub fn to_index(&self) -> u64 {
        assert!(self.n <= 64, "to_index needs n <= 64");
        if self.n == 0 {
            0
        } else {
            self.words[0] >> (64 - self.n)
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut v = Self::zeros(n);
        for w in v.words.iter_mut() {
            *w = rng.gen();
        }
        v.clear_tail();
        v
    }

    fn clear_tail(&mut self) {
        let r = self.n % 64;
        if r != 0 {
            let last = self.words.len() - 1;
            self.words[last] &= !0u64 << (64 - r);
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.n);
        let (w, m) = loc(i);
        self.words[w] & m != 0
    }

    #[inline]
    pub fn set(&mut self, i: usize, b: bool) {
        debug_assert!(i < self.n);
        let (w, m) = loc(i);
        if b {
            self.words[w] |= m;
        } else {
            self.words[w] &= !m;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        let (w, m) = loc(i);
        self.words[w] ^= m;
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.n).map(move |i| self.get(i))
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Index of the leftmost set bit.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .position(|&w| w != 0)
            .map(|k| k * 64 + self.words[k].leading_zeros() as usize)
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVector) -> BitVector {
        let mut v = self.clone();
        v.xor_assign(other);
        v
    }

    pub fn and(&self, other: &BitVector) -> BitVector {
        debug_assert_eq!(self.n, other.n);
        BitVector {
            n: self.n,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    /// Inner product mod 2.
    pub fn dot(&self, other: &BitVector) -> bool {
        debug_assert_eq!(self.n, other.n);
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        if self.n == n {
            Ok(())
        } else {
            Err(Error::LengthMismatch { expected: n, found: self.n })
        }
    }

    pub fn concat(parts: &[BitVector]) -> BitVector {
        let n = parts.iter().map(|p| p.n).sum();
        let mut v = Self::zeros(n);
        let mut at = 0;
        for p in parts {
            for i in 0..p.n {
                if p.get(i) {
                    v.set(at + i, true);
                }
            }
            at += p.n;
        }
        v
    }

    /// Bits `start..start + len`.
    pub fn slice(&self, start: usize, len: usize) -> BitVector {
        assert!(start + len <= self.n, "slice out of range");
        let mut v = Self::zeros(len);
        for i in 0..len {
            if self.get(start + i) {
                v.set(i, true);
            }
        }
        v
    }

    /// Consecutive pieces of the given lengths, which must sum to `len()`.
    pub fn split(&self, lens: &[usize]) -> Result<Vec<BitVector>> {
        let total: usize = lens.iter().sum();
        self.check_len(total)?;
        let mut at = 0;
        Ok(lens
            .iter()
            .map(|&l| {
                let p = self.slice(at, l);
                at += l;
                p
            })
            .collect())
    }

    /// Big-endian bytes of the bit string, zero padded on the right.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.n.div_ceil(8)];
        for i in 0..self.n {
            if self.get(i) {
                out[i / 8] |= 0x80 >> (i % 8);
            }
        }
        out
    }

    /// First `n` bits of `bytes`, most significant bit first.
    pub fn from_bytes(n: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() * 8 < n {
            return Err(Error::LengthMismatch { expected: n, found: bytes.len() * 8 });
        }
        let mut v = Self::zeros(n);
        for i in 0..n {
            if bytes[i / 8] & (0x80 >> (i % 8)) != 0 {
                v.set(i, true);
            }
        }
        Ok(v)
    }

    /// Hex digits of the integer reading, left padded to `ceil(n/4)` digits.
    pub fn to_hex(&self) -> String {
        let digits = self.n.div_ceil(4);
        let pad = digits * 4 - self.n;
        let mut s = String::with_capacity(digits);
        for d in 0..digits {
            let mut nib = 0u32;
            for k in 0..4 {
                let pos = d * 4 + k;
                nib <<= 1;
                if pos >= pad && self.get(pos - pad) {
                    nib |= 1;
                }
            }
            s.push(char::from_digit(nib, 16).unwrap());
        }
        s
    }

    /// Inverse of [`BitVector::to_hex`]; accepts an optional `0x` prefix.
    pub fn from_hex(n: usize, s: &str) -> Result<Self> {
        let s = s.trim();
        let s = s.strip_prefix("0x").unwrap_or(s);
        let digits = n.div_ceil(4);
        if s.len() != digits {
            return Err(Error::Parse(alloc::format!(
                "expected {digits} hex digits for {n} bits, got {}",
                s.len()
            )));
        }
        let pad = digits * 4 - n;
        let mut v = Self::zeros(n);
        for (d, c) in s.chars().enumerate() {
            let nib = c
                .to_digit(16)
                .ok_or_else(|| Error::Parse(alloc::format!("bad hex digit {c:?}")))?;
            for k in 0..4 {
                let pos = d * 4 + k;
                let bit = nib & (8 >> k) != 0;
                if pos < pad {
                    if bit {
                        return Err(Error::Parse("hex value exceeds bit length".into()));
                    }
                } else if bit {
                    v.set(pos - pad, true);
                }
            }
        }
        Ok(v)
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut v = Self::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => v.set(i, true),
                _ => return Err(Error::Parse(alloc::format!("bad bit character {c:?}"))),
            }
        }
        Ok(v)
    }
}

impl TryFrom<String> for BitVector {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<BitVector> for String {
    fn from(v: BitVector) -> String {
        alloc::format!("{v}")
    }
}

/// Subspace of F_2^n held as its reduced row-echelon basis.
///
/// Since RREF is a normal form, derived equality and hashing compare spans.
#[derive(Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "SubspaceRepr", into = "SubspaceRepr"))]
pub struct Subspace {
    n: usize,
    rows: Vec<BitVector>,
    pivots: Vec<usize>,
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct SubspaceRepr {
    n: usize,
    basis: Vec<BitVector>,
}

#[cfg(feature = "serde")]
impl TryFrom<SubspaceRepr> for Subspace {
    type Error = Error;

    fn try_from(r: SubspaceRepr) -> Result<Self> {
        rref(r.n, &r.basis)
    }
}

#[cfg(feature = "serde")]
impl From<Subspace> for SubspaceRepr {
    fn from(s: Subspace) -> Self {
        SubspaceRepr { n: s.n, basis: s.rows }
    }
}

/// Reduced row-echelon basis of the span of `rows`; zero rows are dropped.
pub fn rref(n: usize, rows: &[BitVector]) -> Result<Subspace> {
    for r in rows {
        r.check_len(n)?;
    }
    let mut rows: Vec<BitVector> = rows.iter().filter(|r| !r.is_zero()).cloned().collect();
    let mut pivots = Vec::new();
    let mut top = 0;
    for col in 0..n {
        if top == rows.len() {
            break;
        }
        let Some(p) = (top..rows.len()).find(|&i| rows[i].get(col)) else {
            continue;
        };
        rows.swap(top, p);
        let pivot_row = rows[top].clone();
        for (i, r) in rows.iter_mut().enumerate() {
            if i != top && r.get(col) {
                r.xor_assign(&pivot_row);
            }
        }
        pivots.push(col);
        top += 1;
    }
    rows.truncate(top);
    Ok(Subspace { n, rows, pivots })
}

impl Subspace {
    pub fn zero(n: usize) -> Self {
        Subspace { n, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                let mut v = BitVector::zeros(n);
                v.set(i, true);
                v
            })
            .collect();
        Subspace { n, rows, pivots: (0..n).collect() }
    }

    pub fn span(n: usize, rows: &[BitVector]) -> Result<Self> {
        rref(n, rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Residue of `v` after clearing every pivot column with basis rows.
    ///
    /// Zero exactly when `v` lies in the subspace.
    pub fn reduce(&self, v: &BitVector) -> BitVector {
        let mut r = v.clone();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if r.get(p) {
                r.xor_assign(row);
            }
        }
        r
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        v.len() == self.n && self.reduce(v).is_zero()
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.n == self.n && other.rows.iter().all(|r| self.contains(r))
    }

    /// Span of both subspaces.
    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        rref(self.n, &rows)
    }

    /// The orthogonal complement A⊥.
    pub fn complement(&self) -> Subspace {
        let mut is_pivot = vec![false; self.n];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        let rows: Vec<BitVector> = (0..self.n)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut v = BitVector::zeros(self.n);
                v.set(f, true);
                for (row, &p) in self.rows.iter().zip(&self.pivots) {
                    if row.get(f) {
                        v.set(p, true);
                    }
                }
                v
            })
            .collect();
        rref(self.n, &rows).expect("rows built with matching length")
    }

    /// All elements, in an order fixed by the basis.
    ///
    /// # Panics
    /// If the dimension exceeds 26.
    pub fn elements(&self) -> Vec<BitVector> {
        assert!(self.dim() <= 26, "too many elements to enumerate");
        let mut out = Vec::with_capacity(1 << self.dim());
        out.push(BitVector::zeros(self.n));
        for row in &self.rows {
            let k = out.len();
            for j in 0..k {
                let v = out[j].xor(row);
                out.push(v);
            }
        }
        out
    }

    /// Basis rows as integers, for `n <= 64`.
    pub fn packed_rows(&self) -> Vec<u64> {
        self.rows.iter().map(BitVector::to_index).collect()
    }

    /// Newline separated RREF rows.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                s.push('\n');
            }
            s.push_str(&alloc::format!("{r}"));
        }
        s
    }

    /// Parses rows separated by whitespace or commas.
    pub fn parse(n: usize, text: &str) -> Result<Subspace> {
        let rows = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<BitVector>>>()?;
        rref(n, &rows)
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace(n={}, [", self.n)?;
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{r}")?;
        }
        f.write_str("])")
    }
}

/// A⊥ for the given A.
pub fn complement(a: &Subspace) -> Subspace {
    a.complement()
}

/// Uniform subspace of dimension `d` in F_2^n.
///
/// Draws `d` uniform vectors and retries until they are independent.
pub fn sample_subspace<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<Subspace> {
    if d > n {
        return Err(Error::OutOfRange { what: "subspace dimension", value: d, min: 0, max: n });
    }
    loop {
        let rows: Vec<BitVector> = (0..d).map(|_| BitVector::random(n, rng)).collect();
        let s = rref(n, &rows)?;
        if s.dim() == d {
            return Ok(s);
        }
    }
}

/// Uniform B ⊇ A with dim B = `d1`.
pub fn sample_superspace<R: Rng + ?Sized>(a: &Subspace, d1: usize, rng: &mut R) -> Result<Subspace> {
    if d1 < a.dim() || d1 > a.n {
        return Err(Error::OutOfRange {
            what: "superspace dimension",
            value: d1,
            min: a.dim(),
            max: a.n,
        });
    }
    loop {
        let mut rows = a.rows.clone();
        rows.extend((a.dim()..d1).map(|_| BitVector::random(a.n, rng)));
        let b = rref(a.n, &rows)?;
        if b.dim() == d1 {
            return Ok(b);
        }
    }
}

/// Whether `v` lies in A + s.
pub fn coset_contains(a: &Subspace, s: &BitVector, v: &BitVector) -> Result<bool> {
    s.check_len(a.n)?;
    v.check_len(a.n)?;
    Ok(a.reduce(&v.xor(s)).is_zero())
}

/// Can_A(s): the lexicographically smallest element of A + s.
///
/// Fixes bits left to right. At each position it asks whether some element
/// of the coset that agrees with the bits fixed so far has a 0 there, which
/// is a linear system over the basis of A restricted to the prefix. The
/// system is solved incrementally: `free` spans the elements of A that vanish
/// on the fixed prefix, and `t` is the current coset element.
pub fn canonical_rep(a: &Subspace, s: &BitVector) -> Result<BitVector> {
    s.check_len(a.n)?;
    let mut t = s.clone();
    let mut free: Vec<BitVector> = a.rows.clone();
    for i in 0..a.n {
        if free.is_empty() {
            break;
        }
        if let Some(k) = free.iter().position(|v| v.get(i)) {
            let piv = free.swap_remove(k);
            if t.get(i) {
                t.xor_assign(&piv);
            }
            for v in free.iter_mut() {
                if v.get(i) {
                    v.xor_assign(&piv);
                }
            }
        }
    }
    Ok(t)
}

/// dim(A ∩ B) by the rank identity dim A + dim B - dim(A + B).
pub fn intersect_dim(a: &Subspace, b: &Subspace) -> Result<usize> {
    if a.n != b.n {
        return Err(Error::LengthMismatch { expected: a.n, found: b.n });
    }
    Ok(a.dim() + b.dim() - a.sum(b)?.dim())
}

/// The coset A + s with its offset in canonical form.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Coset {
    space: Subspace,
    offset: BitVector,
}

impl Coset {
    pub fn new(space: Subspace, s: &BitVector) -> Result<Self> {
        let offset = canonical_rep(&space, s)?;
        Ok(Coset { space, offset })
    }

    pub fn space(&self) -> &Subspace {
        &self.space
    }

    pub fn offset(&self) -> &BitVector {
        &self.offset
    }

    pub fn n(&self) -> usize {
        self.space.n
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        v.len() == self.space.n && self.space.reduce(&v.xor(&self.offset)).is_zero()
    }

    /// Word-level membership tester for `n <= 64`.
    pub fn packed(&self) -> PackedCoset {
        PackedCoset::new(&self.space, &self.offset)
    }
}

/// Coset membership on integer-encoded vectors (`n <= 64`).
#[derive(Clone, Debug)]
pub struct PackedCoset {
    rows: Vec<u64>,
    pivots: Vec<u64>,
    offset: u64,
}

impl PackedCoset {
    pub fn new(space: &Subspace, offset: &BitVector) -> Self {
        let n = space.n();
        PackedCoset {
            rows: space.packed_rows(),
            pivots: space.pivots().iter().map(|&p| 1u64 << (n - 1 - p)).collect(),
            offset: offset.to_index(),
        }
    }

    #[inline]
    pub fn contains(&self, x: u64) -> bool {
        let mut v = x ^ self.offset;
        for (r, p) in self.rows.iter().zip(&self.pivots) {
            if v & p != 0 {
                v ^= r;
            }
        }
        v == 0
    }
}

/// A hidden coset pair: A of dimension n/2 with offsets s and s'.
///
/// Determines the primal coset A + s and the dual coset A⊥ + s'.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HiddenCoset {
    pub a: Subspace,
    pub s: BitVector,
    pub s_prime: BitVector,
}

impl HiddenCoset {
    /// Uniform A of dimension n/2 and uniform s, s'.
    pub fn sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if n % 2 != 0 || n == 0 {
            return Err(Error::Invalid("n must be even and positive"));
        }
        let a = sample_subspace(n, n / 2, rng)?;
        let s = BitVector::random(n, rng);
        let s_prime = BitVector::random(n, rng);
        Ok(HiddenCoset { a, s, s_prime })
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    /// A + s.
    pub fn primal(&self) -> Coset {
        Coset::new(self.a.clone(), &self.s).expect("lengths agree")
    }

    /// A⊥ + s'.
    pub fn dual(&self) -> Coset {
        Coset::new(self.a.complement(), &self.s_prime).expect("lengths agree")
    }

    /// A + s for `false`, A⊥ + s' for `true`.
    pub fn side(&self, dual: bool) -> Coset {
        if dual {
            self.dual()
        } else {
            self.primal()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::from_seed;
    use proptest::prelude::*;
    use rand::Rng;

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    fn brute_min(a: &Subspace, s: &BitVector) -> BitVector {
        a.elements().iter().map(|x| x.xor(s)).min().unwrap()
    }

    #[test]
    fn rref_examples() {
        let a = rref(2, &[bv("10"), bv("01")]).unwrap();
        assert_eq!(a.basis(), &[bv("10"), bv("01")]);
        let b = rref(2, &[bv("11"), bv("01")]).unwrap();
        assert_eq!(b.basis(), &[bv("10"), bv("01")]);
        assert_eq!(rref(3, &[]).unwrap().dim(), 0);
        assert!(rref(2, &[bv("101")]).is_err());
    }

    #[test]
    fn complement_examples() {
        let a = Subspace::parse(2, "10").unwrap();
        assert_eq!(a.complement(), Subspace::parse(2, "01").unwrap());
        assert_eq!(Subspace::full(5).complement(), Subspace::zero(5));
    }

    #[test]
    fn coset_examples() {
        let a = Subspace::parse(2, "10").unwrap();
        assert!(coset_contains(&a, &bv("01"), &bv("11")).unwrap());
        assert!(coset_contains(&a, &bv("01"), &bv("01")).unwrap());
        assert!(!coset_contains(&a, &bv("01"), &bv("10")).unwrap());
        assert_eq!(canonical_rep(&a, &bv("11")).unwrap(), bv("01"));
        assert!(coset_contains(&a, &bv("1"), &bv("11")).is_err());
    }

    #[test]
    fn index_roundtrip() {
        let v = BitVector::from_index(5, 0b10110);
        assert_eq!(v, bv("10110"));
        assert_eq!(v.to_index(), 0b10110);
        assert_eq!(BitVector::from_index(64, u64::MAX).weight(), 64);
    }

    #[test]
    fn hex_roundtrip() {
        let v = bv("1011011");
        assert_eq!(v.to_hex(), "5b");
        assert_eq!(BitVector::from_hex(7, "5b").unwrap(), v);
        assert!(BitVector::from_hex(7, "db").is_err());
    }

    #[test]
    fn multiword_vectors() {
        let mut rng = from_seed(3);
        let v = BitVector::random(130, &mut rng);
        let parts = v.split(&[64, 1, 65]).unwrap();
        assert_eq!(BitVector::concat(&parts), v);
        let a = sample_subspace(130, 65, &mut rng).unwrap();
        assert_eq!(a.complement().dim(), 65);
        assert_eq!(a.complement().complement(), a);
        let c = canonical_rep(&a, &v).unwrap();
        assert!(coset_contains(&a, &v, &c).unwrap());
        assert_eq!(c, a.reduce(&v));
    }

    #[test]
    fn sampling_errors() {
        let mut rng = from_seed(1);
        assert!(sample_subspace(4, 5, &mut rng).is_err());
        let a = sample_subspace(6, 3, &mut rng).unwrap();
        assert!(sample_superspace(&a, 2, &mut rng).is_err());
        assert_eq!(sample_superspace(&a, 3, &mut rng).unwrap(), a);
        assert_eq!(sample_superspace(&a, 6, &mut rng).unwrap(), Subspace::full(6));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn complement_is_involution(n in 1usize..12, seed in any::<u64>()) {
            let mut rng = from_seed(seed);
            let d = (seed as usize) % (n + 1);
            let a = sample_subspace(n, d, &mut rng).unwrap();
            let c = a.complement();
            prop_assert_eq!(a.dim() + c.dim(), n);
            for x in a.basis() {
                for y in c.basis() {
                    prop_assert!(!x.dot(y));
                }
            }
            prop_assert_eq!(c.complement(), a);
        }

        #[test]
        fn canonical_rep_is_coset_minimum(n in 1usize..10, seed in any::<u64>()) {
            let mut rng = from_seed(seed);
            let d = (seed as usize >> 7) % (n + 1);
            let a = sample_subspace(n, d, &mut rng).unwrap();
            let s = BitVector::random(n, &mut rng);
            let c = canonical_rep(&a, &s).unwrap();
            prop_assert_eq!(&c, &brute_min(&a, &s));
            prop_assert_eq!(&c, &a.reduce(&s));
            for x in a.basis() {
                prop_assert_eq!(canonical_rep(&a, &s.xor(x)).unwrap(), c.clone());
            }
        }

        #[test]
        fn rref_is_normal_form(n in 1usize..10, seed in any::<u64>()) {
            let mut rng = from_seed(seed);
            let d = (seed as usize >> 3) % (n + 1);
            let a = sample_subspace(n, d, &mut rng).unwrap();
            // a different generating set of the same span
            let mut rows: Vec<BitVector> = a.elements().into_iter().filter(|_| rng.gen_bool(0.7)).collect();
            rows.extend(a.basis().iter().cloned());
            rows.reverse();
            prop_assert_eq!(rref(n, &rows).unwrap(), a);
        }

        #[test]
        fn bitstring_text_roundtrip(bits in proptest::collection::vec(any::<bool>(), 0..150)) {
            let v = BitVector::from_bools(&bits);
            let back: BitVector = alloc::format!("{v}").parse().unwrap();
            prop_assert_eq!(&back, &v);
            prop_assert_eq!(BitVector::from_hex(v.len(), &v.to_hex()).unwrap(), v);
        }
    }
}
