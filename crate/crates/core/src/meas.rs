//! Projective and threshold implementations of mixtures of projective
//! measurements.
//!
//! A mixture P_D = Σ p_i P_i is diagonalized exactly. ProjImp measures in its
//! eigenbasis and reports the eigenvalue; TI_γ projects onto the span of the
//! eigenvectors with eigenvalue at least γ.
//!
//! Hermitian matrices are diagonalized through the real symmetric embedding
//! [[X, −Y], [Y, X]] of X + iY with a cyclic Jacobi sweep. Each complex
//! eigenvalue shows up twice there, and the complex eigenprojector is read off
//! the real one R as R_tl + i·R_bl.

use alloc::{vec, vec::Vec};

use rand::Rng;

use crate::gf2::BitVector;
use crate::qsim::{qubit_range_mask, StateVector, C64};
use crate::sde::{encrypt_with, SdePublicKey};
use crate::{Error, Result};

/// Tolerance for Hermitian, idempotence and probability checks.
pub const MATRIX_TOL: f64 = 1e-8;

/// Eigenvalues closer than this are treated as one eigenspace.
pub const CLUSTER_TOL: f64 = 1e-8;

/// Largest dimension [`decryptor_mixture`] will build.
pub const MAX_MIXTURE_DIM: usize = 128;

/// Dense square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        CMatrix { dim, data: vec![zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> C64>(dim: usize, mut f: F) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(dim: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::LengthMismatch { expected: dim * dim, found: data.len() });
        }
        Ok(CMatrix { dim, data })
    }

    /// Diagonal 0/1 matrix.
    pub fn diag_indicator<F: Fn(usize) -> bool>(dim: usize, f: F) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            if f(i) {
                m.data[i * dim + i] = C64::new(1.0, 0.0);
            }
        }
        m
    }

    /// |ψ⟩⟨ψ|.
    pub fn outer(psi: &[C64]) -> Self {
        Self::from_fn(psi.len(), |i, j| psi[i] * psi[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn mul(&self, other: &CMatrix) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == zero() {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += a * other.data[k * d + j];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &CMatrix) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(i, j) + other.get(i, j))
    }

    pub fn sub(&self, other: &CMatrix) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(i, j) - other.get(i, j))
    }

    pub fn scale(&self, s: f64) -> Self {
        CMatrix { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let d = self.dim;
        (0..d).map(|i| (0..d).map(|j| self.data[i * d + j] * v[j]).sum()).collect()
    }

    /// ⟨v|M|v⟩, real part.
    pub fn expectation(&self, v: &[C64]) -> f64 {
        let mv = self.apply(v);
        v.iter().zip(&mv).map(|(a, b)| (a.conj() * b).re).sum()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest entrywise modulus of the difference.
    pub fn max_diff(&self, other: &CMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..self.dim).all(|i| (i..self.dim).all(|j| (self.get(i, j) - self.get(j, i).conj()).norm() <= tol))
    }

    pub fn is_projector(&self, tol: f64) -> bool {
        self.is_hermitian(tol) && self.mul(self).max_diff(self) <= tol
    }

    /// U† D U for a real symmetric involution U given by its action on vectors.
    fn conjugate_by<F: Fn(&mut [C64])>(&self, u: F) -> Self {
        let d = self.dim;
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
        for k in 0..d {
            let mut e = vec![zero(); d];
            e[k] = C64::new(1.0, 0.0);
            u(&mut e);
            cols.push(e);
        }
        let du: Vec<Vec<C64>> = cols.iter().map(|c| self.apply(c)).collect();
        Self::from_fn(d, |i, j| cols[i].iter().zip(&du[j]).map(|(a, b)| a.conj() * b).sum())
    }
}

/// Eigenvalues and orthonormal eigenvectors (as columns of `vecs`, row-major
/// n×n) of a real symmetric matrix.
fn jacobi_eigen(mut a: Vec<f64>, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = a.iter().map(|x| x * x).sum::<f64>().max(1e-300);
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i * n + j] * a[i * n + j]).sum();
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i * n + i]).collect(), v)
}

/// Spectral decomposition of a Hermitian matrix: distinct eigenvalues
/// (ascending) with their eigenprojectors.
pub fn hermitian_spectrum(m: &CMatrix) -> Result<Vec<(f64, CMatrix)>> {
    if !m.is_hermitian(MATRIX_TOL) {
        return Err(Error::NotHermitian);
    }
    let d = m.dim;
    let n = 2 * d;
    let mut real = vec![0.0; n * n];
    for i in 0..d {
        for j in 0..d {
            let z = m.get(i, j);
            real[i * n + j] = z.re;
            real[(i + d) * n + j + d] = z.re;
            real[i * n + j + d] = -z.im;
            real[(i + d) * n + j] = z.im;
        }
    }
    let (vals, vecs) = jacobi_eigen(real, n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &k in &order {
        match clusters.last_mut() {
            Some(c) if vals[k] - vals[*c.last().unwrap()] <= CLUSTER_TOL => c.push(k),
            _ => clusters.push(vec![k]),
        }
    }
    let mut out = Vec::with_capacity(clusters.len());
    for c in clusters {
        let lambda = c.iter().map(|&k| vals[k]).sum::<f64>() / c.len() as f64;
        let p = CMatrix::from_fn(d, |i, j| {
            let mut tl = 0.0;
            let mut bl = 0.0;
            for &k in &c {
                tl += vecs[i * n + k] * vecs[j * n + k];
                bl += vecs[(i + d) * n + k] * vecs[j * n + k];
            }
            C64::new(tl, bl)
        });
        out.push((lambda, p));
    }
    Ok(out)
}

/// Hermitian idempotent matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectorOp {
    matrix: CMatrix,
}

impl ProjectorOp {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_hermitian(MATRIX_TOL) {
            return Err(Error::NotHermitian);
        }
        if matrix.mul(&matrix).max_diff(&matrix) > MATRIX_TOL {
            return Err(Error::NotProjector);
        }
        Ok(ProjectorOp { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// I − P.
    pub fn complement(&self) -> ProjectorOp {
        ProjectorOp { matrix: CMatrix::identity(self.dim()).sub(&self.matrix) }
    }
}

/// Eigenbasis measurement of a mixture.
#[derive(Clone, Debug)]
pub struct ProjImp {
    /// Ascending distinct eigenvalues with eigenprojectors.
    pub spectrum: Vec<(f64, CMatrix)>,
}

impl ProjImp {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.spectrum.iter().map(|(l, _)| *l).collect()
    }

    /// Projector onto eigenvalues ≥ γ.
    pub fn threshold_projector(&self, gamma: f64) -> CMatrix {
        let d = self.spectrum.first().map(|(_, p)| p.dim).unwrap_or(0);
        self.spectrum
            .iter()
            .filter(|(l, _)| *l >= gamma - CLUSTER_TOL)
            .fold(CMatrix::zeros(d), |acc, (_, p)| acc.add(p))
    }

    /// Distribution of the reported eigenvalue on a state.
    pub fn distribution(&self, psi: &[C64]) -> Vec<(f64, f64)> {
        self.spectrum.iter().map(|(l, p)| (*l, p.expectation(psi).max(0.0))).collect()
    }

    /// Pr[TI_γ accepts ψ].
    pub fn acceptance_mass(&self, gamma: f64, psi: &[C64]) -> f64 {
        self.threshold_projector(gamma).expectation(psi).clamp(0.0, 1.0)
    }
}

/// Σ p_i P_i with its eigendecomposition.
#[derive(Clone, Debug)]
pub struct ProjectiveMixture {
    pub items: Vec<(f64, ProjectorOp)>,
    pub operator: CMatrix,
    imp: ProjImp,
}

impl ProjectiveMixture {
    pub fn dim(&self) -> usize {
        self.operator.dim
    }

    pub fn proj_imp(&self) -> &ProjImp {
        &self.imp
    }

    /// ⟨ψ|P_D|ψ⟩, the acceptance probability of the mixture.
    pub fn expectation(&self, psi: &[C64]) -> f64 {
        self.operator.expectation(psi)
    }
}

pub fn build_mixture(items: Vec<(f64, ProjectorOp)>) -> Result<ProjectiveMixture> {
    let first = items.first().ok_or(Error::BadProbabilities)?;
    let d = first.1.dim();
    let mut total = 0.0;
    let mut op = CMatrix::zeros(d);
    for (p, proj) in &items {
        if !(*p >= 0.0) || proj.dim() != d {
            return Err(if proj.dim() != d {
                Error::LengthMismatch { expected: d, found: proj.dim() }
            } else {
                Error::BadProbabilities
            });
        }
        total += p;
        op = op.add(&proj.matrix.scale(*p));
    }
    if (total - 1.0).abs() > MATRIX_TOL {
        return Err(Error::BadProbabilities);
    }
    let spectrum = hermitian_spectrum(&op)?;
    Ok(ProjectiveMixture { items, operator: op, imp: ProjImp { spectrum } })
}

fn check_state(dim: usize, psi: &[C64]) -> Result<()> {
    if psi.len() != dim {
        return Err(Error::LengthMismatch { expected: dim, found: psi.len() });
    }
    Ok(())
}

fn collapse(p: &CMatrix, psi: &[C64], prob: f64) -> Vec<C64> {
    let norm = libm::sqrt(prob);
    p.apply(psi).into_iter().map(|z| z / norm).collect()
}

/// ProjImp on ψ: returns the eigenvalue p and the collapsed state.
pub fn proj_imp_apply<R: Rng + ?Sized>(mix: &ProjectiveMixture, psi: &[C64], rng: &mut R) -> Result<(f64, Vec<C64>)> {
    check_state(mix.dim(), psi)?;
    let dist = mix.imp.distribution(psi);
    let total: f64 = dist.iter().map(|(_, w)| w).sum();
    let mut r = rng.gen::<f64>() * total;
    let mut pick = dist.len() - 1;
    for (k, (_, w)) in dist.iter().enumerate() {
        if r < *w {
            pick = k;
            break;
        }
        r -= w;
    }
    while dist[pick].1 <= 0.0 && pick > 0 {
        pick -= 1;
    }
    let (lambda, proj) = &mix.imp.spectrum[pick];
    Ok((*lambda, collapse(proj, psi, dist[pick].1)))
}

/// TI_γ on ψ: the projective measurement {Π_{≥γ}, I − Π_{≥γ}}.
pub fn threshold_imp_apply<R: Rng + ?Sized>(
    mix: &ProjectiveMixture,
    gamma: f64,
    psi: &[C64],
    rng: &mut R,
) -> Result<(bool, Vec<C64>)> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Invalid("threshold must lie in [0, 1]"));
    }
    check_state(mix.dim(), psi)?;
    let accept = mix.imp.threshold_projector(gamma);
    let p = accept.expectation(psi).clamp(0.0, 1.0);
    if rng.gen::<f64>() < p {
        Ok((true, collapse(&accept, psi, p)))
    } else {
        let reject = CMatrix::identity(mix.dim()).sub(&accept);
        Ok((false, collapse(&reject, psi, 1.0 - p)))
    }
}

/// Quantum decryptor circuits: a unitary followed by a computational-basis
/// readout.
#[derive(Clone, Debug)]
pub enum Decryptor {
    /// Apply H^{⊗n} to register i when r_i = 1, measure, run the ciphertext program.
    Honest,
    /// Ignore the ciphertext and output a fixed message.
    Constant(BitVector),
    /// Apply a fixed unitary and read the message off qubits `start..start + len`.
    Unitary { matrix: CMatrix, start: usize, len: usize },
}

/// Mixture for the test of a quantum decryptor against (m0, m1).
///
/// One projector per (b, r), each with weight 1/(2·2^κ): "the decryptor
/// outputs m_b on Enc(pk, m_b; r)".
pub fn decryptor_mixture(
    pk: &SdePublicKey,
    decryptor: &Decryptor,
    m0: &BitVector,
    m1: &BitVector,
) -> Result<ProjectiveMixture> {
    let kappa = pk.kappa();
    let n = pk.n;
    let qubits = kappa * n;
    if qubits >= usize::BITS as usize || (1usize << qubits) > MAX_MIXTURE_DIM {
        return Err(Error::TooLarge { what: "decryptor Hilbert space", size: qubits, max: MAX_MIXTURE_DIM.trailing_zeros() as usize });
    }
    let dim = 1usize << qubits;
    let weight = 1.0 / (2 * (1usize << kappa)) as f64;
    let mut items = Vec::new();
    for b in [false, true] {
        let m = if b { m1 } else { m0 };
        for rbits in 0..(1u64 << kappa) {
            let r: Vec<bool> = (0..kappa).map(|i| rbits >> (kappa - 1 - i) & 1 == 1).collect();
            let ct = encrypt_with(pk, m, &r)?;
            let matrix = match decryptor {
                Decryptor::Honest => {
                    let mask = r
                        .iter()
                        .enumerate()
                        .filter(|(_, &ri)| ri)
                        .fold(0u64, |acc, (i, _)| acc | qubit_range_mask(qubits, i * n, n));
                    let d = CMatrix::diag_indicator(dim, |u| {
                        ct.program.eval(&BitVector::from_index(qubits, u as u64)).as_ref() == Some(m)
                    });
                    d.conjugate_by(|v| {
                        let mut st = StateVector::from_amplitudes(qubits, v.to_vec()).expect("unit basis vector");
                        st.hadamard_mask(mask);
                        v.copy_from_slice(st.amplitudes());
                    })
                }
                Decryptor::Constant(guess) => {
                    if guess == m {
                        CMatrix::identity(dim)
                    } else {
                        CMatrix::zeros(dim)
                    }
                }
                Decryptor::Unitary { matrix, start, len } => {
                    if matrix.dim != dim || start + len > qubits {
                        return Err(Error::LengthMismatch { expected: dim, found: matrix.dim });
                    }
                    let d = CMatrix::diag_indicator(dim, |u| {
                        BitVector::from_index(qubits, u as u64).slice(*start, *len) == *m
                    });
                    matrix.adjoint().mul(&d).mul(matrix)
                }
            };
            items.push((weight, ProjectorOp::new(matrix)?));
        }
    }
    build_mixture(items)
}

/// The γ-good test: TI at threshold 1/2 + γ.
pub fn gamma_good_test<R: Rng + ?Sized>(
    mix: &ProjectiveMixture,
    gamma: f64,
    psi: &[C64],
    rng: &mut R,
) -> Result<(bool, Vec<C64>)> {
    threshold_imp_apply(mix, 0.5 + gamma, psi, rng)
}
