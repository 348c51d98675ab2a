//! Security games with pluggable strategies, plus the closed-form bounds on
//! coset-state overlaps.
//!
//! Every game is an [`Experiment`]: a pure per-trial function of an RNG.
//! Trial `i` of a run with seed `S` draws from its own stream derived from
//! `(S, game id, i)`, so totals do not depend on how trials are scheduled.
//!
//! Strategies that read challenger secrets ("sanity" strategies) exist only
//! to validate the wiring. A game refuses them unless its `sanity` flag is
//! set.

use alloc::{
    boxed::Box,
    collections::BTreeMap,
    format,
    string::{String, ToString},
    vec::Vec,
};
use core::cell::Cell;

use rand::Rng;

use crate::cprf::{cp_eval, cp_setup, gen_trigger, is_trigger, CpParams};
use crate::gf2::{canonical_rep, intersect_dim, BitVector, HiddenCoset, Subspace};
use crate::meas::{decryptor_mixture, gamma_good_test, Decryptor};
use crate::qsim::{coset_state_direct, StateVector, MAX_QUBITS};
use crate::rng::{derive, from_seed, label, DetRng};
use crate::sde::{decrypt, encrypt, qkeygen, setup};
use crate::toksig::{self, keygen, revoke, sign, token_gen};
use crate::{Error, Result};

/// Outcome of a batch of trials.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GameResult {
    pub game: String,
    pub params: BTreeMap<String, u64>,
    pub strategy: String,
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub exact: Option<f64>,
    pub seed: u64,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none", default))]
    pub queries: Option<u64>,
}

impl GameResult {
    /// Binomial standard deviation of the estimate around `p`.
    pub fn sigma(&self, p: f64) -> f64 {
        sigma(p, self.trials)
    }

    /// Whether the estimate lies within `k` standard deviations of `p`.
    pub fn within(&self, p: f64, k: f64) -> bool {
        (self.estimate - p).abs() <= k * self.sigma(p)
    }
}

pub fn sigma(p: f64, trials: u64) -> f64 {
    libm::sqrt(p * (1.0 - p) / trials as f64)
}

/// Result of a single trial.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TrialOutcome {
    pub success: bool,
    pub queries: u64,
}

impl TrialOutcome {
    fn win(success: bool) -> Self {
        TrialOutcome { success, queries: 0 }
    }
}

/// A game with a fixed strategy, runnable trial by trial.
pub trait Experiment: Sync {
    fn game(&self) -> String;
    fn strategy(&self) -> String;
    fn params(&self) -> BTreeMap<String, u64>;
    /// Closed-form success probability of the strategy, when known.
    fn exact(&self) -> Option<f64>;
    /// Whether query counts are part of the report.
    fn reports_queries(&self) -> bool {
        false
    }
    /// Rejects configurations the harness does not allow.
    fn check(&self) -> Result<()>;
    fn trial(&self, rng: &mut DetRng) -> Result<TrialOutcome>;
}

/// RNG for trial `index` of an experiment.
pub fn trial_rng(exp: &dyn Experiment, seed: u64, index: u64) -> DetRng {
    from_seed(derive(seed, label(&exp.game()), index))
}

/// Packages summed trial outcomes.
pub fn assemble(exp: &dyn Experiment, trials: u64, seed: u64, successes: u64, queries: u64) -> GameResult {
    GameResult {
        game: exp.game(),
        params: exp.params(),
        strategy: exp.strategy(),
        trials,
        successes,
        estimate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
        exact: exp.exact(),
        seed,
        queries: exp.reports_queries().then_some(queries),
    }
}

/// Runs trials `range` and returns (successes, queries).
pub fn run_range(exp: &dyn Experiment, seed: u64, range: core::ops::Range<u64>) -> Result<(u64, u64)> {
    let mut wins = 0;
    let mut queries = 0;
    for i in range {
        let out = exp.trial(&mut trial_rng(exp, seed, i))?;
        wins += out.success as u64;
        queries += out.queries;
    }
    Ok((wins, queries))
}

/// Runs all trials on the calling thread.
pub fn run_experiment(exp: &dyn Experiment, trials: u64, seed: u64) -> Result<GameResult> {
    exp.check()?;
    let (wins, queries) = run_range(exp, seed, 0..trials)?;
    Ok(assemble(exp, trials, seed, wins, queries))
}

fn sanity_gate(is_sanity: bool, allowed: bool) -> Result<()> {
    if is_sanity && !allowed {
        Err(Error::InterfaceViolation("strategy reads challenger secrets; enable the sanity flag"))
    } else {
        Ok(())
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::Invalid("n must be even and positive"));
    }
    if n > MAX_QUBITS {
        return Err(Error::MemoryGuard { qubits: n, max: MAX_QUBITS });
    }
    Ok(())
}

fn params_of(pairs: &[(&str, u64)]) -> BTreeMap<String, u64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn pow2(e: i32) -> f64 {
    libm::pow(2.0, e as f64)
}

/// Predicate oracle that counts its queries. Classical and coherent
/// queries count the same.
pub struct CountingOracle<'a> {
    pred: Box<dyn Fn(&BitVector) -> bool + 'a>,
    count: Cell<u64>,
}

impl<'a> CountingOracle<'a> {
    pub fn new<F: Fn(&BitVector) -> bool + 'a>(pred: F) -> Self {
        CountingOracle { pred: Box::new(pred), count: Cell::new(0) }
    }

    pub fn query(&self, x: &BitVector) -> bool {
        self.count.set(self.count.get() + 1);
        (self.pred)(x)
    }

    /// Coherent query with the answer measured.
    pub fn query_state<R: Rng + ?Sized>(&self, st: &mut StateVector, rng: &mut R) -> bool {
        self.count.set(self.count.get() + 1);
        let n = st.n();
        st.coherent_predicate(|x| (self.pred)(&BitVector::from_index(n, x)), rng).outcome
    }

    pub fn count(&self) -> u64 {
        self.count.get()
    }
}

fn random_rep<R: Rng + ?Sized>(a: &Subspace, rng: &mut R) -> BitVector {
    canonical_rep(a, &BitVector::random(a.n(), rng)).expect("lengths agree")
}

fn valid_pair(hc: &HiddenCoset, v: &BitVector, w: &BitVector) -> bool {
    hc.primal().contains(v) && hc.dual().contains(w)
}

/// Oracle access for the direct-product game.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AccessMode {
    /// Counting membership oracles.
    Oracle,
    /// Membership programs (iO stubs).
    Program,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DpStrategy {
    /// Measure in the computational basis, then the residue in the Hadamard basis.
    MeasureBoth,
    /// Uniform guesses for both vectors.
    Guess,
    /// Measure for v, then check uniform w against the dual oracle up to
    /// `tries` times; the last candidate after `tries` misses is unchecked.
    MeasureThenSearch { tries: u64 },
    /// Reads (s, s') directly.
    Sanity,
}

impl DpStrategy {
    pub fn name(&self) -> String {
        match self {
            DpStrategy::MeasureBoth => "measure-both".into(),
            DpStrategy::Guess => "guess".into(),
            DpStrategy::MeasureThenSearch { tries } => format!("measure-then-search-{tries}"),
            DpStrategy::Sanity => "sanity".into(),
        }
    }
}

/// Given one copy of |A_{s,s'}⟩, output v ∈ A+s and w ∈ A⊥+s'.
#[derive(Clone, Debug)]
pub struct DirectProduct {
    pub n: usize,
    pub strategy: DpStrategy,
    pub mode: AccessMode,
    pub sanity: bool,
}

impl Experiment for DirectProduct {
    fn game(&self) -> String {
        match self.mode {
            AccessMode::Oracle => "direct-product".into(),
            AccessMode::Program => "direct-product-comp".into(),
        }
    }

    fn strategy(&self) -> String {
        self.strategy.name()
    }

    fn params(&self) -> BTreeMap<String, u64> {
        params_of(&[("n", self.n as u64)])
    }

    fn exact(&self) -> Option<f64> {
        let h = pow2(-(self.n as i32) / 2);
        Some(match self.strategy {
            DpStrategy::MeasureBoth => h,
            DpStrategy::Guess => h * h,
            DpStrategy::MeasureThenSearch { tries } => 1.0 - libm::pow(1.0 - h, (tries + 1) as f64),
            DpStrategy::Sanity => 1.0,
        })
    }

    fn reports_queries(&self) -> bool {
        self.mode == AccessMode::Oracle
    }

    fn check(&self) -> Result<()> {
        check_n(self.n)?;
        sanity_gate(self.strategy == DpStrategy::Sanity, self.sanity)
    }

    fn trial(&self, rng: &mut DetRng) -> Result<TrialOutcome> {
        let n = self.n;
        let (sk, pk) = keygen(n, rng)?;
        let mut state = token_gen(&sk)?.into_state();
        let (packed0, packed1) = (sk.primal().packed(), sk.dual().packed());
        let oracle0;
        let oracle1;
        match self.mode {
            AccessMode::Oracle => {
                oracle0 = CountingOracle::new(move |x: &BitVector| packed0.contains(x.to_index()));
                oracle1 = CountingOracle::new(move |x: &BitVector| packed1.contains(x.to_index()));
            }
            AccessMode::Program => {
                let (p0, p1) = (pk.c0.clone(), pk.c1.clone());
                oracle0 = CountingOracle::new(move |x: &BitVector| p0.eval(x));
                oracle1 = CountingOracle::new(move |x: &BitVector| p1.eval(x));
            }
        }
        let (v, w) = match self.strategy {
            DpStrategy::MeasureBoth => {
                let v = state.measure_all(rng).outcome;
                state.hadamard_all();
                (v, state.measure_all(rng).outcome)
            }
            DpStrategy::Guess => (BitVector::random(n, rng), BitVector::random(n, rng)),
            DpStrategy::MeasureThenSearch { tries } => {
                let v = state.measure_all(rng).outcome;
                let mut w = BitVector::random(n, rng);
                for _ in 0..tries {
                    if oracle1.query(&w) {
                        break;
                    }
                    w = BitVector::random(n, rng);
                }
                (v, w)
            }
            DpStrategy::Sanity => (sk.s.clone(), sk.s_prime.clone()),
        };
        Ok(TrialOutcome { success: valid_pair(&sk, &v, &w), queries: oracle0.count() + oracle1.count() })
    }
}

pub fn run_direct_product(n: usize, strategy: DpStrategy, mode: AccessMode, trials: u64, seed: u64) -> Result<GameResult> {
    run_experiment(&DirectProduct { n, strategy, mode, sanity: false }, trials, seed)
}

/// Sign 0 with a token, then ask Revoke to accept what is left.
#[derive(Clone, Debug)]
pub struct RevokeAfterSign {
    pub n: usize,
}

impl Experiment for RevokeAfterSign {
    fn game(&self) -> String {
        "revoke-after-sign".into()
    }

    fn strategy(&self) -> String {
        "sign-zero".into()
    }

    fn params(&self) -> BTreeMap<String, u64> {
        params_of(&[("n", self.n as u64)])
    }

    fn exact(&self) -> Option<f64> {
        Some(pow2(-(self.n as i32) / 2))
    }

    fn check(&self) -> Result<()> {
        check_n(self.n)
    }

    fn trial(&self, rng: &mut DetRng) -> Result<TrialOutcome> {
        let (sk, pk) = keygen(self.n, rng)?;
        let mut token = token_gen(&sk)?;
        let sig = sign(false, &mut token, rng)?;
        if !toksig::verify(&pk, false, &sig.sig) {
            return Err(Error::Invalid("honest signature rejected"));
        }
        Ok(TrialOutcome::win(revoke(&pk, token, rng).0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MonogamyStrategy {
    /// A₁ receives the whole state and recovers both cosets; A₂ guesses.
    ForwardToFirst,
    /// Each party receives half of the qubits, measures them and pads at random.
    SymmetricSplit,
    /// A₀ ignores the state and sends both parties the same random guess.
    SharedGuess,
    /// Reads (s, s') directly.
    Sanity,
}

impl MonogamyStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            MonogamyStrategy::ForwardToFirst => "forward-to-first",
            MonogamyStrategy::SymmetricSplit => "symmetric-split",
            MonogamyStrategy::SharedGuess => "shared-guess",
            MonogamyStrategy::Sanity => "sanity",
        }
    }
}

/// Recovers Can_A(s) and Can_{A⊥}(s') from |A_{s,s'}⟩ without disturbing it.
fn recover_cosets<R: Rng + ?Sized>(st: &mut StateVector, a: &Subspace, rng: &mut R) -> (BitVector, BitVector) {
    let n = st.n();
    let dual = a.complement();
    let label_of = |space: &Subspace, x: u64| canonical_rep(space, &BitVector::from_index(n, x)).expect("n").to_index();
    let v = st.measure_fn(|x| label_of(a, x), rng).outcome;
    st.hadamard_all();
    let w = st.measure_fn(|x| label_of(&dual, x), rng).outcome;
    st.hadamard_all();
    (BitVector::from_index(n, v), BitVector::from_index(n, w))
}

/// A₀ splits |A_{s,s'}⟩; A₁ and A₂ then learn A and must each output a pair in
/// (A+s) × (A⊥+s').
#[derive(Clone, Debug)]
pub struct Monogamy {
    pub n: usize,
    pub strategy: MonogamyStrategy,
    pub sanity: bool,
}

impl Experiment for Monogamy {
    fn game(&self) -> String {
        "monogamy".into()
    }

    fn strategy(&self) -> String {
        self.strategy.name().into()
    }

    fn params(&self) -> BTreeMap<String, u64> {
        params_of(&[("n", self.n as u64)])
    }

    fn exact(&self) -> Option<f64> {
        match self.strategy {
            MonogamyStrategy::ForwardToFirst | MonogamyStrategy::SharedGuess => Some(pow2(-(self.n as i32))),
            MonogamyStrategy::SymmetricSplit => None,
            MonogamyStrategy::Sanity => Some(1.0),
        }
    }

    fn check(&self) -> Result<()> {
        check_n(self.n)?;
        sanity_gate(self.strategy == MonogamyStrategy::Sanity, self.sanity)
    }

    fn trial(&self, rng: &mut DetRng) -> Result<TrialOutcome> {
        let n = self.n;
        let hc = HiddenCoset::sample(n, rng)?;
        let mut state = coset_state_direct(&hc.a, &hc.s, &hc.s_prime)?;
        let a = hc.a.clone();
        let dual = a.complement();
        let (p1, p2) = match self.strategy {
            MonogamyStrategy::ForwardToFirst => {
                let first = recover_cosets(&mut state, &a, rng);
                let second = (random_rep(&a, rng), random_rep(&dual, rng));
                (first, second)
            }
            MonogamyStrategy::SymmetricSplit => {
                let x = state.measure_all(rng).outcome;
                let h = n / 2;
                let v1 = BitVector::concat(&[x.slice(0, h), BitVector::random(n - h, rng)]);
                let v2 = BitVector::concat(&[BitVector::random(h, rng), x.slice(h, n - h)]);
                ((v1, BitVector::random(n, rng)), (v2, BitVector::random(n, rng)))
            }
            MonogamyStrategy::SharedGuess => {
                let g = (BitVector::random(n, rng), BitVector::random(n, rng));
                // Both parties canonicalize once they learn A.
                let g = (canonical_rep(&a, &g.0)?, canonical_rep(&dual, &g.1)?);
                (g.clone(), g)
            }
            MonogamyStrategy::Sanity => {
                let g = (hc.s.clone(), hc.s_prime.clone());
                (g.clone(), g)
            }
        };
        Ok(TrialOutcome::win(valid_pair(&hc, &p1.0, &p1.1) && valid_pair(&hc, &p2.0, &p2.1)))
    }
}

pub fn run_monogamy(n: usize, strategy: MonogamyStrategy, trials: u64, seed: u64) -> Result<GameResult> {
    run_experiment(&Monogamy { n, strategy, sanity: false }, trials, seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrongMonogamyStrategy {
    /// A₀ measures, sends the outcome to A₁ and the residue to A₂.
    MeasureAndSend,
    /// A₁ keeps the state and recovers s; A₂ guesses a coset of A⊥.
    KeepAtFirst,
    /// Reads s and s' directly.
    PeekSecret,
}

impl StrongMonogamyStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            StrongMonogamyStrategy::MeasureAndSend => "measure-and-send",
            StrongMonogamyStrategy::KeepAtFirst => "keep-at-first",
            StrongMonogamyStrategy::PeekSecret => "peek-secret",
        }
    }
}

/// A₁ must output a vector in A+s and A₂ one in A⊥+s'.
#[derive(Clone, Debug)]
pub struct StrongMonogamy {
    pub n: usize,
    pub strategy: StrongMonogamyStrategy,
    /// Hand A₀ the two membership programs as well.
    pub comp: bool,
    pub sanity: bool,
}

impl Experiment for StrongMonogamy {
    fn game(&self) -> String {
        if self.comp { "strong-monogamy-comp".into() } else { "strong-monogamy".into() }
    }

    fn strategy(&self) -> String {
        self.strategy.name().into()
    }

    fn params(&self) -> BTreeMap<String, u64> {
        params_of(&[("n", self.n as u64)])
    }

    fn exact(&self) -> Option<f64> {
        Some(match self.strategy {
            StrongMonogamyStrategy::PeekSecret => 1.0,
            _ => pow2(-(self.n as i32) / 2),
        })
    }

    fn check(&self) -> Result<()> {
        check_n(self.n)?;
        sanity_gate(self.strategy == StrongMonogamyStrategy::PeekSecret, self.sanity)
    }

    fn trial(&self, rng: &mut DetRng) -> Result<TrialOutcome> {
        let n = self.n;
        let (hc, pk) = keygen(n, rng)?;
        let mut state = token_gen(&hc)?.into_state();
        // Programs are part of A₀'s view in the computational variant; the
        // strategies below never need them.
        let _programs = self.comp.then_some(&pk);
        let dual = hc.a.complement();
        let (s1, s2) = match self.strategy {
            StrongMonogamyStrategy::MeasureAndSend => {
                let v = state.measure_all(rng).outcome;
                // A₂ learns A but holds a basis state; its Hadamard measurement is uniform.
                state.hadamard_all();
                (v, state.measure_all(rng).outcome)
            }
            StrongMonogamyStrategy::KeepAtFirst => {
                let (v, _) = recover_cosets(&mut state, &hc.a, rng);
                (v, random_rep(&dual, rng))
            }
            StrongMonogamyStrategy::PeekSecret => (hc.s.clone(), hc.s_prime.clone()),
        };
        Ok(TrialOutcome::win(valid_pair(&hc, &s1, &s2)))
    }
}

pub fn run_strong_monogamy(n: usize, strategy: StrongMonogamyStrategy, trials: u64, seed: u64, comp: bool) -> Result<GameResult> {
    run_experiment(&StrongMonogamy { n, strategy, comp, sanity: false }, trials, seed)
}

/// Parameters of a single-decryptor encryption instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SdeParams {
    pub n: usize,
    pub kappa: usize,
    pub m_len: usize,
}

impl SdeParams {
    /// n=4, κ=2, two-bit messages.
    pub fn toy() -> Self {
        SdeParams { n: 4, kappa: 2, m_len: 2 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Sde(SdeParams),
    Cprf(CpParams),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AntiPiracyKind {
    /// Pirate picks (m0, m1); each decryptor must recover its m_{b_i}.
    Cpa,
    /// Uniform messages; each decryptor must recover its message.
    Random,
    /// Both halves must pass the γ-good decryptor test.
    StrongTi { gamma: f64 },
    /// Each half must evaluate the PRF on a uniform input.
    CopyProtection,
    /// Each half must tell F(K, u) from a uniform string.
    IndCprf,
}

impl AntiPiracyKind {
    pub fn name(&self) -> &'static str {
        match self {
            AntiPiracyKind::Cpa => "cpa",
            AntiPiracyKind::Random => "random",
            AntiPiracyKind::StrongTi { .. } => "strong-ti",
            AntiPiracyKind::CopyProtection => "copy-protection",
            AntiPiracyKind::IndCprf => "ind-cprf",
        }
    }

    fn needs_cprf(&self) -> bool {
        matches!(self, AntiPiracyKind::CopyProtection | AntiPiracyKind::IndCprf)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PirateStrategy {
    /// The genuine key goes to the first half; the second half guesses.
    HonestToOneSide,
    /// Both halves guess.
    GuessBoth,
}

impl PirateStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            PirateStrategy::HonestToOneSide => "honest-to-one-side",
            PirateStrategy::GuessBoth => "guess-both",
        }
    }
}

#[derive(Clone, Debug)]
pub struct AntiPiracy {
    pub kind: AntiPiracyKind,
    pub scheme: Scheme,
    pub strategy: PirateStrategy,
}

fn pirate_messages(m_len: usize) -> (BitVector, BitVector) {
    let m0 = BitVector::zeros(m_len);
    let mut m1 = BitVector::zeros(m_len);
    m1.set(m_len - 1, true);
    (m0, m1)
}

impl AntiPiracy {
    fn sde_trial(&self, p: SdeParams, rng: &mut DetRng) -> Result<bool> {
        let (sk, pk) = setup(p.n, p.kappa, rng)?;
        let mut key = qkeygen(&sk)?;
        let honest = self.strategy == PirateStrategy::HonestToOneSide;
        match self.kind {
            AntiPiracyKind::Cpa => {
                let (m0, m1) = pirate_messages(p.m_len);
                let pick = |b: bool| if b { m1.clone() } else { m0.clone() };
                let (b1, b2): (bool, bool) = (rng.gen(), rng.gen());
                let ct1 = encrypt(&pk, &pick(b1), rng)?;
                let _ct2 = encrypt(&pk, &pick(b2), rng)?;
                let g1 = if honest { decrypt(&mut key, &ct1, rng)? } else { Some(pick(rng.gen())) };
                let g2 = Some(pick(rng.gen()));
                Ok(g1 == Some(pick(b1)) && g2 == Some(pick(b2)))
            }
            AntiPiracyKind::Random => {
                let (x1, x2) = (BitVector::random(p.m_len, rng), BitVector::random(p.m_len, rng));
                let ct1 = encrypt(&pk, &x1, rng)?;
                let _ct2 = encrypt(&pk, &x2, rng)?;
                let g1 = if honest { decrypt(&mut key, &ct1, rng)? } else { Some(BitVector::random(p.m_len, rng)) };
                let g2 = Some(BitVector::random(p.m_len, rng));
                Ok(g1 == Some(x1) && g2 == Some(x2))
            }
            AntiPiracyKind::StrongTi { gamma } => {
                let (m0, m1) = pirate_messages(p.m_len);
                let guess = decryptor_mixture(&pk, &Decryptor::Constant(m0.clone()), &m0, &m1)?;
                let d1 = if honest {
                    decryptor_mixture(&pk, &Decryptor::Honest, &m0, &m1)?
                } else {
                    guess.clone()
                };
                let psi1 = key.registers[0].amplitudes().to_vec();
                let psi2 = StateVector::zero(p.n)?.amplitudes().to_vec();
                let (ok1, _) = gamma_good_test(&d1, gamma, &psi1, rng)?;
                let (ok2, _) = gamma_good_test(&guess, gamma, &psi2, rng)?;
                Ok(ok1 && ok2)
            }
            _ => Err(Error::Invalid("game needs a copy-protected PRF instance")),
        }
    }

    fn cprf_trial(&self, p: CpParams, rng: &mut DetRng) -> Result<bool> {
        let (mut key, view) = cp_setup(p, rng)?;
        let n = p.n();
        let honest = self.strategy == PirateStrategy::HonestToOneSide;
        let u = BitVector::random(n, rng);
        let w = BitVector::random(n, rng);
        let fu = view.k1.eval(&u)?;
        let fw = view.k1.eval(&w)?;
        match self.kind {
            AntiPiracyKind::CopyProtection => {
                let g1 = if honest { cp_eval(&mut key, &u, rng)? } else { Some(BitVector::random(p.m_len, rng)) };
                let g2 = Some(BitVector::random(p.m_len, rng));
                Ok(g1 == Some(fu) && g2 == Some(fw))
            }
            AntiPiracyKind::IndCprf => {
                let (b1, b2): (bool, bool) = (rng.gen(), rng.gen());
                let y1 = if b1 { BitVector::random(p.m_len, rng) } else { fu };
                let _y2 = if b2 { BitVector::random(p.m_len, rng) } else { fw };
                let g1 = if honest { cp_eval(&mut key, &u, rng)? != Some(y1) } else { rng.gen() };
                let g2: bool = rng.gen();
                Ok(g1 == b1 && g2 == b2)
            }
            _ => Err(Error::Invalid("game needs a single-decryptor encryption instance")),
        }
    }
}

impl Experiment for AntiPiracy {
    fn game(&self) -> String {
        format!("anti-piracy-{}", self.kind.name())
    }

    fn strategy(&self) -> String {
        self.strategy.name().into()
    }

    fn params(&self) -> BTreeMap<String, u64> {
        match self.scheme {
            Scheme::Sde(p) => params_of(&[("n", p.n as u64), ("kappa", p.kappa as u64), ("m_len", p.m_len as u64)]),
            Scheme::Cprf(p) => params_of(&[
                ("l0", p.l0 as u64),
                ("l1", p.l1 as u64),
                ("l2", p.l2 as u64),
                ("lambda", p.lambda as u64),
                ("m_len", p.m_len as u64),
            ]),
        }
    }

    fn exact(&self) -> Option<f64> {
        let m = match self.scheme {
            Scheme::Sde(p) => p.m_len,
            Scheme::Cprf(p) => p.m_len,
        } as i32;
        let honest = self.strategy == PirateStrategy::HonestToOneSide;
        match self.kind {
            AntiPiracyKind::Cpa => Some(if honest { 0.5 } else { 0.25 }),
            AntiPiracyKind::Random => Some(if honest { pow2(-m) } else { pow2(-2 * m) }),
            AntiPiracyKind::StrongTi { gamma } => (gamma > 0.0).then_some(0.0),
            // Trigger inputs are ignored here; a uniform input is one with
            // probability at most 2^{l2-n}.
            AntiPiracyKind::CopyProtection => Some(if honest { pow2(-m) } else { pow2(-2 * m) }),
            AntiPiracyKind::IndCprf => Some(if honest { (1.0 - pow2(-m - 1)) / 2.0 } else { 0.25 }),
        }
    }

    fn check(&self) -> Result<()> {
        match (self.scheme, self.kind.needs_cprf()) {
            (Scheme::Sde(p), false) => {
                check_n(p.n)?;
                if p.kappa == 0 || p.m_len == 0 {
                    return Err(Error::Invalid("kappa and m_len must be positive"));
                }
                if let AntiPiracyKind::StrongTi { gamma } = self.kind {
                    if !(0.0..=0.5).contains(&gamma) {
                        return Err(Error::Invalid("gamma must lie in [0, 1/2]"));
                    }
                    if p.kappa != 1 {
                        return Err(Error::TooLarge { what: "strong-ti registers", size: p.kappa, max: 1 });
                    }
                    if p.n > 6 {
                        return Err(Error::TooLarge { what: "strong-ti qubits", size: p.n, max: 6 });
                    }
                }
                Ok(())
            }
            (Scheme::Cprf(p), true) => p.validate(),
            _ => Err(Error::Invalid("game kind does not match the scheme instance")),
        }
    }

    fn trial(&self, rng: &mut DetRng) -> Result<TrialOutcome> {
        let ok = match self.scheme {
            Scheme::Sde(p) => self.sde_trial(p, rng)?,
            Scheme::Cprf(p) => self.cprf_trial(p, rng)?,
        };
        Ok(TrialOutcome::win(ok))
    }
}

pub fn run_anti_piracy(kind: AntiPiracyKind, scheme: Scheme, strategy: PirateStrategy, trials: u64, seed: u64) -> Result<GameResult> {
    run_experiment(&AntiPiracy { kind, scheme, strategy }, trials, seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TriggerStrategy {
    CoinFlip,
    /// Evaluate ρ_K on both inputs and guess from the outputs.
    EvaluateCompare,
    /// Recognizes triggers with K2, K3.
    SanityIsTrigger,
}

impl TriggerStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            TriggerStrategy::CoinFlip => "coin-flip",
            TriggerStrategy::EvaluateCompare => "evaluate-compare",
            TriggerStrategy::SanityIsTrigger => "sanity-is-trigger",
        }
    }
}

/// Distinguish two uniform inputs from two hidden triggers planted with the
/// same PRF values.
#[derive(Clone, Debug)]
pub struct HiddenTrigger {
    pub params: CpParams,
    pub strategy: TriggerStrategy,
    pub sanity: bool,
}

impl Experiment for HiddenTrigger {
    fn game(&self) -> String {
        "hidden-trigger".into()
    }

    fn strategy(&self) -> String {
        self.strategy.name().into()
    }

    fn params(&self) -> BTreeMap<String, u64> {
        let p = self.params;
        params_of(&[
            ("l0", p.l0 as u64),
            ("l1", p.l1 as u64),
            ("l2", p.l2 as u64),
            ("lambda", p.lambda as u64),
            ("m_len", p.m_len as u64),
        ])
    }

    fn exact(&self) -> Option<f64> {
        match self.strategy {
            TriggerStrategy::SanityIsTrigger => None,
            _ => Some(0.5),
        }
    }

    fn check(&self) -> Result<()> {
        self.params.validate()?;
        sanity_gate(self.strategy == TriggerStrategy::SanityIsTrigger, self.sanity)
    }

    fn trial(&self, rng: &mut DetRng) -> Result<TrialOutcome> {
        let p = self.params;
        let (mut key, view) = cp_setup(p, rng)?;
        let u = BitVector::random(p.n(), rng);
        let w = BitVector::random(p.n(), rng);
        let plant = |x: &BitVector| -> Result<BitVector> {
            Ok(gen_trigger(&x.slice(0, p.l0), &view.k1.eval(x)?, &view)?.to_bits())
        };
        let b: bool = rng.gen();
        let (x, z) = if b { (plant(&u)?, plant(&w)?) } else { (u, w) };
        let guess = match self.strategy {
            TriggerStrategy::CoinFlip => rng.gen(),
            TriggerStrategy::EvaluateCompare => {
                let ox = cp_eval(&mut key, &x, rng)?;
                let oz = cp_eval(&mut key, &z, rng)?;
                match (ox, oz) {
                    (Some(a), Some(c)) => a.get(0) ^ c.get(0),
                    _ => true,
                }
            }
            TriggerStrategy::SanityIsTrigger => is_trigger(&x, &p, &view.k2, &view.k3)?,
        };
        Ok(TrialOutcome::win(guess == b))
    }
}

pub fn run_hidden_trigger_game(params: CpParams, strategy: TriggerStrategy, trials: u64, seed: u64) -> Result<GameResult> {
    run_experiment(&HiddenTrigger { params, strategy, sanity: false }, trials, seed)
}

/// Exact nonnegative rational.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ratio {
    pub num: u128,
    pub den: u128,
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Ratio {
    pub fn new(num: u128, den: u128) -> Self {
        let g = gcd(num, den).max(1);
        Ratio { num: num / g, den: den / g }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl core::fmt::Display for Ratio {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

fn binom(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

/// Largest n for which [`monogamy_bound_exact`] fits in 128 bits.
pub const MONOGAMY_EXACT_MAX: usize = 64;

/// (1/C(n,n/2)) Σ_{t=0}^{n/2} C(n/2,t)² 2^{−t}, exactly.
pub fn monogamy_bound_exact(n: usize) -> Result<Ratio> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::Invalid("n must be even and positive"));
    }
    if n > MONOGAMY_EXACT_MAX {
        return Err(Error::TooLarge { what: "exact monogamy bound", size: n, max: MONOGAMY_EXACT_MAX });
    }
    let h = (n / 2) as u64;
    let num: u128 = (0..=h).map(|t| binom(h, t).pow(2) << (h - t)).sum();
    Ok(Ratio::new(num, binom(n as u64, h) << h))
}

/// The same quantity in the form Σ C(n/2,t)² 2^{t−n/2} / C(n,n/2).
pub fn monogamy_bound_alt(n: usize) -> Result<Ratio> {
    monogamy_bound_exact(n)?;
    let h = (n / 2) as u64;
    let num: u128 = (0..=h).map(|t| binom(h, t).pow(2) << t).sum();
    Ok(Ratio::new(num, binom(n as u64, h) << h))
}

pub fn monogamy_bound(n: usize) -> Result<f64> {
    if n > MONOGAMY_EXACT_MAX && n % 2 == 0 {
        // Log-domain sum for large n.
        let h = n / 2;
        let lc = |a: usize, b: usize| libm::lgamma((a + 1) as f64) - libm::lgamma((b + 1) as f64) - libm::lgamma((a - b + 1) as f64);
        let total: f64 = (0..=h)
            .map(|t| libm::exp(2.0 * lc(h, t) - t as f64 * core::f64::consts::LN_2 - lc(n, h)))
            .sum();
        return Ok(total);
    }
    Ok(monogamy_bound_exact(n)?.to_f64())
}

/// Every subspace of F_2^n of dimension d, each once (RREF enumeration).
pub fn all_subspaces(n: usize, d: usize) -> Vec<Subspace> {
    let mut out = Vec::new();
    let mut pivots: Vec<usize> = (0..d).collect();
    loop {
        // Free slots: row i, columns after its pivot that are not pivots.
        let free: Vec<(usize, usize)> = (0..d)
            .flat_map(|i| (pivots[i] + 1..n).filter(|c| !pivots.contains(c)).map(move |c| (i, c)))
            .collect::<Vec<_>>();
        for mask in 0u64..(1u64 << free.len()) {
            let mut rows: Vec<BitVector> = pivots
                .iter()
                .map(|&p| {
                    let mut r = BitVector::zeros(n);
                    r.set(p, true);
                    r
                })
                .collect();
            for (k, &(i, c)) in free.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    rows[i].set(c, true);
                }
            }
            out.push(Subspace::span(n, &rows).expect("lengths agree"));
        }
        // Next combination of pivot columns.
        let mut i = d;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if pivots[i] < n - d + i {
                pivots[i] += 1;
                for j in i + 1..d {
                    pivots[j] = pivots[j - 1] + 1;
                }
                break;
            }
        }
        if d == 0 {
            return out;
        }
    }
}

/// Canonical representatives of all cosets of `a`.
pub fn coset_reps(a: &Subspace) -> Vec<BitVector> {
    let n = a.n();
    let mut reps: Vec<BitVector> = (0..1u64 << n)
        .map(|x| canonical_rep(a, &BitVector::from_index(n, x)).expect("n"))
        .collect();
    reps.sort();
    reps.dedup();
    reps
}

#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OverlapReport {
    pub n: usize,
    pub subspaces: usize,
    pub pairs: u64,
    pub violations: u64,
    pub equality_cases: u64,
    pub max_ratio: f64,
}

/// Checks |⟨A_{s1,s1'}|A'_{s2,s2'}⟩| ≤ 2^{dim(A∩A')−n/2} over all coset-state
/// pairs with dim A = dim A' = n/2.
pub fn overlap_check(n: usize) -> Result<OverlapReport> {
    check_n(n)?;
    if n > 4 {
        return Err(Error::TooLarge { what: "exhaustive overlap check", size: n, max: 4 });
    }
    let spaces = all_subspaces(n, n / 2);
    let mut states: Vec<(usize, StateVector)> = Vec::new();
    for (k, a) in spaces.iter().enumerate() {
        let dual = a.complement();
        for s in coset_reps(a) {
            for sp in coset_reps(&dual) {
                states.push((k, coset_state_direct(a, &s, &sp)?));
            }
        }
    }
    let mut dims = alloc::vec![alloc::vec![0usize; spaces.len()]; spaces.len()];
    for i in 0..spaces.len() {
        for j in 0..spaces.len() {
            dims[i][j] = intersect_dim(&spaces[i], &spaces[j])?;
        }
    }
    let mut report = OverlapReport { n, subspaces: spaces.len(), ..Default::default() };
    for (i, x) in &states {
        for (j, y) in &states {
            let overlap = x.inner(y)?.norm();
            let bound = pow2(dims[*i][*j] as i32 - (n / 2) as i32);
            report.pairs += 1;
            if overlap > bound + 1e-9 {
                report.violations += 1;
            }
            if (overlap - bound).abs() <= 1e-9 {
                report.equality_cases += 1;
            }
            report.max_ratio = report.max_ratio.max(overlap / bound);
        }
    }
    Ok(report)
}

/// 2^{−n/2} Σ_{s,s'} |A_{s,s'}⟩|A_{s,s'}⟩ over canonical s, s', and the EPR
/// state 2^{−n/2} Σ_v |v,v⟩.
pub fn epr_identity(a: &Subspace) -> Result<(StateVector, StateVector)> {
    let n = a.n();
    check_n(n)?;
    if 2 * n > MAX_QUBITS {
        return Err(Error::MemoryGuard { qubits: 2 * n, max: MAX_QUBITS });
    }
    let scale = pow2(-(n as i32) / 2);
    let dim = 1usize << (2 * n);
    let mut lhs = alloc::vec![crate::qsim::C64::new(0.0, 0.0); dim];
    let dual = a.complement();
    for s in coset_reps(a) {
        for sp in coset_reps(&dual) {
            let st = coset_state_direct(a, &s, &sp)?;
            let support: Vec<u64> = st.support().collect();
            for &x in &support {
                for &y in &support {
                    let idx = ((x as usize) << n) | y as usize;
                    lhs[idx] += st.amplitude(x) * st.amplitude(y) * scale;
                }
            }
        }
    }
    let mut rhs = alloc::vec![crate::qsim::C64::new(0.0, 0.0); dim];
    for v in 0..1usize << n {
        rhs[(v << n) | v] = crate::qsim::C64::new(scale, 0.0);
    }
    Ok((StateVector::from_amplitudes(2 * n, lhs)?, StateVector::from_amplitudes(2 * n, rhs)?))
}
