//! Acceptance suite: thirteen criteria, each with a trial budget, a tolerance
//! and a wall-clock limit. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::time::Instant;

use cosetlab::runner::{default_jobs, run_parallel};
use cosetlab_core::cprf::{cp_eval, cp_setup, gen_trigger, is_trigger, CpParams};
use cosetlab_core::games::{
    epr_identity, monogamy_bound_exact, overlap_check, sigma, AccessMode, AntiPiracy, AntiPiracyKind,
    DirectProduct, DpStrategy, Experiment, PirateStrategy, Ratio, RevokeAfterSign, Scheme, SdeParams,
};
use cosetlab_core::gf2::{canonical_rep, coset_contains, sample_subspace, BitVector, HiddenCoset};
use cosetlab_core::glx::{build_ip_predictor, exact_success, success_estimate};
use cosetlab_core::meas::{
    build_mixture, decryptor_mixture, gamma_good_test, proj_imp_apply, threshold_imp_apply, CMatrix, Decryptor,
    ProjectiveMixture, ProjectorOp,
};
use cosetlab_core::obf::{all_inputs, equiv_on_domain};
use cosetlab_core::prf::{puncture, GgmKey, HashedGgmKey, Mode};
use cosetlab_core::qsim::{coset_state_direct, StateVector, C64, TOL};
use cosetlab_core::rng::{from_seed, DetRng};
use cosetlab_core::sde::{self, cc_form, decrypt, encrypt, encrypt_cc_with, encrypt_with, qkeygen, setup};
use cosetlab_core::toksig::{keygen, revoke, sign, token_gen, verify};
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn within(est: f64, p: f64, trials: u64) -> Result<String, String> {
    let s = sigma(p, trials);
    let dev = (est - p) / s;
    let msg = format!("estimate {est:.6} vs {p:.6} ({dev:+.2}σ)");
    if dev.abs() <= 4.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn run_game(exp: &dyn Experiment, trials: u64, seed: u64) -> Result<f64, String> {
    Ok(run_parallel(exp, trials, seed, default_jobs()).map_err(e)?.estimate)
}

fn coset_algebra() -> Outcome {
    let mut rng = from_seed(1);
    let mut cases = 0;
    for n in 1..=8usize {
        for _ in 0..200 {
            let d = rng.gen_range(0..=n);
            let a = sample_subspace(n, d, &mut rng).map_err(e)?;
            let s = BitVector::random(n, &mut rng);
            let elems = a.elements();
            let brute = elems.iter().map(|v| v.xor(&s)).min().unwrap();
            let rep = canonical_rep(&a, &s).map_err(e)?;
            ensure(rep == brute, || format!("canonical_rep mismatch at n={n}"))?;
            for t in all_inputs(n) {
                let same = canonical_rep(&a, &t).map_err(e)? == rep;
                ensure(coset_contains(&a, &s, &t).map_err(e)? == same, || format!("membership mismatch at n={n}"))?;
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} (A,s) pairs, exhaustive membership"))
}

fn fourier_duality() -> Outcome {
    let mut rng = from_seed(2);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let n = 2 * (1 + i % 5);
        let hc = HiddenCoset::sample(n, &mut rng).map_err(e)?;
        let mut st = coset_state_direct(&hc.a, &hc.s, &hc.s_prime).map_err(e)?;
        st.hadamard_all();
        let dual = coset_state_direct(&hc.a.complement(), &hc.s_prime, &hc.s).map_err(e)?;
        worst = worst.max((st.fidelity(&dual).map_err(e)? - 1.0).abs());
    }
    let msg = format!("100 instances, n ≤ 10, max |F − 1| = {worst:.2e}");
    if worst <= TOL {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn tokenized_signatures() -> Outcome {
    let mut rng = from_seed(3);
    let mut failures = 0;
    let mut revoke_failures = 0;
    let mut worst: f64 = 0.0;
    let rounds = 10_000;
    let revocations = 1_000;
    for n in [8usize, 12, 16] {
        for i in 0..rounds {
            let (sk, pk) = keygen(n, &mut rng).map_err(e)?;
            let m: bool = rng.gen();
            let mut t = token_gen(&sk).map_err(e)?;
            let sig = sign(m, &mut t, &mut rng).map_err(e)?;
            failures += !verify(&pk, m, &sig.sig) as u32;
            if i < revocations {
                let fresh = token_gen(&sk).map_err(e)?;
                let before = fresh.state().clone();
                let (ok, back) = revoke(&pk, fresh, &mut rng);
                revoke_failures += !ok as u32;
                worst = worst.max((back.state().fidelity(&before).map_err(e)? - 1.0).abs());
            }
        }
    }
    let msg = format!(
        "{} rounds per n ∈ {{8,12,16}}: {failures} verify failures; {revocations} revocations per n: {revoke_failures} rejected, max |F − 1| = {worst:.2e}",
        rounds
    );
    if failures == 0 && revoke_failures == 0 && worst <= TOL {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn direct_product_floor() -> Outcome {
    let trials = 100_000;
    let p = 1.0 / 16.0;
    let dp = DirectProduct { n: 8, strategy: DpStrategy::MeasureBoth, mode: AccessMode::Oracle, sanity: false };
    let a = within(run_game(&dp, trials, 4)?, p, trials);
    let b = within(run_game(&RevokeAfterSign { n: 8 }, trials, 4)?, p, trials);
    match (a, b) {
        (Ok(a), Ok(b)) => Ok(format!("direct product {a}; revoke-after-sign {b}")),
        (a, b) => Err(format!("direct product {}; revoke-after-sign {}", a.unwrap_or_else(|x| x), b.unwrap_or_else(|x| x))),
    }
}

fn sde_round_trip() -> Outcome {
    let mut rng = from_seed(5);
    let (sk, pk) = setup(8, 3, &mut rng).map_err(e)?;
    let mut wrong = 0;
    for _ in 0..1000 {
        let mut key = qkeygen(&sk).map_err(e)?;
        let m = BitVector::random(8, &mut rng);
        let ct = encrypt(&pk, &m, &mut rng).map_err(e)?;
        wrong += (decrypt(&mut key, &ct, &mut rng).map_err(e)? != Some(m)) as u32;
    }
    let mut key = qkeygen(&sk).map_err(e)?;
    let initial = key.registers.clone();
    let mut reuse_wrong = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let m = BitVector::random(8, &mut rng);
        let ct = encrypt(&pk, &m, &mut rng).map_err(e)?;
        reuse_wrong += (decrypt(&mut key, &ct, &mut rng).map_err(e)? != Some(m)) as u32;
        for (st, st0) in key.registers.iter().zip(&initial) {
            worst = worst.max(1.0 - st.fidelity(st0).map_err(e)?);
        }
    }
    let msg = format!(
        "1000 messages: {wrong} wrong; 100 decryptions with one key: {reuse_wrong} wrong, min fidelity 1 − {worst:.2e}"
    );
    if wrong == 0 && reuse_wrong == 0 && worst <= 1e-8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn program_forms() -> Outcome {
    let mut rng = from_seed(6);
    let n = 8;
    let mut unequal = 0;
    let mut not_bot = 0;
    for _ in 0..50 {
        let (sk, pk) = setup(n, 1, &mut rng).map_err(e)?;
        let m = BitVector::random(4, &mut rng);
        let r = sde::random_r(1, &mut rng);
        let io = encrypt_with(&pk, &m, &r).map_err(e)?;
        let cc = encrypt_cc_with(&sk, &m, &r).map_err(e)?;
        unequal += !equiv_on_domain(&io.program, &cc.program, all_inputs(n)) as u32;
        let params = cc_form(&sk, &m, &r).map_err(e)?.params();
        let sim = sde::simulate(&cc, params);
        not_bot += all_inputs(n).filter(|x| sim.program.eval(x).is_some()).count();
        ensure(sim.program.padded_size() == cc.program.padded_size(), || "simulated size differs".into())?;
    }
    let msg = format!("50 (m,r): {unequal} unequal on F_2^8; simulated programs: {not_bot} non-⊥ outputs");
    if unequal == 0 && not_bot == 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn ggm_puncturing() -> Outcome {
    let mut rng = from_seed(7);
    let mut bad = 0;
    let mut points = 0u64;
    for i in 0..50usize {
        let in_len = 1 + i % 12;
        let k = GgmKey::generate(in_len, 8, &mut rng).map_err(e)?;
        let size = rng.gen_range(0..=4usize).min(1 << in_len);
        let mut set: Vec<BitVector> = Vec::new();
        while set.len() < size {
            let x = BitVector::random(in_len, &mut rng);
            if !set.contains(&x) {
                set.push(x);
            }
        }
        let pk = puncture(&k, &set).map_err(e)?;
        for x in all_inputs(in_len) {
            points += 1;
            let ok = match pk.eval(&x) {
                Ok(y) => !set.contains(&x) && y == k.eval(&x).map_err(e)?,
                Err(_) => set.contains(&x),
            };
            bad += !ok as u32;
        }
    }
    let msg = format!("50 keys, in_len 1..=12, |S| ≤ 4: {points} points, {bad} wrong");
    if bad == 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn f2_injectivity() -> Outcome {
    let mut rng = from_seed(8);
    let keys = 200;
    let mut injective = 0;
    for _ in 0..keys {
        let k = HashedGgmKey::injective(6, 16, 4, Mode::Strict, &mut rng).map_err(e)?;
        let mut images: Vec<BitVector> = all_inputs(6).map(|z| k.eval(&z)).collect::<Result<_, _>>().map_err(e)?;
        images.sort();
        images.dedup();
        injective += (images.len() == 64) as u32;
    }
    let frac = injective as f64 / keys as f64;
    let target = 1.0 - 1.0 / 16.0;
    let floor = target - 4.0 * sigma(target, keys);
    let msg = format!("{injective}/{keys} injective = {frac:.3}, floor {floor:.3}");
    if frac >= floor {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn cprf_correctness() -> Outcome {
    let mut rng = from_seed(9);
    let p = CpParams::toy();
    let (mut key, view) = cp_setup(p, &mut rng).map_err(e)?;
    let initial = key.registers.clone();
    let n = p.n();
    let mut evals = 0;
    let mut wrong = 0;
    while evals < 1000 {
        let x = BitVector::random(n, &mut rng);
        if is_trigger(&x, &p, &view.k2, &view.k3).map_err(e)? {
            continue;
        }
        evals += 1;
        wrong += (cp_eval(&mut key, &x, &mut rng).map_err(e)? != Some(view.k1.eval(&x).map_err(e)?)) as u32;
    }
    let mut drift: f64 = 0.0;
    for (st, st0) in key.registers.iter().zip(&initial) {
        drift = drift.max(1.0 - st.fidelity(st0).map_err(e)?);
    }
    let mut trig_bad = 0;
    for _ in 0..1000 {
        let x0 = BitVector::random(p.l0, &mut rng);
        let y = BitVector::random(p.m_len, &mut rng);
        let x = gen_trigger(&x0, &y, &view).map_err(e)?.to_bits();
        let ok = is_trigger(&x, &p, &view.k2, &view.k3).map_err(e)?
            && x.slice(0, p.l0) == x0
            && cp_eval(&mut key, &x, &mut rng).map_err(e)? == Some(y);
        trig_bad += !ok as u32;
    }
    let samples = 100_000u64;
    let mut hits = 0u64;
    for _ in 0..samples {
        hits += is_trigger(&BitVector::random(n, &mut rng), &p, &view.k2, &view.k3).map_err(e)? as u64;
    }
    let bound = (2f64).powi(p.l2 as i32 - n as i32);
    let limit = bound + 4.0 * sigma(bound, samples);
    let frac = hits as f64 / samples as f64;
    let msg = format!(
        "1000 evals: {wrong} ≠ F1, key drift {drift:.1e}; 1000 triggers: {trig_bad} bad; uniform trigger rate {frac:.2e} ≤ {limit:.2e}"
    );
    if wrong == 0 && drift <= TOL && trig_bad == 0 && frac <= limit {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn unit(v: Vec<C64>) -> Vec<C64> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

fn random_vec(dim: usize, rng: &mut DetRng) -> Vec<C64> {
    unit((0..dim).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
}

/// Three non-commuting projectors on C^4 with random weights.
fn random_mixture(rng: &mut DetRng) -> Result<ProjectiveMixture, String> {
    let w: Vec<f64> = (0..3).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = w.iter().sum();
    let mut items = Vec::new();
    for (i, wi) in w.iter().enumerate() {
        let u = random_vec(4, rng);
        let mut m = CMatrix::outer(&u);
        if i == 2 {
            let v = random_vec(4, rng);
            let dot: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            let perp = unit(v.iter().zip(&u).map(|(b, a)| b - a * dot).collect());
            m = m.add(&CMatrix::outer(&perp));
        }
        items.push((wi / total, ProjectorOp::new(m).map_err(e)?));
    }
    build_mixture(items).map_err(e)
}

fn proj_imp_exactness() -> Outcome {
    let mut rng = from_seed(10);
    let shots = 100_000u64;
    let mut notes = Vec::new();
    for _ in 0..3 {
        let mix = random_mixture(&mut rng)?;
        let psi = random_vec(4, &mut rng);
        let expect = mix.expectation(&psi);
        let dist = mix.proj_imp().distribution(&psi);
        let var: f64 = dist.iter().map(|(l, p)| p * l * l).sum::<f64>() - expect * expect;
        let mut sum = 0.0;
        for _ in 0..shots {
            sum += proj_imp_apply(&mix, &psi, &mut rng).map_err(e)?.0;
        }
        let mean = sum / shots as f64;
        let dev = (mean - expect) / (var.max(0.0) / shots as f64).sqrt();
        ensure(dev.abs() <= 4.0, || format!("ProjImp mean {mean:.5} vs Tr[P_D ρ] {expect:.5} ({dev:+.2}σ)"))?;
        notes.push(format!("{dev:+.2}σ"));
        for _ in 0..200 {
            let gamma: f64 = rng.gen();
            let (ok, post) = threshold_imp_apply(&mix, gamma, &psi, &mut rng).map_err(e)?;
            let mass = mix.proj_imp().acceptance_mass(gamma, &post);
            let (again, _) = threshold_imp_apply(&mix, gamma, &post, &mut rng).map_err(e)?;
            ensure(again == ok && (if ok { mass > 1.0 - TOL } else { mass < TOL }), || format!("TI not idempotent at γ={gamma}"))?;
        }
    }
    let mut passed = 0;
    let runs = 200;
    for _ in 0..runs {
        let (sk, pk) = setup(6, 1, &mut rng).map_err(e)?;
        let key = qkeygen(&sk).map_err(e)?;
        let m0 = BitVector::random(2, &mut rng);
        let mut m1 = BitVector::random(2, &mut rng);
        if m1 == m0 {
            m1.flip(0);
        }
        let mix = decryptor_mixture(&pk, &Decryptor::Honest, &m0, &m1).map_err(e)?;
        let (ok, _) = gamma_good_test(&mix, 0.4, key.registers[0].amplitudes(), &mut rng).map_err(e)?;
        passed += ok as u32;
    }
    let msg = format!("ProjImp means {}; TI idempotent; honest decryptor γ=0.4: {passed}/{runs}", notes.join(", "));
    if passed == runs {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn goldreich_levin() -> Outcome {
    let mut rng = from_seed(11);
    let mut worst: f64 = 0.0;
    for n in 1..=8usize {
        let x = BitVector::random(n, &mut rng);
        let pred = build_ip_predictor(&x, 0.0, &mut rng).map_err(e)?;
        worst = worst.max((exact_success(&pred, &pred.default_aux()).map_err(e)? - 1.0).abs());
    }
    ensure(worst <= TOL, || format!("perfect predictor off by {worst:.2e}"))?;
    let x = BitVector::random(8, &mut rng);
    let pred = build_ip_predictor(&x, 0.125, &mut rng).map_err(e)?;
    let eps = pred.declared_eps().ok_or("no declared advantage")?;
    ensure((eps - 0.375).abs() < 1e-12, || format!("ε = {eps}"))?;
    let runs = 100_000u64;
    let target = 4.0 * eps * eps;
    let est = success_estimate(&pred, &pred.default_aux(), runs, &mut rng).map_err(e)?;
    let floor = target - 4.0 * sigma(target, runs);
    let msg = format!("perfect: |P − 1| ≤ {worst:.1e}; ε=3/8: {est:.5} ≥ {floor:.5}");
    if est >= floor {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn analytic_bounds() -> Outcome {
    let b2 = monogamy_bound_exact(2).map_err(e)?;
    let b4 = monogamy_bound_exact(4).map_err(e)?;
    ensure(b2 == Ratio::new(3, 4) && b4 == Ratio::new(13, 24), || format!("bounds {b2}, {b4}"))?;
    let report = overlap_check(4).map_err(e)?;
    ensure(report.violations == 0, || format!("{} overlap violations", report.violations))?;
    let mut rng = from_seed(12);
    let mut worst: f64 = 0.0;
    for n in [2usize, 4, 6] {
        for _ in 0..5 {
            let a = sample_subspace(n, n / 2, &mut rng).map_err(e)?;
            let (lhs, rhs): (StateVector, StateVector) = epr_identity(&a).map_err(e)?;
            worst = worst.max((lhs.fidelity(&rhs).map_err(e)? - 1.0).abs());
        }
    }
    let msg = format!(
        "bounds {b2}, {b4}; overlap n=4: {} pairs, 0 violations; EPR max |F − 1| = {worst:.1e}",
        report.pairs
    );
    if worst <= TOL {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn anti_piracy_floors() -> Outcome {
    let trials = 100_000u64;
    let sde = Scheme::Sde(SdeParams::toy());
    let m = SdeParams::toy().m_len as i32;
    let cp = CpParams::toy();
    let games = [
        ("cpa", AntiPiracyKind::Cpa, sde, 0.5),
        ("random", AntiPiracyKind::Random, sde, (2f64).powi(-m)),
        ("copy-protection", AntiPiracyKind::CopyProtection, Scheme::Cprf(cp), (2f64).powi(-(cp.m_len as i32))),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, kind, scheme, p) in games {
        let g = AntiPiracy { kind, scheme, strategy: PirateStrategy::HonestToOneSide };
        let r = within(run_game(&g, trials, 13)?, p, trials);
        ok &= r.is_ok();
        parts.push(format!("{name}: {}", r.unwrap_or_else(|x| x)));
    }
    if ok {
        Ok(parts.join("; "))
    } else {
        Err(parts.join("; "))
    }
}

struct Criterion {
    name: &'static str,
    limit_s: f64,
    check: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { name: "coset algebra vs brute force", limit_s: 10.0, check: coset_algebra },
        Criterion { name: "Fourier duality", limit_s: 5.0, check: fourier_duality },
        Criterion { name: "tokenized signature correctness", limit_s: 60.0, check: tokenized_signatures },
        Criterion { name: "direct-product floor", limit_s: 120.0, check: direct_product_floor },
        Criterion { name: "single-decryptor round trip", limit_s: 120.0, check: sde_round_trip },
        Criterion { name: "program-form equivalence", limit_s: 30.0, check: program_forms },
        Criterion { name: "GGM puncturing", limit_s: 30.0, check: ggm_puncturing },
        Criterion { name: "F2 injectivity", limit_s: 30.0, check: f2_injectivity },
        Criterion { name: "copy-protected PRF and triggers", limit_s: 120.0, check: cprf_correctness },
        Criterion { name: "ProjImp / TI exactness", limit_s: 60.0, check: proj_imp_exactness },
        Criterion { name: "Goldreich-Levin extraction", limit_s: 120.0, check: goldreich_levin },
        Criterion { name: "analytic bounds", limit_s: 120.0, check: analytic_bounds },
        Criterion { name: "anti-piracy floors", limit_s: 300.0, check: anti_piracy_floors },
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, c) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = (c.check)();
        let secs = start.elapsed().as_secs_f64();
        let (pass, detail) = match outcome {
            Ok(d) if secs <= c.limit_s => (true, d),
            Ok(d) => (false, format!("{d}; over time limit {}s", c.limit_s)),
            Err(d) => (false, d),
        };
        failed += !pass as u32;
        println!("{} {:>2} {} [{secs:.1}s]: {detail}", if pass { "PASS" } else { "FAIL" }, i + 1, c.name);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
