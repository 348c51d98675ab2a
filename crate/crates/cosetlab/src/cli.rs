//! Command-line front end.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use cosetlab_core::cprf::{self, ChallengerView, CpParams};
use cosetlab_core::games::{
    self, AccessMode, AntiPiracy, AntiPiracyKind, DirectProduct, DpStrategy, Experiment, GameResult, HiddenTrigger,
    Monogamy, MonogamyStrategy, PirateStrategy, RevokeAfterSign, Scheme, SdeParams, StrongMonogamy,
    StrongMonogamyStrategy, TriggerStrategy,
};
use cosetlab_core::gf2::{self, BitVector, HiddenCoset, Subspace};
use cosetlab_core::prf::{self, GgmKey, Mode, PuncturedKey};
use cosetlab_core::qsim::{coset_state_direct, prepare_coset_state};
use cosetlab_core::rng::from_seed;
use cosetlab_core::toksig::{self, Signature, Token, TsPublicKey, TsPublicKeyDescriptor};
use cosetlab_core::{glx, sde, Error};
use serde_json::{json, Map, Value};

use crate::files::{self, CiphertextFile, RegistersFile, SdePublicKeyFile, StateFile};
use crate::output::{game_csv, game_text, round12, to_json, Format};
use crate::runner::{default_jobs, run_parallel};
use crate::{config, UsageError};

#[derive(Parser, Debug)]
#[command(name = "cosetlab", version, about = "Hidden-coset schemes, games and bounds")]
pub struct Cli {
    /// Master seed for every random choice.
    #[arg(long, global = true, env = "COSETLAB_SEED", default_value_t = 0)]
    pub seed: u64,
    /// TOML file with default flag values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for game trials.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Subspace algebra over F_2.
    #[command(subcommand)]
    Gf2(Gf2Cmd),
    /// Coset-state simulation.
    #[command(subcommand)]
    Qsim(QsimCmd),
    /// Tokenized signatures.
    #[command(subcommand)]
    Toksig(ToksigCmd),
    /// Puncturable PRFs.
    #[command(subcommand)]
    Prf(PrfCmd),
    /// Single-decryptor encryption.
    #[command(subcommand)]
    Sde(SdeCmd),
    /// Copy-protected PRF.
    #[command(subcommand)]
    Cprf(CprfCmd),
    /// Security games.
    #[command(subcommand)]
    Game(GameCmd),
    /// Closed-form bounds.
    #[command(subcommand)]
    Bound(BoundCmd),
    /// Goldreich-Levin extraction.
    #[command(subcommand)]
    Glx(GlxCmd),
}

#[derive(Args, Debug)]
pub struct RowsArgs {
    #[arg(long)]
    pub n: usize,
    /// Comma-separated bit strings spanning the subspace.
    #[arg(long, default_value = "")]
    pub rows: String,
}

#[derive(Subcommand, Debug)]
pub enum Gf2Cmd {
    /// Reduced row echelon basis of the span.
    Rref(RowsArgs),
    /// Orthogonal complement.
    Complement(RowsArgs),
    /// Lexicographically smallest element of A + s.
    Canon {
        #[command(flatten)]
        rows: RowsArgs,
        #[arg(long)]
        s: String,
    },
    /// Uniform subspace of dimension d.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum QsimCmd {
    /// Amplitudes of a random coset state.
    CosetState {
        #[arg(long, default_value_t = 4)]
        n: usize,
    },
    /// Fidelity of H^n|A_{s,s'}⟩ with |A⊥_{s',s}⟩ on random instances.
    Duality {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        instances: usize,
    },
}

#[derive(Args, Debug)]
pub struct DirArg {
    /// Directory holding key files.
    #[arg(long, default_value = ".")]
    pub dir: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum ToksigCmd {
    /// Writes sk.json, pk.json and token.json.
    Keygen {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[command(flatten)]
        dir: DirArg,
    },
    /// Signs one bit with token.json and writes sig.json.
    Sign {
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
        m: u8,
        #[command(flatten)]
        dir: DirArg,
    },
    /// Checks sig.json against pk.json.
    Verify {
        #[command(flatten)]
        dir: DirArg,
    },
    /// Runs Revoke on token.json.
    Revoke {
        #[command(flatten)]
        dir: DirArg,
    },
}

#[derive(Subcommand, Debug)]
pub enum PrfCmd {
    /// Writes prf-key.json.
    Keygen {
        #[arg(long)]
        in_len: usize,
        #[arg(long)]
        out_len: usize,
        #[command(flatten)]
        dir: DirArg,
    },
    Eval {
        #[arg(long)]
        x: String,
        #[command(flatten)]
        dir: DirArg,
    },
    /// Writes prf-punctured.json.
    Puncture {
        /// Comma-separated points.
        #[arg(long)]
        points: String,
        #[command(flatten)]
        dir: DirArg,
    },
    /// Evaluates the punctured key.
    Peval {
        #[arg(long)]
        x: String,
        #[command(flatten)]
        dir: DirArg,
    },
    /// Reports which copy-protection constraints hold.
    Check(CpArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CpArgs {
    #[arg(long, default_value_t = 2)]
    pub l0: usize,
    #[arg(long, default_value_t = 16)]
    pub l1: usize,
    #[arg(long, default_value_t = 10)]
    pub l2: usize,
    #[arg(long, default_value_t = 4)]
    pub lambda: usize,
    #[arg(long, default_value_t = 2)]
    pub m_len: usize,
    /// Enforce every constraint instead of reporting waivers.
    #[arg(long)]
    pub strict: bool,
}

impl CpArgs {
    fn params(&self) -> CpParams {
        CpParams {
            l0: self.l0,
            l1: self.l1,
            l2: self.l2,
            lambda: self.lambda,
            m_len: self.m_len,
            mode: if self.strict { Mode::Strict } else { Mode::Toy },
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum SdeCmd {
    /// Writes sde-sk.json and sde-pk.json.
    Setup {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        kappa: usize,
        #[command(flatten)]
        dir: DirArg,
    },
    /// Writes the quantum key to sde-key.json.
    Qkeygen {
        #[command(flatten)]
        dir: DirArg,
    },
    /// Writes ct.json.
    Enc {
        #[arg(long)]
        m: String,
        /// Register choices; uniform when omitted.
        #[arg(long)]
        r: Option<String>,
        /// Acknowledge that ct.json stores the message in the clear.
        #[arg(long)]
        challenger_only: bool,
        #[command(flatten)]
        dir: DirArg,
    },
    /// Decrypts ct.json and rewrites the rewound key.
    Dec {
        #[command(flatten)]
        dir: DirArg,
    },
}

#[derive(Subcommand, Debug)]
pub enum CprfCmd {
    /// Writes cprf-view.json and cprf-key.json.
    Keygen {
        #[command(flatten)]
        params: CpArgs,
        #[command(flatten)]
        dir: DirArg,
    },
    /// Evaluates the quantum key and rewrites it.
    Eval {
        /// Input as bits, or hex with a 0x prefix.
        #[arg(long)]
        x: String,
        #[command(flatten)]
        dir: DirArg,
    },
    /// Builds a hidden-trigger input planting y under prefix x0.
    Trigger {
        #[arg(long)]
        x0: String,
        #[arg(long)]
        y: String,
        #[command(flatten)]
        dir: DirArg,
    },
    /// Reports which constraints hold.
    Check(CpArgs),
}

#[derive(Subcommand, Debug)]
pub enum GameCmd {
    /// Runs trials of one game with one strategy.
    Run(GameArgs),
}

#[derive(Args, Debug, Clone)]
pub struct GameArgs {
    #[arg(long)]
    pub game: String,
    #[arg(long)]
    pub strategy: String,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    /// Coset dimension parameter; defaults to 8, or 4 for encryption games.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub kappa: usize,
    #[arg(long, default_value_t = 0.25)]
    pub gamma: f64,
    /// Oracle checks for measure-then-search.
    #[arg(long, default_value_t = 1)]
    pub tries: u64,
    /// Allow strategies that read challenger secrets.
    #[arg(long)]
    pub sanity: bool,
    #[command(flatten)]
    pub cp: CpArgs,
}

#[derive(Subcommand, Debug)]
pub enum BoundCmd {
    /// Optimal winning probability of the BB84-style monogamy game.
    Monogamy {
        #[arg(long)]
        n: usize,
    },
    /// Exhaustive coset-state overlap check.
    Overlap {
        #[arg(long, default_value_t = 4)]
        n: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum GlxCmd {
    /// Extraction from a predictor that errs on a fixed fraction of inputs.
    Demo {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 0.125)]
        flip_fraction: f64,
        #[arg(long, default_value_t = 10000)]
        reps: u64,
    },
}

/// Structured result of one command.
pub struct Report {
    value: Map<String, Value>,
    text: Option<String>,
    csv: Option<String>,
}

impl Report {
    fn new(value: Value) -> Self {
        let value = match value {
            Value::Object(m) => m,
            other => {
                let mut m = Map::new();
                m.insert("value".into(), other);
                m
            }
        };
        Report { value, text: None, csv: None }
    }

    fn game(r: &GameResult) -> anyhow::Result<Self> {
        let mut rep = Report::new(serde_json::to_value(r)?);
        rep.text = Some(game_text(r));
        rep.csv = Some(game_csv(std::slice::from_ref(r)));
        Ok(rep)
    }

    fn render(mut self, format: Format, seed: u64) -> anyhow::Result<String> {
        self.value.insert("seed".into(), json!(seed));
        let value = Value::Object(self.value);
        match format {
            Format::Json => Ok(to_json(&value)?),
            Format::Text => Ok(match self.text {
                Some(t) => t,
                None => flat_text(&value),
            }),
            Format::Csv => Ok(match self.csv {
                Some(c) => c,
                None => flat_csv(&value),
            }),
        }
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => round12(f).to_string(),
            _ => n.to_string(),
        },
        other => serde_json::to_string(other).unwrap_or_default(),
    }
}

fn flat_text(v: &Value) -> String {
    let mut s = String::new();
    if let Value::Object(m) = v {
        for (k, val) in m {
            s.push_str(&format!("{k}: {}\n", scalar_text(val)));
        }
    }
    s
}

fn csv_field(s: String) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

fn flat_csv(v: &Value) -> String {
    let Value::Object(m) = v else { return String::new() };
    let header: Vec<&str> = m.keys().map(|k| k.as_str()).collect();
    let row: Vec<String> = m.values().map(|v| csv_field(scalar_text(v))).collect();
    format!("{}\n{}\n", header.join(","), row.join(","))
}

fn parse_bits(s: &str, n: Option<usize>) -> anyhow::Result<BitVector> {
    let v = if let Some(hex) = s.strip_prefix("0x") {
        let n = n.ok_or_else(|| UsageError("hex input needs a known length".into()))?;
        BitVector::from_hex(n, hex)?
    } else {
        s.parse::<BitVector>()?
    };
    if let Some(n) = n {
        v.check_len(n)?;
    }
    Ok(v)
}

fn parse_list(s: &str, n: usize) -> anyhow::Result<Vec<BitVector>> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(|t| parse_bits(t, Some(n))).collect()
}

fn bits_list(vs: &[BitVector]) -> Vec<String> {
    vs.iter().map(|v| v.to_string()).collect()
}

fn subspace_json(a: &Subspace) -> Value {
    json!({ "n": a.n(), "dim": a.dim(), "basis": bits_list(a.basis()) })
}

fn warn_waived(p: &CpParams) {
    let report = p.report();
    if p.mode == Mode::Toy && !report.all_satisfied() {
        eprint!("{report}");
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run(args: Vec<OsString>) -> i32 {
    let args = match config::config_path(&args) {
        Some(path) => match config::merge_file(args, Path::new(&path)) {
            Ok(a) => a,
            Err(e) => return report_error(&e),
        },
        None => args,
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli).and_then(|rep| emit(rep, &cli)) {
        Ok(()) => 0,
        Err(e) => report_error(&e),
    }
}

fn exit_code(e: &anyhow::Error) -> i32 {
    if let Some(core) = e.downcast_ref::<Error>() {
        return if matches!(core, Error::InconsistentProgram) { 1 } else { 2 };
    }
    if e.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    1
}

fn report_error(e: &anyhow::Error) -> i32 {
    eprintln!("error: {e:#}");
    exit_code(e)
}

fn emit(rep: Report, cli: &Cli) -> anyhow::Result<()> {
    let text = rep.render(cli.format, cli.seed)?;
    match &cli.out {
        Some(path) => files::write_text(path, &text),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).context("writing stdout")?;
            out.flush().context("writing stdout")
        }
    }
}

pub fn execute(cli: &Cli) -> anyhow::Result<Report> {
    let seed = cli.seed;
    let mut rng = from_seed(seed);
    match &cli.command {
        Command::Gf2(cmd) => gf2_cmd(cmd, &mut rng),
        Command::Qsim(cmd) => qsim_cmd(cmd, &mut rng),
        Command::Toksig(cmd) => toksig_cmd(cmd, &mut rng),
        Command::Prf(cmd) => prf_cmd(cmd, &mut rng),
        Command::Sde(cmd) => sde_cmd(cmd, &mut rng),
        Command::Cprf(cmd) => cprf_cmd(cmd, &mut rng),
        Command::Game(GameCmd::Run(args)) => {
            let exp = build_experiment(args)?;
            let jobs = cli.jobs.unwrap_or_else(default_jobs);
            Report::game(&run_parallel(exp.as_ref(), args.trials, seed, jobs)?)
        }
        Command::Bound(cmd) => bound_cmd(cmd),
        Command::Glx(cmd) => glx_cmd(cmd, &mut rng),
    }
}

type Rng = cosetlab_core::rng::DetRng;

fn gf2_cmd(cmd: &Gf2Cmd, rng: &mut Rng) -> anyhow::Result<Report> {
    let span = |r: &RowsArgs| -> anyhow::Result<Subspace> { Ok(gf2::rref(r.n, &parse_list(&r.rows, r.n)?)?) };
    Ok(match cmd {
        Gf2Cmd::Rref(r) => {
            let a = span(r)?;
            let mut v = subspace_json(&a);
            v["pivots"] = json!(a.pivots());
            Report::new(v)
        }
        Gf2Cmd::Complement(r) => Report::new(subspace_json(&gf2::complement(&span(r)?))),
        Gf2Cmd::Canon { rows, s } => {
            let a = span(rows)?;
            let s = parse_bits(s, Some(rows.n))?;
            Report::new(json!({ "subspace": subspace_json(&a), "s": s.to_string(), "canonical": gf2::canonical_rep(&a, &s)?.to_string() }))
        }
        Gf2Cmd::Sample { n, d } => Report::new(subspace_json(&gf2::sample_subspace(*n, *d, rng)?)),
    })
}

fn hidden_coset_json(hc: &HiddenCoset) -> Value {
    json!({ "subspace": subspace_json(&hc.a), "s": hc.s.to_string(), "s_prime": hc.s_prime.to_string() })
}

fn qsim_cmd(cmd: &QsimCmd, rng: &mut Rng) -> anyhow::Result<Report> {
    Ok(match cmd {
        QsimCmd::CosetState { n } => {
            let hc = HiddenCoset::sample(*n, rng)?;
            let st = prepare_coset_state(&hc.a, &hc.s, &hc.s_prime)?;
            let support: Vec<Value> = st
                .support()
                .map(|i| {
                    let z = st.amplitude(i);
                    json!({ "index": i, "bits": BitVector::from_index(*n, i).to_string(), "re": z.re, "im": z.im })
                })
                .collect();
            let mut csv = String::new();
            st.write_csv(&mut csv).map_err(|_| anyhow::anyhow!("formatting amplitudes"))?;
            let mut rep = Report::new(json!({ "coset": hidden_coset_json(&hc), "support": support }));
            rep.csv = Some(csv);
            rep
        }
        QsimCmd::Duality { n, instances } => {
            let mut worst: f64 = 0.0;
            for _ in 0..*instances {
                let hc = HiddenCoset::sample(*n, rng)?;
                let mut st = coset_state_direct(&hc.a, &hc.s, &hc.s_prime)?;
                st.hadamard_all();
                let dual = coset_state_direct(&hc.a.complement(), &hc.s_prime, &hc.s)?;
                worst = worst.max((st.fidelity(&dual)? - 1.0).abs());
            }
            Report::new(json!({ "n": n, "instances": instances, "max_fidelity_error": worst }))
        }
    })
}

fn load_pk(dir: &Path) -> anyhow::Result<TsPublicKey> {
    let d: TsPublicKeyDescriptor = files::read_json(&dir.join("pk.json"))?;
    Ok(TsPublicKey::from_descriptor(d)?)
}

fn toksig_cmd(cmd: &ToksigCmd, rng: &mut Rng) -> anyhow::Result<Report> {
    Ok(match cmd {
        ToksigCmd::Keygen { n, dir } => {
            let (sk, pk) = toksig::keygen(*n, rng)?;
            let token = toksig::token_gen(&sk)?;
            files::write_json(&dir.dir.join("sk.json"), &sk)?;
            files::write_json(&dir.dir.join("pk.json"), pk.descriptor())?;
            files::write_json(&dir.dir.join("token.json"), &StateFile::from_token(&token))?;
            Report::new(json!({ "command": "toksig keygen", "n": n, "files": ["sk.json", "pk.json", "token.json"] }))
        }
        ToksigCmd::Sign { m, dir } => {
            let path = dir.dir.join("token.json");
            let file: StateFile = files::read_json(&path)?;
            if file.consumed {
                return Err(Error::TokenConsumed.into());
            }
            let mut token = Token::from_state(file.to_state()?);
            let sig = toksig::sign(*m == 1, &mut token, rng)?;
            files::write_json(&path, &StateFile::from_token(&token))?;
            files::write_json(&dir.dir.join("sig.json"), &sig)?;
            Report::new(json!({ "command": "toksig sign", "m": m, "sig": sig.sig.to_string() }))
        }
        ToksigCmd::Verify { dir } => {
            let pk = load_pk(&dir.dir)?;
            let sig: Signature = files::read_json(&dir.dir.join("sig.json"))?;
            let ok = toksig::verify(&pk, sig.m, &sig.sig);
            Report::new(json!({ "command": "toksig verify", "m": sig.m as u8, "sig": sig.sig.to_string(), "accepted": ok }))
        }
        ToksigCmd::Revoke { dir } => {
            let pk = load_pk(&dir.dir)?;
            let path = dir.dir.join("token.json");
            let file: StateFile = files::read_json(&path)?;
            let (ok, back) = toksig::revoke(&pk, Token::from_state(file.to_state()?), rng);
            files::write_json(&path, &StateFile::from_state(back.state(), file.consumed))?;
            Report::new(json!({ "command": "toksig revoke", "accepted": ok }))
        }
    })
}

fn prf_cmd(cmd: &PrfCmd, rng: &mut Rng) -> anyhow::Result<Report> {
    let key_path = |d: &DirArg| d.dir.join("prf-key.json");
    let punct_path = |d: &DirArg| d.dir.join("prf-punctured.json");
    Ok(match cmd {
        PrfCmd::Keygen { in_len, out_len, dir } => {
            let k = GgmKey::generate(*in_len, *out_len, rng)?;
            files::write_json(&key_path(dir), &k)?;
            Report::new(json!({ "command": "prf keygen", "in_len": in_len, "out_len": out_len, "files": ["prf-key.json"] }))
        }
        PrfCmd::Eval { x, dir } => {
            let k: GgmKey = files::read_json(&key_path(dir))?;
            let x = parse_bits(x, Some(k.in_len))?;
            Report::new(json!({ "command": "prf eval", "x": x.to_string(), "y": k.eval(&x)?.to_string() }))
        }
        PrfCmd::Puncture { points, dir } => {
            let k: GgmKey = files::read_json(&key_path(dir))?;
            let set = parse_list(points, k.in_len)?;
            let pk = prf::puncture(&k, &set)?;
            files::write_json(&punct_path(dir), &pk)?;
            Report::new(json!({ "command": "prf puncture", "points": bits_list(&set), "copath_nodes": pk.copath.len() }))
        }
        PrfCmd::Peval { x, dir } => {
            let k: PuncturedKey = files::read_json(&punct_path(dir))?;
            let x = parse_bits(x, Some(k.in_len))?;
            let y = match k.eval(&x) {
                Ok(y) => Value::String(y.to_string()),
                Err(Error::Punctured) => Value::Null,
                Err(e) => return Err(e.into()),
            };
            Report::new(json!({ "command": "prf peval", "x": x.to_string(), "punctured": y.is_null(), "y": y }))
        }
        PrfCmd::Check(a) => check_report(&a.params())?,
    })
}

fn check_report(p: &CpParams) -> anyhow::Result<Report> {
    let report = p.report();
    let mut rep = Report::new(json!({
        "params": p,
        "n": report.n,
        "all_satisfied": report.all_satisfied(),
        "checks": report.checks,
    }));
    rep.text = Some(report.to_string());
    Ok(rep)
}

fn sde_cmd(cmd: &SdeCmd, rng: &mut Rng) -> anyhow::Result<Report> {
    let sk_path = |d: &DirArg| d.dir.join("sde-sk.json");
    let pk_path = |d: &DirArg| d.dir.join("sde-pk.json");
    let key_path = |d: &DirArg| d.dir.join("sde-key.json");
    let ct_path = |d: &DirArg| d.dir.join("ct.json");
    Ok(match cmd {
        SdeCmd::Setup { n, kappa, dir } => {
            let (sk, pk) = sde::setup(*n, *kappa, rng)?;
            let pk_file = SdePublicKeyFile { n: pk.n, registers: pk.registers.iter().map(|r| r.descriptor().clone()).collect() };
            files::write_json(&sk_path(dir), &sk)?;
            files::write_json(&pk_path(dir), &pk_file)?;
            Report::new(json!({ "command": "sde setup", "n": n, "kappa": kappa, "files": ["sde-sk.json", "sde-pk.json"] }))
        }
        SdeCmd::Qkeygen { dir } => {
            let sk: sde::SdeSecretKey = files::read_json(&sk_path(dir))?;
            let key = sde::qkeygen(&sk)?;
            files::write_json(&key_path(dir), &RegistersFile::from_states(&key.registers))?;
            Report::new(json!({ "command": "sde qkeygen", "registers": key.registers.len(), "files": ["sde-key.json"] }))
        }
        SdeCmd::Enc { m, r, challenger_only, dir } => {
            if !challenger_only {
                bail!(UsageError(
                    "ct.json stores the message in the clear; pass --challenger-only to write it anyway".into()
                ));
            }
            let pk_file: SdePublicKeyFile = files::read_json(&pk_path(dir))?;
            let pk = pk_file.to_key()?;
            let m = parse_bits(m, None)?;
            let r = match r {
                Some(r) => parse_bits(r, Some(pk.kappa()))?.bits().collect(),
                None => sde::random_r(pk.kappa(), rng),
            };
            let ct = sde::encrypt_with(&pk, &m, &r)?;
            let file = CiphertextFile { n: pk.n, kappa: pk.kappa(), r: ct.r.clone(), m: m.clone() };
            files::write_json(&ct_path(dir), &file)?;
            let r_bits = BitVector::from_bools(&ct.r).to_string();
            Report::new(json!({ "command": "sde enc", "r": r_bits, "program": ct.kind().name(), "files": ["ct.json"] }))
        }
        SdeCmd::Dec { dir } => {
            let pk = files::read_json::<SdePublicKeyFile>(&pk_path(dir))?.to_key()?;
            let file: CiphertextFile = files::read_json(&ct_path(dir))?;
            if file.n != pk.n || file.kappa != pk.kappa() {
                bail!(UsageError("ct.json does not match sde-pk.json".into()));
            }
            let ct = sde::encrypt_with(&pk, &file.m, &file.r)?;
            let regs: RegistersFile = files::read_json(&key_path(dir))?;
            let mut key = sde::QuantumDecKey { registers: regs.to_states()? };
            let out = sde::decrypt(&mut key, &ct, rng)?;
            files::write_json(&key_path(dir), &RegistersFile::from_states(&key.registers))?;
            Report::new(json!({ "command": "sde dec", "message": out.map(|m| m.to_string()) }))
        }
    })
}

fn load_cp_key(dir: &Path) -> anyhow::Result<(ChallengerView, cprf::CpKey)> {
    let view: ChallengerView = files::read_json(&dir.join("cprf-view.json"))?;
    let regs: RegistersFile = files::read_json(&dir.join("cprf-key.json"))?;
    let key = cprf::key_from_view(&view, regs.to_states()?)?;
    Ok((view, key))
}

fn cprf_cmd(cmd: &CprfCmd, rng: &mut Rng) -> anyhow::Result<Report> {
    Ok(match cmd {
        CprfCmd::Keygen { params, dir } => {
            let p = params.params();
            warn_waived(&p);
            let (key, view) = cprf::cp_setup(p, rng)?;
            files::write_json(&dir.dir.join("cprf-view.json"), &view)?;
            files::write_json(&dir.dir.join("cprf-key.json"), &RegistersFile::from_states(&key.registers))?;
            Report::new(json!({ "command": "cprf keygen", "params": p, "files": ["cprf-view.json", "cprf-key.json"] }))
        }
        CprfCmd::Eval { x, dir } => {
            let (view, mut key) = load_cp_key(&dir.dir)?;
            warn_waived(&view.params);
            let x = parse_bits(x, Some(view.params.n()))?;
            let y = cprf::cp_eval(&mut key, &x, rng)?;
            files::write_json(&dir.dir.join("cprf-key.json"), &RegistersFile::from_states(&key.registers))?;
            Report::new(json!({ "command": "cprf eval", "x": x.to_string(), "x_hex": x.to_hex(), "y": y.map(|y| y.to_string()) }))
        }
        CprfCmd::Trigger { x0, y, dir } => {
            let view: ChallengerView = files::read_json(&dir.dir.join("cprf-view.json"))?;
            warn_waived(&view.params);
            let x0 = parse_bits(x0, Some(view.params.l0))?;
            let y = parse_bits(y, Some(view.params.m_len))?;
            let t = cprf::gen_trigger(&x0, &y, &view)?;
            let bits = t.to_bits();
            Report::new(json!({ "command": "cprf trigger", "x0": t.x0.to_string(), "y": y.to_string(), "x": bits.to_string(), "x_hex": bits.to_hex() }))
        }
        CprfCmd::Check(a) => check_report(&a.params())?,
    })
}

fn unknown(what: &'static str, name: &str) -> anyhow::Error {
    Error::Unknown { what, name: name.to_string() }.into()
}

/// Builds the experiment named by `--game` and `--strategy`.
pub fn build_experiment(a: &GameArgs) -> anyhow::Result<Box<dyn Experiment>> {
    let n = a.n.unwrap_or(8);
    let s = a.strategy.as_str();
    let exp: Box<dyn Experiment> = match a.game.as_str() {
        g @ ("direct-product" | "direct-product-comp") => {
            let strategy = match s {
                "measure-both" => DpStrategy::MeasureBoth,
                "guess" => DpStrategy::Guess,
                "measure-then-search" => DpStrategy::MeasureThenSearch { tries: a.tries },
                "sanity" => DpStrategy::Sanity,
                _ => return Err(unknown("strategy", s)),
            };
            let mode = if g == "direct-product" { AccessMode::Oracle } else { AccessMode::Program };
            Box::new(DirectProduct { n, strategy, mode, sanity: a.sanity })
        }
        "revoke-after-sign" => {
            if s != "sign-zero" {
                return Err(unknown("strategy", s));
            }
            Box::new(RevokeAfterSign { n })
        }
        "monogamy" => {
            let strategy = match s {
                "forward-to-first" => MonogamyStrategy::ForwardToFirst,
                "symmetric-split" => MonogamyStrategy::SymmetricSplit,
                "shared-guess" => MonogamyStrategy::SharedGuess,
                "sanity" => MonogamyStrategy::Sanity,
                _ => return Err(unknown("strategy", s)),
            };
            Box::new(Monogamy { n, strategy, sanity: a.sanity })
        }
        g @ ("strong-monogamy" | "strong-monogamy-comp") => {
            let strategy = match s {
                "measure-and-send" => StrongMonogamyStrategy::MeasureAndSend,
                "keep-at-first" => StrongMonogamyStrategy::KeepAtFirst,
                "peek-secret" => StrongMonogamyStrategy::PeekSecret,
                _ => return Err(unknown("strategy", s)),
            };
            Box::new(StrongMonogamy { n, strategy, comp: g.ends_with("-comp"), sanity: a.sanity })
        }
        "hidden-trigger" => {
            let strategy = match s {
                "coin-flip" => TriggerStrategy::CoinFlip,
                "evaluate-compare" => TriggerStrategy::EvaluateCompare,
                "sanity-is-trigger" => TriggerStrategy::SanityIsTrigger,
                _ => return Err(unknown("strategy", s)),
            };
            let params = a.cp.params();
            warn_waived(&params);
            Box::new(HiddenTrigger { params, strategy, sanity: a.sanity })
        }
        g => {
            let kind = match g {
                "anti-piracy-cpa" => AntiPiracyKind::Cpa,
                "anti-piracy-random" => AntiPiracyKind::Random,
                "anti-piracy-strong-ti" => AntiPiracyKind::StrongTi { gamma: a.gamma },
                "anti-piracy-copy-protection" => AntiPiracyKind::CopyProtection,
                "anti-piracy-ind-cprf" => AntiPiracyKind::IndCprf,
                _ => return Err(unknown("game", g)),
            };
            let strategy = match s {
                "honest-to-one-side" => PirateStrategy::HonestToOneSide,
                "guess-both" => PirateStrategy::GuessBoth,
                _ => return Err(unknown("strategy", s)),
            };
            let scheme = if matches!(kind, AntiPiracyKind::CopyProtection | AntiPiracyKind::IndCprf) {
                let params = a.cp.params();
                warn_waived(&params);
                Scheme::Cprf(params)
            } else {
                Scheme::Sde(SdeParams { n: a.n.unwrap_or(4), kappa: a.kappa, m_len: a.cp.m_len })
            };
            Box::new(AntiPiracy { kind, scheme, strategy })
        }
    };
    Ok(exp)
}

fn bound_cmd(cmd: &BoundCmd) -> anyhow::Result<Report> {
    Ok(match cmd {
        BoundCmd::Monogamy { n } => {
            let value = games::monogamy_bound(*n)?;
            let exact = games::monogamy_bound_exact(*n).ok().map(|r| r.to_string());
            let mut rep = Report::new(json!({ "n": n, "bound": value, "exact": exact }));
            rep.text = Some(format!("{}\n", round12(value)));
            rep
        }
        BoundCmd::Overlap { n } => Report::new(serde_json::to_value(games::overlap_check(*n)?)?),
    })
}

fn glx_cmd(cmd: &GlxCmd, rng: &mut Rng) -> anyhow::Result<Report> {
    match cmd {
        GlxCmd::Demo { n, flip_fraction, reps } => {
            let x = BitVector::random(*n, rng);
            let pred = glx::build_ip_predictor(&x, *flip_fraction, rng)?;
            let aux = pred.default_aux();
            let eps = pred.declared_eps().context("predictor has no declared advantage")?;
            let exact = glx::exact_success(&pred, &aux)?;
            let estimate = glx::success_estimate(&pred, &aux, *reps, rng)?;
            Ok(Report::new(json!({
                "n": n,
                "x": x.to_string(),
                "flip_fraction": flip_fraction,
                "eps": eps,
                "four_eps_squared": 4.0 * eps * eps,
                "exact_success": exact,
                "reps": reps,
                "estimate": estimate,
            })))
        }
    }
}
