//! Command-line front end for the `refine` provers.
//!
//! All work happens in [`run`], which takes the argument list, the value of
//! `REFINE_PROVER_SEED` and two output sinks, so tests can drive it without
//! spawning a process. Output depends only on the arguments and the seed.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use refine::calculus::{
    check_proof, prove_bounded, render, to_labelled, to_nested, translate_proof, Budget, GrammarProof, NestedSequent, Verdict,
};
use refine::fixtures::{ds_axioms, grammar_axioms, random_grammar_formula, random_stit_formula};
use refine::grammar::CfcstSystem;
use refine::interpolation::{lyndon_interpolate, InterpError, InterpOutcome};
use refine::semantics::{check_ds, check_sigma, validate_ds, DsModel, SigmaModel, World};
use refine::sequent::{Label, LabelledSequent};
use refine::stit::{check_stit_proof, prove_ds_with, DsVerdict, StitProof};
use refine::syntax::{parse_implication, parse_in, Character, Family, Formula};

/// Valid formula, proof found, or check passed.
pub const EXIT_OK: i32 = 0;
/// Refuted formula, or a proof or model that fails its check.
pub const EXIT_NEGATIVE: i32 = 1;
/// Bad flags or unreadable input.
pub const EXIT_INPUT: i32 = 2;
/// The grammar prover ran out of budget.
pub const EXIT_UNKNOWN: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "refine", version, about = "Proof search, counter-models and interpolants for grammar and deontic STIT logics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Label budget for grammar proof search.
    #[arg(long, global = true, default_value_t = 16, value_parser = clap::value_parser!(u64).range(1..))]
    max_labels: u64,
    /// Step budget for grammar proof search.
    #[arg(long, global = true, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    max_steps: u64,
    /// Seed for randomised runs. REFINE_PROVER_SEED takes precedence.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Logic {
    Auto,
    Grammar,
    Stit,
}

#[derive(Args, Debug)]
struct SystemArgs {
    /// CFCST system file. Defaults to the empty system.
    #[arg(long)]
    system: Option<PathBuf>,
    /// Add missing converse rules instead of rejecting the file.
    #[arg(long)]
    auto_close: bool,
}

impl SystemArgs {
    fn load(&self) -> anyhow::Result<CfcstSystem> {
        let Some(path) = &self.system else { return Ok(CfcstSystem::empty()) };
        let text = read(path)?;
        CfcstSystem::parse(&text, self.auto_close).with_context(|| format!("bad system file {}", path.display()))
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide a grammar-logic formula within the search budget.
    ProveGrammar {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        formula: String,
        /// Write the proof or counter-model as JSON to this file.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Decide a deontic STIT formula.
    ProveStit {
        /// Bound on the number of choices; 0 means unbounded.
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long)]
        formula: String,
        /// Write the proof or counter-model as JSON to this file.
        #[arg(long)]
        emit: Option<PathBuf>,
        /// Record every rule application.
        #[arg(long)]
        trace: bool,
    },
    /// Compute a Lyndon interpolant for a valid implication.
    Interpolate {
        #[command(flatten)]
        system: SystemArgs,
        /// The implication `phi -> psi`.
        #[arg(long = "impl")]
        implication: String,
    },
    /// Convert between labelled tree sequents and nested sequents.
    #[command(group(ArgGroup::new("input").required(true).args(["sequent", "nested", "proof"])))]
    Translate {
        /// A labelled tree sequent, e.g. "R_a(w0,w1) |- w0: p, w1: q".
        #[arg(long)]
        sequent: Option<String>,
        /// A nested sequent, e.g. "p, (a){q}".
        #[arg(long)]
        nested: Option<String>,
        /// A grammar proof JSON file to rewrite in nested notation.
        #[arg(long)]
        proof: Option<PathBuf>,
    },
    /// Check a proof JSON file.
    CheckProof {
        file: PathBuf,
        #[command(flatten)]
        system: SystemArgs,
        /// Choice bound for STIT proofs.
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Logic::Auto)]
        logic: Logic,
    },
    /// Validate a model JSON file and optionally evaluate a formula in it.
    CheckModel {
        file: PathBuf,
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        formula: Option<String>,
        /// World to evaluate at; every world when omitted.
        #[arg(long)]
        world: Option<Label>,
    },
    /// Prove the axiom corpus, plus optional seeded random formulas.
    Fixtures {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 0)]
        k: usize,
        /// Number of random formulas per logic.
        #[arg(long, default_value_t = 0)]
        random: usize,
    },
}

struct Config {
    budget: Budget,
    seed: u64,
}

struct Report {
    code: i32,
    text: String,
    json: Value,
}

impl Report {
    fn new(code: i32, text: String, json: Value) -> Self {
        Report { code, text, json }
    }
}

/// Runs one command and returns its exit code.
pub fn run<I, T>(args: I, env_seed: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return e.exit_code();
        }
    };
    let seed = match env_seed.map(str::trim).filter(|s| !s.is_empty()) {
        None => cli.seed,
        Some(s) => match s.parse() {
            Ok(v) => v,
            Err(_) => {
                let _ = writeln!(err, "error: REFINE_PROVER_SEED must be an unsigned integer, got `{s}`");
                return EXIT_INPUT;
            }
        },
    };
    let cfg = Config { budget: Budget { max_labels: cli.max_labels as usize, max_steps: cli.max_steps as usize }, seed };
    match dispatch(&cfg, cli.command) {
        Ok(r) => {
            let body = match cli.format {
                Format::Text => r.text,
                Format::Json => format!("{}\n", serde_json::to_string_pretty(&r.json).expect("JSON values serialise")),
            };
            let _ = out.write_all(body.as_bytes());
            r.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_INPUT
        }
    }
}

fn dispatch(cfg: &Config, cmd: Command) -> anyhow::Result<Report> {
    match cmd {
        Command::ProveGrammar { system, formula, emit } => prove_grammar(cfg, &system.load()?, &formula, emit.as_deref()),
        Command::ProveStit { k, formula, emit, trace } => prove_stit(k, &formula, emit.as_deref(), trace),
        Command::Interpolate { system, implication } => interpolate(cfg, &system.load()?, &implication),
        Command::Translate { sequent, nested, proof } => translate(sequent, nested, proof),
        Command::CheckProof { file, system, k, logic } => check_proof_file(&file, &system, k, logic),
        Command::CheckModel { file, system, formula, world } => check_model(&file, &system, formula.as_deref(), world),
        Command::Fixtures { system, k, random } => fixtures(cfg, &system.load()?, k, random),
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn emit_json<T: Serialize>(path: Option<&Path>, value: &T) -> anyhow::Result<()> {
    if let Some(path) = path {
        let body = serde_json::to_string_pretty(value)?;
        fs::write(path, body + "\n").with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

fn formula_in(src: &str, family: Family) -> anyhow::Result<Formula> {
    parse_in(src, family).with_context(|| format!("cannot parse formula `{src}`"))
}

fn prove_grammar(cfg: &Config, system: &CfcstSystem, src: &str, emit: Option<&Path>) -> anyhow::Result<Report> {
    let f = formula_in(src, Family::Grammar)?;
    Ok(match prove_bounded(system, &f, cfg.budget) {
        Verdict::Valid(p) => {
            emit_json(emit, &p)?;
            Report::new(EXIT_OK, format!("valid\n{}", render(&p)), json!({ "verdict": "valid", "proof": p }))
        }
        Verdict::Refuted { model, world } => {
            emit_json(emit, &model)?;
            Report::new(
                EXIT_NEGATIVE,
                format!("refuted at {world}\n{}", show_sigma(&model)),
                json!({ "verdict": "refuted", "world": world, "model": model }),
            )
        }
        Verdict::Unknown(u) => {
            Report::new(EXIT_UNKNOWN, format!("unknown: {u:?}\n"), json!({ "verdict": "unknown", "reason": u }))
        }
    })
}

fn prove_stit(k: usize, src: &str, emit: Option<&Path>, trace: bool) -> anyhow::Result<Report> {
    let f = formula_in(src, Family::Stit)?;
    let run = prove_ds_with(k, &f, trace);
    let mut report = match &run.verdict {
        DsVerdict::Proved(p) => {
            emit_json(emit, p)?;
            Report::new(EXIT_OK, format!("proved\n{}", render(p)), json!({ "verdict": "proved", "proof": p }))
        }
        DsVerdict::Refuted { model, world } => {
            emit_json(emit, model)?;
            Report::new(
                EXIT_NEGATIVE,
                format!("refuted at {world}\n{}", show_ds(model)),
                json!({ "verdict": "refuted", "world": world, "model": model }),
            )
        }
    };
    report.json["stats"] = json!(run.stats);
    if trace {
        report.text.push_str("trace:\n");
        for line in &run.trace {
            report.text.push_str(&format!("  {line}\n"));
        }
        report.json["trace"] = json!(run.trace);
    }
    Ok(report)
}

fn interpolate(cfg: &Config, system: &CfcstSystem, src: &str) -> anyhow::Result<Report> {
    let (phi, psi) = parse_implication(src, Family::Grammar).with_context(|| format!("cannot parse implication `{src}`"))?;
    let outcome = match lyndon_interpolate(system, &phi, &psi, cfg.budget) {
        Ok(o) => o,
        Err(InterpError::NotGrammar) => bail!("interpolation needs grammar formulas"),
        Err(e) => return Err(e.into()),
    };
    Ok(match outcome {
        InterpOutcome::Found(r) => {
            let mut text = format!("chi = {}\nliterals:\n", r.chi);
            for a in &r.literal_audit {
                text.push_str(&format!("  {a}\n"));
            }
            text.push_str(&format!("proof of phi -> chi:\n{}", render(&r.left_proof)));
            text.push_str(&format!("proof of chi -> psi:\n{}", render(&r.right_proof)));
            Report::new(EXIT_OK, text, serde_json::to_value(&r)?)
        }
        InterpOutcome::NotDerivable { model, world } => Report::new(
            EXIT_NEGATIVE,
            format!("not derivable: refuted at {world}\n{}", show_sigma(&model)),
            json!({ "verdict": "refuted", "world": world, "model": model }),
        ),
        InterpOutcome::Unknown(u) => {
            Report::new(EXIT_UNKNOWN, format!("unknown: {u:?}\n"), json!({ "verdict": "unknown", "reason": u }))
        }
    })
}

fn translate(sequent: Option<String>, nested: Option<String>, proof: Option<PathBuf>) -> anyhow::Result<Report> {
    if let Some(src) = sequent {
        let seq: LabelledSequent = src.parse().with_context(|| format!("cannot parse sequent `{src}`"))?;
        let n = to_nested(&seq)?;
        return Ok(Report::new(EXIT_OK, format!("{n}\n"), json!({ "labelled": seq, "nested": n })));
    }
    if let Some(src) = nested {
        let n: NestedSequent = src.parse().with_context(|| format!("cannot parse nested sequent `{src}`"))?;
        let seq = to_labelled(&n);
        return Ok(Report::new(EXIT_OK, format!("{seq}\n"), json!({ "labelled": seq, "nested": n })));
    }
    let path = proof.expect("clap requires one input");
    let p: GrammarProof = serde_json::from_str(&read(&path)?).with_context(|| format!("bad proof file {}", path.display()))?;
    let n = translate_proof(&p)?;
    Ok(Report::new(EXIT_OK, n.render(), serde_json::to_value(&n)?))
}

fn check_proof_file(file: &Path, system: &SystemArgs, k: usize, logic: Logic) -> anyhow::Result<Report> {
    let value: Value = serde_json::from_str(&read(file)?).with_context(|| format!("{} is not JSON", file.display()))?;
    let system = system.load()?;
    let grammar = || -> Result<usize, String> {
        let p: GrammarProof = serde_json::from_value(value.clone()).map_err(|e| e.to_string())?;
        check_proof(&system, &p).map_err(|e| e.to_string())?;
        Ok(p.size())
    };
    let stit = || -> Result<usize, String> {
        let p: StitProof = serde_json::from_value(value.clone()).map_err(|e| e.to_string())?;
        check_stit_proof(k, &p).map_err(|e| e.to_string())?;
        Ok(p.size())
    };
    let result = match logic {
        Logic::Grammar => grammar().map(|n| ("grammar", n)),
        Logic::Stit => stit().map(|n| ("stit", n)),
        Logic::Auto => grammar()
            .map(|n| ("grammar", n))
            .or_else(|ge| stit().map(|n| ("stit", n)).map_err(|se| format!("as a grammar proof: {ge}; as a STIT proof: {se}"))),
    };
    Ok(match result {
        Ok((logic, nodes)) => Report::new(
            EXIT_OK,
            format!("ok: {logic} proof with {nodes} nodes\n"),
            json!({ "valid": true, "logic": logic, "nodes": nodes }),
        ),
        Err(e) => Report::new(EXIT_NEGATIVE, format!("invalid: {e}\n"), json!({ "valid": false, "error": e })),
    })
}

fn check_model(file: &Path, system: &SystemArgs, formula: Option<&str>, world: Option<Label>) -> anyhow::Result<Report> {
    let value: Value = serde_json::from_str(&read(file)?).with_context(|| format!("{} is not JSON", file.display()))?;
    let is_ds = value.get("choice").is_some();
    let (kind, worlds, problems, eval): (&str, BTreeSet<World>, Vec<String>, Box<dyn Fn(World, &Formula) -> anyhow::Result<bool>>) =
        if is_ds {
            let m: DsModel = serde_json::from_value(value).context("bad DS model")?;
            let problems = validate_ds(&m).err().unwrap_or_default().iter().map(|v| v.to_string()).collect();
            (
                "ds",
                m.worlds.clone(),
                problems,
                Box::new(move |w, f| Ok(check_ds(&m, w, f)?)),
            )
        } else {
            let m: SigmaModel = serde_json::from_value(value).context("bad model")?;
            let system = system.load()?;
            let mut problems = Vec::new();
            if m.worlds.is_empty() {
                problems.push("the set of worlds is empty".to_string());
            }
            if !m.converse_closed() {
                problems.push("relations are not closed under converse".to_string());
            }
            if !m.satisfies(&system) {
                problems.push("a production of the system is not satisfied".to_string());
            }
            ("sigma", m.worlds.clone(), problems, Box::new(move |w, f| Ok(check_sigma(&m, w, f)?)))
        };
    let mut text = if problems.is_empty() {
        format!("valid {kind} model with {} worlds\n", worlds.len())
    } else {
        format!("invalid {kind} model:\n{}", problems.iter().map(|p| format!("  {p}\n")).collect::<String>())
    };
    let mut js = json!({ "kind": kind, "valid": problems.is_empty(), "problems": problems });
    let mut holds = true;
    if let Some(src) = formula {
        let f = formula_in(src, if is_ds { Family::Stit } else { Family::Grammar })?;
        let at: Vec<World> = match world {
            Some(w) => vec![w],
            None => worlds.iter().copied().collect(),
        };
        let (mut yes, mut no) = (Vec::new(), Vec::new());
        for w in at {
            if eval(w, &f)? {
                yes.push(w);
            } else {
                no.push(w);
            }
        }
        holds = no.is_empty();
        text.push_str(&format!("true at: {}\nfalse at: {}\n", show_worlds(&yes), show_worlds(&no)));
        js["true_at"] = json!(yes);
        js["false_at"] = json!(no);
    }
    let code = if js["valid"] == json!(true) && holds { EXIT_OK } else { EXIT_NEGATIVE };
    Ok(Report::new(code, text, js))
}

fn fixtures(cfg: &Config, system: &CfcstSystem, k: usize, random: usize) -> anyhow::Result<Report> {
    let mut text = String::new();
    let mut axioms = Vec::new();
    let mut proved = 0;
    let record = |text: &mut String, logic: &str, name: &str, verdict: &str| {
        text.push_str(&format!("{logic} {name}: {verdict}\n"));
        json!({ "logic": logic, "name": name, "verdict": verdict })
    };
    for inst in grammar_axioms(system) {
        let v = grammar_verdict(system, &inst.formula, cfg.budget);
        proved += usize::from(v == "valid");
        axioms.push(record(&mut text, "grammar", &inst.name, v));
    }
    for inst in ds_axioms(k) {
        let v = stit_verdict(k, &inst.formula);
        proved += usize::from(v == "proved");
        axioms.push(record(&mut text, "stit", &inst.name, v));
    }
    let total = axioms.len();
    text.push_str(&format!("{proved}/{total} axioms proved\n"));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let chars: Vec<Character> = system.alphabet().iter().cloned().collect();
    let mut samples = Vec::new();
    for _ in 0..random {
        let g = random_grammar_formula(&mut rng, &chars, &["p", "q"], 3);
        let s = random_stit_formula(&mut rng, &["p", "q"], 6, 3);
        for (logic, f, v) in [("grammar", &g, grammar_verdict(system, &g, cfg.budget)), ("stit", &s, stit_verdict(k, &s))] {
            samples.push(record(&mut text, logic, &f.to_string(), v));
        }
    }
    let json = json!({ "proved": proved, "total": total, "axioms": axioms, "seed": cfg.seed, "random": samples });
    Ok(Report::new(if proved == total { EXIT_OK } else { EXIT_NEGATIVE }, text, json))
}

fn grammar_verdict(system: &CfcstSystem, f: &Formula, budget: Budget) -> &'static str {
    match prove_bounded(system, f, budget) {
        Verdict::Valid(_) => "valid",
        Verdict::Refuted { .. } => "refuted",
        Verdict::Unknown(_) => "unknown",
    }
}

fn stit_verdict(k: usize, f: &Formula) -> &'static str {
    if prove_ds_with(k, f, false).verdict.is_proved() {
        "proved"
    } else {
        "refuted"
    }
}

fn show_worlds<'a>(ws: impl IntoIterator<Item = &'a World>) -> String {
    let names: Vec<String> = ws.into_iter().map(|w| w.to_string()).collect();
    if names.is_empty() {
        "-".into()
    } else {
        names.join(" ")
    }
}

fn show_valuation(text: &mut String, v: &std::collections::BTreeMap<refine::syntax::Atom, BTreeSet<World>>) {
    for (p, ws) in v {
        text.push_str(&format!("V({p}): {}\n", show_worlds(ws)));
    }
}

fn show_sigma(m: &SigmaModel) -> String {
    let mut text = format!("worlds: {}\n", show_worlds(&m.worlds));
    for (c, r) in &m.relations {
        let pairs: Vec<String> = r.iter().map(|(a, b)| format!("({a},{b})")).collect();
        text.push_str(&format!("R_{c}: {}\n", pairs.join(" ")));
    }
    show_valuation(&mut text, &m.valuation);
    text
}

fn show_ds(m: &DsModel) -> String {
    let classes: Vec<String> = m.classes().iter().map(|c| format!("{{{}}}", show_worlds(c))).collect();
    let mut text = format!("worlds: {}\nchoices: {}\nideal: {}\n", show_worlds(&m.worlds), classes.join(" "), show_worlds(&m.ideal));
    show_valuation(&mut text, &m.valuation);
    text
}
