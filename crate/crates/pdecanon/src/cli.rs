//! Command-line front end. Exit codes: 0 success, 1 mismatch, refutation or
//! inconclusive result, 2 usage, parse, pole or singular-transform errors.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use pdecanon_core::{
    residual_eval, AffineTransform, Error as CoreError, MatchOutcome, MatchWitness, Notation, Param, RatFun, Q,
};
use serde_json::{json, Value};

use crate::doc::{
    parse_assignments, parse_keys, parse_pde, parse_point, parse_test_function, parse_transform, print_canonical,
    print_explicit, PdeDoc,
};
use crate::error::ParseError;
use crate::json;
use crate::ops::{self, OracleRun};
use crate::random::DEFAULT_SEED;
use crate::scenario::{self, Bundle};

#[derive(Parser, Debug)]
#[command(name = "pdecanon", version, about = "Exact canonical forms and equivalence checks for constant-coefficient PDEs")]
pub struct Cli {
    /// Machine-readable output
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for randomized cross-checks
    #[arg(long, global = true, env = "PDECANON_SEED")]
    pub seed: Option<u64>,
    /// Fix parameters to rational values, e.g. alpha=6/5,beta=1
    #[arg(long, global = true, value_name = "K=V,...")]
    pub params: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Pull an equation back along a transform and compare with an expected form
    Verify {
        pde: PathBuf,
        transform: PathBuf,
        #[arg(long)]
        expect: Option<PathBuf>,
    },
    /// Run the bundled scenario suite
    PaperCheck {
        /// Load scenarios from this directory instead of the bundled copies
        #[arg(long)]
        scenario_dir: Option<PathBuf>,
    },
    /// Diagonalize the principal part, or remove selected second-order terms
    Canon {
        pde: PathBuf,
        /// Comma-separated derivatives to eliminate, e.g. u_xt
        #[arg(long)]
        eliminate: Option<String>,
        /// Comma-separated variables kept fixed (with --eliminate)
        #[arg(long, value_delimiter = ',')]
        freeze: Vec<String>,
    },
    /// Decide equivalence modulo renaming, scalings and parameter maps
    Match {
        pde1: PathBuf,
        pde2: PathBuf,
        /// Re-validate a witness (JSON as printed by `match --json`) instead of searching
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Exact residual of an equation on a polynomial test function
    Residual {
        pde: PathBuf,
        #[arg(long = "fn", value_name = "POLY")]
        function: String,
        #[arg(long, value_name = "POINT")]
        at: String,
    },
    /// Print an equation in normal form
    Print {
        pde: PathBuf,
        /// Use D[u,{x,k},...] notation
        #[arg(long)]
        explicit: bool,
    },
}

/// A command's outcome other than plain success.
#[derive(Debug)]
enum Failure {
    /// Exit 1, with the report already printed.
    Negative,
    /// Exit 2.
    Usage(String),
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

struct Ctx<'a> {
    json: bool,
    seed: u64,
    params: BTreeMap<Param, Q>,
    out: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn line(&mut self, s: impl AsRef<str>) {
        let _ = writeln!(self.out, "{}", s.as_ref());
    }

    fn emit(&mut self, v: &Value) {
        let text = serde_json::to_string_pretty(v).expect("serializable");
        self.line(text);
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_pde(path: &Path, params: &BTreeMap<Param, Q>) -> Result<PdeDoc, Failure> {
    let mut doc = parse_pde(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    doc.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    Ok(doc.with_params(params)?)
}

fn fix_transform(t: AffineTransform, params: &BTreeMap<Param, Q>) -> Result<AffineTransform, Failure> {
    if params.is_empty() {
        return Ok(t);
    }
    let map: BTreeMap<Param, RatFun> = params.iter().map(|(p, v)| (p.clone(), RatFun::constant(v.clone()))).collect();
    let subst = |c: &RatFun| c.subst(&map);
    let matrix = t
        .matrix()
        .iter()
        .map(|row| row.iter().map(subst).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    let offset = t.offset().iter().map(subst).collect::<Result<Vec<_>, _>>()?;
    Ok(AffineTransform::new(t.source().clone(), t.target().clone(), matrix, offset)?)
}

fn oracle_json(o: &OracleRun) -> Value {
    json!({
        "seed": o.seed,
        "holds": o.holds,
        "params": o.params.iter().map(|(k, v)| (k.name().to_string(), json::rational(v))).collect::<serde_json::Map<_, _>>(),
        "point": o.point.iter().map(json::rational).collect::<Vec<_>>(),
        "test_function": o.function.to_string(),
        "source_value": json::rational(&o.source_value),
        "target_value": json::rational(&o.target_value),
    })
}

fn cmd_verify(ctx: &mut Ctx, pde: &Path, tf: &Path, expect: Option<&Path>) -> Outcome {
    let source = load_pde(pde, &ctx.params)?;
    let t = parse_transform(&read(tf)?, &source.vars).map_err(|e| Failure::Usage(format!("{}: {e}", tf.display())))?;
    let t = fix_transform(t, &ctx.params)?;
    let expected = expect.map(|p| load_pde(p, &ctx.params)).transpose()?;
    let report = ops::verify(&source, &t, expected.as_ref())?;
    let oracle = ops::oracle_check(&source.lhs, &t, ctx.seed).ok();
    let equal = report.comparison.as_ref().map(ops::Comparison::equal);
    let oracle_failed = oracle.as_ref().is_some_and(|o| !o.holds);

    if ctx.json {
        let mut v = json!({
            "source": json::equation(&source),
            "transform": json::transform(&t),
            "pulled_back": json::equation(&report.pulled),
            "conditions": json::conditions(&report.conditions),
            "absent": report.collapsed,
            "status": match equal { Some(true) => "match", Some(false) => "mismatch", None => "ok" },
        });
        if let Some(c) = &report.comparison {
            v["expected"] = json::equation(&c.expected);
            v["positional_alignment"] = json!(c.positional);
            if let Some(d) = &c.first_difference {
                v["first_difference"] = json!({
                    "monomial": d.monomial,
                    "got": json::ratfun(&d.got),
                    "expected": json::ratfun(&d.expected),
                });
            }
        }
        if let Some(o) = &oracle {
            v["oracle"] = oracle_json(o);
        }
        ctx.emit(&v);
    } else {
        ctx.line(format!("source:      {}", print_canonical(&source)));
        ctx.line(format!("transform:   {t}"));
        ctx.line(format!("pulled back: {}", print_canonical(&report.pulled)));
        if let Some(c) = &report.comparison {
            ctx.line(format!("expected:    {}", print_canonical(&c.expected)));
            if c.positional {
                ctx.line("note: expected variables matched to the pulled-back ones by position");
            }
        }
        ctx.line(format!("valid when:  {}", report.conditions));
        for v in &report.collapsed {
            ctx.line(format!("note: {v} no longer occurs"));
        }
        if let Some(o) = &oracle {
            let verdict = if o.holds { "agree" } else { "DISAGREE" };
            ctx.line(format!("oracle:      residuals {verdict} on a random test function (seed {})", o.seed));
        }
        match report.comparison.as_ref().map(|c| &c.first_difference) {
            Some(None) => ctx.line("result: match"),
            Some(Some(d)) => ctx.line(format!(
                "result: mismatch at {}: got {}, expected {}",
                d.monomial, d.got, d.expected
            )),
            None => {}
        }
    }
    if equal == Some(false) || oracle_failed {
        return Err(Failure::Negative);
    }
    Ok(())
}

fn cmd_paper_check(ctx: &mut Ctx, dir: Option<&Path>) -> Outcome {
    let bundle = match dir {
        Some(d) => Bundle::Dir(d),
        None => Bundle::Embedded,
    };
    let scenarios = scenario::load(&bundle).map_err(|e| Failure::Usage(e.to_string()))?;
    let results = scenario::run_all(&scenarios, ctx.seed);
    let passed = results.iter().filter(|r| r.passed).count();
    let failing: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    if ctx.json {
        ctx.emit(&json!({
            "seed": ctx.seed,
            "passed": passed,
            "total": results.len(),
            "scenarios": results.iter().map(scenario::ScenarioResult::to_json).collect::<Vec<_>>(),
        }));
    } else {
        ctx.line(format!("seed: {}", ctx.seed));
        let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
        for r in &results {
            let status = if r.passed { "pass" } else { "FAIL" };
            ctx.line(format!("{:<width$}  {:<17}  {status}", r.name, r.kind));
            for d in &r.details {
                ctx.line(format!("    {d}"));
            }
        }
        ctx.line(format!("{passed}/{} scenarios pass", results.len()));
        if !failing.is_empty() {
            ctx.line(format!("failing: {}", failing.join(", ")));
        }
    }
    if failing.is_empty() {
        Ok(())
    } else {
        Err(Failure::Negative)
    }
}

fn cmd_canon(ctx: &mut Ctx, pde: &Path, eliminate: Option<&str>, freeze: &[String]) -> Outcome {
    if eliminate.is_none() && !freeze.is_empty() {
        return Err(Failure::Usage("--freeze only applies together with --eliminate".into()));
    }
    let doc = load_pde(pde, &ctx.params)?;
    let keys = eliminate.map(|e| parse_keys(e, &doc.vars)).transpose()?;
    let frozen: BTreeSet<String> = freeze.iter().map(|s| s.trim().to_string()).collect();
    let out = match ops::canon(&doc, keys.as_ref(), &frozen) {
        Ok(out) => out,
        Err(CoreError::NoSolution(msg)) => {
            if ctx.json {
                ctx.emit(&json!({ "status": "no-solution", "reason": msg }));
            } else {
                ctx.line(format!("no solution: {msg}"));
            }
            return Err(Failure::Negative);
        }
        Err(e) => return Err(e.into()),
    };
    if ctx.json {
        ctx.emit(&json!({
            "input": json::equation(&doc),
            "report": json::canon_report(&out.report),
            "reduced": json::equation(&out.reduced),
            "absent": out.collapsed,
            "congruence_verified": out.congruence_verified,
        }));
    } else {
        ctx.line(format!("input:   {}", print_canonical(&doc)));
        ctx.line(out.report.to_string());
        ctx.line(format!("reduced: {}", print_canonical(&out.reduced)));
        for v in &out.collapsed {
            ctx.line(format!("note: {v} no longer occurs"));
        }
        let check = if out.congruence_verified { "verified" } else { "FAILED" };
        ctx.line(format!("S^T A S = D: {check}"));
    }
    if out.congruence_verified {
        Ok(())
    } else {
        Err(Failure::Negative)
    }
}

fn cmd_match(ctx: &mut Ctx, a: &Path, b: &Path, witness: Option<&Path>) -> Outcome {
    let p = load_pde(a, &ctx.params)?;
    let q = load_pde(b, &ctx.params)?;
    if let Some(path) = witness {
        let v: Value = serde_json::from_str(&read(path)?)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let d = json::witness_data(&v).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        return match MatchWitness::new(&p.lhs, &q.lhs, d.perm, d.var_scales, d.dep_scale, d.overall, d.param_map) {
            Ok(w) => {
                if ctx.json {
                    ctx.emit(&json!({ "status": "verified", "witness": json::witness(&w) }));
                } else {
                    ctx.line("witness verified by substitution");
                    ctx.line(w.to_string());
                }
                Ok(())
            }
            Err(CoreError::InvalidWitness(msg)) => {
                if ctx.json {
                    ctx.emit(&json!({ "status": "rejected", "reason": msg }));
                } else {
                    ctx.line(format!("witness rejected: {msg}"));
                }
                Err(Failure::Negative)
            }
            Err(e) => Err(e.into()),
        };
    }
    match ops::match_docs(&p, &q) {
        Ok(MatchOutcome::Witness(w)) => {
            if ctx.json {
                ctx.emit(&json!({ "status": "equivalent", "witness": json::witness(&w) }));
            } else {
                ctx.line("equivalent");
                ctx.line(w.to_string());
            }
            Ok(())
        }
        Ok(MatchOutcome::Refuted(r)) => {
            if ctx.json {
                ctx.emit(&json!({ "status": "refuted", "refutation": json::refutation(&r) }));
            } else {
                ctx.line(format!("not equivalent: {r}"));
            }
            Err(Failure::Negative)
        }
        Err(e @ (CoreError::UnresolvedNonlinearSystem(_) | CoreError::SearchBudgetExceeded(_))) => {
            if ctx.json {
                ctx.emit(&json!({ "status": "inconclusive", "reason": e.to_string() }));
            } else {
                ctx.line(e.to_string());
            }
            Err(Failure::Negative)
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_residual(ctx: &mut Ctx, pde: &Path, function: &str, at: &str) -> Outcome {
    let doc = load_pde(pde, &BTreeMap::new())?;
    let f = parse_test_function(function, &doc.vars)?;
    let point = parse_point(at)?;
    let r = residual_eval(&doc.lhs, &f, &point, &ctx.params)?;
    if ctx.json {
        ctx.emit(&json!({
            "value": json::rational(&r.value),
            "warnings": r.warnings.iter().map(ToString::to_string).collect::<Vec<_>>(),
        }));
    } else {
        ctx.line(r.value.to_string());
        for w in &r.warnings {
            ctx.line(format!("warning: {w}"));
        }
    }
    Ok(())
}

fn cmd_print(ctx: &mut Ctx, pde: &Path, explicit: bool) -> Outcome {
    let doc = load_pde(pde, &ctx.params)?;
    if ctx.json {
        let mut v = json::equation(&doc);
        v["subscript"] = json!(doc.lhs.to_string_with(Notation::Subscript));
        ctx.emit(&v);
    } else if explicit {
        ctx.line(print_explicit(&doc));
    } else {
        ctx.line(print_canonical(&doc));
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let params = match cli.params.as_deref().map(parse_assignments).transpose() {
        Ok(p) => p.unwrap_or_default(),
        Err(e) => {
            let _ = writeln!(err, "error: --params: {e}");
            return 2;
        }
    };
    let mut ctx = Ctx {
        json: cli.json,
        seed: cli.seed.unwrap_or(DEFAULT_SEED),
        params,
        out,
    };
    let result = match &cli.command {
        Command::Verify { pde, transform, expect } => cmd_verify(&mut ctx, pde, transform, expect.as_deref()),
        Command::PaperCheck { scenario_dir } => cmd_paper_check(&mut ctx, scenario_dir.as_deref()),
        Command::Canon { pde, eliminate, freeze } => cmd_canon(&mut ctx, pde, eliminate.as_deref(), freeze),
        Command::Match { pde1, pde2, witness } => cmd_match(&mut ctx, pde1, pde2, witness.as_deref()),
        Command::Residual { pde, function, at } => cmd_residual(&mut ctx, pde, function, at),
        Command::Print { pde, explicit } => cmd_print(&mut ctx, pde, *explicit),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Negative) => 1,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}
