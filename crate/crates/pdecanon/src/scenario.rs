//! The bundled scenario suite: a JSON manifest naming equation and
//! transform files, loaded and checked before anything runs.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use pdecanon_core::{
    subst_params, AffineTransform, DerivKey, DiffMonomial, MatchOutcome, MatchWitness, MPoly, Param, RatFun, Q,
};
use serde_json::{json, Value};

use crate::doc::{parse_assignments, parse_keys, parse_pde, parse_ratfun, parse_transform, PdeDoc};
use crate::json;
use crate::ops::{canon, match_docs, oracle_check, verify};

const EMBEDDED: &[(&str, &str)] = &[
    ("manifest.json", include_str!("../scenarios/manifest.json")),
    ("eq1.pde", include_str!("../scenarios/eq1.pde")),
    ("eq2.pde", include_str!("../scenarios/eq2.pde")),
    ("eq3.pde", include_str!("../scenarios/eq3.pde")),
    ("eq5.pde", include_str!("../scenarios/eq5.pde")),
    ("eq6.pde", include_str!("../scenarios/eq6.pde")),
    ("eq8.pde", include_str!("../scenarios/eq8.pde")),
    ("eq9.pde", include_str!("../scenarios/eq9.pde")),
    ("eq11.pde", include_str!("../scenarios/eq11.pde")),
    ("identity.tf", include_str!("../scenarios/identity.tf")),
    ("t4.tf", include_str!("../scenarios/t4.tf")),
    ("t7.tf", include_str!("../scenarios/t7.tf")),
    ("t10.tf", include_str!("../scenarios/t10.tf")),
];

/// Text of one bundled file, by name.
pub fn embedded_file(name: &str) -> Option<&'static str> {
    EMBEDDED.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

#[derive(Debug, thiserror::Error)]
#[error("scenario bundle: {0}")]
pub struct BundleError(pub String);

/// Where scenario files come from: the copies compiled into the binary or a
/// directory laid out the same way.
pub enum Bundle<'a> {
    Embedded,
    Dir(&'a Path),
}

impl Bundle<'_> {
    fn read(&self, name: &str) -> Result<String, BundleError> {
        match self {
            Bundle::Embedded => embedded_file(name)
                .map(str::to_string)
                .ok_or_else(|| BundleError(format!("no bundled file `{name}`"))),
            Bundle::Dir(dir) => {
                fs::read_to_string(dir.join(name)).map_err(|e| BundleError(format!("`{name}`: {e}")))
            }
        }
    }

    fn pde(&self, name: &str) -> Result<PdeDoc, BundleError> {
        let mut doc = parse_pde(&self.read(name)?).map_err(|e| BundleError(format!("`{name}`: {e}")))?;
        doc.name = Some(name.trim_end_matches(".pde").to_string());
        Ok(doc)
    }
}

#[derive(Clone, Debug)]
pub enum Check {
    PullbackEquality {
        input: PdeDoc,
        transform: AffineTransform,
        expect: PdeDoc,
        absent: Vec<String>,
    },
    Canonize {
        input: PdeDoc,
        eliminate: Option<BTreeSet<DerivKey>>,
        frozen: BTreeSet<String>,
        diagonal: Option<Vec<RatFun>>,
    },
    Match {
        input: PdeDoc,
        target: PdeDoc,
        param_map: BTreeMap<Param, RatFun>,
        dep_scale: Option<RatFun>,
    },
    DegenerateCase {
        input: PdeDoc,
        values: BTreeMap<Param, Q>,
        vanishing: BTreeSet<DerivKey>,
        canon: Option<PdeDoc>,
        condition: Option<MPoly>,
    },
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub kind: String,
    pub check: Check,
}

fn str_field<'a>(entry: &'a Value, key: &str) -> Result<Option<&'a str>, BundleError> {
    match entry.get(key) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(_) => Err(BundleError(format!("`{key}` must be a string"))),
    }
}

fn required<'a>(entry: &'a Value, key: &str, scenario: &str) -> Result<&'a str, BundleError> {
    str_field(entry, key)?.ok_or_else(|| BundleError(format!("scenario `{scenario}` lacks `{key}`")))
}

fn ratfun_field(text: &str, what: &str) -> Result<RatFun, BundleError> {
    parse_ratfun(text).map_err(|e| BundleError(format!("`{what}`: {e}")))
}

fn parse_entry(bundle: &Bundle, entry: &Value) -> Result<Scenario, BundleError> {
    let name = str_field(entry, "name")?
        .ok_or_else(|| BundleError("scenario without a name".into()))?
        .to_string();
    let kind = required(entry, "kind", &name)?.to_string();
    let values = match str_field(entry, "params")? {
        Some(text) => parse_assignments(text).map_err(|e| BundleError(format!("`{name}` params: {e}")))?,
        None => BTreeMap::new(),
    };
    let fixed = |doc: PdeDoc| doc.with_params(&values).map_err(|e| BundleError(format!("`{name}`: {e}")));
    let input = bundle.pde(required(entry, "input", &name)?)?;
    let check = match kind.as_str() {
        "pullback-equality" => {
            let input = fixed(input)?;
            let tf = required(entry, "transform", &name)?;
            let transform =
                parse_transform(&bundle.read(tf)?, &input.vars).map_err(|e| BundleError(format!("`{tf}`: {e}")))?;
            let absent = match entry.get("absent") {
                None => Vec::new(),
                Some(v) => v
                    .as_array()
                    .and_then(|a| a.iter().map(|x| x.as_str().map(str::to_string)).collect())
                    .ok_or_else(|| BundleError(format!("`{name}`: `absent` must list variable names")))?,
            };
            Check::PullbackEquality {
                input,
                transform,
                expect: fixed(bundle.pde(required(entry, "expect", &name)?)?)?,
                absent,
            }
        }
        "canonize" => {
            let input = fixed(input)?;
            let keys = |text: &str| parse_keys(text, &input.vars).map_err(|e| BundleError(format!("`{name}`: {e}")));
            let eliminate = str_field(entry, "eliminate")?.map(keys).transpose()?;
            let frozen = str_field(entry, "freeze")?
                .map(|s| s.split(',').map(|v| v.trim().to_string()).collect())
                .unwrap_or_default();
            let diagonal = match entry.get("diagonal") {
                None => None,
                Some(v) => Some(
                    v.as_array()
                        .ok_or_else(|| BundleError(format!("`{name}`: `diagonal` must be an array")))?
                        .iter()
                        .map(|c| ratfun_field(c.as_str().unwrap_or("?"), "diagonal"))
                        .collect::<Result<_, _>>()?,
                ),
            };
            Check::Canonize {
                input,
                eliminate,
                frozen,
                diagonal,
            }
        }
        "match" => {
            let param_map = match entry.get("param_map") {
                None => BTreeMap::new(),
                Some(Value::Object(m)) => m
                    .iter()
                    .map(|(k, v)| Ok((Param::new(k.as_str()), ratfun_field(v.as_str().unwrap_or("?"), k)?)))
                    .collect::<Result<_, BundleError>>()?,
                Some(_) => return Err(BundleError(format!("`{name}`: `param_map` must be an object"))),
            };
            Check::Match {
                input: fixed(input)?,
                target: bundle.pde(required(entry, "target", &name)?)?,
                param_map,
                dep_scale: str_field(entry, "dep_scale")?.map(|s| ratfun_field(s, "dep_scale")).transpose()?,
            }
        }
        "degenerate-case" => {
            let vanishing = parse_keys(required(entry, "vanishing", &name)?, &input.vars)
                .map_err(|e| BundleError(format!("`{name}`: {e}")))?;
            Check::DegenerateCase {
                input,
                values: values.clone(),
                vanishing,
                canon: str_field(entry, "canon")?.map(|f| bundle.pde(f)).transpose()?,
                condition: str_field(entry, "condition")?
                    .map(|s| ratfun_field(s, "condition").map(|r| r.num().clone()))
                    .transpose()?,
            }
        }
        other => return Err(BundleError(format!("`{name}`: unknown kind `{other}`"))),
    };
    Ok(Scenario { name, kind, check })
}

/// Reads the manifest and every file it references.
pub fn load(bundle: &Bundle) -> Result<Vec<Scenario>, BundleError> {
    let manifest: Value = serde_json::from_str(&bundle.read("manifest.json")?)
        .map_err(|e| BundleError(format!("`manifest.json`: {e}")))?;
    let entries = manifest
        .get("scenarios")
        .and_then(Value::as_array)
        .ok_or_else(|| BundleError("`manifest.json` has no `scenarios` array".into()))?;
    let scenarios: Vec<Scenario> = entries.iter().map(|e| parse_entry(bundle, e)).collect::<Result<_, _>>()?;
    let mut names = BTreeSet::new();
    if let Some(dup) = scenarios.iter().find(|s| !names.insert(s.name.as_str())) {
        return Err(BundleError(format!("scenario `{}` is listed twice", dup.name)));
    }
    Ok(scenarios)
}

#[derive(Clone, Debug)]
pub struct ScenarioResult {
    pub name: String,
    pub kind: String,
    pub passed: bool,
    /// One line per completed check, or the reason for failure.
    pub details: Vec<String>,
    pub witness: Option<Value>,
    pub conditions: Option<Value>,
}

impl ScenarioResult {
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "name": self.name,
            "kind": self.kind,
            "status": if self.passed { "pass" } else { "fail" },
            "details": self.details,
        });
        if let Some(w) = &self.witness {
            v["witness"] = w.clone();
        }
        if let Some(c) = &self.conditions {
            v["conditions"] = c.clone();
        }
        v
    }
}

struct Run {
    details: Vec<String>,
    failed: bool,
    witness: Option<Value>,
    conditions: Option<Value>,
}

impl Run {
    fn check(&mut self, ok: bool, pass: String, fail: String) {
        if ok {
            self.details.push(pass);
        } else {
            self.failed = true;
            self.details.push(format!("FAILED: {fail}"));
        }
    }
}

fn verify_witness(run: &mut Run, p: &PdeDoc, q: &PdeDoc, w: &MatchWitness) {
    let again = MatchWitness::new(
        &p.lhs,
        &q.lhs,
        w.perm().to_vec(),
        w.var_scales().clone(),
        w.dep_scale().clone(),
        w.overall().clone(),
        w.param_map().clone(),
    );
    run.check(
        again.is_ok(),
        "witness re-verified by substitution".into(),
        format!("witness did not re-verify: {}", again.err().map(|e| e.to_string()).unwrap_or_default()),
    );
    let target = q.lhs.restrict_to_active();
    let independent = subst_params(&target, w.param_map())
        .and_then(|expected| w.apply(&p.lhs, expected.vars()).map(|got| got == expected));
    run.check(
        independent == Ok(true),
        "source with scalings applied equals target with parameters substituted".into(),
        "independent substitution check disagrees".into(),
    );
}

fn execute(check: &Check, seed: u64, run: &mut Run) -> Result<(), String> {
    match check {
        Check::PullbackEquality {
            input,
            transform,
            expect,
            absent,
        } => {
            let report = verify(input, transform, Some(expect)).map_err(|e| e.to_string())?;
            run.conditions = Some(json::conditions(&report.conditions));
            let cmp = report.comparison.as_ref().expect("an expected equation was given");
            run.check(
                cmp.equal(),
                format!("pulled back by ({transform}) equals the expected form"),
                match &cmp.first_difference {
                    Some(d) => format!("first difference at {}: got {}, expected {}", d.monomial, d.got, d.expected),
                    None => String::new(),
                },
            );
            run.check(
                report.collapsed == *absent,
                match absent.as_slice() {
                    [] => "no variable drops out".into(),
                    names => format!("{} no longer occurs", names.join(", ")),
                },
                format!("variables that drop out: {:?}, expected {:?}", report.collapsed, absent),
            );
            let oracle = oracle_check(&input.lhs, transform, seed).map_err(|e| e.to_string())?;
            run.check(
                oracle.holds,
                format!("residuals agree on a random test function (seed {seed})"),
                format!(
                    "residuals differ (seed {seed}): {} vs {}",
                    oracle.source_value, oracle.target_value
                ),
            );
        }
        Check::Canonize {
            input,
            eliminate,
            frozen,
            diagonal,
        } => {
            let out = canon(input, eliminate.as_ref(), frozen).map_err(|e| e.to_string())?;
            run.conditions = Some(json::conditions(&out.report.degeneracy));
            run.check(out.congruence_verified, "S^T A S = D verified".into(), "congruence check failed".into());
            if let Some(d) = diagonal {
                let got: Vec<String> = out.report.diagonal.iter().map(ToString::to_string).collect();
                run.check(
                    out.report.diagonal == *d,
                    format!("diagonal ({})", got.join(", ")),
                    format!("diagonal ({})", got.join(", ")),
                );
            }
        }
        Check::Match {
            input,
            target,
            param_map,
            dep_scale,
        } => match match_docs(input, target).map_err(|e| e.to_string())? {
            MatchOutcome::Refuted(r) => run.check(false, String::new(), format!("refuted: {r}")),
            MatchOutcome::Witness(w) => {
                run.witness = Some(json::witness(&w));
                verify_witness(run, input, target, &w);
                for (p, want) in param_map {
                    let got = w.param_map().get(p);
                    run.check(
                        got == Some(want),
                        format!("{p} -> {want}"),
                        format!("{p} -> {}, expected {want}", got.map(ToString::to_string).unwrap_or("?".into())),
                    );
                }
                if let Some(k) = dep_scale {
                    run.check(
                        w.dep_scale() == k,
                        format!("dependent scale {k}"),
                        format!("dependent scale {}, expected {k}", w.dep_scale()),
                    );
                }
            }
        },
        Check::DegenerateCase {
            input,
            values,
            vanishing,
            canon: canon_doc,
            condition,
        } => {
            let fixed = input.with_params(values).map_err(|e| e.to_string())?;
            for key in vanishing {
                let m = DiffMonomial::factor(key.clone());
                let name = input.lhs.monomial_string(&m, Default::default());
                let before = input.lhs.linear_coefficient(key);
                let after = fixed.lhs.linear_coefficient(key);
                run.check(
                    !before.is_zero() && after.is_zero(),
                    format!("{name}: coefficient {before} vanishes"),
                    format!("{name}: coefficient {before} becomes {after}"),
                );
            }
            if let Some(doc) = canon_doc {
                let out = canon(doc, None, &BTreeSet::new()).map_err(|e| e.to_string())?;
                run.conditions = Some(json::conditions(&out.report.degeneracy));
                if let Some(c) = condition {
                    run.check(
                        out.report.degeneracy.contains(c),
                        format!("canonical reduction lists {c} = 0 as degenerate"),
                        format!("degeneracy conditions {} do not include {c}", out.report.degeneracy),
                    );
                }
            }
        }
    }
    Ok(())
}

/// Runs one scenario; the seed drives the randomized oracle cross-checks.
pub fn run(s: &Scenario, seed: u64) -> ScenarioResult {
    let mut r = Run {
        details: Vec::new(),
        failed: false,
        witness: None,
        conditions: None,
    };
    if let Err(e) = execute(&s.check, seed, &mut r) {
        r.failed = true;
        r.details.push(format!("FAILED: {e}"));
    }
    ScenarioResult {
        name: s.name.clone(),
        kind: s.kind.clone(),
        passed: !r.failed,
        details: r.details,
        witness: r.witness,
        conditions: r.conditions,
    }
}

pub fn run_all(scenarios: &[Scenario], seed: u64) -> Vec<ScenarioResult> {
    scenarios.iter().map(|s| run(s, seed)).collect()
}
