//! JSON encodings of equations, transforms and reports. Equations use the
//! explicit `D[u, ...]` notation; coefficients are strings in the same
//! syntax the parser accepts.

use std::collections::BTreeMap;

use pdecanon_core::{
    AffineTransform, CanonReport, DegeneracyReport, DiffPoly, MatchWitness, Notation, Param, RatFun,
    RefutationCertificate, Q,
};
use serde_json::{json, Map, Value};

use crate::doc::{parse_ratfun, print_transform, PdeDoc};

pub fn ratfun(c: &RatFun) -> Value {
    Value::String(c.to_string())
}

pub fn rational(c: &Q) -> Value {
    Value::String(c.to_string())
}

pub fn equation(doc: &PdeDoc) -> Value {
    json!({
        "vars": doc.vars.names(),
        "params": doc.params.iter().map(Param::name).collect::<Vec<_>>(),
        "lhs": doc.lhs.to_string_with(Notation::Explicit),
    })
}

pub fn diffpoly(p: &DiffPoly) -> Value {
    Value::String(p.to_string_with(Notation::Explicit))
}

pub fn transform(t: &AffineTransform) -> Value {
    json!({
        "source": t.source().names(),
        "target": t.target().names(),
        "matrix": t.matrix().iter().map(|row| row.iter().map(ratfun).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "offset": t.offset().iter().map(ratfun).collect::<Vec<_>>(),
        "script": print_transform(t),
    })
}

/// Polynomials whose vanishing invalidates the result, as `p != 0` strings.
pub fn conditions(d: &DegeneracyReport) -> Value {
    Value::Array(d.conditions().map(|c| Value::String(format!("{c} != 0"))).collect())
}

pub fn canon_report(r: &CanonReport) -> Value {
    json!({
        "transform": transform(&r.transform),
        "diagonal": r.diagonal.iter().map(ratfun).collect::<Vec<_>>(),
        "principal": r.principal.entries().iter().map(|row| row.iter().map(ratfun).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "degeneracy": conditions(&r.degeneracy),
        "notes": r.normalization_notes,
    })
}

pub fn witness(w: &MatchWitness) -> Value {
    let map = |m: &mut dyn Iterator<Item = (String, Value)>| Value::Object(m.collect::<Map<_, _>>());
    json!({
        "perm": w.perm().iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>(),
        "var_scales": map(&mut w.var_scales().iter().map(|(k, v)| (k.clone(), ratfun(v)))),
        "dep_scale": ratfun(w.dep_scale()),
        "overall": ratfun(w.overall()),
        "param_map": map(&mut w.param_map().iter().map(|(k, v)| (k.name().to_string(), ratfun(v)))),
    })
}

pub fn refutation(r: &RefutationCertificate) -> Value {
    json!({
        "invariant": r.invariant.name(),
        "source_value": r.source_value,
        "target_value": r.target_value,
    })
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value, String> {
    v.get(key).ok_or_else(|| format!("missing field `{key}`"))
}

fn coefficient(v: &Value, what: &str) -> Result<RatFun, String> {
    let s = v.as_str().ok_or_else(|| format!("`{what}` must be a string"))?;
    parse_ratfun(s).map_err(|e| format!("`{what}`: {e}"))
}

fn coefficient_map(v: &Value, what: &str) -> Result<BTreeMap<String, RatFun>, String> {
    let obj = v.as_object().ok_or_else(|| format!("`{what}` must be an object"))?;
    obj.iter().map(|(k, c)| Ok((k.clone(), coefficient(c, &format!("{what}.{k}"))?))).collect()
}

/// The data of a witness as written by [`witness`], before verification.
pub struct WitnessData {
    pub perm: Vec<(String, String)>,
    pub var_scales: BTreeMap<String, RatFun>,
    pub dep_scale: RatFun,
    pub overall: RatFun,
    pub param_map: BTreeMap<Param, RatFun>,
}

pub fn witness_data(v: &Value) -> Result<WitnessData, String> {
    let v = v.get("witness").unwrap_or(v);
    let perm = field(v, "perm")?
        .as_array()
        .ok_or("`perm` must be an array")?
        .iter()
        .map(|pair| match pair.as_array().map(Vec::as_slice) {
            Some([Value::String(a), Value::String(b)]) => Ok((a.clone(), b.clone())),
            _ => Err("`perm` entries must be pairs of names".to_string()),
        })
        .collect::<Result<_, _>>()?;
    Ok(WitnessData {
        perm,
        var_scales: coefficient_map(field(v, "var_scales")?, "var_scales")?,
        dep_scale: coefficient(field(v, "dep_scale")?, "dep_scale")?,
        overall: coefficient(field(v, "overall")?, "overall")?,
        param_map: coefficient_map(field(v, "param_map")?, "param_map")?
            .into_iter()
            .map(|(k, c)| (Param::new(k), c))
            .collect(),
    })
}
