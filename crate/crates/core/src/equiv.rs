//! Equivalence of PDEs modulo renaming and scalings.
//!
//! Two equations `p` (source) and `q` (target) match when a bijection of
//! their active variables, per-variable scalings `new = s * old`, a scaling of
//! the unknown `u -> kappa * u` (followed by division by `kappa`), an overall
//! factor `c` and a substitution of `q`'s parameters turn one into the other.
//! Scalings act on a term of `u`-degree `d` with key `K` as
//! `c * kappa^(d-1) * prod s_i^(K_i)`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::coeff::{MPoly, Param, RatFun};
use crate::diffpoly::{subst_params, DerivKey, DiffMonomial, DiffPoly, VarSet};
use crate::error::{Error, Result};

/// Largest number of active variables the permutation search accepts.
pub const MAX_MATCH_VARS: usize = 6;

/// Upper bound on branches explored by the coefficient solver per permutation.
const BRANCH_BUDGET: usize = 4096;

/// True iff the two normal forms are identical.
pub fn structural_equal(p: &DiffPoly, q: &DiffPoly) -> Result<bool> {
    if p.vars() != q.vars() {
        return Err(Error::VarSetMismatch(format!("({}) vs ({})", p.vars(), q.vars())));
    }
    Ok(p == q)
}

/// A verified equivalence between a source and a target equation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchWitness {
    perm: Vec<(String, String)>,
    var_scales: BTreeMap<String, RatFun>,
    dep_scale: RatFun,
    overall: RatFun,
    param_map: BTreeMap<Param, RatFun>,
}

impl MatchWitness {
    /// Builds a witness and checks it by substitution; `perm` and
    /// `var_scales` are keyed by the source's active variables.
    pub fn new(
        p: &DiffPoly,
        q: &DiffPoly,
        perm: Vec<(String, String)>,
        var_scales: BTreeMap<String, RatFun>,
        dep_scale: RatFun,
        overall: RatFun,
        param_map: BTreeMap<Param, RatFun>,
    ) -> Result<Self> {
        let w = MatchWitness {
            perm,
            var_scales,
            dep_scale,
            overall,
            param_map,
        };
        w.verify(p, q)?;
        Ok(w)
    }

    pub fn perm(&self) -> &[(String, String)] {
        &self.perm
    }

    pub fn var_scales(&self) -> &BTreeMap<String, RatFun> {
        &self.var_scales
    }

    pub fn dep_scale(&self) -> &RatFun {
        &self.dep_scale
    }

    pub fn overall(&self) -> &RatFun {
        &self.overall
    }

    pub fn param_map(&self) -> &BTreeMap<Param, RatFun> {
        &self.param_map
    }

    /// The source, restricted to its active variables, rewritten in the
    /// target's variables with all scalings applied.
    pub fn apply(&self, p: &DiffPoly, target_vars: &VarSet) -> Result<DiffPoly> {
        let p = p.restrict_to_active();
        let n = p.vars().len();
        if self.perm.len() != n || target_vars.len() != n {
            return Err(Error::InvalidWitness(format!(
                "permutation covers {} variables, equation has {n}",
                self.perm.len()
            )));
        }
        let mut sigma = vec![usize::MAX; n];
        let mut scales = Vec::with_capacity(n);
        for (i, name) in p.vars().names().iter().enumerate() {
            let (_, to) = self
                .perm
                .iter()
                .find(|(from, _)| from == name)
                .ok_or_else(|| Error::InvalidWitness(format!("`{name}` is not mapped")))?;
            sigma[i] = target_vars
                .index_of(to)
                .ok_or_else(|| Error::InvalidWitness(format!("`{to}` is not a target variable")))?;
            let s = self.var_scales.get(name).cloned().unwrap_or_else(RatFun::one);
            if s.is_zero() {
                return Err(Error::InvalidWitness(format!("scale of `{name}` is zero")));
            }
            scales.push(s);
        }
        if sigma.iter().collect::<BTreeSet<_>>().len() != n {
            return Err(Error::InvalidWitness("variable map is not a bijection".into()));
        }
        if self.dep_scale.is_zero() || self.overall.is_zero() {
            return Err(Error::InvalidWitness("zero scaling".into()));
        }
        let terms = p.terms().map(|(m, c)| {
            let mut coef = &self.overall * c;
            let d = m.degree() as i32;
            coef = &coef * &self.dep_scale.pow(d - 1).expect("nonzero");
            for (key, e) in m.factors() {
                for (i, &o) in key.orders().iter().enumerate() {
                    if o > 0 {
                        coef = &coef * &scales[i].pow((o * e) as i32).expect("nonzero");
                    }
                }
            }
            (m.map_keys(|k| permute_key(k, &sigma)), coef)
        });
        Ok(DiffPoly::from_terms(target_vars, terms))
    }

    fn verify(&self, p: &DiffPoly, q: &DiffPoly) -> Result<()> {
        let q = q.restrict_to_active();
        if let Some(missing) = q.params().into_iter().find(|x| !self.param_map.contains_key(x)) {
            return Err(Error::InvalidWitness(format!("parameter `{missing}` is not mapped")));
        }
        let lhs = self.apply(p, q.vars())?;
        let rhs = subst_params(&q, &self.param_map)?;
        if lhs != rhs {
            return Err(Error::InvalidWitness("transformed equations differ".into()));
        }
        Ok(())
    }

    fn printed_param_map(&self) -> String {
        self.param_map
            .iter()
            .map(|(k, v)| format!("{k}->{v}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for MatchWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let perm: Vec<String> = self.perm.iter().map(|(a, b)| format!("{a} -> {b}")).collect();
        writeln!(f, "variables: {}", perm.join(", "))?;
        let scales: Vec<String> = self.var_scales.iter().map(|(a, s)| format!("{a}: {s}")).collect();
        writeln!(f, "variable scales: {}", scales.join(", "))?;
        writeln!(f, "dependent scale: {}", self.dep_scale)?;
        writeln!(f, "overall factor: {}", self.overall)?;
        let pm: Vec<String> = self.param_map.iter().map(|(k, v)| format!("{k} -> {v}")).collect();
        write!(f, "parameters: {}", if pm.is_empty() { "none".to_string() } else { pm.join(", ") })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SeparatingInvariant {
    VariableCount,
    DerivativeOrderMultiset,
    UDegreeMultiset,
    SupportSize,
    /// No variable bijection maps one monomial support onto the other.
    MonomialSupport,
}

impl SeparatingInvariant {
    pub fn name(self) -> &'static str {
        match self {
            SeparatingInvariant::VariableCount => "variable count",
            SeparatingInvariant::DerivativeOrderMultiset => "derivative-order multiset",
            SeparatingInvariant::UDegreeMultiset => "u-degree multiset",
            SeparatingInvariant::SupportSize => "support size",
            SeparatingInvariant::MonomialSupport => "monomial support under all permutations",
        }
    }

    /// The invariant's value for one equation, as printed in certificates.
    pub fn evaluate(self, p: &DiffPoly) -> String {
        let p = p.restrict_to_active();
        match self {
            SeparatingInvariant::VariableCount => p.active_vars().len().to_string(),
            SeparatingInvariant::DerivativeOrderMultiset => {
                multiset(p.terms().map(|(m, _)| m.weighted_order()))
            }
            SeparatingInvariant::UDegreeMultiset => multiset(p.terms().map(|(m, _)| m.degree())),
            SeparatingInvariant::SupportSize => p.len().to_string(),
            SeparatingInvariant::MonomialSupport => {
                let mut v: Vec<String> = p.terms().map(|(m, _)| p.monomial_string(m, Default::default())).collect();
                v.sort();
                format!("{{{}}}", v.join(", "))
            }
        }
    }
}

fn multiset(values: impl Iterator<Item = u32>) -> String {
    let mut v: Vec<u32> = values.collect();
    v.sort_unstable();
    let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
    format!("{{{}}}", parts.join(", "))
}

impl fmt::Display for SeparatingInvariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Names the invariant that separates two equations, with both values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefutationCertificate {
    pub invariant: SeparatingInvariant,
    pub source_value: String,
    pub target_value: String,
}

impl fmt::Display for RefutationCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} differs: {} vs {}", self.invariant, self.source_value, self.target_value)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatchOutcome {
    Witness(MatchWitness),
    Refuted(RefutationCertificate),
}

fn permute_key(k: &DerivKey, sigma: &[usize]) -> DerivKey {
    let mut out = vec![0; k.len()];
    for (i, &o) in k.orders().iter().enumerate() {
        out[sigma[i]] = o;
    }
    DerivKey::from_orders(out)
}

/// Lexicographic successor of a permutation, in place.
fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("successor exists");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn support(p: &DiffPoly) -> BTreeSet<DiffMonomial> {
    p.terms().map(|(m, _)| m.clone()).collect()
}

const C: &str = "$c";
const KAPPA: &str = "$k";

fn scale_unknown(i: usize) -> Param {
    Param::new(format!("$s{i}"))
}

fn target_unknown(p: &Param) -> Param {
    Param::new(format!("$q:{}", p.name()))
}

fn is_unknown(p: &Param) -> bool {
    p.name().starts_with('$')
}

fn is_scale(p: &Param) -> bool {
    is_unknown(p) && !p.name().starts_with("$q:")
}

fn unknowns_of(f: &RatFun) -> BTreeSet<Param> {
    f.num().params().into_iter().filter(is_unknown).collect()
}

/// Roots in `Q(params)` of the polynomial `num` viewed in the single unknown `v`.
/// `None` means the equation has a shape the sequential solver does not handle.
fn solve_single(num: &MPoly, v: &Param) -> Option<Vec<RatFun>> {
    let mut by_exp: BTreeMap<u32, MPoly> = BTreeMap::new();
    for (pp, c) in num.terms() {
        let e = pp.exponent(v);
        let rest = pp.div(&crate::coeff::PowerProduct::var(v.clone()).pow(e)).expect("divides");
        by_exp.entry(e).or_insert_with(MPoly::zero).add_term(rest, c.clone());
    }
    let emin = *by_exp.keys().next()?;
    let mut roots = Vec::new();
    if emin > 0 && !is_scale(v) {
        roots.push(RatFun::zero());
    }
    let shifted: Vec<(u32, MPoly)> = by_exp.into_iter().map(|(e, c)| (e - emin, c)).collect();
    match &shifted[..] {
        [_] => Some(roots),
        [(0, b), (e, a)] => {
            let rhs = (-RatFun::from_poly(b.clone())).checked_div(&RatFun::from_poly(a.clone())).ok()?;
            let r = nth_root(&rhs, *e)?;
            roots.extend(r);
            if is_scale(v) {
                roots.retain(|r| !r.is_zero());
            }
            Some(roots)
        }
        _ => None,
    }
}

/// All roots of `x^e = r` in the field, positive branch first; `None` if unsupported.
fn nth_root(r: &RatFun, e: u32) -> Option<Vec<RatFun>> {
    match e {
        1 => Some(vec![r.clone()]),
        e if e % 2 == 0 => {
            let Some(s) = r.sqrt() else { return Some(Vec::new()) };
            let inner = nth_root(&s, e / 2)?;
            let mut out = Vec::new();
            for x in inner {
                if x.is_zero() {
                    out.push(x);
                } else {
                    out.push(x.clone());
                    out.push(-&x);
                }
            }
            out.dedup();
            Some(out)
        }
        _ => None,
    }
}

#[derive(Default)]
struct SolveResult {
    solutions: Vec<BTreeMap<Param, RatFun>>,
    unresolved: bool,
    budget: usize,
}

fn subst_all(eqs: &[RatFun], v: &Param, value: &RatFun) -> Option<Vec<RatFun>> {
    let map: BTreeMap<Param, RatFun> = [(v.clone(), value.clone())].into_iter().collect();
    let mut out = Vec::with_capacity(eqs.len());
    for e in eqs {
        let s = e.subst(&map).ok()?;
        if !s.is_zero() {
            out.push(s);
        }
    }
    Some(out)
}

fn assign(
    eqs: &[RatFun],
    known: &BTreeMap<Param, RatFun>,
    v: &Param,
    value: RatFun,
    gauges: &[Param],
    out: &mut SolveResult,
) {
    let Some(next) = subst_all(eqs, v, &value) else { return };
    let mut known = known.clone();
    let single: BTreeMap<Param, RatFun> = [(v.clone(), value.clone())].into_iter().collect();
    for val in known.values_mut() {
        if let Ok(s) = val.subst(&single) {
            *val = s;
        }
    }
    known.insert(v.clone(), value);
    solve(next, known, gauges, out);
}

/// Sequential solver: repeatedly solve an equation in a single unknown; when
/// none exists, fix the next gauge unknown to 1.
fn solve(eqs: Vec<RatFun>, known: BTreeMap<Param, RatFun>, gauges: &[Param], out: &mut SolveResult) {
    if out.budget == 0 {
        out.unresolved = true;
        return;
    }
    out.budget -= 1;
    if eqs.iter().any(|e| unknowns_of(e).is_empty()) {
        return;
    }
    if eqs.is_empty() {
        out.solutions.push(known);
        return;
    }
    for e in &eqs {
        let us = unknowns_of(e);
        if us.len() != 1 {
            continue;
        }
        let v = us.into_iter().next().expect("one unknown");
        if let Some(roots) = solve_single(e.num(), &v) {
            for r in roots {
                assign(&eqs, &known, &v, r, gauges, out);
            }
            return;
        }
    }
    let present: BTreeSet<Param> = eqs.iter().flat_map(unknowns_of).collect();
    let candidates: Vec<&Param> = gauges.iter().filter(|g| present.contains(*g)).collect();
    if candidates.is_empty() {
        out.unresolved = true;
        return;
    }
    for g in candidates {
        let before = out.solutions.len();
        assign(&eqs, &known, g, RatFun::one(), gauges, out);
        if out.solutions.len() > before {
            return;
        }
    }
}

/// Decides whether `p` and `q` are equivalent under the scaling family.
///
/// Returns a verified witness, or a certificate naming an invariant that
/// differs. When the supports line up but the coefficient equations cannot
/// be solved sequentially, the answer is [`Error::UnresolvedNonlinearSystem`].
pub fn match_modulo(p: &DiffPoly, q: &DiffPoly) -> Result<MatchOutcome> {
    let pa = p.restrict_to_active();
    let qa = q.restrict_to_active();
    for inv in [
        SeparatingInvariant::VariableCount,
        SeparatingInvariant::DerivativeOrderMultiset,
        SeparatingInvariant::UDegreeMultiset,
        SeparatingInvariant::SupportSize,
    ] {
        let (a, b) = (inv.evaluate(p), inv.evaluate(q));
        if a != b {
            return Ok(MatchOutcome::Refuted(RefutationCertificate {
                invariant: inv,
                source_value: a,
                target_value: b,
            }));
        }
    }
    let n = pa.vars().len();
    if n > MAX_MATCH_VARS {
        return Err(Error::SearchBudgetExceeded((1..=n).product()));
    }

    let qmap: BTreeMap<Param, RatFun> = qa
        .params()
        .into_iter()
        .map(|x| {
            let u = RatFun::param(target_unknown(&x));
            (x, u)
        })
        .collect();
    let q_generic = subst_params(&qa, &qmap)?;
    let q_support = support(&qa);

    let mut sigma: Vec<usize> = (0..n).collect();
    let mut supports_matched = false;
    let mut unresolved = false;
    loop {
        let permuted: BTreeSet<DiffMonomial> = pa
            .terms()
            .map(|(m, _)| m.map_keys(|k| permute_key(k, &sigma)))
            .collect();
        if permuted == q_support {
            supports_matched = true;
            let result = solve_for_perm(&pa, &q_generic, &sigma);
            unresolved |= result.unresolved;
            let mut found: Vec<(String, usize, MatchWitness)> = Vec::new();
            for (branch, sol) in result.solutions.into_iter().enumerate() {
                if let Some(w) = witness_from(&pa, &qa, &sigma, &sol) {
                    found.push((w.printed_param_map(), branch, w));
                }
            }
            found.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
            if let Some((_, _, w)) = found.into_iter().next() {
                return Ok(MatchOutcome::Witness(w));
            }
        }
        if !next_permutation(&mut sigma) {
            break;
        }
    }
    if supports_matched {
        return Err(Error::UnresolvedNonlinearSystem(if unresolved {
            "coefficient equations are not sequentially solvable".into()
        } else {
            "supports match but the sequential solver found no consistent scaling".into()
        }));
    }
    Ok(MatchOutcome::Refuted(RefutationCertificate {
        invariant: SeparatingInvariant::MonomialSupport,
        source_value: SeparatingInvariant::MonomialSupport.evaluate(p),
        target_value: SeparatingInvariant::MonomialSupport.evaluate(q),
    }))
}

fn solve_for_perm(pa: &DiffPoly, q_generic: &DiffPoly, sigma: &[usize]) -> SolveResult {
    let n = sigma.len();
    let c = RatFun::param(C);
    let kappa = RatFun::param(KAPPA);
    let s: Vec<RatFun> = (0..n).map(|i| RatFun::param(scale_unknown(i))).collect();
    let mut counts = vec![0usize; n];
    let mut eqs = Vec::new();
    for (m, coef) in pa.terms() {
        let mut factor = &c * coef;
        factor = &factor * &kappa.pow(m.degree() as i32 - 1).expect("symbolic");
        for (key, e) in m.factors() {
            for (i, &o) in key.orders().iter().enumerate() {
                if o > 0 {
                    factor = &factor * &s[i].pow((o * e) as i32).expect("symbolic");
                }
            }
        }
        for i in 0..n {
            if m.factors().iter().any(|(k, _)| k.get(i) > 0) {
                counts[i] += 1;
            }
        }
        let target = m.map_keys(|k| permute_key(k, sigma));
        let e = &q_generic.coefficient(&target) - &factor;
        if !e.is_zero() {
            eqs.push((target, e));
        }
    }
    eqs.sort_by(|a, b| a.0.cmp(&b.0));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    let mut gauges: Vec<Param> = order.into_iter().map(scale_unknown).collect();
    gauges.push(Param::new(C));
    gauges.push(Param::new(KAPPA));

    let mut out = SolveResult {
        budget: BRANCH_BUDGET,
        ..Default::default()
    };
    solve(eqs.into_iter().map(|(_, e)| e).collect(), BTreeMap::new(), &gauges, &mut out);
    out
}

fn witness_from(pa: &DiffPoly, qa: &DiffPoly, sigma: &[usize], sol: &BTreeMap<Param, RatFun>) -> Option<MatchWitness> {
    let get = |p: &Param| sol.get(p).cloned().unwrap_or_else(RatFun::one);
    let perm: Vec<(String, String)> = pa
        .vars()
        .names()
        .iter()
        .enumerate()
        .map(|(i, name)| (name.clone(), qa.vars().name(sigma[i]).to_string()))
        .collect();
    let var_scales: BTreeMap<String, RatFun> = pa
        .vars()
        .names()
        .iter()
        .enumerate()
        .map(|(i, name)| (name.clone(), get(&scale_unknown(i))))
        .collect();
    let mut param_map = BTreeMap::new();
    for x in qa.params() {
        let v = sol.get(&target_unknown(&x))?;
        if !unknowns_of(v).is_empty() {
            return None;
        }
        param_map.insert(x, v.clone());
    }
    let dep = get(&Param::new(KAPPA));
    let overall = get(&Param::new(C));
    if [&dep, &overall].iter().any(|x| !unknowns_of(x).is_empty())
        || var_scales.values().any(|x| !unknowns_of(x).is_empty())
    {
        return None;
    }
    MatchWitness::new(pa, qa, perm, var_scales, dep, overall, param_map).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vs(names: &[&str]) -> VarSet {
        VarSet::new(names.iter().copied()).unwrap()
    }

    fn k(o: &[u32]) -> DerivKey {
        DerivKey::from_orders(o.to_vec())
    }

    fn u(vars: &VarSet, o: &[u32]) -> DiffPoly {
        DiffPoly::u(vars, k(o))
    }

    /// u_tt + u_xx - b (u^2)_xx - g u_xxxx over (t, x).
    fn boussinesq(vars: &VarSet, b: &RatFun, g: &RatFun) -> DiffPoly {
        let sq = u(vars, &[0, 0]).pow(2).derivative(&k(&[0, 2]));
        &(&(&u(vars, &[2, 0]) + &u(vars, &[0, 2])) - &sq.scale(b)) - &u(vars, &[0, 4]).scale(g)
    }

    #[test]
    fn identity_witness() {
        let vars = vs(&["t", "x"]);
        let p = boussinesq(&vars, &RatFun::param("beta"), &RatFun::param("gamma"));
        let MatchOutcome::Witness(w) = match_modulo(&p, &p).unwrap() else { panic!("expected witness") };
        assert!(w.overall().is_one() && w.dep_scale().is_one());
        assert!(w.var_scales().values().all(RatFun::is_one));
        assert!(w.perm().iter().all(|(a, b)| a == b));
        assert_eq!(w.param_map()[&Param::from("beta")], RatFun::param("beta"));
    }

    #[test]
    fn rescaled_boussinesq() {
        let src = vs(&["t'", "x'"]);
        let coef = RatFun::ratio(16, 25);
        let sq = u(&src, &[0, 0]).pow(2).derivative(&k(&[0, 2]));
        let p = &(&(&u(&src, &[2, 0]) + &u(&src, &[0, 2]).scale(&coef)) - &sq.scale(&RatFun::param("beta")))
            - &u(&src, &[0, 4]).scale(&RatFun::param("gamma"));
        let q = boussinesq(&vs(&["t", "x"]), &RatFun::param("beta'"), &RatFun::param("gamma'"));
        let MatchOutcome::Witness(w) = match_modulo(&p, &q).unwrap() else { panic!("expected witness") };
        assert_eq!(w.overall(), &RatFun::ratio(25, 16));
        assert_eq!(w.var_scales()["t'"], RatFun::ratio(4, 5));
        assert_eq!(w.var_scales()["x'"], RatFun::one());
        assert_eq!(w.param_map()[&Param::from("beta'")].to_string(), "25*beta/16");
        assert_eq!(w.param_map()[&Param::from("gamma'")].to_string(), "25*gamma/16");
    }

    #[test]
    fn refutation_by_variable_count() {
        let p = boussinesq(&vs(&["t", "x"]), &RatFun::one(), &RatFun::one());
        let v4 = vs(&["t", "x", "y", "z"]);
        let q = &(&u(&v4, &[2, 0, 0, 0]) + &u(&v4, &[0, 0, 1, 1])) + &u(&v4, &[0, 2, 0, 0]);
        let MatchOutcome::Refuted(r) = match_modulo(&p, &q).unwrap() else { panic!("expected refutation") };
        assert_eq!(r.invariant, SeparatingInvariant::VariableCount);
        assert_eq!((r.source_value.as_str(), r.target_value.as_str()), ("2", "4"));
    }

    #[test]
    fn refutation_by_support() {
        let vars = vs(&["t", "x"]);
        let p = &u(&vars, &[2, 0]) + &u(&vars, &[0, 1]);
        let q = &u(&vars, &[1, 1]) + &u(&vars, &[0, 1]);
        let MatchOutcome::Refuted(r) = match_modulo(&p, &q).unwrap() else { panic!("expected refutation") };
        assert_eq!(r.invariant, SeparatingInvariant::MonomialSupport);
    }

    #[test]
    fn gauge_backtracks_when_first_choice_is_forced() {
        // c*s^2 = 4 and c*s^4 = 16 force s^2 = 4, c = 1
        let vars = vs(&["x"]);
        let p = &u(&vars, &[2]) + &u(&vars, &[4]);
        let q = &u(&vars, &[2]).scale(&RatFun::integer(4)) + &u(&vars, &[4]).scale(&RatFun::integer(16));
        let MatchOutcome::Witness(w) = match_modulo(&p, &q).unwrap() else { panic!("expected witness") };
        assert_eq!(w.apply(&p, q.vars()).unwrap(), q);
    }

    #[test]
    fn inconclusive_rather_than_refuted() {
        // u_tt + u_xx vs u_tt - u_xx needs sqrt(-1)
        let vars = vs(&["t", "x"]);
        let p = &u(&vars, &[2, 0]) + &u(&vars, &[0, 2]);
        let q = &u(&vars, &[2, 0]) - &u(&vars, &[0, 2]);
        assert!(matches!(match_modulo(&p, &q), Err(Error::UnresolvedNonlinearSystem(_))));
    }

    #[test]
    fn structural_equal_checks_vars() {
        let p = u(&vs(&["t", "x"]), &[1, 0]);
        let q = u(&vs(&["t", "y"]), &[1, 0]);
        assert!(matches!(structural_equal(&p, &q), Err(Error::VarSetMismatch(_))));
        assert!(structural_equal(&p, &p).unwrap());
    }

    #[test]
    fn tampered_witness_rejected() {
        let vars = vs(&["t", "x"]);
        let p = &u(&vars, &[2, 0]) + &u(&vars, &[0, 2]);
        let perm = vec![("t".into(), "t".into()), ("x".into(), "x".into())];
        let scales: BTreeMap<String, RatFun> = [("t".into(), RatFun::integer(2))].into_iter().collect();
        let w = MatchWitness::new(&p, &p, perm, scales, RatFun::one(), RatFun::one(), BTreeMap::new());
        assert!(matches!(w, Err(Error::InvalidWitness(_))));
    }
}
