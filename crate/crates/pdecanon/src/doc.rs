//! PDE documents, transform scripts and the small inline formats used on the
//! command line, plus the canonical printer.

use std::collections::{BTreeMap, BTreeSet};

use pdecanon_core::{
    subst_params, AffineTransform, DerivKey, DiffPoly, Error as CoreError, Expr, MPoly, Notation, Param,
    PowerProduct, RatFun, TestFunction, VarSet, Q,
};

use crate::error::{ParseError, Pos};
use crate::lexer::{tokenize, Tok};
use crate::parser::{Ast, KeySpec, Parser};

/// One equation `lhs = 0` with its declarations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PdeDoc {
    pub name: Option<String>,
    pub vars: VarSet,
    pub params: Vec<Param>,
    pub lhs: DiffPoly,
}

impl PdeDoc {
    /// Fixes some parameters to numbers; they disappear from the declarations.
    pub fn with_params(&self, values: &BTreeMap<Param, Q>) -> Result<PdeDoc, ParseError> {
        let map: BTreeMap<Param, RatFun> = values
            .iter()
            .filter(|(p, _)| self.params.contains(p))
            .map(|(p, v)| (p.clone(), RatFun::constant(v.clone())))
            .collect();
        Ok(PdeDoc {
            name: self.name.clone(),
            vars: self.vars.clone(),
            params: self.params.iter().filter(|p| !map.contains_key(p)).cloned().collect(),
            lhs: subst_params(&self.lhs, &map)?,
        })
    }
}

fn key_from_spec(spec: &KeySpec, vars: &VarSet) -> Result<DerivKey, ParseError> {
    let mut orders = vec![0u32; vars.len()];
    for (name, k) in spec {
        let i = vars
            .index_of(name)
            .ok_or_else(|| ParseError::UndeclaredIdentifier(name.clone()))?;
        orders[i] += k;
    }
    Ok(DerivKey::from_orders(orders))
}

fn lower_expr(ast: &Ast, vars: &VarSet, params: &[Param]) -> Result<Expr, ParseError> {
    let b = |a: &Ast| lower_expr(a, vars, params).map(Box::new);
    Ok(match ast {
        Ast::Num(q) => Expr::Num(q.clone()),
        Ast::Ident(name, pos) => {
            let p = Param::new(name.as_str());
            if params.contains(&p) {
                Expr::Param(p)
            } else if vars.index_of(name).is_some() {
                return Err(ParseError::syntax(
                    *pos,
                    &["parameter or number (coefficients must be constant)"],
                    &format!("variable `{name}`"),
                ));
            } else {
                return Err(ParseError::UndeclaredIdentifier(name.clone()));
            }
        }
        Ast::U(spec, _) => Expr::U(key_from_spec(spec, vars)?),
        Ast::Deriv(inner, spec, _) => Expr::Deriv(b(inner)?, key_from_spec(spec, vars)?),
        Ast::Neg(a) => Expr::Neg(b(a)?),
        Ast::Add(x, y) => Expr::Add(b(x)?, b(y)?),
        Ast::Sub(x, y) => Expr::Sub(b(x)?, b(y)?),
        Ast::Mul(x, y) => Expr::Mul(b(x)?, b(y)?),
        Ast::Div(x, y) => Expr::Div(b(x)?, b(y)?),
        Ast::Pow(x, k) => Expr::Pow(b(x)?, *k),
    })
}

fn core_to_parse(e: CoreError) -> ParseError {
    match e {
        CoreError::NonPolynomialInU(msg) => ParseError::NonPolynomialInU(msg),
        other => ParseError::Core(other),
    }
}

fn declared(names: Vec<(String, Pos)>, taken: &mut BTreeSet<String>) -> Result<Vec<String>, ParseError> {
    let mut out = Vec::new();
    for (n, pos) in names {
        if n == "u" || n == "D" {
            return Err(ParseError::syntax(pos, &["a name other than `u` and `D`"], &format!("`{n}`")));
        }
        if !taken.insert(n.clone()) {
            return Err(ParseError::DuplicateDefinition(n));
        }
        out.push(n);
    }
    Ok(out)
}

fn keyword(p: &Parser, word: &str) -> bool {
    matches!(p.peek_tok(), Tok::Ident(s) if s == word)
}

/// `vars t,x; [params a,b;] eq lhs = rhs`
pub fn parse_pde(text: &str) -> Result<PdeDoc, ParseError> {
    let mut p = Parser::new(tokenize(text)?);
    let mut taken = BTreeSet::new();
    if !keyword(&p, "vars") {
        return Err(p.error(&["`vars`"]));
    }
    p.advance();
    let list = p.ident_list()?;
    let var_names = declared(list, &mut taken)?;
    p.expect(&Tok::Semi, "`;`")?;
    let mut params = Vec::new();
    if keyword(&p, "params") {
        p.advance();
        let list = p.ident_list()?;
        params = declared(list, &mut taken)?.into_iter().map(Param::new).collect();
        p.expect(&Tok::Semi, "`;`")?;
    }
    if !keyword(&p, "eq") {
        return Err(p.error(&[if params.is_empty() { "`params` or `eq`" } else { "`eq`" }]));
    }
    p.advance();
    let lhs = p.expr()?;
    p.expect(&Tok::Eq, "`=`")?;
    let rhs = p.expr()?;
    p.eat(&Tok::Semi);
    if !p.at_eof() {
        return Err(p.error(&["end of input"]));
    }
    let vars = VarSet::new(var_names)?;
    let e = Expr::Sub(
        Box::new(lower_expr(&lhs, &vars, &params)?),
        Box::new(lower_expr(&rhs, &vars, &params)?),
    );
    let lhs = e.to_diffpoly(&vars).map_err(core_to_parse)?;
    Ok(PdeDoc {
        name: None,
        vars,
        params,
        lhs,
    })
}

/// Lowers a `u`-free tree to a field element; identifiers become parameters
/// after `resolve` accepts them.
fn lower_ratfun(
    ast: &Ast,
    resolve: &dyn Fn(&str) -> Result<(), ParseError>,
    on_u: &dyn Fn(Pos) -> ParseError,
) -> Result<RatFun, ParseError> {
    let r = |a: &Ast| lower_ratfun(a, resolve, on_u);
    Ok(match ast {
        Ast::Num(q) => RatFun::constant(q.clone()),
        Ast::Ident(name, _) => {
            resolve(name)?;
            RatFun::param(name.as_str())
        }
        Ast::U(_, pos) | Ast::Deriv(_, _, pos) => return Err(on_u(*pos)),
        Ast::Neg(a) => -r(a)?,
        Ast::Add(x, y) => &r(x)? + &r(y)?,
        Ast::Sub(x, y) => &r(x)? - &r(y)?,
        Ast::Mul(x, y) => &r(x)? * &r(y)?,
        Ast::Div(x, y) => r(x)?.checked_div(&r(y)?)?,
        Ast::Pow(x, k) => {
            let k = i32::try_from(*k).map_err(|_| CoreError::UnsupportedExpression(format!("exponent {k}")))?;
            r(x)?.pow(k)?
        }
    })
}

fn parse_whole_expr(text: &str) -> Result<Ast, ParseError> {
    let mut p = Parser::new(tokenize(text)?);
    let e = p.expr()?;
    if !p.at_eof() {
        return Err(p.error(&["end of input"]));
    }
    Ok(e)
}

fn no_u(pos: Pos) -> ParseError {
    ParseError::syntax(pos, &["an expression without `u`"], "`u`")
}

/// A constant of `Q(params)`; any identifier other than `u` is a parameter.
pub fn parse_ratfun(text: &str) -> Result<RatFun, ParseError> {
    lower_ratfun(&parse_whole_expr(text)?, &|_| Ok(()), &no_u)
}

/// A rational number written as an expression, e.g. `6/5` or `-1.5`.
pub fn parse_rational(text: &str) -> Result<Q, ParseError> {
    let ast = parse_whole_expr(text)?;
    let f = lower_ratfun(&ast, &|n| Err(ParseError::UndeclaredIdentifier(n.to_string())), &no_u)?;
    Ok(f.as_constant().expect("no identifiers"))
}

/// `k=v,...` with rational values.
pub fn parse_assignments(text: &str) -> Result<BTreeMap<Param, Q>, ParseError> {
    let mut out = BTreeMap::new();
    if text.trim().is_empty() {
        return Ok(out);
    }
    let mut p = Parser::new(tokenize(text)?);
    loop {
        let (name, _) = p.ident()?;
        p.expect(&Tok::Eq, "`=`")?;
        let ast = p.expr()?;
        let f = lower_ratfun(&ast, &|n| Err(ParseError::UndeclaredIdentifier(n.to_string())), &no_u)?;
        if out.insert(Param::new(name.as_str()), f.as_constant().expect("no identifiers")).is_some() {
            return Err(ParseError::DuplicateDefinition(name));
        }
        if !p.eat(&Tok::Comma) {
            break;
        }
    }
    if !p.at_eof() {
        return Err(p.error(&["`,`", "end of input"]));
    }
    Ok(out)
}

/// Comma-separated rationals, e.g. `1,1/2`.
pub fn parse_point(text: &str) -> Result<Vec<Q>, ParseError> {
    let mut p = Parser::new(tokenize(text)?);
    let mut out = Vec::new();
    loop {
        let ast = p.expr()?;
        let f = lower_ratfun(&ast, &|n| Err(ParseError::UndeclaredIdentifier(n.to_string())), &no_u)?;
        out.push(f.as_constant().expect("no identifiers"));
        if !p.eat(&Tok::Comma) {
            break;
        }
    }
    if !p.at_eof() {
        return Err(p.error(&["`,`", "end of input"]));
    }
    Ok(out)
}

/// Comma-separated derivative keys, e.g. `u_xt,D[u,{y,1},{t,1}]`.
pub fn parse_keys(text: &str, vars: &VarSet) -> Result<BTreeSet<DerivKey>, ParseError> {
    let mut p = Parser::new(tokenize(text)?);
    let mut out = BTreeSet::new();
    loop {
        let pos = p.peek().pos;
        match p.expr()? {
            Ast::U(spec, _) => {
                out.insert(key_from_spec(&spec, vars)?);
            }
            _ => return Err(ParseError::syntax(pos, &["a derivative of `u`"], "an expression")),
        }
        if !p.eat(&Tok::Comma) {
            break;
        }
    }
    if !p.at_eof() {
        return Err(p.error(&["`,`", "end of input"]));
    }
    Ok(out)
}

/// A polynomial in the independent variables with rational coefficients.
pub fn parse_test_function(text: &str, vars: &VarSet) -> Result<TestFunction, ParseError> {
    let ast = parse_whole_expr(text)?;
    let resolve = |n: &str| {
        if vars.index_of(n).is_some() {
            Ok(())
        } else {
            Err(ParseError::UndeclaredIdentifier(n.to_string()))
        }
    };
    let f = lower_ratfun(&ast, &resolve, &no_u)?;
    let den = f.den().as_constant().ok_or_else(|| {
        ParseError::Core(CoreError::UnsupportedExpression(format!(
            "test function `{f}` is not a polynomial"
        )))
    })?;
    let poly = f.num().scale(&(Q::from_integer(1.into()) / den));
    Ok(TestFunction::new(vars.clone(), poly)?)
}

/// Splits `f` (a field element in which the source variables appear as
/// parameters) into its linear coefficients and constant part.
fn affine_parts(f: &RatFun, source: &VarSet, lhs: &str) -> Result<(Vec<RatFun>, RatFun), ParseError> {
    let non_affine = || ParseError::NonAffineRightSide(lhs.to_string());
    let is_var = |p: &Param| source.index_of(p.name()).is_some();
    if f.den().params().iter().any(is_var) {
        return Err(non_affine());
    }
    let mut lin = vec![MPoly::zero(); source.len()];
    let mut cst = MPoly::zero();
    for (pp, c) in f.num().terms() {
        let var_part: Vec<(&Param, u32)> = pp.iter().filter(|(p, _)| is_var(p)).collect();
        let rest = PowerProduct::from_pairs(pp.iter().filter(|(p, _)| !is_var(p)).map(|(p, e)| (p.clone(), e)));
        match var_part.as_slice() {
            [] => cst.add_term(rest, c.clone()),
            [(v, 1)] => lin[source.index_of(v.name()).expect("is a variable")].add_term(rest, c.clone()),
            _ => return Err(non_affine()),
        }
    }
    let over = |p: MPoly| RatFun::new(p, f.den().clone()).map_err(ParseError::Core);
    Ok((lin.into_iter().map(over).collect::<Result<_, _>>()?, over(cst)?))
}

/// Transform script: `v' = affine-expr` per line or `;`. Variables without a
/// definition map to themselves and keep their names. Optional headers
/// `vars ...;` (must match `source`) and `params ...;` (restricts the
/// identifiers allowed on right sides; otherwise any non-variable identifier
/// is a parameter).
pub fn parse_transform(text: &str, source: &VarSet) -> Result<AffineTransform, ParseError> {
    let mut p = Parser::new(tokenize(text)?);
    let mut params: Option<BTreeSet<String>> = None;
    let mut defs: BTreeMap<usize, (String, Ast)> = BTreeMap::new();
    loop {
        while p.eat(&Tok::Semi) {}
        if p.at_eof() {
            break;
        }
        let header = (keyword(&p, "vars") || keyword(&p, "params")) && !matches!(p.lookahead(1), Some(Tok::Eq));
        if header {
            let (word, _) = p.ident()?;
            let names: Vec<String> = p.ident_list()?.into_iter().map(|(n, _)| n).collect();
            if word == "vars" {
                if names != source.names() {
                    return Err(ParseError::Core(CoreError::DimensionMismatch(format!(
                        "transform declares ({}) but the equation has ({})",
                        names.join(", "),
                        source
                    ))));
                }
            } else {
                params = Some(names.into_iter().collect());
            }
        } else {
            let (lhs, pos) = p.ident()?;
            let Some(base) = lhs.strip_suffix('\'') else {
                return Err(ParseError::syntax(pos, &["a primed variable such as `x'`"], &format!("`{lhs}`")));
            };
            let i = source
                .index_of(base)
                .ok_or_else(|| ParseError::UndeclaredIdentifier(base.to_string()))?;
            p.expect(&Tok::Eq, "`=`")?;
            let rhs = p.expr()?;
            if defs.insert(i, (lhs.clone(), rhs)).is_some() {
                return Err(ParseError::DuplicateDefinition(lhs));
            }
        }
        if !(p.eat(&Tok::Semi) || p.at_eof() || p.peek().line_start) {
            return Err(p.error(&["`;`", "line break"]));
        }
    }

    let n = source.len();
    let mut names = Vec::with_capacity(n);
    let mut matrix = Vec::with_capacity(n);
    let mut offset = Vec::with_capacity(n);
    for i in 0..n {
        match defs.get(&i) {
            Some((lhs, rhs)) => {
                let resolve = |name: &str| {
                    if source.index_of(name).is_some() {
                        return Ok(());
                    }
                    let allowed = match &params {
                        Some(ps) => ps.contains(name),
                        None => !name.ends_with('\''),
                    };
                    if allowed {
                        Ok(())
                    } else {
                        Err(ParseError::UndeclaredIdentifier(name.to_string()))
                    }
                };
                let f = lower_ratfun(rhs, &resolve, &|_| ParseError::NonAffineRightSide(lhs.clone()))?;
                let (row, c) = affine_parts(&f, source, lhs)?;
                names.push(lhs.clone());
                matrix.push(row);
                offset.push(c);
            }
            None => {
                names.push(source.name(i).to_string());
                matrix.push((0..n).map(|j| if i == j { RatFun::one() } else { RatFun::zero() }).collect());
                offset.push(RatFun::zero());
            }
        }
    }
    let target = VarSet::new(names.clone()).map_err(|_| {
        let dup = names
            .iter()
            .find(|a| names.iter().filter(|b| b == a).count() > 1)
            .cloned()
            .unwrap_or_default();
        ParseError::DuplicateDefinition(dup)
    })?;
    Ok(AffineTransform::new(source.clone(), target, matrix, offset)?)
}

/// `lhs = 0` in subscript notation, e.g. `u_tt + u_xx - 2*beta*u*u_xx - ... = 0`.
pub fn print_canonical(doc: &PdeDoc) -> String {
    format!("{} = 0", doc.lhs)
}

/// `lhs = 0` using `D[u, ...]` for every derivative.
pub fn print_explicit(doc: &PdeDoc) -> String {
    format!("{} = 0", doc.lhs.to_string_with(Notation::Explicit))
}

/// A complete document that parses back to the same normal form.
pub fn print_document(doc: &PdeDoc) -> String {
    let mut out = format!("vars {};\n", doc.vars.names().join(","));
    if !doc.params.is_empty() {
        let ps: Vec<&str> = doc.params.iter().map(Param::name).collect();
        out.push_str(&format!("params {};\n", ps.join(",")));
    }
    out.push_str(&format!("eq {}\n", print_canonical(doc)));
    out
}

/// A transform script that parses back to `t`; rows that keep a variable
/// unchanged under its own name are omitted.
pub fn print_transform(t: &AffineTransform) -> String {
    let printed = t.to_string();
    let mut out = String::new();
    for (i, row) in printed.split("; ").enumerate() {
        let unchanged = t.target().name(i) == t.source().name(i)
            && t.offset()[i].is_zero()
            && t.matrix()[i].iter().enumerate().all(|(j, c)| if i == j { c.is_one() } else { c.is_zero() });
        if !unchanged {
            out.push_str(row);
            out.push('\n');
        }
    }
    out
}
