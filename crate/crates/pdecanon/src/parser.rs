//! Recursive-descent parser producing an untyped expression tree.
//!
//! The same tree feeds equations, transform right sides, parameter values and
//! test functions; each consumer lowers it with its own identifier rules.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use pdecanon_core::Q;

use crate::error::{ParseError, Pos};
use crate::lexer::{Tok, Token};

/// Derivative orders by variable name, in order of first appearance.
pub type KeySpec = Vec<(String, u32)>;

#[derive(Clone, Debug, PartialEq)]
pub enum Ast {
    Num(Q),
    Ident(String, Pos),
    U(KeySpec, Pos),
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, i64),
    Deriv(Box<Ast>, KeySpec, Pos),
}

/// Splits a subscript run such as `x'x't` into variable names.
pub fn split_subscript(run: &str) -> KeySpec {
    let mut names: Vec<String> = Vec::new();
    for c in run.chars() {
        match names.last_mut() {
            Some(last) if c == '\'' => last.push(c),
            _ => names.push(c.to_string()),
        }
    }
    let mut spec: KeySpec = Vec::new();
    for n in names {
        match spec.iter_mut().find(|(m, _)| *m == n) {
            Some((_, k)) => *k += 1,
            None => spec.push((n, 1)),
        }
    }
    spec
}

pub struct Parser {
    toks: Vec<Token>,
    at: usize,
}

impl Parser {
    pub fn new(toks: Vec<Token>) -> Self {
        Parser { toks, at: 0 }
    }

    pub fn peek(&self) -> &Token {
        &self.toks[self.at]
    }

    pub fn peek_tok(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    pub fn lookahead(&self, k: usize) -> Option<Tok> {
        self.toks.get(self.at + k).map(|t| t.tok.clone())
    }

    pub fn advance(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek_tok(), Tok::Eof)
    }

    pub fn error(&self, expected: &[&str]) -> ParseError {
        ParseError::syntax(self.peek().pos, expected, &self.peek_tok().describe())
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek_tok() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, tok: &Tok, what: &str) -> Result<Token, ParseError> {
        if self.peek_tok() == tok {
            Ok(self.advance())
        } else {
            Err(self.error(&[what]))
        }
    }

    pub fn ident(&mut self) -> Result<(String, Pos), ParseError> {
        match self.peek_tok().clone() {
            Tok::Ident(s) => {
                let pos = self.advance().pos;
                Ok((s, pos))
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    /// `ident ("," ident)*`
    pub fn ident_list(&mut self) -> Result<Vec<(String, Pos)>, ParseError> {
        let mut out = vec![self.ident()?];
        while self.eat(&Tok::Comma) {
            out.push(self.ident()?);
        }
        Ok(out)
    }

    pub fn expr(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(&Tok::Plus) {
                lhs = Ast::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(&Tok::Minus) {
                lhs = Ast::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat(&Tok::Star) {
                lhs = Ast::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else if self.eat(&Tok::Slash) {
                lhs = Ast::Div(Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Ast, ParseError> {
        if self.eat(&Tok::Minus) {
            return Ok(Ast::Neg(Box::new(self.factor()?)));
        }
        if self.eat(&Tok::Plus) {
            return self.factor();
        }
        let base = self.base()?;
        if !self.eat(&Tok::Caret) {
            return Ok(base);
        }
        let negative = self.eat(&Tok::Minus);
        let pos = self.peek().pos;
        let k = match self.peek_tok().clone() {
            Tok::Int(n) => {
                self.advance();
                n.to_i64().ok_or_else(|| ParseError::syntax(pos, &["a small exponent"], &n.to_string()))?
            }
            _ => return Err(self.error(&["integer exponent"])),
        };
        Ok(Ast::Pow(Box::new(base), if negative { -k } else { k }))
    }

    fn base(&mut self) -> Result<Ast, ParseError> {
        let tok = self.peek().clone();
        match tok.tok {
            Tok::Int(n) => {
                self.advance();
                Ok(Ast::Num(Q::from_integer(n)))
            }
            Tok::Decimal(digits, scale) => {
                self.advance();
                Ok(Ast::Num(Q::new(digits, BigInt::from(10u32).pow(scale))))
            }
            Tok::LParen => {
                self.advance();
                let inner = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                match self.peek_tok().clone() {
                    Tok::Subscript(run) => {
                        let pos = self.advance().pos;
                        Ok(Ast::Deriv(Box::new(inner), split_subscript(&run), pos))
                    }
                    _ => Ok(inner),
                }
            }
            Tok::Ident(name) if name == "u" => {
                self.advance();
                match self.peek_tok().clone() {
                    Tok::Subscript(run) => {
                        self.advance();
                        Ok(Ast::U(split_subscript(&run), tok.pos))
                    }
                    _ => Ok(Ast::U(Vec::new(), tok.pos)),
                }
            }
            Tok::Ident(name) if name == "D" && self.toks.get(self.at + 1).map(|t| &t.tok) == Some(&Tok::LBracket) => {
                self.advance();
                self.advance();
                self.explicit_derivative(tok.pos)
            }
            Tok::Ident(name) => {
                self.advance();
                if let Tok::Subscript(_) = self.peek_tok() {
                    return Err(self.error(&["an operator (subscripts apply only to `u` or a parenthesized expression)"]));
                }
                Ok(Ast::Ident(name, tok.pos))
            }
            _ => Err(self.error(&["number", "identifier", "`u`", "`D[`", "`(`"])),
        }
    }

    /// After `D[`: `u ("," "{" ident "," integer "}")+ "]"`.
    fn explicit_derivative(&mut self, pos: Pos) -> Result<Ast, ParseError> {
        match self.peek_tok() {
            Tok::Ident(n) if n == "u" => {
                self.advance();
            }
            _ => return Err(self.error(&["`u`"])),
        }
        let mut spec: KeySpec = Vec::new();
        while self.eat(&Tok::Comma) {
            self.expect(&Tok::LBrace, "`{`")?;
            let (name, _) = self.ident()?;
            self.expect(&Tok::Comma, "`,`")?;
            let k = match self.peek_tok().clone() {
                Tok::Int(n) => {
                    let p = self.advance().pos;
                    n.to_u32().ok_or_else(|| ParseError::syntax(p, &["a small order"], &n.to_string()))?
                }
                _ => return Err(self.error(&["derivative order"])),
            };
            self.expect(&Tok::RBrace, "`}`")?;
            match spec.iter_mut().find(|(m, _)| *m == name) {
                Some((_, o)) => *o += k,
                None => spec.push((name, k)),
            }
        }
        if spec.is_empty() {
            return Err(self.error(&["`,`"]));
        }
        self.expect(&Tok::RBracket, "`]`")?;
        Ok(Ast::U(spec, pos))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexer::tokenize;

    fn parse(s: &str) -> Result<Ast, ParseError> {
        let mut p = Parser::new(tokenize(s)?);
        let e = p.expr()?;
        if !p.at_eof() {
            return Err(p.error(&["end of input"]));
        }
        Ok(e)
    }

    #[test]
    fn subscript_runs() {
        assert_eq!(split_subscript("xxt"), vec![("x".into(), 2), ("t".into(), 1)]);
        assert_eq!(split_subscript("x'x'z"), vec![("x'".into(), 2), ("z".into(), 1)]);
    }

    #[test]
    fn precedence() {
        let e = parse("-u^2 + a*b/c").unwrap();
        let Ast::Add(l, r) = e else { panic!() };
        assert!(matches!(*l, Ast::Neg(ref x) if matches!(**x, Ast::Pow(_, 2))));
        assert!(matches!(*r, Ast::Div(..)));
    }

    #[test]
    fn derivative_forms() {
        assert!(matches!(parse("(u^2)_xx").unwrap(), Ast::Deriv(_, ref s, _) if s == &vec![("x".to_string(), 2)]));
        let Ast::U(spec, _) = parse("D[u, {tau,2}, {x,1}]").unwrap() else { panic!() };
        assert_eq!(spec, vec![("tau".to_string(), 2), ("x".to_string(), 1)]);
        assert!(matches!(parse("D[v, {t,1}]"), Err(ParseError::SyntaxError { .. })));
        assert!(matches!(parse("a_x"), Err(ParseError::SyntaxError { .. })));
    }

    #[test]
    fn syntax_error_positions() {
        let Err(ParseError::SyntaxError { pos, found, .. }) = parse("u_tt +\n  * u") else { panic!() };
        assert_eq!(pos, Pos { line: 2, col: 3 });
        assert_eq!(found, "`*`");
        assert!(parse("(u").is_err());
        assert!(parse("u^x").is_err());
    }
}
