//! Tokens for `.pde` documents, transform scripts and inline expressions.

use num_bigint::BigInt;

use crate::error::{ParseError, Pos};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    /// Letters and digits, starting with a letter, optionally followed by primes.
    Ident(String),
    Int(BigInt),
    /// Decimal literal as digits and the number of fractional digits.
    Decimal(BigInt, u32),
    /// `_` followed by a run of letters and primes, as in `u_tt` or `(u^2)_x'x'`.
    Subscript(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Eq,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Decimal(..) => "decimal number".into(),
            Tok::Subscript(s) => format!("`_{s}`"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Caret => "^",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Eq => "=",
            _ => "",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
    /// A line break separates this token from the previous one.
    pub line_start: bool,
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let mut line_start = true;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            line_start = true;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let pos = Pos { line, col };
        let start = i;
        let tok = if c.is_alphabetic() {
            while i < chars.len() && chars[i].is_alphanumeric() {
                i += 1;
            }
            while i < chars.len() && chars[i] == '\'' {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let int: String = chars[start..i].iter().collect();
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                i += 1;
                let frac_start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let frac: String = chars[frac_start..i].iter().collect();
                let digits: BigInt = format!("{int}{frac}").parse().expect("ascii digits");
                Tok::Decimal(digits, frac.len() as u32)
            } else {
                Tok::Int(int.parse().expect("ascii digits"))
            }
        } else if c == '_' {
            i += 1;
            let run_start = i;
            while i < chars.len() && (chars[i].is_alphabetic() || chars[i] == '\'') {
                i += 1;
            }
            if i == run_start {
                return Err(ParseError::syntax(pos, &["variable letters after `_`"], "`_`"));
            }
            Tok::Subscript(chars[run_start..i].iter().collect())
        } else {
            i += 1;
            match c {
                '+' => Tok::Plus,
                '-' | '−' => Tok::Minus,
                '*' | '·' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                '=' => Tok::Eq,
                other => return Err(ParseError::syntax(pos, &["a token"], &format!("`{other}`"))),
            }
        };
        col += i - start;
        out.push(Token { tok, pos, line_start });
        line_start = false;
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
        line_start: true,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn subscripts_and_primes() {
        assert_eq!(
            toks("u_x'x' + (u^2)_tt"),
            vec![
                Tok::Ident("u".into()),
                Tok::Subscript("x'x'".into()),
                Tok::Plus,
                Tok::LParen,
                Tok::Ident("u".into()),
                Tok::Caret,
                Tok::Int(2.into()),
                Tok::RParen,
                Tok::Subscript("tt".into()),
                Tok::Eof,
            ]
        );
        assert_eq!(toks("t' = t"), vec![Tok::Ident("t'".into()), Tok::Eq, Tok::Ident("t".into()), Tok::Eof]);
    }

    #[test]
    fn numbers_comments_and_lines() {
        assert_eq!(toks("1.25 # note\n3"), vec![Tok::Decimal(125.into(), 2), Tok::Int(3.into()), Tok::Eof]);
        let t = tokenize("a\nb c").unwrap();
        assert!(t[1].line_start && !t[2].line_start);
        assert_eq!(t[2].pos, Pos { line: 2, col: 3 });
        assert!(tokenize("u_").is_err());
        assert!(tokenize("a ! b").is_err());
    }
}
