//! Concrete syntax: `\x. t` abstraction (also `λx. t`), left-associative
//! juxtaposition, parentheses, identifiers `[a-zA-Z_][a-zA-Z0-9_']*`.
//! An identifier is a symbol when the signature declares it and no enclosing
//! binder shadows it; otherwise it is a variable. `if` is reserved.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::term::{fresh_name, name, Name, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(usize),
    Lambda,
    Dot,
    LParen,
    RParen,
    Arrow,
    Eq,
    Comma,
    Semi,
    Colon,
    Slash,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Num(n) => write!(f, "`{n}`"),
            Tok::Lambda => f.write_str("`\\`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (l, k) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        let tok = match c {
            c if c.is_whitespace() => {
                bump(&mut chars);
                continue;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump(&mut chars);
                }
                continue;
            }
            '\\' | 'λ' => {
                bump(&mut chars);
                Tok::Lambda
            }
            '.' => {
                bump(&mut chars);
                Tok::Dot
            }
            '(' => {
                bump(&mut chars);
                Tok::LParen
            }
            ')' => {
                bump(&mut chars);
                Tok::RParen
            }
            '=' => {
                bump(&mut chars);
                Tok::Eq
            }
            ',' => {
                bump(&mut chars);
                Tok::Comma
            }
            ';' => {
                bump(&mut chars);
                Tok::Semi
            }
            ':' => {
                bump(&mut chars);
                Tok::Colon
            }
            '/' => {
                bump(&mut chars);
                Tok::Slash
            }
            '-' => {
                bump(&mut chars);
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    Tok::Arrow
                } else {
                    return Err(ParseError {
                        line: l,
                        col: k,
                        message: "expected `->`".into(),
                    });
                }
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if !c.is_ascii_digit() {
                        break;
                    }
                    s.push(c);
                    bump(&mut chars);
                }
                Tok::Num(s.parse().map_err(|_| ParseError {
                    line: l,
                    col: k,
                    message: "number too large".into(),
                })?)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    let dash = c == '-' && {
                        let mut ahead = chars.clone();
                        ahead.next();
                        ahead.peek().is_some_and(|d| d.is_ascii_alphanumeric())
                    };
                    if !(c.is_ascii_alphanumeric() || c == '_' || c == '\'' || dash) {
                        break;
                    }
                    s.push(c);
                    bump(&mut chars);
                }
                Tok::Ident(s)
            }
            other => {
                return Err(ParseError {
                    line: l,
                    col: k,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push(Spanned { tok, line: l, col: k });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

/// Recursive-descent term parser over a token stream.
pub struct TermParser<'a> {
    toks: &'a [Spanned],
    pub pos: usize,
    is_symbol: &'a dyn Fn(&str) -> bool,
    scope: Vec<Name>,
}

impl<'a> TermParser<'a> {
    pub fn new(toks: &'a [Spanned], is_symbol: &'a dyn Fn(&str) -> bool) -> Self {
        TermParser {
            toks,
            pos: 0,
            is_symbol,
            scope: Vec::new(),
        }
    }

    pub fn peek(&self) -> &Spanned {
        &self.toks[self.pos.min(self.toks.len() - 1)]
    }

    pub fn bump(&mut self) -> Spanned {
        let t = self.peek().clone();
        if self.pos < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let t = self.peek();
        Err(ParseError {
            line: t.line,
            col: t.col,
            message: message.into(),
        })
    }

    pub fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if self.peek().tok == tok {
            self.bump();
            Ok(())
        } else {
            let found = self.peek().tok.clone();
            self.error(format!("expected {tok}, found {found}"))
        }
    }

    pub fn ident(&mut self) -> Result<String, ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            other => {
                let other = other.clone();
                self.error(format!("expected identifier, found {other}"))
            }
        }
    }

    fn starts_atom(&self) -> bool {
        match &self.peek().tok {
            Tok::Ident(s) => s != "if",
            Tok::LParen => true,
            _ => false,
        }
    }

    pub fn term(&mut self) -> Result<Term, ParseError> {
        if self.peek().tok == Tok::Lambda {
            self.bump();
            let mut binders = Vec::new();
            while let Tok::Ident(s) = &self.peek().tok {
                if s == "if" {
                    break;
                }
                binders.push(name(s));
                self.bump();
            }
            if binders.is_empty() {
                return self.error("expected binder after `\\`");
            }
            self.expect(Tok::Dot)?;
            let depth = self.scope.len();
            self.scope.extend(binders.iter().cloned());
            let body = self.term();
            self.scope.truncate(depth);
            let body = body?;
            return Ok(binders
                .iter()
                .rev()
                .fold(body, |b, x| Term::lam(x, b)));
        }
        if !self.starts_atom() {
            let found = self.peek().tok.clone();
            return self.error(format!("expected a term, found {found}"));
        }
        let mut t = self.atom()?;
        while self.starts_atom() {
            let a = self.atom()?;
            t = Term::app(t, a);
        }
        Ok(t)
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        if self.peek().tok == Tok::LParen {
            self.bump();
            let t = self.term()?;
            self.expect(Tok::RParen)?;
            return Ok(t);
        }
        let s = self.ident()?;
        if self.scope.iter().any(|b| **b == *s) {
            Ok(Term::var(&s))
        } else if (self.is_symbol)(&s) {
            Ok(Term::sym(&s))
        } else {
            Ok(Term::var(&s))
        }
    }
}

/// Parses a whole term; identifiers accepted by `is_symbol` become symbols.
pub fn parse_term(text: &str, is_symbol: &dyn Fn(&str) -> bool) -> Result<Term, ParseError> {
    let toks = lex(text)?;
    let mut p = TermParser::new(&toks, is_symbol);
    let t = p.term()?;
    if p.peek().tok != Tok::Eof {
        let found = p.peek().tok.clone();
        return p.error(format!("unexpected {found} after term"));
    }
    Ok(t)
}

#[derive(Clone, Copy, PartialEq)]
enum Ctx {
    Top,
    Fun,
    Arg,
}

fn write_term(t: &Term, scope: &mut Vec<Name>, ctx: Ctx, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Term::Var(x) | Term::Sym(x) => f.write_str(x),
        Term::Bound(k) => match scope.len().checked_sub(*k as usize + 1) {
            Some(i) => f.write_str(&scope[i]),
            None => write!(f, "#{k}"),
        },
        Term::App(g, a) => {
            if ctx == Ctx::Arg {
                f.write_str("(")?;
            }
            write_term(g, scope, Ctx::Fun, f)?;
            f.write_str(" ")?;
            write_term(a, scope, Ctx::Arg, f)?;
            if ctx == Ctx::Arg {
                f.write_str(")")?;
            }
            Ok(())
        }
        Term::Lam(h, body) => {
            let mut taken: BTreeSet<Name> = body.free_vars();
            taken.extend(body.symbols());
            for k in body.loose_indices() {
                if k == 0 {
                    continue;
                }
                if let Some(i) = scope.len().checked_sub(k as usize) {
                    taken.insert(scope[i].clone());
                }
            }
            let x = fresh_name(&h.0, &taken);
            if ctx != Ctx::Top {
                f.write_str("(")?;
            }
            write!(f, "\\{x}. ")?;
            scope.push(x);
            let r = write_term(body, scope, Ctx::Top, f);
            scope.pop();
            r?;
            if ctx != Ctx::Top {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(self, &mut Vec::new(), Ctx::Top, f)
    }
}
