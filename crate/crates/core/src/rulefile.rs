//! Rule files (`.crs`).
//!
//! ```text
//! # comment
//! system filter ;
//! sig filter/2 cons/2 nil/0 true false ;
//! rule f2: filter p (cons x l) -> cons x (filter p l) if p x = true ;
//! claim left_linear = yes ;
//! ```
//!
//! Symbols must be declared by a `sig` statement before use; every other
//! identifier in a term is a variable. Arities are optional.

use std::fmt;

use thiserror::Error;

use crate::rules::{CondRule, Condition, RuleSystem, Signature, SystemError};
use crate::syntax::{lex, ParseError, Tok, TermParser};
use crate::term::{name, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleFileError {
    #[error("{0}")]
    Syntax(#[from] ParseError),
    #[error("{line}:{col}: undeclared symbol `{symbol}` heads a left-hand side")]
    UndeclaredSymbol {
        line: usize,
        col: usize,
        symbol: String,
    },
    #[error("{line}:{col}: {source}")]
    System {
        line: usize,
        col: usize,
        source: SystemError,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleFile {
    pub name: Option<String>,
    pub signature: Signature,
    pub rules: Vec<CondRule>,
    /// `claim key = value ;` lines, in order.
    pub claims: Vec<(String, String)>,
}

impl RuleFile {
    /// The rule system; `fallback_name` is used when the file names none.
    pub fn to_system(&self, fallback_name: &str) -> Result<RuleSystem, SystemError> {
        RuleSystem::new(
            self.name.as_deref().unwrap_or(fallback_name),
            self.signature.clone(),
            self.rules.clone(),
        )
    }
}

pub fn parse_rulefile(text: &str) -> Result<RuleFile, RuleFileError> {
    let toks = lex(text)?;
    let mut sig = Signature::new();
    let mut rules: Vec<CondRule> = Vec::new();
    let mut claims = Vec::new();
    let mut file_name = None;
    let mut pos = 0;
    loop {
        let sig_view = sig.clone();
        let is_symbol = move |s: &str| sig_view.contains(s);
        let mut p = TermParser::new(&toks, &is_symbol);
        p.pos = pos;
        let head = p.peek().clone();
        if head.tok == Tok::Eof {
            break;
        }
        let kw = p.ident()?;
        match kw.as_str() {
            "system" => {
                file_name = Some(p.ident()?);
                p.expect(Tok::Semi)?;
            }
            "sig" => {
                while let Tok::Ident(_) = p.peek().tok {
                    let at = p.peek().clone();
                    let f = p.ident()?;
                    let arity = if p.peek().tok == Tok::Slash {
                        p.bump();
                        let at = p.peek().clone();
                        match p.bump().tok {
                            Tok::Num(n) => Some(n),
                            _ => {
                                return Err(ParseError {
                                    line: at.line,
                                    col: at.col,
                                    message: "expected arity after `/`".into(),
                                }
                                .into())
                            }
                        }
                    } else {
                        None
                    };
                    sig.declare(&f, arity).map_err(|source| RuleFileError::System {
                        line: at.line,
                        col: at.col,
                        source,
                    })?;
                }
                p.expect(Tok::Semi)?;
            }
            "rule" => {
                let rname = p.ident()?;
                p.expect(Tok::Colon)?;
                let lhs_at = p.peek().clone();
                let lhs = p.term()?;
                p.expect(Tok::Arrow)?;
                let rhs = p.term()?;
                let mut conditions = Vec::new();
                if matches!(&p.peek().tok, Tok::Ident(s) if s == "if") {
                    p.bump();
                    loop {
                        let d = p.term()?;
                        p.expect(Tok::Eq)?;
                        let c = p.term()?;
                        conditions.push(Condition { lhs: d, rhs: c });
                        if p.peek().tok == Tok::Comma {
                            p.bump();
                        } else {
                            break;
                        }
                    }
                }
                p.expect(Tok::Semi)?;
                if let (Term::Var(x), n) = (lhs.spine().0, lhs.spine().1.len()) {
                    if n > 0 {
                        return Err(RuleFileError::UndeclaredSymbol {
                            line: lhs_at.line,
                            col: lhs_at.col,
                            symbol: x.to_string(),
                        });
                    }
                }
                if rules.iter().any(|r| *r.name == *rname) {
                    return Err(RuleFileError::System {
                        line: head.line,
                        col: head.col,
                        source: SystemError::DuplicateRule(name(&rname)),
                    });
                }
                rules.push(CondRule {
                    name: name(&rname),
                    conditions,
                    lhs,
                    rhs,
                });
            }
            "claim" => {
                let key = p.ident()?;
                p.expect(Tok::Eq)?;
                let mut value = String::new();
                loop {
                    match p.peek().tok.clone() {
                        Tok::Ident(s) => value.push_str(&s),
                        Tok::Num(n) => value.push_str(&n.to_string()),
                        Tok::Dot => value.push('.'),
                        Tok::Semi if !value.is_empty() => break,
                        other => {
                            return Err(ParseError {
                                line: p.peek().line,
                                col: p.peek().col,
                                message: format!("expected claim value, found {other}"),
                            }
                            .into())
                        }
                    }
                    p.bump();
                }
                p.expect(Tok::Semi)?;
                claims.push((key, value));
            }
            other => {
                return Err(ParseError {
                    line: head.line,
                    col: head.col,
                    message: format!("expected `system`, `sig`, `rule` or `claim`, found `{other}`"),
                }
                .into())
            }
        }
        pos = p.pos;
    }
    Ok(RuleFile {
        name: file_name,
        signature: sig,
        rules,
        claims,
    })
}

impl fmt::Display for RuleFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = &self.name {
            writeln!(f, "system {n} ;")?;
        }
        if !self.signature.is_empty() {
            f.write_str("sig")?;
            for (s, a) in self.signature.iter() {
                match a {
                    Some(a) => write!(f, " {s}/{a}")?,
                    None => write!(f, " {s}")?,
                }
            }
            writeln!(f, " ;")?;
        }
        for r in &self.rules {
            writeln!(f, "rule {r} ;")?;
        }
        for (k, v) in &self.claims {
            writeln!(f, "claim {k} = {v} ;")?;
        }
        Ok(())
    }
}

/// Prints a system in rule-file syntax.
pub fn print_system(rs: &RuleSystem) -> String {
    RuleFile {
        name: Some(rs.name.clone()),
        signature: rs.signature.clone(),
        rules: rs.rules.clone(),
        claims: Vec::new(),
    }
    .to_string()
}
