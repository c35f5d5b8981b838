//! Conditional rules `d1 = c1, .., dn = cn ⊃ l -> r`, rule systems, validation
//! and the syntactic classifiers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use indexmap::IndexMap;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::beta::is_beta_normal;
use crate::critical::{orthonormal_check, Orthonormality};
use crate::syntax::{parse_term, ParseError};
use crate::term::{name, Arity, ArityError, Name, Term};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Condition {
    pub lhs: Term,
    pub rhs: Term,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CondRule {
    pub name: Name,
    pub conditions: Vec<Condition>,
    pub lhs: Term,
    pub rhs: Term,
}

impl CondRule {
    pub fn new(name_: &str, lhs: Term, rhs: Term) -> CondRule {
        CondRule {
            name: name(name_),
            conditions: Vec::new(),
            lhs,
            rhs,
        }
    }

    pub fn with_condition(mut self, lhs: Term, rhs: Term) -> CondRule {
        self.conditions.push(Condition { lhs, rhs });
        self
    }

    pub fn is_conditional(&self) -> bool {
        !self.conditions.is_empty()
    }

    /// Symbol heading the left-hand side and its number of arguments.
    pub fn defined_symbol(&self) -> Option<(Name, usize)> {
        self.lhs.head_symbol().map(|(f, n)| (f.clone(), n))
    }

    /// Every term of the rule: lhs, rhs, then each condition side.
    pub fn terms(&self) -> Vec<&Term> {
        let mut v = vec![&self.lhs, &self.rhs];
        for c in &self.conditions {
            v.push(&c.lhs);
            v.push(&c.rhs);
        }
        v
    }
}

impl fmt::Display for CondRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} -> {}", self.name, self.lhs, self.rhs)?;
        for (k, c) in self.conditions.iter().enumerate() {
            f.write_str(if k == 0 { " if " } else { ", " })?;
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SystemError {
    #[error("duplicate rule name `{0}`")]
    DuplicateRule(Name),
    #[error("undeclared symbol `{0}`")]
    UndeclaredSymbol(Name),
    #[error("arity of `{symbol}` declared as {first} and as {second}")]
    ArityRedeclared {
        symbol: Name,
        first: usize,
        second: usize,
    },
}

/// Declared symbols in declaration order, each with an optional arity.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    symbols: IndexMap<Name, Option<usize>>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares `f`, or adds an arity to an earlier declaration.
    pub fn declare(&mut self, f: &str, arity: Option<usize>) -> Result<(), SystemError> {
        match self.symbols.get_mut(f) {
            Some(slot) => match (*slot, arity) {
                (Some(a), Some(b)) if a != b => Err(SystemError::ArityRedeclared {
                    symbol: name(f),
                    first: a,
                    second: b,
                }),
                (None, Some(b)) => {
                    *slot = Some(b);
                    Ok(())
                }
                _ => Ok(()),
            },
            None => {
                self.symbols.insert(name(f), arity);
                Ok(())
            }
        }
    }

    pub fn with(mut self, f: &str, arity: usize) -> Self {
        self.declare(f, Some(arity)).expect("fresh declaration");
        self
    }

    pub fn contains(&self, f: &str) -> bool {
        self.symbols.contains_key(f)
    }

    pub fn declared_arity(&self, f: &str) -> Option<usize> {
        self.symbols.get(f).copied().flatten()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, Option<usize>)> {
        self.symbols.iter().map(|(k, v)| (k, *v))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// The declared arity map, when every symbol has one.
    pub fn arity(&self) -> Option<Arity> {
        self.symbols
            .iter()
            .map(|(k, v)| v.map(|a| (k.clone(), a)))
            .collect()
    }

    pub fn parse_term(&self, text: &str) -> Result<Term, ParseError> {
        parse_term(text, &|s| self.contains(s))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSystem {
    pub name: String,
    pub signature: Signature,
    pub rules: Vec<CondRule>,
}

impl RuleSystem {
    pub fn new(name_: &str, signature: Signature, rules: Vec<CondRule>) -> Result<Self, SystemError> {
        let mut seen = BTreeSet::new();
        for r in &rules {
            if !seen.insert(r.name.clone()) {
                return Err(SystemError::DuplicateRule(r.name.clone()));
            }
            for t in r.terms() {
                for f in t.symbols() {
                    if !signature.contains(&f) {
                        return Err(SystemError::UndeclaredSymbol(f));
                    }
                }
            }
        }
        Ok(RuleSystem {
            name: name_.to_string(),
            signature,
            rules,
        })
    }

    pub fn parse_term(&self, text: &str) -> Result<Term, ParseError> {
        self.signature.parse_term(text)
    }

    pub fn rule(&self, name: &str) -> Option<&CondRule> {
        self.rules.iter().find(|r| &*r.name == name)
    }

    pub fn arity(&self) -> Option<Arity> {
        self.signature.arity()
    }

    /// Symbols heading some left-hand side.
    pub fn defined_symbols(&self) -> BTreeSet<Name> {
        self.rules
            .iter()
            .filter_map(|r| r.defined_symbol().map(|(f, _)| f))
            .collect()
    }

    pub fn is_unconditional(&self) -> bool {
        self.rules.iter().all(|r| !r.is_conditional())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    LhsIsVariable,
    LhsNotAlgebraic,
    ExtraVariable(Name),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: Name,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ViolationKind::LhsIsVariable => write!(f, "rule `{}`: left-hand side is a variable", self.rule),
            ViolationKind::LhsNotAlgebraic => {
                write!(f, "rule `{}`: left-hand side is not algebraic", self.rule)
            }
            ViolationKind::ExtraVariable(x) => write!(
                f,
                "rule `{}`: variable `{x}` does not occur in the left-hand side",
                self.rule
            ),
        }
    }
}

pub fn validate(rs: &RuleSystem) -> Vec<Violation> {
    let mut out = Vec::new();
    for r in &rs.rules {
        let v = |kind| Violation {
            rule: r.name.clone(),
            kind,
        };
        if r.lhs.is_var() {
            out.push(v(ViolationKind::LhsIsVariable));
            continue;
        }
        if !r.lhs.is_algebraic() || r.lhs.head_symbol().is_none() {
            out.push(v(ViolationKind::LhsNotAlgebraic));
        }
        let lv = r.lhs.free_vars();
        let mut extra = BTreeSet::new();
        for t in r.terms().into_iter().skip(1) {
            extra.extend(t.free_vars().into_iter().filter(|x| !lv.contains(x)));
        }
        out.extend(extra.into_iter().map(|x| v(ViolationKind::ExtraVariable(x))));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Tri {
    True,
    False,
    Unknown,
}

impl Tri {
    pub fn is_true(self) -> bool {
        self == Tri::True
    }
}

impl fmt::Display for Tri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tri::True => "yes",
            Tri::False => "no",
            Tri::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Flag {
    pub value: Tri,
    pub reason: String,
}

impl Flag {
    fn yes(reason: impl Into<String>) -> Flag {
        Flag {
            value: Tri::True,
            reason: reason.into(),
        }
    }
    fn no(reason: impl Into<String>) -> Flag {
        Flag {
            value: Tri::False,
            reason: reason.into(),
        }
    }
    fn unknown(reason: impl Into<String>) -> Flag {
        Flag {
            value: Tri::Unknown,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub left_linear: Flag,
    pub semi_closed: Flag,
    pub right_applicative: Flag,
    pub right_algebraic: Flag,
    pub applicative: Flag,
    pub algebraic: Flag,
    pub respects_arity: Flag,
    pub orthonormal: Flag,
    /// Condition right-hand sides are closed normal forms.
    pub normal: Flag,
}

/// Names of the classification flags, in display order.
pub const FLAG_NAMES: [&str; 9] = [
    "left_linear",
    "semi_closed",
    "right_applicative",
    "right_algebraic",
    "applicative",
    "algebraic",
    "respects_arity",
    "orthonormal",
    "normal",
];

impl Classification {
    pub fn flag(&self, flag: &str) -> Option<&Flag> {
        Some(match flag {
            "left_linear" => &self.left_linear,
            "semi_closed" => &self.semi_closed,
            "right_applicative" => &self.right_applicative,
            "right_algebraic" => &self.right_algebraic,
            "applicative" => &self.applicative,
            "algebraic" => &self.algebraic,
            "respects_arity" => &self.respects_arity,
            "orthonormal" => &self.orthonormal,
            "normal" => &self.normal,
            _ => return None,
        })
    }
}

/// First rule whose terms fail `pred`, as a reason.
fn first_failure<'a>(
    rs: &'a RuleSystem,
    pick: impl Fn(&'a CondRule) -> Vec<&'a Term>,
    pred: impl Fn(&Term) -> bool,
) -> Option<String> {
    for r in &rs.rules {
        for t in pick(r) {
            if !pred(t) {
                return Some(format!("rule `{}`: `{t}`", r.name));
            }
        }
    }
    None
}

fn cond_rhs(r: &CondRule) -> Vec<&Term> {
    r.conditions.iter().map(|c| &c.rhs).collect()
}

fn cond_all(r: &CondRule) -> Vec<&Term> {
    r.conditions.iter().flat_map(|c| [&c.lhs, &c.rhs]).collect()
}

/// Closed beta-normal forms free of defined symbols.
pub fn is_constructor_normal(t: &Term, defined: &BTreeSet<Name>) -> bool {
    t.is_closed() && is_beta_normal(t) && t.symbols().is_disjoint(defined)
}

pub fn classify_system(rs: &RuleSystem) -> Classification {
    let left_linear = match rs.rules.iter().find(|r| !r.lhs.is_linear()) {
        Some(r) => Flag::no(format!("rule `{}`: left-hand side `{}` is not linear", r.name, r.lhs)),
        None => Flag::yes("every left-hand side is linear"),
    };
    let semi_closed = match first_failure(rs, cond_rhs, |t| t.is_applicative() && t.is_closed()) {
        Some(w) => Flag::no(format!("{w} is not an applicative closed term")),
        None => Flag::yes("every condition right-hand side is applicative and closed"),
    };
    let right_applicative = match first_failure(rs, |r| vec![&r.rhs], Term::is_applicative) {
        Some(w) => Flag::no(format!("{w} contains an abstraction")),
        None => Flag::yes("every right-hand side is applicative"),
    };
    let right_algebraic = match first_failure(rs, |r| vec![&r.rhs], Term::is_algebraic) {
        Some(w) => Flag::no(format!("{w} is not algebraic")),
        None => Flag::yes("every right-hand side is algebraic"),
    };
    let applicative = if right_applicative.value != Tri::True {
        Flag::no("not right-applicative")
    } else {
        match first_failure(rs, cond_all, Term::is_applicative) {
            Some(w) => Flag::no(format!("condition {w} contains an abstraction")),
            None => Flag::yes("right-hand sides and conditions are applicative"),
        }
    };
    let algebraic = if right_algebraic.value != Tri::True {
        Flag::no("not right-algebraic")
    } else {
        match first_failure(rs, cond_all, Term::is_algebraic) {
            Some(w) => Flag::no(format!("condition {w} is not algebraic")),
            None => Flag::yes("right-hand sides and conditions are algebraic"),
        }
    };
    let respects_arity = match rs.arity() {
        None => Flag::unknown("no arity declared for some symbol"),
        Some(alpha) => match respects_arity_system(rs, &alpha) {
            Ok(true) => Flag::yes("every rule respects the declared arity"),
            Ok(false) => Flag::no(
                arity_failure(rs, &alpha).unwrap_or_else(|| "arity violated".to_string()),
            ),
            Err(e) => Flag::unknown(e.to_string()),
        },
    };
    let defined = rs.defined_symbols();
    let normal = match first_failure(rs, cond_rhs, |t| is_constructor_normal(t, &defined)) {
        None => Flag::yes("every condition right-hand side is a closed beta-normal constructor term"),
        Some(w) => Flag::unknown(format!("{w} is not a closed constructor normal form")),
    };
    let orthonormal = match orthonormal_check(rs) {
        Orthonormality::True => Flag::yes("left-linear, constructor conditions, every critical pair has contradictory conditions"),
        Orthonormality::False(reason) => Flag::no(reason),
    };
    Classification {
        left_linear,
        semi_closed,
        right_applicative,
        right_algebraic,
        applicative,
        algebraic,
        respects_arity,
        orthonormal,
        normal,
    }
}

/// Every left-hand side applies its head to exactly its arity, and no term of
/// a rule over-applies a symbol.
pub fn respects_arity_system(rs: &RuleSystem, alpha: &Arity) -> Result<bool, ArityError> {
    for r in &rs.rules {
        if let Some((f, n)) = r.defined_symbol() {
            let a = *alpha.get(&f).ok_or_else(|| ArityError::MissingArity(f.clone()))?;
            if a != n {
                return Ok(false);
            }
        }
        for t in r.terms() {
            if !t.respects_arity(alpha)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn arity_failure(rs: &RuleSystem, alpha: &Arity) -> Option<String> {
    for r in &rs.rules {
        if let Some((f, n)) = r.defined_symbol() {
            if alpha.get(&f) != Some(&n) {
                return Some(format!("rule `{}`: `{f}` applied to {n} arguments in the left-hand side", r.name));
            }
        }
        for t in r.terms() {
            if t.respects_arity(alpha) != Ok(true) {
                return Some(format!("rule `{}`: `{t}` over-applies a symbol", r.name));
            }
        }
    }
    None
}

/// The unconditional system pairing each left-hand side with each condition
/// left-hand side and with its right-hand side.
pub fn stability_system(rs: &RuleSystem) -> RuleSystem {
    let mut rules = Vec::new();
    for r in &rs.rules {
        for (k, c) in r.conditions.iter().enumerate() {
            rules.push(CondRule::new(
                &format!("{}_d{}", r.name, k + 1),
                r.lhs.clone(),
                c.lhs.clone(),
            ));
        }
        rules.push(CondRule::new(&format!("{}_r", r.name), r.lhs.clone(), r.rhs.clone()));
    }
    RuleSystem {
        name: format!("{}-bar", rs.name),
        signature: rs.signature.clone(),
        rules,
    }
}

/// Arities read off the rules: defined symbols take their left-hand side
/// argument count, other symbols the longest spine they head.
pub fn infer_arity(rs: &RuleSystem) -> Option<Arity> {
    let mut alpha: Arity = BTreeMap::new();
    for r in &rs.rules {
        let (f, n) = r.defined_symbol()?;
        match alpha.get(&f) {
            Some(&m) if m != n => return None,
            _ => {
                alpha.insert(f, n);
            }
        }
    }
    let defined: BTreeSet<Name> = alpha.keys().cloned().collect();
    let mut observed: Arity = BTreeMap::new();
    fn spines(t: &Term, out: &mut Arity) {
        let (head, args) = t.spine();
        match head {
            Term::Sym(f) => {
                let e = out.entry(f.clone()).or_insert(0);
                *e = (*e).max(args.len());
            }
            Term::Lam(_, b) => spines(b, out),
            _ => {}
        }
        for a in args {
            spines(a, out);
        }
    }
    for r in &rs.rules {
        for t in r.terms() {
            spines(t, &mut observed);
        }
    }
    for (f, _) in rs.signature.iter() {
        if !defined.contains(f) {
            alpha.insert(f.clone(), observed.get(f).copied().unwrap_or(0));
        }
    }
    match respects_arity_system(rs, &alpha) {
        Ok(true) => Some(alpha),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Theorem {
    /// Left-linear semi-closed right-applicative: confluence of R lifts to beta ∪ R.
    LeftLinearSemiClosed,
    /// Left-linear semi-closed normal systems.
    NormalSemiClosed,
    /// Algebraic arity-respecting: confluence on terms with arity-respecting beta-normal forms.
    ArityNormalForms,
    /// Left-linear semi-closed algebraic arity-respecting: confluence on stable sets.
    StableSets,
    /// Algebraic arity-respecting, beta-conditional version.
    ArityNormalFormsBeta,
    /// Orthonormal: shallow confluence.
    Orthonormal,
}

impl Theorem {
    pub const ALL: [Theorem; 6] = [
        Theorem::LeftLinearSemiClosed,
        Theorem::NormalSemiClosed,
        Theorem::ArityNormalForms,
        Theorem::StableSets,
        Theorem::ArityNormalFormsBeta,
        Theorem::Orthonormal,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Theorem::LeftLinearSemiClosed => "Thm-4.3",
            Theorem::NormalSemiClosed => "Thm-4.4",
            Theorem::ArityNormalForms => "Thm-4.6",
            Theorem::StableSets => "Thm-5.4",
            Theorem::ArityNormalFormsBeta => "Thm-5.7",
            Theorem::Orthonormal => "Thm-6.6",
        }
    }

    pub fn from_label(s: &str) -> Option<Theorem> {
        Theorem::ALL.into_iter().find(|t| t.label() == s)
    }

    pub fn hypotheses(self) -> &'static [&'static str] {
        match self {
            Theorem::LeftLinearSemiClosed => &["left_linear", "semi_closed", "right_applicative"],
            Theorem::NormalSemiClosed => &["left_linear", "semi_closed", "normal"],
            Theorem::ArityNormalForms | Theorem::ArityNormalFormsBeta => &["algebraic", "respects_arity"],
            Theorem::StableSets => &["left_linear", "semi_closed", "algebraic", "respects_arity"],
            Theorem::Orthonormal => &["orthonormal"],
        }
    }

    /// Side conditions the classifier does not check.
    pub fn assumption(self) -> &'static str {
        match self {
            Theorem::LeftLinearSemiClosed => "if ->R is confluent then ->(beta ∪ R) is confluent",
            Theorem::NormalSemiClosed => "if ->R is confluent then the normal conditional relation with beta is confluent",
            Theorem::ArityNormalForms => "if ->R is confluent then ->(beta ∪ R) is confluent on AN_alpha",
            Theorem::StableSets => "if ->R is confluent then ->(beta ∪ R) is confluent on every conditionally (R,alpha)-stable set",
            Theorem::ArityNormalFormsBeta => "if ->R is confluent then ->(beta ∪ R(beta)) is confluent on AN_alpha",
            Theorem::Orthonormal => "->(beta ∪ R(beta)) is shallow confluent, hence confluent",
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl Serialize for Theorem {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TheoremVerdict {
    pub applicable: Vec<Theorem>,
    pub hypotheses_unmet: BTreeMap<Theorem, Vec<String>>,
    pub assumptions: BTreeMap<Theorem, String>,
}

pub fn applicable_theorems(c: &Classification) -> TheoremVerdict {
    let mut applicable = Vec::new();
    let mut hypotheses_unmet = BTreeMap::new();
    let mut assumptions = BTreeMap::new();
    for th in Theorem::ALL {
        let missing: Vec<String> = th
            .hypotheses()
            .iter()
            .filter(|h| !c.flag(h).is_some_and(|f| f.value.is_true()))
            .map(|h| h.to_string())
            .collect();
        if missing.is_empty() {
            applicable.push(th);
            assumptions.insert(th, th.assumption().to_string());
        } else {
            hypotheses_unmet.insert(th, missing);
        }
    }
    TheoremVerdict {
        applicable,
        hypotheses_unmet,
        assumptions,
    }
}
