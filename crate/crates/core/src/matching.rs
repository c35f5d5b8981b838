//! First-order matching of algebraic patterns against arbitrary terms, and
//! Robinson unification of algebraic terms with occurs-check.

use serde::Serialize;
use thiserror::Error;

use crate::position::Position;
use crate::rules::{CondRule, RuleSystem};
use crate::term::{Name, Substitution, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("pattern `{0}` is not algebraic")]
    NotAlgebraicPattern(Term),
    #[error("term `{0}` is not algebraic")]
    NotAlgebraic(Term),
}

/// Matches `pattern` against `subject`. Repeated pattern variables must bind
/// alpha-equal subterms.
pub fn match_pattern(pattern: &Term, subject: &Term) -> Result<Option<Substitution>, MatchError> {
    if !pattern.is_algebraic() {
        return Err(MatchError::NotAlgebraicPattern(pattern.clone()));
    }
    let mut s = Substitution::new();
    Ok(match_into(pattern, subject, &mut s).then_some(s))
}

/// Matching without the pattern check; extends `s`.
pub fn match_into(pattern: &Term, subject: &Term, s: &mut Substitution) -> bool {
    match (pattern, subject) {
        (Term::Var(x), _) => match s.get(x) {
            Some(bound) => bound == subject,
            None => {
                s.insert(x.clone(), subject.clone());
                true
            }
        },
        (Term::Sym(f), Term::Sym(g)) => f == g,
        (Term::App(pf, pa), Term::App(sf, sa)) => match_into(pf, sf, s) && match_into(pa, sa, s),
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Redex<'a> {
    pub position: Position,
    #[serde(serialize_with = "rule_name")]
    pub rule: &'a CondRule,
    pub substitution: Substitution,
}

fn rule_name<S: serde::Serializer>(r: &&CondRule, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.name)
}

/// Whether the lhs can match a term with this spine head and length.
pub fn head_fits(rule: &CondRule, subject: &Term) -> bool {
    match (rule.lhs.head_symbol(), subject.head_symbol()) {
        (Some((f, n)), Some((g, m))) => f == g && n == m,
        _ => false,
    }
}

/// Rule matches at `t`'s root, in rule order.
pub fn root_matches<'a>(rs: &'a RuleSystem, t: &Term) -> Vec<(&'a CondRule, Substitution)> {
    let mut out = Vec::new();
    for r in &rs.rules {
        if !head_fits(r, t) {
            continue;
        }
        let mut s = Substitution::new();
        if match_into(&r.lhs, t, &mut s) {
            out.push((r, s));
        }
    }
    out
}

/// Every rule match in `t`, leftmost-outermost, conditions unchecked.
pub fn find_redexes<'a>(rs: &'a RuleSystem, t: &Term) -> Vec<Redex<'a>> {
    let mut out = Vec::new();
    for (p, s) in t.positions() {
        for (rule, substitution) in root_matches(rs, s) {
            out.push(Redex {
                position: p.clone(),
                rule,
                substitution,
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Unifier {
    Unified(Substitution),
    Clash,
    OccursCheck,
}

impl Unifier {
    pub fn mgu(&self) -> Option<&Substitution> {
        match self {
            Unifier::Unified(s) => Some(s),
            _ => None,
        }
    }
}

fn occurs(x: &Name, t: &Term) -> bool {
    match t {
        Term::Var(y) => x == y,
        Term::App(f, a) => occurs(x, f) || occurs(x, a),
        _ => false,
    }
}

/// Robinson unification. When both sides are variables the right one is
/// bound, so names from `t` survive in the unifier's range.
pub fn unify(t: &Term, u: &Term) -> Result<Unifier, MatchError> {
    for x in [t, u] {
        if !x.is_algebraic() || x.has_loose(0) {
            return Err(MatchError::NotAlgebraic(x.clone()));
        }
    }
    let mut s = Substitution::new();
    let mut stack = vec![(t.clone(), u.clone())];
    while let Some((a, b)) = stack.pop() {
        let a = a.substitute(&s);
        let b = b.substitute(&s);
        if a == b {
            continue;
        }
        let (x, v) = match (&a, &b) {
            (_, Term::Var(y)) => (y.clone(), a.clone()),
            (Term::Var(x), _) => (x.clone(), b.clone()),
            (Term::App(af, aa), Term::App(bf, ba)) => {
                stack.push(((**aa).clone(), (**ba).clone()));
                stack.push(((**af).clone(), (**bf).clone()));
                continue;
            }
            _ => return Ok(Unifier::Clash),
        };
        if occurs(&x, &v) {
            return Ok(Unifier::OccursCheck);
        }
        let single = Substitution::from([(x.clone(), v.clone())]);
        for val in s.values_mut() {
            *val = val.substitute(&single);
        }
        s.insert(x, v);
    }
    Ok(Unifier::Unified(s))
}
