//! Conditional critical pairs, orthonormality and feasibility probing.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::beta::Fuel;
use crate::matching::unify;
use crate::position::Position;
use crate::rewrite::{ConditionWitness, JoinVerdict, Mode, Rel, Rewriter};
use crate::rules::{infer_arity, is_constructor_normal, CondRule, Condition, RuleSystem};
use crate::term::{fresh_name, Name, Substitution, Term};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Overlap {
    pub outer: Name,
    pub inner: Name,
    pub position: Position,
}

/// `conditions ⊃ (left, right)`, from the inner rule contracted at
/// `overlap.position` inside the outer left-hand side (left) and the outer
/// rule contracted at the root (right).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CriticalPair {
    pub conditions: Vec<Condition>,
    pub left: Term,
    pub right: Term,
    pub overlap: Overlap,
    pub trivial: bool,
    /// The overlapped term `lσ`.
    pub source: Term,
}

impl fmt::Display for CriticalPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, c) in self.conditions.iter().enumerate() {
            if k > 0 {
                f.write_str(" ∧ ")?;
            }
            write!(f, "{c}")?;
        }
        if !self.conditions.is_empty() {
            f.write_str(" ⊃ ")?;
        }
        write!(f, "({}, {})", self.left, self.right)
    }
}

/// Renames the variables of `rule` away from `avoid`.
pub fn rename_apart(rule: &CondRule, avoid: &BTreeSet<Name>) -> CondRule {
    let mut taken = avoid.clone();
    let mut s = Substitution::new();
    let mut vars = BTreeSet::new();
    for t in rule.terms() {
        vars.extend(t.free_vars());
    }
    for x in vars {
        let y = fresh_name(&x, &taken);
        taken.insert(y.clone());
        if y != x {
            s.insert(x, Term::Var(y));
        }
    }
    CondRule {
        name: rule.name.clone(),
        conditions: rule
            .conditions
            .iter()
            .map(|c| Condition {
                lhs: c.lhs.substitute(&s),
                rhs: c.rhs.substitute(&s),
            })
            .collect(),
        lhs: rule.lhs.substitute(&s),
        rhs: rule.rhs.substitute(&s),
    }
}

/// All critical pairs. Root overlaps between two distinct rules are reported
/// once, with the later-declared rule as the outer one; a rule never overlaps
/// itself at the root.
pub fn critical_pairs(rs: &RuleSystem) -> Vec<CriticalPair> {
    let symbols: BTreeSet<Name> = rs.signature.iter().map(|(f, _)| f.clone()).collect();
    let mut out = Vec::new();
    for (i, outer) in rs.rules.iter().enumerate() {
        let mut avoid = symbols.clone();
        for t in outer.terms() {
            avoid.extend(t.free_vars());
        }
        for (j, inner) in rs.rules.iter().enumerate() {
            let inner = rename_apart(inner, &avoid);
            for (p, sub) in outer.lhs.positions() {
                if sub.is_var() {
                    continue;
                }
                if p.is_root() && j >= i {
                    continue;
                }
                let Ok(u) = unify(sub, &inner.lhs) else { continue };
                let Some(sigma) = u.mgu() else { continue };
                let conditions: Vec<Condition> = outer
                    .conditions
                    .iter()
                    .chain(&inner.conditions)
                    .map(|c| Condition {
                        lhs: c.lhs.substitute(sigma),
                        rhs: c.rhs.substitute(sigma),
                    })
                    .collect();
                let source = outer.lhs.substitute(sigma);
                let left = outer
                    .lhs
                    .replace_at(&p, inner.rhs.clone())
                    .expect("position of lhs")
                    .substitute(sigma);
                let right = outer.rhs.substitute(sigma);
                out.push(CriticalPair {
                    trivial: left == right,
                    conditions,
                    left,
                    right,
                    overlap: Overlap {
                        outer: outer.name.clone(),
                        inner: inner.name.clone(),
                        position: p,
                    },
                    source,
                });
            }
        }
    }
    out.sort_by(|a, b| {
        (&a.overlap.outer, &a.overlap.inner, &a.overlap.position).cmp(&(
            &b.overlap.outer,
            &b.overlap.inner,
            &b.overlap.position,
        ))
    });
    out
}

/// Two conditions with alpha-equal left sides and distinct constructor-normal
/// right sides, as 1-based indices.
pub fn contradictory_conditions(conditions: &[Condition], defined: &BTreeSet<Name>) -> Option<(usize, usize)> {
    for i in 0..conditions.len() {
        for j in i + 1..conditions.len() {
            let (a, b) = (&conditions[i], &conditions[j]);
            if a.lhs == b.lhs
                && a.rhs != b.rhs
                && is_constructor_normal(&a.rhs, defined)
                && is_constructor_normal(&b.rhs, defined)
            {
                return Some((i + 1, j + 1));
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Orthonormality {
    True,
    False(String),
}

impl Orthonormality {
    pub fn is_true(&self) -> bool {
        *self == Orthonormality::True
    }
}

pub fn orthonormal_check(rs: &RuleSystem) -> Orthonormality {
    if let Some(r) = rs.rules.iter().find(|r| !r.lhs.is_linear()) {
        return Orthonormality::False(format!("rule `{}` is not left-linear", r.name));
    }
    let defined = rs.defined_symbols();
    for r in &rs.rules {
        for c in &r.conditions {
            if !is_constructor_normal(&c.rhs, &defined) {
                return Orthonormality::False(format!(
                    "rule `{}`: condition right-hand side `{}` is not a closed beta-normal constructor term",
                    r.name, c.rhs
                ));
            }
        }
    }
    for cp in critical_pairs(rs) {
        if contradictory_conditions(&cp.conditions, &defined).is_none() {
            return Orthonormality::False(format!(
                "critical pair of `{}` in `{}` at {} has no contradictory conditions: {cp}",
                cp.overlap.inner, cp.overlap.outer, cp.overlap.position
            ));
        }
    }
    Orthonormality::True
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum FeasibilityVerdict {
    FeasibleWitness {
        substitution: Substitution,
        traces: Vec<ConditionWitness>,
    },
    UnfeasibleByOrthonormality(usize, usize),
    UnknownWithinBudget {
        tried: usize,
    },
}

impl fmt::Display for FeasibilityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeasibilityVerdict::FeasibleWitness { substitution, .. } => {
                f.write_str("FeasibleWitness {")?;
                for (k, (x, t)) in substitution.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, " {x} := {t}")?;
                }
                f.write_str(" }")
            }
            FeasibilityVerdict::UnfeasibleByOrthonormality(i, j) => {
                write!(f, "UnfeasibleByOrthonormality({i}, {j})")
            }
            FeasibilityVerdict::UnknownWithinBudget { tried } => {
                write!(f, "UnknownWithinBudget ({tried} substitutions tried)")
            }
        }
    }
}

/// Closed candidate terms over the signature, smallest first.
pub fn ground_terms(rs: &RuleSystem, budget: usize) -> Vec<Term> {
    let alpha = rs.arity().or_else(|| infer_arity(rs)).unwrap_or_default();
    let arity = |f: &Name| alpha.get(f).copied().unwrap_or(0);
    let mut out: Vec<Term> = rs
        .signature
        .iter()
        .filter(|(f, _)| arity(f) == 0)
        .map(|(f, _)| Term::Sym(f.clone()))
        .take(budget)
        .collect();
    let mut seen: BTreeSet<Term> = out.iter().cloned().collect();
    for _ in 0..4 {
        if out.len() >= budget || out.is_empty() {
            break;
        }
        let layer = out.clone();
        for (f, _) in rs.signature.iter() {
            let n = arity(f);
            if n == 0 {
                continue;
            }
            let mut idx = vec![0usize; n];
            'tuples: loop {
                let t = Term::apps(Term::Sym(f.clone()), idx.iter().map(|&k| layer[k].clone()));
                if seen.insert(t.clone()) {
                    out.push(t);
                    if out.len() >= budget {
                        return out;
                    }
                }
                for k in idx.iter_mut() {
                    *k += 1;
                    if *k < layer.len() {
                        continue 'tuples;
                    }
                    *k = 0;
                }
                break;
            }
        }
    }
    out
}

pub fn probe_feasibility(
    cp: &CriticalPair,
    rs: &RuleSystem,
    mode: Mode,
    level: usize,
    fuel: Fuel,
    generator_budget: usize,
) -> FeasibilityVerdict {
    if let Some((i, j)) = contradictory_conditions(&cp.conditions, &rs.defined_symbols()) {
        return FeasibilityVerdict::UnfeasibleByOrthonormality(i, j);
    }
    let mut vars = BTreeSet::new();
    for c in &cp.conditions {
        vars.extend(c.lhs.free_vars());
        vars.extend(c.rhs.free_vars());
    }
    let vars: Vec<Name> = vars.into_iter().collect();
    let pool = ground_terms(rs, generator_budget.max(1));
    let rw = Rewriter::new(rs, fuel);
    let rel = Rel::new(mode, level);
    let mut idx = vec![0usize; vars.len()];
    let mut tried = 0;
    if !vars.is_empty() && pool.is_empty() {
        return FeasibilityVerdict::UnknownWithinBudget { tried };
    }
    while tried < generator_budget.max(1) {
        tried += 1;
        let sigma: Substitution = vars
            .iter()
            .zip(&idx)
            .map(|(x, &k)| (x.clone(), pool[k].clone()))
            .collect();
        let mut traces = Vec::new();
        for (k, c) in cp.conditions.iter().enumerate() {
            let d = c.lhs.substitute(&sigma);
            let e = c.rhs.substitute(&sigma);
            match rw.joinable(&d, &e, rel) {
                JoinVerdict::Joinable {
                    witness,
                    left_steps,
                    right_steps,
                } => traces.push(ConditionWitness {
                    index: k + 1,
                    lhs: d,
                    rhs: e,
                    witness,
                    left_steps,
                    right_steps,
                }),
                _ => break,
            }
        }
        if traces.len() == cp.conditions.len() {
            return FeasibilityVerdict::FeasibleWitness {
                substitution: sigma,
                traces,
            };
        }
        let mut d = 0;
        loop {
            if d == idx.len() {
                return FeasibilityVerdict::UnknownWithinBudget { tried };
            }
            idx[d] += 1;
            if idx[d] < pool.len() {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
    FeasibilityVerdict::UnknownWithinBudget { tried }
}
