//! Beta reduction: single steps, parallel steps, head steps, the
//! leftmost-outermost strategy and the descent relation used for induction
//! on normalizing terms.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::head::{head_decompose, Head};
use crate::position::Position;
use crate::term::{fresh_name, Arity, ArityError, Name, Term};

/// Search budget. `max_steps` bounds derivation length (and BFS depth),
/// `max_term_size` bounds every term kept, `max_nodes` bounds the number of
/// terms a single search or enumeration may hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Fuel {
    pub max_steps: usize,
    pub max_term_size: usize,
    pub max_nodes: usize,
}

impl Default for Fuel {
    fn default() -> Self {
        Fuel {
            max_steps: 32,
            max_term_size: 200,
            max_nodes: 20_000,
        }
    }
}

impl Fuel {
    pub fn new(max_steps: usize, max_term_size: usize) -> Self {
        Fuel {
            max_steps,
            max_term_size,
            ..Fuel::default()
        }
    }

    pub fn doubled(self) -> Self {
        Fuel {
            max_steps: self.max_steps * 2,
            max_term_size: self.max_term_size * 2,
            max_nodes: self.max_nodes * 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum BetaOutcome {
    Normalized { term: Term, steps: usize },
    FuelExhausted { last: Term, steps: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BetaError {
    #[error("no beta-redex at {0}")]
    NotARedex(Position),
}

/// A set of terms, possibly cut short by the budget.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TermSet {
    pub terms: BTreeSet<Term>,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum AnVerdict {
    Yes(Term),
    No,
    Unknown,
}

/// Contracts a redex `(\x. b) a` at the root.
pub fn contract(t: &Term) -> Option<Term> {
    match t {
        Term::App(f, a) => match &**f {
            Term::Lam(_, b) => Some(Term::instantiate(b, a)),
            _ => None,
        },
        _ => None,
    }
}

pub fn beta_redexes(t: &Term) -> Vec<Position> {
    t.positions()
        .into_iter()
        .filter(|(_, s)| s.is_beta_redex())
        .map(|(p, _)| p)
        .collect()
}

pub fn beta_step_at(t: &Term, p: &Position) -> Result<Term, BetaError> {
    let contractum = t
        .subterm_at(p)
        .and_then(contract)
        .ok_or_else(|| BetaError::NotARedex(p.clone()))?;
    Ok(t.replace_at(p, contractum).expect("position checked above"))
}

pub fn is_beta_normal(t: &Term) -> bool {
    match t {
        Term::App(f, a) => !f.is_lam() && is_beta_normal(f) && is_beta_normal(a),
        Term::Lam(_, b) => is_beta_normal(b),
        _ => true,
    }
}

/// All `u` with `t ⊳β u`, by recursion on the parallel rules.
pub fn parallel_beta_successors(t: &Term, fuel: Fuel) -> TermSet {
    let mut memo = HashMap::new();
    let mut truncated = false;
    let set = par(t, fuel.max_nodes, &mut memo, &mut truncated);
    TermSet {
        terms: (*set).clone(),
        truncated,
    }
}

fn par(
    t: &Term,
    cap: usize,
    memo: &mut HashMap<Term, Arc<BTreeSet<Term>>>,
    truncated: &mut bool,
) -> Arc<BTreeSet<Term>> {
    if let Some(s) = memo.get(t) {
        return s.clone();
    }
    let mut out = BTreeSet::new();
    match t {
        Term::Var(_) | Term::Bound(_) | Term::Sym(_) => {
            out.insert(t.clone());
        }
        Term::Lam(h, b) => {
            for b2 in par(b, cap, memo, truncated).iter() {
                out.insert(Term::Lam(h.clone(), Arc::new(b2.clone())));
            }
        }
        Term::App(f, a) => {
            let fs = par(f, cap, memo, truncated);
            let as_ = par(a, cap, memo, truncated);
            'outer: for f2 in fs.iter() {
                for a2 in as_.iter() {
                    if out.len() >= cap {
                        *truncated = true;
                        break 'outer;
                    }
                    out.insert(Term::app(f2.clone(), a2.clone()));
                }
            }
            if let Term::Lam(_, b) = &**f {
                let bs = par(b, cap, memo, truncated);
                'outer2: for b2 in bs.iter() {
                    for a2 in as_.iter() {
                        if out.len() >= cap {
                            *truncated = true;
                            break 'outer2;
                        }
                        out.insert(Term::instantiate(b2, a2));
                    }
                }
            }
        }
    }
    let out = Arc::new(out);
    memo.insert(t.clone(), out.clone());
    out
}

/// Contracts the head redex, if the head decomposition has one.
pub fn head_step(t: &Term) -> Option<Term> {
    let mut hf = head_decompose(t);
    let Head::Redex { body, arg, .. } = &hf.head else {
        return None;
    };
    let contractum = Term::instantiate(body, arg);
    let head = contractum;
    let args = std::mem::take(&mut hf.args);
    let inner = Term::apps(head, args);
    Some(
        hf.outer_binders
            .iter()
            .rev()
            .fold(inner, |b, x| Term::lam_raw(x.clone(), b)),
    )
}

/// One leftmost-outermost step.
pub fn lo_step(t: &Term) -> Option<Term> {
    match t {
        Term::App(f, a) => {
            if let Term::Lam(_, b) = &**f {
                return Some(Term::instantiate(b, a));
            }
            if let Some(f2) = lo_step(f) {
                return Some(Term::App(Arc::new(f2), a.clone()));
            }
            lo_step(a).map(|a2| Term::App(f.clone(), Arc::new(a2)))
        }
        Term::Lam(h, b) => lo_step(b).map(|b2| Term::Lam(h.clone(), Arc::new(b2))),
        _ => None,
    }
}

pub fn lo_normalize(t: &Term, fuel: Fuel) -> BetaOutcome {
    let mut cur = t.clone();
    let mut steps = 0;
    loop {
        if steps >= fuel.max_steps || cur.size() > fuel.max_term_size {
            if is_beta_normal(&cur) && cur.size() <= fuel.max_term_size {
                return BetaOutcome::Normalized { term: cur, steps };
            }
            return BetaOutcome::FuelExhausted { last: cur, steps };
        }
        match lo_step(&cur) {
            Some(next) => {
                cur = next;
                steps += 1;
            }
            None => return BetaOutcome::Normalized { term: cur, steps },
        }
    }
}

/// Number of head steps along the leftmost-outermost derivation to normal
/// form, or `None` when the budget runs out first.
pub fn head_steps_to_normal(t: &Term, fuel: Fuel) -> Option<usize> {
    let mut cur = t.clone();
    let mut heads = 0;
    for _ in 0..=fuel.max_steps {
        if cur.size() > fuel.max_term_size {
            return None;
        }
        if head_decompose(&cur).is_redex() {
            heads += 1;
        }
        match lo_step(&cur) {
            Some(next) => cur = next,
            None => return Some(heads),
        }
    }
    None
}

/// Immediate `≻`-descendants. A head redex gives its head contractum; otherwise
/// the arguments, with variables bound by the outer binders opened as free
/// variables (named after their binders, primed when that would clash).
pub fn succ_descendants(t: &Term) -> Vec<Term> {
    let hf = head_decompose(t);
    if hf.is_redex() {
        return head_step(t).into_iter().collect();
    }
    if hf.args.is_empty() {
        return Vec::new();
    }
    let mut taken = t.free_vars();
    let mut names: Vec<Name> = Vec::new();
    for b in &hf.outer_binders {
        let x = fresh_name(b, &taken);
        taken.insert(x.clone());
        names.push(x);
    }
    names.reverse();
    hf.args.iter().map(|a| a.open_loose(&names)).collect()
}

pub fn in_an(t: &Term, alpha: &Arity, fuel: Fuel) -> Result<AnVerdict, ArityError> {
    match lo_normalize(t, fuel) {
        BetaOutcome::Normalized { term, .. } => {
            if term.respects_arity(alpha)? {
                Ok(AnVerdict::Yes(term))
            } else {
                Ok(AnVerdict::No)
            }
        }
        BetaOutcome::FuelExhausted { .. } => Ok(AnVerdict::Unknown),
    }
}

/// The beta-normal form, when found within budget.
pub fn beta_normal_form(t: &Term, fuel: Fuel) -> Option<Term> {
    match lo_normalize(t, fuel) {
        BetaOutcome::Normalized { term, .. } => Some(term),
        BetaOutcome::FuelExhausted { .. } => None,
    }
}
