//! Lambda terms over a signature of function symbols.
//!
//! Bound variables are stored as indices counting the abstractions between an
//! occurrence and its binder. Each abstraction carries the name it was written
//! with, but that name takes no part in equality, ordering or hashing, so
//! alpha-equivalent terms are structurally equal.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::position::{Position, Step};

pub type Name = Arc<str>;

/// Variable names to terms. Applied simultaneously.
pub type Substitution = BTreeMap<Name, Term>;

/// Symbol arities.
pub type Arity = BTreeMap<Name, usize>;

/// Printing name of an abstraction.
#[derive(Clone)]
pub struct Hint(pub Name);

impl PartialEq for Hint {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}
impl Eq for Hint {}
impl PartialOrd for Hint {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Hint {
    fn cmp(&self, _: &Self) -> std::cmp::Ordering {
        std::cmp::Ordering::Equal
    }
}
impl Hash for Hint {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// Free variable.
    Var(Name),
    /// Bound variable, as a binder index.
    Bound(u32),
    Sym(Name),
    App(Arc<Term>, Arc<Term>),
    Lam(Hint, Arc<Term>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TermClass {
    Algebraic,
    ApplicativeOnly,
    General,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArityError {
    #[error("no arity for symbol `{0}`")]
    MissingArity(Name),
}

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

impl Term {
    pub fn var(x: &str) -> Term {
        Term::Var(name(x))
    }

    pub fn sym(f: &str) -> Term {
        Term::Sym(name(f))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Arc::new(f), Arc::new(a))
    }

    pub fn apps(head: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(head, Term::app)
    }

    /// `\x. body`, binding the free occurrences of `x` in `body`.
    pub fn lam(x: &str, body: Term) -> Term {
        let x = name(x);
        let body = body.abstract_var(&x, 0);
        Term::Lam(Hint(x), Arc::new(body))
    }

    /// Abstraction over a body already in nameless form.
    pub fn lam_raw(hint: Name, body: Term) -> Term {
        Term::Lam(Hint(hint), Arc::new(body))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_lam(&self) -> bool {
        matches!(self, Term::Lam(..))
    }

    pub fn is_beta_redex(&self) -> bool {
        matches!(self, Term::App(f, _) if f.is_lam())
    }

    /// Head and arguments of the application spine.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut t = self;
        while let Term::App(f, a) = t {
            args.push(&**a);
            t = f;
        }
        args.reverse();
        (t, args)
    }

    /// Symbol heading the spine, with the number of arguments.
    pub fn head_symbol(&self) -> Option<(&Name, usize)> {
        let mut n = 0;
        let mut t = self;
        while let Term::App(f, _) = t {
            n += 1;
            t = f;
        }
        match t {
            Term::Sym(f) => Some((f, n)),
            _ => None,
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Bound(_) | Term::Sym(_) => 1,
            Term::App(f, a) => 1 + f.size() + a.size(),
            Term::Lam(_, b) => 1 + b.size(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Name>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Bound(_) | Term::Sym(_) => {}
            Term::App(f, a) => {
                f.collect_vars(out);
                a.collect_vars(out);
            }
            Term::Lam(_, b) => b.collect_vars(out),
        }
    }

    /// Free variable occurrences, in left-to-right order, with repetitions.
    pub fn var_occurrences(&self) -> Vec<Name> {
        fn go(t: &Term, out: &mut Vec<Name>) {
            match t {
                Term::Var(x) => out.push(x.clone()),
                Term::Bound(_) | Term::Sym(_) => {}
                Term::App(f, a) => {
                    go(f, out);
                    go(a, out);
                }
                Term::Lam(_, b) => go(b, out),
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    pub fn symbols(&self) -> BTreeSet<Name> {
        fn go(t: &Term, out: &mut BTreeSet<Name>) {
            match t {
                Term::Sym(f) => {
                    out.insert(f.clone());
                }
                Term::Var(_) | Term::Bound(_) => {}
                Term::App(f, a) => {
                    go(f, out);
                    go(a, out);
                }
                Term::Lam(_, b) => go(b, out),
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut out);
        out
    }

    /// True when no free variable occurs twice.
    pub fn is_linear(&self) -> bool {
        let occ = self.var_occurrences();
        let set: BTreeSet<_> = occ.iter().collect();
        set.len() == occ.len()
    }

    /// No free variables and no dangling binder indices.
    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty() && !self.has_loose(0)
    }

    /// Whether some bound index escapes `cutoff` enclosing binders.
    pub fn has_loose(&self, cutoff: u32) -> bool {
        match self {
            Term::Bound(k) => *k >= cutoff,
            Term::Var(_) | Term::Sym(_) => false,
            Term::App(f, a) => f.has_loose(cutoff) || a.has_loose(cutoff),
            Term::Lam(_, b) => b.has_loose(cutoff + 1),
        }
    }

    /// Dangling indices, relative to the term's own root.
    pub fn loose_indices(&self) -> BTreeSet<u32> {
        fn go(t: &Term, depth: u32, out: &mut BTreeSet<u32>) {
            match t {
                Term::Bound(k) if *k >= depth => {
                    out.insert(*k - depth);
                }
                Term::App(f, a) => {
                    go(f, depth, out);
                    go(a, depth, out);
                }
                Term::Lam(_, b) => go(b, depth + 1, out),
                _ => {}
            }
        }
        let mut out = BTreeSet::new();
        go(self, 0, &mut out);
        out
    }

    pub fn has_lam(&self) -> bool {
        match self {
            Term::Lam(..) => true,
            Term::App(f, a) => f.has_lam() || a.has_lam(),
            _ => false,
        }
    }

    /// Adds `d` to every index at or above `cutoff`.
    pub fn shift(&self, d: i64, cutoff: u32) -> Term {
        if d == 0 || !self.has_loose(cutoff) {
            return self.clone();
        }
        match self {
            Term::Bound(k) if *k >= cutoff => {
                let n = i64::from(*k) + d;
                assert!(n >= 0, "negative binder index");
                Term::Bound(n as u32)
            }
            Term::App(f, a) => Term::app(f.shift(d, cutoff), a.shift(d, cutoff)),
            Term::Lam(h, b) => Term::Lam(h.clone(), Arc::new(b.shift(d, cutoff + 1))),
            other => other.clone(),
        }
    }

    /// The body of an abstraction with its bound variable replaced by `arg`.
    pub fn instantiate(body: &Term, arg: &Term) -> Term {
        fn go(t: &Term, depth: u32, arg: &Term) -> Term {
            if !t.has_loose(depth) {
                return t.clone();
            }
            match t {
                Term::Bound(k) if *k == depth => arg.shift(i64::from(depth), 0),
                Term::Bound(k) if *k > depth => Term::Bound(k - 1),
                Term::App(f, a) => Term::app(go(f, depth, arg), go(a, depth, arg)),
                Term::Lam(h, b) => Term::Lam(h.clone(), Arc::new(go(b, depth + 1, arg))),
                other => other.clone(),
            }
        }
        go(body, 0, arg)
    }

    /// Turns free occurrences of `x` into the index of a binder `depth` levels up.
    pub fn abstract_var(&self, x: &Name, depth: u32) -> Term {
        match self {
            Term::Var(y) if y == x => Term::Bound(depth),
            Term::App(f, a) => Term::app(f.abstract_var(x, depth), a.abstract_var(x, depth)),
            Term::Lam(h, b) => Term::Lam(h.clone(), Arc::new(b.abstract_var(x, depth + 1))),
            other => other.clone(),
        }
    }

    /// Replaces dangling index `k` by the free variable `names[k]`.
    pub fn open_loose(&self, names: &[Name]) -> Term {
        fn go(t: &Term, depth: u32, names: &[Name]) -> Term {
            match t {
                Term::Bound(k) if *k >= depth => match names.get((*k - depth) as usize) {
                    Some(x) => Term::Var(x.clone()),
                    None => Term::Bound(*k - names.len() as u32),
                },
                Term::App(f, a) => Term::app(go(f, depth, names), go(a, depth, names)),
                Term::Lam(h, b) => Term::Lam(h.clone(), Arc::new(go(b, depth + 1, names))),
                other => other.clone(),
            }
        }
        go(self, 0, names)
    }

    /// Capture-avoiding simultaneous substitution of free variables.
    pub fn substitute(&self, s: &Substitution) -> Term {
        fn go(t: &Term, s: &Substitution, depth: u32) -> Term {
            match t {
                Term::Var(x) => match s.get(x) {
                    Some(u) => u.shift(i64::from(depth), 0),
                    None => t.clone(),
                },
                Term::App(f, a) => Term::app(go(f, s, depth), go(a, s, depth)),
                Term::Lam(h, b) => Term::Lam(h.clone(), Arc::new(go(b, s, depth + 1))),
                other => other.clone(),
            }
        }
        if s.is_empty() {
            return self.clone();
        }
        go(self, s, 0)
    }

    pub fn classify(&self) -> TermClass {
        if self.is_algebraic() {
            TermClass::Algebraic
        } else if !self.has_lam() {
            TermClass::ApplicativeOnly
        } else {
            TermClass::General
        }
    }

    pub fn is_algebraic(&self) -> bool {
        match self {
            Term::Var(_) | Term::Bound(_) | Term::Sym(_) => true,
            Term::Lam(..) => false,
            Term::App(..) => {
                let (head, args) = self.spine();
                matches!(head, Term::Sym(_)) && args.iter().all(|a| a.is_algebraic())
            }
        }
    }

    pub fn is_applicative(&self) -> bool {
        !self.has_lam()
    }

    /// No symbol heads a spine longer than its arity.
    pub fn respects_arity(&self, alpha: &Arity) -> Result<bool, ArityError> {
        let (head, args) = self.spine();
        let mut ok = true;
        match head {
            Term::Sym(f) => {
                let n = *alpha
                    .get(f)
                    .ok_or_else(|| ArityError::MissingArity(f.clone()))?;
                ok &= args.len() <= n;
            }
            Term::Lam(_, b) => ok &= b.respects_arity(alpha)?,
            _ => {}
        }
        for a in args {
            ok &= a.respects_arity(alpha)?;
        }
        Ok(ok)
    }

    pub fn subterm_at(&self, p: &Position) -> Option<&Term> {
        let mut t = self;
        for step in p.steps() {
            t = match (step, t) {
                (Step::Fun, Term::App(f, _)) => f,
                (Step::Arg, Term::App(_, a)) => a,
                (Step::Body, Term::Lam(_, b)) => b,
                _ => return None,
            };
        }
        Some(t)
    }

    /// The term with the subterm at `p` replaced by `new`, which must live in
    /// the same binder context as the replaced subterm.
    pub fn replace_at(&self, p: &Position, new: Term) -> Option<Term> {
        fn go(t: &Term, steps: &[Step], new: Term) -> Option<Term> {
            let Some((first, rest)) = steps.split_first() else {
                return Some(new);
            };
            match (first, t) {
                (Step::Fun, Term::App(f, a)) => {
                    Some(Term::App(Arc::new(go(f, rest, new)?), a.clone()))
                }
                (Step::Arg, Term::App(f, a)) => {
                    Some(Term::App(f.clone(), Arc::new(go(a, rest, new)?)))
                }
                (Step::Body, Term::Lam(h, b)) => {
                    Some(Term::Lam(h.clone(), Arc::new(go(b, rest, new)?)))
                }
                _ => None,
            }
        }
        go(self, p.steps(), new)
    }

    /// Every position with its subterm, outermost first and left to right.
    pub fn positions(&self) -> Vec<(Position, &Term)> {
        fn go<'a>(t: &'a Term, path: &mut Vec<Step>, out: &mut Vec<(Position, &'a Term)>) {
            out.push((Position::from(path.clone()), t));
            match t {
                Term::App(f, a) => {
                    path.push(Step::Fun);
                    go(f, path, out);
                    path.pop();
                    path.push(Step::Arg);
                    go(a, path, out);
                    path.pop();
                }
                Term::Lam(_, b) => {
                    path.push(Step::Body);
                    go(b, path, out);
                    path.pop();
                }
                _ => {}
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }
}

/// Appends primes to `base` until it avoids `taken`.
pub fn fresh_name(base: &str, taken: &BTreeSet<Name>) -> Name {
    let mut candidate = base.to_string();
    while taken.contains(candidate.as_str()) {
        candidate.push('\'');
    }
    name(&candidate)
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
