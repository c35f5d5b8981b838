//! Head decomposition: every term is uniquely `\x1..xm. v a1 .. an` with `v`
//! a variable or symbol, or `\x1..xm. (\y. b) a0 a1 .. an`.

use serde::Serialize;

use crate::term::{Name, Term};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Head {
    /// A free variable, or one bound by the outer binders.
    Var(Term),
    Sym(Name),
    Redex { binder: Name, body: Term, arg: Term },
}

/// Components live in the nameless context of `outer_binders`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HeadForm {
    pub outer_binders: Vec<Name>,
    pub head: Head,
    pub args: Vec<Term>,
}

impl HeadForm {
    pub fn is_redex(&self) -> bool {
        matches!(self.head, Head::Redex { .. })
    }

    pub fn rebuild(&self) -> Term {
        let head = match &self.head {
            Head::Var(v) => v.clone(),
            Head::Sym(f) => Term::Sym(f.clone()),
            Head::Redex { binder, body, arg } => {
                Term::app(Term::lam_raw(binder.clone(), body.clone()), arg.clone())
            }
        };
        let inner = Term::apps(head, self.args.iter().cloned());
        self.outer_binders
            .iter()
            .rev()
            .fold(inner, |b, x| Term::lam_raw(x.clone(), b))
    }
}

pub fn head_decompose(t: &Term) -> HeadForm {
    let mut outer_binders = Vec::new();
    let mut t = t;
    while let Term::Lam(h, b) = t {
        outer_binders.push(h.0.clone());
        t = b;
    }
    let (h, args) = t.spine();
    let mut args: Vec<Term> = args.into_iter().cloned().collect();
    let head = match h {
        Term::Sym(f) => Head::Sym(f.clone()),
        Term::Var(_) | Term::Bound(_) => Head::Var(h.clone()),
        Term::Lam(hint, body) => {
            let arg = args.remove(0);
            Head::Redex {
                binder: hint.0.clone(),
                body: (**body).clone(),
                arg,
            }
        }
        Term::App(..) => unreachable!("spine head is never an application"),
    };
    HeadForm {
        outer_binders,
        head,
        args,
    }
}
