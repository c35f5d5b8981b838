//! Seeded term generators and exhaustive enumeration of small terms.

use std::collections::HashMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rules::{infer_arity, RuleSystem};
use crate::term::{fresh_name, name, Hint, Name, Substitution, Term};

/// Random closed terms over a signature. Symbols are applied to exactly
/// their arity; beta-redexes and abstractions are added on request.
#[derive(Debug, Clone)]
pub struct TermGen {
    rng: ChaCha8Rng,
    seed: u64,
    symbols: Vec<(Name, usize)>,
    variables: Vec<Name>,
    max_depth: usize,
    redex_rate: f64,
    lambda_rate: f64,
    patterns: Vec<Term>,
    pattern_rate: f64,
}

impl TermGen {
    pub fn new(symbols: Vec<(Name, usize)>, seed: u64) -> Self {
        TermGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
            symbols,
            variables: Vec::new(),
            max_depth: 3,
            redex_rate: 0.0,
            lambda_rate: 0.0,
            patterns: Vec::new(),
            pattern_rate: 0.0,
        }
    }

    /// Uses declared arities, falling back to the ones the rules imply and
    /// then to 0.
    pub fn for_system(rs: &RuleSystem, seed: u64) -> Self {
        let alpha = rs.arity().or_else(|| infer_arity(rs)).unwrap_or_default();
        let symbols = rs
            .signature
            .iter()
            .map(|(f, declared)| {
                let n = declared.or_else(|| alpha.get(f).copied()).unwrap_or(0);
                (f.clone(), n)
            })
            .collect();
        TermGen::new(symbols, seed)
    }

    pub fn max_depth(mut self, d: usize) -> Self {
        self.max_depth = d.max(1);
        self
    }

    /// Probability of wrapping an argument in a beta-redex.
    pub fn redex_rate(mut self, p: f64) -> Self {
        self.redex_rate = p;
        self
    }

    /// Probability of replacing a leaf by an abstraction.
    pub fn lambda_rate(mut self, p: f64) -> Self {
        self.lambda_rate = p;
        self
    }

    /// Left-hand sides of `rs`, instantiated at a node with probability `p`.
    pub fn plant_redexes(mut self, rs: &RuleSystem, p: f64) -> Self {
        self.patterns = rs.rules.iter().map(|r| r.lhs.clone()).collect();
        self.pattern_rate = p;
        self
    }

    /// Free variables that may appear as leaves.
    pub fn variables(mut self, xs: &[&str]) -> Self {
        self.variables = xs.iter().map(|x| name(x)).collect();
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// An algebraic term of depth at most a uniformly drawn bound.
    pub fn algebraic(&mut self) -> Term {
        let depth = self.rng.gen_range(1..=self.max_depth);
        self.algebraic_at(depth)
    }

    fn leaf(&mut self) -> Term {
        let constants: Vec<Name> = self
            .symbols
            .iter()
            .filter(|(_, n)| *n == 0)
            .map(|(f, _)| f.clone())
            .collect();
        let k = constants.len() + self.variables.len();
        if k == 0 {
            return Term::lam("x", Term::var("x"));
        }
        let i = self.rng.gen_range(0..k);
        if i < constants.len() {
            Term::Sym(constants[i].clone())
        } else {
            Term::Var(self.variables[i - constants.len()].clone())
        }
    }

    fn algebraic_at(&mut self, depth: usize) -> Term {
        if depth <= 1 || self.symbols.is_empty() {
            return self.leaf();
        }
        if !self.patterns.is_empty() && self.rng.gen_bool(self.pattern_rate) {
            let pattern = self.patterns[self.rng.gen_range(0..self.patterns.len())].clone();
            let sigma: Substitution = pattern
                .free_vars()
                .into_iter()
                .map(|x| (x, self.algebraic_at(depth - 1)))
                .collect();
            return pattern.substitute(&sigma);
        }
        let (f, n) = self.symbols[self.rng.gen_range(0..self.symbols.len())].clone();
        if n == 0 {
            return Term::Sym(f);
        }
        let args: Vec<Term> = (0..n).map(|_| self.algebraic_at(depth - 1)).collect();
        Term::apps(Term::Sym(f), args)
    }

    /// An algebraic term with beta-redexes wrapped around some arguments and
    /// abstractions at some leaves.
    pub fn term(&mut self) -> Term {
        let t = self.algebraic();
        self.decorate(&t, false)
    }

    fn decorate(&mut self, t: &Term, is_arg: bool) -> Term {
        let (head, args) = t.spine();
        let mut out = if args.is_empty() && is_arg && self.rng.gen_bool(self.lambda_rate) {
            self.abstraction(t)
        } else {
            let head = head.clone();
            let args: Vec<Term> = args.into_iter().map(|a| self.decorate(a, true)).collect();
            Term::apps(head, args)
        };
        if is_arg && self.rng.gen_bool(self.redex_rate) {
            out = self.wrap(&out);
        }
        out
    }

    fn abstraction(&mut self, leaf: &Term) -> Term {
        let x = fresh_name("x", &leaf.free_vars());
        if self.rng.gen_bool(0.5) {
            Term::lam(&x, Term::Var(x.clone()))
        } else {
            Term::lam(&x, leaf.clone())
        }
    }

    /// A beta-redex contracting to `s`.
    pub fn wrap(&mut self, s: &Term) -> Term {
        let x = fresh_name("x", &s.free_vars());
        let (head, args) = s.spine();
        let choice = if args.is_empty() {
            self.rng.gen_range(0..2)
        } else {
            self.rng.gen_range(0..3)
        };
        match choice {
            0 => Term::app(Term::lam(&x, Term::Var(x.clone())), s.clone()),
            1 => {
                let junk = self.leaf();
                Term::app(Term::lam(&x, s.clone()), junk)
            }
            _ => {
                let i = self.rng.gen_range(0..args.len());
                let mut holes: Vec<Term> = args.iter().map(|&a| a.clone()).collect();
                let taken = std::mem::replace(&mut holes[i], Term::Var(x.clone()));
                Term::app(Term::lam(&x, Term::apps(head.clone(), holes)), taken)
            }
        }
    }

    /// Picks an element; `None` on an empty slice.
    pub fn choose<'a, T>(&mut self, xs: &'a [T]) -> Option<&'a T> {
        xs.choose(&mut self.rng)
    }

    pub fn gen_range(&mut self, range: std::ops::Range<usize>) -> usize {
        self.rng.gen_range(range)
    }

    pub fn gen_bool(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }
}

/// Every closed term of size `1..=max_size` built from the given symbols
/// (applied freely), abstractions, applications and bound variables.
pub fn enumerate_closed(symbols: &[Name], max_size: usize) -> Vec<Term> {
    let mut memo = HashMap::new();
    (1..=max_size)
        .flat_map(|n| terms_of(symbols, n, 0, &mut memo))
        .collect()
}

/// Terms of exactly size `n` under `depth` binders.
fn terms_of(
    symbols: &[Name],
    n: usize,
    depth: usize,
    memo: &mut HashMap<(usize, usize), Vec<Term>>,
) -> Vec<Term> {
    if let Some(ts) = memo.get(&(depth, n)) {
        return ts.clone();
    }
    let mut out = Vec::new();
    if n == 1 {
        out.extend(symbols.iter().map(|f| Term::Sym(f.clone())));
        out.extend((0..depth as u32).map(Term::Bound));
    } else {
        for b in terms_of(symbols, n - 1, depth + 1, memo) {
            out.push(Term::Lam(Hint(binder_hint(depth)), Arc::new(b)));
        }
        for k in 1..n - 1 {
            let fs = terms_of(symbols, k, depth, memo);
            let as_ = terms_of(symbols, n - 1 - k, depth, memo);
            for f in &fs {
                for a in &as_ {
                    out.push(Term::app(f.clone(), a.clone()));
                }
            }
        }
    }
    memo.insert((depth, n), out.clone());
    out
}

fn binder_hint(depth: usize) -> Name {
    const NAMES: [&str; 4] = ["x", "y", "z", "w"];
    name(NAMES[depth % NAMES.len()])
}
