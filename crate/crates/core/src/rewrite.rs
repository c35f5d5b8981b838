//! Stratified join conditional rewriting. `->R0` is empty; a rule fires at
//! level `i + 1` when each instantiated condition joins at level `i`. Under
//! `R(beta)` the conditions may also use beta steps.
//!
//! Conditions whose joinability search runs out of budget neither fire nor
//! refute the step: the candidate is left out and reported as undecided.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::beta::{contract, Fuel, TermSet};
use crate::matching::{match_into, root_matches};
use crate::position::Position;
use crate::rules::RuleSystem;
use crate::term::{Name, Substitution, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    R,
    RBeta,
    Beta,
    BetaUnionR,
    BetaUnionRBeta,
}

impl Mode {
    pub fn has_beta(self) -> bool {
        matches!(self, Mode::Beta | Mode::BetaUnionR | Mode::BetaUnionRBeta)
    }

    pub fn has_rules(self) -> bool {
        self != Mode::Beta
    }

    /// Relation in which conditions are joined, one level down.
    pub fn condition_mode(self) -> Mode {
        match self {
            Mode::R | Mode::BetaUnionR => Mode::R,
            Mode::RBeta | Mode::BetaUnionRBeta => Mode::BetaUnionRBeta,
            Mode::Beta => Mode::Beta,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::R => "R",
            Mode::RBeta => "RBeta",
            Mode::Beta => "Beta",
            Mode::BetaUnionR => "BetaUnionR",
            Mode::BetaUnionRBeta => "BetaUnionRBeta",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "r" => Mode::R,
            "rbeta" | "r(beta)" => Mode::RBeta,
            "beta" => Mode::Beta,
            "betaunionr" | "beta+r" => Mode::BetaUnionR,
            "betaunionrbeta" | "beta+rbeta" | "beta+r(beta)" => Mode::BetaUnionRBeta,
            _ => return Err(format!("unknown mode `{s}`")),
        })
    }
}

impl Serialize for Mode {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// A relation: a mode at a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Rel {
    pub mode: Mode,
    pub level: usize,
}

impl Rel {
    pub fn new(mode: Mode, level: usize) -> Rel {
        Rel { mode, level }
    }

    pub fn beta() -> Rel {
        Rel::new(Mode::Beta, 0)
    }
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.mode == Mode::Beta {
            f.write_str("Beta")
        } else {
            write!(f, "{}_{}", self.mode, self.level)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StepLabel {
    Beta,
    Rule(Name),
}

impl fmt::Display for StepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepLabel::Beta => f.write_str("beta"),
            StepLabel::Rule(r) => f.write_str(r),
        }
    }
}

impl Serialize for StepLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionWitness {
    /// 1-based.
    pub index: usize,
    pub lhs: Term,
    pub rhs: Term,
    pub witness: Term,
    pub left_steps: usize,
    pub right_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelStep {
    pub from: Term,
    pub to: Term,
    pub position: Position,
    pub rule: StepLabel,
    pub level: usize,
    pub condition_trace: Vec<ConditionWitness>,
}

/// A rule candidate left out because a condition could not be decided.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Undecided {
    pub position: Position,
    pub rule: Name,
    pub condition: usize,
    pub explored: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Successors {
    pub steps: Vec<LevelStep>,
    pub undecided: Vec<Undecided>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum JoinVerdict {
    Joinable {
        witness: Term,
        left_steps: usize,
        right_steps: usize,
    },
    NotJoinableWithinBudget {
        explored: usize,
    },
    Refuted {
        reason: String,
    },
}

impl JoinVerdict {
    pub fn is_joinable(&self) -> bool {
        matches!(self, JoinVerdict::Joinable { .. })
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self, JoinVerdict::Refuted { .. })
    }
}

impl fmt::Display for JoinVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JoinVerdict::Joinable {
                witness,
                left_steps,
                right_steps,
            } => write!(f, "Joinable at `{witness}` ({left_steps} + {right_steps} steps)"),
            JoinVerdict::NotJoinableWithinBudget { explored } => {
                write!(f, "NotJoinableWithinBudget ({explored} terms explored)")
            }
            JoinVerdict::Refuted { reason } => write!(f, "Refuted ({reason})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Strategy {
    LeftmostOutermost,
    FullEnumerationFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DerivationEnd {
    /// No successor and no undecided candidate.
    Normal,
    /// Only undecided candidates remain.
    Undecided,
    FuelExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Derivation {
    pub start: Term,
    pub steps: Vec<LevelStep>,
    pub end: DerivationEnd,
}

impl Derivation {
    pub fn last(&self) -> &Term {
        self.steps.last().map_or(&self.start, |s| &s.to)
    }
}

/// The line-oriented trace format.
pub fn format_trace(d: &Derivation) -> String {
    let mut out = format!("start: {}\n", d.start);
    for (n, s) in d.steps.iter().enumerate() {
        out.push_str(&format!(
            "step {}: {} @ {} level={}\n",
            n + 1,
            s.rule,
            s.position,
            s.level
        ));
        for c in &s.condition_trace {
            out.push_str(&format!(
                "    cond {}: {} = {} joined at {} ({} + {} steps)\n",
                c.index, c.lhs, c.rhs, c.witness, c.left_steps, c.right_steps
            ));
        }
        out.push_str(&format!("    to: {}\n", s.to));
    }
    let end = match d.end {
        DerivationEnd::Normal => "normal form",
        DerivationEnd::Undecided => "stopped: only undecided candidates remain",
        DerivationEnd::FuelExhausted => "stopped: fuel exhausted",
    };
    out.push_str(&format!("end: {end}\n"));
    out
}

struct RootStep {
    label: StepLabel,
    contractum: Term,
    witnesses: Vec<ConditionWitness>,
}

#[derive(Default)]
struct Next {
    terms: Vec<Term>,
    undecided: bool,
}

/// Reachable terms from a root, breadth-first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reach {
    /// Terms with their distance from the root, in discovery order.
    pub terms: Vec<(Term, usize)>,
    /// Edges as (from index, to index, label).
    pub edges: Vec<(usize, usize, StepLabel, usize)>,
    pub truncated: bool,
}

impl Reach {
    pub fn contains(&self, t: &Term) -> bool {
        self.terms.iter().any(|(u, _)| u == t)
    }

    pub fn set(&self) -> BTreeSet<Term> {
        self.terms.iter().map(|(t, _)| t.clone()).collect()
    }
}

/// Rewriting over one system and budget, with memoized condition checks.
pub struct Rewriter<'a> {
    rs: &'a RuleSystem,
    fuel: Fuel,
    conditions: RefCell<HashMap<(Rel, Term, Term), JoinVerdict>>,
    next: RefCell<HashMap<(Rel, Term), Rc<Next>>>,
}

impl<'a> Rewriter<'a> {
    pub fn new(rs: &'a RuleSystem, fuel: Fuel) -> Self {
        Rewriter {
            rs,
            fuel,
            conditions: RefCell::new(HashMap::new()),
            next: RefCell::new(HashMap::new()),
        }
    }

    pub fn system(&self) -> &'a RuleSystem {
        self.rs
    }

    pub fn fuel(&self) -> Fuel {
        self.fuel
    }

    fn condition_verdict(&self, d: &Term, c: &Term, rel: Rel) -> JoinVerdict {
        let key = (rel, d.clone(), c.clone());
        if let Some(v) = self.conditions.borrow().get(&key) {
            return v.clone();
        }
        let v = self.join(d, rel, c, rel);
        self.conditions.borrow_mut().insert(key, v.clone());
        v
    }

    fn root_steps(&self, s: &Term, rel: Rel, undecided: &mut Vec<(Name, usize, usize)>) -> Vec<RootStep> {
        let mut out = Vec::new();
        if rel.mode.has_beta() {
            if let Some(c) = contract(s) {
                out.push(RootStep {
                    label: StepLabel::Beta,
                    contractum: c,
                    witnesses: Vec::new(),
                });
            }
        }
        if !rel.mode.has_rules() || rel.level == 0 {
            return out;
        }
        let cond_rel = Rel::new(rel.mode.condition_mode(), rel.level - 1);
        'rules: for (rule, sigma) in root_matches(self.rs, s) {
            let mut witnesses = Vec::new();
            for (k, cond) in rule.conditions.iter().enumerate() {
                let d = cond.lhs.substitute(&sigma);
                let c = cond.rhs.substitute(&sigma);
                match self.condition_verdict(&d, &c, cond_rel) {
                    JoinVerdict::Joinable {
                        witness,
                        left_steps,
                        right_steps,
                    } => witnesses.push(ConditionWitness {
                        index: k + 1,
                        lhs: d,
                        rhs: c,
                        witness,
                        left_steps,
                        right_steps,
                    }),
                    JoinVerdict::Refuted { .. } => continue 'rules,
                    JoinVerdict::NotJoinableWithinBudget { explored } => {
                        undecided.push((rule.name.clone(), k + 1, explored));
                        continue 'rules;
                    }
                }
            }
            out.push(RootStep {
                label: StepLabel::Rule(rule.name.clone()),
                contractum: rule.rhs.substitute(&sigma),
                witnesses,
            });
        }
        out
    }

    /// All one-step successors, leftmost-outermost.
    pub fn successors(&self, t: &Term, rel: Rel) -> Successors {
        let mut out = Successors::default();
        for (p, s) in t.positions() {
            let mut und = Vec::new();
            for rs in self.root_steps(s, rel, &mut und) {
                let level = match rs.label {
                    StepLabel::Beta => 0,
                    StepLabel::Rule(_) => rel.level,
                };
                out.steps.push(LevelStep {
                    from: t.clone(),
                    to: t.replace_at(&p, rs.contractum).expect("position from traversal"),
                    position: p.clone(),
                    rule: rs.label,
                    level,
                    condition_trace: rs.witnesses,
                });
            }
            out.undecided.extend(und.into_iter().map(|(rule, condition, explored)| Undecided {
                position: p.clone(),
                rule,
                condition,
                explored,
            }));
        }
        out
    }

    fn next_terms(&self, t: &Term, rel: Rel) -> Rc<Next> {
        let key = (rel, t.clone());
        if let Some(n) = self.next.borrow().get(&key) {
            return n.clone();
        }
        let mut n = Next::default();
        for (p, s) in t.positions() {
            let mut und = Vec::new();
            for rs in self.root_steps(s, rel, &mut und) {
                n.terms.push(t.replace_at(&p, rs.contractum).expect("position from traversal"));
            }
            n.undecided |= !und.is_empty();
        }
        let n = Rc::new(n);
        self.next.borrow_mut().insert(key, n.clone());
        n
    }

    /// One-step successor terms, deduplicated and sorted.
    pub fn successor_terms(&self, t: &Term, rel: Rel) -> TermSet {
        let n = self.next_terms(t, rel);
        TermSet {
            terms: n.terms.iter().cloned().collect(),
            truncated: n.undecided,
        }
    }

    /// Bidirectional breadth-first search for a common reduct of `left`
    /// under `lrel` and `right` under `rrel`.
    pub fn join(&self, left: &Term, lrel: Rel, right: &Term, rrel: Rel) -> JoinVerdict {
        if left == right {
            return JoinVerdict::Joinable {
                witness: left.clone(),
                left_steps: 0,
                right_steps: 0,
            };
        }
        let mut sides = [Side::new(left, lrel), Side::new(right, rrel)];
        let mut turn = 0;
        loop {
            let expandable = |s: &Side| !s.frontier.is_empty() && s.depth < self.fuel.max_steps;
            if !expandable(&sides[0]) && !expandable(&sides[1]) {
                break;
            }
            if !expandable(&sides[turn]) {
                turn = 1 - turn;
            }
            let total = sides[0].visited.len() + sides[1].visited.len();
            let (a, b) = if turn == 0 {
                let (x, y) = sides.split_at_mut(1);
                (&mut x[0], &y[0])
            } else {
                let (x, y) = sides.split_at_mut(1);
                (&mut y[0], &x[0])
            };
            if let Some((w, da)) = a.expand(self, b, total) {
                let db = b.visited[&w];
                let (left_steps, right_steps) = if turn == 0 { (da, db) } else { (db, da) };
                return JoinVerdict::Joinable {
                    witness: w,
                    left_steps,
                    right_steps,
                };
            }
            turn = 1 - turn;
        }
        for s in &mut sides {
            if !s.frontier.is_empty() {
                let rel = s.rel;
                let open = s.frontier.iter().any(|t| {
                    let n = self.next_terms(t, rel);
                    n.undecided || !n.terms.is_empty()
                });
                s.truncated |= open;
            }
        }
        let explored = sides[0].visited.len() + sides[1].visited.len();
        if !sides[0].truncated && !sides[1].truncated {
            JoinVerdict::Refuted {
                reason: format!(
                    "reachable sets fully explored ({} and {} terms) and disjoint",
                    sides[0].visited.len(),
                    sides[1].visited.len()
                ),
            }
        } else {
            JoinVerdict::NotJoinableWithinBudget { explored }
        }
    }

    pub fn joinable(&self, t: &Term, u: &Term, rel: Rel) -> JoinVerdict {
        self.join(t, rel, u, rel)
    }

    /// Breadth-first closure of `t` within the budget.
    pub fn reach(&self, t: &Term, rel: Rel) -> Reach {
        let mut index: HashMap<Term, usize> = HashMap::new();
        let mut terms = vec![(t.clone(), 0)];
        index.insert(t.clone(), 0);
        let mut edges = Vec::new();
        let mut truncated = false;
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let (cur, depth) = terms[i].clone();
            let succ = self.successors(&cur, rel);
            truncated |= !succ.undecided.is_empty();
            if succ.steps.is_empty() {
                continue;
            }
            if depth >= self.fuel.max_steps {
                truncated = true;
                continue;
            }
            for step in succ.steps {
                if step.to.size() > self.fuel.max_term_size {
                    truncated = true;
                    continue;
                }
                let j = match index.get(&step.to) {
                    Some(&j) => j,
                    None => {
                        if terms.len() >= self.fuel.max_nodes {
                            truncated = true;
                            continue;
                        }
                        let j = terms.len();
                        index.insert(step.to.clone(), j);
                        terms.push((step.to.clone(), depth + 1));
                        queue.push_back(j);
                        j
                    }
                };
                edges.push((i, j, step.rule, step.level));
            }
        }
        Reach {
            terms,
            edges,
            truncated,
        }
    }

    pub fn reduce_many(&self, t: &Term, rel: Rel, strategy: Strategy) -> Derivation {
        match strategy {
            Strategy::LeftmostOutermost => self.reduce_lo(t, rel),
            Strategy::FullEnumerationFirst => self.reduce_bfs(t, rel),
        }
    }

    fn reduce_lo(&self, t: &Term, rel: Rel) -> Derivation {
        let mut steps: Vec<LevelStep> = Vec::new();
        let mut cur = t.clone();
        loop {
            let succ = self.successors(&cur, rel);
            let Some(step) = succ.steps.into_iter().next() else {
                let end = if succ.undecided.is_empty() {
                    DerivationEnd::Normal
                } else {
                    DerivationEnd::Undecided
                };
                return Derivation {
                    start: t.clone(),
                    steps,
                    end,
                };
            };
            if steps.len() >= self.fuel.max_steps || step.to.size() > self.fuel.max_term_size {
                return Derivation {
                    start: t.clone(),
                    steps,
                    end: DerivationEnd::FuelExhausted,
                };
            }
            cur = step.to.clone();
            steps.push(step);
        }
    }

    /// Shortest derivation to the first normal form met breadth-first.
    fn reduce_bfs(&self, t: &Term, rel: Rel) -> Derivation {
        let mut parent: HashMap<Term, Option<LevelStep>> = HashMap::new();
        parent.insert(t.clone(), None);
        let mut queue = VecDeque::from([(t.clone(), 0usize)]);
        let mut undecided_seen = false;
        let mut found = None;
        while let Some((cur, depth)) = queue.pop_front() {
            let succ = self.successors(&cur, rel);
            if succ.steps.is_empty() {
                if succ.undecided.is_empty() {
                    found = Some(cur);
                    break;
                }
                undecided_seen = true;
                continue;
            }
            if depth >= self.fuel.max_steps {
                continue;
            }
            for step in succ.steps {
                if step.to.size() > self.fuel.max_term_size || parent.contains_key(&step.to) {
                    continue;
                }
                if parent.len() >= self.fuel.max_nodes {
                    break;
                }
                queue.push_back((step.to.clone(), depth + 1));
                parent.insert(step.to.clone(), Some(step));
            }
        }
        let Some(end_term) = found else {
            let mut d = self.reduce_lo(t, rel);
            if d.end == DerivationEnd::Normal {
                d.end = DerivationEnd::FuelExhausted;
            }
            if undecided_seen && d.end != DerivationEnd::FuelExhausted {
                d.end = DerivationEnd::Undecided;
            }
            return d;
        };
        let mut steps = Vec::new();
        let mut cur = end_term;
        while let Some(Some(step)) = parent.get(&cur) {
            cur = step.from.clone();
            steps.push(step.clone());
        }
        steps.reverse();
        Derivation {
            start: t.clone(),
            steps,
            end: DerivationEnd::Normal,
        }
    }

    /// Terms reached by contracting any set of pairwise disjoint redexes.
    pub fn parallel(&self, t: &Term, rel: Rel) -> TermSet {
        let mut memo = HashMap::new();
        let mut flags = Flags::default();
        let set = self.par(t, rel, &mut memo, &mut flags);
        TermSet {
            terms: (*set).clone(),
            truncated: flags.truncated,
        }
    }

    fn par(
        &self,
        t: &Term,
        rel: Rel,
        memo: &mut HashMap<Term, Arc<BTreeSet<Term>>>,
        flags: &mut Flags,
    ) -> Arc<BTreeSet<Term>> {
        if let Some(s) = memo.get(t) {
            return s.clone();
        }
        let cap = self.fuel.max_nodes;
        let mut out = BTreeSet::new();
        out.insert(t.clone());
        let mut und = Vec::new();
        for rs in self.root_steps(t, rel, &mut und) {
            out.insert(rs.contractum);
        }
        flags.truncated |= !und.is_empty();
        match t {
            Term::App(f, a) => {
                let fs = self.par(f, rel, memo, flags);
                let as_ = self.par(a, rel, memo, flags);
                flags.product(&mut out, &fs, &as_, cap, |x, y| Term::app(x.clone(), y.clone()));
            }
            Term::Lam(h, b) => {
                for b2 in self.par(b, rel, memo, flags).iter() {
                    out.insert(Term::Lam(h.clone(), Arc::new(b2.clone())));
                }
            }
            _ => {}
        }
        let out = Arc::new(out);
        memo.insert(t.clone(), out.clone());
        out
    }

    /// Nested parallel reduction: a root step `lσ -> rσ` may be combined with
    /// nested parallel steps inside the matched substitution.
    pub fn nested(&self, t: &Term, rel: Rel) -> TermSet {
        let mut memo = HashMap::new();
        let mut flags = Flags::default();
        let set = self.nest(t, rel, &mut memo, &mut flags);
        TermSet {
            terms: (*set).clone(),
            truncated: flags.truncated,
        }
    }

    fn nest(
        &self,
        t: &Term,
        rel: Rel,
        memo: &mut HashMap<Term, Arc<BTreeSet<Term>>>,
        flags: &mut Flags,
    ) -> Arc<BTreeSet<Term>> {
        if let Some(s) = memo.get(t) {
            return s.clone();
        }
        let cap = self.fuel.max_nodes;
        let mut out = BTreeSet::new();
        out.insert(t.clone());
        match t {
            Term::App(f, a) => {
                let fs = self.nest(f, rel, memo, flags);
                let as_ = self.nest(a, rel, memo, flags);
                flags.product(&mut out, &fs, &as_, cap, |x, y| Term::app(x.clone(), y.clone()));
                if rel.mode.has_beta() {
                    if let Term::Lam(_, b) = &**f {
                        let bs = self.nest(b, rel, memo, flags);
                        flags.product(&mut out, &bs, &as_, cap, Term::instantiate);
                    }
                }
            }
            Term::Lam(h, b) => {
                for b2 in self.nest(b, rel, memo, flags).iter() {
                    out.insert(Term::Lam(h.clone(), Arc::new(b2.clone())));
                }
            }
            _ => {}
        }
        let mut und = Vec::new();
        let fired: Vec<Name> = self
            .root_steps(t, rel, &mut und)
            .into_iter()
            .filter_map(|s| match s.label {
                StepLabel::Rule(r) => Some(r),
                StepLabel::Beta => None,
            })
            .collect();
        flags.truncated |= !und.is_empty();
        for rname in fired {
            let rule = self.rs.rule(&rname).expect("rule of this system");
            let mut sigma = Substitution::new();
            if !match_into(&rule.lhs, t, &mut sigma) {
                continue;
            }
            let mut taus = vec![Substitution::new()];
            for (x, v) in &sigma {
                let vs = self.nest(v, rel, memo, flags);
                let mut next = Vec::new();
                for tau in &taus {
                    for v2 in vs.iter() {
                        if next.len() >= cap {
                            flags.truncated = true;
                            break;
                        }
                        let mut tau2 = tau.clone();
                        tau2.insert(x.clone(), v2.clone());
                        next.push(tau2);
                    }
                }
                taus = next;
            }
            for tau in taus {
                if out.len() >= cap {
                    flags.truncated = true;
                    break;
                }
                out.insert(rule.rhs.substitute(&tau));
            }
        }
        let out = Arc::new(out);
        memo.insert(t.clone(), out.clone());
        out
    }
}

#[derive(Default)]
struct Flags {
    truncated: bool,
}

impl Flags {
    fn product(
        &mut self,
        out: &mut BTreeSet<Term>,
        xs: &BTreeSet<Term>,
        ys: &BTreeSet<Term>,
        cap: usize,
        f: impl Fn(&Term, &Term) -> Term,
    ) {
        for x in xs {
            for y in ys {
                if out.len() >= cap {
                    self.truncated = true;
                    return;
                }
                out.insert(f(x, y));
            }
        }
    }
}

struct Side {
    rel: Rel,
    visited: HashMap<Term, usize>,
    frontier: Vec<Term>,
    depth: usize,
    truncated: bool,
}

impl Side {
    fn new(t: &Term, rel: Rel) -> Side {
        Side {
            rel,
            visited: HashMap::from([(t.clone(), 0)]),
            frontier: vec![t.clone()],
            depth: 0,
            truncated: false,
        }
    }

    /// Expands one layer; returns a term already seen by `other`.
    fn expand(&mut self, rw: &Rewriter, other: &Side, total: usize) -> Option<(Term, usize)> {
        let fuel = rw.fuel;
        let mut next_frontier = Vec::new();
        let mut seen_here: HashSet<Term> = HashSet::new();
        let mut total = total;
        let frontier = std::mem::take(&mut self.frontier);
        for t in &frontier {
            let n = rw.next_terms(t, self.rel);
            self.truncated |= n.undecided;
            for u in &n.terms {
                if self.visited.contains_key(u) || seen_here.contains(u) {
                    continue;
                }
                if u.size() > fuel.max_term_size {
                    self.truncated = true;
                    continue;
                }
                if total >= fuel.max_nodes {
                    self.truncated = true;
                    continue;
                }
                total += 1;
                seen_here.insert(u.clone());
                self.visited.insert(u.clone(), self.depth + 1);
                if other.visited.contains_key(u) {
                    return Some((u.clone(), self.depth + 1));
                }
                next_frontier.push(u.clone());
            }
        }
        self.depth += 1;
        self.frontier = next_frontier;
        None
    }
}

pub fn successors(t: &Term, rs: &RuleSystem, mode: Mode, level: usize, fuel: Fuel) -> Successors {
    Rewriter::new(rs, fuel).successors(t, Rel::new(mode, level))
}

pub fn rbeta_successors(t: &Term, rs: &RuleSystem, level: usize, fuel: Fuel) -> Successors {
    successors(t, rs, Mode::RBeta, level, fuel)
}

pub fn joinable(t: &Term, u: &Term, rs: &RuleSystem, mode: Mode, level: usize, fuel: Fuel) -> JoinVerdict {
    Rewriter::new(rs, fuel).joinable(t, u, Rel::new(mode, level))
}

pub fn reduce_many(
    t: &Term,
    rs: &RuleSystem,
    mode: Mode,
    level: usize,
    fuel: Fuel,
    strategy: Strategy,
) -> Derivation {
    Rewriter::new(rs, fuel).reduce_many(t, Rel::new(mode, level), strategy)
}

pub fn parallel_closure_successors(t: &Term, rs: &RuleSystem, mode: Mode, level: usize, fuel: Fuel) -> TermSet {
    Rewriter::new(rs, fuel).parallel(t, Rel::new(mode, level))
}

pub fn nested_parallel_successors(t: &Term, rs: &RuleSystem, mode: Mode, level: usize, fuel: Fuel) -> TermSet {
    Rewriter::new(rs, fuel).nested(t, Rel::new(mode, level))
}

/// Doubles the level until the successor set of `t` stops growing or `cap`
/// is reached. Returns the level found and whether the cap was hit.
pub fn stable_level(t: &Term, rs: &RuleSystem, mode: Mode, cap: usize, fuel: Fuel) -> (usize, bool) {
    let rw = Rewriter::new(rs, fuel);
    let mut level = 1;
    let mut prev = rw.successor_terms(t, Rel::new(mode, level)).terms;
    while level < cap {
        let next_level = (level * 2).min(cap);
        let cur = rw.successor_terms(t, Rel::new(mode, next_level)).terms;
        if cur == prev {
            return (level, false);
        }
        prev = cur;
        level = next_level;
    }
    (level, true)
}
