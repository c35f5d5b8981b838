//! Bounded reduction graphs and diagram checks. A report with no failures
//! and no truncation certifies the diagram on the explored fragment only.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::beta::{beta_step_at, in_an, parallel_beta_successors, AnVerdict, Fuel, TermSet};
use crate::gen::TermGen;
use crate::position::Position;
use crate::rewrite::{JoinVerdict, LevelStep, Mode, Rel, Rewriter, StepLabel};
use crate::rules::{classify_system, stability_system, RuleSystem};
use crate::term::{Arity, Name, Term};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum EdgeLabel {
    Beta,
    Rule { name: Name, level: usize },
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeLabel::Beta => f.write_str("beta"),
            EdgeLabel::Rule { name, level } => write!(f, "{name}@{level}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphEdge {
    pub from: usize,
    pub to: usize,
    pub label: EdgeLabel,
}

/// Nodes in breadth-first discovery order; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionGraph {
    pub root: Term,
    pub relation: Rel,
    pub nodes: Vec<Term>,
    pub edges: Vec<GraphEdge>,
    pub truncated: bool,
}

impl ReductionGraph {
    pub fn contains(&self, t: &Term) -> bool {
        self.nodes.contains(t)
    }

    /// Nodes without outgoing edges.
    pub fn leaves(&self) -> Vec<&Term> {
        let sources: BTreeSet<usize> = self.edges.iter().map(|e| e.from).collect();
        (0..self.nodes.len())
            .filter(|i| !sources.contains(i))
            .map(|i| &self.nodes[i])
            .collect()
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph reduction {\n");
        for (i, t) in self.nodes.iter().enumerate() {
            s.push_str(&format!("  n{i} [label={}];\n", quote(&t.to_string())));
        }
        for e in &self.edges {
            s.push_str(&format!(
                "  n{} -> n{} [label={}];\n",
                e.from,
                e.to,
                quote(&e.label.to_string())
            ));
        }
        s.push_str("}\n");
        s
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn explore(t: &Term, rs: &RuleSystem, mode: Mode, level: usize, fuel: Fuel) -> ReductionGraph {
    let rel = Rel::new(mode, level);
    let reach = Rewriter::new(rs, fuel).reach(t, rel);
    ReductionGraph {
        root: t.clone(),
        relation: rel,
        nodes: reach.terms.into_iter().map(|(t, _)| t).collect(),
        edges: reach
            .edges
            .into_iter()
            .map(|(from, to, label, level)| GraphEdge {
                from,
                to,
                label: match label {
                    StepLabel::Beta => EdgeLabel::Beta,
                    StepLabel::Rule(name) => EdgeLabel::Rule { name, level },
                },
            })
            .collect(),
        truncated: reach.truncated,
    }
}

/// One-step relations the diagram checks are stated over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Step(Rel),
    /// Parallel beta (`⊳β`).
    ParallelBeta,
    /// Parallel contraction of disjoint rule redexes (`∥`).
    Parallel(Rel),
    /// Nested parallel reduction (`⊳`).
    Nested(Rel),
}

impl Relation {
    /// Successors of `t`, without `t` itself.
    pub fn one_step(&self, rw: &Rewriter, t: &Term) -> TermSet {
        let mut set = match *self {
            Relation::Step(rel) => rw.successor_terms(t, rel),
            Relation::ParallelBeta => parallel_beta_successors(t, rw.fuel()),
            Relation::Parallel(rel) => rw.parallel(t, rel),
            Relation::Nested(rel) => rw.nested(t, rel),
        };
        set.terms.remove(t);
        set
    }

    /// The single-step relation with the same reflexive-transitive closure.
    pub fn closure(&self) -> Rel {
        match *self {
            Relation::Step(rel) | Relation::Parallel(rel) | Relation::Nested(rel) => rel,
            Relation::ParallelBeta => Rel::beta(),
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::Step(rel) => write!(f, "{rel}"),
            Relation::ParallelBeta => f.write_str("ParallelBeta"),
            Relation::Parallel(rel) => write!(f, "Parallel({rel})"),
            Relation::Nested(rel) => write!(f, "Nested({rel})"),
        }
    }
}

impl Serialize for Relation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Diagram {
    Diamond,
    Confluence,
    LevelConfluence(usize),
    ShallowConfluence(usize, usize),
    Commutation(Relation, Relation),
    ProjectionBnf(usize),
    ParallelMoves(usize, usize),
}

impl fmt::Display for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagram::Diamond => f.write_str("Diamond"),
            Diagram::Confluence => f.write_str("Confluence"),
            Diagram::LevelConfluence(i) => write!(f, "LevelConfluence({i})"),
            Diagram::ShallowConfluence(i, j) => write!(f, "ShallowConfluence({i}, {j})"),
            Diagram::Commutation(a, b) => write!(f, "Commutation({a}, {b})"),
            Diagram::ProjectionBnf(i) => write!(f, "ProjectionBnf({i})"),
            Diagram::ParallelMoves(i, j) => write!(f, "ParallelMoves({i}, {j})"),
        }
    }
}

/// `left <- source -> right`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Peak {
    pub source: Term,
    pub left: Term,
    pub right: Term,
}

impl fmt::Display for Peak {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <- {} -> {}", self.left, self.source, self.right)
    }
}

/// A peak that did not close. `left` was reached from `source` by
/// `left_rel`, `right` by `right_rel`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub peak: Peak,
    pub left_rel: Relation,
    pub right_rel: Relation,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagramReport {
    pub diagram: Diagram,
    pub checked_peaks: usize,
    pub failures: Vec<Failure>,
    pub truncated: bool,
    pub seed: Option<u64>,
    pub notes: Vec<String>,
}

impl DiagramReport {
    fn new(diagram: Diagram, seed: Option<u64>) -> Self {
        DiagramReport {
            diagram,
            checked_peaks: 0,
            failures: Vec::new(),
            truncated: false,
            seed,
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for DiagramReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} peaks checked, {} failures",
            self.diagram,
            self.checked_peaks,
            self.failures.len()
        )?;
        if self.truncated {
            f.write_str(" (truncated)")?;
        }
        if let Some(seed) = self.seed {
            write!(f, " seed={seed}")?;
        }
        for n in &self.notes {
            write!(f, "\n  note: {n}")?;
        }
        for x in &self.failures {
            write!(
                f,
                "\n  failure: {} [{} / {}]: {}",
                x.peak, x.left_rel, x.right_rel, x.verdict
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabError {
    #[error("`{term}` is not reachable from `{start}` under {relation}{}", if *.truncated { " within budget" } else { "" })]
    PeakNotReproducible {
        start: Term,
        term: Term,
        relation: Rel,
        truncated: bool,
    },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Reachability {
    Found(usize),
    Unreachable,
    Unknown,
}

/// Breadth-first search from `from` for `target`, stopping when found.
pub fn reaches(rw: &Rewriter, from: &Term, rel: Rel, target: &Term) -> Reachability {
    if from == target {
        return Reachability::Found(0);
    }
    let fuel = rw.fuel();
    let mut seen: HashSet<Term> = HashSet::from([from.clone()]);
    let mut queue = VecDeque::from([(from.clone(), 0usize)]);
    let mut truncated = false;
    while let Some((t, d)) = queue.pop_front() {
        let next = rw.successor_terms(&t, rel);
        truncated |= next.truncated;
        if next.terms.is_empty() {
            continue;
        }
        if d >= fuel.max_steps {
            truncated = true;
            continue;
        }
        for u in next.terms {
            if u == *target {
                return Reachability::Found(d + 1);
            }
            if u.size() > fuel.max_term_size || seen.len() >= fuel.max_nodes {
                truncated = true;
                continue;
            }
            if seen.insert(u.clone()) {
                queue.push_back((u, d + 1));
            }
        }
    }
    if truncated {
        Reachability::Unknown
    } else {
        Reachability::Unreachable
    }
}

fn require_reachable(rw: &Rewriter, t: &Term, rel: Rel, u: &Term) -> Result<(), LabError> {
    match reaches(rw, t, rel, u) {
        Reachability::Found(_) => Ok(()),
        r => Err(LabError::PeakNotReproducible {
            start: t.clone(),
            term: u.clone(),
            relation: rel,
            truncated: r == Reachability::Unknown,
        }),
    }
}

fn diagram_for(left: Rel, right: Rel) -> Diagram {
    if left == right {
        if left.mode == Mode::Beta {
            Diagram::Confluence
        } else {
            Diagram::LevelConfluence(left.level)
        }
    } else {
        Diagram::ShallowConfluence(left.level, right.level)
    }
}

/// Common reduct of `left` under `lrel` and `right` under `rrel`. One layer of
/// the search is one step of the side's own relation, so a `⊳β` side closes
/// a parallel contraction in a single layer.
pub fn join_relations(rw: &Rewriter, left: &Term, lrel: Relation, right: &Term, rrel: Relation) -> JoinVerdict {
    if let (Relation::Step(a), Relation::Step(b)) = (lrel, rrel) {
        return rw.join(left, a, right, b);
    }
    if left == right {
        return JoinVerdict::Joinable {
            witness: left.clone(),
            left_steps: 0,
            right_steps: 0,
        };
    }
    let fuel = rw.fuel();
    let mut sides = [SearchSide::new(left, lrel), SearchSide::new(right, rrel)];
    let mut turn = 0;
    loop {
        let open = |s: &SearchSide| !s.frontier.is_empty() && s.depth < fuel.max_steps;
        if !open(&sides[0]) && !open(&sides[1]) {
            break;
        }
        if !open(&sides[turn]) {
            turn = 1 - turn;
        }
        let total = sides[0].visited.len() + sides[1].visited.len();
        let (x, y) = sides.split_at_mut(1);
        let (a, b) = if turn == 0 { (&mut x[0], &y[0]) } else { (&mut y[0], &x[0]) };
        if let Some((w, da)) = a.expand(rw, b, total) {
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
        let rel = s.rel;
        s.truncated |= s.frontier.iter().any(|t| !rel.one_step(rw, t).terms.is_empty());
    }
    if sides.iter().any(|s| s.truncated) {
        JoinVerdict::NotJoinableWithinBudget {
            explored: sides[0].visited.len() + sides[1].visited.len(),
        }
    } else {
        JoinVerdict::Refuted {
            reason: format!(
                "reachable sets fully explored ({} and {} terms) and disjoint",
                sides[0].visited.len(),
                sides[1].visited.len()
            ),
        }
    }
}

struct SearchSide {
    rel: Relation,
    visited: HashMap<Term, usize>,
    frontier: Vec<Term>,
    depth: usize,
    truncated: bool,
}

impl SearchSide {
    fn new(t: &Term, rel: Relation) -> Self {
        SearchSide {
            rel,
            visited: HashMap::from([(t.clone(), 0)]),
            frontier: vec![t.clone()],
            depth: 0,
            truncated: false,
        }
    }

    fn expand(&mut self, rw: &Rewriter, other: &SearchSide, mut total: usize) -> Option<(Term, usize)> {
        let fuel = rw.fuel();
        let mut next = Vec::new();
        for t in std::mem::take(&mut self.frontier) {
            let succ = self.rel.one_step(rw, &t);
            self.truncated |= succ.truncated;
            for u in succ.terms {
                if self.visited.contains_key(&u) {
                    continue;
                }
                if u.size() > fuel.max_term_size || total >= fuel.max_nodes {
                    self.truncated = true;
                    continue;
                }
                total += 1;
                self.visited.insert(u.clone(), self.depth + 1);
                if other.visited.contains_key(&u) {
                    return Some((u, self.depth + 1));
                }
                next.push(u);
            }
        }
        self.depth += 1;
        self.frontier = next;
        None
    }
}

/// Closes `u <-* t ->* v`: `u` continues under the right relation and `v`
/// under the left one.
fn close(
    rw: &Rewriter,
    report: &mut DiagramReport,
    peak: Peak,
    left_rel: Relation,
    right_rel: Relation,
) -> JoinVerdict {
    report.checked_peaks += 1;
    let verdict = join_relations(rw, &peak.left, right_rel, &peak.right, left_rel);
    if !verdict.is_joinable() {
        report.truncated |= !verdict.is_refuted();
        report.failures.push(Failure {
            peak,
            left_rel,
            right_rel,
            verdict: verdict.to_string(),
        });
    }
    verdict
}

#[allow(clippy::too_many_arguments)]
pub fn check_peak(
    t: &Term,
    u: &Term,
    v: &Term,
    rs: &RuleSystem,
    mode_left: Mode,
    mode_right: Mode,
    level_left: usize,
    level_right: usize,
    fuel: Fuel,
) -> Result<DiagramReport, LabError> {
    let rw = Rewriter::new(rs, fuel);
    let (lrel, rrel) = (Rel::new(mode_left, level_left), Rel::new(mode_right, level_right));
    require_reachable(&rw, t, lrel, u)?;
    require_reachable(&rw, t, rrel, v)?;
    let mut report = DiagramReport::new(diagram_for(lrel, rrel), None);
    let peak = Peak {
        source: t.clone(),
        left: u.clone(),
        right: v.clone(),
    };
    close(&rw, &mut report, peak, Relation::Step(lrel), Relation::Step(rrel));
    Ok(report)
}

/// Samples one-step peaks `u <-A t ->B v` and searches `w` with
/// `u ->*B w <-*A v`. Generated terms with no such peak are skipped, up to
/// twenty draws per requested peak.
pub fn check_commutation_sample(
    rs: &RuleSystem,
    a: Relation,
    b: Relation,
    gen: &mut TermGen,
    samples: usize,
    fuel: Fuel,
) -> DiagramReport {
    let rw = Rewriter::new(rs, fuel);
    let mut report = DiagramReport::new(Diagram::Commutation(a, b), Some(gen.seed()));
    let mut draws = 0;
    while report.checked_peaks < samples && draws < samples * 20 {
        draws += 1;
        let t = gen.term();
        let us: Vec<Term> = a.one_step(&rw, &t).terms.into_iter().collect();
        let vs: Vec<Term> = b.one_step(&rw, &t).terms.into_iter().collect();
        let (Some(u), Some(v)) = (gen.choose(&us).cloned(), gen.choose(&vs).cloned()) else {
            continue;
        };
        let peak = Peak {
            source: t,
            left: u,
            right: v,
        };
        close(&rw, &mut report, peak, a, b);
    }
    if report.checked_peaks < samples {
        report.truncated = true;
        report.notes.push(format!(
            "only {} of {samples} peaks found in {draws} generated terms",
            report.checked_peaks
        ));
    }
    report
}

/// A random derivation of at most `len` steps.
pub fn random_derivation(rw: &Rewriter, t: &Term, rel: Rel, len: usize, gen: &mut TermGen) -> Vec<LevelStep> {
    let mut steps = Vec::new();
    let mut cur = t.clone();
    for _ in 0..len {
        let succ = rw.successors(&cur, rel);
        let fitting: Vec<LevelStep> = succ
            .steps
            .into_iter()
            .filter(|s| s.to.size() <= rw.fuel().max_term_size)
            .collect();
        let Some(step) = gen.choose(&fitting).cloned() else {
            break;
        };
        cur = step.to.clone();
        steps.push(step);
    }
    steps
}

/// Samples peaks `u <-*i t ->*j v` of at most `peak_len` steps per side
/// under `mode`, and joins `u ->*j w <-*i v`.
#[allow(clippy::too_many_arguments)]
pub fn check_shallow_sample(
    rs: &RuleSystem,
    mode: Mode,
    i: usize,
    j: usize,
    gen: &mut TermGen,
    samples: usize,
    peak_len: usize,
    fuel: Fuel,
) -> DiagramReport {
    let rw = Rewriter::new(rs, fuel);
    let (ri, rj) = (Rel::new(mode, i), Rel::new(mode, j));
    let mut report = DiagramReport::new(diagram_for(ri, rj), Some(gen.seed()));
    let mut draws = 0;
    while report.checked_peaks < samples && draws < samples * 20 {
        draws += 1;
        let t = gen.term();
        let n = 1 + gen.gen_range(0..peak_len.max(1));
        let left = random_derivation(&rw, &t, ri, n, gen);
        let n = 1 + gen.gen_range(0..peak_len.max(1));
        let right = random_derivation(&rw, &t, rj, n, gen);
        let (Some(u), Some(v)) = (left.last(), right.last()) else {
            continue;
        };
        let peak = Peak {
            source: t.clone(),
            left: u.to.clone(),
            right: v.to.clone(),
        };
        close(&rw, &mut report, peak, Relation::Step(ri), Relation::Step(rj));
    }
    if report.checked_peaks < samples {
        report.truncated = true;
        report.notes.push(format!(
            "only {} of {samples} peaks found in {draws} generated terms",
            report.checked_peaks
        ));
    }
    report
}

/// Every `⊳β` peak from each term closes with one `⊳β` step per side.
pub fn check_parallel_beta_diamond<'t>(terms: impl IntoIterator<Item = &'t Term>, fuel: Fuel) -> DiagramReport {
    let mut report = DiagramReport::new(Diagram::Diamond, None);
    let mut memo: HashMap<Term, BTreeSet<Term>> = HashMap::new();
    let mut par = |t: &Term, report: &mut DiagramReport| -> BTreeSet<Term> {
        if let Some(s) = memo.get(t) {
            return s.clone();
        }
        let set = parallel_beta_successors(t, fuel);
        report.truncated |= set.truncated;
        memo.insert(t.clone(), set.terms.clone());
        set.terms
    };
    for t in terms {
        let succ: Vec<Term> = par(t, &mut report).into_iter().collect();
        let closures: Vec<BTreeSet<Term>> = succ.iter().map(|u| par(u, &mut report)).collect();
        for x in 0..succ.len() {
            for y in x..succ.len() {
                report.checked_peaks += 1;
                if closures[x].is_disjoint(&closures[y]) {
                    report.failures.push(Failure {
                        peak: Peak {
                            source: t.clone(),
                            left: succ[x].clone(),
                            right: succ[y].clone(),
                        },
                        left_rel: Relation::ParallelBeta,
                        right_rel: Relation::ParallelBeta,
                        verdict: "no common parallel-beta reduct".into(),
                    });
                }
            }
        }
    }
    report
}

/// Replays `step` under `mode` at the step's level.
pub fn replay_step(rw: &Rewriter, step: &LevelStep, mode: Mode) -> bool {
    match step.rule {
        StepLabel::Beta => beta_step_at(&step.from, &step.position).is_ok_and(|u| u == step.to),
        StepLabel::Rule(_) => rw
            .successors(&step.from, Rel::new(mode, step.level))
            .steps
            .iter()
            .any(|s| s.position == step.position && s.rule == step.rule && s.to == step.to),
    }
}

/// Checks that a `beta ∪ R_i` (or `beta ∪ R(beta)_i`) derivation from `t`
/// projects to an `R_i` derivation between beta-normal forms.
pub fn check_projection_bnf(
    rs: &RuleSystem,
    alpha: &Arity,
    t: &Term,
    derivation: &[LevelStep],
    fuel: Fuel,
) -> Result<DiagramReport, LabError> {
    let c = classify_system(rs);
    if !c.algebraic.value.is_true() {
        return Err(LabError::HypothesisViolated(format!(
            "the system is not algebraic: {}",
            c.algebraic.reason
        )));
    }
    let respects = crate::rules::respects_arity_system(rs, alpha)
        .map_err(|e| LabError::HypothesisViolated(e.to_string()))?;
    if !respects {
        return Err(LabError::HypothesisViolated("the system does not respect the arity".into()));
    }
    let an = |u: &Term, what: &str| -> Result<Term, LabError> {
        match in_an(u, alpha, fuel).map_err(|e| LabError::HypothesisViolated(e.to_string()))? {
            AnVerdict::Yes(n) => Ok(n),
            AnVerdict::No => Err(LabError::HypothesisViolated(format!(
                "{what} `{u}` is not in AN: its beta-normal form breaks the arity"
            ))),
            AnVerdict::Unknown => Err(LabError::HypothesisViolated(format!(
                "{what} `{u}`: no beta-normal form within budget"
            ))),
        }
    };
    let tn = an(t, "start term")?;
    let rw = Rewriter::new(rs, fuel);
    let mut cur = t.clone();
    let mut level = 0;
    for (k, step) in derivation.iter().enumerate() {
        let valid = step.from == cur
            && (replay_step(&rw, step, Mode::BetaUnionR) || replay_step(&rw, step, Mode::BetaUnionRBeta));
        if !valid {
            return Err(LabError::HypothesisViolated(format!(
                "step {} is not a beta or rule step from `{cur}`",
                k + 1
            )));
        }
        level = level.max(step.level);
        cur = step.to.clone();
    }
    let level = level.max(1);
    let mut report = DiagramReport::new(Diagram::ProjectionBnf(level), None);
    report.checked_peaks = 1;
    let un = match an(&cur, "end term") {
        Ok(n) => n,
        Err(e) => {
            report.failures.push(projection_failure(t, &tn, &cur, level, e.to_string()));
            return Ok(report);
        }
    };
    let rel = Rel::new(Mode::R, level);
    match reaches(&rw, &tn, rel, &un) {
        Reachability::Found(_) => {}
        r => {
            report.truncated = r == Reachability::Unknown;
            report
                .failures
                .push(projection_failure(t, &tn, &un, level, format!("no R_{level} derivation found ({r:?})")));
        }
    }
    Ok(report)
}

/// Draws terms in AN from `gen`, follows a random `mode` derivation of at
/// most `len` steps at `level` from each, and projects it.
#[allow(clippy::too_many_arguments)]
pub fn check_projection_sample(
    rs: &RuleSystem,
    alpha: &Arity,
    mode: Mode,
    level: usize,
    gen: &mut TermGen,
    samples: usize,
    len: usize,
    fuel: Fuel,
) -> Result<DiagramReport, LabError> {
    let rw = Rewriter::new(rs, fuel);
    let rel = Rel::new(mode, level);
    let mut report = DiagramReport::new(Diagram::ProjectionBnf(level), Some(gen.seed()));
    let mut draws = 0;
    while report.checked_peaks < samples && draws < samples * 20 {
        draws += 1;
        let t = gen.term();
        if !matches!(in_an(&t, alpha, fuel), Ok(AnVerdict::Yes(_))) {
            continue;
        }
        let n = 1 + gen.gen_range(0..len.max(1));
        let d = random_derivation(&rw, &t, rel, n, gen);
        let one = check_projection_bnf(rs, alpha, &t, &d, fuel)?;
        report.checked_peaks += 1;
        report.truncated |= one.truncated;
        report.failures.extend(one.failures);
    }
    if report.checked_peaks < samples {
        report.truncated = true;
        report.notes.push(format!(
            "only {} of {samples} AN terms found in {draws} generated terms",
            report.checked_peaks
        ));
    }
    Ok(report)
}

fn projection_failure(t: &Term, tn: &Term, un: &Term, level: usize, verdict: String) -> Failure {
    Failure {
        peak: Peak {
            source: t.clone(),
            left: tn.clone(),
            right: un.clone(),
        },
        left_rel: Relation::Step(Rel::beta()),
        right_rel: Relation::Step(Rel::new(Mode::R, level)),
        verdict,
    }
}

/// One contraction of a rule redex at a position.
#[derive(Debug, Clone)]
struct Contraction {
    position: Position,
    contractum: Term,
}

fn rule_contractions(rw: &Rewriter, t: &Term, rel: Rel) -> Vec<Contraction> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for s in rw.successors(t, rel).steps {
        if s.rule == StepLabel::Beta {
            continue;
        }
        let contractum = s.to.subterm_at(&s.position).expect("step position").clone();
        if seen.insert((s.position.clone(), contractum.clone())) {
            out.push(Contraction {
                position: s.position,
                contractum,
            });
        }
    }
    out
}

/// Sets of pairwise disjoint contractions (one per position), as index lists.
fn disjoint_sets(cs: &[Contraction]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for k in 0..cs.len() {
        let mut more = Vec::new();
        for set in &out {
            if set.iter().all(|&i: &usize| cs[i].position.disjoint(&cs[k].position)) {
                let mut s = set.clone();
                s.push(k);
                more.push(s);
            }
        }
        out.extend(more);
    }
    out
}

fn random_disjoint_set(cs: &[Contraction], gen: &mut TermGen) -> Vec<usize> {
    let mut order: Vec<usize> = (0..cs.len()).collect();
    for k in (1..order.len()).rev() {
        let m = gen.gen_range(0..k + 1);
        order.swap(k, m);
    }
    let mut set: Vec<usize> = Vec::new();
    for k in order {
        if gen.gen_bool(0.5) && set.iter().all(|&i| cs[i].position.disjoint(&cs[k].position)) {
            set.push(k);
        }
    }
    set.sort_unstable();
    set
}

fn apply_set(t: &Term, cs: &[Contraction], set: &[usize]) -> Term {
    set.iter().fold(t.clone(), |acc, &k| {
        acc.replace_at(&cs[k].position, cs[k].contractum.clone())
            .expect("disjoint positions stay valid")
    })
}

/// Samples peaks `u <-∥j t ->∥i v` of parallel `R(beta)` steps and closes
/// them with one parallel step per side. Below six redexes every pair of
/// disjoint redex sets is checked.
pub fn check_parallel_moves(
    rs: &RuleSystem,
    i: usize,
    j: usize,
    gen: &mut TermGen,
    samples: usize,
    fuel: Fuel,
) -> DiagramReport {
    let rw = Rewriter::new(rs, fuel);
    let (ri, rj) = (Rel::new(Mode::RBeta, i), Rel::new(Mode::RBeta, j));
    let mut report = DiagramReport::new(Diagram::ParallelMoves(i, j), Some(gen.seed()));
    if !crate::critical::orthonormal_check(rs).is_true() {
        report.notes.push("the system is not orthonormal; the report is advisory".into());
    }
    let mut memo: BTreeMap<(Term, Rel), BTreeSet<Term>> = BTreeMap::new();
    let mut par = |t: &Term, rel: Rel, report: &mut DiagramReport| -> BTreeSet<Term> {
        memo.entry((t.clone(), rel))
            .or_insert_with(|| {
                let set = rw.parallel(t, rel);
                report.truncated |= set.truncated;
                set.terms
            })
            .clone()
    };
    let mut sampled = 0;
    let mut draws = 0;
    while sampled < samples && draws < samples * 20 {
        draws += 1;
        let t = gen.term();
        let ci = rule_contractions(&rw, &t, ri);
        let cj = rule_contractions(&rw, &t, rj);
        if ci.is_empty() && cj.is_empty() {
            continue;
        }
        sampled += 1;
        let pairs: Vec<(Vec<usize>, Vec<usize>)> = if ci.len() < 6 && cj.len() < 6 {
            let (si, sj) = (disjoint_sets(&ci), disjoint_sets(&cj));
            sj.iter()
                .flat_map(|a| si.iter().map(move |b| (a.clone(), b.clone())))
                .collect()
        } else {
            (0..8)
                .map(|_| (random_disjoint_set(&cj, gen), random_disjoint_set(&ci, gen)))
                .collect()
        };
        for (a, b) in pairs {
            let u = apply_set(&t, &cj, &a);
            let v = apply_set(&t, &ci, &b);
            report.checked_peaks += 1;
            if u == v {
                continue;
            }
            let from_u = par(&u, ri, &mut report);
            let from_v = par(&v, rj, &mut report);
            if from_u.is_disjoint(&from_v) {
                report.failures.push(Failure {
                    peak: Peak {
                        source: t.clone(),
                        left: u,
                        right: v,
                    },
                    left_rel: Relation::Parallel(rj),
                    right_rel: Relation::Parallel(ri),
                    verdict: "no common reduct in one parallel step per side".into(),
                });
            }
        }
    }
    if sampled < samples {
        report.truncated = true;
        report
            .notes
            .push(format!("only {sampled} of {samples} terms had rule redexes in {draws} draws"));
    }
    report
}

/// Bounded closure of `{t}` under beta, the stability system and subterms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StabilityReport {
    pub closure_size: usize,
    pub violations: Vec<Term>,
    pub truncated: bool,
}

impl StabilityReport {
    /// The explored closure respects the arity.
    pub fn stable(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn check_conditional_stability(
    t: &Term,
    rs: &RuleSystem,
    alpha: &Arity,
    fuel: Fuel,
) -> Result<StabilityReport, LabError> {
    let bar = stability_system(rs);
    let rw = Rewriter::new(&bar, fuel);
    let rel = Rel::new(Mode::BetaUnionR, 1);
    let mut seen: BTreeSet<Term> = BTreeSet::new();
    let mut queue = VecDeque::from([t.clone()]);
    let mut truncated = false;
    let mut violations = Vec::new();
    while let Some(u) = queue.pop_front() {
        if !seen.insert(u.clone()) {
            continue;
        }
        if !u
            .respects_arity(alpha)
            .map_err(|e| LabError::HypothesisViolated(e.to_string()))?
        {
            violations.push(u.clone());
        }
        if seen.len() >= fuel.max_nodes {
            truncated = true;
            break;
        }
        let mut next: Vec<Term> = u
            .positions()
            .into_iter()
            .skip(1)
            .map(|(_, s)| s)
            .filter(|s| !s.has_loose(0))
            .cloned()
            .collect();
        let succ = rw.successor_terms(&u, rel);
        truncated |= succ.truncated;
        next.extend(succ.terms);
        for v in next {
            if v.size() > fuel.max_term_size {
                truncated = true;
            } else if !seen.contains(&v) {
                queue.push_back(v);
            }
        }
    }
    Ok(StabilityReport {
        closure_size: seen.len(),
        violations,
        truncated,
    })
}
