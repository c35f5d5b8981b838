//! Built-in systems with machine-checkable claims.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use crate::beta::Fuel;
use crate::critical::{critical_pairs, probe_feasibility, FeasibilityVerdict};
use crate::gen::TermGen;
use crate::lab::{check_shallow_sample, reaches, Reachability};
use crate::rewrite::{JoinVerdict, Mode, Rel, Rewriter};
use crate::rulefile::parse_rulefile;
use crate::rules::{applicable_theorems, classify_system, RuleSystem, Theorem, Tri, FLAG_NAMES};
use crate::term::{Arity, Term};

pub const FILTER: &str = include_str!("../systems/filter.crs");
pub const MINUS: &str = include_str!("../systems/minus.crs");
pub const MINUS_COND: &str = include_str!("../systems/minus-cond.crs");
pub const ARITY: &str = include_str!("../systems/arity.crs");
pub const SP: &str = include_str!("../systems/sp.crs");
pub const BCONFL: [&str; 4] = [
    include_str!("../systems/bconfl1.crs"),
    include_str!("../systems/bconfl2.crs"),
    include_str!("../systems/bconfl3.crs"),
    include_str!("../systems/bconfl4.crs"),
];
pub const TREE: &str = include_str!("../systems/tree.crs");
pub const TREE_FULL: &str = include_str!("../systems/tree-full.crs");
pub const OCC: &str = include_str!("../systems/occ.crs");

/// `(\x. succ (x x)) (\x. succ (x x))`
pub const Y_SUCC: &str = r"(\x. succ (x x)) (\x. succ (x x))";
/// `\x. succ (x x)`
pub const OMEGA_SUCC: &str = r"\x. succ (x x)";

/// Parses a shipped rule file. Panics on malformed input.
pub fn load(text: &str) -> RuleSystem {
    parse_rulefile(text)
        .expect("shipped rule file parses")
        .to_system("system")
        .expect("shipped rule file is a valid system")
}

fn term(rs: &RuleSystem, text: &str) -> Term {
    rs.parse_term(text).expect("shipped term parses")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Claim {
    /// A classification flag has the given value.
    Flag { flag: String, expected: Tri },
    /// This theorem is among the applicable ones.
    TheoremListed(Theorem),
    /// No theorem applies.
    NoTheorem,
    /// `target` is reachable from `source` within `max_steps`.
    Reaches {
        source: Term,
        target: Term,
        rel: Rel,
        max_steps: usize,
    },
    /// No step from `source` at any level in `1..=max_level`.
    NoStep { source: Term, mode: Mode, max_level: usize },
    /// The two terms do not join; with `refuted` the search must prove it.
    Unjoinable {
        left: Term,
        right: Term,
        rel: Rel,
        fuel: Fuel,
        refuted: bool,
    },
    /// No `source ->*beta s ->*R w <-*beta target` with each leg at most
    /// `depth` steps.
    NotFactorizable {
        source: Term,
        target: Term,
        level: usize,
        depth: usize,
    },
    /// `term` does not respect `alpha`.
    ArityViolated { term: Term, alpha: Arity },
    /// Exactly this many critical pairs, each printing as listed.
    CriticalPairs(Vec<String>),
    /// Every critical pair is unfeasible by contradictory conditions.
    CriticalPairsUnfeasible,
    /// Seeded peaks at levels `(i, j)` all join.
    PeaksJoin {
        mode: Mode,
        i: usize,
        j: usize,
        samples: usize,
        seed: u64,
        fuel: Fuel,
    },
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Claim::Flag { flag, expected } => write!(f, "{flag} = {expected}"),
            Claim::TheoremListed(th) => write!(f, "{th} applies"),
            Claim::NoTheorem => f.write_str("no theorem applies"),
            Claim::Reaches {
                source,
                target,
                rel,
                max_steps,
            } => write!(f, "{source} ->* {target} under {rel} in at most {max_steps} steps"),
            Claim::NoStep {
                source,
                mode,
                max_level,
            } => write!(f, "{source} has no {mode} step at levels 1..={max_level}"),
            Claim::Unjoinable {
                left,
                right,
                rel,
                refuted,
                ..
            } => write!(
                f,
                "{left} and {right} do not join under {rel}{}",
                if *refuted { " (refuted)" } else { "" }
            ),
            Claim::NotFactorizable { source, target, depth, .. } => write!(
                f,
                "{source} -> {target} has no beta* R* beta*<- factorization within depth {depth}"
            ),
            Claim::ArityViolated { term, .. } => write!(f, "{term} does not respect the arity"),
            Claim::CriticalPairs(cps) => write!(f, "{} critical pair(s)", cps.len()),
            Claim::CriticalPairsUnfeasible => f.write_str("every critical pair is unfeasible"),
            Claim::PeaksJoin {
                mode, i, j, samples, seed, ..
            } => write!(f, "{samples} {mode} peaks at levels ({i}, {j}) join (seed {seed})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub system: RuleSystem,
    pub claims: Vec<Claim>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClaimOutcome {
    pub entry: String,
    pub claim: String,
    pub passed: bool,
    pub detail: String,
}

/// Claims stated in a rule file: flag names with `yes`/`no`/`unknown`,
/// `theorem = <label>` and `theorems = none`.
pub fn file_claims(text: &str) -> Vec<Claim> {
    let rf = parse_rulefile(text).expect("shipped rule file is well formed");
    rf.claims
        .iter()
        .filter_map(|(k, v)| match (k.as_str(), v.as_str()) {
            ("theorems", "none") => Some(Claim::NoTheorem),
            ("theorem", label) => Theorem::from_label(label).map(Claim::TheoremListed),
            (flag, value) if FLAG_NAMES.contains(&flag) => {
                let expected = match value {
                    "yes" => Tri::True,
                    "no" => Tri::False,
                    _ => Tri::Unknown,
                };
                Some(Claim::Flag {
                    flag: flag.to_string(),
                    expected,
                })
            }
            _ => None,
        })
        .collect()
}

pub fn corpus() -> Vec<CorpusEntry> {
    let mut out = Vec::new();
    let peak_fuel = Fuel::new(8, 60);

    let rs = load(MINUS);
    let source = term(&rs, &format!("minus ({Y_SUCC}) ({Y_SUCC})"));
    let mut claims = file_claims(MINUS);
    for target in ["zero", "succ zero"] {
        claims.push(Claim::Reaches {
            source: source.clone(),
            target: term(&rs, target),
            rel: Rel::new(Mode::BetaUnionR, 1),
            max_steps: 2,
        });
    }
    claims.push(Claim::Unjoinable {
        left: term(&rs, "zero"),
        right: term(&rs, "succ zero"),
        rel: Rel::new(Mode::BetaUnionR, 1),
        fuel: peak_fuel,
        refuted: true,
    });
    out.push(CorpusEntry {
        name: "ex-minus".into(),
        system: rs,
        claims,
    });

    let rs = load(MINUS_COND);
    let source = term(&rs, &format!("minus ({Y_SUCC}) ({Y_SUCC})"));
    let mut claims = file_claims(MINUS_COND);
    for target in ["zero", "succ zero"] {
        claims.push(Claim::Reaches {
            source: source.clone(),
            target: term(&rs, target),
            rel: Rel::new(Mode::BetaUnionR, 2),
            max_steps: 2,
        });
    }
    claims.push(Claim::Unjoinable {
        left: term(&rs, "zero"),
        right: term(&rs, "succ zero"),
        rel: Rel::new(Mode::BetaUnionR, 2),
        fuel: peak_fuel,
        refuted: true,
    });
    out.push(CorpusEntry {
        name: "ex-minus-cond".into(),
        system: rs,
        claims,
    });

    let rs = load(ARITY);
    let bad = format!("id ({OMEGA_SUCC}) ({OMEGA_SUCC})");
    let mut claims = file_claims(ARITY);
    claims.push(Claim::ArityViolated {
        term: term(&rs, &bad),
        alpha: rs.arity().expect("declared arity"),
    });
    claims.push(Claim::Reaches {
        source: term(&rs, &format!("minus ({bad}) ({bad})")),
        target: term(&rs, &format!("minus ({Y_SUCC}) ({Y_SUCC})")),
        rel: Rel::new(Mode::R, 1),
        max_steps: 2,
    });
    out.push(CorpusEntry {
        name: "ex-arity".into(),
        system: rs,
        claims,
    });

    for (k, text) in BCONFL.iter().enumerate() {
        let rs = load(text);
        let source = term(&rs, r"f (\x. d)");
        let a = term(&rs, r"a (\x. d)");
        let b = term(&rs, r"b (\x. d)");
        let mut claims = file_claims(text);
        claims.push(Claim::Reaches {
            source: source.clone(),
            target: a.clone(),
            rel: Rel::new(Mode::RBeta, 2),
            max_steps: 1,
        });
        claims.push(Claim::Reaches {
            source: source.clone(),
            target: b.clone(),
            rel: Rel::new(Mode::RBeta, 1),
            max_steps: 1,
        });
        claims.push(Claim::Unjoinable {
            left: a.clone(),
            right: b,
            rel: Rel::new(Mode::BetaUnionRBeta, 5),
            fuel: peak_fuel,
            refuted: false,
        });
        claims.push(Claim::NotFactorizable {
            source,
            target: a,
            level: 5,
            depth: 6,
        });
        out.push(CorpusEntry {
            name: format!("ex-Bconfl-{}", k + 1),
            system: rs,
            claims,
        });
    }

    let rs = load(SP);
    out.push(CorpusEntry {
        name: "sp".into(),
        system: rs,
        claims: file_claims(SP),
    });

    let rs = load(FILTER);
    let mut claims = file_claims(FILTER);
    claims.push(Claim::Reaches {
        source: term(&rs, "filter id (cons true nil)"),
        target: term(&rs, "cons true nil"),
        rel: Rel::new(Mode::R, 2),
        max_steps: 4,
    });
    claims.push(Claim::NoStep {
        source: term(&rs, r"filter (\x. x) (cons true nil)"),
        mode: Mode::R,
        max_level: 8,
    });
    claims.push(Claim::Reaches {
        source: term(&rs, r"filter (\x. x) (cons true nil)"),
        target: term(&rs, r"cons true (filter (\x. x) nil)"),
        rel: Rel::new(Mode::RBeta, 1),
        max_steps: 1,
    });
    out.push(CorpusEntry {
        name: "filter".into(),
        system: rs,
        claims,
    });

    let rs = load(TREE);
    let mut claims = file_claims(TREE);
    claims.push(Claim::CriticalPairsUnfeasible);
    out.push(CorpusEntry {
        name: "tree".into(),
        system: rs,
        claims,
    });

    let rs = load(TREE_FULL);
    let mut claims = file_claims(TREE_FULL);
    claims.push(Claim::CriticalPairsUnfeasible);
    claims.push(Claim::PeaksJoin {
        mode: Mode::BetaUnionRBeta,
        i: 2,
        j: 3,
        samples: 20,
        seed: 7,
        fuel: Fuel::new(8, 120),
    });
    out.push(CorpusEntry {
        name: "tree-full".into(),
        system: rs,
        claims,
    });

    let rs = load(OCC);
    let mut claims = file_claims(OCC);
    claims.push(Claim::CriticalPairs(vec![
        "gt (length l) x = true ∧ gt (length l) x = false ⊃ (false, occ o (get l x))".into(),
    ]));
    claims.push(Claim::CriticalPairsUnfeasible);
    out.push(CorpusEntry {
        name: "occ".into(),
        system: rs,
        claims,
    });

    out
}

/// Whether `source ->*beta s ->*R w <-*beta target`, each leg at most
/// `depth` steps. `None` when a search was cut short.
pub fn factorizes(rw: &Rewriter, source: &Term, target: &Term, level: usize, depth: usize) -> Option<bool> {
    let limited = Rewriter::new(
        rw.system(),
        Fuel {
            max_steps: depth,
            ..rw.fuel()
        },
    );
    let beta = limited.reach(source, Rel::beta());
    let mut complete = !beta.truncated;
    let mut ws: HashSet<Term> = HashSet::new();
    for (s, _) in &beta.terms {
        let r = limited.reach(s, Rel::new(Mode::R, level));
        complete &= !r.truncated;
        ws.extend(r.terms.into_iter().map(|(w, _)| w));
    }
    for w in &ws {
        match reaches(&limited, w, Rel::beta(), target) {
            Reachability::Found(_) => return Some(true),
            Reachability::Unknown => complete = false,
            Reachability::Unreachable => {}
        }
    }
    complete.then_some(false)
}

pub fn check_claim(entry: &CorpusEntry, claim: &Claim) -> ClaimOutcome {
    let rs = &entry.system;
    let (passed, detail) = match claim {
        Claim::Flag { flag, expected } => {
            let c = classify_system(rs);
            match c.flag(flag) {
                Some(got) => (got.value == *expected, format!("{flag} = {} ({})", got.value, got.reason)),
                None => (false, format!("unknown flag `{flag}`")),
            }
        }
        Claim::TheoremListed(th) => {
            let v = applicable_theorems(&classify_system(rs));
            (v.applicable.contains(th), format!("applicable: {}", labels(&v.applicable)))
        }
        Claim::NoTheorem => {
            let v = applicable_theorems(&classify_system(rs));
            (v.applicable.is_empty(), format!("applicable: {}", labels(&v.applicable)))
        }
        Claim::Reaches {
            source,
            target,
            rel,
            max_steps,
        } => {
            let rw = Rewriter::new(rs, Fuel::default());
            match reaches(&rw, source, *rel, target) {
                Reachability::Found(n) => (n <= *max_steps, format!("reached in {n} step(s)")),
                r => (false, format!("{r:?}")),
            }
        }
        Claim::NoStep {
            source,
            mode,
            max_level,
        } => {
            let rw = Rewriter::new(rs, Fuel::default());
            let fired: Vec<usize> = (1..=*max_level)
                .filter(|&i| !rw.successors(source, Rel::new(*mode, i)).steps.is_empty())
                .collect();
            (fired.is_empty(), format!("levels with a step: {fired:?}"))
        }
        Claim::Unjoinable {
            left,
            right,
            rel,
            fuel,
            refuted,
        } => {
            let mut ok = true;
            let mut detail = Vec::new();
            for f in [*fuel, fuel.doubled()] {
                let v = Rewriter::new(rs, f).joinable(left, right, *rel);
                ok &= match v {
                    JoinVerdict::Joinable { .. } => false,
                    JoinVerdict::Refuted { .. } => true,
                    JoinVerdict::NotJoinableWithinBudget { .. } => !refuted,
                };
                detail.push(v.to_string());
            }
            (ok, detail.join("; doubled fuel: "))
        }
        Claim::NotFactorizable {
            source,
            target,
            level,
            depth,
        } => {
            let rw = Rewriter::new(rs, Fuel::default());
            match factorizes(&rw, source, target, *level, *depth) {
                Some(false) => (true, "exhaustive search found no factorization".into()),
                Some(true) => (false, "a factorization exists".into()),
                None => (false, "search truncated".into()),
            }
        }
        Claim::ArityViolated { term, alpha } => match term.respects_arity(alpha) {
            Ok(b) => (!b, format!("respects arity: {b}")),
            Err(e) => (false, e.to_string()),
        },
        Claim::CriticalPairs(expected) => {
            let got: Vec<String> = critical_pairs(rs).iter().map(|cp| cp.to_string()).collect();
            (got == *expected, got.join("\n"))
        }
        Claim::CriticalPairsUnfeasible => {
            let mut bad = Vec::new();
            let cps = critical_pairs(rs);
            for cp in &cps {
                let v = probe_feasibility(cp, rs, Mode::BetaUnionRBeta, 1, Fuel::default(), 0);
                if !matches!(v, FeasibilityVerdict::UnfeasibleByOrthonormality(..)) {
                    bad.push(format!("{cp}: {v}"));
                }
            }
            let detail = if bad.is_empty() {
                format!("{} critical pair(s), all unfeasible", cps.len())
            } else {
                bad.join("\n")
            };
            (bad.is_empty(), detail)
        }
        Claim::PeaksJoin {
            mode,
            i,
            j,
            samples,
            seed,
            fuel,
        } => {
            let mut gen = TermGen::for_system(rs, *seed).max_depth(4).redex_rate(0.2);
            let report = check_shallow_sample(rs, *mode, *i, *j, &mut gen, *samples, 2, *fuel);
            (report.passed() && report.checked_peaks == *samples, report.to_string())
        }
    };
    ClaimOutcome {
        entry: entry.name.clone(),
        claim: claim.to_string(),
        passed,
        detail,
    }
}

fn labels(ths: &[Theorem]) -> String {
    if ths.is_empty() {
        return "none".into();
    }
    ths.iter().map(|t| t.label()).collect::<Vec<_>>().join(", ")
}

pub fn run_corpus() -> Vec<ClaimOutcome> {
    corpus()
        .iter()
        .flat_map(|e| e.claims.iter().map(move |c| check_claim(e, c)))
        .collect()
}
