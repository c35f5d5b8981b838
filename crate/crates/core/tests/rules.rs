use std::collections::BTreeSet;

use condrew_core::corpus::{self, load};
use condrew_core::critical::{critical_pairs, ground_terms, orthonormal_check, probe_feasibility, FeasibilityVerdict};
use condrew_core::matching::{find_redexes, match_pattern, unify, Unifier};
use condrew_core::rulefile::{parse_rulefile, print_system, RuleFileError};
use condrew_core::rules::{
    applicable_theorems, classify_system, infer_arity, respects_arity_system, stability_system, validate, Theorem,
    Tri, ViolationKind,
};
use condrew_core::term::name;
use condrew_core::{Fuel, Mode, RuleSystem, Substitution, Term};
use proptest::prelude::*;

const ALL: [&str; 11] = [
    corpus::FILTER,
    corpus::MINUS,
    corpus::MINUS_COND,
    corpus::ARITY,
    corpus::SP,
    corpus::TREE,
    corpus::TREE_FULL,
    corpus::OCC,
    corpus::BCONFL[0],
    corpus::BCONFL[1],
    corpus::BCONFL[2],
];

fn t(rs: &RuleSystem, s: &str) -> Term {
    rs.parse_term(s).unwrap()
}

#[test]
fn filter_file_has_the_three_filter_rules() {
    let rs = load(corpus::FILTER);
    let names: Vec<&str> = rs.rules.iter().map(|r| &*r.name).collect();
    assert_eq!(names, ["filter1", "filter2", "filter3", "id1"]);
    let f2 = rs.rule("filter2").unwrap();
    assert_eq!(f2.to_string(), "filter2: filter p (cons x l) -> cons x (filter p l) if p x = true");
    assert_eq!(rs.rule("filter3").unwrap().conditions[0].rhs, Term::sym("false"));
}

#[test]
fn every_shipped_file_round_trips() {
    for text in ALL {
        let rf = parse_rulefile(text).unwrap();
        let again = parse_rulefile(&rf.to_string()).unwrap();
        assert_eq!(rf, again);
        let rs = load(text);
        assert_eq!(load(&print_system(&rs)), rs);
        assert!(validate(&rs).is_empty(), "{}: {:?}", rs.name, validate(&rs));
    }
}

#[test]
fn variable_lhs_is_reported_by_validate() {
    let rs = parse_rulefile("sig a ; rule r1: x -> a ;").unwrap().to_system("t").unwrap();
    let v = validate(&rs);
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].kind, ViolationKind::LhsIsVariable);
}

#[test]
fn extra_variable_is_reported() {
    let rs = parse_rulefile("sig f/1 ; rule r1: f x -> y ;").unwrap().to_system("t").unwrap();
    assert_eq!(validate(&rs)[0].kind, ViolationKind::ExtraVariable(name("y")));
}

#[test]
fn rule_file_errors() {
    match parse_rulefile("sig a ;\nrule r: h x -> a ;") {
        Err(RuleFileError::UndeclaredSymbol { line, symbol, .. }) => {
            assert_eq!(line, 2);
            assert_eq!(symbol, "h");
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        parse_rulefile("sig f/1 f/2 ;"),
        Err(RuleFileError::System { .. })
    ));
    assert!(matches!(
        parse_rulefile("sig f/1 ;\nrule r: f x -> x ;\nrule r: f x -> x ;"),
        Err(RuleFileError::System { line: 3, .. })
    ));
    match parse_rulefile("sig f/1 ;\nrule r: f x x ->") {
        Err(RuleFileError::Syntax(e)) => assert_eq!(e.line, 2),
        other => panic!("{other:?}"),
    }
    assert!(parse_rulefile("# only a comment\n").unwrap().rules.is_empty());
}

#[test]
fn classification_of_shipped_systems() {
    let tree = classify_system(&load(corpus::TREE));
    assert_eq!(tree.left_linear.value, Tri::True);
    assert_eq!(tree.semi_closed.value, Tri::True);
    assert_eq!(tree.algebraic.value, Tri::True);
    assert_eq!(tree.orthonormal.value, Tri::True);
    let sp = classify_system(&load(corpus::SP));
    assert_eq!(sp.left_linear.value, Tri::False);
    assert!(applicable_theorems(&sp).applicable.is_empty());
    let mc = classify_system(&load(corpus::MINUS_COND));
    assert_eq!(mc.semi_closed.value, Tri::False);
    let filter = classify_system(&load(corpus::FILTER));
    assert_eq!(filter.algebraic.value, Tri::False);
    assert_eq!(filter.applicative.value, Tri::True);
}

#[test]
fn tree_theorems() {
    let v = applicable_theorems(&classify_system(&load(corpus::TREE)));
    assert!(v.applicable.contains(&Theorem::from_label("Thm-4.3").unwrap()));
    assert!(v.applicable.contains(&Theorem::from_label("Thm-6.6").unwrap()));
}

#[test]
fn arity_inference_and_check() {
    let rs = load(corpus::ARITY);
    let alpha = rs.arity().unwrap();
    assert!(respects_arity_system(&rs, &alpha).unwrap());
    let omega = t(&rs, r"\x. x x");
    let bad = Term::apps(Term::sym("id"), [omega.clone(), omega]);
    assert!(!bad.respects_arity(&alpha).unwrap());
    let inferred = infer_arity(&load(corpus::SP)).unwrap();
    assert_eq!(inferred.get("fst"), Some(&1));
    assert_eq!(inferred.get("pair"), Some(&2));
}

#[test]
fn stability_pairs_have_no_extra_variables() {
    for text in ALL {
        let rs = load(text);
        for r in &stability_system(&rs).rules {
            let lv = r.lhs.free_vars();
            assert!(r.rhs.free_vars().is_subset(&lv), "{}: {r}", rs.name);
        }
    }
}

#[test]
fn matching_binds_repeated_variables_consistently() {
    let rs = load(corpus::MINUS);
    let lhs = &rs.rule("minus1").unwrap().lhs;
    let s = match_pattern(lhs, &t(&rs, "minus zero zero")).unwrap().unwrap();
    assert_eq!(s.get("x"), Some(&Term::sym("zero")));
    assert_eq!(match_pattern(lhs, &t(&rs, "minus zero (succ zero)")).unwrap(), None);
    // alpha-equal abstractions count as equal
    assert!(match_pattern(lhs, &t(&rs, r"minus (\x. x) (\y. y)")).unwrap().is_some());
    assert!(match_pattern(&t(&rs, r"\x. x"), &Term::sym("zero")).is_err());
}

#[test]
fn redexes_are_listed_outermost_first() {
    let rs = load(corpus::ARITY);
    let s = t(&rs, "minus (id zero) (id zero)");
    let found: Vec<(String, String)> = find_redexes(&rs, &s)
        .into_iter()
        .map(|r| (r.position.to_string(), r.rule.name.to_string()))
        .collect();
    assert_eq!(found[0].1, "minus1");
    assert_eq!(found.len(), 3);
    assert!(found[1..].iter().all(|(_, r)| r == "id1"));
}

#[test]
fn unification_cases() {
    let rs = load(corpus::MINUS);
    let u = unify(&t(&rs, "minus x (succ y)"), &t(&rs, "minus (succ z) z")).unwrap();
    let s = u.mgu().unwrap();
    assert_eq!(
        t(&rs, "minus x (succ y)").substitute(s),
        t(&rs, "minus (succ z) z").substitute(s)
    );
    assert_eq!(unify(&t(&rs, "minus x x"), &t(&rs, "minus y (succ y)")).unwrap(), Unifier::OccursCheck);
    assert_eq!(unify(&t(&rs, "succ x"), &t(&rs, "zero")).unwrap(), Unifier::Clash);
}

#[test]
fn occ_critical_pair_display() {
    let rs = load(corpus::OCC);
    let cps = critical_pairs(&rs);
    assert_eq!(cps.len(), 1);
    assert_eq!(
        cps[0].to_string(),
        "gt (length l) x = true ∧ gt (length l) x = false ⊃ (false, occ o (get l x))"
    );
    let v = probe_feasibility(&cps[0], &rs, Mode::R, 3, Fuel::default(), 50);
    assert!(matches!(v, FeasibilityVerdict::UnfeasibleByOrthonormality(1, 2)), "{v}");
    assert!(orthonormal_check(&load(corpus::TREE_FULL)).is_true());
}

#[test]
fn minus_overlaps() {
    let rs = load(corpus::MINUS);
    let cps = critical_pairs(&rs);
    // minus x x against minus (succ x) x fails the occurs check
    assert!(cps.is_empty(), "{cps:?}");
    let mc = load(corpus::MINUS_COND);
    let cps = critical_pairs(&mc);
    assert_eq!(cps.len(), 1);
    assert!(!orthonormal_check(&mc).is_true());
}

#[test]
fn sp_pairs() {
    let rs = load(corpus::SP);
    let cps = critical_pairs(&rs);
    let shown: BTreeSet<String> = cps.iter().map(|c| c.to_string()).collect();
    assert_eq!(shown.len(), 4, "{shown:?}");
    assert!(shown.iter().all(|s| s.starts_with('(')));
    // sp inside fst1 and snd1 gives trivial pairs
    let trivial: Vec<&str> = cps.iter().filter(|c| c.trivial).map(|c| &*c.overlap.outer).collect();
    assert_eq!(trivial, ["fst1", "snd1"]);
    assert!(shown.contains("(pair x' (snd (pair x' y)), pair x' y)"));
}

const OVERLAPS: &str = "
sig f/1 g/1 h/2 a/0 b/0 ;
rule r1: f (g x) -> a ;
rule r2: g (h x y) -> b ;
rule r3: f x -> g x ;
rule r4: h a y -> y ;
rule r5: h x (f b) -> f x ;
";

#[test]
fn critical_pairs_cover_every_ground_overlap() {
    let rs = load(OVERLAPS);
    let cps = critical_pairs(&rs);
    let pool = ground_terms(&rs, 400);
    let mut seen = 0;
    for s in &pool {
        for outer in &rs.rules {
            let Some(s1) = match_pattern(&outer.lhs, s).unwrap() else { continue };
            for (p, sub) in outer.lhs.positions() {
                if sub.is_var() {
                    continue;
                }
                let at = s.subterm_at(&p).unwrap();
                for inner in &rs.rules {
                    if p.is_root() && inner.name == outer.name {
                        continue;
                    }
                    let Some(s2) = match_pattern(&inner.lhs, at).unwrap() else { continue };
                    seen += 1;
                    let inner_side = s.replace_at(&p, inner.rhs.substitute(&s2)).unwrap();
                    let outer_side = outer.rhs.substitute(&s1);
                    let covered = cps.iter().any(|cp| {
                        let same = cp.overlap.outer == outer.name && cp.overlap.inner == inner.name;
                        let swapped = p.is_root() && cp.overlap.outer == inner.name && cp.overlap.inner == outer.name;
                        if cp.overlap.position != p || !(same || swapped) {
                            return false;
                        }
                        let Some(tau) = match_pattern(&cp.source, s).unwrap() else { return false };
                        let (l, r) = (cp.left.substitute(&tau), cp.right.substitute(&tau));
                        if same {
                            l == inner_side && r == outer_side
                        } else {
                            l == outer_side && r == inner_side
                        }
                    });
                    assert!(covered, "overlap of {} in {} at {p} on {s} not covered", inner.name, outer.name);
                }
            }
        }
    }
    assert!(seen > 20, "only {seen} ground overlaps");
}

#[test]
fn critical_pairs_are_peaks() {
    for text in [OVERLAPS, corpus::TREE_FULL, corpus::SP, corpus::MINUS_COND] {
        let rs = load(text);
        for cp in critical_pairs(&rs) {
            let outer = rs.rule(&cp.overlap.outer).unwrap();
            let inner = rs.rule(&cp.overlap.inner).unwrap();
            let s = match_pattern(&outer.lhs, &cp.source).unwrap().expect("outer matches source");
            assert_eq!(outer.rhs.substitute(&s), cp.right);
            let at = cp.source.subterm_at(&cp.overlap.position).unwrap();
            let s2 = match_pattern(&inner.lhs, at).unwrap().expect("inner matches at position");
            assert_eq!(
                cp.source.replace_at(&cp.overlap.position, inner.rhs.substitute(&s2)).unwrap(),
                cp.left
            );
            assert_eq!(cp.conditions.len(), outer.conditions.len() + inner.conditions.len());
        }
    }
}

fn arb_alg(vars: &'static [&'static str]) -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        Just(Term::sym("a")),
        prop::sample::select(vars.to_vec()).prop_map(Term::var),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|s| Term::app(Term::sym("f"), s)),
            (inner.clone(), inner).prop_map(|(l, r)| Term::apps(Term::sym("h"), [l, r])),
        ]
    })
}

proptest! {
    #[test]
    fn mgu_unifies(l in arb_alg(&["x", "y"]), r in arb_alg(&["u", "v", "x"])) {
        match unify(&l, &r).unwrap() {
            Unifier::Unified(s) => prop_assert_eq!(l.substitute(&s), r.substitute(&s)),
            _ => {
                // no ground instance of both sides coincides
                let g = Substitution::from([
                    (name("x"), Term::sym("a")), (name("y"), Term::sym("a")),
                    (name("u"), Term::sym("a")), (name("v"), Term::sym("a")),
                ]);
                prop_assert!(l.substitute(&g) != r.substitute(&g) || l.free_vars().is_empty() && r.free_vars().is_empty() && l != r);
            }
        }
    }

    #[test]
    fn instances_unify_with_their_pattern(p in arb_alg(&["x", "y"]), a in arb_alg(&["u"]), b in arb_alg(&["v"])) {
        let s = Substitution::from([(name("x"), a), (name("y"), b)]);
        let inst = p.substitute(&s);
        prop_assert!(match_pattern(&p, &inst).unwrap().is_some());
        let u = unify(&p, &inst).unwrap();
        if p.is_linear() {
            prop_assert!(u.mgu().is_some() || !inst.free_vars().is_disjoint(&p.free_vars()));
        }
    }

    #[test]
    fn matching_substitution_reproduces_subject(p in arb_alg(&["x", "y"]), a in arb_alg(&["u"]), b in arb_alg(&["v"])) {
        let inst = p.substitute(&Substitution::from([(name("x"), a), (name("y"), b)]));
        let m = match_pattern(&p, &inst).unwrap().unwrap();
        prop_assert_eq!(p.substitute(&m), inst);
    }

    #[test]
    fn printed_rules_reparse(l in arb_alg(&["x", "y"]), r in arb_alg(&["x"]), c in arb_alg(&["y"])) {
        let lhs = Term::apps(Term::sym("h"), [l, Term::var("x")]);
        let text = format!("sig f/1 h/2 a/0 ;\nrule q: {lhs} -> {r} if {c} = a ;\n");
        let rf = parse_rulefile(&text).unwrap();
        let again = parse_rulefile(&rf.to_string()).unwrap();
        prop_assert_eq!(&rf, &again);
        prop_assert_eq!(&rf.rules[0].lhs, &lhs);
    }
}
