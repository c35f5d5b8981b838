use std::collections::BTreeSet;

use condrew_core::beta::{
    beta_normal_form, beta_redexes, beta_step_at, contract, head_step, in_an, is_beta_normal, lo_normalize,
    lo_step, parallel_beta_successors, AnVerdict,
};
use condrew_core::head::{head_decompose, Head};
use condrew_core::syntax::parse_term;
use condrew_core::term::{name, TermClass};
use condrew_core::{Arity, BetaOutcome, Fuel, Position, Substitution, Term};
use proptest::prelude::*;

const SYMS: [&str; 4] = ["f", "g", "a", "b"];

fn is_sym(s: &str) -> bool {
    SYMS.contains(&s)
}

fn t(s: &str) -> Term {
    parse_term(s, &is_sym).unwrap()
}

// Named lambda terms with capture-avoiding substitution, used as a reference
// evaluator for the nameless engine.
#[derive(Clone, Debug)]
enum N {
    V(String),
    S(String),
    A(Box<N>, Box<N>),
    L(String, Box<N>),
}

struct Fresh(usize);

impl Fresh {
    fn next(&mut self) -> String {
        self.0 += 1;
        format!("v{}", self.0)
    }
}

fn to_named(t: &Term, scope: &mut Vec<String>, fresh: &mut Fresh) -> N {
    match t {
        Term::Var(x) => N::V(x.to_string()),
        Term::Sym(f) => N::S(f.to_string()),
        Term::Bound(k) => N::V(scope[scope.len() - 1 - *k as usize].clone()),
        Term::App(f, a) => N::A(
            Box::new(to_named(f, scope, fresh)),
            Box::new(to_named(a, scope, fresh)),
        ),
        Term::Lam(_, b) => {
            let x = fresh.next();
            scope.push(x.clone());
            let body = to_named(b, scope, fresh);
            scope.pop();
            N::L(x, Box::new(body))
        }
    }
}

fn from_named(n: &N) -> Term {
    match n {
        N::V(x) => Term::var(x),
        N::S(f) => Term::sym(f),
        N::A(f, a) => Term::app(from_named(f), from_named(a)),
        N::L(x, b) => Term::lam(x, from_named(b)),
    }
}

fn fv(n: &N, out: &mut BTreeSet<String>) {
    match n {
        N::V(x) => {
            out.insert(x.clone());
        }
        N::S(_) => {}
        N::A(f, a) => {
            fv(f, out);
            fv(a, out);
        }
        N::L(x, b) => {
            let mut inner = BTreeSet::new();
            fv(b, &mut inner);
            inner.remove(x);
            out.extend(inner);
        }
    }
}

fn subst(n: &N, x: &str, s: &N, fresh: &mut Fresh) -> N {
    match n {
        N::V(y) if y == x => s.clone(),
        N::V(_) | N::S(_) => n.clone(),
        N::A(f, a) => N::A(Box::new(subst(f, x, s, fresh)), Box::new(subst(a, x, s, fresh))),
        N::L(y, _) if y == x => n.clone(),
        N::L(y, b) => {
            let mut fs = BTreeSet::new();
            fv(s, &mut fs);
            if fs.contains(y) {
                let z = fresh.next();
                let b = subst(b, y, &N::V(z.clone()), fresh);
                N::L(z, Box::new(subst(&b, x, s, fresh)))
            } else {
                N::L(y.clone(), Box::new(subst(b, x, s, fresh)))
            }
        }
    }
}

/// One normal-order step.
fn normal_step(n: &N, fresh: &mut Fresh) -> Option<N> {
    match n {
        N::A(f, a) => {
            if let N::L(x, b) = &**f {
                return Some(subst(b, x, a, fresh));
            }
            if let Some(f2) = normal_step(f, fresh) {
                return Some(N::A(Box::new(f2), a.clone()));
            }
            normal_step(a, fresh).map(|a2| N::A(f.clone(), Box::new(a2)))
        }
        N::L(x, b) => normal_step(b, fresh).map(|b2| N::L(x.clone(), Box::new(b2))),
        _ => None,
    }
}

fn oracle_normalize(t: &Term, max_steps: usize) -> Option<(Term, usize)> {
    let mut fresh = Fresh(0);
    let mut n = to_named(t, &mut Vec::new(), &mut fresh);
    for k in 0..=max_steps {
        match normal_step(&n, &mut fresh) {
            None => return Some((from_named(&n), k)),
            Some(m) => n = m,
        }
    }
    None
}

fn arb_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        prop::sample::select(SYMS.to_vec()).prop_map(Term::sym),
        prop::sample::select(vec!["x", "y", "z"]).prop_map(Term::var),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(f, a)| Term::app(f, a)),
            (prop::sample::select(vec!["x", "y", "z"]), inner).prop_map(|(x, b)| Term::lam(x, b)),
        ]
    })
}

/// Algebraic terms over f/1, g/2, a, b and variables.
fn arb_algebraic() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        Just(Term::sym("a")),
        Just(Term::sym("b")),
        prop::sample::select(vec!["x", "y"]).prop_map(Term::var),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|s| Term::app(Term::sym("f"), s)),
            (inner.clone(), inner).prop_map(|(l, r)| Term::apps(Term::sym("g"), [l, r])),
        ]
    })
}

#[test]
fn alpha_equivalent_terms_are_equal() {
    assert_eq!(t(r"\x. x"), t(r"\y. y"));
    assert_eq!(t(r"\x. \y. x y"), t(r"\a'. \b'. a' b'"));
    assert_ne!(t(r"\x. \y. x"), t(r"\x. \y. y"));
    assert_ne!(t(r"\x. y"), t(r"\x. z"));
}

#[test]
fn symbols_and_variables_are_told_apart() {
    let s = t("f x a");
    assert_eq!(s.symbols(), BTreeSet::from([name("a"), name("f")]));
    assert_eq!(s.free_vars(), BTreeSet::from([name("x")]));
    // a binder shadows a symbol
    assert!(t(r"\f. f a").free_vars().is_empty());
    assert_eq!(t(r"\f. f a").symbols(), BTreeSet::from([name("a")]));
}

#[test]
fn printer_renames_to_avoid_capture() {
    let s = Term::lam("x", Term::app(Term::var("x"), Term::var("x'")));
    let printed = s.to_string();
    assert_eq!(t(&printed), s);
    let shadow = Term::lam("y", Term::lam("y", Term::var("y")));
    assert_eq!(t(&shadow.to_string()), shadow);
}

#[test]
fn parse_errors_are_positioned() {
    let e = parse_term("f (a", &is_sym).unwrap_err();
    assert_eq!(e.line, 1);
    assert!(e.col >= 4, "{e}");
    assert!(parse_term(r"\. a", &is_sym).is_err());
    assert!(parse_term("", &is_sym).is_err());
}

#[test]
fn term_classes() {
    assert_eq!(t("f x a").classify(), TermClass::Algebraic);
    assert!(t("f x a").is_algebraic());
    assert!(!t("x a").is_algebraic());
    assert!(t("x a").is_applicative());
    assert!(!t(r"\x. x").is_applicative());
    assert!(t("g x x").is_algebraic() && !t("g x x").is_linear());
}

#[test]
fn arity_respect() {
    let alpha: Arity = [(name("f"), 1), (name("g"), 2), (name("a"), 0), (name("b"), 0)].into();
    assert!(t("g (f a) b").respects_arity(&alpha).unwrap());
    assert!(!t("f a b").respects_arity(&alpha).unwrap());
    // partial application is allowed
    assert!(t("g a").respects_arity(&alpha).unwrap());
    assert!(!t(r"(\x. x) (f a a)").respects_arity(&alpha).unwrap());
}

#[test]
fn substitution_is_capture_avoiding() {
    let body = t(r"\y. x y");
    let s = Substitution::from([(name("x"), Term::var("y"))]);
    let r = body.substitute(&s);
    // the free y stays free
    assert_eq!(r.free_vars(), BTreeSet::from([name("y")]));
    assert_eq!(r, t(r"\z. y z"));
}

#[test]
fn beta_contract_examples() {
    assert_eq!(contract(&t(r"(\x. f x x) a")), Some(t("f a a")));
    assert_eq!(contract(&t(r"(\x. \y. x) y")), Some(t(r"\z. y")));
    assert_eq!(contract(&t("f a")), None);
}

#[test]
fn beta_step_at_positions() {
    let s = t(r"f ((\x. x) a) ((\y. b) a)");
    let ps = beta_redexes(&s);
    assert_eq!(ps.len(), 2);
    assert_eq!(beta_step_at(&s, &ps[0]).unwrap(), t(r"f a ((\y. b) a)"));
    assert_eq!(beta_step_at(&s, &ps[1]).unwrap(), t(r"f ((\x. x) a) b"));
    assert!(beta_step_at(&s, &Position::root()).is_err());
}

#[test]
fn leftmost_outermost_normalizes_k_i_omega() {
    let s = t(r"(\x. \y. y) ((\z. z z) (\z. z z))");
    match lo_normalize(&s, Fuel::default()) {
        BetaOutcome::Normalized { term, steps } => {
            assert_eq!(term, t(r"\y. y"));
            assert_eq!(steps, 1);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn omega_exhausts_fuel() {
    let omega = t(r"(\z. z z) (\z. z z)");
    match lo_normalize(&omega, Fuel::new(10, 100)) {
        BetaOutcome::FuelExhausted { last, steps } => {
            assert_eq!(steps, 10);
            assert_eq!(last, omega);
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(beta_normal_form(&omega, Fuel::new(10, 100)), None);
}

#[test]
fn head_steps_contract_the_head_redex() {
    let s = t(r"\u. (\x. x a) f b");
    assert_eq!(head_step(&s), Some(t(r"\u. f a b")));
    assert_eq!(head_step(&t(r"f ((\x. x) a)")), None);
    assert_eq!(lo_step(&t(r"f ((\x. x) a)")), Some(t("f a")));
}

#[test]
fn head_decomposition_shapes() {
    let h = head_decompose(&t(r"\u. \v. (\x. x) u v a"));
    assert_eq!(h.outer_binders.len(), 2);
    assert!(h.is_redex());
    assert_eq!(h.args.len(), 2);
    let h = head_decompose(&t("g a b"));
    assert!(matches!(h.head, Head::Sym(ref f) if &**f == "g"));
    assert_eq!(h.args.len(), 2);
}

#[test]
fn parallel_beta_of_nested_redexes() {
    // (\x. x x) ((\y. y) a): contracting both the outer and the inner redex in
    // one step gives a a
    let s = t(r"(\x. x x) ((\y. y) a)");
    let succ = parallel_beta_successors(&s, Fuel::default()).terms;
    let expected: BTreeSet<Term> = [
        s.clone(),
        t(r"(\x. x x) a"),
        t(r"(\y. y) a ((\y. y) a)"),
        t("a a"),
    ]
    .into();
    assert_eq!(succ, expected);
}

#[test]
fn in_an_verdicts() {
    let alpha: Arity = [(name("f"), 1), (name("g"), 2), (name("a"), 0), (name("b"), 0)].into();
    let fuel = Fuel::default();
    assert_eq!(in_an(&t(r"(\x. f x) a"), &alpha, fuel).unwrap(), AnVerdict::Yes(t("f a")));
    assert_eq!(in_an(&t(r"(\x. f x x) a"), &alpha, fuel).unwrap(), AnVerdict::No);
    assert_eq!(
        in_an(&t(r"f ((\z. z z) (\z. z z))"), &alpha, Fuel::new(8, 100)).unwrap(),
        AnVerdict::Unknown
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn print_parse_round_trip(s in arb_term()) {
        let printed = s.to_string();
        prop_assert_eq!(t(&printed), s);
    }

    #[test]
    fn identity_substitution(s in arb_term()) {
        let id: Substitution = s.free_vars().into_iter().map(|x| (x.clone(), Term::Var(x))).collect();
        prop_assert_eq!(s.substitute(&id), s.clone());
        prop_assert_eq!(s.substitute(&Substitution::new()), s);
    }

    #[test]
    fn substitution_composes_on_closed_values(s in arb_term(), u in arb_algebraic(), v in arb_algebraic()) {
        let u = u.substitute(&Substitution::from([(name("x"), Term::sym("a")), (name("y"), Term::sym("b"))]));
        let v = v.substitute(&Substitution::from([(name("x"), Term::sym("b")), (name("y"), Term::sym("a"))]));
        let both = Substitution::from([(name("x"), u.clone()), (name("y"), v.clone())]);
        let seq = s
            .substitute(&Substitution::from([(name("x"), u)]))
            .substitute(&Substitution::from([(name("y"), v)]));
        prop_assert_eq!(s.substitute(&both), seq);
    }

    #[test]
    fn head_form_rebuilds(s in arb_term()) {
        prop_assert_eq!(head_decompose(&s).rebuild(), s);
    }

    #[test]
    fn normal_iff_no_redex(s in arb_term()) {
        prop_assert_eq!(is_beta_normal(&s), beta_redexes(&s).is_empty());
    }

    #[test]
    fn positions_address_subterms(s in arb_term()) {
        for (p, sub) in s.positions() {
            prop_assert_eq!(s.subterm_at(&p), Some(sub));
            prop_assert_eq!(s.replace_at(&p, sub.clone()), Some(s.clone()));
        }
    }

    #[test]
    fn leftmost_outermost_agrees_with_named_oracle(s in arb_term()) {
        let fuel = Fuel { max_steps: 40, max_term_size: 2000, max_nodes: 20_000 };
        match (lo_normalize(&s, fuel), oracle_normalize(&s, 40)) {
            (BetaOutcome::Normalized { term, steps }, Some((expected, k))) => {
                prop_assert_eq!(term, expected);
                prop_assert_eq!(steps, k);
            }
            (BetaOutcome::FuelExhausted { .. }, None) => {}
            (BetaOutcome::FuelExhausted { last, .. }, Some(_)) => {
                prop_assert!(last.size() > fuel.max_term_size / 2, "engine stopped early on {}", s);
            }
            (got, None) => prop_assert!(false, "engine normalized {} to {:?}, oracle did not", s, got),
        }
    }

    #[test]
    fn parallel_beta_contains_single_steps(s in arb_term()) {
        let par = parallel_beta_successors(&s, Fuel::default());
        prop_assume!(!par.truncated);
        prop_assert!(par.terms.contains(&s));
        for p in beta_redexes(&s) {
            let u = beta_step_at(&s, &p).unwrap();
            prop_assert!(par.terms.contains(&u), "missing {}", u);
        }
    }

    #[test]
    fn positions_are_preorder(s in arb_term()) {
        let ps: Vec<Position> = s.positions().into_iter().map(|(p, _)| p).collect();
        prop_assert!(ps[0].is_root());
        for w in ps.windows(2) {
            // a parent always precedes its descendants
            prop_assert!(!w[1].is_prefix_of(&w[0]) || w[1] == w[0]);
        }
    }
}
