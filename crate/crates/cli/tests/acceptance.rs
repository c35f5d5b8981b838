//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use condrew_core::beta::{in_an, AnVerdict};
use condrew_core::corpus::{self, factorizes, load};
use condrew_core::critical::{critical_pairs, orthonormal_check, probe_feasibility, FeasibilityVerdict};
use condrew_core::gen::{enumerate_closed, TermGen};
use condrew_core::lab::{
    check_commutation_sample, check_parallel_beta_diamond, check_projection_sample, check_shallow_sample, Relation,
};
use condrew_core::rewrite::{reduce_many, StepLabel, Strategy};
use condrew_core::rules::{applicable_theorems, classify_system, Theorem, Tri};
use condrew_core::term::Name;
use condrew_core::{Fuel, JoinVerdict, Mode, Rel, Rewriter, Term};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn systems() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/systems")
}

fn condrew(args: &[&str]) -> Result<(i32, Vec<u8>), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_condrew"))
        .args(args)
        .current_dir(systems())
        .output()
        .map_err(|e| e.to_string())?;
    Ok((o.status.code().unwrap_or(-1), o.stdout))
}

fn filter_evaluation() -> Outcome {
    let rs = load(corpus::FILTER);
    let s = rs.parse_term("filter id (cons true nil)").unwrap();
    let d = reduce_many(&s, &rs, Mode::R, 2, Fuel::default(), Strategy::LeftmostOutermost);
    let path: Vec<String> = d.steps.iter().map(|s| s.to.to_string()).collect();
    ensure(path == ["cons true (filter id nil)", "cons true nil"], || format!("path {path:?}"))?;
    ensure(d.steps.len() <= 4, || "more than 4 steps".into())?;
    let rw = Rewriter::new(&rs, Fuel::default());
    let lam = rs.parse_term(r"filter (\x. x) (cons true nil)").unwrap();
    for level in 1..=8 {
        let n = rw.successors(&lam, Rel::new(Mode::R, level)).steps.len();
        ensure(n == 0, || format!("R step at level {level}"))?;
    }
    let n = rw.successors(&lam, Rel::new(Mode::RBeta, 1)).steps.len();
    ensure(n == 1, || format!("{n} R(beta) steps at level 1"))?;
    Ok("2-step path, lambda predicate needs R(beta)".into())
}

fn y_peak(text: &str, level: usize) -> Outcome {
    let rs = load(text);
    let y = rs.parse_term(corpus::Y_SUCC).unwrap();
    let source = Term::apps(Term::sym("minus"), [y.clone(), y.clone()]);
    let zero = Term::sym("zero");
    let one = rs.parse_term("succ zero").unwrap();
    let rw = Rewriter::new(&rs, Fuel::default());
    let rel = Rel::new(Mode::BetaUnionR, level);
    let first = rw.successors(&source, rel);
    ensure(first.steps.iter().any(|s| s.to == zero), || "no step to zero".into())?;
    let expanded = Term::apps(Term::sym("minus"), [Term::app(Term::sym("succ"), y.clone()), y]);
    ensure(
        first.steps.iter().any(|s| s.rule == StepLabel::Beta && s.to == expanded),
        || "no beta unfolding".into(),
    )?;
    let second = rw.successors(&expanded, rel);
    let via = second
        .steps
        .iter()
        .find(|s| s.to == one)
        .ok_or_else(|| "no step to succ zero".to_string())?;
    let v = Rewriter::new(&rs, Fuel::new(8, 60)).joinable(&zero, &one, rel);
    ensure(v.is_refuted(), || format!("join verdict {v}"))?;
    Ok(format!("zero and succ zero (beta then {}), {v}", via.rule))
}

fn bconfl(k: usize) -> Outcome {
    let rs = load(corpus::BCONFL[k]);
    let source = rs.parse_term(r"f (\x. d)").unwrap();
    let a = rs.parse_term(r"a (\x. d)").unwrap();
    let b = rs.parse_term(r"b (\x. d)").unwrap();
    let rw = Rewriter::new(&rs, Fuel::default());
    ensure(rw.successor_terms(&source, Rel::new(Mode::RBeta, 2)).terms.contains(&a), || {
        "no R(beta) step to a at level 2".into()
    })?;
    ensure(rw.successor_terms(&source, Rel::new(Mode::RBeta, 1)).terms.contains(&b), || {
        "no step to b at level 1".into()
    })?;
    let v = Rewriter::new(&rs, Fuel::new(8, 60)).joinable(&a, &b, Rel::new(Mode::BetaUnionRBeta, 5));
    ensure(!v.is_joinable(), || format!("joinable: {v}"))?;
    let verdict = match v {
        JoinVerdict::Refuted { .. } => "Refuted",
        _ => "NotJoinableWithinBudget",
    };
    let f = factorizes(&rw, &source, &a, 5, 6);
    ensure(f == Some(false), || format!("factorization search: {f:?}"))?;
    Ok(format!("{verdict}, no factorization at depth 6"))
}

fn occ_pairs() -> Outcome {
    let (code, out) = condrew(&["cps", "occ.crs"])?;
    let text = String::from_utf8_lossy(&out);
    ensure(code == 0, || format!("exit {code}"))?;
    let want = "gt (length l) x = true ∧ gt (length l) x = false ⊃ (false, occ o (get l x))\n    occ2 in occ3 at root: UnfeasibleByOrthonormality(1, 2)\n1 critical pairs\n";
    ensure(text == want, || format!("output {text:?}"))?;
    let rs = load(corpus::OCC);
    let cps = critical_pairs(&rs);
    let v = probe_feasibility(&cps[0], &rs, Mode::R, 3, Fuel::default(), 20);
    ensure(matches!(v, FeasibilityVerdict::UnfeasibleByOrthonormality(..)), || format!("{v:?}"))?;
    let full = load(corpus::TREE_FULL);
    ensure(orthonormal_check(&full).is_true(), || "tree-full not orthonormal".into())?;
    Ok("one pair, unfeasible by orthonormality".into())
}

fn classifier_table() -> Outcome {
    let tree = classify_system(&load(corpus::TREE));
    for f in ["left_linear", "semi_closed", "algebraic"] {
        ensure(tree.flag(f).map(|x| x.value) == Some(Tri::True), || format!("tree {f}"))?;
    }
    ensure(applicable_theorems(&tree).applicable.contains(&Theorem::from_label("Thm-4.3").unwrap()), || {
        "tree lacks Thm-4.3".into()
    })?;
    let sp = classify_system(&load(corpus::SP));
    ensure(sp.flag("left_linear").map(|x| x.value) == Some(Tri::False), || "sp left_linear".into())?;
    ensure(applicable_theorems(&sp).applicable.is_empty(), || "sp lists a theorem".into())?;
    let mc = classify_system(&load(corpus::MINUS_COND));
    ensure(mc.flag("semi_closed").map(|x| x.value) == Some(Tri::False), || "minus-cond semi_closed".into())?;
    let golden = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for (file, args) in [
        ("check-tree.txt", vec!["check", "tree.crs"]),
        ("check-sp.txt", vec!["check", "sp.crs"]),
        ("check-minus-cond.txt", vec!["check", "minus-cond.crs"]),
        ("check-arity-term.txt", vec!["check", "arity.crs", "--term", r"id (\x. x x) (\x. x x)"]),
    ] {
        let (_, out) = condrew(&args)?;
        let want = std::fs::read(golden.join(file)).map_err(|e| e.to_string())?;
        ensure(out == want, || format!("{file} differs"))?;
    }
    let arity = std::fs::read_to_string(golden.join("check-arity-term.txt")).unwrap();
    ensure(arity.contains("respects arity: false"), || "arity golden".into())?;
    Ok("4 goldens match".into())
}

fn diamond() -> Outcome {
    let syms: Vec<Name> = ["f", "a"].into_iter().map(Name::from).collect();
    let terms = enumerate_closed(&syms, 7);
    let r = check_parallel_beta_diamond(&terms, Fuel::default());
    ensure(r.passed() && !r.truncated, || r.to_string())?;
    Ok(format!("{} terms, {} peaks", terms.len(), r.checked_peaks))
}

fn commutation() -> Outcome {
    let rs = load(corpus::TREE);
    let mut total = 0;
    for i in 1..=3 {
        let mut gen = TermGen::for_system(&rs, 1).max_depth(6).redex_rate(0.3).plant_redexes(&rs, 0.3);
        let b = Relation::Step(Rel::new(Mode::R, i));
        let r = check_commutation_sample(&rs, Relation::ParallelBeta, b, &mut gen, 200, Fuel::new(6, 200));
        ensure(r.passed() && r.checked_peaks == 200, || r.to_string())?;
        total += r.checked_peaks;
    }
    Ok(format!("{total} peaks for levels 1..3"))
}

fn projection() -> Outcome {
    let rs = load(corpus::TREE);
    let alpha = rs.arity().unwrap();
    let mut total = 0;
    for i in 1..=3 {
        let mut gen = TermGen::for_system(&rs, i as u64).max_depth(6).redex_rate(0.3).plant_redexes(&rs, 0.3);
        let r = check_projection_sample(&rs, &alpha, Mode::BetaUnionRBeta, i, &mut gen, 100, 5, Fuel::default())
            .map_err(|e| e.to_string())?;
        ensure(r.passed() && r.checked_peaks == 100, || r.to_string())?;
        total += r.checked_peaks;
    }
    // the sample really is in AN
    let t = rs.parse_term(r"car ((\x. cons x nil) zero)").unwrap();
    ensure(matches!(in_an(&t, &alpha, Fuel::default()), Ok(AnVerdict::Yes(_))), || "AN probe".into())?;
    Ok(format!("{total} derivations for levels 1..3"))
}

fn shallow() -> Outcome {
    let rs = load(corpus::TREE_FULL);
    let mut total = 0;
    for i in 1..=3 {
        for j in 1..=3 {
            let mut gen = TermGen::for_system(&rs, 0).max_depth(6).redex_rate(0.3).plant_redexes(&rs, 0.3);
            let r = check_shallow_sample(&rs, Mode::BetaUnionRBeta, i, j, &mut gen, 12, 3, Fuel::new(8, 200));
            ensure(r.passed() && r.checked_peaks == 12, || r.to_string())?;
            total += r.checked_peaks;
        }
    }
    Ok(format!("{total} peaks over 9 level pairs"))
}

fn determinism() -> Outcome {
    let runs: &[&[&str]] = &[
        &["check", "tree.crs", "--json"],
        &["cps", "tree-full.crs", "--json"],
        &["eval", "filter.crs", "--term", "filter id (cons true nil)", "--level", "2", "--json"],
        &["joinable", "minus.crs", "--left", "zero", "--right", "succ zero", "--json"],
        &["explore", "tree.crs", "--term", "length (cons zero nil)", "--format", "json", "--json"],
        &["normalize", "--term", r"(\x. x x) ((\y. y) a)", "--json"],
        &["corpus", "--json"],
        &["lab", "diamond", "--size", "5", "--json"],
        &["lab", "commutation", "tree.crs", "--seed", "3", "--samples", "20", "--json"],
        &["lab", "shallow", "tree.crs", "--seed", "3", "--samples", "5", "--max-level", "2", "--json"],
        &["lab", "projection", "tree.crs", "--seed", "3", "--samples", "20", "--json"],
        &["lab", "parallel-moves", "tree.crs", "--seed", "3", "--samples", "20", "--json"],
    ];
    for args in runs {
        let (c1, a) = condrew(args)?;
        let (c2, b) = condrew(args)?;
        ensure(c1 == c2 && a == b, || format!("`{}` differs between runs", args.join(" ")))?;
        let v: serde_json::Value = serde_json::from_slice(&a).map_err(|e| format!("`{}`: {e}", args.join(" ")))?;
        ensure(v["schema"] == "v1", || format!("`{}` lacks the schema tag", args.join(" ")))?;
    }
    Ok(format!("{} commands byte-identical", runs.len()))
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let criteria: Vec<Criterion> = vec![
        ("1 filter evaluation", filter_evaluation, secs(1)),
        ("2 minus peak", || y_peak(corpus::MINUS, 1), secs(1)),
        ("3 conditional minus peak", || y_peak(corpus::MINUS_COND, 2), secs(1)),
        ("4a bconfl system 1", || bconfl(0), secs(5)),
        ("4b bconfl system 2", || bconfl(1), secs(5)),
        ("4c bconfl system 3", || bconfl(2), secs(5)),
        ("4d bconfl system 4", || bconfl(3), secs(5)),
        ("5 occ critical pair", occ_pairs, secs(1)),
        ("6 classifier table", classifier_table, secs(30)),
        ("7 parallel beta diamond", diamond, secs(60)),
        ("8 commutation sampling", commutation, secs(120)),
        ("9 projection", projection, secs(120)),
        ("10 shallow confluence", shallow, secs(300)),
        ("11 determinism", determinism, secs(300)),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let line = match outcome {
            Ok(detail) if took <= limit => format!("PASS {name} ({took:.2?}): {detail}"),
            Ok(detail) => format!("FAIL {name} ({took:.2?} over {limit:?}): {detail}"),
            Err(e) => format!("FAIL {name} ({took:.2?}): {e}"),
        };
        failed += usize::from(line.starts_with("FAIL"));
        println!("{line}");
    }
    println!("{failed} criteria failed");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
