//! Fixtures shared by the engine benchmarks.

use condrew_core::corpus::{self, load};
use condrew_core::syntax::parse_term;
use condrew_core::{RuleSystem, Term};

/// `mul n n f a` on Church numerals.
pub fn church_square(n: usize) -> Term {
    let numeral = format!(r"(\s. \z. {}z{})", "s (".repeat(n), ")".repeat(n));
    let mul = r"(\m. \n. \s. m (n s))";
    parse_term(&format!("{mul} {numeral} {numeral} f a"), &|s| s == "f" || s == "a").expect("fixture parses")
}

/// A term with `width` independent beta redexes side by side.
pub fn redex_spine(width: usize) -> Term {
    let arg = r"((\x. x x) ((\y. y) a))";
    parse_term(&format!("f {}", vec![arg; width].join(" ")), &|s| s == "f" || s == "a").expect("fixture parses")
}

pub fn tree_full() -> RuleSystem {
    load(corpus::TREE_FULL)
}

/// An `occ` query over a list of `n` nodes, which exercises conditional
/// steps at level 3.
pub fn occ_query(rs: &RuleSystem, n: usize) -> Term {
    let children = (0..n).fold("nil".to_string(), |acc, _| format!("cons (node zero nil) ({acc})"));
    rs.parse_term(&format!("occ (cons zero nil) (node zero ({children}))"))
        .expect("fixture parses")
}
