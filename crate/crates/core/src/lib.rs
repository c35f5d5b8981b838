//! Lambda calculus combined with join conditional rewriting.
//!
//! Terms, beta reduction, stratified conditional rewrite relations, critical
//! pairs and classifiers, plus a bounded laboratory for checking confluence
//! diagrams on explored fragments.

pub mod beta;
pub mod corpus;
pub mod critical;
pub mod gen;
pub mod head;
pub mod lab;
pub mod matching;
pub mod position;
pub mod rewrite;
pub mod rulefile;
pub mod rules;
pub mod syntax;
pub mod term;

pub use beta::{BetaOutcome, Fuel, TermSet};
pub use position::{Position, Step};
pub use rewrite::{JoinVerdict, LevelStep, Mode, Rel, Rewriter};
pub use rules::{CondRule, Condition, RuleSystem, Signature};
pub use term::{Arity, Name, Substitution, Term};
