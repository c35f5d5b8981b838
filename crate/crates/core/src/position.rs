use std::fmt;

use serde::{Serialize, Serializer};

/// One step down a term: into the function or argument of an application, or
/// into the body of an abstraction. The derived order makes lexicographic
/// position order coincide with leftmost-outermost order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    Fun,
    Arg,
    Body,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position(Vec<Step>);

impl Position {
    pub fn root() -> Position {
        Position(Vec::new())
    }

    pub fn steps(&self) -> &[Step] {
        &self.0
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, step: Step) -> Position {
        let mut v = self.0.clone();
        v.push(step);
        Position(v)
    }

    pub fn concat(&self, other: &Position) -> Position {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Position(v)
    }

    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Neither position lies below the other.
    pub fn disjoint(&self, other: &Position) -> bool {
        !self.is_prefix_of(other) && !other.is_prefix_of(self)
    }

    /// Number of abstractions crossed on the way down.
    pub fn binder_depth(&self) -> u32 {
        self.0.iter().filter(|s| **s == Step::Body).count() as u32
    }

    /// Parses the `root.Fun.Arg` form produced by `Display`.
    pub fn parse(text: &str) -> Option<Position> {
        let mut parts = text.trim().split('.');
        if parts.next()? != "root" {
            return None;
        }
        let mut steps = Vec::new();
        for p in parts {
            steps.push(match p {
                "Fun" => Step::Fun,
                "Arg" => Step::Arg,
                "Body" => Step::Body,
                _ => return None,
            });
        }
        Some(Position(steps))
    }
}

impl From<Vec<Step>> for Position {
    fn from(v: Vec<Step>) -> Self {
        Position(v)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("root")?;
        for s in &self.0 {
            write!(f, ".{s:?}")?;
        }
        Ok(())
    }
}

impl Serialize for Position {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
