use std::fmt;

use crate::grammar::{Category, RuleId};

/// A 1-based source position used in diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: duplicate rule id `{id}`")]
    DuplicateRuleId { id: RuleId, line: usize },

    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },

    #[error("line {line}: category `{category}` is never the left-hand side of a rule")]
    UnknownCategory { category: Category, line: usize },

    #[error("{pos}: syntax error: {message}")]
    Syntax { pos: Pos, message: String },

    #[error("{pos}: unknown rule id `{id}`")]
    UnknownRuleId { id: RuleId, pos: Pos },

    #[error("{pos}: rule `{rule}` expects {expected} children, found {found}")]
    ArityMismatch {
        rule: RuleId,
        expected: usize,
        found: usize,
        pos: Pos,
    },

    #[error("{pos}: rule `{child}` has category `{found}` but the slot requires `{expected}`")]
    CategoryMismatch {
        child: RuleId,
        expected: Category,
        found: Category,
        pos: Pos,
    },

    #[error("{pos}: tree root has category `{found}`, expected top category `{expected}`")]
    RootCategoryMismatch {
        expected: Category,
        found: Category,
        pos: Pos,
    },

    #[error("the root or-node has no dominating and-node")]
    RootHasNoParent,

    #[error("slot {slot} of rule `{rule}` has category `{expected}`, but rule `{child}` has category `{found}`")]
    SlotMismatch {
        rule: RuleId,
        slot: String,
        child: RuleId,
        expected: Category,
        found: Category,
    },

    #[error("`{0}` is not an RHS slot")]
    NotAnRhsSlot(String),

    #[error("scheme {0} is not supported by this selection function")]
    SchemeMismatch(&'static str),

    #[error("cutnode iteration did not settle after {iterations} iterations (last two iterates: {last:?} and {previous:?})")]
    IterationLimitExceeded {
        iterations: usize,
        last: Vec<usize>,
        previous: Vec<usize>,
    },

    #[error("tree path at depth {depth} is not present in the and-or index")]
    PathNotInIndex { depth: usize },

    #[error("and-or enumeration exceeded the cap of {cap} chunks")]
    ChunkExplosion { cap: usize },

    #[error("{path}: {source}")]
    InFile {
        path: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
