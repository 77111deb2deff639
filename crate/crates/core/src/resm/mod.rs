//! Regular expressions over stop sequences.
//!
//! ```text
//! E    := dim | dim[cond] | (E)* | E.E | ε | ?
//! cond := cond or cond | cond and cond | not cond | (cond)
//!       | attr OP literal | time(category)=label
//! ```
//!
//! `dim` is a dimension name or label and matches one stop at a PoI of that
//! dimension; `?` matches any run of stops, including none. A trajectory
//! matches when some contiguous run of its stops is in the language.

mod automaton;
mod cond;
mod parse;

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::moft::ObjectId;
use crate::olap::{Olap, OlapError};
use crate::smgraph::{GraphError, SmGraph};
use crate::stops::SmMoft;

pub use automaton::{Predicate, ResmAutomaton};
pub use cond::eval_cond;
pub use parse::parse;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResmError {
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown dimension {0}")]
    UnknownDimension(String),
    #[error("dimension {dim} has no attribute {attr} on its bottom level")]
    UnknownAttribute { dim: String, attr: String },
    #[error("attribute {attr} of {dim} is {kind}; cannot compare with {op} {literal}")]
    TypeMismatch { dim: String, attr: String, kind: String, op: CmpOp, literal: Literal },
    #[error("unknown time category {0}")]
    UnknownCategory(String),
    #[error("time category {category} has no label {label}")]
    UnknownLabel { category: String, label: String },
    #[error(transparent)]
    Olap(#[from] OlapError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn is_ordering(&self) -> bool {
        !matches!(self, CmpOp::Eq | CmpOp::Ne)
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Text(String),
    Number(f64),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Text(s) => write_quoted(f, s),
            Literal::Number(n) => write!(f, "{n}"),
        }
    }
}

fn write_quoted(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_str("'")?;
    for c in s.chars() {
        if c == '\'' || c == '\\' {
            f.write_str("\\")?;
        }
        write!(f, "{c}")?;
    }
    f.write_str("'")
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !matches!(s, "and" | "or" | "not" | "time")
}

/// Condition attached to a dimension atom.
#[derive(Debug, Clone, PartialEq)]
pub enum Cond {
    /// Bottom-level attribute of the stop's PoI compared with a literal.
    Cmp { attr: String, op: CmpOp, value: Literal },
    /// Some instant strictly inside the stop interval carries `label` in
    /// time category `category`.
    Time { category: String, label: String },
    Not(Box<Cond>),
    And(Box<Cond>, Box<Cond>),
    Or(Box<Cond>, Box<Cond>),
}

impl Cond {
    fn precedence(&self) -> u8 {
        match self {
            Cond::Or(..) => 1,
            Cond::And(..) => 2,
            _ => 3,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let paren = self.precedence() < min;
        if paren {
            f.write_str("(")?;
        }
        match self {
            Cond::Cmp { attr, op, value } => write!(f, "{attr}{op}{value}")?,
            Cond::Time { category, label } => {
                write!(f, "time({category})=")?;
                if is_identifier(label) {
                    f.write_str(label)?;
                } else {
                    write_quoted(f, label)?;
                }
            }
            Cond::Not(c) => {
                f.write_str("not ")?;
                c.fmt_at(f, 3)?;
            }
            Cond::And(a, b) => {
                a.fmt_at(f, 2)?;
                f.write_str(" and ")?;
                b.fmt_at(f, 3)?;
            }
            Cond::Or(a, b) => {
                a.fmt_at(f, 1)?;
                f.write_str(" or ")?;
                b.fmt_at(f, 2)?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

/// Parsed query expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Resm {
    Dim(String),
    DimCond(String, Cond),
    Star(Box<Resm>),
    Concat(Box<Resm>, Box<Resm>),
    Epsilon,
    Wildcard,
}

impl Resm {
    pub fn concat(a: Resm, b: Resm) -> Resm {
        Resm::Concat(Box::new(a), Box::new(b))
    }

    pub fn star(e: Resm) -> Resm {
        Resm::Star(Box::new(e))
    }

    pub fn depth(&self) -> usize {
        match self {
            Resm::Star(e) => 1 + e.depth(),
            Resm::Concat(a, b) => 1 + a.depth().max(b.depth()),
            _ => 1,
        }
    }
}

impl fmt::Display for Resm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resm::Dim(d) => f.write_str(d),
            Resm::DimCond(d, c) => write!(f, "{d}[{c}]"),
            Resm::Star(e) => write!(f, "({e})*"),
            Resm::Concat(a, b) => write!(f, "{a}.{b}"),
            Resm::Epsilon => f.write_str("ε"),
            Resm::Wildcard => f.write_str("?"),
        }
    }
}

/// Objects with a contiguous run of stops matching `q`.
pub fn matching_oids(sm: &SmMoft, q: &Resm, olap: &Olap) -> Result<BTreeSet<ObjectId>, ResmError> {
    let automaton = ResmAutomaton::compile(q, olap)?;
    let oids: Vec<&ObjectId> = sm.oids().into_iter().collect();
    let hits = oids
        .par_iter()
        .map(|&oid| {
            let graph = SmGraph::build(sm, oid, olap)?;
            let matched = automaton.matches(&graph.stop_sequence(), olap)?;
            Ok(matched.then(|| oid.clone()))
        })
        .collect::<Result<Vec<_>, ResmError>>()?;
    Ok(hits.into_iter().flatten().collect())
}
