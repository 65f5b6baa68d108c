//! A compact shape grammar for procedural buildings.
//!
//! Rule files hold one rule per line, `Symbol --> op op ...`, with `#`
//! comments. The first rule's symbol is the axiom. Operations:
//!
//! | op | effect |
//! |----|--------|
//! | `extrude(h)` | give the current shape height `h` |
//! | `split(x\|y\|z){4: A, ~1: B}` | cut along a scope axis; `~w` shares the remainder by weight |
//! | `repeat(axis, size, A)` | cut into equal pieces close to `size` |
//! | `setback(d){A}` | `A` receives the footprint inset by `d`, placed on the roof |
//! | `color(r, g, b)` | albedo in `[0, 1]` |
//! | `class(name)` | semantic class of emitted geometry |
//! | `choose{0.7: ops, 0.3: ops}` | weighted random branch |
//! | `primitive(box\|cylinder\|cone\|quad)` | emit geometry for the current shape |
//! | `Symbol` | apply another rule to the current shape |

mod exec;
mod parse;

pub use exec::{apply_rules, MAX_DEPTH};
pub use parse::parse_rules;

use std::collections::BTreeMap;

use thiserror::Error;

use super::SemanticClass;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitSize {
    Absolute(f64),
    Relative(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitPart {
    pub size: SplitSize,
    pub symbol: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimitiveKind {
    Box,
    Cylinder,
    Cone,
    Quad,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Op {
    Extrude(f64),
    Color([f32; 3]),
    Class(SemanticClass),
    Split { axis: Axis, parts: Vec<SplitPart> },
    Repeat { axis: Axis, size: f64, symbol: String },
    Setback { distance: f64, symbol: String },
    Choose(Vec<Production>),
    Primitive(PrimitiveKind),
    Invoke(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Production {
    pub weight: Option<f64>,
    pub ops: Vec<Op>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleProgram {
    pub rules: BTreeMap<String, Vec<Production>>,
    pub axiom: String,
}

#[derive(Debug, Error, PartialEq)]
pub enum GrammarError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown operation `{name}` at {line}:{column}")]
    UnknownOperation {
        line: usize,
        column: usize,
        name: String,
    },
    #[error("line {line}: weights in rule `{rule}` sum to {sum}, expected 1")]
    BadProbabilities { line: usize, rule: String, sum: f64 },
    #[error("undefined symbol `{symbol}` at {line}:{column}")]
    UndefinedSymbol {
        line: usize,
        column: usize,
        symbol: String,
    },
    #[error("line {line}: rule `{symbol}` is defined twice")]
    DuplicateRule { line: usize, symbol: String },
    #[error("rule file defines no rules, so there is no axiom")]
    MissingAxiom,
    #[error("recursion deeper than {limit} while expanding `{rule}`")]
    RecursionLimit { rule: String, limit: usize },
    #[error("rule `{rule}`: split sizes total {requested} m but the shape spans {extent} m")]
    SplitOverflow {
        rule: String,
        requested: f64,
        extent: f64,
    },
}
