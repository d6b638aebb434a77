//! Litmus-test source language: parsing, labelling and printing.
//!
//! ```text
//! init { x = 0; y = 0; }
//! thread 1 { x = 1; a = y; }
//! thread 2 { y = 1; b = x; }
//! forbidden (a=0 /\ b=0)
//! expect { sc: forbidden; tso: allowed; }
//! ```
//!
//! A name declared in `init` is a shared location; every other name is a
//! thread-local register. Unlabelled memory statements are numbered `A1`,
//! `A2`, … and unlabelled conditionals `C1`, `C2`, … in textual order.

mod ast;
pub(crate) mod lexer;
mod parser;
mod print;

pub use ast::*;
pub use parser::{parse_execution_source, parse_program};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FrontendError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("undeclared location `{0}`")]
    UndeclaredLocation(String),
    #[error("value `{0}` is not an integer")]
    NonIntegerValue(String),
    #[error("thread {0} declared twice")]
    DuplicateThread(Tid),
    #[error("local `{0}` is assigned in threads {1} and {2}")]
    SharedLocal(String, Tid, Tid),
}

impl FrontendError {
    pub(crate) fn syntax(line: usize, col: usize, msg: impl Into<String>) -> Self {
        FrontendError::Syntax { line, col, msg: msg.into() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SB: &str = "init { x = 0; y = 0; }
        thread 1 { x = 1; a = y; }
        thread 2 { y = 1; b = x; }
        forbidden (a=0 /\\ b=0)";

    #[test]
    fn auto_labels_are_sequential() {
        let p = parse_program(SB).unwrap();
        assert_eq!(p.memory_labels(), ["init_x", "init_y", "A1", "A2", "A3", "A4"]);
        assert!(matches!(&p.threads[0].body[1], Stmt::Read { dest, loc, .. } if dest == "a" && loc == "y"));
    }

    #[test]
    fn explicit_labels_are_skipped_by_numbering() {
        let p = parse_program("init { x = 0; } thread 1 { A1: x = 1; x = 2; }").unwrap();
        assert_eq!(p.memory_labels(), ["init_x", "A1", "A2"]);
    }

    #[test]
    fn duplicate_labels_are_rejected() {
        let err = parse_program("init { x = 0; } thread 1 { L: x = 1; L: x = 2; }").unwrap_err();
        assert_eq!(err, FrontendError::DuplicateLabel("L".into()));
    }

    #[test]
    fn undeclared_locations_are_rejected() {
        let err = parse_program("init { x = 0; } thread 1 { rmw(a, z, 1); }").unwrap_err();
        assert_eq!(err, FrontendError::UndeclaredLocation("z".into()));
        let err = parse_program("init { x = 0; } thread 1 { } final { z; }").unwrap_err();
        assert_eq!(err, FrontendError::UndeclaredLocation("z".into()));
    }

    #[test]
    fn non_integer_writes_are_rejected() {
        let err = parse_program("init { x = 0; } thread 1 { x = 1.5; }").unwrap_err();
        assert_eq!(err, FrontendError::NonIntegerValue("1.5".into()));
        let err = parse_program("init { x = 0; } thread 1 { a = 1; x = a; }").unwrap_err();
        assert_eq!(err, FrontendError::NonIntegerValue("a".into()));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_program("init { x = 0; }\nthread 1 { x = 1 }").unwrap_err();
        assert_eq!(err.to_string(), "syntax error at 2:18: expected `;`, found `}`");
    }

    #[test]
    fn po_prog_separates_branch_arms() {
        let p = parse_program(
            "init { x = 0; } thread 1 { a = x; if (a == 1) { x = 1; } else { x = 2; } x = 3; }",
        )
        .unwrap();
        let (labels, po) = p.po_prog();
        let ix = |l: &str| labels.iter().position(|x| x == l).unwrap();
        assert!(po.contains(ix("A1"), ix("A2")));
        assert!(!po.contains(ix("A2"), ix("A3")) && !po.contains(ix("A3"), ix("A2")));
        assert!(po.contains(ix("A2"), ix("A4")) && po.contains(ix("A3"), ix("A4")));
        assert!(po.contains(ix("init_x"), ix("A4")));
    }

    #[test]
    fn printing_round_trips() {
        let src = "init { x = 0; y = 0; }
            thread 1 { a = x; C7: if (a != 0) { y = 1; } else { b = 2; fence.rr; } rmw(c, y, 3); }
            thread 2 { L: y = 2; }
            final { x; }
            exists (a=1 /\\ x@final=0)
            expect { sc: allowed; }";
        let p = parse_program(src).unwrap();
        let printed = p.to_string();
        assert_eq!(parse_program(&printed).unwrap(), p);
    }
}
