use std::fmt::{self, Write};

use super::ast::*;

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn print_block(out: &mut String, stmts: &[Stmt], depth: usize) {
    for s in stmts {
        indent(out, depth);
        match s {
            Stmt::Read { label, dest, loc } => writeln!(out, "{label}: {dest} = {loc};"),
            Stmt::Write { label, loc, value } => writeln!(out, "{label}: {loc} = {value};"),
            Stmt::Rmw { label, dest, loc, value } => writeln!(out, "{label}: rmw({dest}, {loc}, {value});"),
            Stmt::Fence { label } => writeln!(out, "{label}: fence.rr;"),
            Stmt::Local { label, dest, value } => {
                if let Some(l) = label {
                    write!(out, "{l}: ").unwrap();
                }
                match value {
                    LocalValue::Const(v) => writeln!(out, "{dest} = {v};"),
                    LocalValue::Local(src) => writeln!(out, "{dest} = {src};"),
                }
            }
            Stmt::If { label, cond, then_branch, else_branch } => {
                writeln!(out, "{label}: if ({cond}) {{").unwrap();
                print_block(out, then_branch, depth + 1);
                indent(out, depth);
                if else_branch.is_empty() {
                    writeln!(out, "}}")
                } else {
                    writeln!(out, "}} else {{").unwrap();
                    print_block(out, else_branch, depth + 1);
                    indent(out, depth);
                    writeln!(out, "}}")
                }
            }
        }
        .unwrap();
    }
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cond::True => write!(f, "true"),
            Cond::False => write!(f, "false"),
            Cond::Eq(l, v) => write!(f, "{l} == {v}"),
            Cond::Ne(l, v) => write!(f, "{l} != {v}"),
        }
    }
}

impl fmt::Display for PredAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredAtom::Local(l, v) => write!(f, "{l}={v}"),
            PredAtom::Final(l, v) => write!(f, "{l}@final={v}"),
        }
    }
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kw = match self.kind {
            AssertKind::Exists => "exists",
            AssertKind::Forbidden => "forbidden",
        };
        let atoms: Vec<String> = self.atoms.iter().map(|a| a.to_string()).collect();
        write!(f, "{kw} ({})", atoms.join(" /\\ "))
    }
}

/// Canonical source text with every label explicit; parsing it back yields
/// an identical [`Program`].
impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::from("init {");
        for (l, v) in &self.init {
            write!(out, " {l} = {v};")?;
        }
        out.push_str(" }\n");
        for t in &self.threads {
            writeln!(out, "thread {} {{", t.tid)?;
            print_block(&mut out, &t.body, 1);
            out.push_str("}\n");
        }
        if !self.finals.is_empty() {
            out.push_str("final {");
            for l in &self.finals {
                write!(out, " {l};")?;
            }
            out.push_str(" }\n");
        }
        if let Some(a) = &self.assertion {
            writeln!(out, "{a}")?;
        }
        if !self.expect.is_empty() {
            out.push_str("expect {");
            for (m, e) in &self.expect {
                write!(out, " {m}: {e};")?;
            }
            out.push_str(" }\n");
        }
        f.write_str(&out)
    }
}
