use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use super::lexer::{lex, Cursor, Tok};
use super::FrontendError;

/// Statement before label assignment.
enum RawStmt {
    Read { label: Option<String>, dest: String, loc: String },
    Write { label: Option<String>, loc: String, value: i64 },
    Rmw { label: Option<String>, dest: String, loc: String, value: i64 },
    Fence { label: Option<String> },
    Local { label: Option<String>, dest: String, value: LocalValue },
    If { label: Option<String>, cond: Cond, then_branch: Vec<RawStmt>, else_branch: Vec<RawStmt> },
}

struct Parser {
    cur: Cursor,
    locs: BTreeSet<String>,
    raw: bool,
    edges: ExecutionEdges,
}

pub fn parse_program(src: &str) -> Result<Program, FrontendError> {
    let mut p = Parser { cur: Cursor::new(lex(src)?), locs: BTreeSet::new(), raw: false, edges: Default::default() };
    p.program()
}

/// Parses a raw execution: a branch-free program followed by `rf { W -> R; }`
/// and `mo { W1 -> W2 -> ...; }` blocks, then an optional `expect` block.
pub fn parse_execution_source(src: &str) -> Result<(Program, ExecutionEdges), FrontendError> {
    let mut p = Parser { cur: Cursor::new(lex(src)?), locs: BTreeSet::new(), raw: true, edges: Default::default() };
    let prog = p.program()?;
    Ok((prog, p.edges))
}

impl Parser {
    fn program(&mut self) -> Result<Program, FrontendError> {
        let init = self.init()?;
        let mut raw_threads: Vec<(Tid, Vec<RawStmt>)> = Vec::new();
        while self.cur.is_kw("thread") {
            self.cur.next();
            let tid = self.cur.int()?;
            if tid <= 0 || tid >= FINAL_TID as i64 {
                return Err(self.cur.error(format!("thread number {tid} out of range")));
            }
            let tid = tid as Tid;
            if raw_threads.iter().any(|(t, _)| *t == tid) {
                return Err(FrontendError::DuplicateThread(tid));
            }
            self.cur.expect_sym("{")?;
            let body = self.block()?;
            raw_threads.push((tid, body));
        }
        if raw_threads.is_empty() {
            return Err(self.cur.unexpected("`thread`"));
        }
        let mut finals = Vec::new();
        if self.cur.eat_kw("final") {
            self.cur.expect_sym("{")?;
            while !self.cur.eat_sym("}") {
                let loc = self.cur.ident()?;
                if !self.locs.contains(&loc) {
                    return Err(FrontendError::UndeclaredLocation(loc));
                }
                self.cur.expect_sym(";")?;
                if !finals.contains(&loc) {
                    finals.push(loc);
                }
            }
        }
        let assertion = self.assertion(&finals)?;
        if self.raw {
            self.edge_blocks()?;
        }
        let expect = self.expect()?;
        if !self.cur.at_end() {
            return Err(self.cur.unexpected("end of input"));
        }
        raw_threads.sort_by_key(|(t, _)| *t);
        let threads = assign_labels(raw_threads, &self.locs)?;
        check_local_ownership(&threads)?;
        Ok(Program { init, threads, finals, assertion, expect })
    }

    fn init(&mut self) -> Result<Vec<(String, i64)>, FrontendError> {
        self.cur.expect_kw("init")?;
        self.cur.expect_sym("{")?;
        let mut init = Vec::new();
        while !self.cur.eat_sym("}") {
            let loc = self.cur.ident()?;
            self.cur.expect_sym("=")?;
            let v = self.value()?;
            self.cur.expect_sym(";")?;
            if !self.locs.insert(loc.clone()) {
                return Err(self.cur.error(format!("location `{loc}` declared twice")));
            }
            init.push((loc, v));
        }
        Ok(init)
    }

    fn value(&mut self) -> Result<i64, FrontendError> {
        match self.cur.peek() {
            Some(Tok::Float(f)) => Err(FrontendError::NonIntegerValue(f.clone())),
            _ => self.cur.int(),
        }
    }

    fn block(&mut self) -> Result<Vec<RawStmt>, FrontendError> {
        let mut out = Vec::new();
        while !self.cur.eat_sym("}") {
            if self.cur.at_end() {
                return Err(self.cur.unexpected("`}`"));
            }
            out.push(self.stmt()?);
        }
        Ok(out)
    }

    fn stmt(&mut self) -> Result<RawStmt, FrontendError> {
        let label = if matches!(self.cur.peek(), Some(Tok::Ident(_))) && matches!(self.cur.peek_at(1), Some(Tok::Sym(":"))) {
            let l = self.cur.ident()?;
            self.cur.next();
            Some(l)
        } else {
            None
        };
        if self.cur.eat_kw("if") {
            self.cur.expect_sym("(")?;
            let cond = self.cond()?;
            self.cur.expect_sym(")")?;
            self.cur.expect_sym("{")?;
            let then_branch = self.block()?;
            let else_branch = if self.cur.eat_kw("else") {
                self.cur.expect_sym("{")?;
                self.block()?
            } else {
                Vec::new()
            };
            return Ok(RawStmt::If { label, cond, then_branch, else_branch });
        }
        let s = self.simple(label)?;
        self.cur.expect_sym(";")?;
        Ok(s)
    }

    fn simple(&mut self, label: Option<String>) -> Result<RawStmt, FrontendError> {
        if self.cur.eat_kw("fence.rr") {
            return Ok(RawStmt::Fence { label });
        }
        if self.cur.is_kw("rmw") && matches!(self.cur.peek_at(1), Some(Tok::Sym("("))) {
            self.cur.next();
            self.cur.next();
            let dest = self.cur.ident()?;
            self.cur.expect_sym(",")?;
            let loc = self.cur.ident()?;
            if !self.locs.contains(&loc) {
                return Err(FrontendError::UndeclaredLocation(loc));
            }
            self.cur.expect_sym(",")?;
            let value = self.value()?;
            self.cur.expect_sym(")")?;
            return Ok(RawStmt::Rmw { label, dest, loc, value });
        }
        let lhs = self.cur.ident()?;
        self.cur.expect_sym("=")?;
        if self.locs.contains(&lhs) {
            return match self.cur.peek() {
                Some(Tok::Int(_)) | Some(Tok::Float(_)) => Ok(RawStmt::Write { label, loc: lhs, value: self.value()? }),
                Some(Tok::Ident(s)) => Err(FrontendError::NonIntegerValue(s.clone())),
                _ => Err(self.cur.unexpected("integer")),
            };
        }
        match self.cur.peek().cloned() {
            Some(Tok::Ident(rhs)) => {
                self.cur.next();
                if self.locs.contains(&rhs) {
                    Ok(RawStmt::Read { label, dest: lhs, loc: rhs })
                } else {
                    Ok(RawStmt::Local { label, dest: lhs, value: LocalValue::Local(rhs) })
                }
            }
            _ => Ok(RawStmt::Local { label, dest: lhs, value: LocalValue::Const(self.value()?) }),
        }
    }

    fn cond(&mut self) -> Result<Cond, FrontendError> {
        if self.cur.eat_kw("true") {
            return Ok(Cond::True);
        }
        if self.cur.eat_kw("false") {
            return Ok(Cond::False);
        }
        let local = self.cur.ident()?;
        if self.locs.contains(&local) {
            return Err(self.cur.error(format!("guard must test a local, `{local}` is a location")));
        }
        if self.cur.eat_sym("==") {
            Ok(Cond::Eq(local, self.cur.int()?))
        } else if self.cur.eat_sym("!=") {
            Ok(Cond::Ne(local, self.cur.int()?))
        } else {
            Err(self.cur.unexpected("`==` or `!=`"))
        }
    }

    fn assertion(&mut self, finals: &[String]) -> Result<Option<Assertion>, FrontendError> {
        let kind = if self.cur.eat_kw("exists") {
            AssertKind::Exists
        } else if self.cur.eat_kw("forbidden") {
            AssertKind::Forbidden
        } else {
            return Ok(None);
        };
        self.cur.expect_sym("(")?;
        let mut atoms = Vec::new();
        loop {
            let name = self.cur.ident()?;
            if self.cur.eat_sym("@") {
                self.cur.expect_kw("final")?;
                if !self.locs.contains(&name) {
                    return Err(FrontendError::UndeclaredLocation(name));
                }
                if !finals.contains(&name) {
                    return Err(self.cur.error(format!("`{name}@final` needs `{name}` in the final clause")));
                }
                self.cur.expect_sym("=")?;
                atoms.push(PredAtom::Final(name, self.cur.int()?));
            } else {
                self.cur.expect_sym("=")?;
                atoms.push(PredAtom::Local(name, self.cur.int()?));
            }
            if !self.cur.eat_sym("/\\") {
                break;
            }
        }
        self.cur.expect_sym(")")?;
        Ok(Some(Assertion { kind, atoms }))
    }

    fn edge_blocks(&mut self) -> Result<(), FrontendError> {
        loop {
            let is_rf = if self.cur.eat_kw("rf") {
                true
            } else if self.cur.eat_kw("mo") {
                false
            } else {
                return Ok(());
            };
            self.cur.expect_sym("{")?;
            while !self.cur.eat_sym("}") {
                let mut chain = vec![self.cur.ident()?];
                while self.cur.eat_sym("->") {
                    chain.push(self.cur.ident()?);
                }
                self.cur.expect_sym(";")?;
                if chain.len() < 2 {
                    return Err(self.cur.error("edge needs `->`"));
                }
                let pairs = chain.windows(2).map(|w| (w[0].clone(), w[1].clone()));
                if is_rf {
                    self.edges.rf.extend(pairs);
                } else {
                    self.edges.mo.extend(pairs);
                }
            }
        }
    }

    fn expect(&mut self) -> Result<BTreeMap<String, Expectation>, FrontendError> {
        let mut out = BTreeMap::new();
        if !self.cur.eat_kw("expect") {
            return Ok(out);
        }
        self.cur.expect_sym("{")?;
        while !self.cur.eat_sym("}") {
            let model = self.cur.ident()?;
            self.cur.expect_sym(":")?;
            let word = self.cur.ident()?;
            let e = match (word.as_str(), self.raw) {
                ("allowed", false) => Expectation::Allowed,
                ("forbidden", false) => Expectation::Forbidden,
                ("consistent", true) => Expectation::Consistent,
                ("inconsistent", true) => Expectation::Inconsistent,
                ("violates", true) => {
                    self.cur.expect_sym("(")?;
                    let mut rules = vec![self.cur.ident()?];
                    while self.cur.eat_sym(",") {
                        rules.push(self.cur.ident()?);
                    }
                    self.cur.expect_sym(")")?;
                    Expectation::Violates(rules)
                }
                (other, _) => return Err(self.cur.error(format!("unexpected verdict `{other}`"))),
            };
            self.cur.expect_sym(";")?;
            out.insert(model, e);
        }
        Ok(out)
    }
}

fn collect_explicit(stmts: &[RawStmt], seen: &mut BTreeSet<String>) -> Result<(), FrontendError> {
    for s in stmts {
        let label = match s {
            RawStmt::Read { label, .. }
            | RawStmt::Write { label, .. }
            | RawStmt::Rmw { label, .. }
            | RawStmt::Fence { label }
            | RawStmt::Local { label, .. }
            | RawStmt::If { label, .. } => label,
        };
        if let Some(l) = label {
            if !seen.insert(l.clone()) {
                return Err(FrontendError::DuplicateLabel(l.clone()));
            }
        }
        if let RawStmt::If { then_branch, else_branch, .. } = s {
            collect_explicit(then_branch, seen)?;
            collect_explicit(else_branch, seen)?;
        }
    }
    Ok(())
}

struct Labeler {
    used: BTreeSet<String>,
    next_mem: usize,
    next_branch: usize,
}

impl Labeler {
    fn fresh(&mut self, branch: bool) -> String {
        loop {
            let (prefix, c) = if branch { ('C', &mut self.next_branch) } else { ('A', &mut self.next_mem) };
            *c += 1;
            let l = format!("{prefix}{c}");
            if self.used.insert(l.clone()) {
                return l;
            }
        }
    }

    fn mem(&mut self, l: Option<String>) -> String {
        l.unwrap_or_else(|| self.fresh(false))
    }

    fn branch(&mut self, l: Option<String>) -> String {
        l.unwrap_or_else(|| self.fresh(true))
    }

    fn block(&mut self, stmts: Vec<RawStmt>) -> Vec<Stmt> {
        stmts
            .into_iter()
            .map(|s| match s {
                RawStmt::Read { label, dest, loc } => Stmt::Read { label: self.mem(label), dest, loc },
                RawStmt::Write { label, loc, value } => Stmt::Write { label: self.mem(label), loc, value },
                RawStmt::Rmw { label, dest, loc, value } => Stmt::Rmw { label: self.mem(label), dest, loc, value },
                RawStmt::Fence { label } => Stmt::Fence { label: self.mem(label) },
                RawStmt::Local { label, dest, value } => Stmt::Local { label, dest, value },
                RawStmt::If { label, cond, then_branch, else_branch } => {
                    let label = self.branch(label);
                    let then_branch = self.block(then_branch);
                    let else_branch = self.block(else_branch);
                    Stmt::If { label, cond, then_branch, else_branch }
                }
            })
            .collect()
    }
}

fn assign_labels(raw: Vec<(Tid, Vec<RawStmt>)>, locs: &BTreeSet<String>) -> Result<Vec<Thread>, FrontendError> {
    let mut used: BTreeSet<String> = BTreeSet::new();
    for loc in locs {
        used.insert(init_label(loc));
        used.insert(final_label(loc));
    }
    let reserved = used.clone();
    let mut explicit = BTreeSet::new();
    for (_, body) in &raw {
        collect_explicit(body, &mut explicit)?;
    }
    if let Some(l) = explicit.intersection(&reserved).next() {
        return Err(FrontendError::DuplicateLabel(l.clone()));
    }
    used.extend(explicit);
    let mut labeler = Labeler { used, next_mem: 0, next_branch: 0 };
    Ok(raw.into_iter().map(|(tid, body)| Thread { tid, body: labeler.block(body) }).collect())
}

fn assigned_locals(stmts: &[Stmt], out: &mut BTreeSet<String>) {
    for s in stmts {
        match s {
            Stmt::Read { dest, .. } | Stmt::Rmw { dest, .. } | Stmt::Local { dest, .. } => {
                out.insert(dest.clone());
            }
            Stmt::If { then_branch, else_branch, .. } => {
                assigned_locals(then_branch, out);
                assigned_locals(else_branch, out);
            }
            _ => {}
        }
    }
}

fn check_local_ownership(threads: &[Thread]) -> Result<(), FrontendError> {
    let mut owner: BTreeMap<String, Tid> = BTreeMap::new();
    for t in threads {
        let mut mine = BTreeSet::new();
        assigned_locals(&t.body, &mut mine);
        for l in mine {
            if let Some(prev) = owner.insert(l.clone(), t.tid) {
                return Err(FrontendError::SharedLocal(l, prev, t.tid));
            }
        }
    }
    Ok(())
}
