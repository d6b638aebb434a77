use std::collections::BTreeMap;
use std::sync::Arc;

use super::{ExecError, Execution};
use crate::frontend::{parse_execution_source, Expectation, FrontendError, Program, Stmt};
use crate::pretrace::{enumerate_pretraces, PretraceOptions};
use crate::relalg::Relation;

/// An execution read from a file, with its declared verdicts.
#[derive(Clone, Debug)]
pub struct RawExecution {
    pub program: Program,
    pub execution: Execution,
    pub expect: BTreeMap<String, Expectation>,
}

#[derive(Debug, thiserror::Error)]
pub enum RawError {
    #[error(transparent)]
    Parse(#[from] FrontendError),
    #[error(transparent)]
    Exec(#[from] ExecError),
}

/// Parses a raw execution file: a branch-free program, then `rf` and `mo`
/// blocks of `A -> B` chains. `mo` is transitively closed; it need not be
/// total.
pub fn load_execution(src: &str) -> Result<RawExecution, RawError> {
    let (program, edges) = parse_execution_source(src)?;
    let branch_free = program.threads.iter().all(|t| t.body.iter().all(|s| !matches!(s, Stmt::If { .. })));
    if !branch_free {
        return Err(ExecError::Branching.into());
    }
    let pretrace = enumerate_pretraces(&program, PretraceOptions { filter: false, ..Default::default() })
        .map_err(ExecError::from)?
        .remove(0);
    let ix = |l: &str| pretrace.index_of(l).ok_or_else(|| ExecError::UnknownEvent(l.to_string()));
    let n = pretrace.len();
    let mut rf = Relation::empty(n);
    for (w, r) in &edges.rf {
        rf.insert(ix(w)?, ix(r)?);
    }
    let mut mo = Relation::empty(n);
    for (a, b) in &edges.mo {
        mo.insert(ix(a)?, ix(b)?);
    }
    let execution = Execution::new(Arc::new(pretrace), rf, mo.transitive_closure())?;
    let expect = program.expect.clone();
    Ok(RawExecution { program, execution, expect })
}
