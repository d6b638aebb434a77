use std::sync::Arc;

use super::{ExecError, Execution};
use crate::pretrace::PreTrace;
use crate::relalg::Relation;

/// How coherence orders are generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MoMode {
    /// Every strict total order over all writes, across locations.
    #[default]
    Full,
    /// Init writes first in canonical order, then every order of the rest.
    /// Drops candidates; only sound for checks that reject any execution
    /// ordering a thread write before an init write.
    InitsFirst,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CandidateOptions {
    pub limit: usize,
    pub mo: MoMode,
}

impl Default for CandidateOptions {
    fn default() -> Self {
        CandidateOptions { limit: 1_000_000, mo: MoMode::Full }
    }
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

fn rf_options(p: &PreTrace) -> (Vec<usize>, Vec<Vec<usize>>) {
    let reads: Vec<usize> = p.reads().iter().collect();
    let options = reads.iter().map(|&r| p.same_loc_writes(r).iter().filter(|&w| w != r).collect()).collect();
    (reads, options)
}

/// Number of candidates: orders of the writes times the rf choices per read.
pub fn candidate_count(p: &PreTrace, mode: MoMode) -> u128 {
    let writes = p.writes();
    let free = match mode {
        MoMode::Full => writes.len(),
        MoMode::InitsFirst => writes.iter().filter(|&w| !p.event(w).is_init()).count(),
    };
    let (_, options) = rf_options(p);
    factorial(free) * options.iter().map(|o| o.len() as u128).product::<u128>()
}

/// Lazily enumerates candidates: coherence orders in lexicographic order of
/// write sequences, and for each, rf choices in lexicographic order.
pub struct CandidateIter {
    p: Arc<PreTrace>,
    fixed: Vec<usize>,
    perm: Vec<usize>,
    reads: Vec<usize>,
    options: Vec<Vec<usize>>,
    digits: Vec<usize>,
    mo: Relation,
    done: bool,
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

impl CandidateIter {
    fn mo_of(n: usize, fixed: &[usize], perm: &[usize]) -> Relation {
        let seq: Vec<usize> = fixed.iter().chain(perm).copied().collect();
        let mut mo = Relation::empty(n);
        for i in 0..seq.len() {
            for j in i + 1..seq.len() {
                mo.insert(seq[i], seq[j]);
            }
        }
        mo
    }
}

impl Iterator for CandidateIter {
    type Item = Execution;

    fn next(&mut self) -> Option<Execution> {
        if self.done {
            return None;
        }
        let n = self.p.len();
        let mut rf = Relation::empty(n);
        for (k, &r) in self.reads.iter().enumerate() {
            rf.insert(self.options[k][self.digits[k]], r);
        }
        let exec = Execution::new_unchecked(self.p.clone(), rf, self.mo.clone());
        // advance the rf odometer, last read fastest
        let mut k = self.digits.len();
        loop {
            if k == 0 {
                if next_permutation(&mut self.perm) {
                    self.mo = Self::mo_of(n, &self.fixed, &self.perm);
                    self.digits.iter_mut().for_each(|d| *d = 0);
                } else {
                    self.done = true;
                }
                break;
            }
            k -= 1;
            self.digits[k] += 1;
            if self.digits[k] < self.options[k].len() {
                break;
            }
            self.digits[k] = 0;
        }
        Some(exec)
    }
}

/// Streams the candidates of `p` after checking the count against the limit.
pub fn candidates(p: &Arc<PreTrace>, opts: CandidateOptions) -> Result<CandidateIter, ExecError> {
    let count = candidate_count(p, opts.mo);
    if count > opts.limit as u128 {
        return Err(ExecError::Explosion(count, opts.limit));
    }
    let (reads, options) = rf_options(p);
    let (fixed, perm): (Vec<usize>, Vec<usize>) = match opts.mo {
        MoMode::Full => (vec![], p.writes().iter().collect()),
        MoMode::InitsFirst => p.writes().iter().partition(|&w| p.event(w).is_init()),
    };
    let mo = CandidateIter::mo_of(p.len(), &fixed, &perm);
    let digits = vec![0; reads.len()];
    let done = options.iter().any(|o| o.is_empty());
    Ok(CandidateIter { p: p.clone(), fixed, perm, reads, options, digits, mo, done })
}

pub fn enumerate_candidates(p: &Arc<PreTrace>, opts: CandidateOptions) -> Result<Vec<Execution>, ExecError> {
    Ok(candidates(p, opts)?.collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_program;
    use crate::pretrace::{enumerate_pretraces, PretraceOptions};

    fn pretrace(src: &str) -> Arc<PreTrace> {
        let p = parse_program(src).unwrap();
        Arc::new(enumerate_pretraces(&p, PretraceOptions::default()).unwrap().remove(0))
    }

    #[test]
    fn permutations_are_exhaustive() {
        let mut v = vec![0, 1, 2, 3];
        let mut count = 1;
        while next_permutation(&mut v) {
            count += 1;
        }
        assert_eq!(count, 24);
        assert_eq!(v, [3, 2, 1, 0]);
    }

    #[test]
    fn store_buffering_has_96_candidates() {
        let p = pretrace("init { x = 0; y = 0; } thread 1 { x = 1; a = y; } thread 2 { y = 1; b = x; }");
        assert_eq!(candidate_count(&p, MoMode::Full), 96);
        let all = enumerate_candidates(&p, CandidateOptions::default()).unwrap();
        assert_eq!(all.len(), 96);
        assert!(all.iter().all(|e| e.is_well_formed() && e.mo_is_total()));
        for (i, a) in all.iter().enumerate() {
            assert!(all[i + 1..].iter().all(|b| b != a));
        }
        assert_eq!(candidate_count(&p, MoMode::InitsFirst), 8);
    }

    #[test]
    fn limit_is_enforced() {
        let p = pretrace("init { x = 0; y = 0; } thread 1 { x = 1; a = y; } thread 2 { y = 1; b = x; }");
        let err = candidates(&p, CandidateOptions { limit: 10, mo: MoMode::Full }).err().unwrap();
        assert_eq!(err, ExecError::Explosion(96, 10));
    }

    #[test]
    fn rmw_never_reads_itself() {
        let p = pretrace("init { x = 0; } thread 1 { rmw(a, x, 1); }");
        let all = enumerate_candidates(&p, CandidateOptions::default()).unwrap();
        assert_eq!(all.len(), 2);
        assert!(all.iter().all(|e| e.rf_source(1) == Some(0)));
    }
}
