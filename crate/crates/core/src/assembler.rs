//! Reconstruction of repeat-free strands from a trace by suffix-prefix
//! matching.
//!
//! For a strand whose `l_over`-windows are all distinct, every fragment has
//! at most one predecessor (a fragment containing its `l_over`-prefix), so
//! left-to-right chain merging reconstructs the strand from any valid trace.
//! Inputs that are not repeat-free may produce [`AssemblyResult::Ambiguous`]
//! or [`AssemblyResult::Inconsistent`].

use crate::error::{CodecError, Result};
use crate::seqcore::{Seq, Symbol, Trace};

/// Outcome of an assembly attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AssemblyResult {
    /// Exactly one consistent reconstruction.
    Unique(Seq),
    /// Two conflicting merges both consume the trace; both witnesses returned.
    Ambiguous { first: Seq, second: Seq },
    /// No consistent chain covers every fragment.
    Inconsistent { reason: String },
}

/// True if `v` can precede `u` in a chain: some suffix of `v` of length
/// `>= l_over` is a prefix of `u`, and `u` extends past the end of `v`.
fn precedes(v: &[Symbol], u: &[Symbol], l_over: usize) -> bool {
    let max_d = v.len().min(u.len().saturating_sub(1));
    (l_over..=max_d).any(|d| v[v.len() - d..] == u[..d])
}

fn occurs_in(needle: &[Symbol], hay: &[Symbol]) -> bool {
    needle.len() <= hay.len()
        && (0..=hay.len() - needle.len()).any(|i| &hay[i..i + needle.len()] == needle)
}

/// All `d >= l_over` such that the `d`-suffix of `a` equals the `d`-prefix
/// of `u`, with `u` extending past `a`; descending. Each `d` is a placement
/// of `u` at position `|a| - d`; a repeat-free strand admits at most one.
fn extension_overlaps(a: &[Symbol], u: &[Symbol], l_over: usize) -> Vec<usize> {
    let max_d = a.len().min(u.len() - 1);
    (l_over..=max_d)
        .rev()
        .filter(|&d| a[a.len() - d..] == u[..d])
        .collect()
}

const SEARCH_BUDGET: usize = 20_000;

struct Search<'a> {
    values: Vec<&'a [Symbol]>,
    l_over: usize,
    completions: Vec<Vec<Symbol>>,
    budget: usize,
    exhausted: bool,
}

impl<'a> Search<'a> {
    /// Grow `assembled` until every multiplicity is consumed. Fragments with
    /// a single consistent placement are merged greedily (on a repeat-free
    /// strand every placement is where the fragment truly sits, so order is
    /// immaterial); a fragment with several placements forks the search.
    fn explore(&mut self, mut assembled: Vec<Symbol>, mut counts: Vec<usize>) {
        if self.completions.len() >= 2 {
            return;
        }
        if self.budget == 0 {
            self.exhausted = true;
            return;
        }
        self.budget -= 1;
        loop {
            // absorb fragments fully contained in assembled territory
            for (value, count) in self.values.iter().zip(counts.iter_mut()) {
                if *count > 0 && occurs_in(value, &assembled) {
                    *count = 0;
                }
            }
            if counts.iter().all(|&c| c == 0) {
                if !self.completions.contains(&assembled) {
                    self.completions.push(assembled);
                }
                return;
            }
            let mut singles: Vec<(usize, usize)> = Vec::new();
            let mut forked: Option<(usize, Vec<usize>)> = None;
            for (v, value) in self.values.iter().enumerate() {
                if counts[v] == 0 {
                    continue;
                }
                let ds = extension_overlaps(&assembled, value, self.l_over);
                match ds.as_slice() {
                    [] => {}
                    [d] => singles.push((v, *d)),
                    _ => {
                        if forked.is_none() {
                            forked = Some((v, ds));
                        }
                    }
                }
            }
            if let Some((v, ds)) = forked {
                for d in ds {
                    let mut next = assembled.clone();
                    next.extend_from_slice(&self.values[v][d..]);
                    let mut next_counts = counts.clone();
                    next_counts[v] -= 1;
                    self.explore(next, next_counts);
                }
                return;
            }
            // deepest overlap first: the earliest placement along the strand
            match singles.iter().max_by_key(|&&(v, d)| (d, std::cmp::Reverse(v))) {
                None => return, // dangling fragments: dead end
                Some(&(v, d)) => {
                    assembled.extend_from_slice(&self.values[v][d..]);
                    counts[v] -= 1;
                }
            }
        }
    }
}

/// Reconstruct a strand from `t` by chain merging with overlaps of length at
/// least `l_over`.
///
/// The fragment with no predecessor is the strand prefix; fragments nested in
/// already-assembled territory are absorbed. Worst case `O(n^2 * l_over)`.
pub fn assemble_rf(t: &Trace, l_over: usize) -> Result<AssemblyResult> {
    if t.is_empty() {
        return Err(CodecError::params("cannot assemble an empty trace"));
    }
    if l_over < 1 {
        return Err(CodecError::params("l_over must be >= 1"));
    }
    if let Some((f, _)) = t.counted().iter().find(|(f, _)| f.len() < l_over) {
        return Err(CodecError::params(format!(
            "fragment of length {} below l_over={}",
            f.len(),
            l_over
        )));
    }
    let alphabet = t.counted()[0].0.value().alphabet();

    let values: Vec<&[Symbol]> = t.counted().iter().map(|(f, _)| f.value().symbols()).collect();
    let counts: Vec<usize> = t.counted().iter().map(|(_, c)| *c).collect();

    // a head has no predecessor and is not nested inside another fragment
    let heads: Vec<usize> = (0..values.len())
        .filter(|&u| {
            !(0..values.len()).any(|v| {
                if v == u {
                    counts[u] >= 2
                } else {
                    precedes(values[v], values[u], l_over)
                        || occurs_in(values[u], values[v])
                }
            })
        })
        .collect();

    let starts: Vec<usize> = if heads.len() == 1 {
        heads
    } else {
        // zero or several candidate prefixes: try every distinct value and
        // compare the surviving complete chains
        (0..values.len()).collect()
    };

    let mut search = Search {
        values,
        l_over,
        completions: Vec::new(),
        budget: SEARCH_BUDGET,
        exhausted: false,
    };
    for head in starts {
        let mut head_counts = counts.clone();
        head_counts[head] -= 1;
        let assembled = search.values[head].to_vec();
        search.explore(assembled, head_counts);
    }

    let to_seq = |symbols: Vec<Symbol>| Seq::new(alphabet, symbols);
    let mut completions = search.completions;
    match completions.len() {
        0 => Ok(AssemblyResult::Inconsistent {
            reason: if search.exhausted {
                "assembly search budget exhausted".into()
            } else {
                "no consistent chain covers every fragment".into()
            },
        }),
        1 => Ok(AssemblyResult::Unique(to_seq(completions.pop().unwrap())?)),
        _ => {
            let second = completions.swap_remove(1);
            let first = completions.swap_remove(0);
            Ok(AssemblyResult::Ambiguous {
                first: to_seq(first)?,
                second: to_seq(second)?,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{enumerate_spectrum, sample_trace, validate_trace, SamplePolicy, TraceClass};
    use crate::seqcore::{canonical_trace, is_repeat_free, Alphabet, Seq, Trace, TraceParams};

    fn bin(s: &str) -> Seq {
        Seq::binary(s).unwrap()
    }

    fn trace(frags: &[&str]) -> Trace {
        Trace::from_seqs(frags.iter().map(|s| bin(s))).unwrap()
    }

    #[test]
    fn canonical_example_reassembles() {
        // x = 00010111 is repeat-free at window 3; its canonical (4,3)-trace
        let x = bin("00010111");
        assert!(is_repeat_free(&x, 3).unwrap());
        let t = trace(&["0001", "0010", "0101", "1011", "0111"]);
        assert_eq!(
            assemble_rf(&t, 3).unwrap(),
            AssemblyResult::Unique(x)
        );
    }

    #[test]
    fn single_fragment_is_identity() {
        let x = bin("0110");
        let t = trace(&["0110"]);
        assert_eq!(assemble_rf(&t, 2).unwrap(), AssemblyResult::Unique(x));
    }

    #[test]
    fn non_repeat_free_input_is_ambiguous() {
        // underlying 0110 is not repeat-free at window 1
        let t = trace(&["011", "110"]);
        match assemble_rf(&t, 1).unwrap() {
            AssemblyResult::Ambiguous { first, second } => {
                assert_ne!(first, second);
            }
            other => panic!("expected ambiguity, got {other:?}"),
        }
    }

    #[test]
    fn precondition_errors() {
        assert!(assemble_rf(&Trace::default(), 2).is_err());
        assert!(assemble_rf(&trace(&["01", "110"]), 3).is_err());
    }

    #[test]
    fn inconsistent_fragments_are_reported() {
        // fragments that cannot chain: no overlap-3 suffix/prefix match
        let t = trace(&["0001", "1110"]);
        match assemble_rf(&t, 3).unwrap() {
            AssemblyResult::Inconsistent { .. } => {}
            other => panic!("expected inconsistent, got {other:?}"),
        }
    }

    /// Exhaustive completeness on small binary repeat-free strands: every
    /// trace in the spectrum reassembles to exactly the strand.
    #[test]
    fn completeness_on_small_repeat_free_strands() {
        let alphabet = Alphabet::new(2).unwrap();
        for l_over in [2usize, 3] {
            for l_min in [l_over + 1, l_over + 2] {
                for n in l_min..=8 {
                    for bits in 0u32..(1u32 << n) {
                        let symbols: Vec<u32> = (0..n).map(|i| (bits >> i) & 1).collect();
                        let x = Seq::new(alphabet, symbols).unwrap();
                        if !is_repeat_free(&x, l_over).unwrap_or(false) {
                            continue;
                        }
                        let p = TraceParams::new(n, 2, l_min, l_over).unwrap();
                        let spectrum = enumerate_spectrum(&x, &p, 500_000).unwrap();
                        for t in spectrum {
                            assert_eq!(
                                assemble_rf(&t, l_over).unwrap(),
                                AssemblyResult::Unique(x.clone()),
                                "x={x} l_min={l_min} l_over={l_over}"
                            );
                        }
                    }
                }
            }
        }
    }

    /// Soundness: a unique reconstruction validates against the params the
    /// trace was sampled with.
    #[test]
    fn soundness_of_unique_results() {
        let x = bin("0000100110101111");
        let l_over = 4;
        assert!(is_repeat_free(&x, l_over).unwrap());
        let p = TraceParams::new(16, 2, 6, l_over).unwrap();
        let mut policies = vec![
            SamplePolicy::Canonical,
            SamplePolicy::MaxFragmentation,
            SamplePolicy::MinFragmentation,
        ];
        for seed in 0..30 {
            policies.push(SamplePolicy::UniformRandom { seed });
        }
        for pol in policies {
            let t = sample_trace(&x, &p, pol).unwrap();
            match assemble_rf(&t, l_over).unwrap() {
                AssemblyResult::Unique(y) => {
                    assert_eq!(y, x);
                    assert_eq!(validate_trace(&y, &t, &p), TraceClass::Valid);
                }
                other => panic!("policy {} gave {other:?}", pol.name()),
            }
        }
    }

    #[test]
    fn canonical_traces_reassemble() {
        for s in ["00010111", "0100110101110010", "11011000"] {
            let x = bin(s);
            for l_over in 3..=4usize {
                if !is_repeat_free(&x, l_over).unwrap() {
                    continue;
                }
                for l_min in l_over + 1..=l_over + 3 {
                    if l_min > x.len() {
                        continue;
                    }
                    let p = TraceParams::new(x.len(), 2, l_min, l_over).unwrap();
                    let t = canonical_trace(&x, &p).unwrap();
                    assert_eq!(
                        assemble_rf(&t, l_over).unwrap(),
                        AssemblyResult::Unique(x.clone())
                    );
                }
            }
        }
    }
}
