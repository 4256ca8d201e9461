//! The substring-trace channel with minimum fragment length and overlap:
//! sampling traces under named policies, classifying candidate traces, and
//! exhaustively enumerating trace spectra at desk scale.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CodecError, Result};
use crate::seqcore::{Seq, Trace, TraceParams};

/// A located fragmentation of a strand: strictly increasing start locations
/// with per-fragment lengths. [`Trace`] is the forgetful image of a plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutPlan {
    pub starts: Vec<usize>,
    pub lengths: Vec<usize>,
    pub params: TraceParams,
}

impl CutPlan {
    /// Check the full set of plan invariants: first start 0, strictly
    /// increasing starts, lengths >= l_min, consecutive overlap >= l_over,
    /// every fragment in range, last fragment a suffix of the strand.
    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        let m = self.starts.len();
        if m == 0 || self.lengths.len() != m {
            return Err(CodecError::params("cut plan must have matching, non-empty starts/lengths"));
        }
        if self.starts[0] != 0 {
            return Err(CodecError::params("cut plan must start at location 0"));
        }
        for j in 0..m {
            if self.lengths[j] < p.l_min {
                return Err(CodecError::params(format!(
                    "fragment {j} length {} below l_min={}",
                    self.lengths[j], p.l_min
                )));
            }
            if self.starts[j] + self.lengths[j] > p.n {
                return Err(CodecError::params(format!("fragment {j} exceeds strand")));
            }
            if j + 1 < m {
                if self.starts[j + 1] <= self.starts[j] {
                    return Err(CodecError::params("starts must be strictly increasing"));
                }
                let end = self.starts[j] + self.lengths[j];
                if self.starts[j + 1] >= end
                    || end - self.starts[j + 1] < p.l_over
                {
                    return Err(CodecError::params(format!(
                        "fragments {j},{} overlap below l_over={}",
                        j + 1,
                        p.l_over
                    )));
                }
            }
        }
        if self.starts[m - 1] + self.lengths[m - 1] != p.n {
            return Err(CodecError::params("last fragment must be a suffix of the strand"));
        }
        Ok(())
    }

    /// Read the fragment values off a strand.
    pub fn apply(&self, x: &Seq) -> Result<Trace> {
        if x.len() != self.params.n {
            return Err(CodecError::params("strand length does not match plan params"));
        }
        let seqs: Vec<Seq> = self
            .starts
            .iter()
            .zip(&self.lengths)
            .map(|(&i, &len)| x.window(i, len))
            .collect::<Result<_>>()?;
        Trace::from_seqs(seqs)
    }
}

/// Named fragmentation policies for the test harness. The channel itself is
/// adversarial; these are reproducible choices, not a channel model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplePolicy {
    /// The canonical trace of fixed-step `l_min`-windows.
    Canonical,
    /// Sequential uniform draws of next start and length, conditioned on the
    /// remaining suffix staying coverable. Identical seeds reproduce
    /// identical plans.
    UniformRandom { seed: u64 },
    /// Greedy length-`l_min` fragments with exactly `l_over` overlap.
    MaxFragmentation,
    /// The whole strand as a single fragment.
    MinFragmentation,
}

impl SamplePolicy {
    pub fn name(&self) -> &'static str {
        match self {
            SamplePolicy::Canonical => "canonical",
            SamplePolicy::UniformRandom { .. } => "uniform_random",
            SamplePolicy::MaxFragmentation => "max_fragmentation",
            SamplePolicy::MinFragmentation => "min_fragmentation",
        }
    }
}

/// Sample a valid trace of `x` under a policy.
pub fn sample_trace(x: &Seq, p: &TraceParams, policy: SamplePolicy) -> Result<Trace> {
    let plan = sample_plan(x, p, policy)?;
    plan.apply(x)
}

/// Sample the located plan behind [`sample_trace`].
pub fn sample_plan(x: &Seq, p: &TraceParams, policy: SamplePolicy) -> Result<CutPlan> {
    if x.len() != p.n {
        return Err(CodecError::params(format!(
            "strand length {} does not match params n={}",
            x.len(),
            p.n
        )));
    }
    if p.l_min > p.n {
        return Err(CodecError::params(format!("l_min={} exceeds |x|={}", p.l_min, p.n)));
    }
    let plan = match policy {
        SamplePolicy::MinFragmentation => CutPlan {
            starts: vec![0],
            lengths: vec![p.n],
            params: *p,
        },
        SamplePolicy::Canonical | SamplePolicy::MaxFragmentation => {
            // both step by l_min - l_over with l_min-length fragments; the
            // tail is the l_min-suffix when the step does not divide n - l_min
            if p.l_min == p.n {
                CutPlan { starts: vec![0], lengths: vec![p.n], params: *p }
            } else {
                if p.l_over >= p.l_min {
                    return Err(CodecError::params(
                        "policy needs l_over < l_min when l_min < n",
                    ));
                }
                let step = p.l_min - p.l_over;
                let mut starts = Vec::new();
                let mut loc = 0usize;
                loop {
                    if loc + p.l_min >= p.n {
                        starts.push(p.n - p.l_min);
                        break;
                    }
                    starts.push(loc);
                    loc += step;
                }
                let lengths = vec![p.l_min; starts.len()];
                CutPlan { starts, lengths, params: *p }
            }
        }
        SamplePolicy::UniformRandom { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut starts = vec![0usize];
            let mut lengths = Vec::new();
            let mut start = 0usize;
            loop {
                // draw a length; all of [l_min, n - start] is admissible, but
                // lengths that neither finish the strand nor leave room to
                // chain (and stay coverable) are redrawn
                let len = loop {
                    let len = rng.gen_range(p.l_min..=p.n - start);
                    let end = start + len;
                    if end == p.n {
                        break len;
                    }
                    // can chain: next start exists in (start, end - l_over]
                    // and still allows a length-l_min fragment
                    if end >= p.l_over && end - p.l_over > start && start + 1 + p.l_min <= p.n {
                        break len;
                    }
                };
                lengths.push(len);
                let end = start + len;
                if end == p.n {
                    break;
                }
                let hi = (end - p.l_over).min(p.n - p.l_min);
                start = rng.gen_range(start + 1..=hi);
                starts.push(start);
            }
            CutPlan { starts, lengths, params: *p }
        }
    };
    plan.validate()?;
    Ok(plan)
}

/// The outcome of classifying a candidate trace against a strand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceClass {
    /// Some assignment of fragments to locations satisfies every constraint.
    Valid,
    /// A complete substring-trace assignment exists, but none meets the
    /// length/overlap constraints.
    CompleteButInvalid,
    /// A substring-trace assignment exists, but no complete one.
    TraceButIncomplete,
    /// The fragments cannot be placed at strictly increasing locations at all.
    NotATrace,
}

impl TraceClass {
    pub fn name(&self) -> &'static str {
        match self {
            TraceClass::Valid => "valid",
            TraceClass::CompleteButInvalid => "complete_but_invalid",
            TraceClass::TraceButIncomplete => "trace_but_incomplete",
            TraceClass::NotATrace => "not_a_trace",
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum SearchLevel {
    Any,
    Complete,
    Full,
}

struct Placement<'a> {
    p: &'a TraceParams,
    // distinct values with occurrence locations, fewest occurrences first
    occurrences: Vec<Vec<usize>>,
    lengths: Vec<usize>,
    counts: Vec<usize>,
    level: SearchLevel,
}

impl<'a> Placement<'a> {
    fn new(x: &Seq, t: &Trace, p: &'a TraceParams, level: SearchLevel) -> Option<Self> {
        let mut entries: Vec<(Vec<usize>, usize, usize)> = Vec::new();
        for (frag, count) in t.counted() {
            let occ = x.occurrences(frag.value().symbols());
            if occ.is_empty() {
                return None; // some fragment never occurs: no assignment at any level
            }
            entries.push((occ, frag.len(), *count));
        }
        entries.sort_by_key(|(occ, _, _)| occ.len());
        let mut occurrences = Vec::new();
        let mut lengths = Vec::new();
        let mut counts = Vec::new();
        for (occ, len, count) in entries {
            occurrences.push(occ);
            lengths.push(len);
            counts.push(count);
        }
        Some(Placement { p, occurrences, lengths, counts, level })
    }

    fn search(&mut self) -> bool {
        let total: usize = self.counts.iter().sum();
        if total == 0 {
            return false;
        }
        if self.level == SearchLevel::Full && self.lengths.iter().any(|&l| l < self.p.l_min) {
            return false;
        }
        self.place(total, None)
    }

    // prev = (start, end) of the previously placed fragment
    fn place(&mut self, remaining: usize, prev: Option<(usize, usize)>) -> bool {
        if remaining == 0 {
            return match (self.level, prev) {
                (SearchLevel::Any, _) => true,
                (_, Some((_, end))) => end == self.p.n,
                (_, None) => false,
            };
        }
        for v in 0..self.occurrences.len() {
            if self.counts[v] == 0 {
                continue;
            }
            let len = self.lengths[v];
            let locs = self.occurrences[v].clone();
            for loc in locs {
                let ok = match (self.level, prev) {
                    (SearchLevel::Any, None) => true,
                    (SearchLevel::Any, Some((ps, _))) => loc > ps,
                    (_, None) => loc == 0,
                    (SearchLevel::Complete, Some((ps, pe))) => loc > ps && loc < pe,
                    (SearchLevel::Full, Some((ps, pe))) => {
                        loc > ps && loc < pe && pe - loc >= self.p.l_over
                    }
                };
                if !ok {
                    continue;
                }
                self.counts[v] -= 1;
                if self.place(remaining - 1, Some((loc, loc + len))) {
                    self.counts[v] += 1;
                    return true;
                }
                self.counts[v] += 1;
            }
        }
        false
    }
}

/// Classify `t` against `x`: exhaustive backtracking over the occurrence
/// locations of each fragment, fewest occurrences first.
pub fn validate_trace(x: &Seq, t: &Trace, p: &TraceParams) -> TraceClass {
    if t.is_empty() {
        return TraceClass::NotATrace;
    }
    let exists = |level| {
        Placement::new(x, t, p, level)
            .map(|mut pl| pl.search())
            .unwrap_or(false)
    };
    if exists(SearchLevel::Full) {
        TraceClass::Valid
    } else if exists(SearchLevel::Complete) {
        TraceClass::CompleteButInvalid
    } else if exists(SearchLevel::Any) {
        TraceClass::TraceButIncomplete
    } else {
        TraceClass::NotATrace
    }
}

/// Exhaustively enumerate the trace spectrum of `x`: every distinct trace
/// multiset arising from an admissible cut plan. `cap` bounds both the
/// number of plans explored and the number of distinct traces collected.
pub fn enumerate_spectrum(x: &Seq, p: &TraceParams, cap: usize) -> Result<BTreeSet<Trace>> {
    if x.len() != p.n {
        return Err(CodecError::params(format!(
            "strand length {} does not match params n={}",
            x.len(),
            p.n
        )));
    }
    let mut out: BTreeSet<Trace> = BTreeSet::new();
    let mut frags: Vec<(usize, usize)> = Vec::new();
    let mut nodes = 0usize;
    enumerate_plans(x, p, cap, &mut nodes, &mut frags, &mut out)?;
    Ok(out)
}

fn enumerate_plans(
    x: &Seq,
    p: &TraceParams,
    cap: usize,
    nodes: &mut usize,
    frags: &mut Vec<(usize, usize)>,
    out: &mut BTreeSet<Trace>,
) -> Result<()> {
    *nodes += 1;
    if *nodes > cap {
        return Err(CodecError::Resource(format!(
            "spectrum enumeration exceeded cap of {cap} plan nodes"
        )));
    }
    match frags.last().copied() {
        None => {
            for len in p.l_min..=p.n {
                frags.push((0, len));
                enumerate_plans(x, p, cap, nodes, frags, out)?;
                frags.pop();
            }
        }
        Some((start, len)) => {
            let end = start + len;
            if end == p.n {
                let seqs: Vec<Seq> = frags
                    .iter()
                    .map(|&(i, l)| x.window(i, l))
                    .collect::<Result<_>>()?;
                out.insert(Trace::from_seqs(seqs)?);
                if out.len() > cap {
                    return Err(CodecError::Resource(format!(
                        "spectrum enumeration exceeded cap of {cap} distinct traces"
                    )));
                }
            }
            // continue the chain (also past a fragment that already reached
            // the end: later nested fragments must still end at n)
            if end >= p.l_over {
                let hi = (end - p.l_over).min(p.n.saturating_sub(p.l_min));
                for next in start + 1..=hi {
                    for next_len in p.l_min..=p.n - next {
                        frags.push((next, next_len));
                        enumerate_plans(x, p, cap, nodes, frags, out)?;
                        frags.pop();
                    }
                }
            }
        }
    }
    Ok(())
}
