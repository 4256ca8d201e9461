//! Sequences, fragments, trace multisets and the basic predicates of the
//! substring-trace channel.
//!
//! A strand is a finite string over an integer alphabet `[q]`. The channel
//! output is an unordered multiset of substrings ([`Trace`]); traces compare
//! equal independently of the order fragments were inserted.

use std::collections::HashSet;
use std::fmt;

use crate::error::{CodecError, Result};

/// Symbol type. Symbols are integers `0..q`; `0` and `1` play a special role
/// in markers and run-length constraints.
pub type Symbol = u32;

/// An integer alphabet of size `q >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Alphabet {
    q: u32,
}

impl Alphabet {
    pub fn new(q: u32) -> Result<Self> {
        if q < 2 {
            return Err(CodecError::params(format!("alphabet size q={q} must be >= 2")));
        }
        Ok(Alphabet { q })
    }

    pub fn size(&self) -> u32 {
        self.q
    }

    pub fn contains(&self, s: Symbol) -> bool {
        s < self.q
    }
}

/// A finite string over an [`Alphabet`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Seq {
    alphabet: Alphabet,
    symbols: Vec<Symbol>,
}

impl Seq {
    pub fn new(alphabet: Alphabet, symbols: Vec<Symbol>) -> Result<Self> {
        if let Some(&bad) = symbols.iter().find(|&&s| !alphabet.contains(s)) {
            return Err(CodecError::params(format!(
                "symbol {bad} out of range for alphabet of size {}",
                alphabet.size()
            )));
        }
        Ok(Seq { alphabet, symbols })
    }

    /// Binary convenience constructor used pervasively in tests.
    pub fn binary(bits: &str) -> Result<Self> {
        Seq::parse(bits, Alphabet::new(2)?)
    }

    /// Parse the text form: contiguous digits for `q <= 10`, comma-separated
    /// decimal integers otherwise.
    pub fn parse(text: &str, alphabet: Alphabet) -> Result<Self> {
        let text = text.trim();
        let symbols: Vec<Symbol> = if alphabet.size() <= 10 {
            text.chars()
                .map(|c| {
                    c.to_digit(10)
                        .ok_or_else(|| CodecError::params(format!("invalid digit '{c}'")))
                })
                .collect::<Result<_>>()?
        } else {
            if text.is_empty() {
                Vec::new()
            } else {
                text.split(',')
                    .map(|tok| {
                        tok.trim()
                            .parse::<Symbol>()
                            .map_err(|_| CodecError::params(format!("invalid symbol '{tok}'")))
                    })
                    .collect::<Result<_>>()?
            }
        };
        Seq::new(alphabet, symbols)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    /// The substring at `location` of length `len` (a window).
    pub fn window(&self, location: usize, len: usize) -> Result<Seq> {
        if location + len > self.len() {
            return Err(CodecError::params(format!(
                "window [{location}, {}) out of range for length {}",
                location + len,
                self.len()
            )));
        }
        Ok(Seq {
            alphabet: self.alphabet,
            symbols: self.symbols[location..location + len].to_vec(),
        })
    }

    pub fn concat(&self, other: &Seq) -> Result<Seq> {
        if self.alphabet != other.alphabet {
            return Err(CodecError::params("alphabet mismatch in concat"));
        }
        let mut symbols = self.symbols.clone();
        symbols.extend_from_slice(&other.symbols);
        Ok(Seq { alphabet: self.alphabet, symbols })
    }

    /// All start locations at which `needle` occurs as a substring.
    pub fn occurrences(&self, needle: &[Symbol]) -> Vec<usize> {
        if needle.is_empty() || needle.len() > self.len() {
            return Vec::new();
        }
        (0..=self.len() - needle.len())
            .filter(|&i| &self.symbols[i..i + needle.len()] == needle)
            .collect()
    }
}

impl fmt::Display for Seq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.alphabet.size() <= 10 {
            for s in &self.symbols {
                write!(f, "{s}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.symbols.iter().map(|s| s.to_string()).collect();
            write!(f, "{}", parts.join(","))
        }
    }
}

/// A fragment: the value of an observed substring. Locations exist only
/// inside generators and validators, never here.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fragment {
    value: Seq,
}

impl Fragment {
    pub fn new(value: Seq) -> Result<Self> {
        if value.is_empty() {
            return Err(CodecError::params("fragment must be non-empty"));
        }
        Ok(Fragment { value })
    }

    pub fn value(&self) -> &Seq {
        &self.value
    }

    pub fn len(&self) -> usize {
        self.value.len()
    }

    /// Always false: fragments are non-empty by construction.
    pub fn is_empty(&self) -> bool {
        false
    }
}

/// An unordered multiset of fragments, stored canonically: sorted
/// lexicographically by value with multiplicities. Equality and hashing are
/// therefore representation-independent.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Trace {
    fragments: Vec<(Fragment, usize)>,
}

impl Trace {
    pub fn from_fragments<I: IntoIterator<Item = Fragment>>(iter: I) -> Self {
        let mut values: Vec<Fragment> = iter.into_iter().collect();
        values.sort();
        let mut fragments: Vec<(Fragment, usize)> = Vec::new();
        for v in values {
            match fragments.last_mut() {
                Some((prev, count)) if *prev == v => *count += 1,
                _ => fragments.push((v, 1)),
            }
        }
        Trace { fragments }
    }

    pub fn from_seqs<I: IntoIterator<Item = Seq>>(iter: I) -> Result<Self> {
        let frags: Vec<Fragment> = iter
            .into_iter()
            .map(Fragment::new)
            .collect::<Result<_>>()?;
        Ok(Trace::from_fragments(frags))
    }

    /// Distinct fragment values with their multiplicities, in canonical order.
    pub fn counted(&self) -> &[(Fragment, usize)] {
        &self.fragments
    }

    /// Total number of fragments, counting multiplicity.
    pub fn fragment_count(&self) -> usize {
        self.fragments.iter().map(|(_, c)| c).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.fragments.is_empty()
    }

    /// Iterate fragments expanded by multiplicity (canonical order).
    pub fn iter_expanded(&self) -> impl Iterator<Item = &Fragment> {
        self.fragments
            .iter()
            .flat_map(|(f, c)| std::iter::repeat_n(f, *c))
    }
}

/// The channel contract: strand length, alphabet size, minimum fragment
/// length and minimum overlap of consecutive fragments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TraceParams {
    pub n: usize,
    pub q: u32,
    pub l_min: usize,
    pub l_over: usize,
}

impl TraceParams {
    pub fn new(n: usize, q: u32, l_min: usize, l_over: usize) -> Result<Self> {
        if q < 2 {
            return Err(CodecError::params(format!("q={q} must be >= 2")));
        }
        if !(1 <= l_over && l_over <= l_min && l_min <= n) {
            return Err(CodecError::params(format!(
                "need 1 <= l_over <= l_min <= n, got l_over={l_over}, l_min={l_min}, n={n}"
            )));
        }
        Ok(TraceParams { n, q, l_min, l_over })
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet { q: self.q }
    }
}

/// True iff every pair of equal-length windows of `x` at distinct locations
/// differs, for window length `len`.
pub fn is_repeat_free(x: &Seq, len: usize) -> Result<bool> {
    if len < 1 || len >= x.len() {
        return Err(CodecError::params(format!(
            "window length {len} out of range 1..{} for repeat-free check",
            x.len()
        )));
    }
    Ok(all_windows_distinct(x.symbols(), len))
}

/// Window-distinctness on a raw symbol slice; `len <= |x|` windows allowed.
pub(crate) fn all_windows_distinct(x: &[Symbol], len: usize) -> bool {
    if len == 0 || len > x.len() {
        return true;
    }
    let mut seen: HashSet<&[Symbol]> = HashSet::with_capacity(x.len() - len + 2);
    for i in 0..=x.len() - len {
        if !seen.insert(&x[i..i + len]) {
            return false;
        }
    }
    true
}

/// Length of the longest run of consecutive `0` symbols (0 if none).
pub fn max_zero_run(x: &Seq) -> usize {
    max_zero_run_slice(x.symbols())
}

pub(crate) fn max_zero_run_slice(x: &[Symbol]) -> usize {
    let mut best = 0;
    let mut run = 0;
    for &s in x {
        if s == 0 {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    best
}

/// The canonical trace: the `l_min`-prefix and subsequent `l_min`-windows
/// stepping by `l_min - l_over`. When the step does not divide `n - l_min`,
/// the final fragment is the `l_min`-suffix (it overlaps its predecessor by
/// more than `l_over`).
pub fn canonical_trace(x: &Seq, p: &TraceParams) -> Result<Trace> {
    if x.len() != p.n {
        return Err(CodecError::params(format!(
            "strand length {} does not match params n={}",
            x.len(),
            p.n
        )));
    }
    if p.l_min > p.n {
        return Err(CodecError::params(format!(
            "l_min={} exceeds strand length {}",
            p.l_min, p.n
        )));
    }
    if p.l_min == p.n {
        return Trace::from_seqs([x.clone()]);
    }
    if p.l_over >= p.l_min {
        return Err(CodecError::params(format!(
            "canonical trace needs l_over < l_min when l_min < n (l_over={}, l_min={})",
            p.l_over, p.l_min
        )));
    }
    let step = p.l_min - p.l_over;
    let mut seqs = Vec::new();
    let mut loc = 0usize;
    loop {
        if loc + p.l_min >= p.n {
            // final fragment: the l_min-suffix
            seqs.push(x.window(p.n - p.l_min, p.l_min)?);
            break;
        }
        seqs.push(x.window(loc, p.l_min)?);
        loc += step;
    }
    Trace::from_seqs(seqs)
}

/// Fragment count of [`canonical_trace`]: `ceil((n - l_min)/step) + 1`.
pub fn canonical_fragment_count(p: &TraceParams) -> usize {
    if p.l_min == p.n {
        return 1;
    }
    let step = p.l_min - p.l_over;
    (p.n - p.l_min).div_ceil(step) + 1
}

// ---------------------------------------------------------------------------
// Text round-trip helpers for the CLI file formats.
// ---------------------------------------------------------------------------

/// Render a trace in the text format: one fragment per line, terminated by a
/// blank line.
pub fn format_trace(t: &Trace) -> String {
    let mut out = String::new();
    for f in t.iter_expanded() {
        out.push_str(&f.value().to_string());
        out.push('\n');
    }
    out.push('\n');
    out
}

/// Parse a trace from text: one fragment per line until a blank line or the
/// end of input. Lines starting with '#' are ignored. Order-insensitive.
pub fn parse_trace(text: &str, alphabet: Alphabet) -> Result<Trace> {
    let mut seqs = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            if seqs.is_empty() {
                continue;
            }
            break;
        }
        seqs.push(Seq::parse(line, alphabet)?);
    }
    Trace::from_seqs(seqs)
}
