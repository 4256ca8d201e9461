//! The index-marker trace code, end to end.
//!
//! A message is split into `q^I` parts. Each part is made repeat-free by the
//! constrained codec and cut into `blocks_per_index` blocks of exactly
//! `l_min` output symbols. A block carries a synchronization marker
//! (`1 0^f 1 1` for the first block of an index, `1 0^f 0 1` otherwise)
//! followed by payload pieces interleaved with the wrapped segments
//! `1 c^(k) 1` of the block's index. Every `l_min`-window of a codeword then
//! pins down the index it starts in, and every `l_over`-window carries at
//! least `rf_window` consecutive payload symbols, so any valid trace can be
//! partitioned by index and each part reassembled by repeat-free chaining.

use std::collections::HashMap;

use crate::assembler::{assemble_rf, AssemblyResult};
use crate::bounds;
use crate::constrained::{RfCodec, RfParams};
use crate::error::{CodecError, Result};
use crate::seqcore::{Alphabet, Seq, Symbol, Trace, TraceParams};

/// How the parameters were obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivationMode {
    Explicit,
    Asymptotic { a: f64, gamma: f64, eps: f64 },
}

/// All derived quantities of the construction, validated for feasibility.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionParams {
    pub q: u32,
    pub n: usize,
    pub l_min: usize,
    pub l_over: usize,
    /// segment length f: zero-run budget of the payload and marker run length
    pub seg_len: usize,
    /// index length I in symbols
    pub index_len: usize,
    /// number of index segments per block, `ceil(I/f)`
    pub num_segments: usize,
    /// per-block overhead `(f+3) + num_segments*(f+2)`
    pub r: usize,
    /// repeat-free window of the block payload codec
    pub rf_window: usize,
    /// `1 - I/l_min`
    pub lambda: f64,
    /// blocks per index, `n / (q^I * l_min)`
    pub blocks_per_index: usize,
    /// payload symbols per block, `l_min - r`
    pub block_payload: usize,
    /// payload symbols per index, `block_payload * blocks_per_index`
    pub n_block_out: usize,
    /// message symbols per index (capacity of the payload codec)
    pub msg_len: usize,
    pub mode: DerivationMode,
}

impl ConstructionParams {
    pub fn index_count(&self) -> u64 {
        (self.q as u64).pow(self.index_len as u32)
    }

    pub fn message_len(&self) -> usize {
        self.index_count() as usize * self.msg_len
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet::new(self.q).expect("validated")
    }

    pub fn trace_params(&self) -> TraceParams {
        TraceParams::new(self.n, self.q, self.l_min, self.l_over).expect("validated")
    }

    pub fn rf_params(&self) -> RfParams {
        RfParams {
            q: self.q,
            window: self.rf_window,
            run_limit: self.seg_len,
            n_out: self.n_block_out,
        }
    }

    pub fn to_key_values(&self) -> Vec<(String, String)> {
        let mut kv = vec![
            ("q".into(), self.q.to_string()),
            ("n".into(), self.n.to_string()),
            ("lmin".into(), self.l_min.to_string()),
            ("lover".into(), self.l_over.to_string()),
            ("f".into(), self.seg_len.to_string()),
            ("index_len".into(), self.index_len.to_string()),
            ("num_segments".into(), self.num_segments.to_string()),
            ("r".into(), self.r.to_string()),
            ("rf_window".into(), self.rf_window.to_string()),
            ("lambda".into(), format!("{:.6}", self.lambda)),
            ("blocks_per_index".into(), self.blocks_per_index.to_string()),
            ("block_payload".into(), self.block_payload.to_string()),
            ("n_block_out".into(), self.n_block_out.to_string()),
            ("msg_len".into(), self.msg_len.to_string()),
            ("message_len".into(), self.message_len().to_string()),
        ];
        if let DerivationMode::Asymptotic { a, gamma, eps } = self.mode {
            kv.push(("mode".into(), "asymptotic".into()));
            kv.push(("a".into(), format!("{a:.6}")));
            kv.push(("gamma".into(), format!("{gamma:.6}")));
            kv.push(("eps".into(), format!("{eps:.6}")));
        } else {
            kv.push(("mode".into(), "explicit".into()));
        }
        kv
    }
}

/// Explicit inputs: everything else is derived and checked.
#[derive(Debug, Clone, Copy)]
pub struct ExplicitInputs {
    pub q: u32,
    pub n: usize,
    pub l_min: usize,
    pub l_over: usize,
    pub seg_len: usize,
    pub index_len: usize,
}

/// Derive and validate construction parameters from explicit inputs. Errors
/// name the violated feasibility constraint.
pub fn derive_params(inputs: &ExplicitInputs) -> Result<ConstructionParams> {
    derive_with_mode(inputs, DerivationMode::Explicit)
}

fn derive_with_mode(
    inputs: &ExplicitInputs,
    mode: DerivationMode,
) -> Result<ConstructionParams> {
    let ExplicitInputs { q, n, l_min, l_over, seg_len: f, index_len } = *inputs;
    Alphabet::new(q)?;
    if !(1 <= l_over && l_over < l_min && l_min <= n) {
        return Err(CodecError::feasibility(format!(
            "trace params: need 1 <= l_over < l_min <= n, got l_over={l_over} l_min={l_min} n={n}"
        )));
    }
    if f < 1 || index_len < 1 {
        return Err(CodecError::feasibility("segment length and index length must be >= 1"));
    }
    let num_segments = index_len.div_ceil(f);
    if num_segments * f != index_len {
        return Err(CodecError::feasibility(format!(
            "index segmentation: f={f} must divide index_len={index_len} so blocks have length l_min"
        )));
    }
    let r = (f + 3) + num_segments * (f + 2);
    if l_min <= r {
        return Err(CodecError::feasibility(format!(
            "block overhead: r={r} must be below l_min={l_min}"
        )));
    }
    let block_payload = l_min - r;
    if block_payload < num_segments {
        return Err(CodecError::feasibility(format!(
            "block payload {block_payload} cannot feed {num_segments} pieces"
        )));
    }
    let index_count = (q as u128).checked_pow(index_len as u32).ok_or_else(|| {
        CodecError::feasibility(format!("index space q^{index_len} overflows"))
    })?;
    let denom = index_count.checked_mul(l_min as u128).ok_or_else(|| {
        CodecError::feasibility("q^index_len * l_min overflows".to_string())
    })?;
    if denom > n as u128 || !(n as u128).is_multiple_of(denom) {
        return Err(CodecError::feasibility(format!(
            "divisibility: q^index_len * l_min = {denom} must divide n = {n}"
        )));
    }
    let blocks_per_index = (n as u128 / denom) as usize;
    let n_block_out = block_payload * blocks_per_index;

    // rf_window = ceil((l_over - 2f - 5) / (1 + (f+2)/floor(block_payload/num_segments)))
    let numer = l_over as i64 - 2 * f as i64 - 5;
    if numer < 1 {
        return Err(CodecError::feasibility(format!(
            "rf window: l_over={l_over} leaves no payload after marker overhead 2f+5={}",
            2 * f + 5
        )));
    }
    let piece = block_payload / num_segments;
    let rf_window = (numer as usize * piece).div_ceil(piece + f + 2);
    if rf_window < 1 {
        return Err(CodecError::feasibility("rf window below 1"));
    }
    if rf_window >= n_block_out {
        return Err(CodecError::feasibility(format!(
            "rf window {rf_window} must be below the per-index payload {n_block_out}"
        )));
    }
    let ceiling = (q as u128)
        .saturating_pow(rf_window as u32)
        .saturating_add(rf_window as u128 - 1);
    if n_block_out as u128 > ceiling {
        return Err(CodecError::feasibility(format!(
            "RF capacity: n_block_out {n_block_out} > q^window + window - 1 = {ceiling}"
        )));
    }
    let rf = RfParams { q, window: rf_window, run_limit: f, n_out: n_block_out };
    let msg_len = RfCodec::new(rf)
        .map_err(|e| CodecError::feasibility(format!("payload codec: {e}")))?
        .capacity();
    if msg_len < 1 {
        return Err(CodecError::feasibility("payload codec capacity is zero"));
    }
    Ok(ConstructionParams {
        q,
        n,
        l_min,
        l_over,
        seg_len: f,
        index_len,
        num_segments,
        r,
        rf_window,
        lambda: 1.0 - index_len as f64 / l_min as f64,
        blocks_per_index,
        block_payload,
        n_block_out,
        msg_len,
        mode,
    })
}

/// Derive parameters from the asymptotic recipe: `l_min = ceil(a log_q n)`,
/// `l_over = ceil(gamma l_min)`, `f = ceil(sqrt(log_q n))`,
/// `I = ceil((1 - gamma a)/(1 - gamma) log_q n + (log_q n)^(0.5+eps))`.
/// The same feasibility checker applies; desk-scale n rarely passes.
pub fn derive_params_asymptotic(
    q: u32,
    n: usize,
    a: f64,
    gamma: f64,
    eps: f64,
) -> Result<ConstructionParams> {
    Alphabet::new(q)?;
    if a <= 1.0 {
        return Err(CodecError::feasibility(format!("a={a} must exceed 1")));
    }
    if gamma <= 0.0 || gamma * a > 1.0 + 1e-12 {
        return Err(CodecError::feasibility(format!(
            "gamma={gamma} outside (0, 1/a] with a={a}"
        )));
    }
    if eps <= 0.0 || eps >= 0.5 {
        return Err(CodecError::feasibility(format!("eps={eps} must lie in (0, 0.5)")));
    }
    let log_n = (n as f64).ln() / (q as f64).ln();
    if log_n < 1.0 {
        return Err(CodecError::feasibility("n too small"));
    }
    let l_min = (a * log_n).ceil() as usize;
    let l_over = (gamma * l_min as f64).ceil() as usize;
    let f = log_n.sqrt().ceil() as usize;
    let index_len =
        (((1.0 - gamma * a) / (1.0 - gamma)) * log_n + log_n.powf(0.5 + eps)).ceil() as usize;
    derive_with_mode(
        &ExplicitInputs { q, n, l_min, l_over, seg_len: f, index_len },
        DerivationMode::Asymptotic { a, gamma, eps },
    )
}

// ---------------------------------------------------------------------------
// Index encoding and block layout
// ---------------------------------------------------------------------------

/// Synchronization marker kinds: `1 0^f 1 1` opens the first block of an
/// index, `1 0^f 0 1` every later block. Both have length f + 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkerKind {
    BlockHead,
    BlockBody,
}

impl MarkerKind {
    pub fn pattern(&self, seg_len: usize) -> Vec<Symbol> {
        let mut m = Vec::with_capacity(seg_len + 3);
        m.push(1);
        m.extend(std::iter::repeat_n(0, seg_len));
        m.push(match self {
            MarkerKind::BlockHead => 1,
            MarkerKind::BlockBody => 0,
        });
        m.push(1);
        m
    }

    pub fn len(seg_len: usize) -> usize {
        seg_len + 3
    }
}

/// An index wrapped for injection: segment k is `1 c^(k) 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedIndex {
    pub index: u64,
    pub segments: Vec<Seq>,
}

/// Split the width-`index_len` base-q digits of `i` into `ceil(I/f)`
/// segments; the last segment has length `I - (ceil(I/f)-1)*f` in `1..=f`.
fn split_index(i: u64, index_len: usize, seg_len: usize, q: u32) -> Vec<Vec<Symbol>> {
    let mut digits = vec![0 as Symbol; index_len];
    let mut v = i;
    for slot in digits.iter_mut().rev() {
        *slot = (v % q as u64) as Symbol;
        v /= q as u64;
    }
    let segments = index_len.div_ceil(seg_len);
    (0..segments)
        .map(|k| {
            let lo = k * seg_len;
            let hi = if k + 1 == segments { index_len } else { lo + seg_len };
            digits[lo..hi].to_vec()
        })
        .collect()
}

/// Wrap the index segments of `i` in guard ones.
pub fn encode_index(i: u64, p: &ConstructionParams) -> Result<EncodedIndex> {
    if i >= p.index_count() {
        return Err(CodecError::params(format!(
            "index {i} out of range for q^I = {}",
            p.index_count()
        )));
    }
    let alphabet = p.alphabet();
    let segments = split_index(i, p.index_len, p.seg_len, p.q)
        .into_iter()
        .map(|seg| {
            let mut s = Vec::with_capacity(seg.len() + 2);
            s.push(1);
            s.extend(seg);
            s.push(1);
            Seq::new(alphabet, s)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EncodedIndex { index: i, segments })
}

/// What one offset inside a block holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    MarkerLead,
    MarkerZero,
    /// distinguishes head (1) from body (0) markers
    MarkerJBit,
    MarkerClose,
    /// payload symbol; `y_off` is its offset within the block payload
    Payload { y_off: usize },
    WrapOpen,
    /// digit `digit` (global position within the index) of the block's index
    IndexDigit { digit: usize },
    WrapClose,
}

/// Per-offset roles of one block; identical for every block of a codeword.
fn block_roles(p: &ConstructionParams) -> Vec<Role> {
    let f = p.seg_len;
    let mut roles = Vec::with_capacity(p.l_min);
    roles.push(Role::MarkerLead);
    roles.extend(std::iter::repeat_n(Role::MarkerZero, f));
    roles.push(Role::MarkerJBit);
    roles.push(Role::MarkerClose);
    let lens = piece_lengths(p);
    let mut y_off = 0usize;
    for (k, &len) in lens.iter().enumerate() {
        for _ in 0..len {
            roles.push(Role::Payload { y_off });
            y_off += 1;
        }
        roles.push(Role::WrapOpen);
        for d in 0..f {
            roles.push(Role::IndexDigit { digit: k * f + d });
        }
        roles.push(Role::WrapClose);
    }
    debug_assert_eq!(roles.len(), p.l_min);
    roles
}

/// Payload piece lengths per segment: equal up to +-1, longer pieces first.
fn piece_lengths(p: &ConstructionParams) -> Vec<usize> {
    let base = p.block_payload / p.num_segments;
    let rem = p.block_payload % p.num_segments;
    (0..p.num_segments)
        .map(|k| if k < rem { base + 1 } else { base })
        .collect()
}

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

/// Encode a message of length `q^I * msg_len` into a codeword of length `n`.
pub fn encode(x: &Seq, p: &ConstructionParams) -> Result<Seq> {
    Encoder::new(p)?.encode(x)
}

/// Reusable encoder holding the payload codec (the census is built once).
pub struct Encoder<'a> {
    p: &'a ConstructionParams,
    codec: RfCodec,
}

impl<'a> Encoder<'a> {
    pub fn new(p: &'a ConstructionParams) -> Result<Self> {
        Ok(Encoder { p, codec: RfCodec::new(p.rf_params())? })
    }

    pub fn encode(&self, x: &Seq) -> Result<Seq> {
        encode_with(self.p, &self.codec, x)
    }
}

fn encode_with(p: &ConstructionParams, codec: &RfCodec, x: &Seq) -> Result<Seq> {
    if x.alphabet().size() != p.q {
        return Err(CodecError::params("message alphabet does not match params"));
    }
    if x.len() != p.message_len() {
        return Err(CodecError::params(format!(
            "message length {} != q^I * msg_len = {}",
            x.len(),
            p.message_len()
        )));
    }
    let mut out: Vec<Symbol> = Vec::with_capacity(p.n);
    for i in 0..p.index_count() {
        let part = x.window(i as usize * p.msg_len, p.msg_len)?;
        let payload = codec.encode(&part)?;
        let wrapped = encode_index(i, p)?;
        let lens = piece_lengths(p);
        for j in 0..p.blocks_per_index {
            let kind = if j == 0 { MarkerKind::BlockHead } else { MarkerKind::BlockBody };
            out.extend(kind.pattern(p.seg_len));
            let mut off = j * p.block_payload;
            for (k, &len) in lens.iter().enumerate() {
                out.extend_from_slice(&payload.symbols()[off..off + len]);
                off += len;
                out.extend_from_slice(wrapped.segments[k].symbols());
            }
        }
    }
    if out.len() != p.n {
        return Err(CodecError::feasibility(format!(
            "encoded length {} != n = {}",
            out.len(),
            p.n
        )));
    }
    Seq::new(p.alphabet(), out)
}

// ---------------------------------------------------------------------------
// Fragment analysis
// ---------------------------------------------------------------------------

/// A payload piece recovered from one fragment: a contiguous substring of the
/// per-index payload, located when the fragment could be pinned absolutely.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Piece {
    index: u64,
    offset: Option<usize>,
    symbols: Vec<Symbol>,
}

/// The semantic content extracted from a fragment under one alignment.
#[derive(Debug, Clone, PartialEq, Eq)]
struct FragmentView {
    start_index: u64,
    pinned_abs: Option<usize>,
    pieces: Vec<Piece>,
}

struct Analyzer<'a> {
    p: &'a ConstructionParams,
    roles: &'a [Role],
}

impl<'a> Analyzer<'a> {
    /// Try every block alignment of the fragment and return the semantic
    /// views that survive the layout and index consistency checks. An
    /// all-zero index segment followed by a payload symbol 1 can mimic a
    /// marker, so more than one view may survive on short fragments.
    fn analyze(&self, u: &[Symbol]) -> Result<Vec<FragmentView>> {
        if u.len() < self.p.l_min {
            return Err(CodecError::decode(
                format!("fragment length {} below l_min {}", u.len(), self.p.l_min),
                None,
            ));
        }
        let mut views: Vec<FragmentView> = Vec::new();
        for phase in 0..self.p.l_min {
            if let Some(view) = self.try_alignment(u, phase) {
                if !views.contains(&view) {
                    views.push(view);
                }
            }
        }
        if views.is_empty() {
            return Err(CodecError::decode("no consistent marker alignment", None));
        }
        Ok(views)
    }

    fn try_alignment(&self, u: &[Symbol], phase: usize) -> Option<FragmentView> {
        let p = self.p;
        let l = p.l_min;
        let slot_count = (phase + u.len()).div_ceil(l);
        let mut jbits: Vec<Option<bool>> = vec![None; slot_count];
        let mut digits: Vec<HashMap<usize, Symbol>> = vec![HashMap::new(); slot_count];
        // payload symbols as (slot, block payload offset, symbol) in order
        let mut payload: Vec<(usize, usize, Symbol)> = Vec::with_capacity(u.len());
        for (pos, &sym) in u.iter().enumerate() {
            let off = (phase + pos) % l;
            let slot = (phase + pos) / l;
            match self.roles[off] {
                Role::MarkerLead | Role::MarkerClose | Role::WrapOpen | Role::WrapClose => {
                    if sym != 1 {
                        return None;
                    }
                }
                Role::MarkerZero => {
                    if sym != 0 {
                        return None;
                    }
                }
                Role::MarkerJBit => match sym {
                    0 => jbits[slot] = Some(false),
                    1 => jbits[slot] = Some(true),
                    _ => return None,
                },
                Role::IndexDigit { digit } => {
                    if let Some(&prev) = digits[slot].get(&digit) {
                        if prev != sym {
                            return None;
                        }
                    }
                    digits[slot].insert(digit, sym);
                }
                Role::Payload { y_off } => payload.push((slot, y_off, sym)),
            }
        }

        // index increments: slot s starts a new index iff its marker is a
        // head; every slot carrying digits or payload has a visible jbit
        let mut h = vec![0usize; slot_count];
        let mut known = vec![true; slot_count];
        for s in 1..slot_count {
            match jbits[s] {
                Some(head) => {
                    h[s] = h[s - 1] + head as usize;
                    known[s] = known[s - 1];
                }
                None => {
                    h[s] = h[s - 1];
                    known[s] = false;
                }
            }
        }
        for s in 0..slot_count {
            if !known[s] && (!digits[s].is_empty() || payload.iter().any(|&(ps, _, _)| ps == s)) {
                return None; // content in a slot whose index relation is unknown
            }
        }

        // merge digit observations per increment group
        let mut groups: Vec<(usize, HashMap<usize, Symbol>)> = Vec::new();
        for s in 0..slot_count {
            if digits[s].is_empty() {
                continue;
            }
            match groups.iter_mut().find(|(g, _)| *g == h[s]) {
                Some((_, map)) => {
                    for (&d, &v) in &digits[s] {
                        if let Some(&prev) = map.get(&d) {
                            if prev != v {
                                return None;
                            }
                        }
                        map.insert(d, v);
                    }
                }
                None => groups.push((h[s], digits[s].clone())),
            }
        }
        groups.sort_by_key(|(g, _)| *g);
        let base = self.solve_base_index(&groups)?;

        // verify the solution against every observation
        let max_h = h
            .iter()
            .enumerate()
            .filter(|&(s, _)| known[s])
            .map(|(_, &v)| v)
            .max()
            .unwrap_or(0);
        if base + max_h as u64 >= p.index_count() {
            return None;
        }
        for (g, map) in &groups {
            let value = base + *g as u64;
            let digits_of = index_digits(value, p.index_len, p.q);
            for (&d, &v) in map {
                if digits_of[d] != v {
                    return None;
                }
            }
        }

        // block-in-index offset: heads occur exactly at blocks 0 mod B
        let b = p.blocks_per_index;
        let candidates: Vec<usize> = (0..b)
            .filter(|&j0| {
                (0..slot_count).all(|s| match jbits[s] {
                    Some(head) => ((j0 + s) % b == 0) == head,
                    None => true,
                })
            })
            .collect();
        if candidates.is_empty() {
            return None;
        }
        let pinned = if candidates.len() == 1 {
            let j0 = candidates[0];
            let abs_block = base as usize * b + j0;
            let start = abs_block * p.l_min + phase;
            if start + u.len() > p.n {
                return None;
            }
            Some((j0, start))
        } else {
            None
        };

        // payload pieces per index: consecutive slots of one group give one
        // contiguous substring of that index's payload
        let mut pieces: Vec<Piece> = Vec::new();
        for &(slot, y_off, sym) in &payload {
            let index = base + h[slot] as u64;
            let offset = pinned.map(|(j0, _)| ((j0 + slot) % b) * p.block_payload + y_off);
            match pieces.last_mut() {
                Some(last) if last.index == index && extends(last, offset) => {
                    last.symbols.push(sym);
                }
                _ => pieces.push(Piece {
                    index,
                    offset,
                    symbols: vec![sym],
                }),
            }
        }
        // payload substrings obey the payload codec's contracts: zero-runs
        // below f and window-distinctness; marker mimics fail here because
        // their implied payload swallows a real marker's zero-run
        for piece in &pieces {
            if crate::seqcore::max_zero_run_slice(&piece.symbols) >= p.seg_len {
                return None;
            }
            if piece.symbols.len() > p.rf_window
                && !crate::seqcore::all_windows_distinct(&piece.symbols, p.rf_window)
            {
                return None;
            }
        }
        Some(FragmentView {
            start_index: base,
            pinned_abs: pinned.map(|(_, start)| start),
            pieces,
        })
    }

    /// Solve the base index from merged digit groups: either some group saw
    /// all digits, or two adjacent groups saw a suffix and the matching
    /// prefix (adjacent indices share the prefix unless the suffix is the
    /// greatest element, which borrows one from the prefix).
    fn solve_base_index(&self, groups: &[(usize, HashMap<usize, Symbol>)]) -> Option<u64> {
        let p = self.p;
        let q = p.q as u64;
        let width = p.index_len;
        for (g, map) in groups {
            if map.len() == width {
                let mut value = 0u64;
                for d in 0..width {
                    value = value * q + *map.get(&d)? as u64;
                }
                return value.checked_sub(*g as u64);
            }
        }
        if groups.len() == 2 && groups[1].0 == groups[0].0 + 1 {
            let (g_low, suffix) = &groups[0];
            let (_, prefix) = &groups[1];
            let mu = (0..width).find(|d| suffix.contains_key(d))?;
            // the suffix group must cover mu..width contiguously
            if (mu..width).any(|d| !suffix.contains_key(&d)) {
                return None;
            }
            if (0..mu).any(|d| !prefix.contains_key(&d)) {
                return None;
            }
            let suffix_digits: Vec<Symbol> = (mu..width).map(|d| suffix[&d]).collect();
            let all_max = suffix_digits.iter().all(|&d| d == p.q - 1);
            let mut prefix_val = 0u64;
            for d in 0..mu {
                prefix_val = prefix_val * q + prefix[&d] as u64;
            }
            let base_prefix = if all_max { prefix_val.checked_sub(1)? } else { prefix_val };
            let mut value = base_prefix;
            for &d in &suffix_digits {
                value = value * q + d as u64;
            }
            return value.checked_sub(*g_low as u64);
        }
        // underdetermined: feasible only for small index spaces
        if p.index_count() <= (1 << 16) {
            let mut found = None;
            'outer: for cand in 0..p.index_count() {
                for (g, map) in groups {
                    let value = cand + *g as u64;
                    if value >= p.index_count() {
                        continue 'outer;
                    }
                    let digits_of = index_digits(value, width, p.q);
                    for (&d, &v) in map {
                        if digits_of[d] != v {
                            continue 'outer;
                        }
                    }
                }
                if found.is_some() {
                    return None; // more than one base index fits
                }
                found = Some(cand);
            }
            return found;
        }
        None
    }
}

fn extends(last: &Piece, offset: Option<usize>) -> bool {
    match (last.offset, offset) {
        (Some(o), Some(next)) => o + last.symbols.len() == next,
        (None, None) => true,
        _ => false,
    }
}

fn index_digits(value: u64, width: usize, q: u32) -> Vec<Symbol> {
    let mut digits = vec![0 as Symbol; width];
    let mut v = value;
    for slot in digits.iter_mut().rev() {
        *slot = (v % q as u64) as Symbol;
        v /= q as u64;
    }
    digits
}

// ---------------------------------------------------------------------------
// Decoding
// ---------------------------------------------------------------------------

/// Decode any valid trace of a codeword back to its message.
pub fn decode(t: &Trace, p: &ConstructionParams) -> Result<Seq> {
    Decoder::new(p)?.decode(t)
}

/// Reusable decoder (payload codec built once).
pub struct Decoder<'a> {
    p: &'a ConstructionParams,
    codec: RfCodec,
    roles: Vec<Role>,
}

impl<'a> Decoder<'a> {
    pub fn new(p: &'a ConstructionParams) -> Result<Self> {
        Ok(Decoder { p, codec: RfCodec::new(p.rf_params())?, roles: block_roles(p) })
    }

    pub fn decode(&self, t: &Trace) -> Result<Seq> {
        let p = self.p;
        if t.is_empty() {
            return Err(CodecError::decode("empty trace", None));
        }
        let analyzer = Analyzer { p, roles: &self.roles };
        // pieces per index, with trace multiplicities; fragments whose
        // alignment stays ambiguous are deferred and checked against the
        // reconstruction at the end instead of being guessed
        let mut by_index: Vec<Vec<(Piece, usize)>> =
            vec![Vec::new(); p.index_count() as usize];
        let mut deferred: Vec<&Seq> = Vec::new();
        for (frag, count) in t.counted() {
            if frag.value().alphabet().size() != p.q {
                return Err(CodecError::params("fragment alphabet does not match params"));
            }
            let mut views = analyzer.analyze(frag.value().symbols())?;
            if views.len() > 1 {
                deferred.push(frag.value());
                continue;
            }
            for piece in views.pop().unwrap().pieces {
                by_index[piece.index as usize].push((piece, *count));
            }
        }
        let mut message: Vec<Symbol> = Vec::with_capacity(p.message_len());
        for (index, pieces) in by_index.iter().enumerate() {
            let payload = self.assemble_index_payload(index as u64, pieces).map_err(|e| {
                if deferred.is_empty() {
                    e
                } else {
                    CodecError::Ambiguous(format!(
                        "{} fragment(s) with ambiguous alignment left index {index} unresolved: {e}",
                        deferred.len()
                    ))
                }
            })?;
            let part = self.codec.decode(&Seq::new(p.alphabet(), payload)?)?;
            message.extend_from_slice(part.symbols());
        }
        let message = Seq::new(p.alphabet(), message)?;
        // the reconstruction must reproduce every fragment, deferred or not
        let codeword = encode_with(p, &self.codec, &message)?;
        for (frag, _) in t.counted() {
            if !occurs(frag.value().symbols(), codeword.symbols()) {
                let msg = "fragment not contained in the reconstructed codeword";
                return Err(if deferred.contains(&frag.value()) {
                    CodecError::Ambiguous(format!("{msg} (ambiguous alignment)"))
                } else {
                    CodecError::decode(msg, None)
                });
            }
        }
        Ok(message)
    }

    /// Merge located pieces and chain unlocated ones into the full per-index
    /// payload of length `n_block_out`.
    fn assemble_index_payload(
        &self,
        index: u64,
        pieces: &[(Piece, usize)],
    ) -> Result<Vec<Symbol>> {
        let p = self.p;
        let n = p.n_block_out;
        if pieces.is_empty() {
            return Err(CodecError::decode(
                format!("no payload coverage for index {index}"),
                None,
            ));
        }
        let mut buf: Vec<Option<Symbol>> = vec![None; n];
        for (piece, _) in pieces.iter().filter(|(pc, _)| pc.offset.is_some()) {
            let off = piece.offset.unwrap();
            if off + piece.symbols.len() > n {
                return Err(CodecError::decode(
                    format!("located piece overruns payload of index {index}"),
                    None,
                ));
            }
            for (k, &sym) in piece.symbols.iter().enumerate() {
                match buf[off + k] {
                    Some(prev) if prev != sym => {
                        return Err(CodecError::decode(
                            format!("located pieces conflict at index {index} offset {}", off + k),
                            None,
                        ))
                    }
                    _ => buf[off + k] = Some(sym),
                }
            }
        }
        let located_complete = buf.iter().all(|s| s.is_some());
        let payload: Vec<Symbol> = if located_complete {
            buf.into_iter().map(|s| s.unwrap()).collect()
        } else {
            // chain all pieces long enough to carry a full window
            let alphabet = p.alphabet();
            let mut seqs: Vec<Seq> = Vec::new();
            for (piece, count) in pieces {
                if piece.symbols.len() >= p.rf_window {
                    let s = Seq::new(alphabet, piece.symbols.clone())?;
                    for _ in 0..*count {
                        seqs.push(s.clone());
                    }
                }
            }
            if seqs.is_empty() {
                return Err(CodecError::decode(
                    format!("index {index} has only sub-window pieces"),
                    None,
                ));
            }
            let trace = Trace::from_seqs(seqs)?;
            match assemble_rf(&trace, p.rf_window)? {
                AssemblyResult::Unique(y) => y.symbols().to_vec(),
                AssemblyResult::Ambiguous { .. } => {
                    return Err(CodecError::Ambiguous(format!(
                        "payload chaining for index {index} is ambiguous"
                    )))
                }
                AssemblyResult::Inconsistent { reason } => {
                    return Err(CodecError::decode(
                        format!("payload chaining for index {index} failed: {reason}"),
                        None,
                    ))
                }
            }
        };
        if payload.len() != n {
            return Err(CodecError::decode(
                format!(
                    "assembled payload length {} != {} for index {index}",
                    payload.len(),
                    n
                ),
                None,
            ));
        }
        // every piece, located or not, must appear in the assembled payload
        for (piece, _) in pieces {
            match piece.offset {
                Some(off) => {
                    if payload[off..off + piece.symbols.len()] != piece.symbols[..] {
                        return Err(CodecError::decode(
                            format!("located piece disagrees with assembly at index {index}"),
                            None,
                        ));
                    }
                }
                None => {
                    if !occurs(&piece.symbols, &payload) {
                        return Err(CodecError::decode(
                            format!("piece not contained in assembled payload of index {index}"),
                            None,
                        ));
                    }
                }
            }
        }
        Ok(payload)
    }
}

fn occurs(needle: &[Symbol], hay: &[Symbol]) -> bool {
    needle.len() <= hay.len()
        && (0..=hay.len() - needle.len()).any(|i| &hay[i..i + needle.len()] == needle)
}

// ---------------------------------------------------------------------------
// Reports and structural verification
// ---------------------------------------------------------------------------

/// Redundancy and rate of an accepted parameter set, with the matching upper
/// bounds for side-by-side display.
#[derive(Debug, Clone, PartialEq)]
pub struct RedundancyReport {
    pub measured: usize,
    pub rate: f64,
    /// leading-term estimate; None when the implied (a, gamma) fall outside
    /// the estimate's hypothesis
    pub thm_estimate: Option<f64>,
    pub eq2_log_size_upper: f64,
    pub asymptotic_rate_upper: Option<f64>,
    pub rf_redundancy_per_index: usize,
}

pub fn redundancy_report(p: &ConstructionParams) -> Result<RedundancyReport> {
    let message = p.message_len();
    let measured = p.n - message;
    let rate = message as f64 / p.n as f64;
    let (a, gamma, eps) = match p.mode {
        DerivationMode::Asymptotic { a, gamma, eps } => (a, gamma, eps),
        DerivationMode::Explicit => {
            let log_n = (p.n as f64).ln() / (p.q as f64).ln();
            (p.l_min as f64 / log_n, p.l_over as f64 / p.l_min as f64, 0.25)
        }
    };
    let thm_estimate = bounds::construction_redundancy_bound(p.n, p.q, a, gamma, eps).ok();
    let eq2_log_size_upper = bounds::code_size_log_upper_bound(&p.trace_params())?;
    let asymptotic_rate_upper = bounds::asymptotic_rate_upper_bound(a, gamma).ok();
    Ok(RedundancyReport {
        measured,
        rate,
        thm_estimate,
        eq2_log_size_upper,
        asymptotic_rate_upper,
        rf_redundancy_per_index: p.n_block_out - p.msg_len,
    })
}

/// Result of an exhaustive window scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowScanReport {
    pub windows: usize,
    /// windows where a marker mimic leaves more than one consistent parse
    /// (the true parse is always among them)
    pub ambiguous: usize,
}

/// Check that every `l_min`-window of `z` yields a consistent index decode
/// matching the window's true location. Mimic parses that survive filtering
/// are counted, never allowed to displace the true one.
pub fn verify_window_index_recovery(z: &Seq, p: &ConstructionParams) -> Result<WindowScanReport> {
    if z.len() != p.n {
        return Err(CodecError::params("codeword length mismatch"));
    }
    let roles = block_roles(p);
    let analyzer = Analyzer { p, roles: &roles };
    let block_span = p.blocks_per_index * p.l_min;
    let mut report = WindowScanReport { windows: 0, ambiguous: 0 };
    for start in 0..=p.n - p.l_min {
        let window = &z.symbols()[start..start + p.l_min];
        let views = analyzer.analyze(window).map_err(|e| {
            CodecError::decode(format!("window at {start}: {e}"), Some(start))
        })?;
        let expected = (start / block_span) as u64;
        let truth = views.iter().find(|v| {
            v.start_index == expected
                && v.pinned_abs.map(|abs| abs == start).unwrap_or(true)
        });
        if truth.is_none() {
            return Err(CodecError::decode(
                format!("window at {start} has no parse recovering index {expected}"),
                Some(start),
            ));
        }
        if views.len() > 1 {
            report.ambiguous += 1;
        }
        report.windows += 1;
    }
    Ok(report)
}

/// Check that every `l_over`-window of `z` contains at least `rf_window`
/// consecutive payload symbols. Returns the number of windows checked.
pub fn verify_window_data_content(z: &Seq, p: &ConstructionParams) -> Result<usize> {
    if z.len() != p.n {
        return Err(CodecError::params("codeword length mismatch"));
    }
    let roles = block_roles(p);
    let mut checked = 0usize;
    for start in 0..=p.n - p.l_over {
        // longest run of z-positions whose payload offsets are consecutive in
        // the payload stream (wrapped segments and markers interrupt z but
        // not the payload order)
        let mut best = 0usize;
        let mut run = 0usize;
        let mut prev: Option<usize> = None;
        for pos in start..start + p.l_over {
            if let Role::Payload { y_off } = roles[pos % p.l_min] {
                let block = pos / p.l_min;
                let global = block * p.block_payload + y_off;
                match prev {
                    Some(last) if last + 1 == global => run += 1,
                    _ => run = 1,
                }
                prev = Some(global);
                best = best.max(run);
            }
        }
        if best < p.rf_window {
            return Err(CodecError::decode(
                format!(
                    "window at {start} carries only {best} consecutive payload symbols (< {})",
                    p.rf_window
                ),
                Some(start),
            ));
        }
        checked += 1;
    }
    Ok(checked)
}
