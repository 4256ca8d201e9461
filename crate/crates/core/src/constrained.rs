//! Constrained codecs used as building blocks: zero-run-limited (RLL)
//! encoding and repeat-free encoding with a zero-run guarantee and fixed
//! output length.
//!
//! The RLL codec is an enumerative block code: fixed-size blocks are ranked
//! within the set of blocks that start with a nonzero symbol and contain no
//! zero-run of length `k`. Ranks are shifted so the all-(q-1) payload maps to
//! the all-(q-1) block, and the output is padded with `q-1` symbols whose
//! count is carried by the output length itself, so the code is fixed-rate
//! and exactly invertible.
//!
//! The repeat-free codec has two regimes:
//!
//! * **census** (tiny outputs): all admissible outputs are enumerated in
//!   lexicographic order and the encoder is a rank lookup. Optimal capacity,
//!   exhaustively testable.
//! * **elimination** (larger outputs): the payload is RLL-encoded with
//!   `k = t - 1`, then repeated windows are excised one at a time, each
//!   appending a fixed-width record (junction-stuffing flag plus the two
//!   locations). A sentinel zero-run of length exactly `t - 1`, the record
//!   count, and counter-block filler pad the stream to the fixed length.
//!   The stream proper keeps zero-runs at `t - 2` or less, so the sentinel
//!   is the first long run and the decoder can split the layout without a
//!   length field.

use std::collections::HashMap;
use std::collections::HashSet;

use crate::error::{CodecError, Result};
use crate::seqcore::{all_windows_distinct, max_zero_run_slice, Alphabet, Seq, Symbol};

// ---------------------------------------------------------------------------
// RLL
// ---------------------------------------------------------------------------

/// Parameters of the zero-run-limited code: outputs contain no `0^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RllParams {
    pub q: u32,
    pub k: usize,
}

impl RllParams {
    pub fn new(q: u32, k: usize) -> Result<Self> {
        Alphabet::new(q)?;
        if k < 2 {
            return Err(CodecError::params(format!("rll forbidden run length k={k} must be >= 2")));
        }
        Ok(RllParams { q, k })
    }
}

/// Enumerative block tables for one (q, k) pair.
struct RllBlocks {
    q: u32,
    k: usize,
    block_len: usize,
    payload_len: usize,
    /// completions[j][r]: strings of length j continuing a zero-run of r
    completions: Vec<Vec<u128>>,
    /// number of valid blocks (first symbol nonzero, no 0^k)
    count: u128,
    /// rank shift so the top payload value maps to the top block
    offset: u128,
}

fn q_pow(q: u32, e: usize) -> u128 {
    (q as u128).saturating_pow(e as u32)
}

impl RllBlocks {
    fn new(p: &RllParams) -> Result<Self> {
        let RllParams { q, k } = *p;
        let max_by_width = (120.0 / (q as f64).log2()).floor() as usize;
        let block_len = 16usize.max(k + 2).min(max_by_width);
        if block_len <= k {
            return Err(CodecError::params(format!(
                "rll block codec infeasible: k={k} too large for alphabet q={q}"
            )));
        }
        let mut completions = vec![vec![0u128; k]; block_len + 1];
        completions[0].fill(1);
        for j in 1..=block_len {
            for r in 0..k {
                let mut total = (q as u128 - 1) * completions[j - 1][0];
                if r + 1 < k {
                    total += completions[j - 1][r + 1];
                }
                completions[j][r] = total;
            }
        }
        let count = (q as u128 - 1) * completions[block_len - 1][0];
        let mut payload_len = 0usize;
        let mut acc: u128 = 1;
        while acc <= count / q as u128 {
            acc *= q as u128;
            payload_len += 1;
        }
        if payload_len == 0 {
            return Err(CodecError::params("rll block codec infeasible: zero payload"));
        }
        let offset = count - acc;
        Ok(RllBlocks { q, k, block_len, payload_len, completions, count, offset })
    }

    fn unrank(&self, mut rank: u128) -> Vec<Symbol> {
        debug_assert!(rank < self.count);
        let mut out = Vec::with_capacity(self.block_len);
        let mut run = 0usize;
        for pos in 0..self.block_len {
            let j = self.block_len - 1 - pos;
            if pos == 0 {
                let per = self.completions[j][0];
                let idx = rank / per;
                rank %= per;
                out.push(1 + idx as Symbol);
                run = 0;
            } else {
                let zero_ct = if run + 1 < self.k { self.completions[j][run + 1] } else { 0 };
                if rank < zero_ct {
                    out.push(0);
                    run += 1;
                } else {
                    rank -= zero_ct;
                    let per = self.completions[j][0];
                    let idx = rank / per;
                    rank %= per;
                    out.push(1 + idx as Symbol);
                    run = 0;
                }
            }
        }
        out
    }

    /// Rank a block, validating the block constraints; `base` is the block's
    /// offset in the containing string (for error reporting).
    fn rank(&self, block: &[Symbol], base: usize) -> Result<u128> {
        let mut rank: u128 = 0;
        let mut run = 0usize;
        for (pos, &sym) in block.iter().enumerate() {
            if sym >= self.q {
                return Err(CodecError::decode("symbol out of alphabet", Some(base + pos)));
            }
            let j = self.block_len - 1 - pos;
            if pos == 0 {
                if sym == 0 {
                    return Err(CodecError::decode(
                        "block starts with zero symbol",
                        Some(base),
                    ));
                }
                rank += (sym as u128 - 1) * self.completions[j][0];
                run = 0;
            } else if sym == 0 {
                if run + 1 >= self.k {
                    return Err(CodecError::decode(
                        format!("forbidden zero-run of length {}", self.k),
                        Some(base + pos),
                    ));
                }
                run += 1;
            } else {
                let zero_ct = if run + 1 < self.k { self.completions[j][run + 1] } else { 0 };
                rank += zero_ct + (sym as u128 - 1) * self.completions[j][0];
                run = 0;
            }
        }
        Ok(rank)
    }
}

fn seq_digits_to_value(digits: &[Symbol], q: u32) -> u128 {
    digits.iter().fold(0u128, |acc, &d| acc * q as u128 + d as u128)
}

fn value_to_digits(mut value: u128, q: u32, width: usize) -> Vec<Symbol> {
    let mut out = vec![0; width];
    for slot in out.iter_mut().rev() {
        *slot = (value % q as u128) as Symbol;
        value /= q as u128;
    }
    out
}

/// Output length of [`rll_encode`] for a given input length.
pub fn rll_overhead(input_len: usize, rp: &RllParams) -> Result<usize> {
    let blocks = RllBlocks::new(rp)?;
    Ok(rll_output_len(input_len, &blocks) - input_len)
}

fn rll_output_len(input_len: usize, blocks: &RllBlocks) -> usize {
    let nb = input_len.div_ceil(blocks.payload_len);
    let pad = nb * blocks.payload_len - input_len;
    nb * blocks.block_len + pad
}

/// Encode `w` into a string with no zero-run of length `k`. Fixed-rate: the
/// output length depends only on `|w|`, and the codec inverts exactly.
pub fn rll_encode(w: &Seq, rp: &RllParams) -> Result<Seq> {
    if w.alphabet().size() != rp.q {
        return Err(CodecError::params("input alphabet does not match rll params"));
    }
    let blocks = RllBlocks::new(rp)?;
    rll_encode_symbols(w.symbols(), rp, &blocks).and_then(|sym| Seq::new(w.alphabet(), sym))
}

fn rll_encode_symbols(w: &[Symbol], rp: &RllParams, blocks: &RllBlocks) -> Result<Vec<Symbol>> {
    let nb = w.len().div_ceil(blocks.payload_len);
    let pad = nb * blocks.payload_len - w.len();
    let mut padded = w.to_vec();
    padded.extend(std::iter::repeat_n(rp.q - 1, pad));
    let mut out = Vec::with_capacity(nb * blocks.block_len + pad);
    for chunk in padded.chunks(blocks.payload_len) {
        let value = seq_digits_to_value(chunk, rp.q);
        out.extend(blocks.unrank(value + blocks.offset));
    }
    out.extend(std::iter::repeat_n(rp.q - 1, pad));
    Ok(out)
}

/// Exact inverse of [`rll_encode`]. Malformed framing yields a decode error
/// carrying the offset of the first inconsistency.
pub fn rll_decode(u: &Seq, rp: &RllParams) -> Result<Seq> {
    if u.alphabet().size() != rp.q {
        return Err(CodecError::params("input alphabet does not match rll params"));
    }
    let blocks = RllBlocks::new(rp)?;
    rll_decode_symbols(u.symbols(), rp, &blocks).and_then(|sym| Seq::new(u.alphabet(), sym))
}

fn rll_decode_symbols(u: &[Symbol], rp: &RllParams, blocks: &RllBlocks) -> Result<Vec<Symbol>> {
    let pad = u.len() % blocks.block_len;
    if pad >= blocks.payload_len {
        return Err(CodecError::decode(
            format!("trailing pad of {pad} exceeds payload width"),
            Some(u.len() - pad),
        ));
    }
    let body_len = u.len() - pad;
    let nb = body_len / blocks.block_len;
    if nb == 0 && pad > 0 {
        return Err(CodecError::decode("pad without any block", Some(0)));
    }
    for (i, &sym) in u[body_len..].iter().enumerate() {
        if sym != rp.q - 1 {
            return Err(CodecError::decode("pad symbol mismatch", Some(body_len + i)));
        }
    }
    let mut digits = Vec::with_capacity(nb * blocks.payload_len);
    for b in 0..nb {
        let base = b * blocks.block_len;
        let rank = blocks.rank(&u[base..base + blocks.block_len], base)?;
        if rank < blocks.offset {
            return Err(CodecError::decode("block rank below payload range", Some(base)));
        }
        let value = rank - blocks.offset;
        if value >= q_pow(rp.q, blocks.payload_len) {
            return Err(CodecError::decode("block rank above payload range", Some(base)));
        }
        digits.extend(value_to_digits(value, rp.q, blocks.payload_len));
    }
    for (i, &d) in digits[digits.len() - pad..].iter().enumerate() {
        if d != rp.q - 1 {
            return Err(CodecError::decode(
                "message pad digit mismatch",
                Some(digits.len() - pad + i),
            ));
        }
    }
    digits.truncate(digits.len() - pad);
    Ok(digits)
}

// ---------------------------------------------------------------------------
// Repeat-free
// ---------------------------------------------------------------------------

/// Parameters of the repeat-free codec: outputs of fixed length `n_out` whose
/// `window`-substrings are pairwise distinct and whose zero-runs are shorter
/// than `run_limit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RfParams {
    pub q: u32,
    /// window-uniqueness length (the repeat-free window)
    pub window: usize,
    /// forbidden zero-run length t: outputs satisfy max_zero_run < t
    pub run_limit: usize,
    /// fixed output length
    pub n_out: usize,
}

impl RfParams {
    pub fn new(q: u32, window: usize, run_limit: usize, n_out: usize) -> Result<Self> {
        Alphabet::new(q)?;
        if window < 1 || run_limit < 1 || n_out < 1 {
            return Err(CodecError::params("rf params must be positive"));
        }
        Ok(RfParams { q, window, run_limit, n_out })
    }

    /// A repeat-free string cannot be longer than the number of distinct
    /// windows plus window - 1.
    pub fn output_ceiling(&self) -> u128 {
        q_pow(self.q, self.window).saturating_add(self.window as u128 - 1)
    }

    /// Whether the (window, run_limit) pair satisfies the coupled-redundancy
    /// regime `t <= 2*floor((window - ceil(log_q n_out))/5) - 3`. Outside the
    /// regime the codec still works but the redundancy inequality is
    /// report-only.
    pub fn in_redundancy_regime(&self) -> bool {
        let log_n = ceil_log(self.q, self.n_out as u128);
        if self.window < log_n {
            return false;
        }
        let slack = (self.window - log_n) / 5;
        slack >= 2 && self.run_limit as i64 <= 2 * slack as i64 - 3
    }

    /// The redundancy ceiling targeted for q > 2:
    /// `ceil(q^2/(q-2) * q^(-floor(t/2)) * n_out)`.
    pub fn redundancy_bound(&self) -> Option<usize> {
        if self.q <= 2 {
            return None;
        }
        let q = self.q as f64;
        let bound = q * q / (q - 2.0) * q.powi(-((self.run_limit / 2) as i32)) * self.n_out as f64;
        Some(bound.ceil() as usize)
    }
}

/// Smallest e with q^e >= x.
fn ceil_log(q: u32, x: u128) -> usize {
    let mut e = 0;
    let mut acc: u128 = 1;
    while acc < x {
        acc = acc.saturating_mul(q as u128);
        e += 1;
    }
    e
}

const TINY_CENSUS_BUDGET: u128 = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RfMode {
    Census,
    Elimination,
}

/// Derived layout constants of the elimination regime.
#[derive(Debug, Clone)]
struct ElimLayout {
    rll: RllParams,
    /// digits per recorded position
    pos_digits: usize,
    /// zeros allowed in a row inside stuffed fields
    group: usize,
    /// width of one stuffed numeric field
    field_width: usize,
    /// width of one elimination record: lead 1, type, flag, two fields
    record_width: usize,
    /// width of the record-count field after the sentinel
    count_width: usize,
    /// filler counter width and block width
    filler_counter_width: usize,
    filler_block_width: usize,
    capacity: usize,
}

fn elim_layout(fp: &RfParams) -> Result<ElimLayout> {
    let t = fp.run_limit;
    if t < 3 {
        return Err(CodecError::params(format!(
            "elimination codec needs run_limit >= 3, got {t}"
        )));
    }
    let rll = RllParams::new(fp.q, t - 1)?;
    let blocks = RllBlocks::new(&rll)?;
    let pos_digits = ceil_log(fp.q, fp.n_out as u128).max(1);
    let group = t - 2;
    let field_width = 1 + pos_digits + pos_digits.div_ceil(group);
    let record_width = 3 + 2 * field_width;
    let count_width = field_width;
    let filler_counter_width = if fp.q == 2 {
        2 * pos_digits
    } else {
        ceil_log(fp.q - 1, fp.n_out as u128).max(1)
    };
    let filler_block_width = t + 1 + filler_counter_width;
    if fp.window < record_width + 2 {
        return Err(CodecError::params(format!(
            "elimination codec needs window >= record width + 2 = {}",
            record_width + 2
        )));
    }
    if fp.window < 2 * filler_block_width {
        return Err(CodecError::params(format!(
            "elimination codec needs window >= 2 * filler block width = {}",
            2 * filler_block_width
        )));
    }
    let reserved = (t + 1) + count_width;
    if fp.n_out <= reserved {
        return Err(CodecError::params("output too short for sentinel and record count"));
    }
    let budget = fp.n_out - reserved;
    let nb = budget / blocks.block_len;
    let capacity = nb * blocks.payload_len;
    if capacity == 0 {
        return Err(CodecError::params("elimination codec capacity is zero"));
    }
    Ok(ElimLayout {
        rll,
        pos_digits,
        group,
        field_width,
        record_width,
        count_width,
        filler_counter_width,
        filler_block_width,
        capacity,
    })
}

fn rf_mode(fp: &RfParams) -> Result<RfMode> {
    if fp.n_out as u128 > fp.output_ceiling() {
        return Err(CodecError::params(format!(
            "n_out {} exceeds repeat-free ceiling q^window + window - 1 = {}",
            fp.n_out,
            fp.output_ceiling()
        )));
    }
    if fp.window >= fp.n_out {
        return Err(CodecError::params(format!(
            "window {} must be shorter than output length {}",
            fp.window, fp.n_out
        )));
    }
    let census_cost = (fp.n_out as u128 + 1).saturating_mul(q_pow(fp.q, fp.n_out));
    if census_cost <= TINY_CENSUS_BUDGET {
        return Ok(RfMode::Census);
    }
    elim_layout(fp).map(|_| RfMode::Elimination).map_err(|e| {
        CodecError::params(format!(
            "rf params fit neither codec regime: output too large for census and {e}"
        ))
    })
}

/// The repeat-free codec behind [`rf_encode`]/[`rf_decode`], reusable across
/// calls so the census is built once.
pub struct RfCodec {
    fp: RfParams,
    mode: RfMode,
    census: Vec<Vec<Symbol>>,
    capacity: usize,
}

impl RfCodec {
    pub fn new(fp: RfParams) -> Result<Self> {
        let mode = rf_mode(&fp)?;
        match mode {
            RfMode::Census => {
                let census = enumerate_admissible(&fp);
                let count = census.len() as u128;
                let mut capacity = 0usize;
                let mut acc: u128 = 1;
                while count > 0 && acc <= count / fp.q as u128 {
                    acc *= fp.q as u128;
                    capacity += 1;
                }
                if count == 0 || acc > count {
                    capacity = 0;
                }
                Ok(RfCodec { fp, mode, census, capacity })
            }
            RfMode::Elimination => {
                let layout = elim_layout(&fp)?;
                Ok(RfCodec { fp, mode, census: Vec::new(), capacity: layout.capacity })
            }
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Number of admissible outputs (census regime only), for counting tests.
    pub fn census_count(&self) -> Option<usize> {
        match self.mode {
            RfMode::Census => Some(self.census.len()),
            RfMode::Elimination => None,
        }
    }

    pub fn encode(&self, w: &Seq) -> Result<Seq> {
        if w.alphabet().size() != self.fp.q {
            return Err(CodecError::params("input alphabet does not match rf params"));
        }
        if w.len() != self.capacity {
            return Err(CodecError::params(format!(
                "message length {} does not match rf capacity {}",
                w.len(),
                self.capacity
            )));
        }
        if self.capacity == 0 {
            return Err(CodecError::params("rf capacity is zero for these params"));
        }
        let symbols = match self.mode {
            RfMode::Census => {
                let value = seq_digits_to_value(w.symbols(), self.fp.q);
                self.census[value as usize].clone()
            }
            RfMode::Elimination => self.encode_elimination(w.symbols())?,
        };
        // the output contract is checked, never assumed
        if symbols.len() != self.fp.n_out
            || !all_windows_distinct(&symbols, self.fp.window)
            || max_zero_run_slice(&symbols) >= self.fp.run_limit
        {
            return Err(CodecError::feasibility(
                "rf encoder output violates its contract; params outside the scheme's regime",
            ));
        }
        Seq::new(w.alphabet(), symbols)
    }

    pub fn decode(&self, y: &Seq) -> Result<Seq> {
        if y.alphabet().size() != self.fp.q {
            return Err(CodecError::params("input alphabet does not match rf params"));
        }
        if y.len() != self.fp.n_out {
            return Err(CodecError::params(format!(
                "input length {} does not match n_out {}",
                y.len(),
                self.fp.n_out
            )));
        }
        let digits = match self.mode {
            RfMode::Census => {
                let idx = self
                    .census
                    .binary_search_by(|cand| cand.as_slice().cmp(y.symbols()))
                    .map_err(|_| CodecError::decode("not an admissible codeword", None))?;
                if idx as u128 >= q_pow(self.fp.q, self.capacity) {
                    return Err(CodecError::decode("codeword rank above capacity", None));
                }
                value_to_digits(idx as u128, self.fp.q, self.capacity)
            }
            RfMode::Elimination => self.decode_elimination(y.symbols())?,
        };
        Seq::new(y.alphabet(), digits)
    }

    // -- elimination regime ------------------------------------------------

    /// The sentinel as the loop sees it appended to the stream, so repeats
    /// straddling the stream end are eliminated too.
    fn sentinel_tail(&self) -> Vec<Symbol> {
        let t = self.fp.run_limit;
        let mut tail = Vec::with_capacity(t + 1);
        tail.push(1);
        tail.extend(std::iter::repeat_n(0, t - 1));
        tail.push(1);
        tail
    }

    fn encode_elimination(&self, w: &[Symbol]) -> Result<Vec<Symbol>> {
        let layout = elim_layout(&self.fp)?;
        let blocks = RllBlocks::new(&layout.rll)?;
        let window = self.fp.window;
        let tail = self.sentinel_tail();
        let mut stream = rll_encode_symbols(w, &layout.rll, &blocks)?;
        let mut records = 0usize;
        loop {
            let mut view = stream.clone();
            view.extend_from_slice(&tail);
            let Some((i, j)) = first_repeat(&view, window) else {
                break;
            };
            // excise the later copy when it lies in the stream, otherwise the
            // earlier one (both cannot overlap the sentinel: their trailing
            // run structure would differ)
            let (kind, cut) = if j + window <= stream.len() {
                (0u32, j)
            } else if i + window <= stream.len() {
                (1u32, i)
            } else {
                return Err(CodecError::feasibility(
                    "repeated windows both overlap the sentinel",
                ));
            };
            stream.drain(cut..cut + window);
            let flag = junction_run(&stream, cut) > self.fp.run_limit - 2;
            if flag {
                stream.insert(cut, 1);
            }
            stream.push(1);
            stream.push(kind);
            stream.push(if flag { 1 } else { 0 });
            push_field(&mut stream, i as u128, &layout, self.fp.q);
            push_field(&mut stream, j as u128, &layout, self.fp.q);
            records += 1;
            if records > self.fp.n_out {
                return Err(CodecError::feasibility(
                    "elimination did not converge within the record budget",
                ));
            }
        }
        let mut out = stream;
        out.extend_from_slice(&tail);
        push_field(&mut out, records as u128, &layout, self.fp.q);
        let t = self.fp.run_limit;
        let mut counter = 0u128;
        while out.len() < self.fp.n_out {
            let mut block: Vec<Symbol> = Vec::with_capacity(layout.filler_block_width);
            block.extend(std::iter::repeat_n(0, t - 1));
            block.push(1);
            block.extend(filler_counter(counter, &layout, self.fp.q));
            block.push(1);
            counter += 1;
            for sym in block {
                if out.len() == self.fp.n_out {
                    break;
                }
                out.push(sym);
            }
        }
        Ok(out)
    }

    fn decode_elimination(&self, y: &[Symbol]) -> Result<Vec<Symbol>> {
        let layout = elim_layout(&self.fp)?;
        let blocks = RllBlocks::new(&layout.rll)?;
        let t = self.fp.run_limit;
        // the sentinel is the first zero-run of length >= t - 1
        let mut run = 0usize;
        let mut sentinel = None;
        for (pos, &sym) in y.iter().enumerate() {
            if sym == 0 {
                run += 1;
                if run == t - 1 {
                    sentinel = Some(pos + 1 - run);
                    break;
                }
            } else {
                run = 0;
            }
        }
        let run_start = sentinel
            .ok_or_else(|| CodecError::decode("sentinel zero-run not found", None))?;
        if run_start == 0 || y[run_start - 1] != 1 {
            return Err(CodecError::decode("sentinel not preceded by 1", Some(run_start)));
        }
        let close = run_start + t - 1;
        if close >= y.len() || y[close] != 1 {
            return Err(CodecError::decode("sentinel not terminated by 1", Some(close)));
        }
        let count_start = close + 1;
        if count_start + layout.count_width > y.len() {
            return Err(CodecError::decode("record count field truncated", Some(count_start)));
        }
        let records =
            parse_field(&y[count_start..count_start + layout.count_width], &layout, self.fp.q, count_start)?
                as usize;
        let window = self.fp.window;
        let mut stream: Vec<Symbol> = y[..run_start - 1].to_vec();
        for _ in 0..records {
            if stream.len() < layout.record_width {
                return Err(CodecError::decode("record underflow", Some(stream.len())));
            }
            let base = stream.len() - layout.record_width;
            let rec: Vec<Symbol> = stream.split_off(base);
            if rec[0] != 1 {
                return Err(CodecError::decode("record lead symbol is not 1", Some(base)));
            }
            let kind = rec[1];
            if kind > 1 {
                return Err(CodecError::decode("record type out of range", Some(base + 1)));
            }
            let flag = match rec[2] {
                0 => false,
                1 => true,
                _ => return Err(CodecError::decode("record flag out of range", Some(base + 2))),
            };
            let i = parse_field(&rec[3..3 + layout.field_width], &layout, self.fp.q, base + 3)?
                as usize;
            let j = parse_field(&rec[3 + layout.field_width..], &layout, self.fp.q, base + 3 + layout.field_width)?
                as usize;
            if i >= j {
                return Err(CodecError::decode(format!("record positions not increasing: i={i} j={j}"), Some(base)));
            }
            let cut = if kind == 0 { j } else { i };
            if flag {
                if cut >= stream.len() || stream[cut] != 1 {
                    return Err(CodecError::decode("stuffing symbol missing", Some(cut)));
                }
                stream.remove(cut);
            }
            if cut > stream.len() {
                return Err(CodecError::decode(
                    format!("record cut position {cut} beyond length {}", stream.len()),
                    Some(base),
                ));
            }
            if kind == 0 {
                // the source precedes the cut; self-referential forward copy
                for u in 0..window {
                    let sym = stream[i + u];
                    stream.insert(j + u, sym);
                }
            } else {
                // the source followed the cut (it overlapped the sentinel);
                // reconstruct it from the post-excision view plus the sentinel
                let mut view = stream.clone();
                view.extend_from_slice(&self.sentinel_tail());
                if j > view.len() {
                    return Err(CodecError::decode(
                        format!("record source position {j} beyond view {}", view.len()),
                        Some(base),
                    ));
                }
                let copied: Vec<Symbol> = if j >= i + window {
                    view[j - window..j].to_vec()
                } else {
                    // equal overlapping windows: the region was periodic with
                    // period j - i, whose last period survives at position i
                    let period = j - i;
                    (0..window)
                        .map(|u| {
                            let x = (u + period * (window / period + 1) - window) % period;
                            view[i + x]
                        })
                        .collect()
                };
                for (u, sym) in copied.into_iter().enumerate() {
                    stream.insert(i + u, sym);
                }
            }
        }
        let digits = rll_decode_symbols(&stream, &layout.rll, &blocks)?;
        if digits.len() != self.capacity {
            return Err(CodecError::decode(
                format!("recovered payload length {} != capacity {}", digits.len(), self.capacity),
                None,
            ));
        }
        Ok(digits)
    }
}

/// First pair (i, j), i < j, of equal windows: smallest j, then smallest i.
fn first_repeat(s: &[Symbol], window: usize) -> Option<(usize, usize)> {
    if s.len() < window + 1 {
        return None;
    }
    let mut seen: HashMap<&[Symbol], usize> = HashMap::with_capacity(s.len());
    for j in 0..=s.len() - window {
        let w = &s[j..j + window];
        match seen.get(w) {
            Some(&i) => return Some((i, j)),
            None => {
                seen.insert(w, j);
            }
        }
    }
    None
}

/// Length of the zero-run reading through the junction at `pos` (between
/// `pos - 1` and `pos`).
fn junction_run(s: &[Symbol], pos: usize) -> usize {
    let mut left = 0;
    while left < pos && s[pos - 1 - left] == 0 {
        left += 1;
    }
    let mut right = 0;
    while pos + right < s.len() && s[pos + right] == 0 {
        right += 1;
    }
    left + right
}

/// Stuffed numeric field: a lead 1, then base-q digits with a 1 after every
/// `group` digits (and after the final partial group).
fn push_field(out: &mut Vec<Symbol>, value: u128, layout: &ElimLayout, q: u32) {
    out.push(1);
    let digits = value_to_digits(value, q, layout.pos_digits);
    for (idx, &d) in digits.iter().enumerate() {
        out.push(d);
        if (idx + 1) % layout.group == 0 || idx + 1 == digits.len() {
            out.push(1);
        }
    }
}

fn parse_field(field: &[Symbol], layout: &ElimLayout, q: u32, base: usize) -> Result<u128> {
    if field.len() != layout.field_width || field[0] != 1 {
        return Err(CodecError::decode("malformed field", Some(base)));
    }
    let mut digits = Vec::with_capacity(layout.pos_digits);
    let mut pos = 1usize;
    let mut in_group = 0usize;
    while digits.len() < layout.pos_digits {
        if pos >= field.len() {
            return Err(CodecError::decode("field truncated", Some(base + pos)));
        }
        digits.push(field[pos]);
        in_group += 1;
        pos += 1;
        if in_group == layout.group || digits.len() == layout.pos_digits {
            if pos >= field.len() || field[pos] != 1 {
                return Err(CodecError::decode("field separator missing", Some(base + pos)));
            }
            pos += 1;
            in_group = 0;
        }
    }
    if pos != field.len() {
        return Err(CodecError::decode("field has trailing symbols", Some(base + pos)));
    }
    if digits.iter().any(|&d| d >= q) {
        return Err(CodecError::decode("field digit out of alphabet", Some(base)));
    }
    Ok(seq_digits_to_value(&digits, q))
}

/// Zero-free (q > 2) or bit-stuffed (q = 2) filler counter encoding.
fn filler_counter(counter: u128, layout: &ElimLayout, q: u32) -> Vec<Symbol> {
    if q == 2 {
        let bits = layout.filler_counter_width / 2;
        let wrapped = if bits >= 128 { counter } else { counter % (1u128 << bits) };
        let mut out = Vec::with_capacity(layout.filler_counter_width);
        for b in (0..bits).rev() {
            out.push(((wrapped >> b) & 1) as Symbol);
            out.push(1);
        }
        out
    } else {
        let base = (q - 1) as u128;
        let mut value = counter % base.pow(layout.filler_counter_width as u32);
        let mut out = vec![0; layout.filler_counter_width];
        for slot in out.iter_mut().rev() {
            *slot = (value % base) as Symbol + 1;
            value /= base;
        }
        out
    }
}

/// Enumerate all admissible outputs in lexicographic order (census regime).
fn enumerate_admissible(fp: &RfParams) -> Vec<Vec<Symbol>> {
    let mut out = Vec::new();
    let mut prefix: Vec<Symbol> = Vec::with_capacity(fp.n_out);
    let mut windows: HashSet<u64> = HashSet::new();
    census_dfs(fp, &mut prefix, 0, &mut windows, &mut out);
    out
}

fn window_key(w: &[Symbol], q: u32) -> u64 {
    w.iter().fold(0u64, |acc, &s| acc * q as u64 + s as u64)
}

fn census_dfs(
    fp: &RfParams,
    prefix: &mut Vec<Symbol>,
    run: usize,
    windows: &mut HashSet<u64>,
    out: &mut Vec<Vec<Symbol>>,
) {
    if prefix.len() == fp.n_out {
        out.push(prefix.clone());
        return;
    }
    for sym in 0..fp.q {
        let new_run = if sym == 0 { run + 1 } else { 0 };
        if new_run >= fp.run_limit {
            continue;
        }
        prefix.push(sym);
        let mut added = None;
        let mut ok = true;
        if prefix.len() >= fp.window {
            let key = window_key(&prefix[prefix.len() - fp.window..], fp.q);
            if windows.insert(key) {
                added = Some(key);
            } else {
                ok = false;
            }
        }
        if ok {
            census_dfs(fp, prefix, new_run, windows, out);
        }
        if let Some(key) = added {
            windows.remove(&key);
        }
        prefix.pop();
    }
}

/// Largest message length the fixed-length encoder supports for `fp`.
pub fn rf_capacity(fp: &RfParams) -> Result<usize> {
    if fp.n_out <= fp.window {
        return Ok(0);
    }
    RfCodec::new(*fp).map(|c| c.capacity())
}

/// Encode a message of length [`rf_capacity`] into a repeat-free string of
/// length `n_out` with zero-runs shorter than `run_limit`.
pub fn rf_encode(w: &Seq, fp: &RfParams) -> Result<Seq> {
    RfCodec::new(*fp)?.encode(w)
}

/// Exact inverse of [`rf_encode`] on its image.
pub fn rf_decode(y: &Seq, fp: &RfParams) -> Result<Seq> {
    RfCodec::new(*fp)?.decode(y)
}
