//! Reconstruction codes for the substring-trace channel.
//!
//! A strand of length `n` is observed as an unordered multiset of its
//! substrings in which every fragment has length at least `l_min` and
//! consecutive fragments overlap in at least `l_over` positions. This crate
//! provides:
//!
//! - [`seqcore`]: alphabet-generic sequences, fragments, trace multisets and
//!   the basic predicates (repeat-freeness, zero runs, the canonical trace);
//! - [`channel`]: trace sampling policies, exhaustive trace-spectrum
//!   enumeration and a classifier for candidate traces;
//! - [`assembler`]: reconstruction of repeat-free strands from any valid
//!   trace by suffix-prefix chain merging;
//! - [`constrained`]: run-length-limited and repeat-free constrained codecs
//!   with fixed output lengths and exact inverses;
//! - [`bounds`]: size and rate upper bounds for trace codes;
//! - [`tracecode`]: the full index-marker code: parameter derivation,
//!   block encoding with synchronization markers and embedded block indices,
//!   and trace decoding back to the message.

pub mod assembler;
pub mod bounds;
pub mod channel;
pub mod constrained;
pub mod error;
pub mod seqcore;
pub mod tracecode;

pub use error::{CodecError, Result};
pub use seqcore::{Alphabet, Fragment, Seq, Trace, TraceParams};
