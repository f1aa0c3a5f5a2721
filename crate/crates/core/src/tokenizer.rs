//! Byte-to-token conversion, adjacent-pair counting and pair replacement.
//!
//! Occurrences of a pair are counted leftmost-greedy without overlap: a token
//! never belongs to two counted instances of the same pair, so the run
//! `a a a` holds one `(a, a)`. Counting and replacement both go through
//! [`PairScanner`], which keeps the two consistent.

use std::collections::BTreeMap;

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::gain::Composition;
use crate::symbol_model::{Alphabet, SymbolError, SymbolId, TokenStream};

/// Streams below this many tokens are counted on the calling thread.
const PARALLEL_THRESHOLD: usize = 1 << 15;

/// A proposed new symbol `(left, right)` with its occurrence statistics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregateCandidate {
    pub left: SymbolId,
    pub right: SymbolId,
    /// Non-overlapping adjacent occurrences in the current stream, `f_S`.
    pub count: u64,
    /// Expanded byte length.
    pub r: usize,
    /// Base-symbol multiplicities of the expansion.
    pub multiplicity: BTreeMap<SymbolId, u64>,
}

impl AggregateCandidate {
    pub fn new(alphabet: &Alphabet, left: SymbolId, right: SymbolId, count: u64) -> Result<Self, SymbolError> {
        let r = alphabet.expanded_len(left)? + alphabet.expanded_len(right)?;
        let mut multiplicity = alphabet.char_multiplicity(left)?;
        for (id, m) in alphabet.char_multiplicity(right)? {
            *multiplicity.entry(id).or_insert(0) += m;
        }
        Ok(AggregateCandidate { left, right, count, r, multiplicity })
    }

    /// The candidate as seen by the gain formulas: two constituents of the
    /// current stream.
    pub fn composition(&self) -> Composition {
        Composition::pair(self.left, self.right, self.count)
    }

    pub fn expansion(&self, alphabet: &Alphabet) -> Result<Vec<u8>, SymbolError> {
        let mut out = alphabet.expand(self.left)?.to_vec();
        out.extend_from_slice(alphabet.expand(self.right)?);
        Ok(out)
    }
}

/// Pair and occurrence count, without expansion data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct PairCount {
    pub left: SymbolId,
    pub right: SymbolId,
    pub count: u64,
}

/// Walks adjacent positions and reports the start of every counted pair
/// occurrence. A self-pair `(x, x)` is skipped when the previous position
/// already counted `(x, x)`.
struct PairScanner {
    prev_self_pair: bool,
}

impl PairScanner {
    fn new() -> Self {
        PairScanner { prev_self_pair: false }
    }

    /// Whether the pair starting at this position counts. Must be called for
    /// every position in order.
    #[inline]
    fn step(&mut self, left: SymbolId, right: SymbolId) -> bool {
        if left == right {
            if self.prev_self_pair {
                self.prev_self_pair = false;
                return false;
            }
            self.prev_self_pair = true;
        } else {
            self.prev_self_pair = false;
        }
        true
    }
}

#[inline]
fn pair_key(left: SymbolId, right: SymbolId) -> u64 {
    (u64::from(left.0) << 32) | u64::from(right.0)
}

/// One token per byte.
pub fn tokenize_base(data: &[u8], alphabet: &Alphabet) -> Result<TokenStream, SymbolError> {
    let tokens = data
        .iter()
        .enumerate()
        .map(|(position, &byte)| alphabet.id_of_byte(byte).ok_or(SymbolError::UnmappedByte { position, byte }))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TokenStream::new(tokens, data.len()))
}

fn count_range(tokens: &[SymbolId], into: &mut FxHashMap<u64, u64>) {
    let mut scanner = PairScanner::new();
    for w in tokens.windows(2) {
        if scanner.step(w[0], w[1]) {
            *into.entry(pair_key(w[0], w[1])).or_insert(0) += 1;
        }
    }
}

/// Chunk boundaries that never split a run of equal tokens, so each chunk can
/// be scanned with a fresh [`PairScanner`].
fn run_aligned_chunks(tokens: &[SymbolId], target: usize) -> Vec<(usize, usize)> {
    let mut chunks = Vec::new();
    let mut start = 0;
    while start < tokens.len() {
        let mut end = (start + target).min(tokens.len());
        while end < tokens.len() && tokens[end] == tokens[end - 1] {
            end += 1;
        }
        chunks.push((start, end));
        start = end;
    }
    chunks
}

/// Counts every adjacent pair of the stream, sorted by `(left, right)`.
/// Pairs that never occur are omitted.
pub fn count_pairs(tokens: &[SymbolId]) -> Vec<PairCount> {
    let threads = rayon::current_num_threads();
    let merged = if threads <= 1 || tokens.len() < PARALLEL_THRESHOLD {
        let mut map = FxHashMap::default();
        count_range(tokens, &mut map);
        map
    } else {
        let target = tokens.len().div_ceil(threads * 4).max(4096);
        run_aligned_chunks(tokens, target)
            .into_par_iter()
            .map(|(start, end)| {
                let mut map = FxHashMap::default();
                // Include the first token of the next chunk: the straddling
                // pair has distinct tokens, so it always counts.
                count_range(&tokens[start..(end + 1).min(tokens.len())], &mut map);
                map
            })
            .reduce(FxHashMap::default, |mut a, b| {
                if a.len() < b.len() {
                    return merge_into(b, a);
                }
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
                a
            })
    };
    let mut out: Vec<PairCount> = merged
        .into_iter()
        .map(|(k, count)| PairCount {
            left: SymbolId((k >> 32) as u32),
            right: SymbolId(k as u32),
            count,
        })
        .collect();
    out.sort_unstable();
    out
}

fn merge_into(mut big: FxHashMap<u64, u64>, small: FxHashMap<u64, u64>) -> FxHashMap<u64, u64> {
    for (k, v) in small {
        *big.entry(k).or_insert(0) += v;
    }
    big
}

/// All occurring pairs as full candidates.
pub fn enumerate_candidates(stream: &TokenStream, alphabet: &Alphabet) -> Result<Vec<AggregateCandidate>, SymbolError> {
    count_pairs(&stream.tokens)
        .into_iter()
        .map(|p| AggregateCandidate::new(alphabet, p.left, p.right, p.count))
        .collect()
}

/// Occurrence count of a single pair.
pub fn count_pair(tokens: &[SymbolId], left: SymbolId, right: SymbolId) -> u64 {
    let mut scanner = PairScanner::new();
    tokens
        .windows(2)
        .filter(|w| scanner.step(w[0], w[1]) && w[0] == left && w[1] == right)
        .count() as u64
}

/// Replaces every counted occurrence of `(left, right)` with `new_id`.
pub fn apply_aggregate(stream: &TokenStream, left: SymbolId, right: SymbolId, new_id: SymbolId) -> TokenStream {
    let tokens = &stream.tokens;
    let mut out = Vec::with_capacity(tokens.len());
    let mut scanner = PairScanner::new();
    let mut i = 0;
    while i < tokens.len() {
        if i + 1 < tokens.len() {
            let counted = scanner.step(tokens[i], tokens[i + 1]);
            if counted && tokens[i] == left && tokens[i + 1] == right {
                out.push(new_id);
                // The pair starting at i + 1 overlaps this match; feed it to
                // the scanner so run parity stays aligned with counting.
                if i + 2 < tokens.len() {
                    scanner.step(tokens[i + 1], tokens[i + 2]);
                }
                i += 2;
                continue;
            }
        }
        out.push(tokens[i]);
        i += 1;
    }
    TokenStream::new(out, stream.source_length_bytes)
}
