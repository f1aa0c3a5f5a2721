//! Symbols, alphabets, frequency tables and token streams.
//!
//! An [`Alphabet`] always begins with the 64 standard characters in
//! [`STANDARD_CHARS`] order, followed by the document's nonstandard bytes in
//! ascending byte order, followed by aggregate symbols in insertion order.
//! Aggregates are ordered pairs of symbols that were already present when the
//! aggregate was added, so ids referenced by an aggregate are always smaller
//! than the aggregate's own id.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Number of characters every encoder and decoder knows without transmission.
pub const STANDARD_COUNT: usize = 64;

/// Canonical order of the standard alphabet. Header compatibility depends on
/// this exact order.
pub const STANDARD_CHARS: [u8; STANDARD_COUNT] = *b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz \n:;!()-,.?_";

/// Largest number of nonstandard bytes the NUMCHAR field can describe.
pub const MAX_NONSTANDARD: usize = 255;

/// Largest number of aggregates the AGCOUNT field can describe.
pub const MAX_AGGREGATES: usize = (1 << 15) - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
#[serde(transparent)]
pub struct SymbolId(pub u32);

impl SymbolId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Base(u8),
    Aggregate { left: SymbolId, right: SymbolId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Symbol {
    pub id: SymbolId,
    pub kind: SymbolKind,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SymbolError {
    #[error("unknown symbol id {0}")]
    UnknownId(SymbolId),
    #[error("aggregate {id} references {constituent}, which is not an earlier symbol")]
    ForwardReference { id: SymbolId, constituent: SymbolId },
    #[error("byte 0x{0:02x} is already part of the alphabet")]
    DuplicateBase(u8),
    #[error("too many nonstandard characters: {0} (limit {MAX_NONSTANDARD})")]
    TooManyNonstandard(usize),
    #[error("too many aggregate symbols: limit is {MAX_AGGREGATES}")]
    TooManyAggregates,
    #[error("byte 0x{byte:02x} at offset {position} is not in the alphabet")]
    UnmappedByte { position: usize, byte: u8 },
}

/// An ordered symbol alphabet with cached byte expansions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    kinds: Vec<SymbolKind>,
    expansions: Vec<Vec<u8>>,
    byte_to_id: [Option<SymbolId>; 256],
    nonstandard_count: usize,
}

impl Alphabet {
    /// The 64 standard characters alone.
    pub fn standard() -> Self {
        let mut alphabet = Alphabet {
            kinds: Vec::with_capacity(STANDARD_COUNT),
            expansions: Vec::with_capacity(STANDARD_COUNT),
            byte_to_id: [None; 256],
            nonstandard_count: 0,
        };
        for &b in STANDARD_CHARS.iter() {
            alphabet.push_base(b);
        }
        alphabet
    }

    /// Standard alphabet plus the given nonstandard bytes (sorted, deduplicated).
    pub fn with_nonstandard(bytes: &[u8]) -> Result<Self, SymbolError> {
        let mut extra: Vec<u8> = bytes.to_vec();
        extra.sort_unstable();
        extra.dedup();
        if extra.len() > MAX_NONSTANDARD {
            return Err(SymbolError::TooManyNonstandard(extra.len()));
        }
        let mut alphabet = Self::standard();
        for b in extra {
            if alphabet.byte_to_id[b as usize].is_some() {
                return Err(SymbolError::DuplicateBase(b));
            }
            alphabet.push_base(b);
            alphabet.nonstandard_count += 1;
        }
        Ok(alphabet)
    }

    /// Base alphabet for a document: the standard set plus every other byte
    /// value that occurs in `data`.
    pub fn for_document(data: &[u8]) -> Result<Self, SymbolError> {
        let mut seen = [false; 256];
        for &b in data {
            seen[b as usize] = true;
        }
        for &b in STANDARD_CHARS.iter() {
            seen[b as usize] = false;
        }
        let extra: Vec<u8> = (0..=255u8).filter(|&b| seen[b as usize]).collect();
        Self::with_nonstandard(&extra)
    }

    fn push_base(&mut self, byte: u8) {
        let id = SymbolId(self.kinds.len() as u32);
        self.kinds.push(SymbolKind::Base(byte));
        self.expansions.push(vec![byte]);
        self.byte_to_id[byte as usize] = Some(id);
    }

    /// Appends the aggregate `(left, right)` and returns its id.
    pub fn push_aggregate(&mut self, left: SymbolId, right: SymbolId) -> Result<SymbolId, SymbolError> {
        if self.aggregate_count() >= MAX_AGGREGATES {
            return Err(SymbolError::TooManyAggregates);
        }
        let id = SymbolId(self.kinds.len() as u32);
        for c in [left, right] {
            if c.index() >= self.kinds.len() {
                return Err(SymbolError::ForwardReference { id, constituent: c });
            }
        }
        let mut expansion = Vec::with_capacity(self.expansions[left.index()].len() + self.expansions[right.index()].len());
        expansion.extend_from_slice(&self.expansions[left.index()]);
        expansion.extend_from_slice(&self.expansions[right.index()]);
        self.kinds.push(SymbolKind::Aggregate { left, right });
        self.expansions.push(expansion);
        Ok(id)
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn standard_count(&self) -> usize {
        STANDARD_COUNT
    }

    /// NUMCHAR.
    pub fn nonstandard_count(&self) -> usize {
        self.nonstandard_count
    }

    /// 64 + NUMCHAR.
    pub fn base_size(&self) -> usize {
        STANDARD_COUNT + self.nonstandard_count
    }

    /// AGCOUNT.
    pub fn aggregate_count(&self) -> usize {
        self.kinds.len() - self.base_size()
    }

    /// Nonstandard bytes in id order.
    pub fn nonstandard_bytes(&self) -> impl Iterator<Item = u8> + '_ {
        self.kinds[STANDARD_COUNT..self.base_size()].iter().map(|k| match k {
            SymbolKind::Base(b) => *b,
            SymbolKind::Aggregate { .. } => unreachable!("aggregate inside base range"),
        })
    }

    pub fn symbol(&self, id: SymbolId) -> Result<Symbol, SymbolError> {
        self.kinds
            .get(id.index())
            .map(|&kind| Symbol { id, kind })
            .ok_or(SymbolError::UnknownId(id))
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.kinds
            .iter()
            .enumerate()
            .map(|(i, &kind)| Symbol { id: SymbolId(i as u32), kind })
    }

    /// Aggregates as `(left, right)` pairs in id order.
    pub fn aggregates(&self) -> impl Iterator<Item = (SymbolId, SymbolId)> + '_ {
        self.kinds[self.base_size()..].iter().map(|k| match k {
            SymbolKind::Aggregate { left, right } => (*left, *right),
            SymbolKind::Base(_) => unreachable!("base symbol inside aggregate range"),
        })
    }

    pub fn id_of_byte(&self, byte: u8) -> Option<SymbolId> {
        self.byte_to_id[byte as usize]
    }

    /// Full byte expansion of `id`.
    pub fn expand(&self, id: SymbolId) -> Result<&[u8], SymbolError> {
        self.expansions
            .get(id.index())
            .map(Vec::as_slice)
            .ok_or(SymbolError::UnknownId(id))
    }

    /// Expanded length `r` of a symbol.
    pub fn expanded_len(&self, id: SymbolId) -> Result<usize, SymbolError> {
        self.expand(id).map(<[u8]>::len)
    }

    /// `S(a_i)`: how many times each base symbol occurs in the expansion of `id`.
    pub fn char_multiplicity(&self, id: SymbolId) -> Result<BTreeMap<SymbolId, u64>, SymbolError> {
        let mut out = BTreeMap::new();
        for &b in self.expand(id)? {
            let base = self.byte_to_id[b as usize].expect("expansion bytes are base symbols");
            *out.entry(base).or_insert(0) += 1;
        }
        Ok(out)
    }
}

/// Per-symbol occurrence counts `f_x` and their sum `N`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FrequencyTable {
    counts: Vec<u64>,
    total: u64,
}

impl FrequencyTable {
    pub fn from_counts(counts: Vec<u64>) -> Self {
        let total = counts.iter().sum();
        FrequencyTable { counts, total }
    }

    /// Counts every token of `stream` over an alphabet of `alphabet_len` symbols.
    pub fn from_tokens(tokens: &[SymbolId], alphabet_len: usize) -> Self {
        let mut counts = vec![0u64; alphabet_len];
        for t in tokens {
            counts[t.index()] += 1;
        }
        FrequencyTable { counts, total: tokens.len() as u64 }
    }

    pub fn count(&self, id: SymbolId) -> u64 {
        self.counts.get(id.index()).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of symbol slots (nonzero or not).
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// `N`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn max_count(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    pub fn distinct(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

/// A message as a sequence of symbol ids.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenStream {
    pub tokens: Vec<SymbolId>,
    pub source_length_bytes: usize,
}

impl TokenStream {
    pub fn new(tokens: Vec<SymbolId>, source_length_bytes: usize) -> Self {
        TokenStream { tokens, source_length_bytes }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn frequencies(&self, alphabet: &Alphabet) -> FrequencyTable {
        FrequencyTable::from_tokens(&self.tokens, alphabet.len())
    }

    /// Concatenates the expansions of every token.
    pub fn detokenize(&self, alphabet: &Alphabet) -> Result<Vec<u8>, SymbolError> {
        let mut out = Vec::with_capacity(self.source_length_bytes);
        for &t in &self.tokens {
            out.extend_from_slice(alphabet.expand(t)?);
        }
        Ok(out)
    }
}
