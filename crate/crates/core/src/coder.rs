//! Static-model binary arithmetic coder.
//!
//! Integer coder with 62-bit `low`/`high` registers and deferred underflow
//! bits. Interval arithmetic runs in `u128`, so the model total may be as
//! large as [`MAX_TOTAL`] without precision trouble: every symbol costs at
//! most `~2^-30` bits above its ideal `-log2 p`, and termination adds two
//! bits plus byte padding.
//!
//! The number of tokens is not coded; the caller transmits it.

use thiserror::Error;

use crate::symbol_model::{FrequencyTable, SymbolId, TokenStream};

const PRECISION: u32 = 62;
const TOP: u64 = (1 << PRECISION) - 1;
const HALF: u64 = 1 << (PRECISION - 1);
const QUARTER: u64 = 1 << (PRECISION - 2);
const THREE_QUARTERS: u64 = HALF + QUARTER;

/// Largest model total accepted.
pub const MAX_TOTAL: u64 = 1 << 30;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoderError {
    #[error("model total {0} exceeds {MAX_TOTAL}")]
    TotalTooLarge(u64),
    #[error("model is empty but {0} tokens were requested")]
    EmptyModel(usize),
    #[error("token {position} ({id}) has zero probability in the model")]
    SymbolNotInModel { position: usize, id: SymbolId },
    #[error("payload is corrupt at token {0}")]
    Corrupt(usize),
    #[error("payload has {actual} bytes, expected {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("nonzero padding at the end of the payload")]
    NonzeroPadding,
}

/// Cumulative frequency intervals `[cum[s], cum[s+1])` partitioning `[0, total)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodingModel {
    cumulative: Vec<u64>,
}

impl CodingModel {
    pub fn new(freqs: &FrequencyTable) -> Result<Self, CoderError> {
        if freqs.total() > MAX_TOTAL {
            return Err(CoderError::TotalTooLarge(freqs.total()));
        }
        let mut cumulative = Vec::with_capacity(freqs.len() + 1);
        let mut acc = 0;
        cumulative.push(0);
        for &c in freqs.counts() {
            acc += c;
            cumulative.push(acc);
        }
        Ok(CodingModel { cumulative })
    }

    pub fn total(&self) -> u64 {
        *self.cumulative.last().unwrap()
    }

    pub fn symbols(&self) -> usize {
        self.cumulative.len() - 1
    }

    fn interval(&self, id: SymbolId) -> Option<(u64, u64)> {
        let i = id.index();
        if i + 1 >= self.cumulative.len() {
            return None;
        }
        let (lo, hi) = (self.cumulative[i], self.cumulative[i + 1]);
        (hi > lo).then_some((lo, hi))
    }

    /// Symbol whose interval contains `target`.
    fn lookup(&self, target: u64) -> usize {
        self.cumulative.partition_point(|&c| c <= target) - 1
    }

    /// Ideal static code length of a stream coded with this model, in bits.
    pub fn ideal_bits(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        let t = total as f64;
        self.cumulative
            .windows(2)
            .map(|w| (w[1] - w[0]) as f64)
            .filter(|&c| c > 0.0)
            .map(|c| c * (t / c).log2())
            .sum()
    }
}

/// Coder output: bytes, zero-padded, and the number of meaningful bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Payload {
    pub bytes: Vec<u8>,
    pub bit_len: usize,
}

struct BitSink {
    bytes: Vec<u8>,
    bit_len: usize,
}

impl BitSink {
    #[inline]
    fn push(&mut self, bit: bool) {
        if self.bit_len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 0x80 >> (self.bit_len % 8);
        }
        self.bit_len += 1;
    }

    #[inline]
    fn push_with_pending(&mut self, bit: bool, pending: &mut u64) {
        self.push(bit);
        for _ in 0..*pending {
            self.push(!bit);
        }
        *pending = 0;
    }
}

#[inline]
fn narrow(low: u64, high: u64, lo: u64, hi: u64, total: u64) -> (u64, u64) {
    let range = u128::from(high - low) + 1;
    let t = u128::from(total);
    let new_high = low + (range * u128::from(hi) / t) as u64 - 1;
    let new_low = low + (range * u128::from(lo) / t) as u64;
    (new_low, new_high)
}

pub fn encode(stream: &TokenStream, model: &CodingModel) -> Result<Payload, CoderError> {
    let mut sink = BitSink { bytes: Vec::new(), bit_len: 0 };
    if stream.is_empty() {
        return Ok(Payload { bytes: sink.bytes, bit_len: 0 });
    }
    let total = model.total();
    if total == 0 {
        return Err(CoderError::EmptyModel(stream.len()));
    }
    let (mut low, mut high, mut pending) = (0u64, TOP, 0u64);
    for (position, &id) in stream.tokens.iter().enumerate() {
        let (lo, hi) = model.interval(id).ok_or(CoderError::SymbolNotInModel { position, id })?;
        (low, high) = narrow(low, high, lo, hi, total);
        loop {
            if high < HALF {
                sink.push_with_pending(false, &mut pending);
            } else if low >= HALF {
                sink.push_with_pending(true, &mut pending);
                low -= HALF;
                high -= HALF;
            } else if low >= QUARTER && high < THREE_QUARTERS {
                pending += 1;
                low -= QUARTER;
                high -= QUARTER;
            } else {
                break;
            }
            low <<= 1;
            high = (high << 1) | 1;
        }
    }
    pending += 1;
    sink.push_with_pending(low >= QUARTER, &mut pending);
    Ok(Payload { bit_len: sink.bit_len, bytes: sink.bytes })
}

struct BitSource<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl BitSource<'_> {
    /// Next bit, or zero past the end.
    #[inline]
    fn next(&mut self) -> u64 {
        let byte = self.pos / 8;
        let bit = if byte < self.bytes.len() {
            u64::from((self.bytes[byte] >> (7 - self.pos % 8)) & 1)
        } else {
            0
        };
        self.pos += 1;
        bit
    }
}

pub fn decode(bytes: &[u8], model: &CodingModel, token_count: usize) -> Result<TokenStream, CoderError> {
    if token_count == 0 {
        if !bytes.is_empty() {
            return Err(CoderError::LengthMismatch { expected: 0, actual: bytes.len() });
        }
        return Ok(TokenStream::default());
    }
    let total = model.total();
    if total == 0 {
        return Err(CoderError::EmptyModel(token_count));
    }
    let mut src = BitSource { bytes, pos: 0 };
    let mut value = 0u64;
    for _ in 0..PRECISION {
        value = (value << 1) | src.next();
    }
    let (mut low, mut high) = (0u64, TOP);
    // Every normalisation shift corresponds to one bit the encoder emitted.
    let mut shifts = 0usize;
    let mut tokens = Vec::with_capacity(token_count);
    for position in 0..token_count {
        if value < low || value > high {
            return Err(CoderError::Corrupt(position));
        }
        let range = u128::from(high - low) + 1;
        let target = ((u128::from(value - low) + 1) * u128::from(total) - 1) / range;
        if target >= u128::from(total) {
            return Err(CoderError::Corrupt(position));
        }
        let sym = model.lookup(target as u64);
        let (lo, hi) = (model.cumulative[sym], model.cumulative[sym + 1]);
        (low, high) = narrow(low, high, lo, hi, total);
        tokens.push(SymbolId(sym as u32));
        loop {
            if high < HALF {
            } else if low >= HALF {
                low -= HALF;
                high -= HALF;
                value = value.wrapping_sub(HALF);
            } else if low >= QUARTER && high < THREE_QUARTERS {
                low -= QUARTER;
                high -= QUARTER;
                value = value.wrapping_sub(QUARTER);
            } else {
                break;
            }
            low <<= 1;
            high = (high << 1) | 1;
            value = (value << 1 | src.next()) & TOP;
            shifts += 1;
        }
    }
    let bit_len = shifts + 2;
    let expected = bit_len.div_ceil(8);
    if bytes.len() != expected {
        return Err(CoderError::LengthMismatch { expected, actual: bytes.len() });
    }
    let pad = expected * 8 - bit_len;
    if pad > 0 && bytes[expected - 1] & ((1u8 << pad) - 1) != 0 {
        return Err(CoderError::NonzeroPadding);
    }
    Ok(TokenStream::new(tokens, 0))
}
