//! Bit-exact alphabet header.
//!
//! Layout, all fields MSB-first, zero-padded to a byte boundary at the end:
//!
//! | field            | width                                  |
//! |------------------|----------------------------------------|
//! | MXBITS - 1       | 5                                      |
//! | standard freqs   | 64 x MXBITS                            |
//! | NUMCHAR          | 8                                      |
//! | nonstandard      | NUMCHAR x (8-bit byte + MXBITS freq)   |
//! | AGCOUNT          | 15                                     |
//! | aggregates       | AGCOUNT x (2 x w_j id + MXBITS freq)   |
//!
//! `w_j = ceil(log2(64 + NUMCHAR + j))` for the j-th aggregate, i.e. wide
//! enough to name any symbol defined before it. Frequencies are the counts of
//! each symbol in the coded token stream.

use thiserror::Error;

use crate::bitio::{BitReader, BitWriter};
use crate::symbol_model::{
    Alphabet, FrequencyTable, SymbolError, SymbolId, MAX_AGGREGATES, MAX_NONSTANDARD, STANDARD_CHARS,
    STANDARD_COUNT,
};

pub const MXBITS_FIELD: u32 = 5;
pub const NUMCHAR_FIELD: u32 = 8;
pub const AGCOUNT_FIELD: u32 = 15;
pub const MAX_MXBITS: u32 = 32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HeaderError {
    #[error("header ends early: needed {needed} more bits at bit {at}")]
    Truncated { at: usize, needed: u32 },
    #[error("MXBITS must be in 1..=32, got {0}")]
    BadMxbits(u32),
    #[error("frequency {count} of {id} does not fit in {mxbits} bits")]
    FrequencyOverflow { id: SymbolId, count: u64, mxbits: u32 },
    #[error("frequency table has {table} entries but the alphabet has {alphabet}")]
    TableMismatch { table: usize, alphabet: usize },
    #[error("too many nonstandard characters: {0}")]
    TooManyNonstandard(usize),
    #[error("too many aggregate symbols: {0}")]
    TooManyAggregates(usize),
    #[error("nonstandard byte 0x{0:02x} is duplicated, standard, or out of order")]
    BadNonstandard(u8),
    #[error("aggregate {index} references symbol {id}, but only {defined} symbols precede it")]
    BadReference { index: usize, id: u64, defined: usize },
    #[error("{0} unexpected bits after the header")]
    TrailingBits(usize),
    #[error("header declares {bit_len} bits but {bytes} bytes were supplied")]
    LengthMismatch { bit_len: usize, bytes: usize },
    #[error("nonzero padding after the header")]
    NonzeroPadding,
    #[error(transparent)]
    Symbol(#[from] SymbolError),
}

/// A header bit string: padded bytes plus the meaningful bit count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedHeader {
    pub bytes: Vec<u8>,
    pub bit_len: usize,
}

/// Bits needed to name any of `size` symbols, `ceil(log2(size))`.
pub fn id_width(size: usize) -> u32 {
    if size <= 1 {
        0
    } else {
        usize::BITS - (size - 1).leading_zeros()
    }
}

/// Smallest MXBITS able to hold every count of `freqs` (at least 1).
pub fn min_mxbits(freqs: &FrequencyTable) -> u32 {
    let max = freqs.max_count();
    (u64::BITS - max.leading_zeros()).max(1)
}

/// Closed-form header size sans AGCOUNT and aggregates:
/// `5 + 64*MXBITS + 8 + NUMCHAR*(8 + MXBITS)`.
pub fn base_tally_bits(mxbits: u32, numchar: usize) -> u64 {
    let mx = u64::from(mxbits);
    u64::from(MXBITS_FIELD) + STANDARD_COUNT as u64 * mx + u64::from(NUMCHAR_FIELD) + numchar as u64 * (8 + mx)
}

/// Bits taken by the `j`-th aggregate entry.
pub fn aggregate_entry_bits(mxbits: u32, base_size: usize, j: usize) -> u64 {
    u64::from(mxbits) + 2 * u64::from(id_width(base_size + j))
}

/// Closed-form total header size before padding.
pub fn header_bit_size(mxbits: u32, numchar: usize, agcount: usize) -> u64 {
    let base_size = STANDARD_COUNT + numchar;
    base_tally_bits(mxbits, numchar)
        + u64::from(AGCOUNT_FIELD)
        + (0..agcount).map(|j| aggregate_entry_bits(mxbits, base_size, j)).sum::<u64>()
}

pub fn encode_header(alphabet: &Alphabet, freqs: &FrequencyTable, mxbits: u32) -> Result<EncodedHeader, HeaderError> {
    if !(1..=MAX_MXBITS).contains(&mxbits) {
        return Err(HeaderError::BadMxbits(mxbits));
    }
    if freqs.len() != alphabet.len() {
        return Err(HeaderError::TableMismatch { table: freqs.len(), alphabet: alphabet.len() });
    }
    if alphabet.nonstandard_count() > MAX_NONSTANDARD {
        return Err(HeaderError::TooManyNonstandard(alphabet.nonstandard_count()));
    }
    if alphabet.aggregate_count() > MAX_AGGREGATES {
        return Err(HeaderError::TooManyAggregates(alphabet.aggregate_count()));
    }
    let limit = if mxbits == 64 { u64::MAX } else { (1u64 << mxbits) - 1 };
    for (i, &count) in freqs.counts().iter().enumerate() {
        if count > limit {
            return Err(HeaderError::FrequencyOverflow { id: SymbolId(i as u32), count, mxbits });
        }
    }

    let counts = freqs.counts();
    let mut w = BitWriter::new();
    w.write_bits(u64::from(mxbits - 1), MXBITS_FIELD);
    for &count in &counts[..STANDARD_COUNT] {
        w.write_bits(count, mxbits);
    }
    w.write_bits(alphabet.nonstandard_count() as u64, NUMCHAR_FIELD);
    for (byte, &count) in alphabet.nonstandard_bytes().zip(&counts[STANDARD_COUNT..alphabet.base_size()]) {
        w.write_bits(u64::from(byte), 8);
        w.write_bits(count, mxbits);
    }
    w.write_bits(alphabet.aggregate_count() as u64, AGCOUNT_FIELD);
    let base_size = alphabet.base_size();
    for (j, ((left, right), &count)) in alphabet.aggregates().zip(&counts[base_size..]).enumerate() {
        let width = id_width(base_size + j);
        w.write_bits(u64::from(left.0), width);
        w.write_bits(u64::from(right.0), width);
        w.write_bits(count, mxbits);
    }
    let (bytes, bit_len) = w.finish();
    Ok(EncodedHeader { bytes, bit_len })
}

fn read(r: &mut BitReader<'_>, width: u32) -> Result<u64, HeaderError> {
    let at = r.position();
    r.read_bits(width).ok_or(HeaderError::Truncated { at, needed: width })
}

/// Inverse of [`encode_header`]. `bytes` must hold exactly the padded header.
pub fn decode_header(bytes: &[u8], bit_len: usize) -> Result<(Alphabet, FrequencyTable, u32), HeaderError> {
    if bytes.len() != bit_len.div_ceil(8) {
        return Err(HeaderError::LengthMismatch { bit_len, bytes: bytes.len() });
    }
    let pad = bytes.len() * 8 - bit_len;
    if pad > 0 && bytes[bytes.len() - 1] & ((1u8 << pad) - 1) != 0 {
        return Err(HeaderError::NonzeroPadding);
    }
    let mut r = BitReader::new(bytes, bit_len);

    let mxbits = read(&mut r, MXBITS_FIELD)? as u32 + 1;
    let mut counts = Vec::with_capacity(STANDARD_COUNT);
    for _ in 0..STANDARD_COUNT {
        counts.push(read(&mut r, mxbits)?);
    }
    let numchar = read(&mut r, NUMCHAR_FIELD)? as usize;
    let mut extra = Vec::with_capacity(numchar);
    for _ in 0..numchar {
        let byte = read(&mut r, 8)? as u8;
        let ordered = extra.last().is_none_or(|&prev| prev < byte);
        if !ordered || STANDARD_CHARS.contains(&byte) {
            return Err(HeaderError::BadNonstandard(byte));
        }
        extra.push(byte);
        counts.push(read(&mut r, mxbits)?);
    }
    let mut alphabet = Alphabet::with_nonstandard(&extra)?;
    let agcount = read(&mut r, AGCOUNT_FIELD)? as usize;
    for index in 0..agcount {
        let defined = alphabet.len();
        let width = id_width(defined);
        let left = read(&mut r, width)?;
        let right = read(&mut r, width)?;
        for id in [left, right] {
            if id as usize >= defined {
                return Err(HeaderError::BadReference { index, id, defined });
            }
        }
        alphabet.push_aggregate(SymbolId(left as u32), SymbolId(right as u32))?;
        counts.push(read(&mut r, mxbits)?);
    }
    if r.remaining() > 0 {
        return Err(HeaderError::TrailingBits(r.remaining()));
    }
    Ok((alphabet, FrequencyTable::from_counts(counts), mxbits))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn id_widths() {
        assert_eq!(id_width(72), 7);
        assert_eq!(id_width(128), 7);
        assert_eq!(id_width(129), 8);
        assert_eq!(id_width(64), 6);
        assert_eq!(id_width(65), 7);
    }

    #[test]
    fn closed_form_sizes() {
        assert_eq!(base_tally_bits(15, 8), 1157);
        assert_eq!(header_bit_size(15, 8, 0), 1172);
        assert_eq!(header_bit_size(15, 8, 1) - header_bit_size(15, 8, 0), 29);
        assert_eq!(header_bit_size(1, 0, 0), 92);
    }

    #[test]
    fn empty_document_header() {
        let a = Alphabet::standard();
        let f = FrequencyTable::from_counts(vec![0; 64]);
        assert_eq!(min_mxbits(&f), 1);
        let h = encode_header(&a, &f, 1).unwrap();
        assert_eq!(h.bit_len, 92);
        assert_eq!(h.bytes.len(), 12);
        let (a2, f2, mx) = decode_header(&h.bytes, h.bit_len).unwrap();
        assert_eq!((a2, f2, mx), (a, f, 1));
    }

    fn sample() -> (Alphabet, FrequencyTable) {
        let mut a = Alphabet::with_nonstandard(b"*'").unwrap();
        let x = a.push_aggregate(SymbolId(26), SymbolId(64)).unwrap();
        a.push_aggregate(x, x).unwrap();
        let mut counts = vec![0u64; a.len()];
        counts[0] = 5;
        counts[26] = 1000;
        counts[64] = 3;
        counts[66] = 7;
        counts[67] = 1;
        (a, FrequencyTable::from_counts(counts))
    }

    #[test]
    fn round_trip_with_aggregates() {
        let (a, f) = sample();
        let h = encode_header(&a, &f, 10).unwrap();
        assert_eq!(h.bit_len as u64, header_bit_size(10, 2, 2));
        let (a2, f2, mx) = decode_header(&h.bytes, h.bit_len).unwrap();
        assert_eq!(a2, a);
        assert_eq!(f2, f);
        assert_eq!(mx, 10);
    }

    #[test]
    fn overflow_and_capacity_errors() {
        let (a, f) = sample();
        assert!(matches!(encode_header(&a, &f, 9), Err(HeaderError::FrequencyOverflow { .. })));
        assert_eq!(encode_header(&a, &f, 0), Err(HeaderError::BadMxbits(0)));
        let short = FrequencyTable::from_counts(vec![0; 3]);
        assert!(matches!(encode_header(&a, &short, 10), Err(HeaderError::TableMismatch { .. })));
    }

    #[test]
    fn decode_rejects_malformed_input() {
        let (a, f) = sample();
        let h = encode_header(&a, &f, 11).unwrap();
        assert_ne!(h.bit_len % 8, 0);
        // Truncation.
        let cut = h.bit_len - 12;
        let mut bytes = h.bytes[..cut.div_ceil(8)].to_vec();
        let pad = bytes.len() * 8 - cut;
        *bytes.last_mut().unwrap() &= !((1u8 << pad) - 1);
        assert!(matches!(decode_header(&bytes, cut), Err(HeaderError::Truncated { .. })));
        // Declared length disagrees with the bytes.
        assert!(matches!(decode_header(&h.bytes, h.bit_len + 16), Err(HeaderError::LengthMismatch { .. })));
        // Garbage in the padding.
        let mut padded = h.bytes.clone();
        *padded.last_mut().unwrap() |= 1;
        assert_eq!(decode_header(&padded, h.bit_len), Err(HeaderError::NonzeroPadding));
    }

    #[test]
    fn decode_rejects_forward_reference() {
        // Hand-built header: mxbits 1, zero freqs, one nonstandard byte, one
        // aggregate referencing id 65 (only 0..65 exist).
        let mut w = BitWriter::new();
        w.write_bits(0, 5);
        w.write_bits(0, 64);
        w.write_bits(1, 8);
        w.write_bits(u64::from(b'*'), 8);
        w.write_bits(0, 1);
        w.write_bits(1, 15);
        w.write_bits(65, 7);
        w.write_bits(0, 7);
        w.write_bits(0, 1);
        let (bytes, len) = w.finish();
        assert_eq!(
            decode_header(&bytes, len),
            Err(HeaderError::BadReference { index: 0, id: 65, defined: 65 })
        );
    }

    #[test]
    fn decode_rejects_standard_byte_declared_nonstandard() {
        let mut w = BitWriter::new();
        w.write_bits(0, 5);
        w.write_bits(0, 64);
        w.write_bits(1, 8);
        w.write_bits(u64::from(b'a'), 8);
        w.write_bits(0, 1);
        w.write_bits(0, 15);
        let (bytes, len) = w.finish();
        assert_eq!(decode_header(&bytes, len), Err(HeaderError::BadNonstandard(b'a')));
    }
}
