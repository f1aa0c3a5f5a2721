//! The `AGSY` container and the compress/decompress pipeline.
//!
//! ```text
//! "AGSY" | version u8 | header bit length u32 BE | header (padded)
//!        | token count u32 BE | arithmetic-coded payload
//! ```

use crate::builder::{self, BuildConfig, BuildOutcome};
use crate::coder::{self, CodingModel, Payload};
use crate::error::{Error, Result};
use crate::header::{self, EncodedHeader};
use crate::symbol_model::Alphabet;
use crate::tokenizer;

pub const MAGIC: &[u8; 4] = b"AGSY";
pub const VERSION: u8 = 1;

/// Fixed framing bytes: magic, version, header length, token count.
pub const FRAMING_BYTES: usize = 4 + 1 + 4 + 4;

#[derive(Debug, Clone)]
pub struct Compressed {
    pub container: Vec<u8>,
    pub header: EncodedHeader,
    pub payload: Payload,
    pub outcome: BuildOutcome,
}

impl Compressed {
    /// Container bits that are neither header nor payload bits: fixed fields
    /// plus the header's padding.
    pub fn framing_bits(&self) -> u64 {
        (self.container.len() * 8 - self.header.bit_len - self.payload.bytes.len() * 8) as u64
    }
}

/// Header and payload views of a container.
#[derive(Debug, Clone, Copy)]
pub struct ContainerParts<'a> {
    pub version: u8,
    pub header_bits: usize,
    pub header: &'a [u8],
    pub token_count: u32,
    pub payload: &'a [u8],
}

pub fn write_container(header: &EncodedHeader, token_count: u32, payload: &[u8]) -> Result<Vec<u8>> {
    let header_bits = u32::try_from(header.bit_len).map_err(|_| Error::TooLarge(header.bit_len / 8))?;
    let mut out = Vec::with_capacity(FRAMING_BYTES + header.bytes.len() + payload.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&header_bits.to_be_bytes());
    out.extend_from_slice(&header.bytes);
    out.extend_from_slice(&token_count.to_be_bytes());
    out.extend_from_slice(payload);
    Ok(out)
}

fn take<'a>(bytes: &mut &'a [u8], n: usize, what: &'static str) -> Result<&'a [u8]> {
    if bytes.len() < n {
        return Err(Error::Truncated(what));
    }
    let (head, rest) = bytes.split_at(n);
    *bytes = rest;
    Ok(head)
}

fn be_u32(b: &[u8]) -> u32 {
    u32::from_be_bytes([b[0], b[1], b[2], b[3]])
}

pub fn parse_container(mut bytes: &[u8]) -> Result<ContainerParts<'_>> {
    let magic = take(&mut bytes, 4, "magic").map_err(|_| Error::BadMagic)?;
    if magic != MAGIC {
        return Err(Error::BadMagic);
    }
    let version = take(&mut bytes, 1, "version")?[0];
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let header_bits = be_u32(take(&mut bytes, 4, "header length")?) as usize;
    let header = take(&mut bytes, header_bits.div_ceil(8), "header")?;
    let token_count = be_u32(take(&mut bytes, 4, "token count")?);
    Ok(ContainerParts { version, header_bits, header, token_count, payload: bytes })
}

/// Builds an aggregate alphabet for `data` and writes the full container.
pub fn compress(data: &[u8], config: &BuildConfig) -> Result<Compressed> {
    if data.len() as u64 > coder::MAX_TOTAL {
        return Err(Error::TooLarge(data.len()));
    }
    let alphabet = Alphabet::for_document(data)?;
    let stream = tokenizer::tokenize_base(data, &alphabet)?;
    let outcome = builder::build(&stream, &alphabet, config)?;
    if let Some(v) = outcome.verification {
        check_tolerance(v.max_rel_dev_char_gain, 1e-9)?;
        check_tolerance(v.max_rel_dev_oracle, 1e-6)?;
    }
    encode_outcome(outcome)
}

fn check_tolerance(deviation: f64, tolerance: f64) -> Result<()> {
    if deviation > tolerance {
        return Err(Error::VerificationFailed { deviation, tolerance });
    }
    Ok(())
}

/// Serializes an already-built alphabet and stream.
pub fn encode_outcome(outcome: BuildOutcome) -> Result<Compressed> {
    let freqs = outcome.stream.frequencies(&outcome.alphabet);
    let header = header::encode_header(&outcome.alphabet, &freqs, outcome.mxbits)?;
    let model = CodingModel::new(&freqs)?;
    let payload = coder::encode(&outcome.stream, &model)?;
    let count = u32::try_from(outcome.stream.len()).map_err(|_| Error::TooLarge(outcome.stream.len()))?;
    let container = write_container(&header, count, &payload.bytes)?;
    Ok(Compressed { container, header, payload, outcome })
}

pub fn decompress(container: &[u8]) -> Result<Vec<u8>> {
    let parts = parse_container(container)?;
    let (alphabet, freqs, _mxbits) = header::decode_header(parts.header, parts.header_bits)?;
    if freqs.total() != u64::from(parts.token_count) {
        return Err(Error::TokenCountMismatch { declared: u64::from(parts.token_count), from_header: freqs.total() });
    }
    let model = CodingModel::new(&freqs)?;
    let stream = coder::decode(parts.payload, &model, parts.token_count as usize)?;
    Ok(stream.detokenize(&alphabet)?)
}
