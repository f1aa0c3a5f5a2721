//! Shannon code lengths and the information gain of adding an aggregate symbol.
//!
//! Two algebraically equivalent routes are provided: the frequency form
//! ([`gain_frequency_form`]), which works directly on integer counts, and the
//! probability form ([`char_gain`]), which expresses the per-character gain as
//! a difference of two entropies over the constituents of the new symbol plus
//! a correction depending only on the new symbol's probability and length.
//! [`oracle_gain`] recomputes the gain by actually rewriting the message.
//!
//! All code lengths are real-valued bits, logarithms are base 2 and
//! `0 * log2(0)` is taken to be 0.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::symbol_model::{Alphabet, FrequencyTable, SymbolError, SymbolId, TokenStream};
use crate::tokenizer::{self, AggregateCandidate};

#[derive(Debug, Error, PartialEq)]
pub enum GainError {
    #[error("frequency table is empty")]
    EmptyTable,
    #[error("aggregate must combine at least two symbols (length {0})")]
    TooShort(u64),
    #[error("constituent {constituent} occurs {available} times but the aggregate consumes {needed}")]
    Overdraw { constituent: SymbolId, needed: u64, available: u64 },
    #[error("aggregate would consume the whole message ({removed} of {total} symbols removed)")]
    ConsumesMessage { removed: u64, total: u64 },
    #[error(transparent)]
    Symbol(#[from] SymbolError),
}

/// `x * log2(x)` with the `0 log 0 = 0` convention.
#[inline]
pub fn xlog2x(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

#[inline]
fn count_xlog2x(c: u64) -> f64 {
    xlog2x(c as f64)
}

/// What a new symbol is made of, relative to the stream it will be applied
/// to: each constituent with its multiplicity `S(a_i)`, plus the number of
/// non-overlapping occurrences `f_S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Composition {
    pub count: u64,
    pub parts: BTreeMap<SymbolId, u64>,
}

impl Composition {
    pub fn new(count: u64, parts: BTreeMap<SymbolId, u64>) -> Self {
        Composition { count, parts }
    }

    pub fn pair(left: SymbolId, right: SymbolId, count: u64) -> Self {
        let mut parts = BTreeMap::new();
        *parts.entry(left).or_insert(0) += 1;
        *parts.entry(right).or_insert(0) += 1;
        Composition { count, parts }
    }

    /// Composition of a byte string over base symbols, for messages that are
    /// still in the base alphabet.
    pub fn of_bytes(alphabet: &Alphabet, s: &[u8], count: u64) -> Result<Self, SymbolError> {
        let mut parts = BTreeMap::new();
        for (position, &byte) in s.iter().enumerate() {
            let id = alphabet.id_of_byte(byte).ok_or(SymbolError::UnmappedByte { position, byte })?;
            *parts.entry(id).or_insert(0) += 1;
        }
        Ok(Composition { count, parts })
    }

    /// `r`, the number of symbols condensed into one.
    pub fn length(&self) -> u64 {
        self.parts.values().sum()
    }
}

/// Every intermediate quantity of the probability-form gain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainBreakdown {
    pub total: u64,
    pub p_s: f64,
    pub r: u64,
    pub mu_s: f64,
    pub lambda: BTreeMap<SymbolId, f64>,
    pub entropy_before: f64,
    pub entropy_after: f64,
    pub correction: f64,
    pub char_gain: f64,
    pub total_gain: f64,
}

impl GainBreakdown {
    /// `H(mu_s, p_a : a in {S})`, the first entropy of the compact form.
    pub fn joint_entropy_before(&self) -> f64 {
        self.entropy_before - xlog2x(self.mu_s)
    }

    /// `H(p_s, lambda_a : a in {S})`, the second entropy of the compact form.
    pub fn joint_entropy_after(&self) -> f64 {
        self.entropy_after - xlog2x(self.p_s)
    }
}

/// Optimal static code length of a message, `N log2 N - sum f log2 f`.
pub fn message_code_length(freqs: &FrequencyTable) -> Result<f64, GainError> {
    if freqs.total() == 0 {
        return Err(GainError::EmptyTable);
    }
    let sum: f64 = freqs.counts().iter().map(|&f| count_xlog2x(f)).sum();
    Ok(count_xlog2x(freqs.total()) - sum)
}

/// Like [`message_code_length`] but an empty message has length zero.
pub fn message_bits(freqs: &FrequencyTable) -> f64 {
    message_code_length(freqs).unwrap_or(0.0)
}

fn check_preconditions(freqs: &FrequencyTable, comp: &Composition) -> Result<u64, GainError> {
    let total = freqs.total();
    if total == 0 {
        return Err(GainError::EmptyTable);
    }
    let r = comp.length();
    if r < 2 {
        return Err(GainError::TooShort(r));
    }
    for (&constituent, &mult) in &comp.parts {
        let available = freqs.count(constituent);
        let needed = comp.count * mult;
        if needed > available {
            return Err(GainError::Overdraw { constituent, needed, available });
        }
    }
    let removed = comp.count * (r - 1);
    if removed >= total {
        return Err(GainError::ConsumesMessage { removed, total });
    }
    Ok(r)
}

/// Frequency-form gain over the whole message, in bits:
/// `N log N - N' log N' + f_S log f_S - sum f log f + sum f' log f'`.
pub fn gain_frequency_form(freqs: &FrequencyTable, comp: &Composition) -> Result<f64, GainError> {
    let r = check_preconditions(freqs, comp)?;
    Ok(frequency_form(
        freqs.total(),
        comp.count,
        r,
        comp.parts.iter().map(|(&id, &m)| (freqs.count(id), m)),
    ))
}

fn frequency_form(total: u64, count: u64, r: u64, parts: impl Iterator<Item = (u64, u64)>) -> f64 {
    let new_total = total - count * (r - 1);
    let mut g = count_xlog2x(total) - count_xlog2x(new_total) + count_xlog2x(count);
    for (f, mult) in parts {
        g += count_xlog2x(f - count * mult) - count_xlog2x(f);
    }
    g
}

/// Frequency-form gain of the adjacent pair `(left, right)` occurring `count`
/// times, without allocating. Preconditions are the caller's responsibility
/// (they hold by construction for counts taken from the stream).
#[inline]
pub fn pair_gain(freqs: &FrequencyTable, left: SymbolId, right: SymbolId, count: u64) -> f64 {
    let total = freqs.total();
    if left == right {
        frequency_form(total, count, 2, std::iter::once((freqs.count(left), 2)))
    } else {
        frequency_form(
            total,
            count,
            2,
            [(freqs.count(left), 1), (freqs.count(right), 1)].into_iter(),
        )
    }
}

/// Probability-form gain: difference of the constituent entropies before and
/// after the new symbol absorbs its occurrences, plus the rescale correction.
pub fn char_gain(freqs: &FrequencyTable, comp: &Composition) -> Result<GainBreakdown, GainError> {
    let r = check_preconditions(freqs, comp)?;
    let n = freqs.total() as f64;
    let p_s = comp.count as f64 / n;
    let mu_s = 1.0 - p_s * (r - 1) as f64;

    let mut lambda = BTreeMap::new();
    let mut entropy_before = 0.0;
    let mut entropy_after = 0.0;
    for (&id, &mult) in &comp.parts {
        let p = freqs.count(id) as f64 / n;
        let l = p - p_s * mult as f64;
        // Rounding can leave a tiny negative residue when every occurrence is consumed.
        let l = if freqs.count(id) == comp.count * mult { 0.0 } else { l };
        entropy_before -= xlog2x(p);
        entropy_after -= xlog2x(l);
        lambda.insert(id, l);
    }
    let correction = -xlog2x(mu_s) + xlog2x(p_s);
    let char_gain = entropy_before - entropy_after + correction;
    Ok(GainBreakdown {
        total: freqs.total(),
        p_s,
        r,
        mu_s,
        lambda,
        entropy_before,
        entropy_after,
        correction,
        char_gain,
        total_gain: n * char_gain,
    })
}

/// Gain measured by rewriting the stream with the candidate pair and comparing
/// optimal code lengths before and after.
pub fn oracle_gain(stream: &TokenStream, alphabet: &Alphabet, candidate: &AggregateCandidate) -> Result<f64, GainError> {
    if stream.is_empty() {
        return Ok(0.0);
    }
    let mut extended = alphabet.clone();
    let new_id = extended.push_aggregate(candidate.left, candidate.right)?;
    let before = message_code_length(&stream.frequencies(alphabet))?;
    let rewritten = tokenizer::apply_aggregate(stream, candidate.left, candidate.right, new_id);
    let after = message_code_length(&rewritten.frequencies(&extended))?;
    Ok(before - after)
}
