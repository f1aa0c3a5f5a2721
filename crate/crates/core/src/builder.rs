//! Greedy aggregate-alphabet construction.
//!
//! Each step scores every adjacent pair of the current stream with the
//! frequency-form gain, takes the best one (ties: lowest `(left, right)`), and
//! accepts it only if the gain exceeds the header cost of describing it. The
//! loop ends when nothing pays for itself or a configured limit is hit.

use rayon::prelude::*;
use serde::Serialize;

use crate::gain::{self, GainError};
use crate::header::{self, id_width};
use crate::symbol_model::{Alphabet, FrequencyTable, SymbolError, SymbolId, TokenStream, MAX_AGGREGATES};
use crate::tokenizer::{self, AggregateCandidate, PairCount};

/// How equal-gain candidates are ordered. Only one policy exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// Highest gain first, then lowest `(left id, right id)`.
    #[default]
    LowestPair,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BuildConfig {
    pub max_aggregates: Option<usize>,
    pub min_net_gain_bits: f64,
    pub stop_at_bpc: Option<f64>,
    pub tie_break: TieBreak,
    /// Cross-check every accepted gain against the probability form and a
    /// recount of the rewritten stream.
    pub verify: bool,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            max_aggregates: None,
            min_net_gain_bits: 0.0,
            stop_at_bpc: None,
            tie_break: TieBreak::LowestPair,
            verify: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildStep {
    pub step_index: usize,
    pub chosen: AggregateCandidate,
    pub new_id: SymbolId,
    pub expansion: Vec<u8>,
    pub gain_bits: f64,
    pub header_cost_bits: u64,
    pub message_bits_after: f64,
    pub alphabet_bits_after: u64,
    pub bpc_message: f64,
    pub bpc_total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    NoQualifyingCandidate,
    MaxAggregates,
    StopBpc,
    AlphabetFull,
}

/// Largest relative disagreement seen by `--verify`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Verification {
    pub steps_checked: usize,
    pub max_rel_dev_char_gain: f64,
    pub max_rel_dev_oracle: f64,
}

#[derive(Debug, Clone)]
pub struct BuildOutcome {
    pub alphabet: Alphabet,
    pub stream: TokenStream,
    pub steps: Vec<BuildStep>,
    pub stop_reason: StopReason,
    /// MXBITS used for header costs.
    pub mxbits: u32,
    pub initial_message_bits: f64,
    pub initial_alphabet_bits: u64,
    pub verification: Option<Verification>,
}

#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error(transparent)]
    Gain(#[from] GainError),
}

/// Header bits needed to describe one more aggregate on top of `alphabet`.
pub fn marginal_header_cost(alphabet: &Alphabet, freq_bits: u32) -> u64 {
    u64::from(freq_bits) + 2 * u64::from(id_width(alphabet.len()))
}

#[derive(Debug, Clone, Copy)]
struct Scored {
    gain: f64,
    pair: PairCount,
}

impl Scored {
    fn beats(&self, other: &Scored) -> bool {
        match self.gain.total_cmp(&other.gain) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => (self.pair.left, self.pair.right) < (other.pair.left, other.pair.right),
        }
    }
}

fn best_candidate(pairs: &[PairCount], freqs: &FrequencyTable) -> Option<Scored> {
    pairs
        .par_iter()
        .map(|&pair| Scored { gain: gain::pair_gain(freqs, pair.left, pair.right, pair.count), pair })
        .reduce_with(|a, b| if b.beats(&a) { b } else { a })
}

fn rel_dev(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(1.0)
}

fn per_char(bits: f64, chars: usize) -> f64 {
    if chars == 0 {
        0.0
    } else {
        bits / chars as f64
    }
}

pub fn build(stream: &TokenStream, alphabet: &Alphabet, config: &BuildConfig) -> Result<BuildOutcome, BuildError> {
    let mut alphabet = alphabet.clone();
    let mut stream = stream.clone();
    let chars = stream.source_length_bytes;
    let mut freqs = stream.frequencies(&alphabet);
    let mxbits = header::min_mxbits(&freqs);
    let numchar = alphabet.nonstandard_count();

    let mut message_bits = gain::message_bits(&freqs);
    let mut alphabet_bits = header::header_bit_size(mxbits, numchar, alphabet.aggregate_count());
    let initial_message_bits = message_bits;
    let initial_alphabet_bits = alphabet_bits;
    let mut verification = config.verify.then(Verification::default);
    let mut steps = Vec::new();

    let stop_reason = loop {
        if let Some(limit) = config.stop_at_bpc {
            if per_char(message_bits + alphabet_bits as f64, chars) <= limit {
                break StopReason::StopBpc;
            }
        }
        if config.max_aggregates.is_some_and(|m| steps.len() >= m) {
            break StopReason::MaxAggregates;
        }
        if alphabet.aggregate_count() >= MAX_AGGREGATES {
            break StopReason::AlphabetFull;
        }
        let pairs = tokenizer::count_pairs(&stream.tokens);
        let Some(best) = best_candidate(&pairs, &freqs) else {
            break StopReason::NoQualifyingCandidate;
        };
        let cost = marginal_header_cost(&alphabet, mxbits);
        if best.gain <= cost as f64 + config.min_net_gain_bits {
            break StopReason::NoQualifyingCandidate;
        }

        let PairCount { left, right, count } = best.pair;
        let chosen = AggregateCandidate::new(&alphabet, left, right, count)?;
        let check = match verification {
            Some(_) => Some(gain::char_gain(&freqs, &chosen.composition())?.total_gain),
            None => None,
        };
        let new_id = alphabet.push_aggregate(left, right)?;
        stream = tokenizer::apply_aggregate(&stream, left, right, new_id);
        freqs = stream.frequencies(&alphabet);
        let after = gain::message_bits(&freqs);

        if let (Some(v), Some(probability_form)) = (verification.as_mut(), check) {
            v.steps_checked += 1;
            v.max_rel_dev_char_gain = v.max_rel_dev_char_gain.max(rel_dev(best.gain, probability_form));
            v.max_rel_dev_oracle = v.max_rel_dev_oracle.max(rel_dev(best.gain, message_bits - after));
        }

        message_bits = after;
        alphabet_bits += cost;
        let expansion = alphabet.expand(new_id)?.to_vec();
        log::debug!(
            "step {}: {:?} x{} gain {:.1} cost {}",
            steps.len() + 1,
            String::from_utf8_lossy(&expansion),
            count,
            best.gain,
            cost
        );
        steps.push(BuildStep {
            step_index: steps.len() + 1,
            chosen,
            new_id,
            expansion,
            gain_bits: best.gain,
            header_cost_bits: cost,
            message_bits_after: message_bits,
            alphabet_bits_after: alphabet_bits,
            bpc_message: per_char(message_bits, chars),
            bpc_total: per_char(message_bits + alphabet_bits as f64, chars),
        });
    };

    Ok(BuildOutcome {
        alphabet,
        stream,
        steps,
        stop_reason,
        mxbits,
        initial_message_bits,
        initial_alphabet_bits,
        verification,
    })
}
