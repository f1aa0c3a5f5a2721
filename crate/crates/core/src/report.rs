//! Machine-readable run reports (JSON and CSV).

use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use crate::builder::{BuildConfig, BuildOutcome, BuildStep, StopReason, Verification};
use crate::container::Compressed;
use crate::header::{self, AGCOUNT_FIELD};
use crate::symbol_model::{Alphabet, TokenStream};

pub const SCHEMA_VERSION: u32 = 1;

/// Column order of the per-step CSV.
pub const STEP_COLUMNS: [&str; 7] =
    ["step", "symbol_expansion_escaped", "freq", "gain_bits", "header_cost_bits", "bpc_message", "bpc_total"];

/// Column order of the per-file summary CSV.
pub const SUMMARY_COLUMNS: [&str; 14] = [
    "file",
    "input_bytes",
    "base_alphabet_size",
    "agcount",
    "initial_header_bits",
    "initial_message_bits",
    "initial_bpc_total",
    "header_bits",
    "header_bits_excl_agcount",
    "message_bits",
    "bpc_message",
    "bpc_total",
    "container_bits",
    "stop_reason",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stats {
    pub agcount: usize,
    pub header_bits: u64,
    pub header_bits_excl_agcount: u64,
    pub message_bits: f64,
    pub total_bits: f64,
    pub bpc_message: f64,
    pub bpc_total: f64,
}

impl Stats {
    fn new(agcount: usize, header_bits: u64, message_bits: f64, chars: usize) -> Self {
        let total_bits = header_bits as f64 + message_bits;
        let per = |x: f64| if chars == 0 { 0.0 } else { x / chars as f64 };
        Stats {
            agcount,
            header_bits,
            header_bits_excl_agcount: header_bits - u64::from(AGCOUNT_FIELD),
            message_bits,
            total_bits,
            bpc_message: per(message_bits),
            bpc_total: per(total_bits),
        }
    }
}

/// Actual container sizes; `total_bits = header_bits + payload_bits + framing_bits`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContainerStats {
    pub header_bits: u64,
    pub payload_bits: u64,
    pub framing_bits: u64,
    pub total_bits: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FinalStats {
    #[serde(flatten)]
    pub stats: Stats,
    pub container: ContainerStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRow {
    pub step: usize,
    pub left: u32,
    pub right: u32,
    pub symbol_expansion_escaped: String,
    pub freq: u64,
    pub r: usize,
    pub gain_bits: f64,
    pub header_cost_bits: u64,
    pub message_bits_after: f64,
    pub alphabet_bits_after: u64,
    pub bpc_message: f64,
    pub bpc_total: f64,
}

impl From<&BuildStep> for StepRow {
    fn from(s: &BuildStep) -> Self {
        StepRow {
            step: s.step_index,
            left: s.chosen.left.0,
            right: s.chosen.right.0,
            symbol_expansion_escaped: escape_bytes(&s.expansion),
            freq: s.chosen.count,
            r: s.chosen.r,
            gain_bits: s.gain_bits,
            header_cost_bits: s.header_cost_bits,
            message_bits_after: s.message_bits_after,
            alphabet_bits_after: s.alphabet_bits_after,
            bpc_message: s.bpc_message,
            bpc_total: s.bpc_total,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub input_path: String,
    pub input_bytes: usize,
    pub base_alphabet_size: usize,
    pub distinct_symbols: usize,
    pub mxbits: u32,
    pub config: BuildConfig,
    pub initial: Stats,
    pub steps: Vec<StepRow>,
    #[serde(rename = "final")]
    pub final_stats: FinalStats,
    pub stop_reason: StopReason,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<Verification>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

impl RunReport {
    pub fn new(input_path: &str, config: &BuildConfig, compressed: &Compressed, wall_clock_seconds: Option<f64>) -> Self {
        let outcome: &BuildOutcome = &compressed.outcome;
        let chars = outcome.stream.source_length_bytes;
        let numchar = outcome.alphabet.nonstandard_count();
        let initial = Stats::new(0, outcome.initial_alphabet_bits, outcome.initial_message_bits, chars);
        let agcount = outcome.alphabet.aggregate_count();
        let message_bits = outcome.steps.last().map_or(outcome.initial_message_bits, |s| s.message_bits_after);
        let header_bits = header::header_bit_size(outcome.mxbits, numchar, agcount);
        let distinct_symbols = distinct_bytes(&outcome.alphabet, &outcome.stream);
        RunReport {
            schema_version: SCHEMA_VERSION,
            input_path: input_path.to_string(),
            input_bytes: chars,
            base_alphabet_size: outcome.alphabet.base_size(),
            distinct_symbols,
            mxbits: outcome.mxbits,
            config: config.clone(),
            initial,
            steps: outcome.steps.iter().map(StepRow::from).collect(),
            final_stats: FinalStats {
                stats: Stats::new(agcount, header_bits, message_bits, chars),
                container: ContainerStats {
                    header_bits: compressed.header.bit_len as u64,
                    payload_bits: (compressed.payload.bytes.len() * 8) as u64,
                    framing_bits: compressed.framing_bits(),
                    total_bits: (compressed.container.len() * 8) as u64,
                },
            },
            stop_reason: outcome.stop_reason,
            verification: outcome.verification,
            wall_clock_seconds,
        }
    }

    pub fn to_json(&self) -> String {
        to_rounded_json(self)
    }

    pub fn write_steps_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(STEP_COLUMNS)?;
        for s in &self.steps {
            w.write_record([
                s.step.to_string(),
                s.symbol_expansion_escaped.clone(),
                s.freq.to_string(),
                fmt4(s.gain_bits),
                s.header_cost_bits.to_string(),
                fmt4(s.bpc_message),
                fmt4(s.bpc_total),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    fn summary_record(&self) -> Vec<String> {
        let f = &self.final_stats.stats;
        vec![
            self.input_path.clone(),
            self.input_bytes.to_string(),
            self.base_alphabet_size.to_string(),
            f.agcount.to_string(),
            self.initial.header_bits.to_string(),
            fmt4(self.initial.message_bits),
            fmt4(self.initial.bpc_total),
            f.header_bits.to_string(),
            f.header_bits_excl_agcount.to_string(),
            fmt4(f.message_bits),
            fmt4(f.bpc_message),
            fmt4(f.bpc_total),
            self.final_stats.container.total_bits.to_string(),
            serde_json::to_value(self.stop_reason).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default(),
        ]
    }
}

/// Distinct byte values of the original document.
fn distinct_bytes(alphabet: &Alphabet, stream: &TokenStream) -> usize {
    let freqs = stream.frequencies(alphabet);
    let mut seen = [false; 256];
    for sym in alphabet.symbols().filter(|s| freqs.count(s.id) > 0) {
        for &b in alphabet.expand(sym.id).unwrap_or_default() {
            seen[b as usize] = true;
        }
    }
    seen.iter().filter(|&&s| s).count()
}

/// Per-file summary table.
pub fn write_summary_csv<W: Write>(reports: &[RunReport], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_COLUMNS)?;
    for r in reports {
        w.write_record(r.summary_record())?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct BenchReport<'a> {
    pub schema_version: u32,
    pub files: &'a [RunReport],
}

pub fn bench_json(reports: &[RunReport]) -> String {
    to_rounded_json(&BenchReport { schema_version: SCHEMA_VERSION, files: reports })
}

pub fn fmt4(x: f64) -> String {
    format!("{x:.4}")
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64().map(round4).and_then(serde_json::Number::from_f64) {
                *n = x;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

fn to_rounded_json<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("report serializes");
    round_floats(&mut v);
    serde_json::to_string_pretty(&v).expect("report serializes")
}

/// Printable ASCII verbatim; backslash, whitespace controls and other bytes escaped.
pub fn escape_bytes(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len());
    for &b in bytes {
        match b {
            b'\\' => s.push_str("\\\\"),
            b'\n' => s.push_str("\\n"),
            b'\r' => s.push_str("\\r"),
            b'\t' => s.push_str("\\t"),
            0x20..=0x7e => s.push(b as char),
            _ => s.push_str(&format!("\\x{b:02x}")),
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escaping() {
        assert_eq!(escape_bytes(b"he"), "he");
        assert_eq!(escape_bytes(b".\n\n"), ".\\n\\n");
        assert_eq!(escape_bytes(b"a\\b\x1a"), "a\\\\b\\x1a");
    }

    #[test]
    fn floats_are_rounded_to_four_places() {
        let mut v = serde_json::json!({"a": 1.234567, "b": [2.00004, 3], "c": {"d": -0.00005}});
        round_floats(&mut v);
        assert_eq!(v["a"], 1.2346);
        assert_eq!(v["b"][0], 2.0);
        assert_eq!(v["b"][1], 3);
    }
}
