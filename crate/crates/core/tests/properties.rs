use proptest::prelude::*;

use agsy::builder::{self, BuildConfig};
use agsy::coder::{self, CodingModel};
use agsy::container;
use agsy::gain::{self, Composition};
use agsy::header;
use agsy::symbol_model::{Alphabet, FrequencyTable, SymbolId, TokenStream};
use agsy::tokenizer::{self, AggregateCandidate};

/// Text over a small alphabet so pairs repeat.
fn small_text(max_len: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(prop::sample::select(b"ab cde\n*".to_vec()), 0..max_len)
}

fn base(data: &[u8]) -> (Alphabet, TokenStream) {
    let alphabet = Alphabet::for_document(data).unwrap();
    let stream = tokenizer::tokenize_base(data, &alphabet).unwrap();
    (alphabet, stream)
}

/// Applies up to `picks.len()` aggregates chosen from the occurring pairs.
fn merge_some(alphabet: &mut Alphabet, mut stream: TokenStream, picks: &[usize]) -> TokenStream {
    for &p in picks {
        let pairs = tokenizer::count_pairs(&stream.tokens);
        if pairs.is_empty() {
            break;
        }
        let pair = pairs[p % pairs.len()];
        let id = alphabet.push_aggregate(pair.left, pair.right).unwrap();
        stream = tokenizer::apply_aggregate(&stream, pair.left, pair.right, id);
    }
    stream
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn tokenize_roundtrip(data in prop::collection::vec(any::<u8>(), 0..500)) {
        let (alphabet, stream) = base(&data);
        prop_assert_eq!(stream.len(), data.len());
        prop_assert_eq!(stream.detokenize(&alphabet).unwrap(), data);
    }

    #[test]
    fn aggregates_preserve_bytes_and_shrink_by_count(data in small_text(400), picks in prop::collection::vec(any::<usize>(), 0..8)) {
        let (mut alphabet, stream) = base(&data);
        let mut current = stream;
        for &p in &picks {
            let pairs = tokenizer::count_pairs(&current.tokens);
            if pairs.is_empty() {
                break;
            }
            let pair = pairs[p % pairs.len()];
            prop_assert_eq!(pair.count, tokenizer::count_pair(&current.tokens, pair.left, pair.right));
            let id = alphabet.push_aggregate(pair.left, pair.right).unwrap();
            let next = tokenizer::apply_aggregate(&current, pair.left, pair.right, id);
            prop_assert_eq!(next.len() as u64, current.len() as u64 - pair.count);
            let freqs = next.frequencies(&alphabet);
            prop_assert_eq!(freqs.count(id), pair.count);
            prop_assert!(tokenizer::count_pair(&next.tokens, pair.left, pair.right) <= pair.count);
            current = next;
        }
        prop_assert_eq!(current.detokenize(&alphabet).unwrap(), data);
        // Expansion lengths add up to the source length.
        let total: usize = current.tokens.iter().map(|&t| alphabet.expanded_len(t).unwrap()).sum();
        prop_assert_eq!(total, current.source_length_bytes);
    }

    #[test]
    fn frequency_bookkeeping_matches_recount(data in small_text(400), picks in prop::collection::vec(any::<usize>(), 0..4), pick in any::<usize>()) {
        let (mut alphabet, stream) = base(&data);
        let stream = merge_some(&mut alphabet, stream, &picks);
        let pairs = tokenizer::count_pairs(&stream.tokens);
        prop_assume!(!pairs.is_empty());
        let pair = pairs[pick % pairs.len()];
        let before = stream.frequencies(&alphabet);
        let id = alphabet.push_aggregate(pair.left, pair.right).unwrap();
        let after = tokenizer::apply_aggregate(&stream, pair.left, pair.right, id).frequencies(&alphabet);
        // f' = f - f_S * k for constituents, f_S for the new symbol, N' = N - f_S (r - 1).
        for sym in 0..id.0 {
            let s = SymbolId(sym);
            let k = u64::from(s == pair.left) + u64::from(s == pair.right);
            prop_assert_eq!(after.count(s), before.count(s) - pair.count * k);
        }
        prop_assert_eq!(after.count(id), pair.count);
        prop_assert_eq!(after.total(), before.total() - pair.count);
    }

    #[test]
    fn gain_forms_agree(data in small_text(600), picks in prop::collection::vec(any::<usize>(), 0..4), pick in any::<usize>()) {
        let (mut alphabet, stream) = base(&data);
        let stream = merge_some(&mut alphabet, stream, &picks);
        let pairs = tokenizer::count_pairs(&stream.tokens);
        prop_assume!(!pairs.is_empty() && stream.len() >= 2);
        let pair = pairs[pick % pairs.len()];
        let cand = AggregateCandidate::new(&alphabet, pair.left, pair.right, pair.count).unwrap();
        let freqs = stream.frequencies(&alphabet);
        let g = gain::gain_frequency_form(&freqs, &cand.composition()).unwrap();
        let fast = gain::pair_gain(&freqs, pair.left, pair.right, pair.count);
        let b = gain::char_gain(&freqs, &cand.composition()).unwrap();
        let oracle = gain::oracle_gain(&stream, &alphabet, &cand).unwrap();
        let scale = g.abs().max(1.0);
        prop_assert!((g - fast).abs() <= 1e-9 * scale);
        prop_assert!((g - b.total_gain).abs() <= 1e-9 * scale);
        prop_assert!((g - freqs.total() as f64 * b.char_gain).abs() <= 1e-9 * scale);
        prop_assert!((g - oracle).abs() <= 1e-6 * scale);
    }

    #[test]
    fn scaling_counts_scales_gain(counts in prop::collection::vec(1u64..500, 2..12), l in any::<usize>(), r in any::<usize>(), k in 2u64..6) {
        let n = counts.len();
        let (left, right) = (SymbolId((l % n) as u32), SymbolId((r % n) as u32));
        let limit = if left == right { counts[left.index()] / 2 } else { counts[left.index()].min(counts[right.index()]) };
        prop_assume!(limit >= 1);
        let fs = 1 + (l as u64 ^ r as u64) % limit;
        let freqs = FrequencyTable::from_counts(counts.clone());
        let scaled = FrequencyTable::from_counts(counts.iter().map(|c| c * k).collect());
        let comp = Composition::pair(left, right, fs);
        let comp_k = Composition::pair(left, right, fs * k);
        let g = gain::gain_frequency_form(&freqs, &comp).unwrap();
        let gk = gain::gain_frequency_form(&scaled, &comp_k).unwrap();
        prop_assert!((gk - k as f64 * g).abs() <= 1e-9 * gk.abs().max(1.0));
        let c = gain::char_gain(&freqs, &comp).unwrap().char_gain;
        let ck = gain::char_gain(&scaled, &comp_k).unwrap().char_gain;
        prop_assert!((c - ck).abs() <= 1e-12);
    }

    #[test]
    fn untouched_symbols_do_not_change_gain(counts in prop::collection::vec(1u64..500, 3..10), extra in 1u64..1000) {
        // Adding occurrences of a symbol outside the pair changes the gain only
        // through N; the pair counts themselves stay put.
        let freqs = FrequencyTable::from_counts(counts.clone());
        let fs = counts[0].min(counts[1]);
        let comp = Composition::pair(SymbolId(0), SymbolId(1), fs);
        let g = gain::gain_frequency_form(&freqs, &comp).unwrap();
        let mut bumped = counts.clone();
        *bumped.last_mut().unwrap() += extra;
        let g2 = gain::gain_frequency_form(&FrequencyTable::from_counts(bumped.clone()), &comp).unwrap();
        let n = counts.iter().sum::<u64>() as f64;
        let n2 = bumped.iter().sum::<u64>() as f64;
        let xl = gain::xlog2x;
        let via_n = (xl(n2) - xl(n2 - fs as f64)) - (xl(n) - xl(n - fs as f64));
        prop_assert!((g2 - g - via_n).abs() <= 1e-7 * g.abs().max(1.0));
    }

    #[test]
    fn header_roundtrip_and_size(data in prop::collection::vec(any::<u8>(), 1..600), picks in prop::collection::vec(any::<usize>(), 0..12)) {
        let (mut alphabet, stream) = base(&data);
        let stream = merge_some(&mut alphabet, stream, &picks);
        let freqs = stream.frequencies(&alphabet);
        let mxbits = header::min_mxbits(&freqs);
        let encoded = header::encode_header(&alphabet, &freqs, mxbits).unwrap();
        prop_assert_eq!(encoded.bit_len as u64,
            header::header_bit_size(mxbits, alphabet.nonstandard_count(), alphabet.aggregate_count()));
        prop_assert_eq!(encoded.bytes.len(), encoded.bit_len.div_ceil(8));
        let (a2, f2, m2) = header::decode_header(&encoded.bytes, encoded.bit_len).unwrap();
        prop_assert_eq!(m2, mxbits);
        prop_assert_eq!(f2.counts(), freqs.counts());
        prop_assert_eq!(a2.aggregates().collect::<Vec<_>>(), alphabet.aggregates().collect::<Vec<_>>());
        prop_assert_eq!(a2.nonstandard_bytes().collect::<Vec<_>>(), alphabet.nonstandard_bytes().collect::<Vec<_>>());
    }

    #[test]
    fn coder_roundtrip_near_entropy(tokens in prop::collection::vec(0u32..20, 0..3000)) {
        let stream = TokenStream::new(tokens.iter().map(|&t| SymbolId(t)).collect(), tokens.len());
        let freqs = FrequencyTable::from_tokens(&stream.tokens, 20);
        let model = CodingModel::new(&freqs).unwrap();
        let payload = coder::encode(&stream, &model).unwrap();
        let decoded = coder::decode(&payload.bytes, &model, stream.len()).unwrap();
        prop_assert_eq!(&decoded.tokens, &stream.tokens);
        let ideal = gain::message_bits(&freqs);
        let bits = (payload.bytes.len() * 8) as f64;
        prop_assert!(bits >= ideal - 1e-6);
        prop_assert!(bits <= ideal + 64.0);
    }

    #[test]
    fn compress_decompress_roundtrip(data in prop::collection::vec(any::<u8>(), 0..1500)) {
        let packed = container::compress(&data, &BuildConfig::default()).unwrap();
        prop_assert_eq!(container::decompress(&packed.container).unwrap(), data);
    }

    #[test]
    fn accepted_steps_pay_for_themselves(data in small_text(1500)) {
        let (alphabet, stream) = base(&data);
        let out = builder::build(&stream, &alphabet, &BuildConfig::default()).unwrap();
        let mut prev_bits = out.initial_message_bits;
        for s in &out.steps {
            prop_assert!(s.gain_bits > s.header_cost_bits as f64);
            prop_assert!((prev_bits - s.message_bits_after - s.gain_bits).abs() <= 1e-6 * s.gain_bits.max(1.0));
            prev_bits = s.message_bits_after;
        }
    }

    #[test]
    fn corrupted_containers_never_panic(data in small_text(300), flips in prop::collection::vec((any::<usize>(), 0u8..8), 1..4), cut in any::<usize>()) {
        let packed = container::compress(&data, &BuildConfig::default()).unwrap().container;
        let mut bad = packed.clone();
        for (pos, bit) in flips {
            let i = pos % bad.len();
            bad[i] ^= 1 << bit;
        }
        let _ = container::decompress(&bad);
        prop_assert!(container::decompress(&packed[..cut % packed.len()]).is_err());
    }
}
