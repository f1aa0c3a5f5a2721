//! Containers pinned byte-for-byte; layouts are explained in FORMAT.md.

use std::path::PathBuf;

use agsy::builder::BuildConfig;
use agsy::container;

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/golden")
}

fn parse_hex(text: &str) -> Vec<u8> {
    text.split_whitespace().map(|b| u8::from_str_radix(b, 16).expect("hex byte")).collect()
}

fn check(name: &str) {
    let dir = golden_dir();
    let input = std::fs::read(dir.join(format!("{name}.txt"))).unwrap();
    let expected = parse_hex(&std::fs::read_to_string(dir.join(format!("{name}.agsy.hex"))).unwrap());
    let packed = container::compress(&input, &BuildConfig::default()).unwrap();
    assert_eq!(packed.container, expected, "{name}: container drifted from golden");
    assert_eq!(container::decompress(&expected).unwrap(), input, "{name}: golden does not decode");
}

#[test]
fn empty_input() {
    check("empty");
}

#[test]
fn single_byte() {
    check("a");
}

#[test]
fn one_aggregate() {
    check("abracadabra");
}

#[test]
fn hand_derived_single_byte_container() {
    let mut expected = b"AGSY\x01\x00\x00\x00\x5c".to_vec();
    expected.extend([0, 0, 0, 0x01, 0, 0, 0, 0, 0, 0, 0, 0]);
    expected.extend([0, 0, 0, 1, 0x40]);
    let packed = container::compress(b"a", &BuildConfig::default()).unwrap();
    assert_eq!(packed.container, expected);
}
