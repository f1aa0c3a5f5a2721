//! Lossless text compression with greedily built aggregate-symbol alphabets.
//!
//! A document is tokenized into bytes, then adjacent symbol pairs are merged
//! into new alphabet entries whenever the drop in optimal static code length
//! outweighs the bits needed to describe the entry in the header. The final
//! token stream is arithmetic-coded behind a bit-exact alphabet header.
//!
//! ```
//! use agsy::builder::BuildConfig;
//! use agsy::container::{compress, decompress};
//!
//! let text = b"the cat and the hat and the bat. ".repeat(50);
//! let packed = compress(&text, &BuildConfig::default()).unwrap();
//! assert!(packed.container.len() < text.len());
//! assert_eq!(decompress(&packed.container).unwrap(), text);
//! ```

pub mod bitio;
pub mod builder;
pub mod cli;
pub mod coder;
pub mod container;
pub mod error;
pub mod gain;
pub mod header;
pub mod report;
pub mod symbol_model;
pub mod tokenizer;

pub use error::{Error, Result};
