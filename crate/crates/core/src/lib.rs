//! Polar-code encoding and CRC-aided successive-cancellation list decoding
//! with two interchangeable list-pruning strategies: exact sorting and a
//! double-threshold rule that replaces the sort with two parallel
//! comparisons against order statistics of the previous path metrics.
//!
//! The crate is organised bottom-up:
//!
//! * [`polar_code`]: code description, frozen-set construction and loading,
//!   CRC attachment, the `F^{⊗n}` encoder and frozen-sibling enumeration.
//! * [`channel`]: BPSK over AWGN, channel LLRs and fixed-point quantization.
//! * [`sc`]: f/g node kernels, scheduling-tree traversal and the plain SC
//!   decoder.
//! * [`pruning`]: sort-based and double-threshold list pruning plus the
//!   threshold-tracking networks (median, maximum, second maximum).
//! * [`list`]: the list decoder with lazy (copy-on-write) path memories and
//!   the frozen-sibling metric shortcut.
//! * [`latency`]: closed-form and cycle-stepped latency of the hardware
//!   schedule, and throughput.
//! * [`sim`] / [`cli`]: Monte Carlo FER/BER harness and the `polar-sim`
//!   command line.
//!
//! ```
//! use polar_dts::{channel, list::{DecoderConfig, SclDecoder}, polar_code::PolarCode};
//!
//! let code = PolarCode::construct(6, 32, 8, 2.0).unwrap();
//! let info = vec![1u8; code.payload_len()];
//! let u = code.assemble_source_word(&info).unwrap();
//! let x = code.encode(&u);
//! let llr = channel::channel_llr(&channel::modulate(&x), 0.0);
//!
//! let mut dec = SclDecoder::new(&code, DecoderConfig::dts(8)).unwrap();
//! let out = dec.decode(&llr);
//! assert_eq!(out.source_word, u);
//! assert!(out.crc_ok);
//! ```

pub mod arith;
pub mod channel;
pub mod cli;
pub mod crc;
pub mod error;
pub mod latency;
pub mod list;
pub mod polar_code;
pub mod pruning;
pub mod sc;
pub mod sim;

pub use error::{Error, Result};
