//! Guessing-based decoders for short binary linear codes.
//!
//! The crate covers the whole link: algebraic codes ([`code`]), BPSK and
//! 16-QAM mapping ([`modem`]), AWGN and Rayleigh channels with optional
//! channel-estimate errors ([`channel`]), ZF and exhaustive ML detection with
//! LLR output ([`detector`]), noise-pattern generators ([`guesswork`]), hard
//! GRAND and the soft-output turbo-GRAND decoder ([`decoder`]), and a Monte
//! Carlo harness with CSV and SVG output ([`sim`], [`plot`]).
//!
//! Numerical code is generic over [`scalar::Real`]; the aliases below fix
//! the scalar to `f64`, which the simulator uses.
//!
//! ```
//! use turbogrand::bits::BitWord;
//! use turbogrand::code::LinearCode;
//! use turbogrand::decoder::hard_grand;
//! use turbogrand::guesswork::hamming_source;
//!
//! let code = LinearCode::bch_127_113();
//! let sent = code.encode(&BitWord::zeros(113)).unwrap();
//! let mut received = sent.clone();
//! received.flip(5);
//! received.flip(77);
//! let out: turbogrand::Outcome = hard_grand(&received, &code, &mut hamming_source(127), 100_000);
//! assert_eq!(out.decoded, sent);
//! ```

pub mod bits;
pub mod channel;
pub mod code;
pub mod config;
pub mod decoder;
pub mod detector;
pub mod error;
pub mod guesswork;
pub mod modem;
pub mod plot;
pub mod scalar;
pub mod sim;

pub use error::{Error, Result};

pub type Llrs = detector::LlrVector<f64>;
pub type Outcome = decoder::DecodeOutcome<f64>;
pub type State = decoder::TurboState<f64>;
pub type Channel = channel::ChannelRealization<f64>;
pub type Matrix = channel::ChannelMatrix<f64>;
pub type Points = modem::Constellation<f64>;
