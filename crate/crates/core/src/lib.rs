//! Preprocessing, alignment, language modeling and evaluation tools for
//! English to Indian language statistical machine translation.
//!
//! The crate covers the parts of a phrase-based SMT setup that live outside
//! the decoder:
//!
//! * [`corpus`]: normalization, tokenization, length/ratio filtering,
//!   train/dev/test splitting and corpus statistics.
//! * [`morph`]: longest-match suffix separation with a continuation marker,
//!   the inverse rejoin, and rule-table stemming.
//! * [`reorder`]: bracketed constituency trees and child-permutation rules
//!   for source-side pre-ordering.
//! * [`lm`]: interpolated modified Kneser-Ney n-gram models in ARPA format.
//! * [`align`]: IBM Model 1 EM alignment over surface or stem factors.
//! * [`translit`]: character-level transliteration of OOV words with
//!   n-best generation and language model rescoring.
//! * [`metrics`]: BLEU, PER, TER and CDER.
//! * [`pipeline`]: config-driven composition of the stages above.

pub mod align;
pub mod corpus;
mod error;
pub mod lm;
pub mod metrics;
pub mod morph;
pub mod pipeline;
pub mod reorder;
pub mod translit;

pub use error::{Error, Result};
