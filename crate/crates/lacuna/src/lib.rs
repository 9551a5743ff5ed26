//! Annotation and restoration tools for historical languages.
//!
//! The crate covers the pipeline stages for working with small, noisy
//! treebanks of pre-modern text:
//!
//! - [`corpus`]: CoNLL-U reading and writing with byte-identical round
//!   trips, plus the built-in language registry.
//! - [`subword`]: pair-merge tokenizer training, encoding, and the
//!   coverage test that decides when a language needs its own vocabulary.
//! - [`embedding`]: moving embedding rows from an old vocabulary to a
//!   new one, initializing the rest.
//! - [`lemma`]: edit rules between forms and lemmas, induced from pairs
//!   and predicted with suffix backoff; a dictionary mode for languages
//!   where rules degenerate.
//! - [`morphotag`]: part-of-speech plus morphological features as one
//!   combined label, predicted with the same backoff.
//! - [`charfill`]: restoring single lost characters from a
//!   length-bucketed candidate vocabulary.
//! - [`wordfill`]: restoring whole lost words by greedy decoding against
//!   a masked scorer, with an n-gram scorer included.
//! - [`eval`]: per-task accuracies and the summary table.
//!
//! Models serialize to versioned JSON and reload bit-for-bit; trainers
//! are deterministic given the same input.

pub mod charfill;
pub mod corpus;
pub mod embedding;
pub mod eval;
pub mod lemma;
pub mod morphotag;
pub mod subword;
mod text;
pub mod wordfill;

pub use corpus::{parse_conllu, serialize_conllu, Corpus, LanguageInfo};
pub use eval::{EvalReport, Task, TaskScore};
pub use subword::{SubwordModel, TokenizerConfig};
