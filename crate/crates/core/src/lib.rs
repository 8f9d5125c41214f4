//! Lenient character error rate for Japanese speech recognition.
//!
//! A reference transcription is expanded into a lattice of valid alternative
//! spellings (hiragana and katakana readings, kanji restorations and curated
//! spelling-equivalence classes). The hypothesis is then scored against the
//! closest path of that lattice, so a valid respelling is not an error.

pub mod builder;
pub mod edit;
pub mod eval;
pub mod kana;
pub mod lattice;
pub mod lexicon;
pub mod reading;
pub mod restore;
pub mod text;
pub mod weight;

pub use builder::{
    assemble_lattice, build_reference, build_reference_lattice, build_token_variants, BuildError,
    ClosedClass, ReferenceLattice, Resources, StageConfig, TokenVariants,
};
pub use edit::{edit_distance, lenient_cer, levenshtein, AlignOp, EditCounts, EditResult, OpKind};
pub use eval::{
    corpus_evaluate, lenient_eval, naive_cer, naive_wer, EvalError, EvalOptions, EvalReport,
    Metric, UtteranceRecord,
};
pub use kana::{hira_to_kata, kata_to_hira, NotConvertible};
pub use lattice::{shortest_distance, shortest_path, Arc, Label, Lattice, LatticeError, StateId};
pub use lexicon::{LexiconError, VariantLexicon};
pub use reading::{segment_and_read, DictError, ReadingDictionary, Segmenter, Token};
pub use restore::{
    restore, serialize_tagged, Candidate, CommandRestorer, NgramModel, NgramRestorer,
    RestorationRequest, RestoreError, Restorer,
};
pub use weight::{project_lm, LexWeight, Semiring, TropicalWeight};
