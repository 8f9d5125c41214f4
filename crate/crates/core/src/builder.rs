//! Staged construction of the respelling lattice for a reference.
//!
//! Each token of the segmented reference becomes one slot holding the
//! token's alternative spellings; the lattice is the concatenation of the
//! slots. Stages add spellings cumulatively:
//!
//! * kana: the hiragana reading and its katakana form (and the hiragana form
//!   of katakana words),
//! * kanji: dictionary kanji spellings of each hiragana spelling, chosen in
//!   context by a [`Restorer`],
//! * lexicon: every member of a spelling-equivalence class that contains one
//!   of the spellings collected so far.

use std::collections::{BTreeMap, HashSet};

use indexmap::IndexSet;
use serde::Serialize;
use thiserror::Error;

use crate::kana::{has_kanji, hira_to_kata, is_hiragana_word, is_katakana_word, kata_to_hira};
use crate::lattice::{Arc, Label, Lattice, StateId};
use crate::lexicon::VariantLexicon;
use crate::reading::{LongestMatch, ReadingDictionary, Segmenter, Token};
use crate::restore::{RestorationRequest, Restorer, DEFAULT_MARGIN, DEFAULT_MAX_CANDIDATES};
use crate::text::Normalization;
use crate::weight::{LexWeight, Semiring};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BuildError {
    #[error("reference is empty after normalization")]
    EmptyReference,
    #[error("the kanji stage needs the kana stage")]
    KanjiWithoutKana,
    #[error("the kanji stage needs a restorer")]
    MissingRestorer,
    #[error("the lexicon stage needs a variant lexicon")]
    MissingLexicon,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StageConfig {
    pub kana: bool,
    pub kanji: bool,
    pub lexicon: bool,
    pub max_candidates: usize,
    pub margin: f64,
}

impl Default for StageConfig {
    fn default() -> Self {
        StageConfig::raw()
    }
}

impl StageConfig {
    pub fn raw() -> Self {
        StageConfig {
            kana: false,
            kanji: false,
            lexicon: false,
            max_candidates: DEFAULT_MAX_CANDIDATES,
            margin: DEFAULT_MARGIN,
        }
    }

    pub fn with_kana(self) -> Self {
        StageConfig { kana: true, ..self }
    }

    pub fn with_kanji(self) -> Self {
        StageConfig {
            kana: true,
            kanji: true,
            ..self
        }
    }

    pub fn with_lexicon(self) -> Self {
        StageConfig {
            lexicon: true,
            ..self
        }
    }

    /// All stages.
    pub fn full() -> Self {
        Self::raw().with_kanji().with_lexicon()
    }

    /// raw, +kana, +kanji, +lexicon: each adds one stage to the previous.
    pub fn cumulative() -> [(&'static str, StageConfig); 4] {
        let raw = Self::raw();
        [
            ("raw", raw),
            ("+kana", raw.with_kana()),
            ("+kanji", raw.with_kanji()),
            ("+lexicon", raw.with_kanji().with_lexicon()),
        ]
    }

    pub fn validate(&self) -> Result<(), BuildError> {
        if self.kanji && !self.kana {
            return Err(BuildError::KanjiWithoutKana);
        }
        Ok(())
    }

    /// True if every stage enabled here is also enabled in `other`.
    pub fn is_subset_of(&self, other: &StageConfig) -> bool {
        (!self.kana || other.kana)
            && (!self.kanji || other.kanji)
            && (!self.lexicon || other.lexicon)
    }
}

/// Closed-class words (particles, demonstratives, copulas) that keep their
/// hiragana spelling: no katakana form and no kanji restoration.
#[derive(Clone, Debug)]
pub struct ClosedClass(HashSet<String>);

const DEFAULT_CLOSED_CLASS: &[&str] = &[
    "は",
    "が",
    "を",
    "に",
    "へ",
    "で",
    "と",
    "の",
    "も",
    "や",
    "か",
    "よ",
    "ね",
    "な",
    "わ",
    "ぞ",
    "さ",
    "から",
    "まで",
    "より",
    "だけ",
    "など",
    "しか",
    "ので",
    "のに",
    "けど",
    "って",
    "かな",
    "この",
    "その",
    "あの",
    "どの",
    "これ",
    "それ",
    "あれ",
    "どれ",
    "ここ",
    "そこ",
    "あそこ",
    "だ",
    "です",
    "ます",
    "た",
    "て",
];

impl Default for ClosedClass {
    fn default() -> Self {
        ClosedClass(DEFAULT_CLOSED_CLASS.iter().map(|s| s.to_string()).collect())
    }
}

impl ClosedClass {
    pub fn empty() -> Self {
        ClosedClass(HashSet::new())
    }

    pub fn from_words<I: IntoIterator<Item = S>, S: Into<String>>(words: I) -> Self {
        ClosedClass(words.into_iter().map(Into::into).collect())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }
}

/// Everything the stages read from. Immutable once built.
pub struct Resources {
    pub readings: ReadingDictionary,
    pub lexicon: Option<VariantLexicon>,
    pub restorer: Option<Box<dyn Restorer>>,
    pub segmenter: Box<dyn Segmenter>,
    pub closed_class: ClosedClass,
    pub normalization: Normalization,
}

impl Default for Resources {
    fn default() -> Self {
        Resources::new(ReadingDictionary::new())
    }
}

impl Resources {
    pub fn new(readings: ReadingDictionary) -> Self {
        Resources {
            readings,
            lexicon: None,
            restorer: None,
            segmenter: Box::new(LongestMatch),
            closed_class: ClosedClass::default(),
            normalization: Normalization::default(),
        }
    }

    pub fn with_lexicon(mut self, lexicon: VariantLexicon) -> Self {
        self.lexicon = Some(lexicon);
        self
    }

    pub fn with_restorer(mut self, restorer: impl Restorer + 'static) -> Self {
        self.restorer = Some(Box::new(restorer));
        self
    }

    pub fn segment(&self, text: &str) -> Vec<Token> {
        self.segmenter.segment(text, &self.readings)
    }

    pub fn check(&self, config: &StageConfig) -> Result<(), BuildError> {
        config.validate()?;
        if config.kanji && self.restorer.is_none() {
            return Err(BuildError::MissingRestorer);
        }
        if config.lexicon && self.lexicon.is_none() {
            return Err(BuildError::MissingLexicon);
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TokenVariants {
    pub token: Token,
    /// Surface first, then spellings in the order stages produced them.
    pub spellings: IndexSet<String>,
}

/// Alternative spellings for every token. A stage that fails on a token
/// only leaves that token with fewer spellings.
pub fn build_token_variants(
    tokens: &[Token],
    config: &StageConfig,
    resources: &Resources,
) -> Vec<TokenVariants> {
    let surfaces: Vec<&str> = tokens.iter().map(|t| t.surface.as_str()).collect();
    tokens
        .iter()
        .enumerate()
        .map(|(i, token)| {
            let mut spellings = IndexSet::new();
            spellings.insert(token.surface.clone());
            if token.is_lexical {
                let open = !resources.closed_class.contains(&token.surface);
                if config.kana && token.reading_known && open {
                    add_kana_spellings(token, &mut spellings);
                }
                if config.kanji && token.reading_known && open {
                    if let Some(restorer) = &resources.restorer {
                        let before = surfaces[..i].concat();
                        let after = surfaces[i + 1..].concat();
                        add_kanji_spellings(
                            &before,
                            &after,
                            config,
                            resources,
                            restorer.as_ref(),
                            &mut spellings,
                        );
                    }
                }
                if config.lexicon {
                    if let Some(lexicon) = &resources.lexicon {
                        let current: Vec<String> = spellings.iter().cloned().collect();
                        for s in current {
                            spellings.extend(lexicon.variants_of(&s));
                        }
                    }
                }
            }
            TokenVariants {
                token: token.clone(),
                spellings,
            }
        })
        .collect()
}

fn add_kana_spellings(token: &Token, spellings: &mut IndexSet<String>) {
    if is_hiragana_word(&token.reading) {
        spellings.insert(token.reading.clone());
        if let Ok(kata) = hira_to_kata(&token.reading) {
            spellings.insert(kata);
        }
    }
    if !has_kanji(&token.surface) {
        if is_hiragana_word(&token.surface) {
            if let Ok(kata) = hira_to_kata(&token.surface) {
                spellings.insert(kata);
            }
        } else if is_katakana_word(&token.surface) {
            if let Ok(hira) = kata_to_hira(&token.surface) {
                spellings.insert(hira);
            }
        }
    }
}

fn add_kanji_spellings(
    before: &str,
    after: &str,
    config: &StageConfig,
    resources: &Resources,
    restorer: &dyn Restorer,
    spellings: &mut IndexSet<String>,
) {
    let kana: Vec<String> = spellings
        .iter()
        .filter(|s| is_hiragana_word(s))
        .cloned()
        .collect();
    for spelling in kana {
        let req = RestorationRequest {
            before: before.to_string(),
            token: spelling,
            after: after.to_string(),
        };
        // A failed restoration only costs this token its kanji spellings.
        if let Ok(candidates) = restorer.restore(
            &req,
            &resources.readings,
            config.max_candidates,
            config.margin,
        ) {
            spellings.extend(candidates.into_iter().map(|c| c.surface));
        }
    }
}

/// Concatenate per-slot branches into a lattice. Spellings within a slot
/// share common prefixes; every arc weighs ⟨0, 0⟩.
pub fn assemble_lattice(variants: &[TokenVariants]) -> Lattice {
    let mut lattice = Lattice::new();
    let mut entry = lattice.add_state();
    lattice.set_start(entry);
    for slot in variants {
        let exit = lattice.add_state();
        let mut trie: BTreeMap<(StateId, char), StateId> = BTreeMap::new();
        let mut last_arcs: HashSet<(StateId, char)> = HashSet::new();
        for spelling in &slot.spellings {
            let chars: Vec<char> = spelling.chars().collect();
            let Some((&last, prefix)) = chars.split_last() else {
                continue;
            };
            let mut cur = entry;
            for &c in prefix {
                cur = match trie.get(&(cur, c)) {
                    Some(&next) => next,
                    None => {
                        let next = lattice.add_state();
                        lattice.add_arc(cur, Arc::new(Label::Char(c), LexWeight::one(), next));
                        trie.insert((cur, c), next);
                        next
                    }
                };
            }
            if last_arcs.insert((cur, last)) {
                lattice.add_arc(cur, Arc::new(Label::Char(last), LexWeight::one(), exit));
            }
        }
        entry = exit;
    }
    lattice.set_final(entry, LexWeight::one());
    lattice
}

/// A built lattice together with the intermediate stages.
#[derive(Clone, Debug)]
pub struct ReferenceLattice {
    pub normalized: String,
    pub variants: Vec<TokenVariants>,
    pub lattice: Lattice,
}

impl ReferenceLattice {
    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.variants.iter().map(|v| &v.token)
    }
}

pub fn build_reference(
    reference: &str,
    config: &StageConfig,
    resources: &Resources,
) -> Result<ReferenceLattice, BuildError> {
    resources.check(config)?;
    let normalized = resources.normalization.apply(reference);
    if normalized.is_empty() {
        return Err(BuildError::EmptyReference);
    }
    let tokens = resources.segment(&normalized);
    let variants = build_token_variants(&tokens, config, resources);
    let lattice = assemble_lattice(&variants);
    Ok(ReferenceLattice {
        normalized,
        variants,
        lattice,
    })
}

pub fn build_reference_lattice(
    reference: &str,
    config: &StageConfig,
    resources: &Resources,
) -> Result<Lattice, BuildError> {
    build_reference(reference, config, resources).map(|r| r.lattice)
}
