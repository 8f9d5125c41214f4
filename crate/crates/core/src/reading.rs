//! Reading dictionary, word segmentation and hiragana readings.

use std::collections::HashMap;
use std::io::BufRead;

use serde::Serialize;
use thiserror::Error;

use crate::kana::{has_kanji, is_hiragana_reading, is_kana, to_hiragana};
use crate::text::nfc;

#[derive(Debug, Error)]
pub enum DictError {
    #[error("reading dictionary line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("reading dictionary: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub surface: String,
    pub reading: String,
    pub frequency: u64,
}

/// Surface → (reading, frequency) entries, with an inverse index from
/// reading to surfaces. Entries keep file order.
#[derive(Clone, Debug, Default)]
pub struct ReadingDictionary {
    entries: Vec<Entry>,
    by_surface: HashMap<String, Vec<usize>>,
    by_reading: HashMap<String, Vec<usize>>,
    max_key_chars: usize,
}

impl ReadingDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parse `surface<TAB>reading<TAB>frequency` lines. Readings may be
    /// given in katakana; they are stored in hiragana.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self, DictError> {
        let mut dict = ReadingDictionary::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = |message: String| DictError::Malformed {
                line: i + 1,
                message,
            };
            let fields: Vec<&str> = line.split('\t').collect();
            let [surface, reading, frequency] = fields.as_slice() else {
                return Err(malformed(format!(
                    "expected 3 fields, found {}",
                    fields.len()
                )));
            };
            let frequency: u64 = frequency
                .trim()
                .parse()
                .map_err(|_| malformed(format!("bad frequency {frequency:?}")))?;
            dict.insert(surface, reading, frequency)
                .map_err(malformed)?;
        }
        Ok(dict)
    }

    pub fn from_tsv(text: &str) -> Result<Self, DictError> {
        Self::from_reader(text.as_bytes())
    }

    pub fn insert(&mut self, surface: &str, reading: &str, frequency: u64) -> Result<(), String> {
        let surface = nfc(surface);
        if surface.is_empty() {
            return Err("empty surface".into());
        }
        if frequency == 0 {
            return Err("frequency must be at least 1".into());
        }
        let reading = to_hiragana(&nfc(reading))
            .ok()
            .filter(|r| !r.is_empty() && is_hiragana_reading(r))
            .ok_or_else(|| format!("reading {reading:?} is not hiragana"))?;
        let id = self.entries.len();
        self.max_key_chars = self
            .max_key_chars
            .max(surface.chars().count())
            .max(reading.chars().count());
        self.by_surface.entry(surface.clone()).or_default().push(id);
        self.by_reading.entry(reading.clone()).or_default().push(id);
        self.entries.push(Entry {
            surface,
            reading,
            frequency,
        });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn contains_surface(&self, surface: &str) -> bool {
        self.by_surface.contains_key(surface)
    }

    pub fn contains_reading(&self, reading: &str) -> bool {
        self.by_reading.contains_key(reading)
    }

    /// Highest-frequency reading; earlier entries win ties.
    pub fn best_reading(&self, surface: &str) -> Option<&str> {
        let ids = self.by_surface.get(surface)?;
        let mut best = ids[0];
        for &id in &ids[1..] {
            if self.entries[id].frequency > self.entries[best].frequency {
                best = id;
            }
        }
        Some(&self.entries[best].reading)
    }

    pub fn total_frequency(&self, surface: &str) -> u64 {
        self.by_surface
            .get(surface)
            .map(|ids| ids.iter().map(|&id| self.entries[id].frequency).sum())
            .unwrap_or(0)
    }

    /// Distinct surfaces listed with exactly this reading, in file order.
    pub fn surfaces_for_reading(&self, reading: &str) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        if let Some(ids) = self.by_reading.get(reading) {
            for &id in ids {
                let s = self.entries[id].surface.as_str();
                if !out.contains(&s) {
                    out.push(s);
                }
            }
        }
        out
    }

    pub(crate) fn max_key_chars(&self) -> usize {
        self.max_key_chars
    }

    /// A word key is a dictionary surface, or a kana string whose hiragana
    /// form is a dictionary reading.
    pub fn is_word(&self, s: &str) -> bool {
        if self.by_surface.contains_key(s) {
            return true;
        }
        s.chars().all(is_kana) && to_hiragana(s).is_ok_and(|h| self.by_reading.contains_key(&h))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Token {
    pub surface: String,
    /// Hiragana (plus ー) reading, or the surface itself when unknown.
    pub reading: String,
    /// Character offsets `[start, end)` into the normalized reference.
    pub span: (usize, usize),
    /// False for punctuation, symbols, digits and Latin text.
    pub is_lexical: bool,
    /// False when no reading could be found; later stages leave the token
    /// alone.
    pub reading_known: bool,
}

impl Token {
    pub fn new(surface: &str, span: (usize, usize), dict: &ReadingDictionary) -> Self {
        let is_lexical = surface
            .chars()
            .any(|c| is_kana(c) || crate::kana::is_kanji(c));
        let dict_reading = dict.best_reading(surface).map(str::to_owned);
        let (reading, reading_known) = if let Some(r) = dict_reading.filter(|_| is_lexical) {
            (r, true)
        } else if !has_kanji(surface) && surface.chars().all(is_kana) {
            match to_hiragana(surface) {
                Ok(r) => (r, true),
                Err(_) => (surface.to_string(), false),
            }
        } else {
            (surface.to_string(), false)
        };
        Token {
            surface: surface.to_string(),
            reading,
            span,
            is_lexical,
            reading_known,
        }
    }
}

/// Splits normalized text into tokens that tile it exactly.
pub trait Segmenter: Send + Sync {
    fn segment(&self, text: &str, dict: &ReadingDictionary) -> Vec<Token>;
}

/// Greedy longest match against dictionary surfaces and kana readings;
/// anything unmatched becomes a one-character token.
#[derive(Clone, Copy, Debug, Default)]
pub struct LongestMatch;

impl Segmenter for LongestMatch {
    fn segment(&self, text: &str, dict: &ReadingDictionary) -> Vec<Token> {
        let chars: Vec<char> = text.chars().collect();
        // Byte offset of every char boundary, for cheap substring slicing.
        let mut bounds: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        bounds.push(text.len());
        let mut tokens = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let longest = dict.max_key_chars().min(chars.len() - i);
            let len = (1..=longest)
                .rev()
                .find(|&len| dict.is_word(&text[bounds[i]..bounds[i + len]]))
                .unwrap_or(1);
            tokens.push(Token::new(
                &text[bounds[i]..bounds[i + len]],
                (i, i + len),
                dict,
            ));
            i += len;
        }
        tokens
    }
}

/// Segment `reference` (already NFC) and attach readings.
pub fn segment_and_read(reference: &str, dict: &ReadingDictionary) -> Vec<Token> {
    LongestMatch.segment(reference, dict)
}
