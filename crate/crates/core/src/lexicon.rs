//! Curated spelling-equivalence classes.
//!
//! Every member of a class can replace any other member without looking at
//! context. Classes must be disjoint: a spelling listed in two classes is a
//! load error, never a merge.

use std::collections::HashMap;
use std::io::BufRead;

use serde::Serialize;
use thiserror::Error;

use crate::text::nfc;

#[derive(Clone, Debug, Error, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum LexiconError {
    #[error("line {line}: {spelling:?} already belongs to the class on line {first_line}")]
    DuplicateSpelling {
        line: usize,
        spelling: String,
        first_line: usize,
    },
    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("lexicon: {message}")]
    Io { message: String },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VariantLexicon {
    classes: Vec<Vec<String>>,
    index: HashMap<String, usize>,
}

/// Outcome of a lenient load: the accepted classes plus one diagnostic per
/// rejected line.
#[derive(Clone, Debug, Default)]
pub struct LoadReport {
    pub lexicon: VariantLexicon,
    pub rejected: Vec<LexiconError>,
}

impl VariantLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Strict load: the first rejected line is an error.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self, LexiconError> {
        let report = Self::load_lenient(reader)?;
        match report.rejected.into_iter().next() {
            Some(err) => Err(err),
            None => Ok(report.lexicon),
        }
    }

    pub fn from_tsv(text: &str) -> Result<Self, LexiconError> {
        Self::from_reader(text.as_bytes())
    }

    /// Load every valid line and collect diagnostics for the rest.
    pub fn load_lenient<R: BufRead>(reader: R) -> Result<LoadReport, LexiconError> {
        let mut lexicon = VariantLexicon::new();
        let mut class_lines: Vec<usize> = Vec::new();
        let mut rejected = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| LexiconError::Io {
                message: e.to_string(),
            })?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let members: Vec<String> = line.split('\t').map(nfc).collect();
            if let Err(err) = validate_members(&members, line_no) {
                rejected.push(err);
                continue;
            }
            if let Some(dup) = members.iter().find(|m| lexicon.index.contains_key(*m)) {
                rejected.push(LexiconError::DuplicateSpelling {
                    line: line_no,
                    spelling: dup.clone(),
                    first_line: class_lines[lexicon.index[dup]],
                });
                continue;
            }
            class_lines.push(line_no);
            lexicon.push_class(members);
        }
        Ok(LoadReport { lexicon, rejected })
    }

    fn push_class(&mut self, members: Vec<String>) {
        let id = self.classes.len();
        for m in &members {
            self.index.insert(m.clone(), id);
        }
        self.classes.push(members);
    }

    /// Add a class programmatically, with the same validation as loading.
    pub fn add_class<S: AsRef<str>>(&mut self, members: &[S]) -> Result<(), LexiconError> {
        let members: Vec<String> = members.iter().map(|m| nfc(m.as_ref())).collect();
        validate_members(&members, 0)?;
        if let Some(dup) = members.iter().find(|m| self.index.contains_key(*m)) {
            return Err(LexiconError::DuplicateSpelling {
                line: 0,
                spelling: dup.clone(),
                first_line: 0,
            });
        }
        self.push_class(members);
        Ok(())
    }

    pub fn classes(&self) -> &[Vec<String>] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// The class containing `spelling`, or just `spelling` when unlisted.
    pub fn variants_of(&self, spelling: &str) -> Vec<String> {
        match self.index.get(spelling) {
            Some(&id) => self.classes[id].clone(),
            None => vec![spelling.to_string()],
        }
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for class in &self.classes {
            out.push_str(&class.join("\t"));
            out.push('\n');
        }
        out
    }
}

fn validate_members(members: &[String], line: usize) -> Result<(), LexiconError> {
    let malformed = |message: String| LexiconError::MalformedLine { line, message };
    if members.len() < 2 {
        return Err(malformed("a class needs at least two spellings".into()));
    }
    for (i, m) in members.iter().enumerate() {
        if m.is_empty() {
            return Err(malformed("empty spelling".into()));
        }
        if members[..i].contains(m) {
            return Err(malformed(format!("{m:?} repeated within the class")));
        }
    }
    Ok(())
}
