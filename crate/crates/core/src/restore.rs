//! Kanji restoration: proposing kanji respellings of kana words in context.
//!
//! The request wire format is the tagged sentence produced by
//! [`serialize_tagged`]. The bundled [`NgramRestorer`] scores dictionary
//! candidates with a character n-gram model; [`CommandRestorer`] hands the
//! tagged sentence to an external process instead.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use serde::Serialize;
use thiserror::Error;

use crate::reading::ReadingDictionary;
use crate::text::nfc;

pub const OPEN_TAG: &str = "<to_kanji>";
pub const CLOSE_TAG: &str = "</to_kanji>";

pub const DEFAULT_ORDER: usize = 3;
pub const DEFAULT_MAX_CANDIDATES: usize = 4;
pub const DEFAULT_MARGIN: f64 = 2.0;
/// Add-k smoothing constant.
pub const ADD_K: f64 = 0.1;

const BOS: char = '\u{2}';
const EOS: char = '\u{3}';
const BOS_TEXT: &str = "<s>";
const EOS_TEXT: &str = "</s>";

#[derive(Debug, Error)]
pub enum RestoreError {
    #[error("n-gram corpus has no non-empty lines")]
    EmptyCorpus,
    #[error("n-gram order must be at least 1")]
    ZeroOrder,
    #[error("n-gram model line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("restorer plugin: {0}")]
    Plugin(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RestorationRequest {
    pub before: String,
    pub token: String,
    pub after: String,
}

impl RestorationRequest {
    pub fn new(before: &str, token: &str, after: &str) -> Self {
        RestorationRequest {
            before: before.to_string(),
            token: token.to_string(),
            after: after.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Candidate {
    pub surface: String,
    /// Negative log probability; lower is better.
    pub score: f64,
}

/// `before<to_kanji>token</to_kanji>after`
pub fn serialize_tagged(req: &RestorationRequest) -> String {
    let mut out = String::with_capacity(
        req.before.len() + req.token.len() + req.after.len() + OPEN_TAG.len() + CLOSE_TAG.len(),
    );
    out.push_str(&req.before);
    out.push_str(OPEN_TAG);
    out.push_str(&req.token);
    out.push_str(CLOSE_TAG);
    out.push_str(&req.after);
    out
}

/// Character n-gram counts for orders 1..=order over sentences padded with
/// `order - 1` start symbols and one end symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct NgramModel {
    order: usize,
    counts: HashMap<String, u64>,
    vocab: usize,
    total_tokens: u64,
}

impl NgramModel {
    pub fn train<I, S>(corpus: I, order: usize) -> Result<Self, RestoreError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        if order == 0 {
            return Err(RestoreError::ZeroOrder);
        }
        let mut counts: HashMap<String, u64> = HashMap::new();
        let mut sentences = 0usize;
        let mut padded: Vec<char> = Vec::new();
        for line in corpus {
            let line = nfc(line.as_ref().trim_end_matches(['\r', '\n']));
            if line.is_empty() {
                continue;
            }
            sentences += 1;
            padded.clear();
            padded.extend(std::iter::repeat_n(BOS, order - 1));
            padded.extend(line.chars());
            padded.push(EOS);
            for n in 1..=order {
                for window in padded.windows(n) {
                    *counts.entry(window.iter().collect()).or_default() += 1;
                }
            }
        }
        if sentences == 0 {
            return Err(RestoreError::EmptyCorpus);
        }
        Ok(Self::from_counts(order, counts))
    }

    fn from_counts(order: usize, counts: HashMap<String, u64>) -> Self {
        let mut vocab = 0;
        let mut total_tokens = 0;
        for (gram, &c) in &counts {
            let mut it = gram.chars();
            if let (Some(sym), None) = (it.next(), it.next()) {
                if sym != BOS {
                    vocab += 1;
                    total_tokens += c;
                }
            }
        }
        NgramModel {
            order,
            counts,
            vocab: vocab.max(1),
            total_tokens,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Predictable symbols seen in training, including the end symbol.
    pub fn vocab_size(&self) -> usize {
        self.vocab
    }

    /// Number of predicted symbols (characters plus one end symbol per
    /// sentence).
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn total_gram_count(&self) -> u64 {
        self.counts.values().sum()
    }

    fn count(&self, gram: &[char]) -> u64 {
        let key: String = gram.iter().collect();
        self.counts.get(&key).copied().unwrap_or(0)
    }

    /// Count of a gram given in plain text, using `<s>`/`</s>` for the
    /// boundary symbols.
    pub fn count_of(&self, gram: &str) -> u64 {
        self.counts.get(&unescape(gram)).copied().unwrap_or(0)
    }

    /// Smoothed conditional probability of the last symbol of `gram` given
    /// the rest.
    fn prob(&self, gram: &[char]) -> f64 {
        let (history, _) = gram.split_at(gram.len() - 1);
        let history_count = if history.is_empty() {
            self.total_tokens
        } else {
            self.count(history)
        };
        (self.count(gram) as f64 + ADD_K) / (history_count as f64 + ADD_K * self.vocab as f64)
    }

    /// Negative log probability of the n-grams that overlap `surface` when it
    /// is placed between `before` and `after`.
    pub fn score(&self, before: &str, surface: &str, after: &str) -> f64 {
        let pad = self.order - 1;
        let mut seq: Vec<char> = std::iter::repeat_n(BOS, pad).collect();
        seq.extend(before.chars());
        let span_start = seq.len();
        seq.extend(surface.chars());
        let span_end = seq.len();
        seq.extend(after.chars());
        seq.push(EOS);
        let last = (span_end + pad).min(seq.len());
        let mut cost = 0.0;
        for i in span_start..last {
            let lo = i + 1 - self.order;
            cost -= self.prob(&seq[lo..=i]).ln();
        }
        cost
    }

    /// `gram<TAB>count` lines sorted by gram.
    pub fn to_tsv(&self) -> String {
        let mut grams: Vec<(String, u64)> =
            self.counts.iter().map(|(g, &c)| (escape(g), c)).collect();
        grams.sort();
        let mut out = String::new();
        for (g, c) in grams {
            out.push_str(&g);
            out.push('\t');
            out.push_str(&c.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self, RestoreError> {
        let mut counts = HashMap::new();
        let mut order = 0;
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let malformed = |message: &str| RestoreError::Malformed {
                line: i + 1,
                message: message.to_string(),
            };
            let (gram, count) = line
                .rsplit_once('\t')
                .ok_or_else(|| malformed("missing tab"))?;
            let count: u64 = count.parse().map_err(|_| malformed("bad count"))?;
            if count == 0 || gram.is_empty() {
                return Err(malformed("empty gram or zero count"));
            }
            let gram = unescape(gram);
            order = order.max(gram.chars().count());
            *counts.entry(gram).or_default() += count;
        }
        if counts.is_empty() {
            return Err(RestoreError::EmptyCorpus);
        }
        Ok(Self::from_counts(order, counts))
    }

    pub fn from_tsv(text: &str) -> Result<Self, RestoreError> {
        Self::from_reader(text.as_bytes())
    }
}

fn escape(gram: &str) -> String {
    gram.replace(BOS, BOS_TEXT).replace(EOS, EOS_TEXT)
}

fn unescape(gram: &str) -> String {
    gram.replace(EOS_TEXT, &EOS.to_string())
        .replace(BOS_TEXT, &BOS.to_string())
}

/// Score candidates and keep those within `margin` of the best, at most
/// `max_candidates`, sorted by (score, surface).
pub fn select(
    mut candidates: Vec<Candidate>,
    max_candidates: usize,
    margin: f64,
) -> Vec<Candidate> {
    candidates.sort_by(|a, b| {
        a.score
            .total_cmp(&b.score)
            .then_with(|| a.surface.cmp(&b.surface))
    });
    candidates.dedup_by(|b, a| a.surface == b.surface);
    let Some(best) = candidates.first().map(|c| c.score) else {
        return candidates;
    };
    candidates.retain(|c| c.score <= best + margin);
    candidates.truncate(max_candidates.max(1));
    candidates
}

/// Baseline restoration: the token itself plus every dictionary surface
/// whose reading is exactly the token, scored by the n-gram model.
pub fn restore(
    req: &RestorationRequest,
    dict: &ReadingDictionary,
    model: &NgramModel,
    max_candidates: usize,
    margin: f64,
) -> Vec<Candidate> {
    let mut surfaces: Vec<&str> = vec![req.token.as_str()];
    for s in dict.surfaces_for_reading(&req.token) {
        if !surfaces.contains(&s) {
            surfaces.push(s);
        }
    }
    let candidates = surfaces
        .into_iter()
        .map(|s| Candidate {
            surface: s.to_string(),
            score: model.score(&req.before, s, &req.after),
        })
        .collect();
    select(candidates, max_candidates, margin)
}

/// Source of kanji respellings for kana tokens.
pub trait Restorer: Send + Sync {
    fn restore(
        &self,
        req: &RestorationRequest,
        dict: &ReadingDictionary,
        max_candidates: usize,
        margin: f64,
    ) -> Result<Vec<Candidate>, RestoreError>;
}

#[derive(Clone, Debug)]
pub struct NgramRestorer {
    pub model: NgramModel,
}

impl NgramRestorer {
    pub fn new(model: NgramModel) -> Self {
        NgramRestorer { model }
    }
}

impl Restorer for NgramRestorer {
    fn restore(
        &self,
        req: &RestorationRequest,
        dict: &ReadingDictionary,
        max_candidates: usize,
        margin: f64,
    ) -> Result<Vec<Candidate>, RestoreError> {
        Ok(restore(req, dict, &self.model, max_candidates, margin))
    }
}

/// Line-protocol adapter for an external model. Each request is one tagged
/// sentence on the child's stdin; the child answers with `surface<TAB>score`
/// lines followed by a blank line.
pub struct CommandRestorer {
    command: String,
    io: Mutex<PluginIo>,
}

struct PluginIo {
    child: Child,
    stdin: BufWriter<ChildStdin>,
    stdout: BufReader<ChildStdout>,
}

impl CommandRestorer {
    /// Spawn `command` through `sh -c`.
    pub fn spawn(command: &str) -> Result<Self, RestoreError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()?;
        let stdin = BufWriter::new(child.stdin.take().expect("piped stdin"));
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(CommandRestorer {
            command: command.to_string(),
            io: Mutex::new(PluginIo {
                child,
                stdin,
                stdout,
            }),
        })
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    fn exchange(&self, request: &str) -> Result<Vec<Candidate>, RestoreError> {
        let mut io = self
            .io
            .lock()
            .map_err(|_| RestoreError::Plugin("plugin state poisoned".into()))?;
        writeln!(io.stdin, "{request}")?;
        io.stdin.flush()?;
        let mut out = Vec::new();
        let mut line = String::new();
        loop {
            line.clear();
            if io.stdout.read_line(&mut line)? == 0 {
                return Err(RestoreError::Plugin("plugin closed its output".into()));
            }
            let trimmed = line.trim_end_matches(['\n', '\r']);
            if trimmed.is_empty() {
                break;
            }
            let (surface, score) = trimmed
                .split_once('\t')
                .ok_or_else(|| RestoreError::Plugin(format!("bad response line {trimmed:?}")))?;
            let score: f64 = score
                .trim()
                .parse()
                .ok()
                .filter(|s: &f64| s.is_finite())
                .ok_or_else(|| RestoreError::Plugin(format!("bad score in {trimmed:?}")))?;
            if surface.is_empty() {
                return Err(RestoreError::Plugin("empty candidate surface".into()));
            }
            out.push(Candidate {
                surface: nfc(surface),
                score,
            });
        }
        Ok(out)
    }
}

impl Restorer for CommandRestorer {
    fn restore(
        &self,
        req: &RestorationRequest,
        _dict: &ReadingDictionary,
        max_candidates: usize,
        margin: f64,
    ) -> Result<Vec<Candidate>, RestoreError> {
        let candidates = self.exchange(&serialize_tagged(req))?;
        if candidates.is_empty() {
            return Ok(vec![Candidate {
                surface: req.token.clone(),
                score: 0.0,
            }]);
        }
        Ok(select(candidates, max_candidates, margin))
    }
}

impl Drop for CommandRestorer {
    fn drop(&mut self) {
        if let Ok(io) = self.io.get_mut() {
            let _ = io.stdin.flush();
            let _ = io.child.kill();
            let _ = io.child.wait();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tagged_wire_format() {
        let req = RestorationRequest::new("再び、MTサミットが", "にほん", "で");
        assert_eq!(
            serialize_tagged(&req),
            "再び、MTサミットが<to_kanji>にほん</to_kanji>で"
        );
        assert_eq!(
            serialize_tagged(&RestorationRequest::new("", "て", "")),
            "<to_kanji>て</to_kanji>"
        );
        assert_eq!(
            serialize_tagged(&RestorationRequest::new("この拉麺は", "うまい", "。")),
            "この拉麺は<to_kanji>うまい</to_kanji>。"
        );
    }

    #[test]
    fn bigram_counts_by_hand() {
        let m = NgramModel::train(["ああ"], 2).unwrap();
        assert_eq!(m.count_of("ああ"), 1);
        assert_eq!(m.count_of("<s>あ"), 1);
        assert_eq!(m.count_of("あ</s>"), 1);
        assert_eq!(m.count_of("あ"), 2);
        assert_eq!(m.count_of("<s>"), 1);
        assert_eq!(m.count_of("</s>"), 1);
        assert_eq!(m.total_gram_count(), 3 + 4);
        assert_eq!(m.total_tokens(), 3);
        assert_eq!(m.vocab_size(), 2);
    }

    #[test]
    fn duplicate_lines_double_counts() {
        let once = NgramModel::train(["拉麺は旨い。", "寿司"], 3).unwrap();
        let twice = NgramModel::train(["拉麺は旨い。", "寿司", "拉麺は旨い。", "寿司"], 3).unwrap();
        for (gram, &c) in &once.counts {
            assert_eq!(twice.counts[gram], 2 * c);
        }
        assert_eq!(once.counts.len(), twice.counts.len());
    }

    #[test]
    fn training_errors() {
        assert!(matches!(
            NgramModel::train(["", "\n"], 3),
            Err(RestoreError::EmptyCorpus)
        ));
        assert!(matches!(
            NgramModel::train(["a"], 0),
            Err(RestoreError::ZeroOrder)
        ));
    }

    #[test]
    fn tsv_round_trip() {
        let m = NgramModel::train(["拉麺は旨い。", "寿司は旨い。"], 3).unwrap();
        let back = NgramModel::from_tsv(&m.to_tsv()).unwrap();
        assert_eq!(back, m);
        assert!(m.to_tsv().contains("\n<s><s>拉\t1\n"));
    }

    #[test]
    fn score_matches_hand_computation() {
        // order 1: P(c) = (count(c) + 0.1) / (total + 0.1 * V)
        let m = NgramModel::train(["ab"], 1).unwrap();
        // symbols a, b, </s>: total 3, V 3
        let p_a = (1.0 + 0.1) / (3.0 + 0.3);
        assert!((m.score("", "a", "") - -f64::ln(p_a)).abs() < 1e-12);
        // order 2: "a" in context x_y scores P(a|x) and P(y|a)
        let m = NgramModel::train(["ab"], 2).unwrap();
        // counts: <s>a 1, ab 1, b</s> 1; unigrams <s> 1, a 1, b 1, </s> 1; V = 3
        let p_a_given_x: f64 = 0.1 / (0.0 + 0.3);
        let p_b_given_a: f64 = (1.0 + 0.1) / (1.0 + 0.3);
        let expected = -(p_a_given_x.ln() + p_b_given_a.ln());
        assert!((m.score("x", "a", "b") - expected).abs() < 1e-12);
    }

    fn dict() -> ReadingDictionary {
        ReadingDictionary::from_tsv("日本\tにほん\t10\n二本\tにほん\t1\n").unwrap()
    }

    #[test]
    fn identity_only_without_entries() {
        let m = NgramModel::train(["再び、MTサミットが日本で"], 3).unwrap();
        let req = RestorationRequest::new("再び、MTサミットが日本", "で", "");
        let out = restore(&req, &dict(), &m, 4, 2.0);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].surface, "で");
        let out = restore(&req, &ReadingDictionary::new(), &m, 4, 2.0);
        assert_eq!(out[0].surface, "で");
    }

    #[test]
    fn nihon_restored() {
        let m =
            NgramModel::train(["再び、MTサミットが日本で", "日本で会議", "日本の首都"], 3).unwrap();
        let req = RestorationRequest::new("再び、MTサミットが", "にほん", "で");
        let out = restore(&req, &dict(), &m, 4, 2.0);
        assert_eq!(out[0].surface, "日本");
        assert!(out.iter().all(|c| c.score.is_finite()));
    }

    #[test]
    fn select_orders_and_caps() {
        let c = |s: &str, score: f64| Candidate {
            surface: s.into(),
            score,
        };
        let out = select(
            vec![c("b", 1.0), c("a", 1.0), c("z", 0.5), c("far", 9.0)],
            2,
            2.0,
        );
        assert_eq!(out, vec![c("z", 0.5), c("a", 1.0)]);
        let out = select(
            vec![c("b", 1.0), c("a", 1.0), c("z", 0.5), c("far", 9.0)],
            10,
            2.0,
        );
        assert_eq!(out.len(), 3);
    }

    #[test]
    fn command_plugin_protocol() {
        // Echoes the tagged input back as the surface so the wire form can be
        // checked, then proposes 日本.
        let script = r#"while IFS= read -r line; do printf '%s\t1.5\n日本\t0.5\n\n' "$line"; done"#;
        let plugin = CommandRestorer::spawn(script).unwrap();
        let req = RestorationRequest::new("再び、MTサミットが", "にほん", "で");
        let out = plugin
            .restore(&req, &ReadingDictionary::new(), 4, 2.0)
            .unwrap();
        assert_eq!(out[0].surface, "日本");
        assert_eq!(
            out[1].surface,
            "再び、MTサミットが<to_kanji>にほん</to_kanji>で"
        );
        // second request on the same process
        let out = plugin
            .restore(&req, &ReadingDictionary::new(), 1, 2.0)
            .unwrap();
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn command_plugin_errors() {
        let plugin =
            CommandRestorer::spawn("while read -r l; do echo nonsense; echo; done").unwrap();
        let req = RestorationRequest::new("", "て", "");
        assert!(plugin
            .restore(&req, &ReadingDictionary::new(), 4, 2.0)
            .is_err());
        let plugin = CommandRestorer::spawn("true").unwrap();
        assert!(plugin
            .restore(&req, &ReadingDictionary::new(), 4, 2.0)
            .is_err());
    }
}
