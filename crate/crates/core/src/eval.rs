//! Corpus evaluation: naive WER/CER, lenient CER and bootstrap intervals.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::io::BufRead;
use std::str::FromStr;

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::builder::{build_reference, BuildError, Resources, StageConfig};
use crate::edit::{edit_distance, levenshtein, rate, AlignOp, EditCounts};
use crate::lattice::LatticeError;
use crate::text::Normalization;

pub const DEFAULT_BOOTSTRAP: usize = 1000;
pub const MIN_BOOTSTRAP: usize = 100;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("reference is empty")]
    EmptyReference,
    #[error("no valid records to evaluate")]
    NoValidRecords,
    #[error("bootstrap needs at least {MIN_BOOTSTRAP} resamples, got {0}")]
    TooFewResamples(usize),
    #[error("unknown metric {0:?} (expected wer, cer or lenient)")]
    UnknownMetric(String),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("corpus: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Wer,
    Cer,
    Lenient,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Wer => "wer",
            Metric::Cer => "cer",
            Metric::Lenient => "lenient",
        }
    }
}

impl FromStr for Metric {
    type Err = EvalError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "wer" => Ok(Metric::Wer),
            "cer" => Ok(Metric::Cer),
            "lenient" => Ok(Metric::Lenient),
            other => Err(EvalError::UnknownMetric(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UtteranceRecord {
    pub id: String,
    pub reference: String,
    pub hypothesis: String,
}

impl UtteranceRecord {
    pub fn new(id: &str, reference: &str, hypothesis: &str) -> Self {
        UtteranceRecord {
            id: id.to_string(),
            reference: reference.to_string(),
            hypothesis: hypothesis.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Rejected {
    /// 1-based line in the corpus file; 0 for records passed in directly.
    pub line: usize,
    pub id: String,
    pub reason: String,
}

/// Records paired with their 1-based corpus line numbers.
pub type NumberedRecords = Vec<(usize, UtteranceRecord)>;

/// Parse `id<TAB>reference<TAB>hypothesis` lines. A missing hypothesis
/// field counts as an empty hypothesis.
pub fn parse_corpus<R: BufRead>(reader: R) -> Result<(NumberedRecords, Vec<Rejected>), EvalError> {
    let mut records = Vec::new();
    let mut rejected = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        match fields.as_slice() {
            [id, reference] => records.push((i + 1, UtteranceRecord::new(id, reference, ""))),
            [id, reference, hypothesis] => {
                records.push((i + 1, UtteranceRecord::new(id, reference, hypothesis)))
            }
            _ => rejected.push(Rejected {
                line: i + 1,
                id: fields[0].to_string(),
                reason: format!("expected 3 tab-separated fields, found {}", fields.len()),
            }),
        }
    }
    Ok((records, rejected))
}

/// Score of one metric on one utterance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricScore {
    pub distance: usize,
    pub errors: EditCounts,
    pub denom: usize,
    pub rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alignment: Option<Vec<AlignOp<char>>>,
}

impl MetricScore {
    fn from_counts(errors: EditCounts, denom: usize) -> Result<Self, EvalError> {
        if denom == 0 {
            return Err(EvalError::EmptyReference);
        }
        Ok(MetricScore {
            distance: errors.distance(),
            errors,
            denom,
            rate: errors.distance() as f64 / denom as f64,
            best_path: None,
            alignment: None,
        })
    }
}

/// Character-level Levenshtein against the raw reference.
pub fn naive_cer(reference: &str, hypothesis: &str) -> Result<MetricScore, EvalError> {
    let r: Vec<char> = reference.chars().collect();
    let h: Vec<char> = hypothesis.chars().collect();
    let errors = EditCounts::from_ops(&levenshtein(&r, &h));
    MetricScore::from_counts(errors, r.len())
}

/// Word-level Levenshtein with both sides cut by the same segmenter.
pub fn naive_wer(
    reference: &str,
    hypothesis: &str,
    resources: &Resources,
) -> Result<MetricScore, EvalError> {
    let words = |text: &str| -> Vec<String> {
        resources
            .segment(text)
            .into_iter()
            .map(|t| t.surface)
            .collect()
    };
    let r = words(reference);
    let h = words(hypothesis);
    let errors = EditCounts::from_ops(&levenshtein(&r, &h));
    MetricScore::from_counts(errors, r.len())
}

/// Lattice edit distance over the length of the best matching path.
pub fn lenient_eval(
    record: &UtteranceRecord,
    config: &StageConfig,
    resources: &Resources,
) -> Result<MetricScore, EvalError> {
    let built = build_reference(&record.reference, config, resources)?;
    let hypothesis: Vec<char> = resources
        .normalization
        .apply(&record.hypothesis)
        .chars()
        .collect();
    let result = edit_distance(&built.lattice, &hypothesis)?;
    let value = rate(&result)?;
    Ok(MetricScore {
        distance: result.distance,
        errors: result.counts,
        denom: result.best_path.len(),
        rate: value,
        best_path: Some(result.best_path_string()),
        alignment: Some(result.alignment),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorpusMetric {
    pub errors: EditCounts,
    pub denom: usize,
    pub rate: f64,
    pub ci95: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UtteranceScore {
    pub id: String,
    #[serde(flatten)]
    pub scores: IndexMap<String, MetricScore>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metadata {
    pub version: &'static str,
    pub metrics: Vec<Metric>,
    pub stages: StageConfig,
    pub normalization: Normalization,
    pub seed: u64,
    pub bootstrap: usize,
    /// Resource name → SHA-256 of its contents.
    pub resources: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub metadata: Metadata,
    pub corpus: IndexMap<String, CorpusMetric>,
    pub utterances: Vec<UtteranceScore>,
    pub rejected: Vec<Rejected>,
}

#[derive(Clone, Debug)]
pub struct EvalOptions {
    pub metrics: Vec<Metric>,
    pub config: StageConfig,
    pub seed: u64,
    pub bootstrap: usize,
    /// Score utterances and resamples on the rayon pool.
    pub parallel: bool,
    /// Keep per-utterance lenient alignments in the report.
    pub alignments: bool,
    pub resource_checksums: BTreeMap<String, String>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            metrics: vec![Metric::Wer, Metric::Cer, Metric::Lenient],
            config: StageConfig::full(),
            seed: 0,
            bootstrap: DEFAULT_BOOTSTRAP,
            parallel: false,
            alignments: false,
            resource_checksums: BTreeMap::new(),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}

fn score_record(
    record: &UtteranceRecord,
    options: &EvalOptions,
    resources: &Resources,
) -> Result<UtteranceScore, EvalError> {
    let mut scores = IndexMap::new();
    for &metric in &options.metrics {
        let score = match metric {
            Metric::Cer => naive_cer(&record.reference, &record.hypothesis)?,
            Metric::Wer => naive_wer(&record.reference, &record.hypothesis, resources)?,
            Metric::Lenient => {
                let mut s = lenient_eval(record, &options.config, resources)?;
                if !options.alignments {
                    s.alignment = None;
                }
                s
            }
        };
        scores.insert(metric.name().to_string(), score);
    }
    Ok(UtteranceScore {
        id: record.id.clone(),
        scores,
    })
}

/// Validate records: normalize both sides, drop empty references and
/// duplicate ids.
pub fn prepare_records(
    records: &[(usize, UtteranceRecord)],
    normalization: &Normalization,
) -> (Vec<(usize, UtteranceRecord)>, Vec<Rejected>) {
    let mut seen = HashSet::new();
    let mut valid = Vec::new();
    let mut rejected = Vec::new();
    for (line, record) in records {
        let reference = normalization.apply(&record.reference);
        let reject = |reason: &str| Rejected {
            line: *line,
            id: record.id.clone(),
            reason: reason.to_string(),
        };
        if reference.is_empty() {
            rejected.push(reject("empty reference"));
            continue;
        }
        if !seen.insert(record.id.clone()) {
            rejected.push(reject("duplicate id"));
            continue;
        }
        valid.push((
            *line,
            UtteranceRecord {
                id: record.id.clone(),
                reference,
                hypothesis: normalization.apply(&record.hypothesis),
            },
        ));
    }
    (valid, rejected)
}

/// Score every record, aggregate micro-averaged rates and attach bootstrap
/// percentile intervals. Output order follows input order whether or not
/// scoring runs in parallel.
pub fn corpus_evaluate(
    records: &[UtteranceRecord],
    resources: &Resources,
    options: &EvalOptions,
) -> Result<EvalReport, EvalError> {
    let numbered: Vec<(usize, UtteranceRecord)> = records.iter().cloned().map(|r| (0, r)).collect();
    corpus_evaluate_numbered(&numbered, Vec::new(), resources, options)
}

/// Like [`corpus_evaluate`], for records that carry their corpus line
/// numbers and with earlier parse rejections carried into the report.
pub fn corpus_evaluate_numbered(
    records: &[(usize, UtteranceRecord)],
    mut rejected: Vec<Rejected>,
    resources: &Resources,
    options: &EvalOptions,
) -> Result<EvalReport, EvalError> {
    if options.bootstrap < MIN_BOOTSTRAP {
        return Err(EvalError::TooFewResamples(options.bootstrap));
    }
    if options.metrics.contains(&Metric::Lenient) {
        resources.check(&options.config)?;
    }
    let (valid, mut prep_rejected) = prepare_records(records, &resources.normalization);
    rejected.append(&mut prep_rejected);
    let scored: Vec<Result<UtteranceScore, EvalError>> = if options.parallel {
        valid
            .par_iter()
            .map(|(_, r)| score_record(r, options, resources))
            .collect()
    } else {
        valid
            .iter()
            .map(|(_, r)| score_record(r, options, resources))
            .collect()
    };
    let mut utterances = Vec::with_capacity(scored.len());
    for ((line, record), result) in valid.iter().zip(scored) {
        match result {
            Ok(s) => utterances.push(s),
            Err(err) => rejected.push(Rejected {
                line: *line,
                id: record.id.clone(),
                reason: err.to_string(),
            }),
        }
    }
    if utterances.is_empty() {
        return Err(EvalError::NoValidRecords);
    }

    let names: Vec<&str> = options.metrics.iter().map(|m| m.name()).collect();
    let cis = bootstrap_intervals(
        &utterances,
        &names,
        options.bootstrap,
        options.seed,
        options.parallel,
    );
    let mut corpus = IndexMap::new();
    for (name, ci) in names.iter().zip(cis) {
        let mut errors = EditCounts::default();
        let mut denom = 0;
        for u in &utterances {
            errors += u.scores[*name].errors;
            denom += u.scores[*name].denom;
        }
        let rate = errors.distance() as f64 / denom as f64;
        corpus.insert(
            name.to_string(),
            CorpusMetric {
                errors,
                denom,
                rate,
                ci95: [ci[0].min(rate), ci[1].max(rate)],
            },
        );
    }
    Ok(EvalReport {
        metadata: Metadata {
            version: env!("CARGO_PKG_VERSION"),
            metrics: options.metrics.clone(),
            stages: options.config,
            normalization: resources.normalization,
            seed: options.seed,
            bootstrap: options.bootstrap,
            resources: options.resource_checksums.clone(),
        },
        corpus,
        utterances,
        rejected,
    })
}

/// Utterance-level percentile bootstrap of the micro-averaged rate for each
/// metric. Resample `b` draws from its own ChaCha stream, so the result
/// does not depend on how resamples are scheduled.
fn bootstrap_intervals(
    utterances: &[UtteranceScore],
    metrics: &[&str],
    resamples: usize,
    seed: u64,
    parallel: bool,
) -> Vec<[f64; 2]> {
    let n = utterances.len();
    let table: Vec<Vec<(f64, f64)>> = metrics
        .iter()
        .map(|m| {
            utterances
                .iter()
                .map(|u| (u.scores[*m].distance as f64, u.scores[*m].denom as f64))
                .collect()
        })
        .collect();
    let one = |b: usize| -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b as u64);
        let mut num = vec![0.0; metrics.len()];
        let mut den = vec![0.0; metrics.len()];
        for _ in 0..n {
            let i = rng.gen_range(0..n);
            for (k, column) in table.iter().enumerate() {
                num[k] += column[i].0;
                den[k] += column[i].1;
            }
        }
        num.iter().zip(&den).map(|(e, d)| e / d).collect()
    };
    let samples: Vec<Vec<f64>> = if parallel {
        (0..resamples).into_par_iter().map(one).collect()
    } else {
        (0..resamples).map(one).collect()
    };
    (0..metrics.len())
        .map(|k| {
            let mut rates: Vec<f64> = samples.iter().map(|s| s[k]).collect();
            rates.sort_by(f64::total_cmp);
            [quantile(&rates, 0.025), quantile(&rates, 0.975)]
        })
        .collect()
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        out.push_str("metric\tsub\tins\tdel\terrors\tdenom\trate\tci95_lo\tci95_hi\n");
        for (name, m) in &self.corpus {
            let _ = writeln!(
                out,
                "{name}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                m.errors.sub,
                m.errors.ins,
                m.errors.del,
                m.errors.distance(),
                m.denom,
                m.rate,
                m.ci95[0],
                m.ci95[1]
            );
        }
        out.push('\n');
        out.push_str("id\tmetric\tsub\tins\tdel\tdistance\tdenom\trate\tbest_path\n");
        for u in &self.utterances {
            for (name, s) in &u.scores {
                let _ = writeln!(
                    out,
                    "{}\t{name}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    u.id,
                    s.errors.sub,
                    s.errors.ins,
                    s.errors.del,
                    s.distance,
                    s.denom,
                    s.rate,
                    s.best_path.as_deref().unwrap_or("")
                );
            }
        }
        out
    }
}

/// Corpus lenient CER for each cumulative stage (raw, +kana, +kanji,
/// +lexicon), without intervals.
pub fn staged_rates(
    records: &[UtteranceRecord],
    resources: &Resources,
) -> Result<Vec<(&'static str, CorpusMetric)>, EvalError> {
    StageConfig::cumulative()
        .into_iter()
        .map(|(name, config)| {
            let mut errors = EditCounts::default();
            let mut denom = 0;
            for r in records {
                let s = lenient_eval(r, &config, resources)?;
                errors += s.errors;
                denom += s.denom;
            }
            if denom == 0 {
                return Err(EvalError::NoValidRecords);
            }
            let rate = errors.distance() as f64 / denom as f64;
            Ok((
                name,
                CorpusMetric {
                    errors,
                    denom,
                    rate,
                    ci95: [rate, rate],
                },
            ))
        })
        .collect()
}
