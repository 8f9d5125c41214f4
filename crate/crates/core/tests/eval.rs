mod common;

use common::*;
use lenient_cer::eval::{corpus_evaluate_numbered, parse_corpus, quantile, EvalError};
use lenient_cer::{corpus_evaluate, EvalOptions, Metric, StageConfig, UtteranceRecord};

fn records() -> Vec<UtteranceRecord> {
    parse_corpus(read_data("mini_corpus.tsv").as_bytes())
        .unwrap()
        .0
        .into_iter()
        .map(|(_, r)| r)
        .collect()
}

#[test]
fn report_is_self_auditing() {
    let resources = fixture_resources();
    let report = corpus_evaluate(&records(), &resources, &EvalOptions::default()).unwrap();
    let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    for metric in ["wer", "cer", "lenient"] {
        let corpus = &json["corpus"][metric];
        let mut num = 0;
        let mut den = 0;
        for u in json["utterances"].as_array().unwrap() {
            num += u[metric]["distance"].as_u64().unwrap();
            den += u[metric]["denom"].as_u64().unwrap();
            let e = &u[metric]["errors"];
            assert_eq!(
                e["sub"].as_u64().unwrap()
                    + e["ins"].as_u64().unwrap()
                    + e["del"].as_u64().unwrap(),
                u[metric]["distance"].as_u64().unwrap()
            );
        }
        assert_eq!(corpus["denom"].as_u64().unwrap(), den);
        assert_eq!(corpus["rate"].as_f64().unwrap(), num as f64 / den as f64);
        let ci = corpus["ci95"].as_array().unwrap();
        let (lo, hi) = (ci[0].as_f64().unwrap(), ci[1].as_f64().unwrap());
        assert!(lo <= corpus["rate"].as_f64().unwrap() && corpus["rate"].as_f64().unwrap() <= hi);
    }
    assert!(json["utterances"][0]["lenient"]["best_path"].is_string());
    assert_eq!(json["metadata"]["bootstrap"], 1000);
}

#[test]
fn reports_are_reproducible_and_parallel_safe() {
    let resources = fixture_resources();
    let options = EvalOptions {
        seed: 42,
        ..EvalOptions::default()
    };
    let a = corpus_evaluate(&records(), &resources, &options)
        .unwrap()
        .to_json();
    let b = corpus_evaluate(&records(), &resources, &options)
        .unwrap()
        .to_json();
    let c = corpus_evaluate(
        &records(),
        &resources,
        &EvalOptions {
            parallel: true,
            ..options.clone()
        },
    )
    .unwrap()
    .to_json();
    assert_eq!(a, b);
    assert_eq!(a, c);
    let other_seed = corpus_evaluate(
        &records(),
        &resources,
        &EvalOptions {
            seed: 43,
            ..options
        },
    )
    .unwrap()
    .to_json();
    assert_ne!(a, other_seed);
}

#[test]
fn bad_records_are_reported_not_fatal() {
    let resources = fixture_resources();
    let text =
        "a\tこの拉麺はうまい。\tこの拉麺は旨い。\nbroken line\nb\t\tx\na\tだめ\tダメ\nc\tだめ\n";
    let (records, rejected) = parse_corpus(text.as_bytes()).unwrap();
    let report =
        corpus_evaluate_numbered(&records, rejected, &resources, &EvalOptions::default()).unwrap();
    let ids: Vec<&str> = report.utterances.iter().map(|u| u.id.as_str()).collect();
    assert_eq!(ids, ["a", "c"]);
    let lines: Vec<usize> = report.rejected.iter().map(|r| r.line).collect();
    assert_eq!(lines, [2, 3, 4]);
    // c has an empty hypothesis: everything deleted
    assert_eq!(report.utterances[1].scores["cer"].rate, 1.0);
}

#[test]
fn nothing_valid_is_an_error() {
    let resources = fixture_resources();
    let records = vec![UtteranceRecord::new("x", "", "a")];
    assert!(matches!(
        corpus_evaluate(&records, &resources, &EvalOptions::default()),
        Err(EvalError::NoValidRecords)
    ));
    assert!(matches!(
        corpus_evaluate(
            &[],
            &resources,
            &EvalOptions {
                bootstrap: 10,
                ..EvalOptions::default()
            }
        ),
        Err(EvalError::TooFewResamples(10))
    ));
}

#[test]
fn missing_resources_are_rejected_up_front() {
    let resources = lenient_cer::Resources::new(lenient_cer::ReadingDictionary::new());
    let options = EvalOptions {
        metrics: vec![Metric::Lenient],
        config: StageConfig::full(),
        ..EvalOptions::default()
    };
    assert!(matches!(
        corpus_evaluate(&records(), &resources, &options),
        Err(EvalError::Build(_))
    ));
}

#[test]
fn tsv_lists_every_metric() {
    let resources = fixture_resources();
    let report = corpus_evaluate(&records(), &resources, &EvalOptions::default()).unwrap();
    let tsv = report.to_tsv();
    let (corpus, utterances) = tsv.split_once("\n\n").unwrap();
    assert_eq!(corpus.lines().count(), 4);
    assert_eq!(utterances.lines().count(), 1 + 3 * 30);
}

#[test]
fn quantile_interpolates() {
    let v = [1.0, 2.0, 3.0, 4.0];
    assert_eq!(quantile(&v, 0.0), 1.0);
    assert_eq!(quantile(&v, 1.0), 4.0);
    assert_eq!(quantile(&v, 0.5), 2.5);
    assert!((quantile(&v, 0.025) - 1.075).abs() < 1e-12);
}
