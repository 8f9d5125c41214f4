//! Staged evaluation of the bundled mini corpus: naive WER/CER, then
//! lenient CER as each respelling stage is switched on.
//!
//!     cargo run --example corpus_eval [-- corpus.tsv]

use std::path::Path;

use lenient_cer::eval::{parse_corpus, staged_rates};
use lenient_cer::{
    corpus_evaluate, EvalOptions, NgramModel, NgramRestorer, ReadingDictionary, Resources,
    UtteranceRecord, VariantLexicon,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let corpus_path = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| data.join("mini_corpus.tsv"));
    let readings =
        ReadingDictionary::from_tsv(&std::fs::read_to_string(data.join("readings.tsv"))?)?;
    let lexicon = VariantLexicon::from_tsv(&std::fs::read_to_string(data.join("lexicon.tsv"))?)?;
    let model = NgramModel::from_tsv(&std::fs::read_to_string(data.join("ngram.tsv"))?)?;
    let resources = Resources::new(readings)
        .with_lexicon(lexicon)
        .with_restorer(NgramRestorer::new(model));

    let (records, rejected) =
        parse_corpus(std::io::BufReader::new(std::fs::File::open(&corpus_path)?))?;
    if !rejected.is_empty() {
        eprintln!("{} malformed lines skipped", rejected.len());
    }
    let records: Vec<UtteranceRecord> = records.into_iter().map(|(_, r)| r).collect();

    let report = corpus_evaluate(&records, &resources, &EvalOptions::default())?;
    println!(
        "{:<10} {:>7} {:>6} {:>18}",
        "metric", "errors", "denom", "rate [95% CI]"
    );
    for (name, m) in &report.corpus {
        println!(
            "{:<10} {:>7} {:>6}   {:.4} [{:.4}, {:.4}]",
            name,
            m.errors.distance(),
            m.denom,
            m.rate,
            m.ci95[0],
            m.ci95[1]
        );
    }
    println!();
    println!("lenient CER by stage:");
    for (stage, m) in staged_rates(&records, &resources)? {
        println!(
            "  {:<9} {:>3}/{:<4} {:.4}",
            stage,
            m.errors.distance(),
            m.denom,
            m.rate
        );
    }
    println!();
    for u in &report.utterances {
        let cer = &u.scores["cer"];
        let len = &u.scores["lenient"];
        if cer.distance != len.distance {
            println!(
                "{}  cer {}/{} -> lenient {}/{}  via {}",
                u.id,
                cer.distance,
                cer.denom,
                len.distance,
                len.denom,
                len.best_path.as_deref().unwrap_or("")
            );
        }
    }
    Ok(())
}
