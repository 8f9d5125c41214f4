//! Ask the n-gram restorer for kanji spellings of a kana word in context.
//!
//!     cargo run --example kanji_restore -- この拉麺は うまい 。

use std::path::Path;

use lenient_cer::restore::restore;
use lenient_cer::{NgramModel, ReadingDictionary, RestorationRequest};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (before, token, after) = match args.as_slice() {
        [b, t, a] => (b.as_str(), t.as_str(), a.as_str()),
        _ => ("この拉麺は", "うまい", "。"),
    };
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let dict = ReadingDictionary::from_tsv(&std::fs::read_to_string(data.join("readings.tsv"))?)?;
    let corpus = std::fs::read_to_string(data.join("ngram_corpus.txt"))?;
    let model = NgramModel::train(corpus.lines(), 3)?;

    let req = RestorationRequest::new(before, token, after);
    println!("request: {}", lenient_cer::serialize_tagged(&req));
    println!("all candidates:");
    for candidate in restore(&req, &dict, &model, usize::MAX, f64::INFINITY) {
        println!("  {:<8} {:.3}", candidate.surface, candidate.score);
    }
    println!("kept (max 4, margin 2.0):");
    for candidate in restore(&req, &dict, &model, 4, 2.0) {
        println!("  {:<8} {:.3}", candidate.surface, candidate.score);
    }
    Ok(())
}
