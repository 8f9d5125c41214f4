//! Load a spelling-equivalence lexicon and look up variants. Bad lines are
//! reported rather than merged.
//!
//!     cargo run --example variant_lexicon [-- lexicon.tsv]

use lenient_cer::VariantLexicon;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/lexicon.tsv").to_string());
    let text = std::fs::read_to_string(&path)?;
    let report = VariantLexicon::load_lenient(text.as_bytes())?;
    println!("{} classes loaded from {path}", report.lexicon.len());
    for err in &report.rejected {
        println!("rejected: {err}");
    }
    for word in ["旨い", "ダメ", "軟らかい", "猫カフェ"] {
        println!("{word} -> {}", report.lexicon.variants_of(word).join(" | "));
    }

    // A spelling in two classes is refused.
    let bad = "旨い\t美味い\n上手い\t旨い\nうまい\n";
    let report = VariantLexicon::load_lenient(bad.as_bytes())?;
    println!("{}", serde_json::to_string_pretty(&report.rejected)?);
    Ok(())
}
