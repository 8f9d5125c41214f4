//! Build the respelling lattice for one reference under each stage setting
//! and score a hypothesis against it.
//!
//!     cargo run --example build_lattice -- この拉麺はうまい。 この拉麺は美味し。

use std::path::Path;

use lenient_cer::{
    build_reference, edit_distance, NgramModel, NgramRestorer, ReadingDictionary, Resources,
    StageConfig, VariantLexicon,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let reference = args.next().unwrap_or_else(|| "この拉麺はうまい。".into());
    let hypothesis = args.next().unwrap_or_else(|| "この拉麺は美味し。".into());

    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let readings = ReadingDictionary::from_reader(std::io::BufReader::new(std::fs::File::open(
        data.join("readings.tsv"),
    )?))?;
    let lexicon = VariantLexicon::from_tsv(&std::fs::read_to_string(data.join("lexicon.tsv"))?)?;
    let model = NgramModel::from_tsv(&std::fs::read_to_string(data.join("ngram.tsv"))?)?;
    let resources = Resources::new(readings)
        .with_lexicon(lexicon)
        .with_restorer(NgramRestorer::new(model));

    let hyp: Vec<char> = hypothesis.chars().collect();
    for (name, config) in StageConfig::cumulative() {
        let built = build_reference(&reference, &config, &resources)?;
        println!("[{name}]");
        for slot in &built.variants {
            let spellings: Vec<&str> = slot.spellings.iter().map(String::as_str).collect();
            println!("  {:<8} {}", slot.token.surface, spellings.join(" | "));
        }
        let result = edit_distance(&built.lattice, &hyp)?;
        let path_len = result.best_path.len();
        println!(
            "  paths={} distance={} best={} cer={}/{}",
            built.lattice.paths().len(),
            result.distance,
            result.best_path_string(),
            result.distance,
            path_len
        );
    }
    Ok(())
}
