//! Lexicographic weights: edit cost first, language-model cost as the
//! tie-breaker. Two spellings at the same edit distance are ranked by lm.

use lenient_cer::{shortest_path, Arc, Label, Lattice, LexWeight, Semiring, TropicalWeight};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = LexWeight::new(1.0, 5.0);
    let b = LexWeight::new(1.0, 2.5);
    let c = LexWeight::new(0.0, 9.0);
    println!("{a} ⊕ {b} = {}", a.plus(b));
    println!("{a} ⊕ {c} = {}", a.plus(c));
    println!("{a} ⊗ {b} = {}", a.times(b));
    println!("zero = {}, one = {}", LexWeight::zero(), LexWeight::one());
    println!(
        "tropical 3 ⊕ 2 = {}",
        TropicalWeight::new(3.0).plus(TropicalWeight::new(2.0))
    );

    // 旨い vs 美味い with lm costs from some external scorer
    let mut lattice = Lattice::new();
    let start = lattice.add_state();
    lattice.set_start(start);
    let end = lattice.add_state();
    for (word, lm) in [("旨い", 2.4), ("美味い", 3.7), ("上手い", 8.5)] {
        let mut cur = start;
        let chars: Vec<char> = word.chars().collect();
        for (i, &ch) in chars.iter().enumerate() {
            let next = if i + 1 == chars.len() {
                end
            } else {
                lattice.add_state()
            };
            let w = if i == 0 {
                LexWeight::new(0.0, lm)
            } else {
                LexWeight::one()
            };
            lattice.add_arc(cur, Arc::new(Label::Char(ch), w, next));
            cur = next;
        }
    }
    lattice.set_final(end, LexWeight::one());
    let (labels, weight) = shortest_path(&lattice)?;
    let best: String = labels.iter().map(|l| l.to_string()).collect();
    println!("best path {best} with weight {weight}");
    Ok(())
}
