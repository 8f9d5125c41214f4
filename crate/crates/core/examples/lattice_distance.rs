//! Edit distance between a hand-built lattice and a few hypotheses, with
//! the chosen path and its alignment.

use lenient_cer::{edit_distance, Arc, Label, Lattice, LexWeight, OpKind, Semiring};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // だめ | ダメ | 駄目, followed by です
    let mut lattice = Lattice::new();
    let s: Vec<_> = (0..7).map(|_| lattice.add_state()).collect();
    lattice.set_start(s[0]);
    let arc = |c: char, next| Arc::new(Label::Char(c), LexWeight::one(), next);
    lattice.add_arc(s[0], arc('だ', s[1]));
    lattice.add_arc(s[1], arc('め', s[4]));
    lattice.add_arc(s[0], arc('ダ', s[2]));
    lattice.add_arc(s[2], arc('メ', s[4]));
    lattice.add_arc(s[0], arc('駄', s[3]));
    lattice.add_arc(s[3], arc('目', s[4]));
    lattice.add_arc(s[4], arc('で', s[5]));
    lattice.add_arc(s[5], arc('す', s[6]));
    lattice.set_final(s[6], LexWeight::one());

    print!("{}", lattice.to_text());
    for hyp in ["ダメです", "駄目だ", "だめでした", ""] {
        let chars: Vec<char> = hyp.chars().collect();
        let result = edit_distance(&lattice, &chars)?;
        let ops: String = result
            .alignment
            .iter()
            .map(|op| match op.kind {
                OpKind::Match => '=',
                OpKind::Sub => 'S',
                OpKind::Ins => 'I',
                OpKind::Del => 'D',
            })
            .collect();
        println!(
            "{hyp:?}: distance {} against {} [{ops}]",
            result.distance,
            result.best_path_string()
        );
    }
    Ok(())
}
