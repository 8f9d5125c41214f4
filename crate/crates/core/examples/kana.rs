//! Hiragana/katakana conversion.
//!
//!     cargo run --example kana -- らーめん ダメ

use lenient_cer::kana::to_hiragana;
use lenient_cer::{hira_to_kata, kata_to_hira};

fn main() {
    let words: Vec<String> = std::env::args().skip(1).collect();
    let words = if words.is_empty() {
        vec![
            "らーめん".into(),
            "だめ".into(),
            "ダメ".into(),
            "ヴァイオリン".into(),
            "拉麺".into(),
        ]
    } else {
        words
    };
    for word in &words {
        let show = |r: Result<String, lenient_cer::NotConvertible>| match r {
            Ok(s) => s,
            Err(e) => format!("({e})"),
        };
        println!(
            "{word}: katakana {}  hiragana {}  reading {}",
            show(hira_to_kata(word)),
            show(kata_to_hira(word)),
            show(to_hiragana(word))
        );
    }
}
