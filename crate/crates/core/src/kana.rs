//! Script classification and hiragana/katakana conversion.

use thiserror::Error;

const PROLONGED_SOUND_MARK: char = 'ー';
const KANA_OFFSET: u32 = 0x60;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("cannot convert {ch:?} (U+{code:04X}) at index {index}", code = *ch as u32)]
pub struct NotConvertible {
    pub ch: char,
    pub index: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Script {
    Hiragana,
    Katakana,
    /// ー, shared by both syllabaries.
    ProlongedMark,
    Kanji,
    Other,
}

pub fn script_of(c: char) -> Script {
    match c {
        PROLONGED_SOUND_MARK => Script::ProlongedMark,
        '\u{3041}'..='\u{3096}' | '\u{309D}' | '\u{309E}' | '\u{309F}' => Script::Hiragana,
        '\u{30A1}'..='\u{30FA}' | '\u{30FD}'..='\u{30FF}' => Script::Katakana,
        _ if is_kanji(c) => Script::Kanji,
        _ => Script::Other,
    }
}

/// CJK Unified Ideographs (base, extensions and compatibility) plus 々.
pub fn is_kanji(c: char) -> bool {
    matches!(c,
        '\u{4E00}'..='\u{9FFF}'
        | '\u{3400}'..='\u{4DBF}'
        | '\u{20000}'..='\u{2EBEF}'
        | '\u{30000}'..='\u{323AF}'
        | '\u{F900}'..='\u{FAFF}'
        | '\u{2F800}'..='\u{2FA1F}'
        | '々')
}

pub fn is_kana(c: char) -> bool {
    matches!(
        script_of(c),
        Script::Hiragana | Script::Katakana | Script::ProlongedMark
    )
}

pub fn has_kanji(s: &str) -> bool {
    s.chars().any(is_kanji)
}

pub fn is_all_kana(s: &str) -> bool {
    !s.is_empty() && s.chars().all(is_kana)
}

fn hira_convertible(c: char) -> bool {
    matches!(
        c,
        '\u{3041}'..='\u{3096}' | '\u{309D}' | '\u{309E}' | PROLONGED_SOUND_MARK
    )
}

fn kata_convertible(c: char) -> bool {
    matches!(
        c,
        '\u{30A1}'..='\u{30F6}' | '\u{30FD}' | '\u{30FE}' | PROLONGED_SOUND_MARK
    )
}

/// True if every scalar is convertible hiragana or ー, i.e. a valid reading.
pub fn is_hiragana_reading(s: &str) -> bool {
    s.chars().all(hira_convertible)
}

/// Strictly hiragana text (at least one hiragana letter, no katakana).
pub fn is_hiragana_word(s: &str) -> bool {
    is_hiragana_reading(s) && s.chars().any(|c| c != PROLONGED_SOUND_MARK)
}

pub fn is_katakana_word(s: &str) -> bool {
    s.chars().all(kata_convertible) && s.chars().any(|c| c != PROLONGED_SOUND_MARK)
}

fn shift(s: &str, ok: fn(char) -> bool, up: bool) -> Result<String, NotConvertible> {
    s.chars()
        .enumerate()
        .map(|(index, ch)| {
            if !ok(ch) {
                return Err(NotConvertible { ch, index });
            }
            if ch == PROLONGED_SOUND_MARK {
                return Ok(ch);
            }
            let code = if up {
                ch as u32 + KANA_OFFSET
            } else {
                ch as u32 - KANA_OFFSET
            };
            Ok(char::from_u32(code).expect("kana blocks are contiguous"))
        })
        .collect()
}

/// らーめん → ラーメン. ー passes through unchanged.
pub fn hira_to_kata(s: &str) -> Result<String, NotConvertible> {
    shift(s, hira_convertible, true)
}

/// Inverse of [`hira_to_kata`]. ヷ–ヺ have no hiragana counterpart.
pub fn kata_to_hira(s: &str) -> Result<String, NotConvertible> {
    shift(s, kata_convertible, false)
}

/// Hiragana form of a kana string that may mix both syllabaries.
pub fn to_hiragana(s: &str) -> Result<String, NotConvertible> {
    s.chars()
        .enumerate()
        .map(|(index, ch)| {
            if hira_convertible(ch) {
                Ok(ch)
            } else if kata_convertible(ch) {
                Ok(char::from_u32(ch as u32 - KANA_OFFSET).unwrap())
            } else {
                Err(NotConvertible { ch, index })
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn documented_examples() {
        assert_eq!(hira_to_kata("らーめん").unwrap(), "ラーメン");
        assert_eq!(hira_to_kata("だめ").unwrap(), "ダメ");
        assert_eq!(hira_to_kata("").unwrap(), "");
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(kata_to_hira("ラーメン").unwrap(), "らーめん");
        assert_eq!(kata_to_hira("ヴ").unwrap(), "ゔ");
        assert_eq!(
            kata_to_hira("ヷ"),
            Err(NotConvertible {
                ch: 'ヷ', index: 0
            })
        );
    }

    #[test]
    fn marks_and_small_kana() {
        assert_eq!(hira_to_kata("ゝゞゔゕゖ").unwrap(), "ヽヾヴヵヶ");
        assert_eq!(kata_to_hira("ヽヾヴヵヶ").unwrap(), "ゝゞゔゕゖ");
    }

    #[test]
    fn rejects_out_of_range() {
        assert_eq!(
            hira_to_kata("あア"),
            Err(NotConvertible {
                ch: 'ア', index: 1
            })
        );
        assert!(hira_to_kata("日本").is_err());
        // half-width katakana
        assert!(kata_to_hira("ｱ").is_err());
        assert!(kata_to_hira("・").is_err());
    }

    #[test]
    fn classification() {
        assert_eq!(script_of('拉'), Script::Kanji);
        assert_eq!(script_of('々'), Script::Kanji);
        assert_eq!(script_of('う'), Script::Hiragana);
        assert_eq!(script_of('ウ'), Script::Katakana);
        assert_eq!(script_of('。'), Script::Other);
        assert_eq!(script_of('M'), Script::Other);
        assert!(has_kanji("旨い"));
        assert!(is_all_kana("ちゅーる"));
        assert!(is_hiragana_word("ちゅーる"));
        assert!(!is_hiragana_word("ー"));
        assert!(is_katakana_word("ダメ"));
        assert_eq!(to_hiragana("イナバの").unwrap(), "いなばの");
    }

    fn hiragana_char() -> impl Strategy<Value = char> {
        prop_oneof![
            (0x3041u32..=0x3096).prop_map(|c| char::from_u32(c).unwrap()),
            Just('ゝ'),
            Just('ゞ'),
            Just('ー'),
        ]
    }

    proptest! {
        #[test]
        fn round_trip(s in proptest::collection::vec(hiragana_char(), 0..20)) {
            let s: String = s.into_iter().collect();
            let k = hira_to_kata(&s).unwrap();
            prop_assert_eq!(k.chars().count(), s.chars().count());
            prop_assert_eq!(kata_to_hira(&k).unwrap(), s);
        }
    }
}
