//! Input normalization shared by every stage.

use unicode_normalization::UnicodeNormalization;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct Normalization {
    /// Apply NFKC instead of NFC (folds half-width katakana and full-width
    /// Latin).
    pub nfkc: bool,
    /// Drop characters that are neither letters nor digits.
    pub strip_punct: bool,
}

impl Normalization {
    pub fn apply(&self, text: &str) -> String {
        let text: String = if self.nfkc {
            text.nfkc().collect()
        } else {
            text.nfc().collect()
        };
        if self.strip_punct {
            text.chars().filter(|c| c.is_alphanumeric()).collect()
        } else {
            text
        }
    }
}

pub fn nfc(text: &str) -> String {
    text.nfc().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nfc_composes_dakuten() {
        // か + combining voiced mark
        assert_eq!(nfc("\u{304B}\u{3099}"), "が");
    }

    #[test]
    fn nfkc_folds_half_width() {
        let n = Normalization {
            nfkc: true,
            strip_punct: false,
        };
        assert_eq!(n.apply("ﾗｰﾒﾝ"), "ラーメン");
        assert_eq!(Normalization::default().apply("ﾗｰﾒﾝ"), "ﾗｰﾒﾝ");
    }

    #[test]
    fn strip_punct_keeps_letters() {
        let n = Normalization {
            nfkc: false,
            strip_punct: true,
        };
        assert_eq!(n.apply("この拉麺は、うまい。"), "この拉麺はうまい");
        assert_eq!(n.apply("ラーメン!"), "ラーメン");
    }
}
