//! Tweet normalization.
//!
//! Rules, applied in this order:
//! 1. remove URL tokens (`http://`, `https://` up to the next whitespace, and
//!    whitespace-delimited tokens starting with `www.`);
//! 2. remove mentions (`@` plus a maximal run of word characters);
//! 3. drop the `#` marker of hashtags, keeping the tag text (or drop the whole
//!    hashtag with [`NormalizeOptions::drop_hashtag_body`]);
//! 4. replace every `_` with a space;
//! 5. collapse whitespace runs to a single space and trim.
//!
//! Emoji and every other character pass through untouched. A removal can
//! expose a new match (`@#a` becomes `@a` after rule 3), so the rule sequence
//! is repeated until the text stops changing; this makes [`normalize`]
//! idempotent.

use std::ops::AddAssign;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::{self, Example};
use crate::error::Result;

// Word characters, minus emoji pieces that Unicode also classes as letters
// or marks (🅰, variation selector 16, ZWJ, keycap).
const WORD: &str = r"[\w&&[^\p{Extended_Pictographic}\p{Emoji_Modifier}\x{200D}\x{FE0F}\x{20E3}]]";

static SCHEME_URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)https?://\S*").unwrap());
static WWW_URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)(^|\s)www\.\S*").unwrap());
static MENTION: LazyLock<Regex> = LazyLock::new(|| Regex::new(&format!("@{WORD}+")).unwrap());
static HASHTAG_MARK: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(&format!("#+({WORD})")).unwrap());
static HASHTAG_WHOLE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(&format!("#+{WORD}+")).unwrap());
static EMOJI: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^[\p{Extended_Pictographic}\p{Emoji_Modifier}\p{Regional_Indicator}]$").unwrap()
});

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationReport {
    pub urls_removed: usize,
    pub mentions_removed: usize,
    pub hashtags_processed: usize,
    pub underscores_replaced: usize,
}

impl AddAssign for NormalizationReport {
    fn add_assign(&mut self, rhs: Self) {
        self.urls_removed += rhs.urls_removed;
        self.mentions_removed += rhs.mentions_removed;
        self.hashtags_processed += rhs.hashtags_processed;
        self.underscores_replaced += rhs.underscores_replaced;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizeOptions {
    /// Remove hashtags entirely instead of keeping the tag text.
    pub drop_hashtag_body: bool,
}

pub fn normalize(text: &str) -> (String, NormalizationReport) {
    normalize_with(text, NormalizeOptions::default())
}

pub fn normalize_with(text: &str, opts: NormalizeOptions) -> (String, NormalizationReport) {
    let mut report = NormalizationReport::default();
    let mut current = text.to_string();
    loop {
        let next = single_pass(&current, opts, &mut report);
        if next == current {
            return (next, report);
        }
        current = next;
    }
}

fn single_pass(text: &str, opts: NormalizeOptions, report: &mut NormalizationReport) -> String {
    let mut s = text.to_string();

    let n = SCHEME_URL.find_iter(&s).count();
    if n > 0 {
        report.urls_removed += n;
        s = SCHEME_URL.replace_all(&s, "").into_owned();
    }
    let n = WWW_URL.find_iter(&s).count();
    if n > 0 {
        report.urls_removed += n;
        s = WWW_URL.replace_all(&s, "$1").into_owned();
    }

    let n = MENTION.find_iter(&s).count();
    if n > 0 {
        report.mentions_removed += n;
        s = MENTION.replace_all(&s, "").into_owned();
    }

    let (re, rep) = if opts.drop_hashtag_body {
        (&*HASHTAG_WHOLE, "")
    } else {
        (&*HASHTAG_MARK, "$1")
    };
    let n = re.find_iter(&s).count();
    if n > 0 {
        report.hashtags_processed += n;
        s = re.replace_all(&s, rep).into_owned();
    }

    let n = s.matches('_').count();
    if n > 0 {
        report.underscores_replaced += n;
        s = s.replace('_', " ");
    }

    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Whether `c` is an emoji codepoint (pictographs, skin-tone modifiers and
/// regional indicators).
pub fn is_emoji(c: char) -> bool {
    let mut buf = [0u8; 4];
    EMOJI.is_match(c.encode_utf8(&mut buf))
}

/// Normalizes the text of every example, keeping ids and labels.
pub fn normalize_examples(
    examples: &[Example],
    opts: NormalizeOptions,
) -> (Vec<Example>, NormalizationReport) {
    let mut total = NormalizationReport::default();
    let out = examples
        .iter()
        .map(|ex| {
            let (text, r) = normalize_with(&ex.text, opts);
            total += r;
            Example { text, ..ex.clone() }
        })
        .collect();
    (out, total)
}

/// Reads a dataset, normalizes every text and writes the result.
pub fn normalize_dataset(
    input: &Path,
    output: &Path,
    opts: NormalizeOptions,
) -> Result<NormalizationReport> {
    let examples = corpus::load_any(input, None, false)?;
    let (normalized, report) = normalize_examples(&examples, opts);
    corpus::write_dataset(output, &normalized)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mention_and_url_removed() {
        let (out, r) = normalize("@user مرحبا http://t.co/x");
        assert_eq!(out, "مرحبا");
        assert_eq!(r.urls_removed, 1);
        assert_eq!(r.mentions_removed, 1);
    }

    #[test]
    fn hashtag_body_kept_and_underscores_split() {
        let (out, r) = normalize("#free_palestine now 😀");
        assert_eq!(out, "free palestine now 😀");
        assert_eq!(r.hashtags_processed, 1);
        assert_eq!(r.underscores_replaced, 1);
    }

    #[test]
    fn empty_string() {
        assert_eq!(normalize("").0, "");
        assert_eq!(normalize("").1, NormalizationReport::default());
    }

    #[test]
    fn drop_hashtag_body_option() {
        let opts = NormalizeOptions {
            drop_hashtag_body: true,
        };
        assert_eq!(normalize_with("#free_palestine now", opts).0, "now");
    }

    #[test]
    fn exposed_matches_are_caught() {
        // rule 3 exposes a mention
        assert_eq!(normalize("@#a b").0, "b");
        // rule 4 exposes a www token
        assert_eq!(normalize("x_www.example.com y").0, "x y");
    }

    #[test]
    fn www_needs_token_start() {
        assert_eq!(normalize("awww.so cute").0, "awww.so cute");
        assert_eq!(normalize("see WWW.Site.org now").0, "see now");
    }

    #[test]
    fn keycap_hash_survives() {
        let keycap = "#\u{FE0F}\u{20E3}";
        assert_eq!(normalize(keycap).0, keycap);
    }

    #[test]
    fn emoji_classifier() {
        assert!(is_emoji('😀'));
        assert!(is_emoji('🇸'));
        assert!(is_emoji('❤'));
        assert!(!is_emoji('a'));
        assert!(!is_emoji('م'));
        assert!(!is_emoji('5'));
    }
}
