use std::collections::BTreeMap;

use proptest::prelude::*;
use propvote::preprocess::{is_emoji, normalize, normalize_with, NormalizeOptions};
use serde::Deserialize;

#[derive(Deserialize)]
struct Golden {
    name: String,
    input: String,
    expected: String,
    #[serde(default)]
    drop_hashtag_body: bool,
}

#[test]
fn golden_cases_match_byte_for_byte() {
    let raw = include_str!("fixtures/preprocess_golden.jsonl");
    let cases: Vec<Golden> = raw
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(cases.len() >= 25);
    let mut failures = Vec::new();
    for c in &cases {
        let opts = NormalizeOptions {
            drop_hashtag_body: c.drop_hashtag_body,
        };
        let (out, _) = normalize_with(&c.input, opts);
        if out.as_bytes() != c.expected.as_bytes() {
            failures.push(format!(
                "{}: {:?} -> {:?}, expected {:?}",
                c.name, c.input, out, c.expected
            ));
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

const FRAGMENTS: &[&str] = &[
    "مرحبا",
    "الحرية",
    "قال",
    "hello",
    "World",
    "news",
    "42",
    "٣٤",
    "😀",
    "🔥",
    "🇵🇸",
    "👍🏽",
    "👨\u{200D}👩\u{200D}👧",
    "#\u{FE0F}\u{20E3}",
    "http://t.co/x",
    "https://ex.com/a?b=c",
    "HTTPS://X.Y",
    "www.site.org",
    "http:/",
    "www",
    "@user",
    "@محمد_علي",
    "@",
    "#tag",
    "#free_palestine",
    "#قطر_2022",
    "#",
    "##x",
    "_",
    "__",
    "a_b",
    ".",
    "!",
    ":",
    "?",
    "/",
];

const SEPARATORS: &[&str] = &["", " ", "  ", "\t", "\n", " \u{3000}"];

fn mixed_text() -> impl Strategy<Value = String> {
    prop::collection::vec(
        (
            prop_oneof![
                prop::sample::select(FRAGMENTS).prop_map(str::to_string),
                "[a-z_#@:/. ]{1,6}",
                "[\u{0621}-\u{064A}_#@]{1,4}",
            ],
            prop::sample::select(SEPARATORS),
        ),
        0..14,
    )
    .prop_map(|parts| parts.into_iter().map(|(f, s)| format!("{f}{s}")).collect())
}

fn is_word(c: char) -> bool {
    (c.is_alphanumeric() || c == '_') && !is_emoji(c)
}

fn emoji_multiset(s: &str) -> BTreeMap<char, usize> {
    let mut m = BTreeMap::new();
    for c in s.chars().filter(|&c| is_emoji(c)) {
        *m.entry(c).or_default() += 1;
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1500))]

    #[test]
    fn idempotent(text in mixed_text()) {
        let once = normalize(&text).0;
        let twice = normalize(&once).0;
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn idempotent_on_arbitrary_unicode(text in "\\PC{0,40}") {
        let once = normalize(&text).0;
        prop_assert_eq!(normalize(&once).0, once);
    }

    #[test]
    fn removed_patterns_do_not_survive(text in mixed_text()) {
        let out = normalize(&text).0;
        prop_assert!(!out.contains('_'));
        let lower = out.to_lowercase();
        prop_assert!(!lower.contains("http://") && !lower.contains("https://"));
        let chars: Vec<char> = out.chars().collect();
        for w in chars.windows(2) {
            prop_assert!(!(w[0] == '#' && is_word(w[1])), "{:?}", out);
            prop_assert!(!(w[0] == '@' && is_word(w[1])), "{:?}", out);
        }
        for tok in out.split(' ') {
            prop_assert!(!tok.to_lowercase().starts_with("www."), "{:?}", out);
        }
        prop_assert_eq!(out.trim(), out.as_str());
        prop_assert!(!out.contains("  "));
    }

    #[test]
    fn free_standing_emoji_are_kept(
        parts in prop::collection::vec(prop::sample::select(FRAGMENTS), 0..14)
    ) {
        let text = parts.join(" ");
        let out = normalize(&text).0;
        prop_assert_eq!(emoji_multiset(&text), emoji_multiset(&out));
    }
}
