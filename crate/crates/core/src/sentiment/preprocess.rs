use std::sync::OnceLock;

use regex::Regex;

fn url_pattern() -> &'static Regex {
    static URL: OnceLock<Regex> = OnceLock::new();
    URL.get_or_init(|| Regex::new(r"(?i)(https?://|www\.)\S*").expect("static regex"))
}

/// Strips hyperlinks, `@mention` tokens and `#` glyphs, then collapses
/// whitespace. Hashtag words are kept; case is preserved.
pub fn preprocess(text: &str) -> String {
    let without_urls = url_pattern().replace_all(text, " ");
    without_urls
        .split_whitespace()
        .filter(|tok| !tok.starts_with('@'))
        .map(|tok| tok.replace('#', ""))
        .filter(|tok| !tok.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Lowercased alphanumeric tokens of `text`.
pub(crate) fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}
