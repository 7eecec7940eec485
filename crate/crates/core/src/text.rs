//! Lexical normalization shared by the matcher and the engine.

use alloc::collections::BTreeSet;
use alloc::string::String;

const STOPWORDS: &[&str] = &[
    "a", "all", "an", "and", "any", "are", "as", "at", "be", "but", "by", "for", "from", "in", "into", "is", "it", "its",
    "kind", "like", "not", "of", "on", "or", "other", "size", "than", "that", "the", "their", "thereof", "this", "to", "type", "whether",
    "which", "with", "x",
];

/// Folds a lowercase word to a crude singular form.
pub fn singularize(word: &str) -> String {
    let n = word.len();
    if n > 4 && word.ends_with("ies") {
        let mut s = String::from(&word[..n - 3]);
        s.push('y');
        return s;
    }
    for suffix in ["ches", "shes", "sses", "xes", "zes"] {
        if n > suffix.len() + 1 && word.ends_with(suffix) {
            return String::from(&word[..n - 2]);
        }
    }
    if n > 3 && word.ends_with('s') && !word.ends_with("ss") && !word.ends_with("us") && !word.ends_with("is") {
        return String::from(&word[..n - 1]);
    }
    String::from(word)
}

/// Lowercases, strips punctuation, drops stopwords and tokens containing
/// digits, and singularizes. Returns a sorted set.
pub fn tokens(text: &str) -> BTreeSet<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| w.to_lowercase())
        .filter(|w| !w.chars().any(|c| c.is_numeric()))
        .map(|w| singularize(&w))
        .filter(|w| !STOPWORDS.contains(&w.as_str()))
        .collect()
}
