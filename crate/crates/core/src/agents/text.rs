//! Small text utilities shared by the mock agents.

/// Lowercased tokens. Hashtags keep their `#`, possessive `'s` is dropped and
/// every other non-alphanumeric character separates tokens.
pub fn tokens(text: &str) -> Vec<String> {
    let lowered = text.to_lowercase().replace("'s ", " ").replace("\u{2019}s ", " ");
    let lowered = lowered
        .strip_suffix("'s")
        .or_else(|| lowered.strip_suffix("\u{2019}s"))
        .unwrap_or(&lowered)
        .to_string();
    let mut out = Vec::new();
    let mut current = String::new();
    for ch in lowered.chars() {
        if ch.is_alphanumeric() || (ch == '#' && current.is_empty()) {
            current.push(ch);
        } else if !current.is_empty() {
            out.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out.retain(|t| t != "#");
    out
}

/// Token positions where `phrase` (already tokenized) starts.
pub fn phrase_positions(haystack: &[String], phrase: &[String]) -> Vec<usize> {
    if phrase.is_empty() || phrase.len() > haystack.len() {
        return Vec::new();
    }
    (0..=haystack.len() - phrase.len())
        .filter(|&i| haystack[i..i + phrase.len()] == *phrase)
        .collect()
}

pub fn contains_phrase(haystack: &[String], phrase: &str) -> bool {
    !phrase_positions(haystack, &tokens(phrase)).is_empty()
}

/// Emoji and pictographic symbols, including regional-indicator flags.
pub fn emoji(text: &str) -> Vec<char> {
    text.chars()
        .filter(|&c| {
            matches!(c as u32,
                0x1F000..=0x1FAFF | 0x2600..=0x27BF)
        })
        .collect()
}

/// Whitespace-separated words with surrounding punctuation removed and any
/// trailing possessive dropped, preserving case.
pub fn raw_words(text: &str) -> impl Iterator<Item = &str> {
    text.split_whitespace().filter_map(|w| {
        let w = w.trim_matches(|c: char| !c.is_alphanumeric() && c != '#' && c != '@');
        let w = w
            .strip_suffix("'s")
            .or_else(|| w.strip_suffix("\u{2019}s"))
            .unwrap_or(w);
        (!w.is_empty()).then_some(w)
    })
}
