//! Lowercasing word/punctuation tokenizer with digit folding.

/// Token every standalone digit run (integer or decimal) is folded into.
pub const DIGIT_TOKEN: &str = "<digit>";

/// Abbreviations kept whole; their internal periods never end a sentence.
pub const ABBREVIATIONS: [&str; 2] = ["e.g.", "i.e."];

/// Splits `text` into lowercased tokens.
///
/// Words are maximal runs of alphanumeric characters (plus `_`); every other
/// non-space character is emitted as its own token. A word made only of ASCII
/// digits, optionally continued by `.digits` groups, becomes [`DIGIT_TOKEN`].
/// Digits inside alphanumerics ("ipv4") are left alone.
pub fn tokenize(text: &str) -> Vec<String> {
    let lowered = text.to_lowercase();
    let mut tokens = Vec::new();
    for chunk in lowered.split_whitespace() {
        tokenize_chunk(chunk, &mut tokens);
    }
    tokens
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn tokenize_chunk(chunk: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = chunk.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        if let Some(len) = special_at(&chars, i) {
            out.push(chars[i..i + len].iter().collect());
            i += len;
            continue;
        }
        let c = chars[i];
        if is_word_char(c) {
            let start = i;
            while i < chars.len() && is_word_char(chars[i]) {
                i += 1;
            }
            if chars[start..i].iter().all(|c| c.is_ascii_digit()) {
                // absorb decimal groups: 3.14, 1.2.3
                while i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                // in "3.5x" the tail "x" becomes a word of its own
                out.push(DIGIT_TOKEN.to_string());
            } else {
                out.push(chars[start..i].iter().collect());
            }
        } else {
            out.push(c.to_string());
            i += 1;
        }
    }
}

/// Length of a protected token (abbreviation or `<digit>`) starting at `i`.
fn special_at(chars: &[char], i: usize) -> Option<usize> {
    let at_boundary = i == 0 || !is_word_char(chars[i - 1]);
    if !at_boundary {
        return None;
    }
    std::iter::once(DIGIT_TOKEN)
        .chain(ABBREVIATIONS)
        .find_map(|special| {
            let len = special.chars().count();
            let matches =
                chars.len() >= i + len && chars[i..i + len].iter().copied().eq(special.chars());
            let ends_cleanly = chars.get(i + len).is_none_or(|c| !is_word_char(*c));
            (matches && ends_cleanly).then_some(len)
        })
}
