use unicode_normalization::UnicodeNormalization;

const ANNOTATION: [char; 4] = ['/', '(', ')', '@'];

/// Splits a translation into comparison tokens.
///
/// Text is NFC-composed and split on whitespace. Leading punctuation is
/// dropped; trailing punctuation is dropped except for annotation marks that
/// belong to the word: `)` closing a `(` inside the token, and `/` or `@`
/// directly after a letter. Case is kept.
pub fn normalize(text: &str) -> Vec<String> {
    let composed: String = text.nfc().collect();
    composed
        .split_whitespace()
        .filter_map(clean_token)
        .collect()
}

fn clean_token(raw: &str) -> Option<String> {
    let start = raw.find(|c: char| c.is_alphanumeric())?;
    let mut chars: Vec<char> = raw[start..].chars().collect();
    while let Some(&last) = chars.last() {
        if last.is_alphanumeric() {
            break;
        }
        let keep = match last {
            ')' => chars[..chars.len() - 1].contains(&'('),
            '/' | '@' => chars.len() >= 2 && chars[chars.len() - 2].is_alphabetic(),
            _ => false,
        };
        if keep {
            break;
        }
        chars.pop();
    }
    Some(chars.into_iter().collect())
}

/// True when the token carries any annotation mark.
pub(crate) fn is_annotated(token: &str) -> bool {
    token.contains(ANNOTATION)
}
