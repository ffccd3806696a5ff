//! Sentence segmentation over code point offsets.

use crate::argmodel::CharSpan;

/// Characters that end a sentence. Newline doubles as a fallback terminator
/// because review punctuation is often missing.
pub const TERMINATORS: [char; 9] = ['。', '！', '？', '；', '…', '?', '!', ';', '\n'];

pub fn is_terminator(c: char) -> bool {
    TERMINATORS.contains(&c)
}

/// Splits `text` into sentence spans that partition `[0, len)`.
///
/// A sentence ends after a maximal run of terminators, which stays attached
/// to it. Segments without any content character are merged into the
/// following sentence, or into the preceding one at the end of the text.
pub fn segment_sentences(text: &str) -> Vec<CharSpan> {
    split_after(text, is_terminator)
}

/// Characters that end a clause inside a sentence.
pub const CLAUSE_BREAKS: [char; 6] = ['，', ',', '、', '：', ':', '—'];

pub fn is_clause_break(c: char) -> bool {
    is_terminator(c) || CLAUSE_BREAKS.contains(&c)
}

/// Splits `text` into clause spans with the same conventions as
/// [`segment_sentences`]; every sentence boundary is a clause boundary.
pub fn segment_clauses(text: &str) -> Vec<CharSpan> {
    split_after(text, is_clause_break)
}

fn split_after(text: &str, is_terminator: fn(char) -> bool) -> Vec<CharSpan> {
    let chars: Vec<char> = text.chars().collect();
    let len = chars.len();
    if len == 0 {
        return Vec::new();
    }

    let mut raw = Vec::new();
    let mut start = 0;
    let mut pos = 0;
    while pos < len {
        if is_terminator(chars[pos]) {
            while pos < len && is_terminator(chars[pos]) {
                pos += 1;
            }
            raw.push(CharSpan { start, end: pos });
            start = pos;
        } else {
            pos += 1;
        }
    }
    if start < len {
        raw.push(CharSpan { start, end: len });
    }

    let has_content = |s: &CharSpan| chars[s.start..s.end].iter().any(|c| !c.is_whitespace() && !is_terminator(*c));

    let mut out: Vec<CharSpan> = Vec::with_capacity(raw.len());
    let mut pending: Option<usize> = None;
    for span in raw {
        let start = pending.take().unwrap_or(span.start);
        let merged = CharSpan { start, end: span.end };
        if has_content(&span) {
            out.push(merged);
        } else {
            pending = Some(start);
        }
    }
    if let Some(start) = pending {
        match out.last_mut() {
            Some(last) => last.end = len,
            None => out.push(CharSpan { start, end: len }),
        }
    }
    out
}
