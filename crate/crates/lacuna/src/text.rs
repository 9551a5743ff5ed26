//! Small shared text helpers.

/// Splits a line into alternating whitespace and word spans, each flagged
/// `(is_word, span)`. Concatenating the spans reproduces the line exactly.
pub(crate) fn whitespace_spans(line: &str) -> Vec<(bool, &str)> {
    let mut spans = Vec::new();
    let mut start = 0;
    let mut current_is_word: Option<bool> = None;
    for (idx, c) in line.char_indices() {
        let is_word = !c.is_whitespace();
        match current_is_word {
            Some(w) if w == is_word => {}
            Some(w) => {
                spans.push((w, &line[start..idx]));
                start = idx;
                current_is_word = Some(is_word);
            }
            None => current_is_word = Some(is_word),
        }
    }
    if let Some(w) = current_is_word {
        spans.push((w, &line[start..]));
    }
    spans
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spans_cover_the_line() {
        assert_eq!(whitespace_spans(""), Vec::<(bool, &str)>::new());
        assert_eq!(whitespace_spans("ab"), vec![(true, "ab")]);
        assert_eq!(
            whitespace_spans("  a \tbc "),
            vec![(false, "  "), (true, "a"), (false, " \t"), (true, "bc"), (false, " ")]
        );
        let line = "x  y\tz";
        let joined: String = whitespace_spans(line).iter().map(|(_, s)| *s).collect();
        assert_eq!(joined, line);
    }
}
