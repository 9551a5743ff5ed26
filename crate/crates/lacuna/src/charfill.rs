//! Filling character-level gaps from a frequency vocabulary.
//!
//! Damaged words arrive as patterns like `i[_]` where every `[_]` stands
//! for exactly one lost character. Candidates are vocabulary words of the
//! same character length that agree on every surviving character, ranked
//! by corpus frequency. When nothing matches a single-gap pattern, the gap
//! may instead be a lost space splitting two words; that reading is
//! accepted when the resulting parts look like vocabulary words.
//!
//! Not meaningful for every writing system: a lost character slot in
//! Classical Chinese is a whole word, which word-level filling handles
//! instead; see [`supports_language`].

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::whitespace_spans;

/// Stands for exactly one lost character.
pub const GAP_LITERAL: &str = "[_]";

/// Candidate matches reported per pattern.
pub const MAX_MATCHES: usize = 3;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CharFillError {
    #[error("pattern {0:?} has no {GAP_LITERAL} gap")]
    NoGap(String),
    #[error("malformed vocabulary file: {0}")]
    MalformedFile(String),
    #[error("unsupported vocabulary file version {0}; this build reads version 1")]
    UnsupportedVersion(u32),
}

/// One slot of a damaged-word pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternUnit {
    Literal(char),
    Gap,
}

/// Scans text into pattern units; each `[_]` is one gap, everything else
/// is a literal character. Brackets that do not spell `[_]` are literals.
pub fn pattern_units(text: &str) -> Vec<PatternUnit> {
    let mut units = Vec::new();
    let mut rest = text;
    while !rest.is_empty() {
        if let Some(after) = rest.strip_prefix(GAP_LITERAL) {
            units.push(PatternUnit::Gap);
            rest = after;
        } else {
            let c = rest.chars().next().expect("rest is non-empty");
            units.push(PatternUnit::Literal(c));
            rest = &rest[c.len_utf8()..];
        }
    }
    units
}

/// A damaged word: literal characters with at least one gap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskedWord {
    units: Vec<PatternUnit>,
}

impl MaskedWord {
    pub fn parse(text: &str) -> Result<Self, CharFillError> {
        let units = pattern_units(text);
        if !units.contains(&PatternUnit::Gap) {
            return Err(CharFillError::NoGap(text.to_string()));
        }
        Ok(MaskedWord { units })
    }

    pub fn units(&self) -> &[PatternUnit] {
        &self.units
    }

    /// Character length of the word the pattern stands for.
    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn gap_count(&self) -> usize {
        self.units.iter().filter(|u| matches!(u, PatternUnit::Gap)).count()
    }

    /// True when the word has the pattern's length and agrees with every
    /// literal unit.
    pub fn matches(&self, word: &str) -> bool {
        let mut chars = word.chars();
        for unit in &self.units {
            match (chars.next(), unit) {
                (Some(c), PatternUnit::Literal(l)) if c == *l => {}
                (Some(_), PatternUnit::Gap) => {}
                _ => return false,
            }
        }
        chars.next().is_none()
    }

    /// The characters a matching word puts into the gaps.
    fn gap_chars(&self, word: &str) -> String {
        self.units
            .iter()
            .zip(word.chars())
            .filter_map(|(unit, c)| matches!(unit, PatternUnit::Gap).then_some(c))
            .collect()
    }

    /// For a single-gap pattern, the literal text on each side of the gap.
    fn split_at_gap(&self) -> Option<(String, String)> {
        if self.gap_count() != 1 {
            return None;
        }
        let gap_at = self
            .units
            .iter()
            .position(|u| matches!(u, PatternUnit::Gap))
            .expect("one gap exists");
        let collect = |units: &[PatternUnit]| {
            units
                .iter()
                .map(|u| match u {
                    PatternUnit::Literal(c) => *c,
                    PatternUnit::Gap => unreachable!("single gap excluded"),
                })
                .collect::<String>()
        };
        Some((collect(&self.units[..gap_at]), collect(&self.units[gap_at + 1..])))
    }
}

/// Word frequencies with a char-length index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CandidateVocab {
    counts: HashMap<String, u64>,
    by_length: HashMap<usize, Vec<String>>,
}

/// Counts whitespace-split words over the given lines.
pub fn build_candidate_vocab<I, S>(lines: I) -> CandidateVocab
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut vocab = CandidateVocab::default();
    for line in lines {
        for word in line.as_ref().split_whitespace() {
            *vocab.counts.entry(word.to_string()).or_insert(0) += 1;
        }
    }
    vocab.rebuild_index();
    vocab
}

impl CandidateVocab {
    fn rebuild_index(&mut self) {
        self.by_length.clear();
        for word in self.counts.keys() {
            self.by_length.entry(word.chars().count()).or_default().push(word.clone());
        }
        for words in self.by_length.values_mut() {
            words.sort();
        }
    }

    pub fn count(&self, word: &str) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.counts.contains_key(word)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Vocabulary words of exactly `n` characters, sorted.
    pub fn words_of_len(&self, n: usize) -> &[String] {
        self.by_length.get(&n).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn to_json(&self) -> String {
        let mut words: Vec<(String, u64)> =
            self.counts.iter().map(|(w, c)| (w.clone(), *c)).collect();
        words.sort();
        let file = VocabFile { version: VOCAB_FILE_VERSION, words };
        let mut text = serde_json::to_string_pretty(&file).expect("vocabulary serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, CharFillError> {
        let file: VocabFile =
            serde_json::from_str(text).map_err(|e| CharFillError::MalformedFile(e.to_string()))?;
        if file.version != VOCAB_FILE_VERSION {
            return Err(CharFillError::UnsupportedVersion(file.version));
        }
        let mut vocab = CandidateVocab::default();
        for (word, count) in file.words {
            if word.is_empty() || word.chars().any(char::is_whitespace) {
                return Err(CharFillError::MalformedFile(format!(
                    "{word:?} is not a single word"
                )));
            }
            if vocab.counts.insert(word.clone(), count).is_some() {
                return Err(CharFillError::MalformedFile(format!("{word:?} repeats")));
            }
        }
        vocab.rebuild_index();
        Ok(vocab)
    }
}

const VOCAB_FILE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct VocabFile {
    version: u32,
    words: Vec<(String, u64)>,
}

/// Reorders candidate matches, best first. The default pipeline ranks by
/// frequency only; a reranker can consult richer context.
pub trait CandidateReranker {
    fn rerank(&self, pattern: &MaskedWord, candidates: &mut Vec<String>);
}

/// Knobs for pattern filling.
pub struct CharFillOptions<'a> {
    /// Accept the lost-space reading only when both parts are vocabulary
    /// words. The default accepts it when at least one part is, which
    /// tolerates a damaged or rare second part.
    pub split_requires_both: bool,
    /// Applied to the full ranked match list before truncation.
    pub reranker: Option<&'a dyn CandidateReranker>,
}

impl Default for CharFillOptions<'_> {
    fn default() -> Self {
        CharFillOptions { split_requires_both: false, reranker: None }
    }
}

/// The outcome of filling one pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharFillResult {
    /// Up to [`MAX_MATCHES`] candidate readings, best first. A lost-space
    /// reading appears as the two words joined by a space.
    pub matches: Vec<String>,
    /// Per match, the characters that filled the gaps (a single space for
    /// a lost-space reading).
    pub replacements: Vec<String>,
    pub used_split: bool,
}

impl CharFillResult {
    pub fn resolved(&self) -> bool {
        !self.matches.is_empty()
    }

    fn unresolved() -> Self {
        CharFillResult { matches: Vec::new(), replacements: Vec::new(), used_split: false }
    }
}

/// Fills one pattern with default options.
pub fn fill_masked_word(vocab: &CandidateVocab, pattern: &MaskedWord) -> CharFillResult {
    fill_masked_word_with(vocab, pattern, &CharFillOptions::default())
}

/// Fills one pattern: same-length vocabulary words agreeing on the
/// literals, ranked by count descending then word ascending, truncated to
/// [`MAX_MATCHES`]. A single-gap pattern that matches nothing falls back
/// to the lost-space reading.
pub fn fill_masked_word_with(
    vocab: &CandidateVocab,
    pattern: &MaskedWord,
    options: &CharFillOptions<'_>,
) -> CharFillResult {
    let mut matches: Vec<String> = vocab
        .words_of_len(pattern.len())
        .iter()
        .filter(|w| pattern.matches(w))
        .cloned()
        .collect();
    matches.sort_by(|a, b| vocab.count(b).cmp(&vocab.count(a)).then_with(|| a.cmp(b)));
    if let Some(reranker) = options.reranker {
        reranker.rerank(pattern, &mut matches);
    }
    matches.truncate(MAX_MATCHES);
    if !matches.is_empty() {
        let replacements = matches.iter().map(|w| pattern.gap_chars(w)).collect();
        return CharFillResult { matches, replacements, used_split: false };
    }
    if let Some((left, right)) = pattern.split_at_gap() {
        let accept = if options.split_requires_both {
            vocab.contains(&left) && vocab.contains(&right)
        } else {
            vocab.contains(&left) || vocab.contains(&right)
        };
        if accept {
            return CharFillResult {
                matches: vec![format!("{left} {right}")],
                replacements: vec![" ".to_string()],
                used_split: true,
            };
        }
    }
    CharFillResult::unresolved()
}

/// Rewrites a line, replacing every gap-bearing word with its best
/// reading. Unresolved patterns and all whitespace stay exactly as they
/// were.
pub fn fill_sentence_chars(vocab: &CandidateVocab, line: &str) -> String {
    fill_sentence_chars_with(vocab, line, &CharFillOptions::default())
}

pub fn fill_sentence_chars_with(
    vocab: &CandidateVocab,
    line: &str,
    options: &CharFillOptions<'_>,
) -> String {
    let mut out = String::new();
    for (is_word, span) in whitespace_spans(line) {
        if is_word && span.contains(GAP_LITERAL) {
            let pattern = MaskedWord::parse(span).expect("span contains a gap");
            let result = fill_masked_word_with(vocab, &pattern, options);
            match result.matches.first() {
                Some(best) => out.push_str(best),
                None => out.push_str(span),
            }
        } else {
            out.push_str(span);
        }
    }
    out
}

/// Character-level filling assumes segmental writing, where one slot is
/// one sound sign. It is switched off for Classical Chinese, whose slots
/// are whole words.
pub fn supports_language(code: &str) -> bool {
    code != "lzh"
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn patterns_mix_literals_and_gaps() {
        let pattern = MaskedWord::parse("i[_]").unwrap();
        assert_eq!(pattern.len(), 2);
        assert_eq!(pattern.gap_count(), 1);
        assert_eq!(
            pattern.units(),
            [PatternUnit::Literal('i'), PatternUnit::Gap]
        );
        assert!(pattern.matches("in"));
        assert!(pattern.matches("is"));
        assert!(!pattern.matches("on"));
        assert!(!pattern.matches("inn"));
        assert!(!pattern.matches("i"));
        // Loose brackets are plain literals.
        let odd = MaskedWord::parse("[[_]]").unwrap();
        assert_eq!(odd.len(), 3);
        assert_eq!(odd.gap_count(), 1);
        assert!(odd.matches("[x]"));
        assert_eq!(
            MaskedWord::parse("plain").unwrap_err(),
            CharFillError::NoGap("plain".to_string())
        );
    }

    #[test]
    fn vocabulary_counts_and_buckets() {
        let vocab = build_candidate_vocab(["in the inn", "in the garden"]);
        assert_eq!(vocab.count("in"), 2);
        assert_eq!(vocab.count("the"), 2);
        assert_eq!(vocab.count("inn"), 1);
        assert_eq!(vocab.count("gone"), 0);
        assert_eq!(vocab.len(), 4);
        assert_eq!(vocab.words_of_len(2), ["in"]);
        assert_eq!(vocab.words_of_len(3), ["inn", "the"]);
        assert!(vocab.words_of_len(9).is_empty());
    }

    #[test]
    fn matches_rank_by_count_then_word() {
        let vocab = build_candidate_vocab(["cat car cat can car cat cab cap"]);
        let pattern = MaskedWord::parse("ca[_]").unwrap();
        let result = fill_masked_word(&vocab, &pattern);
        // cat:3, car:2, then the 1-count words alphabetically; cut at 3.
        assert_eq!(result.matches, ["cat", "car", "cab"]);
        assert_eq!(result.replacements, ["t", "r", "b"]);
        assert!(!result.used_split);
        assert!(result.resolved());
    }

    #[test]
    fn multiple_gaps_fill_together() {
        let vocab = build_candidate_vocab(["portat portat amat"]);
        let pattern = MaskedWord::parse("p[_]rt[_]t").unwrap();
        let result = fill_masked_word(&vocab, &pattern);
        assert_eq!(result.matches, ["portat"]);
        assert_eq!(result.replacements, ["oa"]);
    }

    #[test]
    fn lost_space_reading_kicks_in_when_nothing_matches() {
        let vocab = build_candidate_vocab(["in the garden"]);
        // "in[_]the" is 8 chars with no 8-char word in the vocabulary.
        let pattern = MaskedWord::parse("in[_]the").unwrap();
        let result = fill_masked_word(&vocab, &pattern);
        assert_eq!(result.matches, ["in the"]);
        assert_eq!(result.replacements, [" "]);
        assert!(result.used_split);
    }

    #[test]
    fn lost_space_needs_one_part_by_default_and_both_in_strict_mode() {
        let vocab = build_candidate_vocab(["in the garden"]);
        let pattern = MaskedWord::parse("in[_]qqq").unwrap();
        let result = fill_masked_word(&vocab, &pattern);
        assert_eq!(result.matches, ["in qqq"]);
        let strict = CharFillOptions { split_requires_both: true, ..Default::default() };
        let result = fill_masked_word_with(&vocab, &pattern, &strict);
        assert!(!result.resolved());
        let both = MaskedWord::parse("in[_]the").unwrap();
        assert!(fill_masked_word_with(&vocab, &both, &strict).resolved());
    }

    #[test]
    fn unsplittable_patterns_stay_unresolved() {
        let vocab = build_candidate_vocab(["in the garden"]);
        // Two gaps: no lost-space fallback.
        let two = MaskedWord::parse("x[_]y[_]z").unwrap();
        let result = fill_masked_word(&vocab, &two);
        assert!(!result.resolved());
        assert!(result.matches.is_empty());
        // One gap, neither part known.
        let unknown = MaskedWord::parse("qq[_]zz").unwrap();
        assert!(!fill_masked_word(&vocab, &unknown).resolved());
    }

    #[test]
    fn gap_at_word_edge_splits_into_an_empty_part() {
        let vocab = build_candidate_vocab(["in the garden"]);
        // "[_]in": the left part is empty, "in" is known; with the
        // default policy the empty left still yields a reading.
        let edge = MaskedWord::parse("[_]in").unwrap();
        let result = fill_masked_word(&vocab, &edge);
        assert_eq!(result.matches, [" in"]);
        assert!(result.used_split);
        // Strict mode refuses: the empty part is not a vocabulary word.
        let strict = CharFillOptions { split_requires_both: true, ..Default::default() };
        assert!(!fill_masked_word_with(&vocab, &edge, &strict).resolved());
    }

    #[test]
    fn sentence_fill_preserves_whitespace_and_unresolved_gaps() {
        let vocab = build_candidate_vocab(["magna casa est", "casa magna"]);
        let line = " cas[_]  e[_]t\tzz[_]q ";
        let filled = fill_sentence_chars(&vocab, line);
        assert_eq!(filled, " casa  est\tzz[_]q ");
        // No gaps: the line passes through untouched.
        assert_eq!(fill_sentence_chars(&vocab, "plain words"), "plain words");
    }

    struct ReverseReranker;

    impl CandidateReranker for ReverseReranker {
        fn rerank(&self, _pattern: &MaskedWord, candidates: &mut Vec<String>) {
            candidates.reverse();
        }
    }

    #[test]
    fn reranker_reorders_before_truncation() {
        let vocab = build_candidate_vocab(["cat cat car can cab"]);
        let pattern = MaskedWord::parse("ca[_]").unwrap();
        let plain = fill_masked_word(&vocab, &pattern);
        assert_eq!(plain.matches, ["cat", "cab", "can"]);
        let options =
            CharFillOptions { reranker: Some(&ReverseReranker), ..Default::default() };
        let reranked = fill_masked_word_with(&vocab, &pattern, &options);
        // The full list [cat, cab, can, car] reverses, then truncates.
        assert_eq!(reranked.matches, ["car", "can", "cab"]);
    }

    #[test]
    fn language_support_excludes_classical_chinese() {
        assert!(supports_language("got"));
        assert!(supports_language("other"));
        assert!(!supports_language("lzh"));
    }

    #[test]
    fn vocabulary_json_roundtrip() {
        let vocab = build_candidate_vocab(["in the inn the"]);
        let back = CandidateVocab::from_json(&vocab.to_json()).unwrap();
        assert_eq!(back, vocab);
        let bumped = vocab.to_json().replace("\"version\": 1", "\"version\": 2");
        assert_eq!(
            CandidateVocab::from_json(&bumped).unwrap_err(),
            CharFillError::UnsupportedVersion(2)
        );
        assert!(CandidateVocab::from_json("{\"version\":1,\"words\":[[\"a b\",1]]}").is_err());
        assert!(CandidateVocab::from_json(
            "{\"version\":1,\"words\":[[\"a\",1],[\"a\",2]]}"
        )
        .is_err());
    }

    // Reference: scan the whole vocabulary, no length index.
    fn reference_fill(words: &[(String, u64)], pattern: &MaskedWord) -> Vec<String> {
        let mut hits: Vec<&(String, u64)> =
            words.iter().filter(|(w, _)| pattern.matches(w)).collect();
        hits.sort_by(|(wa, ca), (wb, cb)| cb.cmp(ca).then_with(|| wa.cmp(wb)));
        hits.iter().take(MAX_MATCHES).map(|(w, _)| w.clone()).collect()
    }

    fn pattern_strategy() -> impl Strategy<Value = String> {
        proptest::collection::vec(
            prop_oneof![
                3 => proptest::char::range('a', 'd').prop_map(|c| c.to_string()),
                2 => Just(GAP_LITERAL.to_string()),
            ],
            1..6,
        )
        .prop_map(|parts| parts.concat())
    }

    proptest! {
        #[test]
        fn filling_matches_the_reference(
            corpus_words in proptest::collection::vec("[a-d]{1,5}", 1..40),
            pattern_text in pattern_strategy(),
        ) {
            let vocab = build_candidate_vocab([corpus_words.join(" ")]);
            let pattern = match MaskedWord::parse(&pattern_text) {
                Ok(p) => p,
                Err(CharFillError::NoGap(_)) => return Ok(()),
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            };
            let mut unique: Vec<(String, u64)> = Vec::new();
            for word in &corpus_words {
                if !unique.iter().any(|(w, _)| w == word) {
                    unique.push((word.clone(), vocab.count(word)));
                }
            }
            let expected = reference_fill(&unique, &pattern);
            let result = fill_masked_word(&vocab, &pattern);
            if expected.is_empty() {
                prop_assert!(result.used_split || !result.resolved());
            } else {
                prop_assert_eq!(result.matches, expected);
            }
        }
    }
}
