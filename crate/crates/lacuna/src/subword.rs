//! Subword vocabulary: training, encoding, decoding, and coverage analysis.
//!
//! Vocabularies are built by iterative pair merging over whitespace-split
//! words. Words get a boundary marker (U+2581) glued to their first
//! character, so a piece that starts with the marker can only ever begin a
//! word. Encoding is greedy longest match; positions that match no piece
//! produce the unknown id and move on by one character.
//!
//! The five special pieces occupy fixed ids in every model:
//!
//! | id | piece    |
//! |----|----------|
//! | 0  | `<unk>`  |
//! | 1  | `<mask>` |
//! | 2  | `<pad>`  |
//! | 3  | `<s>`    |
//! | 4  | `</s>`   |

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const UNKNOWN_ID: u32 = 0;
pub const MASK_ID: u32 = 1;
pub const PAD_ID: u32 = 2;
pub const BEGIN_ID: u32 = 3;
pub const END_ID: u32 = 4;

pub const UNKNOWN_PIECE: &str = "<unk>";
pub const MASK_PIECE: &str = "<mask>";
pub const PAD_PIECE: &str = "<pad>";
pub const BEGIN_PIECE: &str = "<s>";
pub const END_PIECE: &str = "</s>";

/// Special pieces in id order.
pub const SPECIAL_PIECES: [&str; 5] =
    [UNKNOWN_PIECE, MASK_PIECE, PAD_PIECE, BEGIN_PIECE, END_PIECE];

/// Marks the first character of every word before encoding.
pub const BOUNDARY_MARKER: char = '\u{2581}';

pub fn is_special_id(id: u32) -> bool {
    (id as usize) < SPECIAL_PIECES.len()
}

#[derive(Debug, Error, PartialEq)]
pub enum SubwordError {
    #[error("training data contains no words")]
    EmptyTrainingData,
    #[error("vocab size cap {cap} cannot hold the {required} base pieces (specials, characters, word-initial characters)")]
    VocabTooSmall { required: usize, cap: usize },
    #[error("piece id {0} is outside the vocabulary")]
    InvalidPieceId(u32),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("unsupported model file version {0}; this build reads version 1")]
    UnsupportedVersion(u32),
    #[error("malformed model file: {0}")]
    MalformedFile(String),
    #[error("embedding row for {piece:?} has {found} values, matrix dimension is {expected}")]
    DimensionMismatch { piece: String, expected: usize, found: usize },
    #[error("no embedding row for vocabulary piece {0:?}")]
    MissingRow(String),
    #[error("invalid init policy: {0}")]
    InvalidInit(String),
}

/// An immutable subword vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct SubwordModel {
    pieces: Vec<String>,
    ids: HashMap<String, u32>,
    boundary_marker: char,
    max_piece_chars: usize,
}

impl SubwordModel {
    /// Builds a model from a piece list; position in the list is the id.
    /// The first five pieces must be the specials in their fixed order.
    pub fn from_pieces<I, S>(pieces: I, boundary_marker: char) -> Result<Self, SubwordError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let pieces: Vec<String> = pieces.into_iter().map(Into::into).collect();
        if pieces.len() < SPECIAL_PIECES.len() {
            return Err(SubwordError::InvalidModel(format!(
                "a model needs at least the {} special pieces, got {}",
                SPECIAL_PIECES.len(),
                pieces.len()
            )));
        }
        for (i, special) in SPECIAL_PIECES.iter().enumerate() {
            if pieces[i] != *special {
                return Err(SubwordError::InvalidModel(format!(
                    "piece {} must be {special:?}, found {:?}",
                    i, pieces[i]
                )));
            }
        }
        let mut ids = HashMap::with_capacity(pieces.len());
        for (i, piece) in pieces.iter().enumerate() {
            if piece.is_empty() {
                return Err(SubwordError::InvalidModel(format!("piece {i} is empty")));
            }
            if ids.insert(piece.clone(), i as u32).is_some() {
                return Err(SubwordError::InvalidModel(format!("duplicate piece {piece:?}")));
            }
        }
        let max_piece_chars = pieces.iter().map(|p| p.chars().count()).max().unwrap_or(0);
        Ok(SubwordModel { pieces, ids, boundary_marker, max_piece_chars })
    }

    pub fn vocab_size(&self) -> usize {
        self.pieces.len()
    }

    pub fn boundary_marker(&self) -> char {
        self.boundary_marker
    }

    pub fn piece(&self, id: u32) -> Option<&str> {
        self.pieces.get(id as usize).map(String::as_str)
    }

    pub fn piece_id(&self, text: &str) -> Option<u32> {
        self.ids.get(text).copied()
    }

    /// Pieces in id order.
    pub fn pieces(&self) -> impl Iterator<Item = (u32, &str)> {
        self.pieces.iter().enumerate().map(|(i, p)| (i as u32, p.as_str()))
    }

    /// True when the piece starts with the boundary marker and can
    /// therefore begin a word.
    pub fn is_word_initial(&self, id: u32) -> bool {
        self.piece(id).is_some_and(|p| p.starts_with(self.boundary_marker))
    }

    pub fn word_initial_ids(&self) -> Vec<u32> {
        (0..self.pieces.len() as u32).filter(|&id| self.is_word_initial(id)).collect()
    }

    /// Encodes one word (no whitespace) after gluing the boundary marker to
    /// its front. Greedy longest match; a position with no matching piece
    /// emits the unknown id and skips one character. The marker counts as a
    /// character here, so a word whose marked first character is unknown
    /// costs two unknown ids.
    pub fn encode_word(&self, word: &str) -> Vec<u32> {
        let mut out = Vec::new();
        self.encode_word_into(word, &mut out);
        out
    }

    fn encode_word_into(&self, word: &str, out: &mut Vec<u32>) {
        let marked = format!("{}{}", self.boundary_marker, word);
        let mut rest = marked.as_str();
        while !rest.is_empty() {
            let mut best: Option<(u32, usize)> = None;
            let mut len = 0;
            for (n_chars, c) in rest.chars().enumerate() {
                if n_chars >= self.max_piece_chars {
                    break;
                }
                len += c.len_utf8();
                if let Some(&id) = self.ids.get(&rest[..len]) {
                    best = Some((id, len));
                }
            }
            match best {
                Some((id, matched)) => {
                    out.push(id);
                    rest = &rest[matched..];
                }
                None => {
                    out.push(UNKNOWN_ID);
                    let first = rest.chars().next().expect("rest is non-empty");
                    rest = &rest[first.len_utf8()..];
                }
            }
        }
    }

    /// Encodes a line: whitespace-split words, each encoded independently.
    pub fn encode(&self, text: &str) -> Vec<u32> {
        let mut out = Vec::new();
        for word in text.split_whitespace() {
            self.encode_word_into(word, &mut out);
        }
        out
    }

    /// Decodes ids back to text. Boundary markers become spaces, except
    /// that the output never starts with one.
    pub fn decode(&self, ids: &[u32]) -> Result<String, SubwordError> {
        let mut out = String::new();
        for &id in ids {
            let piece =
                self.pieces.get(id as usize).ok_or(SubwordError::InvalidPieceId(id))?;
            for c in piece.chars() {
                if c == self.boundary_marker {
                    if !out.is_empty() {
                        out.push(' ');
                    }
                } else {
                    out.push(c);
                }
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        let specials: BTreeMap<&str, &str> = [
            ("unknown", UNKNOWN_PIECE),
            ("mask", MASK_PIECE),
            ("pad", PAD_PIECE),
            ("begin", BEGIN_PIECE),
            ("end", END_PIECE),
        ]
        .into_iter()
        .collect();
        let file = ModelFile {
            version: MODEL_FILE_VERSION,
            boundary_marker: self.boundary_marker,
            specials: specials.into_iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            pieces: self.pieces.iter().enumerate().map(|(i, p)| (p.clone(), i as u32)).collect(),
        };
        let mut text = serde_json::to_string_pretty(&file).expect("model serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, SubwordError> {
        let file: ModelFile = serde_json::from_str(text)
            .map_err(|e| SubwordError::MalformedFile(e.to_string()))?;
        if file.version != MODEL_FILE_VERSION {
            return Err(SubwordError::UnsupportedVersion(file.version));
        }
        let mut pieces = vec![String::new(); file.pieces.len()];
        let mut seen = vec![false; file.pieces.len()];
        for (text, id) in file.pieces {
            let slot = pieces
                .get_mut(id as usize)
                .ok_or_else(|| SubwordError::MalformedFile(format!("piece id {id} out of range")))?;
            if seen[id as usize] {
                return Err(SubwordError::MalformedFile(format!("piece id {id} repeats")));
            }
            seen[id as usize] = true;
            *slot = text;
        }
        let model = SubwordModel::from_pieces(pieces, file.boundary_marker)?;
        for (role, expected_id) in [
            ("unknown", UNKNOWN_ID),
            ("mask", MASK_ID),
            ("pad", PAD_ID),
            ("begin", BEGIN_ID),
            ("end", END_ID),
        ] {
            let text = file.specials.get(role).ok_or_else(|| {
                SubwordError::MalformedFile(format!("specials entry {role:?} is missing"))
            })?;
            if model.piece_id(text) != Some(expected_id) {
                return Err(SubwordError::MalformedFile(format!(
                    "special {role:?} must be piece {expected_id}, file says {text:?}"
                )));
            }
        }
        Ok(model)
    }
}

const MODEL_FILE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    boundary_marker: char,
    specials: BTreeMap<String, String>,
    pieces: Vec<(String, u32)>,
}

/// Vocabulary size cap for training.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenizerConfig {
    pub vocab_size: usize,
}

impl TokenizerConfig {
    pub const DEFAULT_VOCAB_SIZE: usize = 3000;
    /// Classical Chinese needs more room: its script has thousands of
    /// distinct characters.
    pub const CLASSICAL_CHINESE_VOCAB_SIZE: usize = 10000;

    /// The standing cap for a language: 10000 for `lzh`, 3000 otherwise.
    pub fn for_language(code: &str) -> Self {
        let vocab_size = if code == "lzh" {
            Self::CLASSICAL_CHINESE_VOCAB_SIZE
        } else {
            Self::DEFAULT_VOCAB_SIZE
        };
        TokenizerConfig { vocab_size }
    }
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig { vocab_size: Self::DEFAULT_VOCAB_SIZE }
    }
}

#[derive(PartialEq, Eq)]
struct MergeCandidate {
    count: u64,
    merged: String,
    left: String,
    right: String,
}

impl MergeCandidate {
    fn new(count: u64, left: &str, right: &str) -> Self {
        MergeCandidate {
            count,
            merged: format!("{left}{right}"),
            left: left.to_string(),
            right: right.to_string(),
        }
    }
}

// Highest count wins; ties prefer the lexicographically smaller merged
// string, then the smaller left part.
impl Ord for MergeCandidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.count
            .cmp(&other.count)
            .then_with(|| other.merged.cmp(&self.merged))
            .then_with(|| other.left.cmp(&self.left))
    }
}

impl PartialOrd for MergeCandidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Trains a vocabulary by pair merging.
///
/// The base vocabulary is the five specials, every distinct character, and
/// the marked form of every word-initial character. Merging then repeatedly
/// joins the most frequent adjacent symbol pair (ties: smaller merged
/// string, then smaller left part) until the cap is reached or no pair is
/// left. Adjacent pair occurrences are counted with overlaps, weighted by
/// word frequency, and each merge rewrites its words left to right.
pub fn train_tokenizer<I, S>(lines: I, config: &TokenizerConfig) -> Result<SubwordModel, SubwordError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut word_freqs: BTreeMap<String, u64> = BTreeMap::new();
    for line in lines {
        for word in line.as_ref().split_whitespace() {
            *word_freqs.entry(word.to_string()).or_insert(0) += 1;
        }
    }
    if word_freqs.is_empty() {
        return Err(SubwordError::EmptyTrainingData);
    }

    let mut chars: BTreeSet<char> = BTreeSet::new();
    let mut initial_chars: BTreeSet<char> = BTreeSet::new();
    for word in word_freqs.keys() {
        let mut it = word.chars();
        let first = it.next().expect("words are non-empty");
        chars.insert(first);
        initial_chars.insert(first);
        chars.extend(it);
    }

    let mut pieces: Vec<String> = SPECIAL_PIECES.iter().map(|s| s.to_string()).collect();
    pieces.extend(chars.iter().map(|c| c.to_string()));
    pieces.extend(initial_chars.iter().map(|c| format!("{BOUNDARY_MARKER}{c}")));
    if pieces.len() > config.vocab_size {
        return Err(SubwordError::VocabTooSmall {
            required: pieces.len(),
            cap: config.vocab_size,
        });
    }
    let mut known: BTreeSet<String> = pieces.iter().cloned().collect();

    let mut words: Vec<(Vec<String>, u64)> = word_freqs
        .into_iter()
        .map(|(word, freq)| {
            let mut it = word.chars();
            let first = it.next().expect("words are non-empty");
            let mut symbols = vec![format!("{BOUNDARY_MARKER}{first}")];
            symbols.extend(it.map(|c| c.to_string()));
            (symbols, freq)
        })
        .collect();

    let mut pair_counts: HashMap<(String, String), u64> = HashMap::new();
    let mut pair_words: HashMap<(String, String), BTreeSet<usize>> = HashMap::new();
    for (idx, (symbols, freq)) in words.iter().enumerate() {
        for win in symbols.windows(2) {
            let key = (win[0].clone(), win[1].clone());
            *pair_counts.entry(key.clone()).or_insert(0) += freq;
            pair_words.entry(key).or_default().insert(idx);
        }
    }
    let mut heap: BinaryHeap<MergeCandidate> = pair_counts
        .iter()
        .map(|((left, right), &count)| MergeCandidate::new(count, left, right))
        .collect();

    while pieces.len() < config.vocab_size {
        let Some(cand) = heap.pop() else { break };
        let key = (cand.left.clone(), cand.right.clone());
        let current = pair_counts.get(&key).copied().unwrap_or(0);
        if current == 0 {
            continue;
        }
        if current != cand.count {
            // Stale entry; re-queue at the real count so the pair stays live.
            heap.push(MergeCandidate::new(current, &cand.left, &cand.right));
            continue;
        }

        if known.insert(cand.merged.clone()) {
            pieces.push(cand.merged.clone());
        }

        let affected: Vec<usize> =
            pair_words.get(&key).map(|s| s.iter().copied().collect()).unwrap_or_default();
        let mut changed: BTreeSet<(String, String)> = BTreeSet::new();
        for idx in affected {
            let freq = words[idx].1;
            let old_symbols = std::mem::take(&mut words[idx].0);
            for win in old_symbols.windows(2) {
                let old_key = (win[0].clone(), win[1].clone());
                let count = pair_counts
                    .get_mut(&old_key)
                    .expect("pair bookkeeping covers every adjacent pair");
                *count = count.checked_sub(freq).expect("pair counts never go negative");
                if *count == 0 {
                    pair_counts.remove(&old_key);
                }
                if let Some(set) = pair_words.get_mut(&old_key) {
                    set.remove(&idx);
                    if set.is_empty() {
                        pair_words.remove(&old_key);
                    }
                }
                changed.insert(old_key);
            }
            let mut new_symbols = Vec::with_capacity(old_symbols.len());
            let mut i = 0;
            while i < old_symbols.len() {
                if i + 1 < old_symbols.len()
                    && old_symbols[i] == cand.left
                    && old_symbols[i + 1] == cand.right
                {
                    new_symbols.push(cand.merged.clone());
                    i += 2;
                } else {
                    new_symbols.push(old_symbols[i].clone());
                    i += 1;
                }
            }
            for win in new_symbols.windows(2) {
                let new_key = (win[0].clone(), win[1].clone());
                *pair_counts.entry(new_key.clone()).or_insert(0) += freq;
                pair_words.entry(new_key.clone()).or_default().insert(idx);
                changed.insert(new_key);
            }
            words[idx].0 = new_symbols;
        }
        for pair in changed {
            if let Some(&count) = pair_counts.get(&pair) {
                heap.push(MergeCandidate::new(count, &pair.0, &pair.1));
            }
        }
    }

    SubwordModel::from_pieces(pieces, BOUNDARY_MARKER)
}

/// How well a vocabulary covers a corpus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageReport {
    pub total_tokens: u64,
    /// Unknown tokens over total tokens; 0 for an empty corpus.
    pub unknown_fraction: f64,
    /// Frequency rank of the unknown piece: 1 plus the number of distinct
    /// piece types that occur strictly more often. None when no token is
    /// unknown.
    pub unk_rank: Option<usize>,
}

/// Encodes the corpus and reports unknown-token statistics.
pub fn coverage_report<I, S>(model: &SubwordModel, lines: I) -> CoverageReport
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut counts: HashMap<u32, u64> = HashMap::new();
    let mut total = 0u64;
    for line in lines {
        for id in model.encode(line.as_ref()) {
            *counts.entry(id).or_insert(0) += 1;
            total += 1;
        }
    }
    let unknown = counts.get(&UNKNOWN_ID).copied().unwrap_or(0);
    let unknown_fraction = if total == 0 { 0.0 } else { unknown as f64 / total as f64 };
    let unk_rank = if unknown == 0 {
        None
    } else {
        Some(1 + counts.values().filter(|&&c| c > unknown).count())
    };
    CoverageReport { total_tokens: total, unknown_fraction, unk_rank }
}

/// When coverage is bad enough to warrant a language-specific vocabulary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoveragePolicy {
    /// Percent of unknown tokens above which coverage fails.
    pub unknown_threshold_percent: f64,
    /// Coverage also fails when the unknown piece ranks this high or
    /// higher among piece frequencies.
    pub top_rank: usize,
}

impl Default for CoveragePolicy {
    fn default() -> Self {
        CoveragePolicy { unknown_threshold_percent: 5.0, top_rank: 10 }
    }
}

/// True when the report trips either policy condition: more than
/// `unknown_threshold_percent` percent unknown tokens, or an unknown piece
/// ranked within the top `top_rank` piece frequencies.
pub fn needs_custom_tokenizer(report: &CoverageReport, policy: &CoveragePolicy) -> bool {
    100.0 * report.unknown_fraction > policy.unknown_threshold_percent
        || report.unk_rank.is_some_and(|rank| rank <= policy.top_rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model_from(extra: &[&str]) -> SubwordModel {
        let mut pieces: Vec<String> = SPECIAL_PIECES.iter().map(|s| s.to_string()).collect();
        pieces.extend(extra.iter().map(|s| s.to_string()));
        SubwordModel::from_pieces(pieces, BOUNDARY_MARKER).unwrap()
    }

    #[test]
    fn specials_have_fixed_ids() {
        let model = model_from(&[]);
        assert_eq!(model.piece_id(UNKNOWN_PIECE), Some(UNKNOWN_ID));
        assert_eq!(model.piece_id(MASK_PIECE), Some(MASK_ID));
        assert_eq!(model.piece_id(PAD_PIECE), Some(PAD_ID));
        assert_eq!(model.piece_id(BEGIN_PIECE), Some(BEGIN_ID));
        assert_eq!(model.piece_id(END_PIECE), Some(END_ID));
        assert!(is_special_id(4));
        assert!(!is_special_id(5));
    }

    #[test]
    fn from_pieces_rejects_bad_vocabularies() {
        assert!(matches!(
            SubwordModel::from_pieces(["<unk>"], BOUNDARY_MARKER),
            Err(SubwordError::InvalidModel(_))
        ));
        let wrong_order = ["<mask>", "<unk>", "<pad>", "<s>", "</s>"];
        assert!(matches!(
            SubwordModel::from_pieces(wrong_order, BOUNDARY_MARKER),
            Err(SubwordError::InvalidModel(_))
        ));
        let duplicate = ["<unk>", "<mask>", "<pad>", "<s>", "</s>", "a", "a"];
        assert!(matches!(
            SubwordModel::from_pieces(duplicate, BOUNDARY_MARKER),
            Err(SubwordError::InvalidModel(_))
        ));
    }

    #[test]
    fn training_on_repeated_word_learns_the_whole_word() {
        let model = train_tokenizer(["aa aa aa"], &TokenizerConfig { vocab_size: 20 }).unwrap();
        let expected: Vec<&str> =
            vec!["<unk>", "<mask>", "<pad>", "<s>", "</s>", "a", "\u{2581}a", "\u{2581}aa"];
        let got: Vec<&str> = model.pieces().map(|(_, p)| p).collect();
        assert_eq!(got, expected);
        assert_eq!(model.encode("aa aa"), vec![7, 7]);
    }

    #[test]
    fn merge_ties_prefer_smaller_merged_string() {
        // "ab" and "cd" tie at two occurrences each; only one merge fits.
        // Base: 5 specials + {a,b,c,d} + {▁a,▁c} = 11.
        let model = train_tokenizer(["ab ab cd cd"], &TokenizerConfig { vocab_size: 12 }).unwrap();
        let pieces: Vec<&str> = model.pieces().map(|(_, p)| p).collect();
        assert_eq!(pieces.len(), 12);
        assert_eq!(pieces[11], "\u{2581}ab");
    }

    #[test]
    fn merge_ties_prefer_smaller_left_part() {
        let a = MergeCandidate::new(7, "a", "bc");
        let b = MergeCandidate::new(7, "ab", "c");
        // Equal count, equal merged string: "a" wins over "ab".
        assert!(a > b);
        let c = MergeCandidate::new(8, "z", "z");
        assert!(c > a);
    }

    #[test]
    fn training_needs_data_and_room() {
        assert_eq!(
            train_tokenizer(Vec::<&str>::new(), &TokenizerConfig::default()).unwrap_err(),
            SubwordError::EmptyTrainingData
        );
        assert_eq!(
            train_tokenizer(["   \t  "], &TokenizerConfig::default()).unwrap_err(),
            SubwordError::EmptyTrainingData
        );
        // "abc def": specials 5 + chars {a..f} 6 + marked {▁a,▁d} 2 = 13.
        assert_eq!(
            train_tokenizer(["abc def"], &TokenizerConfig { vocab_size: 7 }).unwrap_err(),
            SubwordError::VocabTooSmall { required: 13, cap: 7 }
        );
        assert!(train_tokenizer(["abc def"], &TokenizerConfig { vocab_size: 13 }).is_ok());
    }

    #[test]
    fn training_is_deterministic() {
        let lines = ["the cat sat on the mat", "the bat sat", "a cat and a bat"];
        let config = TokenizerConfig { vocab_size: 40 };
        let a = train_tokenizer(lines, &config).unwrap();
        let b = train_tokenizer(lines, &config).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn encode_takes_the_longest_match() {
        let model = model_from(&["a", "b", "c", "\u{2581}a", "\u{2581}ab"]);
        assert_eq!(model.encode("abc"), vec![
            model.piece_id("\u{2581}ab").unwrap(),
            model.piece_id("c").unwrap(),
        ]);
        // Without the longer piece the split changes.
        let model = model_from(&["a", "b", "c", "\u{2581}a"]);
        assert_eq!(model.encode("abc"), vec![
            model.piece_id("\u{2581}a").unwrap(),
            model.piece_id("b").unwrap(),
            model.piece_id("c").unwrap(),
        ]);
    }

    #[test]
    fn unknown_positions_advance_one_character() {
        let model = model_from(&["a", "x", "\u{2581}a"]);
        // "xa" marks to "▁xa": no piece starts with the marker followed by
        // x, so the marker itself is one unknown, then "x" and "a" match.
        assert_eq!(model.encode("xa"), vec![
            UNKNOWN_ID,
            model.piece_id("x").unwrap(),
            model.piece_id("a").unwrap(),
        ]);
        // "qa" costs two unknowns: the marker and the q.
        assert_eq!(model.encode("qa"), vec![
            UNKNOWN_ID,
            UNKNOWN_ID,
            model.piece_id("a").unwrap(),
        ]);
    }

    #[test]
    fn decode_turns_markers_into_spaces() {
        let model = model_from(&["ab", "c", "\u{2581}ab", "\u{2581}c"]);
        let ids = [
            model.piece_id("\u{2581}ab").unwrap(),
            model.piece_id("c").unwrap(),
            model.piece_id("\u{2581}c").unwrap(),
        ];
        assert_eq!(model.decode(&ids).unwrap(), "abc c");
        assert_eq!(model.decode(&[]).unwrap(), "");
        assert_eq!(model.decode(&[9999]).unwrap_err(), SubwordError::InvalidPieceId(9999));
    }

    #[test]
    fn json_roundtrip_preserves_the_model() {
        let model =
            train_tokenizer(["veni vidi vici"], &TokenizerConfig { vocab_size: 30 }).unwrap();
        let text = model.to_json();
        let back = SubwordModel::from_json(&text).unwrap();
        assert_eq!(back, model);
    }

    #[test]
    fn json_version_is_checked() {
        let model = model_from(&["a"]);
        let bumped = model.to_json().replace("\"version\": 1", "\"version\": 2");
        assert_eq!(
            SubwordModel::from_json(&bumped).unwrap_err(),
            SubwordError::UnsupportedVersion(2)
        );
    }

    #[test]
    fn json_specials_are_validated() {
        let model = model_from(&["a"]);
        let broken = model.to_json().replace("\"mask\": \"<mask>\"", "\"mask\": \"<pad>\"");
        assert!(matches!(
            SubwordModel::from_json(&broken).unwrap_err(),
            SubwordError::MalformedFile(_)
        ));
    }

    #[test]
    fn coverage_counts_unknowns_and_ranks_them() {
        // Cap equals the base size, so no merges happen over "aa bb".
        let model = train_tokenizer(["aa bb"], &TokenizerConfig { vocab_size: 9 }).unwrap();
        let report = coverage_report(&model, ["aa cc"]);
        // "aa" -> [▁a, a]; "cc" -> marker unknown, c unknown, c unknown.
        assert_eq!(report.total_tokens, 5);
        assert!((report.unknown_fraction - 0.6).abs() < 1e-12);
        assert_eq!(report.unk_rank, Some(1));

        let clean = coverage_report(&model, ["aa bb aa"]);
        assert_eq!(clean.unk_rank, None);
        assert_eq!(clean.unknown_fraction, 0.0);
    }

    #[test]
    fn coverage_of_empty_corpus_is_clean() {
        let model = model_from(&["a"]);
        let report = coverage_report(&model, Vec::<&str>::new());
        assert_eq!(report.total_tokens, 0);
        assert_eq!(report.unknown_fraction, 0.0);
        assert_eq!(report.unk_rank, None);
    }

    #[test]
    fn policy_trips_on_percent_or_rank() {
        let policy = CoveragePolicy::default();
        let at_threshold =
            CoverageReport { total_tokens: 100, unknown_fraction: 5.0 / 100.0, unk_rank: Some(40) };
        assert!(!needs_custom_tokenizer(&at_threshold, &policy));
        let above =
            CoverageReport { total_tokens: 100, unknown_fraction: 5.05 / 100.0, unk_rank: Some(40) };
        assert!(needs_custom_tokenizer(&above, &policy));
        let ranked =
            CoverageReport { total_tokens: 100, unknown_fraction: 0.01, unk_rank: Some(10) };
        assert!(needs_custom_tokenizer(&ranked, &policy));
        let low_rank =
            CoverageReport { total_tokens: 100, unknown_fraction: 0.01, unk_rank: Some(11) };
        assert!(!needs_custom_tokenizer(&low_rank, &policy));
        let clean = CoverageReport { total_tokens: 100, unknown_fraction: 0.0, unk_rank: None };
        assert!(!needs_custom_tokenizer(&clean, &policy));
    }

    // Straight-line reference encoder: works on char vectors, tries every
    // prefix length from longest to shortest.
    fn reference_encode_word(model: &SubwordModel, word: &str) -> Vec<u32> {
        let chars: Vec<char> = std::iter::once(model.boundary_marker())
            .chain(word.chars())
            .collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let mut matched = None;
            for len in (1..=chars.len() - i).rev() {
                let piece: String = chars[i..i + len].iter().collect();
                if let Some(id) = model.piece_id(&piece) {
                    matched = Some((id, len));
                    break;
                }
            }
            match matched {
                Some((id, len)) => {
                    out.push(id);
                    i += len;
                }
                None => {
                    out.push(UNKNOWN_ID);
                    i += 1;
                }
            }
        }
        out
    }

    proptest! {
        #[test]
        fn encode_matches_reference(words in proptest::collection::vec("[abcd]{1,8}", 1..20),
                                    probe in "[abcde]{0,12}") {
            let config = TokenizerConfig { vocab_size: 40 };
            let model = train_tokenizer([words.join(" ")], &config).unwrap();
            prop_assert_eq!(model.encode_word(&probe), reference_encode_word(&model, &probe));
        }

        #[test]
        fn decode_inverts_encode_on_covered_text(words in proptest::collection::vec("[abc]{1,6}", 1..12)) {
            let line = words.join(" ");
            let model = train_tokenizer([line.as_str()], &TokenizerConfig { vocab_size: 60 }).unwrap();
            let ids = model.encode(&line);
            prop_assert!(ids.iter().all(|&id| id != UNKNOWN_ID));
            prop_assert_eq!(model.decode(&ids).unwrap(), line);
        }

        #[test]
        fn trained_vocabulary_respects_the_cap(words in proptest::collection::vec("[ab]{1,5}", 1..10),
                                               cap in 12usize..30) {
            let model = match train_tokenizer([words.join(" ")], &TokenizerConfig { vocab_size: cap }) {
                Ok(m) => m,
                Err(SubwordError::VocabTooSmall { .. }) => return Ok(()),
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            };
            prop_assert!(model.vocab_size() <= cap);
        }
    }
}
