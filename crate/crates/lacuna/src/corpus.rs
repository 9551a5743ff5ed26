//! CoNLL-U corpus reading and writing, plus the registry of supported languages.
//!
//! The parser keeps everything it does not model verbatim: comment lines,
//! multiword-token ranges, empty nodes, and the columns this crate never
//! touches (XPOS, HEAD, DEPREL, DEPS, MISC). Serializing a parsed corpus
//! reproduces the input byte for byte, which keeps diffs against upstream
//! treebank files trustworthy.

use thiserror::Error;

/// Columns of a CoNLL-U token line.
pub const CONLLU_COLUMNS: usize = 10;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CorpusError {
    #[error("line {line}: expected {CONLLU_COLUMNS} tab-separated columns, found {found}")]
    ColumnCount { line: usize, found: usize },
    #[error("line {line}: column {column} is empty; absent values must be written as \"_\"")]
    EmptyColumn { line: usize, column: usize },
    #[error("line {line}: invalid token id {id:?}")]
    InvalidId { line: usize, id: String },
    #[error("line {line}: word ids must count up from 1 without gaps, found {found}")]
    NonConsecutiveId { line: usize, found: u32 },
    #[error("line {line}: FEATS entry {entry:?} is not name=value")]
    MalformedFeature { line: usize, entry: String },
    #[error("line {line}: duplicate feature name {name:?}")]
    DuplicateFeature { line: usize, name: String },
    #[error("line {line}: comments are only allowed before the first token of a sentence")]
    MisplacedComment { line: usize },
    #[error("unknown language code {0:?}")]
    UnknownLanguage(String),
}

/// One word line of a sentence.
///
/// `lemma` and `upos` hold the empty string when the file has `_` in that
/// column. `form` is never subject to that convention; a literal `_` form
/// stays `_`. Features keep their file order; consumers that need the
/// canonical sorted order sort on use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenRecord {
    pub id: u32,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub feats: Vec<(String, String)>,
    /// XPOS, HEAD, DEPREL, DEPS, MISC, exactly as read.
    pub passthrough: [String; 5],
}

/// A line inside a sentence block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Element {
    Word(TokenRecord),
    /// Multiword-token ranges (`1-2`) and empty nodes (`1.1`), kept verbatim.
    Passthrough(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Sentence {
    /// Comment lines including the leading `#`.
    pub comments: Vec<String>,
    pub elements: Vec<Element>,
}

impl Sentence {
    /// Word tokens in order, skipping ranges and empty nodes.
    pub fn words(&self) -> impl Iterator<Item = &TokenRecord> {
        self.elements.iter().filter_map(|e| match e {
            Element::Word(t) => Some(t),
            Element::Passthrough(_) => None,
        })
    }

    pub fn words_mut(&mut self) -> impl Iterator<Item = &mut TokenRecord> {
        self.elements.iter_mut().filter_map(|e| match e {
            Element::Word(t) => Some(t),
            Element::Passthrough(_) => None,
        })
    }

    pub fn word_count(&self) -> usize {
        self.words().count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    /// A registry code, or "other" for out-of-registry data.
    pub language: String,
    pub sentences: Vec<Sentence>,
}

impl Corpus {
    /// Number of word tokens across all sentences.
    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Sentence::word_count).sum()
    }

    pub fn words(&self) -> impl Iterator<Item = &TokenRecord> {
        self.sentences.iter().flat_map(Sentence::words)
    }

    pub fn words_mut(&mut self) -> impl Iterator<Item = &mut TokenRecord> {
        self.sentences.iter_mut().flat_map(Sentence::words_mut)
    }

    /// Tags the corpus with a language code. Only registry codes and
    /// "other" are accepted.
    pub fn set_language(&mut self, code: &str) -> Result<(), CorpusError> {
        if code != "other" && language_info(code).is_none() {
            return Err(CorpusError::UnknownLanguage(code.to_string()));
        }
        self.language = code.to_string();
        Ok(())
    }
}

fn is_range_id(col: &str) -> bool {
    match col.split_once('-') {
        Some((a, b)) => is_digits(a) && is_digits(b),
        None => false,
    }
}

fn is_empty_node_id(col: &str) -> bool {
    match col.split_once('.') {
        Some((a, b)) => is_digits(a) && is_digits(b),
        None => false,
    }
}

fn is_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

fn annotation_field(col: &str) -> String {
    if col == "_" {
        String::new()
    } else {
        col.to_string()
    }
}

fn parse_feats(col: &str, line: usize) -> Result<Vec<(String, String)>, CorpusError> {
    if col == "_" {
        return Ok(Vec::new());
    }
    let mut feats = Vec::new();
    for entry in col.split('|') {
        let (name, value) = entry.split_once('=').ok_or_else(|| CorpusError::MalformedFeature {
            line,
            entry: entry.to_string(),
        })?;
        if name.is_empty() {
            return Err(CorpusError::MalformedFeature { line, entry: entry.to_string() });
        }
        if feats.iter().any(|(n, _)| n == name) {
            return Err(CorpusError::DuplicateFeature { line, name: name.to_string() });
        }
        feats.push((name.to_string(), value.to_string()));
    }
    Ok(feats)
}

/// Parses CoNLL-U text into a corpus. The language is set to "other";
/// callers that know better use [`Corpus::set_language`].
///
/// Sentences are token blocks separated by blank lines; a final blank line
/// is not required. Word ids must count 1, 2, ... within each sentence.
/// Beyond column structure nothing is validated, so any treebank that is
/// structurally well formed parses.
pub fn parse_conllu(input: &str) -> Result<Corpus, CorpusError> {
    let mut sentences = Vec::new();
    let mut current = Sentence::default();
    let mut next_word_id = 1u32;

    for (idx, raw) in input.lines().enumerate() {
        let line = idx + 1;
        if raw.is_empty() {
            if !current.comments.is_empty() || !current.elements.is_empty() {
                sentences.push(std::mem::take(&mut current));
            }
            next_word_id = 1;
            continue;
        }
        if raw.starts_with('#') {
            if !current.elements.is_empty() {
                return Err(CorpusError::MisplacedComment { line });
            }
            current.comments.push(raw.to_string());
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() != CONLLU_COLUMNS {
            return Err(CorpusError::ColumnCount { line, found: cols.len() });
        }
        if let Some(empty) = cols.iter().position(|c| c.is_empty()) {
            return Err(CorpusError::EmptyColumn { line, column: empty + 1 });
        }
        if is_range_id(cols[0]) || is_empty_node_id(cols[0]) {
            current.elements.push(Element::Passthrough(raw.to_string()));
            continue;
        }
        let id: u32 = cols[0]
            .parse()
            .map_err(|_| CorpusError::InvalidId { line, id: cols[0].to_string() })?;
        if id != next_word_id {
            return Err(CorpusError::NonConsecutiveId { line, found: id });
        }
        next_word_id += 1;
        current.elements.push(Element::Word(TokenRecord {
            id,
            form: cols[1].to_string(),
            lemma: annotation_field(cols[2]),
            upos: annotation_field(cols[3]),
            feats: parse_feats(cols[5], line)?,
            passthrough: [cols[4], cols[6], cols[7], cols[8], cols[9]].map(str::to_string),
        }));
    }
    if !current.comments.is_empty() || !current.elements.is_empty() {
        sentences.push(current);
    }
    Ok(Corpus { language: "other".to_string(), sentences })
}

fn annotation_column(value: &str) -> &str {
    if value.is_empty() {
        "_"
    } else {
        value
    }
}

fn write_token(out: &mut String, t: &TokenRecord) {
    let feats = if t.feats.is_empty() {
        "_".to_string()
    } else {
        let entries: Vec<String> = t.feats.iter().map(|(n, v)| format!("{n}={v}")).collect();
        entries.join("|")
    };
    let [xpos, head, deprel, deps, misc] = &t.passthrough;
    out.push_str(&format!(
        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
        t.id,
        t.form,
        annotation_column(&t.lemma),
        annotation_column(&t.upos),
        xpos,
        feats,
        head,
        deprel,
        deps,
        misc,
    ));
}

/// Serializes a corpus back to CoNLL-U text. Every sentence block ends with
/// one blank line; an empty corpus serializes to the empty string.
pub fn serialize_conllu(corpus: &Corpus) -> String {
    let mut out = String::new();
    for sentence in &corpus.sentences {
        for comment in &sentence.comments {
            out.push_str(comment);
            out.push('\n');
        }
        for element in &sentence.elements {
            match element {
                Element::Word(t) => write_token(&mut out, t),
                Element::Passthrough(raw) => {
                    out.push_str(raw);
                    out.push('\n');
                }
            }
        }
        out.push('\n');
    }
    out
}

/// Static facts about one language in the supported set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LanguageInfo {
    pub code: &'static str,
    pub name: &'static str,
    pub train_sentences: u32,
    pub valid_sentences: u32,
    pub test_sentences: u32,
    /// Only gap-filling data exists; no lemma or morphology annotation.
    pub gap_fill_only: bool,
}

/// The sixteen supported languages with their corpus split sizes.
pub const LANGUAGES: [LanguageInfo; 16] = [
    lang("grc", "Ancient Greek", 24800, 3100, 3101, false),
    lang("hbo", "Ancient Hebrew", 1263, 158, 158, false),
    lang("lzh", "Classical Chinese", 68991, 8624, 8624, false),
    lang("cop", "Coptic", 1730, 216, 217, false),
    lang("got", "Gothic", 4320, 540, 541, false),
    lang("isl", "Medieval Icelandic", 21820, 2728, 2728, false),
    lang("lat", "Classical and Late Latin", 16769, 2096, 2097, false),
    lang("latm", "Medieval Latin", 30176, 3772, 3773, false),
    lang("chu", "Old Church Slavonic", 18102, 2263, 2263, false),
    lang("orv", "Old East Slavic", 24788, 3098, 3099, false),
    lang("fro", "Old French", 3113, 389, 390, false),
    lang("san", "Vedic Sanskrit", 3197, 400, 400, false),
    lang("ohu", "Old Hungarian", 21346, 2668, 2669, false),
    lang("sga", "Old Irish", 8748, 1093, 1094, true),
    lang("mga", "Middle Irish", 14308, 1789, 1789, true),
    lang("ghc", "Early Modern Irish", 24440, 3055, 3056, true),
];

const fn lang(
    code: &'static str,
    name: &'static str,
    train: u32,
    valid: u32,
    test: u32,
    gap_fill_only: bool,
) -> LanguageInfo {
    LanguageInfo {
        code,
        name,
        train_sentences: train,
        valid_sentences: valid,
        test_sentences: test,
        gap_fill_only,
    }
}

/// Looks up a language by registry code.
pub fn language_info(code: &str) -> Option<&'static LanguageInfo> {
    LANGUAGES.iter().find(|l| l.code == code)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SAMPLE: &str = "# sent_id = 1\n\
        # text = arma virumque cano\n\
        1\tarma\tarmum\tNOUN\t_\tCase=Acc|Number=Plur\t3\tobj\t_\t_\n\
        2-3\tvirumque\t_\t_\t_\t_\t_\t_\t_\t_\n\
        2\tvirum\tvir\tNOUN\t_\tCase=Acc|Number=Sing\t4\tobj\t_\t_\n\
        3\tque\tque\tCCONJ\t_\t_\t2\tcc\t_\t_\n\
        4\tcano\tcano\tVERB\t_\tMood=Ind|Number=Sing|Person=1\t0\troot\t_\t_\n\
        \n";

    #[test]
    fn parses_words_comments_and_ranges() {
        let corpus = parse_conllu(SAMPLE).unwrap();
        assert_eq!(corpus.language, "other");
        assert_eq!(corpus.sentences.len(), 1);
        let s = &corpus.sentences[0];
        assert_eq!(s.comments.len(), 2);
        assert_eq!(s.word_count(), 4);
        assert!(matches!(&s.elements[1], Element::Passthrough(raw) if raw.starts_with("2-3")));
        let first = s.words().next().unwrap();
        assert_eq!(first.form, "arma");
        assert_eq!(first.lemma, "armum");
        assert_eq!(first.upos, "NOUN");
        assert_eq!(
            first.feats,
            vec![("Case".to_string(), "Acc".to_string()), ("Number".to_string(), "Plur".to_string())]
        );
        assert_eq!(first.passthrough, ["_", "3", "obj", "_", "_"].map(str::to_string));
    }

    #[test]
    fn underscore_means_empty_for_annotation_fields_only() {
        let line = "1\t_\t_\t_\t_\t_\t0\troot\t_\t_\n\n";
        let corpus = parse_conllu(line).unwrap();
        let t = corpus.words().next().unwrap();
        assert_eq!(t.form, "_");
        assert_eq!(t.lemma, "");
        assert_eq!(t.upos, "");
        assert!(t.feats.is_empty());
        assert_eq!(serialize_conllu(&corpus), line);
    }

    #[test]
    fn roundtrip_is_byte_identical() {
        let corpus = parse_conllu(SAMPLE).unwrap();
        assert_eq!(serialize_conllu(&corpus), SAMPLE);
    }

    #[test]
    fn missing_final_blank_line_is_tolerated() {
        let input = SAMPLE.trim_end_matches('\n');
        let corpus = parse_conllu(input).unwrap();
        assert_eq!(corpus.sentences.len(), 1);
        // Serialization always closes the block.
        assert_eq!(serialize_conllu(&corpus), SAMPLE);
    }

    #[test]
    fn empty_input_gives_empty_corpus() {
        let corpus = parse_conllu("").unwrap();
        assert!(corpus.sentences.is_empty());
        assert_eq!(corpus.token_count(), 0);
        assert_eq!(serialize_conllu(&corpus), "");
    }

    #[test]
    fn sentences_split_on_blank_lines() {
        let input = "1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n\n1\tb\tb\tX\t_\t_\t0\troot\t_\t_\n\n";
        let corpus = parse_conllu(input).unwrap();
        assert_eq!(corpus.sentences.len(), 2);
        assert_eq!(corpus.token_count(), 2);
    }

    #[test]
    fn empty_nodes_pass_through() {
        let input = "1\tx\tx\tX\t_\t_\t0\troot\t_\t_\n1.1\ty\ty\tX\t_\t_\t_\t_\t_\t_\n\n";
        let corpus = parse_conllu(input).unwrap();
        assert_eq!(corpus.token_count(), 1);
        assert_eq!(serialize_conllu(&corpus), input);
    }

    #[test]
    fn wrong_column_count_is_reported_with_line() {
        let input = "1\tx\tx\n";
        assert_eq!(
            parse_conllu(input).unwrap_err(),
            CorpusError::ColumnCount { line: 1, found: 3 }
        );
    }

    #[test]
    fn empty_column_is_rejected() {
        let input = "1\tx\t\tX\t_\t_\t0\troot\t_\t_\n";
        assert_eq!(
            parse_conllu(input).unwrap_err(),
            CorpusError::EmptyColumn { line: 1, column: 3 }
        );
    }

    #[test]
    fn non_consecutive_ids_are_rejected() {
        let input = "1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n3\tb\tb\tX\t_\t_\t0\troot\t_\t_\n";
        assert_eq!(
            parse_conllu(input).unwrap_err(),
            CorpusError::NonConsecutiveId { line: 2, found: 3 }
        );
    }

    #[test]
    fn ids_must_start_at_one() {
        let input = "2\ta\ta\tX\t_\t_\t0\troot\t_\t_\n";
        assert_eq!(
            parse_conllu(input).unwrap_err(),
            CorpusError::NonConsecutiveId { line: 1, found: 2 }
        );
    }

    #[test]
    fn malformed_id_is_rejected() {
        let input = "one\ta\ta\tX\t_\t_\t0\troot\t_\t_\n";
        assert_eq!(
            parse_conllu(input).unwrap_err(),
            CorpusError::InvalidId { line: 1, id: "one".to_string() }
        );
    }

    #[test]
    fn feats_without_equals_is_rejected() {
        let input = "1\ta\ta\tX\t_\tBad\t0\troot\t_\t_\n";
        assert_eq!(
            parse_conllu(input).unwrap_err(),
            CorpusError::MalformedFeature { line: 1, entry: "Bad".to_string() }
        );
    }

    #[test]
    fn duplicate_feature_names_are_rejected() {
        let input = "1\ta\ta\tX\t_\tCase=Acc|Case=Nom\t0\troot\t_\t_\n";
        assert_eq!(
            parse_conllu(input).unwrap_err(),
            CorpusError::DuplicateFeature { line: 1, name: "Case".to_string() }
        );
    }

    #[test]
    fn feature_order_is_preserved() {
        let input = "1\ta\ta\tX\t_\tNumber=Sing|Case=Acc\t0\troot\t_\t_\n\n";
        let corpus = parse_conllu(input).unwrap();
        let t = corpus.words().next().unwrap();
        assert_eq!(t.feats[0].0, "Number");
        assert_eq!(t.feats[1].0, "Case");
        assert_eq!(serialize_conllu(&corpus), input);
    }

    #[test]
    fn comment_after_tokens_is_rejected() {
        let input = "1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n# late\n";
        assert_eq!(parse_conllu(input).unwrap_err(), CorpusError::MisplacedComment { line: 2 });
    }

    #[test]
    fn registry_has_sixteen_languages() {
        assert_eq!(LANGUAGES.len(), 16);
        let lzh = language_info("lzh").unwrap();
        assert_eq!(lzh.name, "Classical Chinese");
        assert_eq!(lzh.train_sentences, 68991);
        assert!(!lzh.gap_fill_only);
        assert!(language_info("ghc").unwrap().gap_fill_only);
        assert!(language_info("xx").is_none());
    }

    #[test]
    fn gap_fill_only_languages_are_the_irish_set() {
        let only: Vec<&str> =
            LANGUAGES.iter().filter(|l| l.gap_fill_only).map(|l| l.code).collect();
        assert_eq!(only, vec!["sga", "mga", "ghc"]);
    }

    #[test]
    fn set_language_validates_against_registry() {
        let mut corpus = parse_conllu("").unwrap();
        corpus.set_language("got").unwrap();
        assert_eq!(corpus.language, "got");
        corpus.set_language("other").unwrap();
        assert_eq!(
            corpus.set_language("klingon").unwrap_err(),
            CorpusError::UnknownLanguage("klingon".to_string())
        );
    }

    fn field() -> impl Strategy<Value = String> {
        // Tab, newline and leading '#' are structural; everything else is fair game.
        proptest::string::string_regex("[a-zA-Zāēîõ0-9,.;:_=|-]{1,12}").unwrap()
    }

    fn feats_strategy() -> impl Strategy<Value = Vec<(String, String)>> {
        proptest::collection::btree_map(
            proptest::string::string_regex("[A-Z][a-z]{1,6}").unwrap(),
            proptest::string::string_regex("[A-Za-z0-9]{1,6}").unwrap(),
            0..4,
        )
        .prop_map(|m| m.into_iter().collect())
    }

    fn token_strategy(id: u32) -> impl Strategy<Value = TokenRecord> {
        (field(), field(), field(), feats_strategy(), [field(), field(), field(), field(), field()])
            .prop_map(move |(form, lemma, upos, feats, passthrough)| TokenRecord {
                id,
                form,
                lemma,
                upos,
                feats,
                passthrough,
            })
    }

    fn sentence_strategy() -> impl Strategy<Value = Sentence> {
        (1usize..6)
            .prop_flat_map(|n| {
                let tokens: Vec<_> = (1..=n as u32).map(token_strategy).collect();
                (proptest::collection::vec("# [a-z ]{0,10}", 0..3), tokens)
            })
            .prop_map(|(comments, tokens)| Sentence {
                comments,
                elements: tokens.into_iter().map(Element::Word).collect(),
            })
    }

    proptest! {
        #[test]
        fn roundtrip_parse_serialize(sentences in proptest::collection::vec(sentence_strategy(), 0..5)) {
            let corpus = Corpus { language: "other".to_string(), sentences };
            let text = serialize_conllu(&corpus);
            let reparsed = parse_conllu(&text).unwrap();
            // Lemma/UPOS cannot distinguish "" from "_", so compare serialized form.
            prop_assert_eq!(serialize_conllu(&reparsed), text);
            prop_assert_eq!(reparsed.token_count(), corpus.token_count());
        }

        #[test]
        fn token_count_equals_word_lines(input in proptest::collection::vec(sentence_strategy(), 1..4)) {
            let corpus = Corpus { language: "other".to_string(), sentences: input };
            let text = serialize_conllu(&corpus);
            let word_lines = text.lines().filter(|l| !l.is_empty() && !l.starts_with('#')).count();
            let reparsed = parse_conllu(&text).unwrap();
            prop_assert_eq!(reparsed.token_count(), word_lines);
        }
    }
}
