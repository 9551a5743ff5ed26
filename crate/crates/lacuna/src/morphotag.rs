//! Joint part-of-speech and morphology tagging over combined labels.
//!
//! A token's POS tag and its feature set collapse into one label string,
//! `UPOS|Name=Value|...` with names sorted, so tagging reduces to picking
//! one label per form. Prediction uses the same count-and-back-off scheme
//! as lemmatization: exact form first, then form suffixes from length 5
//! down to 1, then the corpus-wide most frequent label.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, Sentence};

/// Longest form suffix used as a backoff key.
pub const MAX_SUFFIX_CHARS: usize = 5;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MorphError {
    #[error("invalid label field: {0}")]
    InvalidLabelField(String),
    #[error("malformed label {0:?}")]
    MalformedLabel(String),
    #[error("no tagged tokens in the corpus")]
    NoTrainingLabels,
    #[error("line {line}: expected <token index>\\t<label>")]
    MalformedExternalLine { line: usize },
    #[error("line {line}: token index {index} out of range, corpus has {token_count} tokens")]
    ExternalIndexOutOfRange { line: usize, index: usize, token_count: usize },
    #[error("malformed tagger file: {0}")]
    MalformedFile(String),
    #[error("unsupported tagger file version {0}; this build reads version 1")]
    UnsupportedVersion(u32),
}

/// A POS tag with its morphological features, the decomposed form of a
/// combined label.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MorphLabel {
    pub upos: String,
    pub feats: BTreeMap<String, String>,
}

impl MorphLabel {
    pub fn new(upos: &str) -> Self {
        MorphLabel { upos: upos.to_string(), feats: BTreeMap::new() }
    }

    pub fn with_feat(mut self, name: &str, value: &str) -> Self {
        self.feats.insert(name.to_string(), value.to_string());
        self
    }

    pub fn compose(&self) -> Result<String, MorphError> {
        compose_label(&self.upos, self.feats.iter().map(|(n, v)| (n.as_str(), v.as_str())))
    }
}

/// Joins a POS tag and features into one label: `UPOS|Name=Value|...`
/// with feature names sorted ascending. The separators `|` and `=` are
/// structural, so no field may contain `|`, feature names may not contain
/// `=`, and the POS tag and feature names must be non-empty.
pub fn compose_label<'a, I>(upos: &str, feats: I) -> Result<String, MorphError>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    if upos.is_empty() {
        return Err(MorphError::InvalidLabelField("POS tag is empty".to_string()));
    }
    if upos.contains('|') {
        return Err(MorphError::InvalidLabelField(format!("POS tag {upos:?} contains '|'")));
    }
    let mut sorted: BTreeMap<&str, &str> = BTreeMap::new();
    for (name, value) in feats {
        if name.is_empty() {
            return Err(MorphError::InvalidLabelField("feature name is empty".to_string()));
        }
        if name.contains('|') || name.contains('=') {
            return Err(MorphError::InvalidLabelField(format!(
                "feature name {name:?} contains a separator"
            )));
        }
        if value.contains('|') {
            return Err(MorphError::InvalidLabelField(format!(
                "feature value {value:?} contains '|'"
            )));
        }
        if sorted.insert(name, value).is_some() {
            return Err(MorphError::InvalidLabelField(format!("feature {name:?} repeats")));
        }
    }
    let mut label = upos.to_string();
    for (name, value) in sorted {
        label.push('|');
        label.push_str(name);
        label.push('=');
        label.push_str(value);
    }
    Ok(label)
}

/// Splits a combined label back into its parts. The first `|`-segment is
/// the POS tag; each following segment splits on its first `=`.
pub fn decompose_label(label: &str) -> Result<MorphLabel, MorphError> {
    let malformed = || MorphError::MalformedLabel(label.to_string());
    let mut segments = label.split('|');
    let upos = segments.next().expect("split yields at least one segment");
    if upos.is_empty() {
        return Err(malformed());
    }
    let mut feats = BTreeMap::new();
    for segment in segments {
        let (name, value) = segment.split_once('=').ok_or_else(malformed)?;
        if name.is_empty() {
            return Err(malformed());
        }
        if feats.insert(name.to_string(), value.to_string()).is_some() {
            return Err(malformed());
        }
    }
    Ok(MorphLabel { upos: upos.to_string(), feats })
}

/// A label that won its bucket, with its training count.
#[derive(Debug, Clone, PartialEq)]
pub struct ChosenLabel {
    pub label: String,
    pub count: u64,
}

/// Combined labels keyed by exact form and by form suffix, with a global
/// fallback.
#[derive(Debug, Clone, PartialEq)]
pub struct TagModel {
    form_labels: HashMap<String, ChosenLabel>,
    suffix_labels: HashMap<String, ChosenLabel>,
    fallback: ChosenLabel,
}

fn last_chars(s: &str, k: usize) -> &str {
    let n = s.chars().count();
    if k >= n {
        return s;
    }
    let (idx, _) = s.char_indices().nth(n - k).expect("k < n");
    &s[idx..]
}

fn bump(bucket: &mut HashMap<String, HashMap<String, u64>>, key: &str, label: &str) {
    *bucket.entry(key.to_string()).or_default().entry(label.to_string()).or_insert(0) += 1;
}

fn winner(counts: HashMap<String, u64>) -> ChosenLabel {
    let (label, count) = counts
        .into_iter()
        .max_by(|(la, ca), (lb, cb)| ca.cmp(cb).then_with(|| lb.cmp(la)))
        .expect("buckets are never empty");
    ChosenLabel { label, count }
}

/// Trains a tagger from every token that carries a POS tag. Bucket ties
/// break toward the lexicographically smaller label.
pub fn train_tagger(corpus: &Corpus) -> Result<TagModel, MorphError> {
    let mut form_buckets: HashMap<String, HashMap<String, u64>> = HashMap::new();
    let mut suffix_buckets: HashMap<String, HashMap<String, u64>> = HashMap::new();
    let mut global: HashMap<String, u64> = HashMap::new();
    for token in corpus.words().filter(|t| !t.upos.is_empty()) {
        let label =
            compose_label(&token.upos, token.feats.iter().map(|(n, v)| (n.as_str(), v.as_str())))?;
        bump(&mut form_buckets, &token.form, &label);
        let n = token.form.chars().count();
        for k in 1..=MAX_SUFFIX_CHARS.min(n) {
            bump(&mut suffix_buckets, last_chars(&token.form, k), &label);
        }
        *global.entry(label).or_insert(0) += 1;
    }
    if global.is_empty() {
        return Err(MorphError::NoTrainingLabels);
    }
    Ok(TagModel {
        form_labels: form_buckets.into_iter().map(|(f, c)| (f, winner(c))).collect(),
        suffix_labels: suffix_buckets.into_iter().map(|(s, c)| (s, winner(c))).collect(),
        fallback: winner(global),
    })
}

impl TagModel {
    pub fn form_labels(&self) -> &HashMap<String, ChosenLabel> {
        &self.form_labels
    }

    pub fn suffix_labels(&self) -> &HashMap<String, ChosenLabel> {
        &self.suffix_labels
    }

    /// The combined label for one form: exact form, longest matching
    /// suffix, or the global fallback.
    pub fn predict_label(&self, form: &str) -> &str {
        if let Some(chosen) = self.form_labels.get(form) {
            return &chosen.label;
        }
        let n = form.chars().count();
        for k in (1..=MAX_SUFFIX_CHARS.min(n)).rev() {
            if let Some(chosen) = self.suffix_labels.get(last_chars(form, k)) {
                return &chosen.label;
            }
        }
        &self.fallback.label
    }

    /// One decomposed label per word token of the sentence.
    pub fn predict_tags(&self, sentence: &Sentence) -> Result<Vec<MorphLabel>, MorphError> {
        sentence.words().map(|t| decompose_label(self.predict_label(&t.form))).collect()
    }

    /// Overwrites every word token's POS tag and features with the
    /// model's predictions. Features come out in sorted order.
    pub fn annotate_corpus(&self, corpus: &mut Corpus) -> Result<(), MorphError> {
        for token in corpus.words_mut() {
            let label = decompose_label(self.predict_label(&token.form))?;
            token.upos = label.upos;
            token.feats = label.feats.into_iter().collect();
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut form_labels: Vec<(String, String, u64)> =
            self.form_labels.iter().map(|(f, c)| (f.clone(), c.label.clone(), c.count)).collect();
        form_labels.sort();
        let mut suffix_labels: Vec<(String, String, u64)> =
            self.suffix_labels.iter().map(|(s, c)| (s.clone(), c.label.clone(), c.count)).collect();
        suffix_labels.sort();
        let file = TagFile {
            version: TAG_FILE_VERSION,
            form_labels,
            suffix_labels,
            fallback: (self.fallback.label.clone(), self.fallback.count),
        };
        let mut text = serde_json::to_string_pretty(&file).expect("model serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, MorphError> {
        let file: TagFile =
            serde_json::from_str(text).map_err(|e| MorphError::MalformedFile(e.to_string()))?;
        if file.version != TAG_FILE_VERSION {
            return Err(MorphError::UnsupportedVersion(file.version));
        }
        for (_, label, _) in file.form_labels.iter().chain(file.suffix_labels.iter()) {
            decompose_label(label)?;
        }
        decompose_label(&file.fallback.0)?;
        Ok(TagModel {
            form_labels: file
                .form_labels
                .into_iter()
                .map(|(f, label, count)| (f, ChosenLabel { label, count }))
                .collect(),
            suffix_labels: file
                .suffix_labels
                .into_iter()
                .map(|(s, label, count)| (s, ChosenLabel { label, count }))
                .collect(),
            fallback: ChosenLabel { label: file.fallback.0, count: file.fallback.1 },
        })
    }
}

const TAG_FILE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct TagFile {
    version: u32,
    form_labels: Vec<(String, String, u64)>,
    suffix_labels: Vec<(String, String, u64)>,
    fallback: (String, u64),
}

/// Tags a corpus from externally predicted labels.
///
/// `tsv` lines are `<global token index>\t<combined label>`, zero-based
/// over the corpus's word tokens in order. Tokens without a record keep
/// their existing annotation; a token with neither a record nor a POS tag
/// yields a label with an empty POS tag. Returns one label per word token.
pub fn apply_external_labels(corpus: &Corpus, tsv: &str) -> Result<Vec<MorphLabel>, MorphError> {
    let mut labels: Vec<MorphLabel> = corpus
        .words()
        .map(|t| MorphLabel {
            upos: t.upos.clone(),
            feats: t.feats.iter().cloned().collect(),
        })
        .collect();
    for (idx, raw) in tsv.lines().enumerate() {
        let line = idx + 1;
        if raw.is_empty() {
            continue;
        }
        let (index, label) =
            raw.split_once('\t').ok_or(MorphError::MalformedExternalLine { line })?;
        let index: usize =
            index.parse().map_err(|_| MorphError::MalformedExternalLine { line })?;
        let parsed = decompose_label(label)?;
        if index >= labels.len() {
            return Err(MorphError::ExternalIndexOutOfRange {
                line,
                index,
                token_count: labels.len(),
            });
        }
        labels[index] = parsed;
    }
    Ok(labels)
}
