//! Lemmatization by compact edit scripts.
//!
//! A form maps to its lemma through a rule: either `Absolute` (replace the
//! whole form) or `Relative` (swap a prefix and a suffix around a shared
//! stem). Rules are induced from (form, lemma) pairs, counted in buckets
//! keyed by the exact form and by its final 1 to 5 characters, and applied
//! with suffix backoff at prediction time. Languages written without
//! inflection are better served by plain dictionary lookup, so that mode
//! exists too.
//!
//! ```
//! use lacuna::lemma::{induce_rule, LemmaRule};
//!
//! let rule = induce_rule("ambulavit", "ambulare").unwrap();
//! assert_eq!(rule.label(), "R:→|vit→re");
//! assert_eq!(rule.apply("amavit").unwrap(), "amare");
//! ```

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, Sentence};

/// Longest form suffix used as a backoff key.
pub const MAX_SUFFIX_CHARS: usize = 5;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LemmaError {
    #[error("cannot induce a rule for an empty form")]
    EmptyForm,
    #[error("no (form, lemma) training pairs in the corpus")]
    NoTrainingPairs,
    #[error("malformed rule label {0:?}")]
    MalformedLabel(String),
    #[error("rule {label} does not apply to form {form:?}")]
    RuleNotApplicable { label: String, form: String },
    #[error("line {line}: expected <token index>\\t<rule label>")]
    MalformedExternalLine { line: usize },
    #[error("line {line}: token index {index} out of range, corpus has {token_count} tokens")]
    ExternalIndexOutOfRange { line: usize, index: usize, token_count: usize },
    #[error("malformed lemmatizer file: {0}")]
    MalformedFile(String),
    #[error("unsupported lemmatizer file version {0}; this build reads version 1")]
    UnsupportedVersion(u32),
}

/// An edit script turning a form into its lemma.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LemmaRule {
    /// Replace the form outright.
    Absolute(String),
    /// Keep the stem, swap the affixes: a form `form_prefix + stem +
    /// form_suffix` becomes `lemma_prefix + stem + lemma_suffix`.
    Relative {
        form_prefix: String,
        lemma_prefix: String,
        form_suffix: String,
        lemma_suffix: String,
    },
}

const ESCAPABLE: [char; 3] = ['\\', '|', '→'];

fn escape_into(out: &mut String, part: &str) {
    for c in part.chars() {
        if ESCAPABLE.contains(&c) {
            out.push('\\');
        }
        out.push(c);
    }
}

/// Splits label payload text on unescaped separators and unescapes the
/// parts. Returns the parts and the separators in the order seen.
fn split_label_payload(payload: &str) -> Result<(Vec<String>, Vec<char>), ()> {
    let mut parts = vec![String::new()];
    let mut seps = Vec::new();
    let mut chars = payload.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                let next = chars.next().ok_or(())?;
                if !ESCAPABLE.contains(&next) {
                    return Err(());
                }
                parts.last_mut().expect("parts is never empty").push(next);
            }
            '→' | '|' => {
                seps.push(c);
                parts.push(String::new());
            }
            other => parts.last_mut().expect("parts is never empty").push(other),
        }
    }
    Ok((parts, seps))
}

impl LemmaRule {
    /// The no-op rule; applying it returns the form unchanged.
    pub fn identity() -> Self {
        LemmaRule::Relative {
            form_prefix: String::new(),
            lemma_prefix: String::new(),
            form_suffix: String::new(),
            lemma_suffix: String::new(),
        }
    }

    /// Serializes to the label form `A:<lemma>` or
    /// `R:<fp>→<lp>|<fs>→<ls>`, escaping `\`, `|`, `→` in every part.
    pub fn label(&self) -> String {
        match self {
            LemmaRule::Absolute(lemma) => {
                let mut out = String::from("A:");
                escape_into(&mut out, lemma);
                out
            }
            LemmaRule::Relative { form_prefix, lemma_prefix, form_suffix, lemma_suffix } => {
                let mut out = String::from("R:");
                escape_into(&mut out, form_prefix);
                out.push('→');
                escape_into(&mut out, lemma_prefix);
                out.push('|');
                escape_into(&mut out, form_suffix);
                out.push('→');
                escape_into(&mut out, lemma_suffix);
                out
            }
        }
    }

    pub fn from_label(label: &str) -> Result<Self, LemmaError> {
        let malformed = || LemmaError::MalformedLabel(label.to_string());
        if let Some(payload) = label.strip_prefix("A:") {
            let (mut parts, seps) = split_label_payload(payload).map_err(|_| malformed())?;
            if !seps.is_empty() {
                return Err(malformed());
            }
            Ok(LemmaRule::Absolute(parts.swap_remove(0)))
        } else if let Some(payload) = label.strip_prefix("R:") {
            let (parts, seps) = split_label_payload(payload).map_err(|_| malformed())?;
            if seps != ['→', '|', '→'] {
                return Err(malformed());
            }
            let mut it = parts.into_iter();
            Ok(LemmaRule::Relative {
                form_prefix: it.next().expect("four parts"),
                lemma_prefix: it.next().expect("four parts"),
                form_suffix: it.next().expect("four parts"),
                lemma_suffix: it.next().expect("four parts"),
            })
        } else {
            Err(malformed())
        }
    }

    /// Applies the rule. Relative rules require the form to carry the
    /// rule's prefix and suffix without overlap.
    pub fn apply(&self, form: &str) -> Result<String, LemmaError> {
        match self {
            LemmaRule::Absolute(lemma) => Ok(lemma.clone()),
            LemmaRule::Relative { form_prefix, lemma_prefix, form_suffix, lemma_suffix } => {
                if form.len() < form_prefix.len() + form_suffix.len()
                    || !form.starts_with(form_prefix.as_str())
                    || !form.ends_with(form_suffix.as_str())
                {
                    return Err(LemmaError::RuleNotApplicable {
                        label: self.label(),
                        form: form.to_string(),
                    });
                }
                let stem = &form[form_prefix.len()..form.len() - form_suffix.len()];
                Ok(format!("{lemma_prefix}{stem}{lemma_suffix}"))
            }
        }
    }
}

/// Longest common substring of two char sequences, as (start in a, start
/// in b, length). Ties go to the leftmost start in a, then in b.
fn longest_common_substring(a: &[char], b: &[char]) -> Option<(usize, usize, usize)> {
    let mut best: Option<(usize, usize, usize)> = None;
    let mut prev = vec![0usize; b.len() + 1];
    for i in 0..a.len() {
        let mut cur = vec![0usize; b.len() + 1];
        for j in 0..b.len() {
            if a[i] != b[j] {
                continue;
            }
            let len = prev[j] + 1;
            cur[j + 1] = len;
            let cand = (i + 1 - len, j + 1 - len, len);
            best = match best {
                None => Some(cand),
                Some(cur_best) => {
                    if cand.2 > cur_best.2
                        || (cand.2 == cur_best.2 && (cand.0, cand.1) < (cur_best.0, cur_best.1))
                    {
                        Some(cand)
                    } else {
                        Some(cur_best)
                    }
                }
            };
        }
        prev = cur;
    }
    best
}

fn chars_to_string(chars: &[char]) -> String {
    chars.iter().collect()
}

/// Induces the rule mapping `form` to `lemma`: relative around the longest
/// common substring when one of at least two characters exists, absolute
/// otherwise.
pub fn induce_rule(form: &str, lemma: &str) -> Result<LemmaRule, LemmaError> {
    if form.is_empty() {
        return Err(LemmaError::EmptyForm);
    }
    let form_chars: Vec<char> = form.chars().collect();
    let lemma_chars: Vec<char> = lemma.chars().collect();
    match longest_common_substring(&form_chars, &lemma_chars) {
        Some((fa, la, len)) if len >= 2 => Ok(LemmaRule::Relative {
            form_prefix: chars_to_string(&form_chars[..fa]),
            lemma_prefix: chars_to_string(&lemma_chars[..la]),
            form_suffix: chars_to_string(&form_chars[fa + len..]),
            lemma_suffix: chars_to_string(&lemma_chars[la + len..]),
        }),
        _ => Ok(LemmaRule::Absolute(lemma.to_string())),
    }
}

/// A rule that won its bucket, with the number of training pairs behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct ChosenRule {
    pub rule: LemmaRule,
    pub count: u64,
}

/// Winning rules keyed by exact form and by form suffix.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RuleInventory {
    form_rules: HashMap<String, ChosenRule>,
    suffix_rules: HashMap<String, ChosenRule>,
}

impl RuleInventory {
    pub fn form_rules(&self) -> &HashMap<String, ChosenRule> {
        &self.form_rules
    }

    pub fn suffix_rules(&self) -> &HashMap<String, ChosenRule> {
        &self.suffix_rules
    }
}

/// Winning lemma per exact form.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LemmaDict {
    entries: HashMap<String, (String, u64)>,
}

impl LemmaDict {
    pub fn lookup(&self, form: &str) -> Option<&str> {
        self.entries.get(form).map(|(lemma, _)| lemma.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainMode {
    /// Edit-script rules with suffix backoff. The right default for
    /// inflecting languages.
    Rules,
    /// Exact-form lookup. For languages without inflection, where edit
    /// scripts have nothing to generalize over.
    Dictionary,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LemmaModel {
    Rules(RuleInventory),
    Dictionary(LemmaDict),
}

/// Bucket counting with a deterministic winner: highest count, ties to
/// the lexicographically smaller serialized value.
struct Buckets {
    counts: HashMap<String, HashMap<String, u64>>,
}

impl Buckets {
    fn new() -> Self {
        Buckets { counts: HashMap::new() }
    }

    fn add(&mut self, key: &str, value: &str) {
        *self
            .counts
            .entry(key.to_string())
            .or_default()
            .entry(value.to_string())
            .or_insert(0) += 1;
    }

    fn winners(self) -> impl Iterator<Item = (String, String, u64)> {
        self.counts.into_iter().map(|(key, values)| {
            let (value, count) = values
                .into_iter()
                .max_by(|(va, ca), (vb, cb)| ca.cmp(cb).then_with(|| vb.cmp(va)))
                .expect("buckets are never empty");
            (key, value, count)
        })
    }
}

/// The final `k` characters of `s` (all of it when `s` is shorter).
fn last_chars(s: &str, k: usize) -> &str {
    let n = s.chars().count();
    if k >= n {
        return s;
    }
    let (idx, _) = s.char_indices().nth(n - k).expect("k < n");
    &s[idx..]
}

/// Trains a lemmatizer from every token that carries a lemma.
pub fn train_lemmatizer(corpus: &Corpus, mode: TrainMode) -> Result<LemmaModel, LemmaError> {
    let pairs: Vec<(&str, &str)> = corpus
        .words()
        .filter(|t| !t.lemma.is_empty())
        .map(|t| (t.form.as_str(), t.lemma.as_str()))
        .collect();
    if pairs.is_empty() {
        return Err(LemmaError::NoTrainingPairs);
    }
    match mode {
        TrainMode::Dictionary => {
            let mut buckets = Buckets::new();
            for (form, lemma) in pairs {
                buckets.add(form, lemma);
            }
            let mut dict = LemmaDict::default();
            for (form, lemma, count) in buckets.winners() {
                dict.entries.insert(form, (lemma, count));
            }
            Ok(LemmaModel::Dictionary(dict))
        }
        TrainMode::Rules => {
            let mut form_buckets = Buckets::new();
            let mut suffix_buckets = Buckets::new();
            let mut rules_by_label: HashMap<String, LemmaRule> = HashMap::new();
            for (form, lemma) in pairs {
                let rule = induce_rule(form, lemma)?;
                let label = rule.label();
                form_buckets.add(form, &label);
                let n = form.chars().count();
                for k in 1..=MAX_SUFFIX_CHARS.min(n) {
                    suffix_buckets.add(last_chars(form, k), &label);
                }
                rules_by_label.entry(label).or_insert(rule);
            }
            let mut inventory = RuleInventory::default();
            for (form, label, count) in form_buckets.winners() {
                let rule = rules_by_label[&label].clone();
                inventory.form_rules.insert(form, ChosenRule { rule, count });
            }
            for (suffix, label, count) in suffix_buckets.winners() {
                let rule = rules_by_label[&label].clone();
                inventory.suffix_rules.insert(suffix, ChosenRule { rule, count });
            }
            Ok(LemmaModel::Rules(inventory))
        }
    }
}

impl LemmaModel {
    /// Predicts the lemma of one form. Rules mode tries the exact-form
    /// rule, then suffix rules from the longest suffix down, skipping any
    /// rule that does not apply; dictionary mode is a lookup. The form
    /// itself is the final fallback.
    pub fn predict_form(&self, form: &str) -> String {
        match self {
            LemmaModel::Rules(inventory) => {
                if let Some(chosen) = inventory.form_rules.get(form) {
                    if let Ok(lemma) = chosen.rule.apply(form) {
                        return lemma;
                    }
                }
                let n = form.chars().count();
                for k in (1..=MAX_SUFFIX_CHARS.min(n)).rev() {
                    if let Some(chosen) = inventory.suffix_rules.get(last_chars(form, k)) {
                        if let Ok(lemma) = chosen.rule.apply(form) {
                            return lemma;
                        }
                    }
                }
                form.to_string()
            }
            LemmaModel::Dictionary(dict) => {
                dict.lookup(form).unwrap_or(form).to_string()
            }
        }
    }

    /// One predicted lemma per word token of the sentence.
    pub fn predict_lemmas(&self, sentence: &Sentence) -> Vec<String> {
        sentence.words().map(|t| self.predict_form(&t.form)).collect()
    }

    /// Overwrites every word token's lemma with the model's prediction.
    pub fn annotate_corpus(&self, corpus: &mut Corpus) {
        for token in corpus.words_mut() {
            token.lemma = self.predict_form(&token.form);
        }
    }

    pub fn to_json(&self) -> String {
        let file = match self {
            LemmaModel::Rules(inventory) => {
                let mut form_rules: Vec<(String, String, u64)> = inventory
                    .form_rules
                    .iter()
                    .map(|(f, c)| (f.clone(), c.rule.label(), c.count))
                    .collect();
                form_rules.sort();
                let mut suffix_rules: Vec<(String, String, u64)> = inventory
                    .suffix_rules
                    .iter()
                    .map(|(s, c)| (s.clone(), c.rule.label(), c.count))
                    .collect();
                suffix_rules.sort();
                LemmaFile {
                    version: LEMMA_FILE_VERSION,
                    mode: "rules".to_string(),
                    form_rules,
                    suffix_rules,
                    dictionary: Vec::new(),
                }
            }
            LemmaModel::Dictionary(dict) => {
                let mut dictionary: Vec<(String, String, u64)> = dict
                    .entries
                    .iter()
                    .map(|(f, (l, c))| (f.clone(), l.clone(), *c))
                    .collect();
                dictionary.sort();
                LemmaFile {
                    version: LEMMA_FILE_VERSION,
                    mode: "dictionary".to_string(),
                    form_rules: Vec::new(),
                    suffix_rules: Vec::new(),
                    dictionary,
                }
            }
        };
        let mut text = serde_json::to_string_pretty(&file).expect("model serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, LemmaError> {
        let file: LemmaFile =
            serde_json::from_str(text).map_err(|e| LemmaError::MalformedFile(e.to_string()))?;
        if file.version != LEMMA_FILE_VERSION {
            return Err(LemmaError::UnsupportedVersion(file.version));
        }
        match file.mode.as_str() {
            "rules" => {
                let mut inventory = RuleInventory::default();
                for (form, label, count) in file.form_rules {
                    let rule = LemmaRule::from_label(&label)?;
                    inventory.form_rules.insert(form, ChosenRule { rule, count });
                }
                for (suffix, label, count) in file.suffix_rules {
                    let rule = LemmaRule::from_label(&label)?;
                    inventory.suffix_rules.insert(suffix, ChosenRule { rule, count });
                }
                Ok(LemmaModel::Rules(inventory))
            }
            "dictionary" => {
                let mut dict = LemmaDict::default();
                for (form, lemma, count) in file.dictionary {
                    dict.entries.insert(form, (lemma, count));
                }
                Ok(LemmaModel::Dictionary(dict))
            }
            other => Err(LemmaError::MalformedFile(format!("unknown mode {other:?}"))),
        }
    }
}

const LEMMA_FILE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct LemmaFile {
    version: u32,
    mode: String,
    #[serde(default)]
    form_rules: Vec<(String, String, u64)>,
    #[serde(default)]
    suffix_rules: Vec<(String, String, u64)>,
    #[serde(default)]
    dictionary: Vec<(String, String, u64)>,
}

/// Lemmatizes a corpus from externally predicted rule labels.
///
/// `tsv` lines are `<global token index>\t<rule label>`, zero-based over
/// the corpus's word tokens in order. Every token starts at the identity
/// fallback (lemma = form); a listed rule replaces it when it applies and
/// is ignored when it does not, since external predictions are allowed to
/// be wrong. Returns one lemma per word token.
pub fn apply_external_rules(corpus: &Corpus, tsv: &str) -> Result<Vec<String>, LemmaError> {
    let forms: Vec<&str> = corpus.words().map(|t| t.form.as_str()).collect();
    let mut lemmas: Vec<String> = forms.iter().map(|f| f.to_string()).collect();
    for (idx, raw) in tsv.lines().enumerate() {
        let line = idx + 1;
        if raw.is_empty() {
            continue;
        }
        let (index, label) =
            raw.split_once('\t').ok_or(LemmaError::MalformedExternalLine { line })?;
        let index: usize =
            index.parse().map_err(|_| LemmaError::MalformedExternalLine { line })?;
        let rule = LemmaRule::from_label(label)?;
        let form = *forms.get(index).ok_or(LemmaError::ExternalIndexOutOfRange {
            line,
            index,
            token_count: forms.len(),
        })?;
        if let Ok(lemma) = rule.apply(form) {
            lemmas[index] = lemma;
        }
    }
    Ok(lemmas)
}
